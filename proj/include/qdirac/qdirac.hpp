#ifndef QDIRAC_QDIRAC_HPP
#define QDIRAC_QDIRAC_HPP

#include "precision.hpp"
#include "format.hpp"
#include "dad.hpp"
#include "scenario.hpp"
#include "postselect.hpp"
#include "pulse.hpp"
#include "momentum.hpp"

#endif  // QDIRAC_QDIRAC_HPP
