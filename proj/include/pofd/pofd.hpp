#ifndef POFD_POFD_HPP
#define POFD_POFD_HPP

#include "pofd/errors.hpp"
#include "pofd/core.hpp"
#include "pofd/calculus.hpp"
#include "pofd/estimators.hpp"
#include "pofd/basis.hpp"
#include "pofd/rng.hpp"
#include "pofd/dgp.hpp"
#include "pofd/mcar_test.hpp"
#include "pofd/csv.hpp"
#include "pofd/parallel.hpp"
#include "pofd/experiment.hpp"

#endif  // POFD_POFD_HPP
