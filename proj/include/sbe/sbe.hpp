#pragma once

// Umbrella header.

#include "sbe/errors.hpp"
#include "sbe/config.hpp"
#include "sbe/exact.hpp"
#include "sbe/combinatorics.hpp"
#include "sbe/distribution.hpp"
#include "sbe/enumeration.hpp"
#include "sbe/random.hpp"
#include "sbe/stein_kernel.hpp"
#include "sbe/stein_expectation.hpp"
#include "sbe/censoring.hpp"
#include "sbe/kernels.hpp"
#include "sbe/hoeffding.hpp"
#include "sbe/u_stat.hpp"
#include "sbe/ustat_lemmas.hpp"
#include "sbe/monte_carlo.hpp"
#include "sbe/ks.hpp"
#include "sbe/nonlinear_stat.hpp"
#include "sbe/rci.hpp"
#include "sbe/scaling.hpp"
#include "sbe/report.hpp"
#include "sbe/checks.hpp"
