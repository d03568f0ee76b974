#pragma once

// Umbrella header for the LDLtr library: factored trust-region solver,
// baselines, test-problem catalog, and benchmark utilities.

#include "ldltr/bench.hpp"
#include "ldltr/driver.hpp"
#include "ldltr/factored_ops.hpp"
#include "ldltr/linesearch.hpp"
#include "ldltr/ms_solver.hpp"
#include "ldltr/problems.hpp"
#include "ldltr/qn_update.hpp"
#include "ldltr/shift_backtrack.hpp"
#include "ldltr/shifted_solve.hpp"
#include "ldltr/subproblem_exact.hpp"
#include "ldltr/subproblem_shift.hpp"
#include "ldltr/types.hpp"
