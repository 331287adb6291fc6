#pragma once

#include "resop/decomposition.hpp"
#include "resop/env.hpp"

namespace resop::decomp {

// Objective extrema over `budget` uniformly random grid schedules, rejecting
// infeasible draws, widened per `opts`. Draw b uses its own generator derived
// from (seed, b), so the result does not depend on evaluation order and the
// parallel and serial paths agree bitwise.
ObjectiveBounds estimate_bounds_sampled(const hydro::SystemInstance& inst,
                                        const env::ActionSpace& space, int budget, uint64_t seed,
                                        const SampleBoundsOptions& opts = {});

}  // namespace resop::decomp
