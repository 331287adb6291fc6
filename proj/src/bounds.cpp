#include "resop/bounds.hpp"

#include "resop/error.hpp"
#include "resop/parallel.hpp"

namespace resop::decomp {

ObjectiveBounds estimate_bounds_sampled(const hydro::SystemInstance& inst,
                                        const env::ActionSpace& space, int budget, uint64_t seed,
                                        const SampleBoundsOptions& opts) {
  if (budget < 1) throw ContractError("estimate_bounds: budget must be >= 1");

  std::vector<hydro::ObjectiveTriple> triples(budget);
  std::vector<uint8_t> feasible(budget, 0);
  parallel::for_each_index(budget, [&](int b) {
    Rng rng(Rng::derive_seed(seed, static_cast<uint64_t>(b)));
    const hydro::Decisions d = env::random_grid_decisions(inst, space, rng);
    const hydro::OperationSchedule sched = hydro::derive_trajectory(inst, d);
    if (hydro::check_constraints(inst, sched).feasible) {
      triples[b] = hydro::objective_triple(inst, sched);
      feasible[b] = 1;
    }
  });

  std::vector<hydro::ObjectiveTriple> kept;
  kept.reserve(budget);
  for (int b = 0; b < budget; ++b)
    if (feasible[b]) kept.push_back(triples[b]);
  return finalize_bounds(kept, opts, "sampled", seed);
}

}  // namespace resop::decomp
