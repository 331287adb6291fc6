#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "resop/hydro.hpp"

namespace resop::decomp {

// One subproblem of the weighted decomposition. w1 weights power, w2 the
// AAPFD term, w3 water revenue; components sum to 1.
struct WeightVector {
  double w1 = 0.0, w2 = 0.0, w3 = 0.0;

  double sum() const { return w1 + w2 + w3; }
  bool operator==(const WeightVector&) const = default;
};

// All weight triples with components in {0.05, 0.10, ..., 0.90} summing to 1,
// in lexicographic order: 171 subproblems from [0.05,0.05,0.90] to
// [0.90,0.05,0.05].
std::vector<WeightVector> weight_grid();

struct Bound {
  double min_value = 0.0;
  double max_value = 0.0;
  std::string provenance;  // sampled | trained | user-supplied
};

struct ObjectiveBounds {
  Bound power, aapfd, water;
  uint64_t seed = 0;

  // AAPFD minimum is floored here before its reciprocal enters the reward.
  static constexpr double kAapfdFloor = 1e-6;

  // min < max per objective and the AAPFD floor; throws DataError otherwise.
  void validate() const;
};

// Normalized scalarized reward in [0, 1]. Power and water terms are min-max
// normalized; the AAPFD term is normalized on the reciprocal scale so that
// smaller AAPFD scores higher. Each term is clamped to [0, 1] because later
// policies may exceed sampled bounds.
double scalarize(const hydro::ObjectiveTriple& obj, const WeightVector& w,
                 const ObjectiveBounds& bounds);

struct SampleBoundsOptions {
  double widen_fraction = 0.05;  // widens each side by this fraction of the observed range
  int min_feasible = 2;
};

// Extrema of a set of feasible-schedule objective values, widened on each side
// and floored for AAPFD. Shared by the sampling estimator (bounds.hpp) and the
// single-objective training estimator (trainer.hpp). Throws DataError on too
// few samples or a degenerate (min == max) range.
ObjectiveBounds finalize_bounds(const std::vector<hydro::ObjectiveTriple>& feasible_samples,
                                const SampleBoundsOptions& opts, const std::string& provenance,
                                uint64_t seed);

void write_bounds_file(std::ostream& os, const ObjectiveBounds& bounds);
void write_bounds_file(const std::string& path, const ObjectiveBounds& bounds);
ObjectiveBounds read_bounds_file(std::istream& is);
ObjectiveBounds read_bounds_file(const std::string& path);

}  // namespace resop::decomp
