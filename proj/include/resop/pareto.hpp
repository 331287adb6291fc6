#pragma once

#include <vector>

#include "resop/hydro.hpp"

namespace resop::pareto {

// Exact dominated hypervolume of a 3-objective front against a reference
// point, all objectives oriented to maximization as (power, -aapfd,
// water_revenue). Every point must be at least as good as the reference on
// each axis; order- and duplicate-insensitive. O(n^2 log n) z-sweep.
double hypervolume_3d(const std::vector<hydro::ObjectiveTriple>& front,
                      const hydro::ObjectiveTriple& reference);

struct ImprovementReport {
  // Signed percentages of front A's best over front B's best per objective;
  // positive means A improves (more power, lower AAPFD, more revenue).
  double power_pct = 0.0;
  double aapfd_pct = 0.0;
  double water_pct = 0.0;
};

ImprovementReport improvement_report(const std::vector<hydro::ObjectiveTriple>& front_a,
                                     const std::vector<hydro::ObjectiveTriple>& front_b);

}  // namespace resop::pareto
