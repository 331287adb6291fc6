#include "resop/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "resop/error.hpp"

namespace resop::pareto {

namespace {

struct Point3 {
  double x, y, z;  // maximization coordinates relative to the reference
};

// 2D dominated area of maximization points against the origin: scanning x
// descending, a point whose y beats the running maximum adds a strip of
// width x between the old and new maximum.
double staircase_area(std::vector<std::pair<double, double>> pts) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second > b.second;
  });
  double area = 0.0, best_y = 0.0;
  for (const auto& [x, y] : pts) {
    if (y > best_y) {
      area += x * (y - best_y);
      best_y = y;
    }
  }
  return area;
}

}  // namespace

double hypervolume_3d(const std::vector<hydro::ObjectiveTriple>& front,
                      const hydro::ObjectiveTriple& reference) {
  if (front.empty()) return 0.0;
  std::vector<Point3> pts;
  pts.reserve(front.size());
  for (size_t k = 0; k < front.size(); ++k) {
    const auto& p = front[k];
    const Point3 q{p.power - reference.power, reference.aapfd - p.aapfd,
                   p.water_revenue - reference.water_revenue};
    if (q.x < 0.0 || q.y < 0.0 || q.z < 0.0) {
      std::ostringstream os;
      os << "hypervolume_3d: point " << k << " (power=" << p.power << ", aapfd=" << p.aapfd
         << ", water=" << p.water_revenue << ") does not dominate the reference";
      throw ContractError(os.str());
    }
    pts.push_back(q);
  }
  // Sweep z from high to low; between consecutive z levels the dominated
  // volume is the 2D staircase area of all points with z above the slab.
  std::sort(pts.begin(), pts.end(), [](const Point3& a, const Point3& b) { return a.z > b.z; });
  double volume = 0.0;
  std::vector<std::pair<double, double>> active;
  for (size_t k = 0; k < pts.size(); ++k) {
    active.push_back({pts[k].x, pts[k].y});
    const double z_hi = pts[k].z;
    const double z_lo = (k + 1 < pts.size()) ? pts[k + 1].z : 0.0;
    if (z_hi > z_lo) volume += staircase_area(active) * (z_hi - z_lo);
  }
  return volume;
}

ImprovementReport improvement_report(const std::vector<hydro::ObjectiveTriple>& front_a,
                                     const std::vector<hydro::ObjectiveTriple>& front_b) {
  if (front_a.empty() || front_b.empty())
    throw ContractError("improvement_report: both fronts must be nonempty");
  auto best = [](const std::vector<hydro::ObjectiveTriple>& front) {
    double power = -std::numeric_limits<double>::infinity();
    double aapfd = std::numeric_limits<double>::infinity();
    double water = -std::numeric_limits<double>::infinity();
    for (const auto& p : front) {
      power = std::max(power, p.power);
      aapfd = std::min(aapfd, p.aapfd);
      water = std::max(water, p.water_revenue);
    }
    return hydro::ObjectiveTriple{power, aapfd, water};
  };
  const auto a = best(front_a);
  const auto b = best(front_b);
  ImprovementReport report;
  report.power_pct = 100.0 * (a.power - b.power) / std::abs(b.power);
  report.aapfd_pct = 100.0 * (b.aapfd - a.aapfd) / std::abs(b.aapfd);
  report.water_pct = 100.0 * (a.water_revenue - b.water_revenue) / std::abs(b.water_revenue);
  return report;
}

}  // namespace resop::pareto
