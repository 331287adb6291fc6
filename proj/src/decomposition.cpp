#include "resop/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "resop/error.hpp"

namespace resop::decomp {

std::vector<WeightVector> weight_grid() {
  // Components are multiples of 0.05; with a 0.05 floor on each of the three
  // weights the integer triples (k1,k2,k3), k >= 1, k1+k2+k3 = 20 enumerate
  // all 171 subproblems.
  std::vector<WeightVector> grid;
  grid.reserve(171);
  for (int k1 = 1; k1 <= 18; ++k1)
    for (int k2 = 1; k2 <= 19 - k1; ++k2) {
      const int k3 = 20 - k1 - k2;
      grid.push_back({k1 * 0.05, k2 * 0.05, k3 * 0.05});
    }
  return grid;
}

void ObjectiveBounds::validate() const {
  auto check = [](const Bound& b, const char* name) {
    if (!(b.min_value < b.max_value)) {
      std::ostringstream os;
      os << "objective bounds for " << name << " are degenerate: min " << b.min_value
         << " >= max " << b.max_value
         << " (the instance may admit only one feasible objective value)";
      throw DataError(os.str());
    }
  };
  check(power, "power");
  check(aapfd, "aapfd");
  check(water, "water");
  if (aapfd.min_value < kAapfdFloor)
    throw DataError("AAPFD lower bound fell below its reciprocal floor");
}

double scalarize(const hydro::ObjectiveTriple& obj, const WeightVector& w,
                 const ObjectiveBounds& bounds) {
  auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
  const double term_power =
      clamp01((obj.power - bounds.power.min_value) / (bounds.power.max_value - bounds.power.min_value));
  const double inv_lo = 1.0 / bounds.aapfd.max_value;
  const double inv_hi = 1.0 / bounds.aapfd.min_value;
  const double inv = 1.0 / std::max(obj.aapfd, ObjectiveBounds::kAapfdFloor);
  const double term_aapfd = clamp01((inv - inv_lo) / (inv_hi - inv_lo));
  const double term_water =
      clamp01((obj.water_revenue - bounds.water.min_value) /
              (bounds.water.max_value - bounds.water.min_value));
  return w.w1 * term_power + w.w2 * term_aapfd + w.w3 * term_water;
}

ObjectiveBounds finalize_bounds(const std::vector<hydro::ObjectiveTriple>& feasible_samples,
                                const SampleBoundsOptions& opts, const std::string& provenance,
                                uint64_t seed) {
  if (static_cast<int>(feasible_samples.size()) < opts.min_feasible) {
    std::ostringstream os;
    os << "bound estimation found only " << feasible_samples.size()
       << " feasible schedules (need >= " << opts.min_feasible
       << "); widen the sampling budget or loosen the instance";
    throw DataError(os.str());
  }
  auto widen = [&](double lo, double hi) {
    const double margin = opts.widen_fraction * (hi - lo);
    return Bound{lo - margin, hi + margin, provenance};
  };
  double p_lo = std::numeric_limits<double>::infinity(), p_hi = -p_lo;
  double a_lo = p_lo, a_hi = -p_lo;
  double w_lo = p_lo, w_hi = -p_lo;
  for (const auto& o : feasible_samples) {
    p_lo = std::min(p_lo, o.power);
    p_hi = std::max(p_hi, o.power);
    a_lo = std::min(a_lo, o.aapfd);
    a_hi = std::max(a_hi, o.aapfd);
    w_lo = std::min(w_lo, o.water_revenue);
    w_hi = std::max(w_hi, o.water_revenue);
  }
  ObjectiveBounds bounds;
  bounds.power = widen(p_lo, p_hi);
  bounds.aapfd = widen(a_lo, a_hi);
  bounds.aapfd.min_value = std::max(bounds.aapfd.min_value, ObjectiveBounds::kAapfdFloor);
  bounds.water = widen(w_lo, w_hi);
  bounds.seed = seed;
  bounds.validate();
  return bounds;
}

void write_bounds_file(std::ostream& os, const ObjectiveBounds& bounds) {
  os.precision(17);
  os << "resop-bounds v1\n";
  os << "seed " << bounds.seed << "\n";
  auto line = [&os](const char* name, double v, const std::string& prov) {
    os << name << " " << v << " " << (prov.empty() ? "user-supplied" : prov) << "\n";
  };
  line("power_min", bounds.power.min_value, bounds.power.provenance);
  line("power_max", bounds.power.max_value, bounds.power.provenance);
  line("aapfd_min", bounds.aapfd.min_value, bounds.aapfd.provenance);
  line("aapfd_max", bounds.aapfd.max_value, bounds.aapfd.provenance);
  line("water_min", bounds.water.min_value, bounds.water.provenance);
  line("water_max", bounds.water.max_value, bounds.water.provenance);
}

void write_bounds_file(const std::string& path, const ObjectiveBounds& bounds) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open bounds file for writing: " + path);
  write_bounds_file(os, bounds);
}

ObjectiveBounds read_bounds_file(std::istream& is) {
  std::string header;
  if (!std::getline(is, header) || header != "resop-bounds v1")
    throw DataError("bounds file: missing 'resop-bounds v1' header");
  ObjectiveBounds bounds;
  bool saw[7] = {};
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "seed") {
      if (!(ls >> bounds.seed)) throw DataError("bounds file: bad seed line");
      saw[6] = true;
      continue;
    }
    double value;
    std::string prov;
    if (!(ls >> value >> prov)) throw DataError("bounds file: bad line: " + line);
    if (key == "power_min") bounds.power.min_value = value, bounds.power.provenance = prov, saw[0] = true;
    else if (key == "power_max") bounds.power.max_value = value, saw[1] = true;
    else if (key == "aapfd_min") bounds.aapfd.min_value = value, bounds.aapfd.provenance = prov, saw[2] = true;
    else if (key == "aapfd_max") bounds.aapfd.max_value = value, saw[3] = true;
    else if (key == "water_min") bounds.water.min_value = value, bounds.water.provenance = prov, saw[4] = true;
    else if (key == "water_max") bounds.water.max_value = value, saw[5] = true;
    else throw DataError("bounds file: unknown key '" + key + "'");
  }
  for (bool s : saw)
    if (!s) throw DataError("bounds file: missing one of the six labeled values or the seed");
  bounds.validate();
  return bounds;
}

ObjectiveBounds read_bounds_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open bounds file: " + path);
  return read_bounds_file(is);
}

}  // namespace resop::decomp
