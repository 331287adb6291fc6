#include "resop/moea.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "resop/error.hpp"
#include "resop/parallel.hpp"

namespace resop::moea {

void MoeaConfig::validate() const {
  if (population < 4 || generations < 1) throw DataError("moea config: population/generations too small");
  if (crossover_prob < 0 || crossover_prob > 1 || mutation_prob < 0 || mutation_prob > 1 ||
      update_prob < 0 || update_prob > 1)
    throw DataError("moea config: probabilities must lie in [0,1]");
  if (neighborhood < 2) throw DataError("moea config: neighborhood must be >= 2");
}

int genome_length(const hydro::SystemInstance& inst) {
  const int I = inst.num_reservoirs(), J = inst.num_areas(), T = inst.horizon;
  return I * T + 2 * I * J * T;
}

hydro::Decisions decode_genome(const hydro::SystemInstance& inst, const Genome& genome) {
  const int I = inst.num_reservoirs(), J = inst.num_areas(), T = inst.horizon;
  if (static_cast<int>(genome.genes.size()) != genome_length(inst))
    throw ContractError("decode_genome: genome length does not match the instance");
  hydro::Decisions d = hydro::Decisions::zeros(inst);
  int g = 0;
  for (int i = 0; i < I; ++i) {
    const auto& r = inst.reservoirs[i];
    for (int t = 0; t < T; ++t)
      d.turbine_flow(i, t) =
          r.turbine_flow_lo + genome.genes[g++] * (r.turbine_flow_hi - r.turbine_flow_lo);
  }
  const int flag_base = g;
  for (int i = 0; i < I; ++i)
    for (int j = 0; j < J; ++j)
      for (int t = 0; t < T; ++t) d.supply_flag(i, j, t) = genome.genes[g++] >= 0.5 ? 1 : 0;
  for (int i = 0; i < I; ++i)
    for (int j = 0; j < J; ++j)
      for (int t = 0; t < T; ++t) {
        const double cap = inst.areas[j].supply_max[t] / inst.period_seconds;
        const double flow = genome.genes[g++] * cap;
        d.supply_flow(i, j, t) = d.supply_flag(i, j, t) ? flow : 0.0;
      }
  (void)flag_base;
  return d;
}

Genome encode_decisions(const hydro::SystemInstance& inst, const hydro::Decisions& decisions) {
  const int I = inst.num_reservoirs(), J = inst.num_areas(), T = inst.horizon;
  Genome genome;
  genome.genes.reserve(genome_length(inst));
  for (int i = 0; i < I; ++i) {
    const auto& r = inst.reservoirs[i];
    const double span = r.turbine_flow_hi - r.turbine_flow_lo;
    for (int t = 0; t < T; ++t)
      genome.genes.push_back(span > 0 ? (decisions.turbine_flow(i, t) - r.turbine_flow_lo) / span
                                      : 0.0);
  }
  for (int i = 0; i < I; ++i)
    for (int j = 0; j < J; ++j)
      for (int t = 0; t < T; ++t) genome.genes.push_back(decisions.supply_flag(i, j, t) ? 1.0 : 0.0);
  for (int i = 0; i < I; ++i)
    for (int j = 0; j < J; ++j)
      for (int t = 0; t < T; ++t) {
        const double cap = inst.areas[j].supply_max[t] / inst.period_seconds;
        genome.genes.push_back(cap > 0 ? decisions.supply_flow(i, j, t) / cap : 0.0);
      }
  return genome;
}

bool dominates(const hydro::ObjectiveTriple& a, const hydro::ObjectiveTriple& b) {
  if (a.power < b.power || a.aapfd > b.aapfd || a.water_revenue < b.water_revenue) return false;
  return a.power > b.power || a.aapfd < b.aapfd || a.water_revenue > b.water_revenue;
}

std::vector<int> dominance_filter_indices(const std::vector<hydro::ObjectiveTriple>& points) {
  std::vector<int> kept;
  for (size_t p = 0; p < points.size(); ++p) {
    bool dominated = false;
    for (size_t q = 0; q < points.size() && !dominated; ++q)
      if (q != p && dominates(points[q], points[p])) dominated = true;
    if (!dominated) kept.push_back(static_cast<int>(p));
  }
  return kept;
}

std::vector<hydro::ObjectiveTriple> dominance_filter(
    const std::vector<hydro::ObjectiveTriple>& points) {
  std::vector<hydro::ObjectiveTriple> kept;
  for (int idx : dominance_filter_indices(points)) kept.push_back(points[idx]);
  return kept;
}

std::vector<std::array<double, 3>> das_dennis_directions(int partitions) {
  if (partitions < 1) throw ContractError("das_dennis_directions: partitions must be >= 1");
  std::vector<std::array<double, 3>> dirs;
  const double p = partitions;
  for (int a = 0; a <= partitions; ++a)
    for (int b = 0; b <= partitions - a; ++b) {
      const int c = partitions - a - b;
      dirs.push_back({a / p, b / p, c / p});
    }
  return dirs;
}

int das_dennis_partitions_for(int max_count) {
  int p = 1;
  while ((p + 2) * (p + 3) / 2 <= max_count) ++p;
  return p;
}

namespace {

struct Evaluated {
  hydro::ObjectiveTriple objectives;
  bool feasible = false;
  double violation = 0.0;
};

Evaluated evaluate_genome(const hydro::SystemInstance& inst, const Genome& genome) {
  const hydro::OperationSchedule sched = hydro::derive_trajectory(inst, decode_genome(inst, genome));
  const hydro::FeasibilityReport report = hydro::check_constraints(inst, sched);
  return {hydro::objective_triple(inst, sched), report.feasible,
          report.feasible ? 0.0 : report.total_normalized_violation};
}

void evaluate_population(const hydro::SystemInstance& inst, std::vector<Individual>& pop,
                         const std::vector<int>& indices) {
  parallel::for_each_index(static_cast<int>(indices.size()), [&](int k) {
    Individual& ind = pop[indices[k]];
    const Evaluated e = evaluate_genome(inst, ind.genome);
    ind.objectives = e.objectives;
    ind.feasible = e.feasible;
    ind.violation = e.violation;
  });
}

// Deb's constraint domination.
bool cd_dominates(const Individual& a, const Individual& b) {
  if (a.feasible != b.feasible) return a.feasible;
  if (!a.feasible) return a.violation < b.violation;
  return dominates(a.objectives, b.objectives);
}

Genome random_genome(int length, Rng& rng) {
  Genome g;
  g.genes.resize(length);
  for (auto& v : g.genes) v = rng.uniform01();
  return g;
}

// SBX on [0,1] genes; children clipped.
std::pair<Genome, Genome> sbx_crossover(const Genome& p1, const Genome& p2,
                                        const MoeaConfig& config, Rng& rng) {
  Genome c1 = p1, c2 = p2;
  if (rng.uniform01() > config.crossover_prob) return {c1, c2};
  for (size_t k = 0; k < p1.genes.size(); ++k) {
    if (rng.uniform01() > 0.5) continue;
    const double y1 = p1.genes[k], y2 = p2.genes[k];
    if (std::abs(y1 - y2) < 1e-14) continue;
    const double u = rng.uniform01();
    double betaq;
    if (u <= 0.5)
      betaq = std::pow(2.0 * u, 1.0 / (config.sbx_eta + 1.0));
    else
      betaq = std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (config.sbx_eta + 1.0));
    double a = 0.5 * ((y1 + y2) - betaq * std::abs(y2 - y1));
    double b = 0.5 * ((y1 + y2) + betaq * std::abs(y2 - y1));
    if (rng.uniform01() < 0.5) std::swap(a, b);
    c1.genes[k] = std::clamp(a, 0.0, 1.0);
    c2.genes[k] = std::clamp(b, 0.0, 1.0);
  }
  return {c1, c2};
}

void polynomial_mutation(Genome& genome, const MoeaConfig& config, Rng& rng) {
  const double eta = config.mutation_eta;
  for (auto& y : genome.genes) {
    if (rng.uniform01() > config.mutation_prob) continue;
    const double u = rng.uniform01();
    double deltaq;
    if (u < 0.5) {
      const double b = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - y, eta + 1.0);
      deltaq = std::pow(b, 1.0 / (eta + 1.0)) - 1.0;
    } else {
      const double b = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(y, eta + 1.0);
      deltaq = 1.0 - std::pow(b, 1.0 / (eta + 1.0));
    }
    y = std::clamp(y + deltaq, 0.0, 1.0);
  }
}

std::vector<std::vector<int>> fast_nondominated_sort(const std::vector<Individual>& pop) {
  const int n = static_cast<int>(pop.size());
  std::vector<int> domination_count(n, 0);
  std::vector<std::vector<int>> dominated_by(n);
  std::vector<std::vector<int>> fronts(1);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      if (p == q) continue;
      if (cd_dominates(pop[p], pop[q])) dominated_by[p].push_back(q);
      else if (cd_dominates(pop[q], pop[p])) ++domination_count[p];
    }
  for (int p = 0; p < n; ++p)
    if (domination_count[p] == 0) fronts[0].push_back(p);
  int f = 0;
  while (!fronts[f].empty()) {
    std::vector<int> next;
    for (int p : fronts[f])
      for (int q : dominated_by[p])
        if (--domination_count[q] == 0) next.push_back(q);
    fronts.push_back(std::move(next));
    ++f;
  }
  fronts.pop_back();
  return fronts;
}

struct Normalizer {
  double ideal[3];
  double intercept[3];

  double normalized(const double* f, int k) const { return (f[k] - ideal[k]) / intercept[k]; }
};

// Minimization objective vector for NSGA-III internals.
void min_objectives(const Individual& ind, double* out) {
  out[0] = -ind.objectives.power;
  out[1] = ind.objectives.aapfd;
  out[2] = -ind.objectives.water_revenue;
}

Normalizer build_normalizer(const std::vector<Individual>& pop, const std::vector<int>& members) {
  // Normalize over feasible members when any exist.
  std::vector<int> basis;
  for (int m : members)
    if (pop[m].feasible) basis.push_back(m);
  if (basis.empty()) basis = members;

  Normalizer norm;
  for (int k = 0; k < 3; ++k) norm.ideal[k] = std::numeric_limits<double>::infinity();
  std::vector<std::array<double, 3>> fs(basis.size());
  for (size_t m = 0; m < basis.size(); ++m) {
    min_objectives(pop[basis[m]], fs[m].data());
    for (int k = 0; k < 3; ++k) norm.ideal[k] = std::min(norm.ideal[k], fs[m][k]);
  }
  // Extreme points by achievement scalarizing function along each axis.
  std::array<double, 3> extreme[3];
  for (int axis = 0; axis < 3; ++axis) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& f : fs) {
      double asf = -std::numeric_limits<double>::infinity();
      for (int k = 0; k < 3; ++k) {
        const double w = (k == axis) ? 1.0 : 1e-6;
        asf = std::max(asf, (f[k] - norm.ideal[k]) / w);
      }
      if (asf < best) {
        best = asf;
        extreme[axis] = f;
      }
    }
  }
  // Intercepts of the plane through the extremes; Gaussian elimination with
  // fallback to the per-axis maximum on degeneracy.
  double a[3][4];
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) a[r][c] = extreme[r][c] - norm.ideal[c];
    a[r][3] = 1.0;
  }
  bool singular = false;
  for (int col = 0; col < 3 && !singular; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) < 1e-12) {
      singular = true;
      break;
    }
    std::swap(a[col], a[pivot]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double factor = a[r][col] / a[col][col];
      for (int c = col; c < 4; ++c) a[r][c] -= factor * a[col][c];
    }
  }
  if (!singular) {
    for (int k = 0; k < 3; ++k) {
      const double beta = a[k][3] / a[k][k];  // plane coefficients
      if (beta <= 1e-12) {
        singular = true;
        break;
      }
      norm.intercept[k] = 1.0 / beta;
    }
  }
  if (singular) {
    for (int k = 0; k < 3; ++k) {
      double mx = -std::numeric_limits<double>::infinity();
      for (const auto& f : fs) mx = std::max(mx, f[k] - norm.ideal[k]);
      norm.intercept[k] = mx;
    }
  }
  for (int k = 0; k < 3; ++k)
    if (!(norm.intercept[k] > 1e-12)) norm.intercept[k] = 1.0;
  return norm;
}

double perpendicular_distance(const std::array<double, 3>& f, const std::array<double, 3>& dir) {
  double dir_norm = 0.0, dot = 0.0;
  for (int k = 0; k < 3; ++k) {
    dir_norm += dir[k] * dir[k];
    dot += f[k] * dir[k];
  }
  dir_norm = std::sqrt(dir_norm);
  const double proj = dot / dir_norm;
  double dist2 = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double diff = f[k] - proj * dir[k] / dir_norm;
    dist2 += diff * diff;
  }
  return std::sqrt(dist2);
}

// Binary tournament under constraint domination; ties resolved randomly.
int tournament(const std::vector<Individual>& pop, Rng& rng) {
  const int a = rng.uniform_index(static_cast<int>(pop.size()));
  const int b = rng.uniform_index(static_cast<int>(pop.size()));
  if (cd_dominates(pop[a], pop[b])) return a;
  if (cd_dominates(pop[b], pop[a])) return b;
  return rng.uniform01() < 0.5 ? a : b;
}

std::vector<Individual> feasible_nondominated(const std::vector<Individual>& pop) {
  std::vector<Individual> feasible;
  for (const auto& ind : pop)
    if (ind.feasible) feasible.push_back(ind);
  std::vector<hydro::ObjectiveTriple> points;
  points.reserve(feasible.size());
  for (const auto& ind : feasible) points.push_back(ind.objectives);
  std::vector<Individual> result;
  for (int idx : dominance_filter_indices(points)) result.push_back(feasible[idx]);
  return result;
}

}  // namespace

std::vector<Individual> nsga3_run(const hydro::SystemInstance& inst, const MoeaConfig& config,
                                  uint64_t seed) {
  config.validate();
  Rng rng(seed);
  const int n = config.population;
  const int length = genome_length(inst);
  const int partitions = das_dennis_partitions_for(n);
  const auto directions = das_dennis_directions(partitions);

  std::vector<Individual> pop(n);
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  for (auto& ind : pop) ind.genome = random_genome(length, rng);
  evaluate_population(inst, pop, all);

  for (int gen = 0; gen < config.generations; ++gen) {
    // Offspring genomes are generated serially (deterministic rng use), then
    // evaluated in parallel by index.
    std::vector<Individual> combined = pop;
    combined.resize(2 * n);
    for (int k = 0; k < n; k += 2) {
      const Individual& p1 = pop[tournament(pop, rng)];
      const Individual& p2 = pop[tournament(pop, rng)];
      auto [c1, c2] = sbx_crossover(p1.genome, p2.genome, config, rng);
      polynomial_mutation(c1, config, rng);
      polynomial_mutation(c2, config, rng);
      combined[n + k].genome = std::move(c1);
      if (k + 1 < n) combined[n + k + 1].genome = std::move(c2);
    }
    std::vector<int> fresh(n);
    std::iota(fresh.begin(), fresh.end(), n);
    evaluate_population(inst, combined, fresh);

    const auto fronts = fast_nondominated_sort(combined);
    std::vector<int> selected;
    size_t last = 0;
    while (last < fronts.size() &&
           selected.size() + fronts[last].size() <= static_cast<size_t>(n)) {
      selected.insert(selected.end(), fronts[last].begin(), fronts[last].end());
      ++last;
    }
    if (selected.size() < static_cast<size_t>(n) && last < fronts.size()) {
      const std::vector<int>& split = fronts[last];
      const int needed = n - static_cast<int>(selected.size());

      std::vector<int> considered = selected;
      considered.insert(considered.end(), split.begin(), split.end());
      const Normalizer norm = build_normalizer(combined, considered);

      auto associate = [&](int member, double& dist) {
        double f[3];
        min_objectives(combined[member], f);
        std::array<double, 3> fn;
        for (int k = 0; k < 3; ++k) fn[k] = norm.normalized(f, k);
        int best = 0;
        double best_dist = std::numeric_limits<double>::infinity();
        for (size_t d = 0; d < directions.size(); ++d) {
          const double pd = perpendicular_distance(fn, directions[d]);
          if (pd < best_dist) {
            best_dist = pd;
            best = static_cast<int>(d);
          }
        }
        dist = best_dist;
        return best;
      };

      std::vector<int> niche_count(directions.size(), 0);
      for (int m : selected) {
        double dist;
        niche_count[associate(m, dist)]++;
      }
      struct Candidate {
        int member;
        double distance;
      };
      std::vector<std::vector<Candidate>> per_dir(directions.size());
      for (int m : split) {
        double dist;
        const int d = associate(m, dist);
        per_dir[d].push_back({m, dist});
      }

      int picked = 0;
      std::vector<uint8_t> dir_active(directions.size(), 1);
      while (picked < needed) {
        int best_dir = -1;
        int best_count = std::numeric_limits<int>::max();
        std::vector<int> min_dirs;
        for (size_t d = 0; d < directions.size(); ++d) {
          if (!dir_active[d] || per_dir[d].empty()) continue;
          if (niche_count[d] < best_count) {
            best_count = niche_count[d];
            min_dirs.clear();
          }
          if (niche_count[d] == best_count) min_dirs.push_back(static_cast<int>(d));
        }
        if (min_dirs.empty()) break;  // unreachable: split has enough members
        best_dir = min_dirs[rng.uniform_index(static_cast<int>(min_dirs.size()))];
        auto& candidates = per_dir[best_dir];
        size_t chosen;
        if (niche_count[best_dir] == 0) {
          chosen = 0;
          for (size_t c = 1; c < candidates.size(); ++c)
            if (candidates[c].distance < candidates[chosen].distance) chosen = c;
        } else {
          chosen = rng.uniform_index(static_cast<int>(candidates.size()));
        }
        selected.push_back(candidates[chosen].member);
        candidates.erase(candidates.begin() + chosen);
        ++niche_count[best_dir];
        ++picked;
      }
    }

    std::vector<Individual> next;
    next.reserve(n);
    for (int idx : selected) next.push_back(combined[idx]);
    pop = std::move(next);
  }
  return feasible_nondominated(pop);
}

std::vector<Individual> moead_run(const hydro::SystemInstance& inst, const MoeaConfig& config,
                                  const decomp::ObjectiveBounds& bounds, uint64_t seed) {
  config.validate();
  bounds.validate();
  Rng rng(seed);
  const int n = config.population;
  const int length = genome_length(inst);

  // Weight vectors: the p=19 simplex lattice gives 210 vectors; an even
  // subsample in lexicographic order trims it to the population size.
  int partitions = das_dennis_partitions_for(n);
  auto lattice = das_dennis_directions(partitions);
  if (static_cast<int>(lattice.size()) < n) {
    const auto bigger = das_dennis_directions(partitions + 1);
    lattice = bigger;
  }
  std::vector<decomp::WeightVector> weights(n);
  const size_t m = lattice.size();
  for (int k = 0; k < n; ++k) {
    const size_t idx = (m * static_cast<size_t>(k)) / n;
    // The weighted-sum reward treats zero weights fine; no epsilon needed.
    weights[k] = {lattice[idx][0], lattice[idx][1], lattice[idx][2]};
  }

  // Neighborhoods: T nearest weight vectors by Euclidean distance.
  const int nb = std::min(config.neighborhood, n);
  std::vector<std::vector<int>> neighbors(n);
  for (int k = 0; k < n; ++k) {
    std::vector<std::pair<double, int>> dist(n);
    for (int q = 0; q < n; ++q) {
      const double d1 = weights[k].w1 - weights[q].w1;
      const double d2 = weights[k].w2 - weights[q].w2;
      const double d3 = weights[k].w3 - weights[q].w3;
      dist[q] = {d1 * d1 + d2 * d2 + d3 * d3, q};
    }
    std::stable_sort(dist.begin(), dist.end());
    neighbors[k].reserve(nb);
    for (int q = 0; q < nb; ++q) neighbors[k].push_back(dist[q].second);
  }

  std::vector<Individual> pop(n);
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  for (auto& ind : pop) ind.genome = random_genome(length, rng);
  evaluate_population(inst, pop, all);

  auto better_for = [&](const Individual& cand, const Individual& incumbent,
                        const decomp::WeightVector& w) {
    if (cand.feasible != incumbent.feasible) return cand.feasible;
    if (!cand.feasible) return cand.violation < incumbent.violation;
    return decomp::scalarize(cand.objectives, w, bounds) >
           decomp::scalarize(incumbent.objectives, w, bounds);
  };

  for (int gen = 0; gen < config.generations; ++gen) {
    for (int k = 0; k < n; ++k) {
      const auto& hood = neighbors[k];
      const int pos1 = rng.uniform_index(nb);
      int pos2 = rng.uniform_index(nb - 1);
      if (pos2 >= pos1) ++pos2;
      const int p1 = hood[pos1];
      const int p2 = hood[pos2];
      auto [c1, c2] = sbx_crossover(pop[p1].genome, pop[p2].genome, config, rng);
      polynomial_mutation(c1, config, rng);
      Individual child;
      child.genome = std::move(c1);
      const Evaluated e = evaluate_genome(inst, child.genome);
      child.objectives = e.objectives;
      child.feasible = e.feasible;
      child.violation = e.violation;
      for (int idx : hood) {
        if (rng.uniform01() >= config.update_prob) continue;
        if (better_for(child, pop[idx], weights[idx])) pop[idx] = child;
      }
    }
  }
  return feasible_nondominated(pop);
}

}  // namespace resop::moea
