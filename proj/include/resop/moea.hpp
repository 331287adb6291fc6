#pragma once

#include <array>
#include <vector>

#include "resop/decomposition.hpp"
#include "resop/hydro.hpp"
#include "resop/rng.hpp"

namespace resop::moea {

// Flattened real-coded schedule: I*T turbine-flow genes, I*J*T flag genes
// (thresholded at 0.5), I*J*T supply-flow genes, all kept in [0, 1] and
// scaled to physical ranges on decode. Supply flow is zeroed when its flag
// gene is off, so decoded schedules always satisfy x = 0 => Q^s = 0.
struct Genome {
  std::vector<double> genes;
};

int genome_length(const hydro::SystemInstance& inst);
hydro::Decisions decode_genome(const hydro::SystemInstance& inst, const Genome& genome);
// Exact inverse for decisions whose values lie in the decode ranges.
Genome encode_decisions(const hydro::SystemInstance& inst, const hydro::Decisions& decisions);

struct MoeaConfig {
  int population = 200;
  int generations = 100;
  double crossover_prob = 0.9;   // per pair, SBX
  double mutation_prob = 0.1;    // per gene, polynomial
  double sbx_eta = 15.0;
  double mutation_eta = 20.0;
  int neighborhood = 20;         // MOEA/D
  double update_prob = 0.5;      // MOEA/D per-neighbor replacement gate

  void validate() const;
};

struct Individual {
  Genome genome;
  hydro::ObjectiveTriple objectives;
  bool feasible = false;
  double violation = 0.0;  // total normalized violation (0 when feasible)
};

// Maximization-oriented Pareto dominance on (power, -aapfd, water_revenue).
bool dominates(const hydro::ObjectiveTriple& a, const hydro::ObjectiveTriple& b);

// Keeps every point not dominated by another (duplicates all kept).
std::vector<hydro::ObjectiveTriple> dominance_filter(const std::vector<hydro::ObjectiveTriple>& points);
std::vector<int> dominance_filter_indices(const std::vector<hydro::ObjectiveTriple>& points);

// Das-Dennis simplex-lattice directions for 3 objectives with p partitions:
// C(p+2,2) vectors.
std::vector<std::array<double, 3>> das_dennis_directions(int partitions);
// Largest p whose direction count still fits max_count.
int das_dennis_partitions_for(int max_count);

// NSGA-III with constraint domination (feasible before infeasible, infeasible
// ordered by violation), SBX/polynomial variation, Das-Dennis reference
// directions and standard niching. Returns the feasible nondominated subset
// of the final population.
std::vector<Individual> nsga3_run(const hydro::SystemInstance& inst, const MoeaConfig& config,
                                  uint64_t seed);

// MOEA/D with weighted-sum subproblems through decomp::scalarize over shared
// bounds, neighborhood mating, and probabilistic neighbor replacement under
// the same constraint-domination rule.
std::vector<Individual> moead_run(const hydro::SystemInstance& inst, const MoeaConfig& config,
                                  const decomp::ObjectiveBounds& bounds, uint64_t seed);

}  // namespace resop::moea
