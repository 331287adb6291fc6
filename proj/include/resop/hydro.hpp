#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "resop/grid.hpp"

namespace resop::hydro {

// Absolute tolerance applied to every bound comparison, in the unit of the
// quantity being compared. Keeps accumulated floating-point drift in derived
// trajectories from flipping feasibility.
inline constexpr double kBoundTolerance = 1e-9;

struct CurvePoint {
  double storage;    // m^3
  double elevation;  // m
};

// Piecewise-linear storage <-> elevation relation of one reservoir.
// Both coordinates are strictly increasing, so the mapping is a monotone
// bijection on the covered range and invertible.
class ElevationStorageCurve {
 public:
  ElevationStorageCurve() = default;
  explicit ElevationStorageCurve(std::vector<CurvePoint> points, std::string context = {});

  double elevation_of_storage(double storage) const;  // throws RangeError outside the table
  double storage_of_elevation(double elevation) const;

  bool storage_in_range(double storage) const {
    return storage >= points_.front().storage && storage <= points_.back().storage;
  }
  double storage_min() const { return points_.front().storage; }
  double storage_max() const { return points_.back().storage; }
  double elevation_min() const { return points_.front().elevation; }
  double elevation_max() const { return points_.back().elevation; }
  const std::vector<CurvePoint>& points() const { return points_; }

 private:
  std::vector<CurvePoint> points_;
  std::string context_;  // reservoir id, used in range-error messages
};

struct ReservoirSpec {
  std::string id;
  double power_coefficient = 0.0;    // A_i, energy per (m^3/s * m * s)
  double initial_storage = 0.0;      // V_i^beg, m^3
  double tailwater_elevation = 0.0;  // m
  ElevationStorageCurve curve;
  std::vector<double> elevation_min;  // [T], m
  std::vector<double> elevation_max;  // [T], m
  std::vector<double> power_min;      // [T], energy
  std::vector<double> power_max;      // [T], energy
  std::vector<double> inflow;         // Q^r, [T], m^3/s
  std::vector<double> eco_flow;       // Q^e, [T], m^3/s, strictly positive
  double turbine_flow_lo = 0.0;       // m^3/s, sampling range for Q^p
  double turbine_flow_hi = 0.0;
};

struct AreaSpec {
  std::string id;
  std::vector<double> supply_min;  // W^min, [T], m^3
  std::vector<double> supply_max;  // W^max, [T], m^3
  std::vector<double> benefit;     // b_{j,t}, [T], currency per m^3
  std::vector<double> distance_km; // l_{i,j}, [I]
  Grid2<double> cost;              // c_{i,j,t}, [I][T], currency per m^3 per km
};

struct SystemInstance {
  std::vector<ReservoirSpec> reservoirs;
  std::vector<AreaSpec> areas;
  int horizon = 0;              // T
  double period_seconds = 0.0;  // dt

  int num_reservoirs() const { return static_cast<int>(reservoirs.size()); }
  int num_areas() const { return static_cast<int>(areas.size()); }

  // Checks every type invariant; throws DataError naming the offending field.
  void validate() const;
};

// The raw decision tensor of one operation plan.
struct Decisions {
  Grid2<double> turbine_flow;   // Q^p, [I][T], m^3/s
  Grid3<uint8_t> supply_flag;   // x,   [I][J][T]
  Grid3<double> supply_flow;    // Q^s, [I][J][T], m^3/s

  static Decisions zeros(const SystemInstance& inst);
  bool operator==(const Decisions&) const = default;
};

struct CurveExit {
  int reservoir = 0;
  int period = 0;       // -1 marks the initial storage
  double storage = 0.0; // value that left the curve range

  bool operator==(const CurveExit&) const = default;
};

// Decisions plus every trajectory quantity derived from them.
struct OperationSchedule {
  Decisions decisions;
  Grid2<double> storage;    // V, [I][T], end-of-period, m^3
  Grid2<double> elevation;  // L, [I][T], end-of-period, m (clamped where the curve was exited)
  Grid2<double> head;       // H, [I][T], m; evaluated at start-of-period elevation
  Grid2<double> power;      // P, [I][T], energy
  std::vector<CurveExit> curve_exits;

  bool curve_ok() const { return curve_exits.empty(); }
  bool operator==(const OperationSchedule&) const = default;
};

struct ObjectiveTriple {
  double power = 0.0;          // F_power, to maximize
  double aapfd = 0.0;          // F_AAPFD, to minimize, >= 0
  double water_revenue = 0.0;  // F_water, to maximize

  bool operator==(const ObjectiveTriple&) const = default;
};

enum class ConstraintFamily : uint8_t {
  Elevation,       // per (i,t) elevation window
  Power,           // per (i,t) generation window
  Supply,          // per (j,t) aggregate delivered-volume window
  InitialStorage,  // V_{i,0} = V_i^beg
  CurveRange,      // storage stayed on the elevation-storage table
};

const char* constraint_family_name(ConstraintFamily family);

struct Violation {
  ConstraintFamily family;
  int reservoir = -1;  // -1 when not reservoir-indexed
  int area = -1;       // -1 when not area-indexed
  int period = -1;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;

  std::string describe() const;
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<Violation> violations;
  // Sum of per-violation overshoots, each scaled by its bound span; the
  // evolutionary baselines and the optional soft-penalty reward use it.
  double total_normalized_violation = 0.0;

  int count(ConstraintFamily family) const;
};

// --- formulas ---

// Eq. of power output: A * Q^p * H * dt.
double power_generation(double power_coefficient, double turbine_flow, double head, double dt);

// Root-sum-square relative deviation of turbine flow from ecological flow.
// Throws ContractError on length mismatch or any eco flow <= 0.
double aapfd(std::span<const double> turbine_flow, std::span<const double> eco_flow);

// (b - c*l) * Q^s * x * dt. May be negative when transport cost beats benefit.
double supply_revenue(double benefit, double unit_cost, double distance_km, double supply_flow,
                      bool delivering, double dt);

// v_prev + (inflow - turbine - supply_sum) * dt. Negative results are left to
// the constraint check.
double water_balance_step(double v_prev, double inflow, double turbine_flow, double supply_sum,
                          double dt);

// --- trajectory and scoring ---

// Fills storage, elevation, head, and power from the decisions. Storage that
// leaves the curve range is recorded in curve_exits (elevation clamped) so the
// rollout can complete and be scored infeasible instead of aborting.
OperationSchedule derive_trajectory(const SystemInstance& inst, Decisions decisions);

FeasibilityReport check_constraints(const SystemInstance& inst, const OperationSchedule& sched);

ObjectiveTriple objective_triple(const SystemInstance& inst, const OperationSchedule& sched);

}  // namespace resop::hydro
