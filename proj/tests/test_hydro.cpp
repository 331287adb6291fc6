#include <doctest.h>

#include <cmath>

#include "resop/error.hpp"
#include "resop/hydro.hpp"
#include "resop/rng.hpp"
#include "support/instances.hpp"

using namespace resop;
using namespace resop::hydro;

namespace {

// Independent interpolation oracle: scan segments linearly.
double interp_oracle(const std::vector<CurvePoint>& pts, double v) {
  for (size_t k = 1; k < pts.size(); ++k)
    if (v <= pts[k].storage) {
      const double f = (v - pts[k - 1].storage) / (pts[k].storage - pts[k - 1].storage);
      return pts[k - 1].elevation + f * (pts[k].elevation - pts[k - 1].elevation);
    }
  return pts.back().elevation;
}

}  // namespace

TEST_CASE("elevation_of_storage: knots, midpoints, range errors") {
  ElevationStorageCurve curve({{0.0, 100.0}, {10.0, 110.0}}, "c");
  CHECK(curve.elevation_of_storage(5.0) == doctest::Approx(105.0).epsilon(1e-14));
  CHECK(curve.elevation_of_storage(10.0) == 110.0);
  CHECK(curve.elevation_of_storage(0.0) == 100.0);
  CHECK_THROWS_AS(curve.elevation_of_storage(-0.5), RangeError);
  CHECK_THROWS_AS(curve.elevation_of_storage(10.5), RangeError);
}

TEST_CASE("elevation_of_storage matches a brute-force oracle on a random monotone curve") {
  Rng rng(101);
  std::vector<CurvePoint> pts;
  double s = 0.0, e = 50.0;
  for (int k = 0; k < 6; ++k) {
    s += rng.uniform(1.0, 10.0);
    e += rng.uniform(0.5, 5.0);
    pts.push_back({s, e});
  }
  ElevationStorageCurve curve(pts, "rand");
  for (int k = 0; k < 100; ++k) {
    const double v = rng.uniform(pts.front().storage, pts.back().storage);
    CHECK(curve.elevation_of_storage(v) == doctest::Approx(interp_oracle(pts, v)).epsilon(1e-12));
  }
}

TEST_CASE("curve is strictly increasing and round-trips through its inverse") {
  std::vector<CurvePoint> pts = {{1.0, 2.0}, {4.0, 3.5}, {9.0, 7.0}, {20.0, 8.0}, {30.0, 9.5}};
  ElevationStorageCurve curve(pts, "inv");
  double prev = -1e300;
  for (int k = 0; k <= 200; ++k) {
    const double v = 1.0 + (30.0 - 1.0) * k / 200.0;
    const double e = curve.elevation_of_storage(v);
    CHECK(e > prev);
    prev = e;
    const double back = curve.storage_of_elevation(e);
    CHECK(back == doctest::Approx(v).epsilon(1e-9));
  }
}

TEST_CASE("curve constructor rejects non-monotone inputs") {
  CHECK_THROWS_AS(ElevationStorageCurve({{0.0, 1.0}}, "short"), DataError);
  CHECK_THROWS_AS(ElevationStorageCurve({{0.0, 1.0}, {0.0, 2.0}}, "flat-s"), DataError);
  CHECK_THROWS_AS(ElevationStorageCurve({{0.0, 2.0}, {1.0, 2.0}}, "flat-e"), DataError);
}

TEST_CASE("power_generation: direct products") {
  CHECK(power_generation(1.0, 100.0, 50.0, 1.0) == 5000.0);
  CHECK(power_generation(3.0, 0.0, 50.0, 123.0) == 0.0);
  // Recomputed with independent high-precision arithmetic:
  // 2.5 * 300 * 120 * 2.6298e6 = 2.36682e11.
  CHECK(power_generation(2.5, 300.0, 120.0, 2.6298e6) == doctest::Approx(2.36682e11).epsilon(1e-12));
}

TEST_CASE("aapfd: zero iff flows match, hand value, term-by-term oracle") {
  const std::vector<double> qe{100.0, 200.0};
  CHECK(aapfd(qe, qe) == 0.0);
  const std::vector<double> qp{150.0, 100.0};
  CHECK(aapfd(qp, qe) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));  // 0.70710678

  Rng rng(3);
  std::vector<double> a(12), b(12);
  for (int k = 0; k < 12; ++k) {
    a[k] = rng.uniform(10.0, 500.0);
    b[k] = rng.uniform(10.0, 500.0);
  }
  double oracle = 0.0;
  for (int k = 0; k < 12; ++k) oracle += std::pow((a[k] - b[k]) / b[k], 2.0);
  oracle = std::sqrt(oracle);
  CHECK(aapfd(a, b) == doctest::Approx(oracle).epsilon(1e-12));

  CHECK_THROWS_AS(aapfd(std::vector<double>{1.0}, std::vector<double>{0.0}), ContractError);
  CHECK_THROWS_AS(aapfd(std::vector<double>{1.0}, std::vector<double>{-2.0}), ContractError);
  CHECK_THROWS_AS(aapfd(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}), ContractError);
}

TEST_CASE("aapfd nonnegativity with equality only at matching flows") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> qp(6), qe(6);
    for (int k = 0; k < 6; ++k) {
      qe[k] = rng.uniform(1.0, 100.0);
      qp[k] = rng.uniform01() < 0.3 ? qe[k] : rng.uniform(0.0, 200.0);
    }
    const double v = aapfd(qp, qe);
    CHECK(v >= 0.0);
    CHECK((v == 0.0) == (qp == qe));
  }
}

TEST_CASE("supply_revenue: hand values, gating, negative margins") {
  CHECK(supply_revenue(2.0, 0.01, 50.0, 10.0, true, 1.0) == doctest::Approx(15.0));
  CHECK(supply_revenue(2.0, 0.01, 50.0, 10.0, false, 1.0) == 0.0);
  CHECK(supply_revenue(1.0, 0.1, 50.0, 10.0, true, 1.0) == doctest::Approx(-40.0));
}

TEST_CASE("water_balance_step: direct balance and stationarity") {
  CHECK(water_balance_step(1000.0, 10.0, 4.0, 2.0, 1.0) == doctest::Approx(1004.0));
  CHECK(water_balance_step(777.0, 5.0, 5.0, 0.0, 3600.0) == 777.0);
}

TEST_CASE("chained balance telescopes over 12 steps") {
  Rng rng(23);
  const double dt = 3600.0;
  double v = 1e6;
  const double v0 = v;
  double net = 0.0;
  for (int t = 0; t < 12; ++t) {
    const double qr = rng.uniform(0.0, 60.0), qp = rng.uniform(0.0, 40.0),
                 qs = rng.uniform(0.0, 10.0);
    v = water_balance_step(v, qr, qp, qs, dt);
    net += qr - qp - qs;
  }
  CHECK(v - v0 == doctest::Approx(dt * net).epsilon(1e-9));
}

TEST_CASE("derive_trajectory: zero decisions and zero inflow hold storage constant") {
  hydro::SystemInstance inst = resop::test::loose_instance(2, 1, 3);
  for (auto& r : inst.reservoirs) r.inflow.assign(3, 0.0);
  const OperationSchedule sched = derive_trajectory(inst, Decisions::zeros(inst));
  for (int i = 0; i < 2; ++i)
    for (int t = 0; t < 3; ++t) {
      CHECK(sched.storage(i, t) == inst.reservoirs[i].initial_storage);
      CHECK(sched.power(i, t) == 0.0);
    }
  CHECK(sched.curve_ok());
}

TEST_CASE("derive_trajectory matches a hand-computed two-period table") {
  // One reservoir, linear curve storage 0..10 -> elevation 0..10, tailwater 2.
  hydro::SystemInstance inst;
  inst.horizon = 2;
  inst.period_seconds = 1.0;
  ReservoirSpec r;
  r.id = "h";
  r.power_coefficient = 2.0;
  r.initial_storage = 5.0;
  r.tailwater_elevation = 2.0;
  r.curve = ElevationStorageCurve({{0.0, 0.0}, {10.0, 10.0}}, r.id);
  r.elevation_min = {0.0, 0.0};
  r.elevation_max = {10.0, 10.0};
  r.power_min = {0.0, 0.0};
  r.power_max = {100.0, 100.0};
  r.inflow = {3.0, 1.0};
  r.eco_flow = {1.0, 1.0};
  r.turbine_flow_lo = 0.0;
  r.turbine_flow_hi = 5.0;
  inst.reservoirs.push_back(r);
  inst.validate();

  Decisions d = Decisions::zeros(inst);
  d.turbine_flow(0, 0) = 2.0;
  d.turbine_flow(0, 1) = 4.0;
  const OperationSchedule sched = derive_trajectory(inst, d);
  // Hand table: V = [5+(3-2), 6+(1-4)] = [6, 3]; L = V; head at start-of-period
  // elevation minus tailwater: [5-2, 6-2] = [3, 4]; P = 2*qp*H*1.
  CHECK(sched.storage(0, 0) == doctest::Approx(6.0));
  CHECK(sched.storage(0, 1) == doctest::Approx(3.0));
  CHECK(sched.elevation(0, 0) == doctest::Approx(6.0));
  CHECK(sched.elevation(0, 1) == doctest::Approx(3.0));
  CHECK(sched.head(0, 0) == doctest::Approx(3.0));
  CHECK(sched.head(0, 1) == doctest::Approx(4.0));
  CHECK(sched.power(0, 0) == doctest::Approx(12.0));
  CHECK(sched.power(0, 1) == doctest::Approx(32.0));
}

TEST_CASE("derive_trajectory is deterministic and marks curve exits infeasible") {
  hydro::SystemInstance inst = resop::test::tiny_instance();
  Decisions d = Decisions::zeros(inst);
  d.turbine_flow(0, 0) = 250.0;
  d.turbine_flow(0, 1) = 250.0;
  const OperationSchedule a = derive_trajectory(inst, d);
  const OperationSchedule b = derive_trajectory(inst, d);
  CHECK(a == b);

  // Drain far below the curve: inflate turbine flow beyond the physical range.
  d.turbine_flow(0, 0) = 6000.0;
  const OperationSchedule exited = derive_trajectory(inst, d);
  CHECK(!exited.curve_ok());
  const FeasibilityReport report = check_constraints(inst, exited);
  CHECK(!report.feasible);
  CHECK(report.count(ConstraintFamily::CurveRange) > 0);
}

TEST_CASE("check_constraints: zero-action analysis and single-violation construction") {
  hydro::SystemInstance inst = resop::test::loose_instance(1, 1, 2);
  // W_min = 0 everywhere: supply family passes on the all-zero schedule.
  OperationSchedule zero = derive_trajectory(inst, Decisions::zeros(inst));
  FeasibilityReport report = check_constraints(inst, zero);
  CHECK(report.count(ConstraintFamily::Supply) == 0);
  CHECK(report.feasible);

  // Raise P_min above zero: the power family fails at every period.
  for (auto& pm : inst.reservoirs[0].power_min) pm = 1.0;
  report = check_constraints(inst, derive_trajectory(inst, Decisions::zeros(inst)));
  CHECK(!report.feasible);
  CHECK(report.count(ConstraintFamily::Power) == 2);

  // Oracle-constructed single elevation violation: inflate the inflow of one
  // period so storage crosses L_max in period 0 and drains back in period 1.
  hydro::SystemInstance spike = resop::test::loose_instance(1, 0, 2);
  spike.reservoirs[0].inflow[0] = 4.2e5;  // 1000 s * 4.2e5 m^3/s ~ +4.2e8 m^3
  spike.reservoirs[0].inflow[1] = -4.2e5;
  spike.reservoirs[0].elevation_max[0] = 80.0;
  spike.reservoirs[0].elevation_max[1] = 80.0;
  const OperationSchedule spiked = derive_trajectory(spike, Decisions::zeros(spike));
  const FeasibilityReport sr = check_constraints(spike, spiked);
  CHECK(sr.count(ConstraintFamily::Elevation) == 1);
  CHECK(sr.violations.size() == 1);
  CHECK(sr.violations[0].period == 0);
}

TEST_CASE("check_constraints accepts a hand-checked feasible two-period schedule") {
  hydro::SystemInstance inst = resop::test::tiny_instance();
  Decisions d = Decisions::zeros(inst);
  d.turbine_flow(0, 0) = 150.0;
  d.turbine_flow(0, 1) = 150.0;
  d.supply_flag(0, 0, 0) = 1;
  d.supply_flow(0, 0, 0) = 25.0;  // 25 * 86400 = 2.16e6 <= 4.32e6
  const FeasibilityReport report = check_constraints(inst, derive_trajectory(inst, d));
  CHECK(report.feasible);
  CHECK(report.violations.empty());
}

TEST_CASE("objective_triple: hand sums, aapfd zero point, linearity in benefit") {
  hydro::SystemInstance inst = resop::test::tiny_instance();
  Decisions d = Decisions::zeros(inst);
  d.turbine_flow(0, 0) = 120.0;  // equals eco flow
  d.turbine_flow(0, 1) = 180.0;
  d.supply_flag(0, 0, 1) = 1;
  d.supply_flow(0, 0, 1) = 10.0;
  const OperationSchedule sched = derive_trajectory(inst, d);
  const ObjectiveTriple obj = objective_triple(inst, sched);
  CHECK(obj.aapfd == 0.0);

  // Hand sums.
  double power = 0.0;
  for (int t = 0; t < 2; ++t) power += sched.power(0, t);
  CHECK(obj.power == doctest::Approx(power).epsilon(1e-15));
  const double revenue = (0.5 - 0.002 * 100.0) * 10.0 * 86400.0;
  CHECK(obj.water_revenue == doctest::Approx(revenue).epsilon(1e-12));

  // Revenue is linear in b: with transport costs zeroed, doubling every
  // b_{j,t} doubles water_revenue and touches nothing else.
  hydro::SystemInstance costless = inst;
  costless.areas[0].cost = Grid2<double>(1, 2, 0.0);
  const ObjectiveTriple base = objective_triple(costless, derive_trajectory(costless, d));
  hydro::SystemInstance doubled = costless;
  for (auto& b : doubled.areas[0].benefit) b *= 2.0;
  const ObjectiveTriple obj2 = objective_triple(doubled, derive_trajectory(doubled, d));
  CHECK(obj2.power == base.power);
  CHECK(obj2.aapfd == base.aapfd);
  CHECK(obj2.water_revenue == doctest::Approx(2.0 * base.water_revenue).epsilon(1e-12));
}

TEST_CASE("mass conservation holds for random schedules on the desk dataset") {
  const hydro::SystemInstance& inst = resop::test::desk_instance();
  Rng rng(404);
  for (int trial = 0; trial < 50; ++trial) {
    Decisions d = Decisions::zeros(inst);
    for (int i = 0; i < inst.num_reservoirs(); ++i)
      for (int t = 0; t < inst.horizon; ++t)
        d.turbine_flow(i, t) = rng.uniform(100.0, 700.0);
    for (int i = 0; i < inst.num_reservoirs(); ++i)
      for (int j = 0; j < inst.num_areas(); ++j)
        for (int t = 0; t < inst.horizon; ++t)
          if (rng.uniform01() < 0.5 && inst.areas[j].supply_max[t] > 0) {
            d.supply_flag(i, j, t) = 1;
            d.supply_flow(i, j, t) =
                rng.uniform(0.0, inst.areas[j].supply_max[t] / inst.period_seconds);
          }
    const OperationSchedule sched = derive_trajectory(inst, d);
    for (int i = 0; i < inst.num_reservoirs(); ++i) {
      double net = 0.0;
      for (int t = 0; t < inst.horizon; ++t) {
        double supply = 0.0;
        for (int j = 0; j < inst.num_areas(); ++j)
          if (d.supply_flag(i, j, t)) supply += d.supply_flow(i, j, t);
        net += inst.reservoirs[i].inflow[t] - d.turbine_flow(i, t) - supply;
      }
      const double expected = inst.reservoirs[i].initial_storage + inst.period_seconds * net;
      CHECK(sched.storage(i, inst.horizon - 1) == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("scaling the power coefficient scales F_power exactly and nothing else") {
  hydro::SystemInstance inst = resop::test::tiny_instance();
  Decisions d = Decisions::zeros(inst);
  d.turbine_flow(0, 0) = 100.0;
  d.turbine_flow(0, 1) = 200.0;
  const ObjectiveTriple base = objective_triple(inst, derive_trajectory(inst, d));
  // k = 4 keeps the scaling bit-exact (power-of-two exponent shift).
  hydro::SystemInstance scaled = inst;
  scaled.reservoirs[0].power_coefficient *= 4.0;
  const ObjectiveTriple quad = objective_triple(scaled, derive_trajectory(scaled, d));
  CHECK(quad.power == 4.0 * base.power);
  CHECK(quad.aapfd == base.aapfd);
  CHECK(quad.water_revenue == base.water_revenue);
}

TEST_CASE("validate rejects broken instances with named fields") {
  hydro::SystemInstance inst = resop::test::tiny_instance();
  inst.reservoirs[0].eco_flow[1] = 0.0;
  CHECK_THROWS_AS(inst.validate(), DataError);

  hydro::SystemInstance bad_bounds = resop::test::tiny_instance();
  bad_bounds.reservoirs[0].elevation_min[0] = 200.0;
  CHECK_THROWS_AS(bad_bounds.validate(), DataError);

  hydro::SystemInstance bad_area = resop::test::tiny_instance();
  bad_area.areas[0].supply_min[0] = 1.0;
  bad_area.areas[0].supply_max[0] = 0.5;
  CHECK_THROWS_AS(bad_area.validate(), DataError);
}
