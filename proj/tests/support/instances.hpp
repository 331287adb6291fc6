#pragma once

// Shared instance builders for tests: a two-period single-reservoir system
// whose full schedule space is enumerable, a one-step bandit, a generic small
// system with loose bounds, and the bundled desk dataset.

#include <cmath>
#include <string>
#include <vector>

#include "resop/hydro.hpp"
#include "resop/io.hpp"

namespace resop::test {

// I=1, J=1, T=2. Every grid schedule is feasible: one reservoir cannot
// overshoot the per-area cap (the supply grid tops out exactly there) and the
// elevation corridor swallows any two periods of flow.
inline hydro::SystemInstance tiny_instance() {
  hydro::SystemInstance inst;
  inst.horizon = 2;
  inst.period_seconds = 86400.0;

  hydro::ReservoirSpec r;
  r.id = "r0";
  r.power_coefficient = 1e-9;
  r.initial_storage = 5e8;
  r.tailwater_elevation = 20.0;
  r.curve = hydro::ElevationStorageCurve({{1e8, 50.0}, {1e9, 100.0}}, r.id);
  r.elevation_min = {50.0, 50.0};
  r.elevation_max = {100.0, 100.0};
  r.power_min = {0.0, 0.0};
  r.power_max = {1e9, 1e9};
  r.inflow = {150.0, 150.0};
  r.eco_flow = {120.0, 180.0};
  r.turbine_flow_lo = 50.0;
  r.turbine_flow_hi = 250.0;
  inst.reservoirs.push_back(std::move(r));

  hydro::AreaSpec a;
  a.id = "a0";
  a.supply_min = {0.0, 0.0};
  a.supply_max = {4.32e6, 4.32e6};  // cap = 50 m^3/s
  a.benefit = {0.5, 0.5};
  a.distance_km = {100.0};
  a.cost = Grid2<double>(1, 2, 0.002);  // margin b - c*l = 0.3 per m^3
  inst.areas.push_back(std::move(a));

  inst.validate();
  return inst;
}

// I=1, J=0, T=1: a 3-armed bandit once the qp grid has 3 bins. The middle
// bin maximizes power * feasibility; bin 2 drains below the elevation floor.
inline hydro::SystemInstance bandit_instance() {
  hydro::SystemInstance inst;
  inst.horizon = 1;
  inst.period_seconds = 1e6;
  hydro::ReservoirSpec r;
  r.id = "b0";
  r.power_coefficient = 1e-9;
  r.initial_storage = 4e8;
  r.tailwater_elevation = 0.0;
  r.curve = hydro::ElevationStorageCurve({{1e7, 10.0}, {1e9, 90.0}}, r.id);
  r.elevation_min = {20.0};
  r.elevation_max = {90.0};
  r.power_min = {0.0};
  r.power_max = {1e9};
  r.inflow = {100.0};
  r.eco_flow = {150.0};
  r.turbine_flow_lo = 100.0;
  r.turbine_flow_hi = 500.0;  // bins at {100, 300, 500}; 500 drains below 30 m
  inst.reservoirs.push_back(std::move(r));
  inst.validate();
  return inst;
}

// Small generic system with bounds loose enough that everything is feasible;
// used for loop-nest and bookkeeping tests.
inline hydro::SystemInstance loose_instance(int reservoirs, int areas, int periods) {
  hydro::SystemInstance inst;
  inst.horizon = periods;
  inst.period_seconds = 1000.0;
  for (int i = 0; i < reservoirs; ++i) {
    hydro::ReservoirSpec r;
    r.id = "r" + std::to_string(i);
    r.power_coefficient = 1e-6 * (i + 1);
    r.initial_storage = 5e8;
    r.tailwater_elevation = 10.0;
    r.curve = hydro::ElevationStorageCurve({{1e6, 20.0}, {1e9, 120.0}}, r.id);
    r.elevation_min.assign(periods, 20.0);
    r.elevation_max.assign(periods, 120.0);
    r.power_min.assign(periods, 0.0);
    r.power_max.assign(periods, 1e12);
    r.inflow.assign(periods, 50.0 + 10.0 * i);
    r.eco_flow.assign(periods, 40.0);
    r.turbine_flow_lo = 0.0;
    r.turbine_flow_hi = 100.0;
    inst.reservoirs.push_back(std::move(r));
  }
  for (int j = 0; j < areas; ++j) {
    hydro::AreaSpec a;
    a.id = "a" + std::to_string(j);
    a.supply_min.assign(periods, 0.0);
    a.supply_max.assign(periods, 1e6 * (j + 1));
    a.benefit.assign(periods, 0.4 + 0.1 * j);
    a.distance_km.assign(reservoirs, 0.0);
    for (int i = 0; i < reservoirs; ++i) a.distance_km[i] = 50.0 + 25.0 * (i + j);
    a.cost = Grid2<double>(reservoirs, periods, 0.001);
    inst.areas.push_back(std::move(a));
  }
  inst.validate();
  return inst;
}

inline const hydro::SystemInstance& desk_instance() {
  static const hydro::SystemInstance inst = io::load_instance("data/desk", 2592000.0);
  return inst;
}

inline decomp::ObjectiveBounds hand_bounds() {
  decomp::ObjectiveBounds bounds;
  bounds.power = {0.0, 1000.0, "user-supplied"};
  bounds.aapfd = {0.5, 4.0, "user-supplied"};
  bounds.water = {-100.0, 900.0, "user-supplied"};
  bounds.seed = 0;
  return bounds;
}

}  // namespace resop::test
