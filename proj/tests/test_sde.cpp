/*
   Copyright 2026 The bilinsde Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include <doctest.h>

#include <cmath>
#include <numeric>

#include "bilinsde/error.hpp"
#include "bilinsde/sde.hpp"

using namespace bilinsde;

namespace {

ModelPtr unforced(const ModelPtr& m) {
  return std::make_shared<BilinearModel>(m->nu(), m->A(), m->B(), Matrix::Zero(m->dim(), 1), m->name());
}

double abs_sum(const std::vector<double>& r) { return std::abs(std::accumulate(r.begin(), r.end(), 0.0)); }

}  // namespace

TEST_CASE("step count") {
  CHECK(step_count(1.0, 0.01) == 100);
  CHECK(step_count(1.0, 1.0 / 3.0) == 3);
  CHECK_THROWS_AS(step_count(1.0, 0.0), PreconditionError);
  CHECK_THROWS_AS(step_count(1.0, -0.1), PreconditionError);
  CHECK_THROWS_AS(step_count(0.001, 0.01), PreconditionError);
}

TEST_CASE("scheme names") {
  CHECK(parse_scheme("explicit_em") == Scheme::explicit_em);
  CHECK(parse_scheme(to_string(Scheme::semi_implicit)) == Scheme::semi_implicit);
  CHECK_THROWS_AS(parse_scheme("rk4"), PreconditionError);
}

TEST_CASE("linear decay against the exact solution") {
  const auto m = unforced(make_linear(2, 1.0));
  const Vector u0 = Vector::Unit(2, 0);
  for (double dt : {1e-2, 1e-3}) {
    SimulationOptions o;
    o.T = 1.0;
    o.dt = dt;
    const auto tr = simulate(m, u0, o);
    const Vector u = tr.final_state();
    // semi-implicit: (1 + dt)^-M exactly
    CHECK(u[0] == doctest::Approx(std::pow(1.0 + dt, -static_cast<double>(tr.steps()))).epsilon(1e-12));
    CHECK(std::abs(u[0] - std::exp(-1.0)) <= dt);
    CHECK(u[1] == 0.0);
    o.scheme = Scheme::explicit_em;
    const auto te = simulate(m, u0, o);
    CHECK(te.final_state()[0] == doctest::Approx(std::pow(1.0 - dt, -static_cast<double>(-te.steps()))).epsilon(1e-12));
    CHECK(std::abs(te.final_state()[0] - std::exp(-1.0)) <= dt);
  }
}

TEST_CASE("equilibrium stays put") {
  const auto m = unforced(make_triad({1, 1, -2}, 1.0, {1}));
  SimulationOptions o;
  o.T = 2.0;
  const auto tr = simulate(m, Vector::Zero(3), o);
  CHECK(tr.states.cwiseAbs().maxCoeff() == 0.0);
  for (double r : energy_residual(tr)) CHECK(r == 0.0);
}

TEST_CASE("same seed and stream give bit-identical paths") {
  const auto m = make_triad({1, 1, -2}, 1.0, {1, 2});
  SimulationOptions o;
  o.T = 3.0;
  o.seed = 99;
  o.stream_id = 5;
  const Vector u0 = Vector::Ones(3);
  const auto a = simulate(m, u0, o), b = simulate(m, u0, o);
  CHECK(a.states == b.states);
  o.stream_id = 6;
  CHECK(simulate(m, u0, o).states != a.states);
  // replaying the stored noise reproduces the path
  const auto c = simulate(m, u0, a.noise, a.scheme);
  CHECK(c.states == a.states);
}

TEST_CASE("noise increments have variance dt") {
  const auto n = NoisePath::generate(3, 20000, 0.01, 4, 0);
  CHECK(n.increments.rows() == 20000);
  CHECK(n.increments.cols() == 3);
  const double var = n.increments.squaredNorm() / static_cast<double>(n.increments.size());
  CHECK(var == doctest::Approx(0.01).epsilon(0.03));
}

TEST_CASE("deterministic energy residual is second order per step") {
  const auto m = unforced(make_linear(2, 1.0));
  double prev = 0.0;
  for (double dt : {1e-2, 5e-3, 2.5e-3}) {
    SimulationOptions o;
    o.T = 1.0;
    o.dt = dt;
    const auto r = energy_residual(simulate(m, Vector::Ones(2), o));
    double worst = 0.0;
    for (double x : r) worst = std::max(worst, std::abs(x));
    CHECK(worst <= 4.0 * dt * dt * 2.0);  // |U0|^2 = 2
    if (prev > 0.0) CHECK(worst / prev == doctest::Approx(0.25).epsilon(0.1));
    prev = worst;
  }
}

TEST_CASE("nonlinear energy term vanishes on the triad") {
  const auto m = make_triad({1, 1, -2}, 1.0, {1, 2, 3});
  SimulationOptions o;
  o.T = 5.0;
  const auto tr = simulate(m, Vector::Ones(3), o);
  const auto nl = energy_nonlinear_term(tr);
  for (std::int64_t s = 0; s < tr.steps(); ++s) {
    const double scale = o.dt * std::pow(tr.state(s).norm(), 3);
    CHECK(std::abs(nl[static_cast<std::size_t>(s)]) <= 1e-12 * std::max(scale, 1e-300));
  }
}

TEST_CASE("cumulative energy residual shrinks with dt") {
  const auto m = make_triad({1, 1, -2}, 1.0, {1, 2, 3});
  std::vector<double> means;
  for (double dt : {2e-2, 1e-2}) {
    double total = 0.0;
    for (std::uint64_t p = 0; p < 1000; ++p) {
      SimulationOptions o;
      o.T = 1.0;
      o.dt = dt;
      o.stream_id = p;
      total += abs_sum(energy_residual(simulate(m, Vector::Ones(3), o)));
    }
    means.push_back(total / 1000.0);
  }
  CHECK(means[1] < means[0]);
}

TEST_CASE("explicit scheme blows up at a large step") {
  const auto m = make_galerkin_nse2d(2, 1.0, {{1, 0}});
  SimulationOptions o;
  o.T = 50.0;
  o.dt = 0.5;
  o.scheme = Scheme::explicit_em;
  const Vector u0 = Vector::Constant(m->dim(), 1.0);
  CHECK_THROWS_AS(simulate(m, u0, o), IntegrationError);
  try {
    simulate_path(m, u0, o, 3);
  } catch (const IntegrationError& e) {
    CHECK(e.error_class() == "integration.blowup");
    CHECK(std::string(e.what()).find("path 3") != std::string::npos);
  }
}

TEST_CASE("dimension checks") {
  const auto m = make_triad({1, 1, -2}, 1.0, {1});
  CHECK_THROWS_AS(simulate(m, Vector::Zero(2), SimulationOptions{}), StructuralError);
  const auto bad = NoisePath::generate(2, 10, 0.1, 0, 0);
  CHECK_THROWS_AS(simulate(m, Vector::Zero(3), bad, Scheme::semi_implicit), StructuralError);
}

TEST_CASE("ensemble examples") {
  const auto m0 = unforced(make_triad({1, 1, -2}, 1.0, {1}));
  EnsembleOptions eo;
  eo.sim.T = 1.0;
  eo.n_paths = 10;
  const auto z = ensemble(m0, Vector::Ones(3), eo);
  CHECK(z.observables[0].variance == 0.0);

  const auto m = make_triad({1, 1, -2}, 1.0, {1, 2});
  eo.n_paths = 1;
  const auto one = ensemble(m, Vector::Ones(3), eo);
  const auto single = simulate_path(m, Vector::Ones(3), eo.sim, 0);
  CHECK(one.final_states.row(0).transpose() == single.final_state());

  eo.sim.T = 5.0;
  eo.n_paths = 1000;
  const Vector u0 = Vector::Ones(3);
  const auto big = ensemble(m, u0, eo);
  const auto& e = big.observables[0];
  CHECK(e.name == "energy");
  CHECK(e.mean <= u0.squaredNorm() + m->sigma_norm2() * eo.sim.T + 3.0 * e.se);
  CHECK(e.q05 <= e.q50);
  CHECK(e.q50 <= e.q95);
}

TEST_CASE("ensemble does not depend on the worker count") {
  const auto m = make_triad({1, 1, -2}, 1.0, {1, 2});
  EnsembleOptions eo;
  eo.sim.T = 1.0;
  eo.n_paths = 64;
  eo.workers = 1;
  const auto a = ensemble(m, Vector::Ones(3), eo);
  eo.workers = 4;
  const auto b = ensemble(m, Vector::Ones(3), eo);
  CHECK(a.final_states == b.final_states);
  CHECK(a.observables[0].mean == b.observables[0].mean);
}

TEST_CASE("moment tails") {
  const auto m0 = unforced(make_triad({1, 1, -2}, 1.0, {1}));
  MomentTailOptions mo;
  mo.sim.T = 2.0;
  mo.n_paths = 20;
  mo.K_grid = {1.0, 2.0, 4.0};
  const auto zero = moment_tail_probe(m0, Vector::Zero(3), mo);
  for (const auto& row : zero.rows) CHECK(row.tail == 0.0);

  mo.K_grid = {0.1};
  CHECK_THROWS_AS(moment_tail_probe(m0, Vector::Ones(3), mo), PreconditionError);
}
