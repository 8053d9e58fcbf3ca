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

// Acceptance run: one line per criterion, nonzero exit when any fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bilinsde/brackets.hpp"
#include "bilinsde/ergodics.hpp"
#include "bilinsde/malliavin.hpp"
#include "bilinsde/model.hpp"
#include "bilinsde/parallel.hpp"
#include "bilinsde/sde.hpp"
#include "bilinsde/stats.hpp"
#include "bilinsde/variational.hpp"
#include "bilinsde_app/app.hpp"

using namespace bilinsde;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void check(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " FAILED(" << what << ")";
    }
  }
  template <class T>
  Outcome& note(const std::string& key, const T& value) {
    detail << ' ' << key << '=' << value;
    return *this;
  }
};

ModelPtr triad(std::set<int> axes) { return make_triad({1, 1, -2}, 1.0, axes); }

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Vector random_vector(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> z;
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = z(gen);
  return v;
}

// 1. structural validation
void structural(Outcome& o) {
  std::vector<ModelPtr> models{triad({1, 2})};
  for (int K = 1; K <= 3; ++K) models.push_back(make_galerkin_nse2d(K, 1.0, {{1, 0}, {1, 1}}));
  double worst = 0.0, alpha_min = 1e300;
  for (const auto& m : models) {
    const auto r = validate_model(*m);
    worst = std::max(worst, r.cancellation_max_violation);
    alpha_min = std::min(alpha_min, r.alpha);
    o.check(r.ok(), m->name() + " fails validation");
  }
  o.note("max_violation", worst).note("min_alpha", alpha_min);
  o.check(worst <= 1e-12, "violation > 1e-12");
  o.check(alpha_min > 0.0, "alpha <= 0");

  std::mt19937_64 gen(5);
  for (const auto& m : models) {
    auto entries = m->B().entries();
    const auto& e = entries[gen() % entries.size()];
    entries.push_back({e.i, e.j, e.k, 1e-3});
    const BilinearModel bad(m->nu(), m->A(), BilinearTensor::from_entries(m->dim(), entries), m->sigma());
    const auto r = validate_model(bad);
    o.check(!r.cancellation_ok, "perturbation missed in " + m->name());
    o.check(std::abs(r.cancellation_max_violation - 1e-3) <= 1e-12, "perturbation size");
  }
  o.note("perturbations_detected", models.size());
}

// 2. bracket-span decisions
void hormander(Outcome& o) {
  const auto two = build_W_ladder(*triad({1, 2}), 10);
  o.note("triad12_level", two.spanning_level ? std::to_string(*two.spanning_level) : "none");
  o.check(two.spanning_level == 1, "triad e1,e2 spanning level != 1");

  const auto one = build_W_ladder(*triad({1}), 10);
  o.note("triad1_span", one.span_dim_at(10));
  o.check(!one.spanning_level.has_value(), "triad e1 spans");

  // The constant ladder stalls below full rank here; the full ladder is
  // evaluated at generic states.
  const auto g = make_galerkin_nse2d(2, 1.0, {{1, 0}, {1, 1}});
  const auto w = build_W_ladder(*g, 10);
  o.note("galerkin_W_span", std::to_string(w.span_dim_at(10)) + "/" + std::to_string(g->dim()));
  int level = -1;
  for (int t = 0; t < 5; ++t) {
    Vector u(g->dim());
    for (int i = 0; i < g->dim(); ++i) u[i] = std::sin(1.3 * i + 0.4 + t);
    const auto r = check_hormander_at_point(*g, u, 4);
    o.check(r.spanning && r.spanning_level.has_value(), "galerkin does not span by level 4");
    if (r.spanning_level) level = std::max(level, *r.spanning_level);
  }
  o.note("galerkin_V_level", level);
  o.check(level == 3, "galerkin spanning level differs from the recorded value 3");
}

// 3. weak order on the linear model
void weak_order(Outcome& o) {
  const auto m = make_linear(2, 1.0);
  const Vector u0 = vec({1.0, 1.0});
  const double exact = u0.squaredNorm() * std::exp(-2.0) + (1.0 - std::exp(-2.0));
  const std::size_t n = 10000;
  std::vector<double> errors, ses;
  for (double dt : {1e-2, 5e-3}) {
    // The exact transition X' = e^{-dt} X + sqrt((1 - e^{-2dt}) / 2) Z, driven
    // by the same normals, has mean |U0|^2 e^{-2} + 1 - e^{-2} at t = 1, so
    // the paired difference estimates the bias with little variance.
    const double a = std::exp(-dt), b = std::sqrt((1.0 - std::exp(-2.0 * dt)) / 2.0 / dt);
    std::vector<double> diff(n);
    SimulationOptions sim;
    sim.T = 1.0;
    sim.dt = dt;
    parallel_for(n, 0, [&](std::size_t p) {
      const auto tr = simulate_path(m, u0, sim, p);
      Vector x = u0;
      for (std::int64_t s = 0; s < tr.steps(); ++s) x = a * x + b * tr.noise.increments.row(s).transpose();
      diff[p] = tr.final_state().squaredNorm() - x.squaredNorm();
    });
    const auto est = mean_and_se(diff);
    errors.push_back(est.mean);
    ses.push_back(est.se);
    // closed form for the semi-implicit recursion, as a cross-check
    const auto M = step_count(1.0, dt);
    const double r = 1.0 / ((1.0 + dt) * (1.0 + dt));
    const double discrete = u0.squaredNorm() * std::pow(r, M) + 2.0 * dt * r * (1.0 - std::pow(r, M)) / (1.0 - r);
    o.note("err(" + std::to_string(dt).substr(0, 6) + ")", est.mean).note("se", est.se).note("closed_form", discrete - exact);
  }
  const double ratio = errors[0] / errors[1];
  o.note("ratio", ratio);
  o.check(ratio >= 1.4 && ratio <= 2.6, "error ratio outside 2 +- 30%");
}

// 4. energy identity
void energy(Outcome& o) {
  const auto m = triad({1, 2, 3});
  const Vector u0 = vec({1.0, 1.0, 1.0});
  const std::size_t n = 2000;
  std::vector<double> abs_means, net_means;
  double nl_worst = 0.0;
  for (double dt : {2e-2, 1e-2, 5e-3}) {
    std::vector<double> abs_sum(n), net(n), nl(n);
    SimulationOptions sim;
    sim.T = 1.0;
    sim.dt = dt;
    parallel_for(n, 0, [&](std::size_t p) {
      const auto tr = simulate_path(m, u0, sim, p);
      const auto r = energy_residual(tr);
      const auto b = energy_nonlinear_term(tr);
      double s = 0.0, t = 0.0, worst = 0.0;
      for (std::size_t k = 0; k < r.size(); ++k) {
        s += std::abs(r[k]);
        t += r[k];
        const double scale = dt * std::pow(tr.state(static_cast<std::int64_t>(k)).norm(), 3);
        if (scale > 0.0) worst = std::max(worst, std::abs(b[k]) / scale);
      }
      abs_sum[p] = s;
      net[p] = std::abs(t);
      nl[p] = worst;
    });
    abs_means.push_back(mean_and_se(abs_sum).mean);
    net_means.push_back(mean_and_se(net).mean);
    for (double x : nl) nl_worst = std::max(nl_worst, x);
    o.note("dt=" + std::to_string(dt).substr(0, 5) + ":sum|r|", abs_means.back()).note("|sum r|", net_means.back());
  }
  for (std::size_t i = 1; i < abs_means.size(); ++i) {
    o.check(abs_means[i] < abs_means[i - 1], "sum |r| not decreasing");
    o.check(net_means[i] < net_means[i - 1], "|sum r| not decreasing");
  }
  o.note("B_term_relative", nl_worst);
  o.check(nl_worst <= 1e-12, "B-term above 1e-12");
}

// 5. variational correctness
void variational(Outcome& o) {
  const auto m = triad({1, 2});
  SimulationOptions sim;
  sim.T = 1.0;
  std::mt19937_64 gen(9);
  double fd_worst = 0.0, dual_worst = 0.0, comp_worst = 0.0;
  for (std::uint64_t p = 0; p < 10; ++p) {
    sim.stream_id = p;
    const Vector u0 = random_vector(3, gen);
    const auto tr = simulate(m, u0, sim);
    const TangentPropagator prop(tr);
    Vector xi = random_vector(3, gen);
    xi.normalize();
    const double eps = 1e-5;
    const auto bumped = simulate(m, Vector(u0 + eps * xi), tr.noise, tr.scheme);
    const Vector fd = (bumped.final_state() - tr.final_state()) / eps;
    const Vector jx = tangent(prop, 0, tr.steps(), xi);
    fd_worst = std::max(fd_worst, (fd - jx).norm() / jx.norm());

    const auto j = jacobian_flow(tr, prop, 0, tr.steps());
    const auto js = adjoint_flow(tr, prop, 0, tr.steps());
    const Vector a = random_vector(3, gen), b = random_vector(3, gen);
    dual_worst = std::max(dual_worst, std::abs((j.matrix * a).dot(b) - a.dot(js.matrix * b)) / (a.norm() * b.norm()));

    const std::int64_t s = 1 + static_cast<std::int64_t>(gen() % static_cast<std::uint64_t>(tr.steps() - 1));
    const Matrix composed = jacobian_flow(tr, prop, s, tr.steps()).matrix * jacobian_flow(tr, prop, 0, s).matrix;
    comp_worst = std::max(comp_worst, (composed - j.matrix).norm() / j.matrix.norm());
  }
  o.note("fd_rel", fd_worst).note("duality", dual_worst).note("composition_rel", comp_worst);
  o.check(fd_worst <= 1e-3, "jacobian vs finite difference");
  o.check(dual_worst <= 1e-12, "duality gap");
  o.check(comp_worst <= 1e-13, "composition");
}

// 6. Malliavin matrix
void malliavin(Outcome& o) {
  SpectralTailOptions so;
  so.sim.T = 1.0;
  so.n_paths = 100;
  so.eps_grid = {1e-8, 1e-6, 1e-4, 1e-3, 1e-2, 3e-2, 1e-1};
  const Vector u0 = vec({0.5, -1.0, 0.8});
  const auto r = spectral_tail(triad({1, 2}), u0, so);
  std::size_t positive = 0;
  double asym = 0.0;
  for (const auto& p : r.paths) {
    if (p.ok && p.lambda_min > 0.0) ++positive;
    asym = std::max(asym, p.asymmetry);
  }
  o.note("positive", std::to_string(positive) + "/" + std::to_string(r.paths.size())).note("asymmetry", asym);
  o.check(positive == 100 && r.failed_paths == 0, "lambda_min > 0 on every path");
  o.check(asym == 0.0, "matrix not symmetric");
  o.detail << " P(lambda_min>=eps)=";
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    o.detail << (i ? "," : "") << r.rows[i].probability;
    if (i) o.check(r.rows[i].probability <= r.rows[i - 1].probability, "tail not monotone");
  }
  o.check(r.rows.front().probability == 1.0, "tail does not reach 1");
  o.check(r.rows.back().probability < 1.0, "tail is flat");

  // degenerate forcing started on the forced axis
  const auto deg = triad({1});
  double worst = 0.0, neg = 0.0;
  for (std::uint64_t p = 0; p < 20; ++p) {
    SimulationOptions sim;
    sim.T = 1.0;
    sim.stream_id = p;
    const auto m = assemble_malliavin(simulate(deg, Vector::Unit(3, 0), sim));
    const auto& l = m.spectrum();
    worst = std::max({worst, std::abs(l[0]) / l[2], std::abs(l[1]) / l[2]});
    neg = std::min(neg, l[0] / l[2]);
    o.check((m.matrix() - m.matrix().transpose()).cwiseAbs().maxCoeff() == 0.0, "degenerate matrix not symmetric");
  }
  o.note("degenerate_ratio", worst);
  o.check(worst <= 1e-12, "degenerate lambda_2,3 above 1e-12 lambda_1");
  o.check(neg >= -1e-12, "negative eigenvalue");
}

// 7. control
void control(Outcome& o) {
  const auto m = triad({1, 2});
  SimulationOptions sim;
  sim.T = 1.0;
  std::mt19937_64 gen(17);
  double worst = 0.0;
  for (std::uint64_t t = 0; t < 10; ++t) {
    sim.stream_id = t;
    const auto tr = simulate(m, vec({0.5, -1.0, 0.8}), sim);
    const Vector xi = random_vector(3, gen);
    const auto v = build_control(tr, xi, 0.0);
    worst = std::max(worst, verify_control(tr, xi, v));
  }
  o.note("max_residual_over_|xi|", worst);
  o.check(worst <= 1e-6, "residual above 1e-6 |xi|");
}

// 8. gradient probe
void gradient(Outcome& o) {
  GradientProbeOptions go;
  go.sim.T = 1.0;
  go.n_paths = 10000;
  go.eps_fd = 1e-5;
  const auto m = triad({1, 2});
  const Vector u0 = vec({1.0, 0.5, -0.2});
  const Vector xi = vec({1.0, -2.0, 0.5}).normalized();
  for (const auto& phi : {observables::energy(), observables::coordinate(0)}) {
    const auto r = gradient_probe(m, u0, phi, xi, go);
    o.note(phi.name + ":jac", r.jacobian_estimate).note("fd", r.finite_difference_estimate).note("gap", r.gap).note("se", r.se);
    o.check(std::abs(r.gap) <= 3.0 * r.se, phi.name + " gap above 3 SE");
  }
}

// 9. stationarity
void stationarity(Outcome& o) {
  const auto m = triad({1, 2, 3});
  SimulationOptions sim;
  sim.T = 1000.0;
  sim.dt = 1e-2;
  const Vector u0 = Vector::Zero(3);
  const auto tr = simulate(m, u0, sim);
  const auto mu = occupation_measure(tr, 0.0, 1);

  Matrix q(3, 3);
  q << 2.0, 0.3, -0.1, 0.3, 1.0, 0.2, -0.1, 0.2, 0.5;
  for (const auto& phi : {observables::energy(), observables::quadratic_form(q), observables::coordinate(0)}) {
    const auto r = stationarity_residual(*m, mu, phi);
    o.note("L" + phi.name, r.mean).note("se", r.se);
    o.check(std::abs(r.mean) <= 3.0 * r.se, "generator residual of " + phi.name + " above 3 SE");
  }
  const auto d = expectation(mu, observables::dissipation(*m));
  o.note("dissipation", d.mean).note("se", d.se).note("|sigma|^2", m->sigma_norm2());
  o.check(std::abs(d.mean - m->sigma_norm2()) <= 3.0 * d.se, "dissipation average off by more than 3 SE");
  for (double R : {2.0, 4.0, 8.0}) {
    const double mass = ball_mass(mu, R).mean;
    const double bound = ball_mass_lower_bound(*m, u0, sim.T, R);
    o.note("mu(B_" + std::to_string(static_cast<int>(R)) + ")", mass).note("bound", bound);
    o.check(mass >= bound, "ball mass below the energy bound");
  }
}

// 10. ergodicity and mixing surrogates
void mixing(Outcome& o) {
  const auto m = triad({1, 2});
  const auto phi = observables::energy();
  {
    SimulationOptions sim;
    sim.T = 1000.0;
    sim.stream_id = 0;
    const auto a = ergodic_average(simulate(m, Vector::Zero(3), sim), phi);
    sim.stream_id = 1;
    const auto b = ergodic_average(simulate(m, vec({5.0, 0.0, 0.0}), sim), phi);
    const double se = std::hypot(a.se, b.se);
    o.note("avg(0)", a.value).note("avg(5)", b.value).note("combined_se", se);
    o.check(std::abs(a.value - b.value) <= 3.0 * se, "ergodic averages differ by more than 3 combined SE");
  }
  {
    MixingOptions mo;
    mo.n_paths = 1000;
    mo.common_noise = true;
    const std::vector<Vector> starts{Vector::Zero(3), vec({5.0, 0.0, 0.0})};
    mo.sim.T = 5.0;
    const auto short_run = mixing_probe(m, starts, phi, mo);
    mo.sim.T = 50.0;
    const auto long_run = mixing_probe(m, starts, phi, mo);
    o.note("gap(T=5)", short_run.gap(0, 1)).note("gap(T=50)", long_run.gap(0, 1));
    o.check(long_run.gap(0, 1) < short_run.gap(0, 1), "mixing gap does not shrink");
  }
  {
    IrreducibilityOptions io;
    io.sim.T = 5.0;
    io.radius = 2.0;
    io.eps = 0.5;
    io.n_paths = 200;
    io.n_init = 20;
    const auto r = irreducibility_probe(m, io);
    o.note("min_hit_probability", r.min_probability);
    o.check(r.initial_states.size() == 20, "ball grid size");
    o.check(r.min_probability > 0.0, "some initial state never reaches the target ball");
  }
}

// 11. moment tails
void moments(Outcome& o) {
  MomentTailOptions mo;
  mo.sim.T = 5.0;
  mo.n_paths = 10000;
  const auto m = triad({1, 2});
  const Vector u0 = vec({1.0, 0.0, 0.0});
  for (double k : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0}) mo.K_grid.push_back(2.0 * u0.squaredNorm() + k * m->sigma_norm2());
  const auto r = moment_tail_probe(m, u0, mo);
  o.detail << " tail=";
  for (std::size_t i = 0; i < r.rows.size(); ++i) o.detail << (i ? "," : "") << r.rows[i].tail;
  o.note("slope", r.slope).note("log_concave", r.log_concave);
  o.check(r.fit_ok, "fit failed: " + r.diagnostic);
  o.check(r.decreasing, "tail not decreasing");
  o.check(r.slope < 0.0, "fitted slope not negative");
}

// 12. determinism through the full front-end
void determinism(Outcome& o) {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "bilinsde_acceptance_determinism";
  fs::remove_all(root);
  const std::vector<std::string> kinds{"simulate", "malliavin", "ergodic", "probe.moments", "probe.gradient",
                                       "probe.mixing", "probe.irreducibility"};
  std::size_t compared = 0;
  for (const auto& kind : kinds) {
    std::vector<std::vector<std::string>> contents;
    for (const auto& [tag, workers] : std::vector<std::pair<std::string, std::string>>{{"a", "1"}, {"b", "1"}, {"c", "4"}}) {
      const fs::path out = root / (kind + "_" + tag);
      const std::string text = "[run]\nkind = " + kind + "\nT = 2\npaths = 40\nseed = 7\nworkers = " + workers +
                               "\nu0 = 0.5,-1,0.8\n[model]\nbuiltin = triad\n[probe]\nn_init = 5\n[output]\ndir = \"" +
                               out.string() + "\"\n";
      std::ostringstream log;
      const auto r = app::run(app::parse_config(text), log);
      o.check(r.exit_code == 0, kind + " failed: " + r.message);
      std::vector<std::string> files;
      for (const auto& f : r.files) {
        std::ifstream in(f, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        files.push_back(ss.str());
      }
      contents.push_back(files);
    }
    o.check(contents[0] == contents[1], kind + " differs between identical runs");
    o.check(contents[0] == contents[2], kind + " differs between worker counts");
    compared += contents[0].size();
  }
  o.note("csv_files_compared", compared);
  fs::remove_all(root);
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    double limit_seconds;
    std::function<void(Outcome&)> body;
  };
  const std::vector<Criterion> criteria{
      {1, "structural validation", 1.0, structural},
      {2, "bracket span decisions", 5.0, hormander},
      {3, "weak order", 30.0, weak_order},
      {4, "energy identity", 30.0, energy},
      {5, "variational correctness", 10.0, variational},
      {6, "malliavin matrix", 120.0, malliavin},
      {7, "control", 30.0, control},
      {8, "gradient probe", 120.0, gradient},
      {9, "stationarity", 180.0, stationarity},
      {10, "ergodicity and mixing", 300.0, mixing},
      {11, "moment tails", 120.0, moments},
      {12, "determinism", 60.0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.check(seconds < c.limit_seconds, "runtime limit");
    if (!o.ok) ++failed;
    std::cout << (o.ok ? "PASS" : "FAIL") << " [" << std::setw(2) << c.id << "] " << c.title << " ("
              << std::fixed << std::setprecision(2) << seconds << " s, limit " << std::setprecision(0)
              << c.limit_seconds << " s)" << std::defaultfloat << std::setprecision(6) << ':' << o.detail.str()
              << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
