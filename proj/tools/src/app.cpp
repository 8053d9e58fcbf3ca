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

#include "bilinsde_app/app.hpp"

#include <chrono>
#include <fstream>
#include <set>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "bilinsde/brackets.hpp"
#include "bilinsde/ergodics.hpp"
#include "bilinsde/malliavin.hpp"
#include "bilinsde/model_io.hpp"
#include "bilinsde/parallel.hpp"
#include "bilinsde/stats.hpp"
#include "bilinsde_app/csv.hpp"

#ifndef BILINSDE_VERSION
#define BILINSDE_VERSION "0.0.0"
#endif

namespace bilinsde::app {

namespace {

using Clock = std::chrono::steady_clock;

[[noreturn]] void semantic(const std::string& key, const std::string& what) {
  throw ConfigError("config.semantic", key, 0, 0, key + ": " + what);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) {
    const auto b = part.find_first_not_of(" \t");
    const auto e = part.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(part.substr(b, e - b + 1));
  }
  return out;
}

int parse_int(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    semantic(key, "expected an integer, got '" + text + "'");
  }
}

Vector to_vector(const std::vector<double>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

Vector resolve_state(const std::string& key, const std::vector<double>& v, int dim) {
  if (v.empty()) return Vector::Zero(dim);
  if (static_cast<int>(v.size()) != dim)
    semantic(key, "has " + std::to_string(v.size()) + " entries, the model has dimension " + std::to_string(dim));
  return to_vector(v);
}

SimulationOptions sim_options(const RunConfig& c) {
  SimulationOptions o;
  o.T = c.T;
  o.dt = c.dt;
  o.scheme = c.scheme;
  o.seed = c.seed;
  o.blowup_bound = c.blowup_bound;
  return o;
}

std::vector<std::string> state_columns(const std::string& prefix, int dim) {
  std::vector<std::string> cols;
  for (int i = 1; i <= dim; ++i) cols.push_back(prefix + std::to_string(i));
  return cols;
}

class Session {
public:
  Session(const RunConfig& config, ModelPtr model, std::ostream& log)
      : config_(config), model_(std::move(model)), log_(log), start_(Clock::now()) {
    std::filesystem::create_directories(config_.out_dir);
  }

  CsvWriter open(const std::string& name, const std::vector<std::string>& header) {
    return CsvWriter(config_.out_dir / name, header);
  }

  void finish(CsvWriter& w) {
    w.close();
    write_manifest(w);
    files_.push_back(w.path());
    log_ << "wrote " << w.path().string() << " (" << w.rows() << " rows)\n";
  }

  std::vector<std::filesystem::path> files() const { return files_; }

private:
  void write_manifest(const CsvWriter& w) const {
    nlohmann::ordered_json m;
    m["tool"] = "bilinsde";
    m["version"] = BILINSDE_VERSION;
    m["kind"] = std::string(to_string(config_.kind));
    m["file"] = w.path().filename().string();
    m["columns"] = w.header();
    m["rows"] = w.rows();
    m["seed"] = config_.seed;
    m["workers_requested"] = config_.workers;
    m["workers_used"] = resolve_workers(config_.workers);
    auto& inputs = m["inputs"];
    for (const auto& [key, value] : config_.values) {
      inputs[key]["value"] = value;
      const auto it = config_.provenance.find(key);
      inputs[key]["source"] = it == config_.provenance.end() ? "default" : it->second;
    }
    m["model"] = {{"name", model_->name()},
                  {"dim", model_->dim()},
                  {"noise_dim", model_->noise_dim()},
                  {"nu", model_->nu()},
                  {"source", config_.model.file ? config_.model.file->string() : "builtin " + config_.model.builtin}};
    m["build"] = {{"compiler", __VERSION__},
                  {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                std::to_string(EIGEN_MINOR_VERSION)},
                  {"cxx", static_cast<long>(__cplusplus)}};
    m["wall_time_seconds"] = std::chrono::duration<double>(Clock::now() - start_).count();
    std::ofstream out(w.path().string() + ".manifest.json", std::ios::binary | std::ios::trunc);
    out << m.dump(2) << '\n';
    if (!out) throw Error("io.write", "cannot write manifest for " + w.path().string());
  }

  const RunConfig& config_;
  ModelPtr model_;
  std::ostream& log_;
  Clock::time_point start_;
  std::vector<std::filesystem::path> files_;
};

void run_validate(const RunConfig&, const ModelPtr& model, Session& s) {
  const auto r = validate_model(*model);
  auto w = s.open("validation.csv", {"check", "value", "ok", "message"});
  auto msg = [&](const std::string& tag) {
    for (const auto& m : r.messages)
      if (m.find(tag) != std::string::npos) return m;
    return std::string();
  };
  w.field("coercivity_alpha").field(r.alpha).field(r.coercivity_ok ? "true" : "false").field(msg("coerc"));
  w.end_row();
  w.field("cancellation_max_violation")
      .field(r.cancellation_max_violation)
      .field(r.cancellation_ok ? "true" : "false")
      .field(msg("cancel"));
  w.end_row();
  w.field("sigma_norm2").field(model->sigma_norm2()).field(r.sigma_ok ? "true" : "false").field(msg("sigma"));
  w.end_row();
  w.field("model_ok").field(r.ok() ? 1.0 : 0.0).field(r.ok() ? "true" : "false").empty();
  w.end_row();
  s.finish(w);
}

void run_hormander(const RunConfig& c, const ModelPtr& model, Session& s) {
  const auto ladder = build_W_ladder(*model, c.n_max, c.rank_tol);
  auto w = s.open("hormander.csv", {"level", "new_vectors", "span_dim", "spanning_level"});
  for (std::size_t n = 0; n < ladder.span_dim.size(); ++n) {
    w.field(static_cast<int>(n)).field(ladder.new_vectors[n]).field(ladder.span_dim[n]);
    if (ladder.spanning_level)
      w.field(*ladder.spanning_level);
    else
      w.empty();
    w.end_row();
  }
  s.finish(w);

  if (c.hormander_point) {
    const Vector u = resolve_state("hormander.point", *c.hormander_point, model->dim());
    const auto p = check_hormander_at_point(*model, u, c.n_max, c.rank_tol, c.degree_cap);
    auto pw = s.open("hormander_point.csv", {"level", "span_dim", "spanning_level"});
    for (std::size_t n = 0; n < p.level_span.size(); ++n) {
      pw.field(static_cast<int>(n)).field(p.level_span[n]);
      if (p.spanning_level)
        pw.field(*p.spanning_level);
      else
        pw.empty();
      pw.end_row();
    }
    s.finish(pw);
  }
}

void run_simulate(const RunConfig& c, const ModelPtr& model, Session& s) {
  const Vector u0 = resolve_state("run.u0", c.u0, model->dim());
  const auto sim = sim_options(c);
  const std::int64_t steps = step_count(c.T, c.dt);
  const std::int64_t kept = steps / c.stride + 1 + (steps % c.stride != 0 ? 1 : 0);
  std::vector<Matrix> rows(c.paths);
  std::vector<double> times;
  for (std::int64_t m = 0; m <= steps; m += c.stride) times.push_back(static_cast<double>(m) * c.dt);
  if (steps % c.stride != 0) times.push_back(static_cast<double>(steps) * c.dt);
  parallel_for(c.paths, c.workers, [&](std::size_t p) {
    const auto tr = simulate_path(model, u0, sim, p);
    Matrix& out = rows[p];
    out.resize(kept, model->dim());
    Eigen::Index r = 0;
    for (std::int64_t m = 0; m <= steps; m += c.stride) out.row(r++) = tr.states.row(m);
    if (steps % c.stride != 0) out.row(r++) = tr.states.row(steps);
  });

  std::vector<std::string> header{"path", "time"};
  for (auto& col : state_columns("U_", model->dim())) header.push_back(col);
  auto w = s.open("trajectories.csv", header);
  for (std::size_t p = 0; p < c.paths; ++p)
    for (Eigen::Index r = 0; r < rows[p].rows(); ++r) {
      w.field(p).field(times[static_cast<std::size_t>(r)]);
      for (int i = 0; i < model->dim(); ++i) w.field(rows[p](r, i));
      w.end_row();
    }
  s.finish(w);

  auto sw = s.open("summary.csv", {"observable", "mean", "se", "variance", "q05", "q50", "q95"});
  for (const auto& name : c.observables) {
    const auto obs = observables::by_name(name, *model);
    std::vector<double> values(c.paths);
    for (std::size_t p = 0; p < c.paths; ++p) values[p] = obs(rows[p].row(rows[p].rows() - 1).transpose());
    const auto est = mean_and_se(values);
    sw.field(obs.name).field(est.mean).field(est.se).field(est.se * est.se * static_cast<double>(values.size()));
    sw.field(quantile(values, 0.05)).field(quantile(values, 0.5)).field(quantile(values, 0.95));
    sw.end_row();
  }
  s.finish(sw);
}

void run_malliavin(const RunConfig& c, const ModelPtr& model, Session& s) {
  SpectralTailOptions o;
  o.sim = sim_options(c);
  o.n_paths = c.paths;
  o.eps_grid = c.eps_grid;
  o.workers = c.workers;
  const auto r = spectral_tail(model, resolve_state("run.u0", c.u0, model->dim()), o);
  auto w = s.open("malliavin_paths.csv", {"path", "ok", "lambda_min", "lambda_max", "cond"});
  for (const auto& p : r.paths) {
    w.field(p.path).field(p.ok ? "true" : "false");
    if (p.ok)
      w.field(p.lambda_min).field(p.lambda_max).field(p.condition);
    else
      w.empty().empty().empty();
    w.end_row();
  }
  s.finish(w);
  auto t = s.open("malliavin_tail.csv", {"eps", "probability"});
  for (const auto& row : r.rows) {
    t.field(row.eps).field(row.probability);
    t.end_row();
  }
  s.finish(t);
  auto sm = s.open("malliavin_summary.csv", {"key", "value"});
  sm.field("paths").field(r.paths.size()).end_row();
  sm.field("failed_paths").field(r.failed_paths).end_row();
  sm.field("tail_exponent");
  if (r.fit_ok)
    sm.field(r.tail_exponent);
  else
    sm.empty();
  sm.end_row();
  s.finish(sm);
}

void run_ergodic(const RunConfig& c, const ModelPtr& model, Session& s) {
  const Vector u0 = resolve_state("run.u0", c.u0, model->dim());
  const auto sim = sim_options(c);
  std::vector<Trajectory> paths(c.paths);
  parallel_for(c.paths, c.workers, [&](std::size_t p) { paths[p] = simulate_path(model, u0, sim, p); });
  const auto mu = occupation_measure(paths, c.burn_in, c.thin);

  std::vector<Observable> obs;
  for (const auto& name : c.observables) obs.push_back(observables::by_name(name, *model));
  auto w = s.open("ergodic.csv", {"observable", "mean", "SE", "stationarity_residual", "residual_SE"});
  for (const auto& o : obs) {
    const auto e = expectation(mu, o);
    w.field(o.name).field(e.mean).field(e.se);
    if (o.has_gradient() && o.has_hessian()) {
      const auto r = stationarity_residual(*model, mu, o);
      w.field(r.mean).field(r.se);
    } else {
      w.empty().empty();
    }
    w.end_row();
  }
  s.finish(w);

  std::vector<std::string> header{"time"};
  for (const auto& o : obs) header.push_back(o.name);
  auto rw = s.open("running_average.csv", header);
  std::vector<ErgodicAverage> runs;
  for (const auto& o : obs) runs.push_back(ergodic_average(paths.front(), o, mu.burn_in));
  const std::int64_t start = paths.front().steps() + 1 - static_cast<std::int64_t>(runs.front().running.size());
  const auto n = static_cast<std::int64_t>(runs.front().running.size());
  for (std::int64_t i = 0; i < n; i += c.stride) {
    rw.field(paths.front().time(start + i));
    for (const auto& r : runs) rw.field(r.running[static_cast<std::size_t>(i)]);
    rw.end_row();
  }
  s.finish(rw);
}

void run_moments(const RunConfig& c, const ModelPtr& model, Session& s) {
  const Vector u0 = resolve_state("run.u0", c.u0, model->dim());
  MomentTailOptions o;
  o.sim = sim_options(c);
  o.n_paths = c.paths;
  o.eta = c.eta;
  o.workers = c.workers;
  o.K_grid = c.K_grid;
  if (o.K_grid.empty()) {
    const double base = 2.0 * u0.squaredNorm();
    for (double m : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0}) o.K_grid.push_back(base + m * model->sigma_norm2());
  }
  const auto r = moment_tail_probe(model, u0, o);
  auto w = s.open("moments.csv", {"K", "empirical_tail", "exceedances", "bound_shape"});
  for (const auto& row : r.rows) {
    w.field(row.K).field(row.tail).field(row.exceedances);
    if (r.fit_ok)
      w.field(row.bound_shape);
    else
      w.empty();
    w.end_row();
  }
  s.finish(w);
  auto sm = s.open("moments_summary.csv", {"key", "value"});
  auto flag = [](bool b) { return b ? "true" : "false"; };
  sm.field("paths").field(r.n_paths).end_row();
  sm.field("slope").field(r.slope).end_row();
  sm.field("intercept").field(r.intercept).end_row();
  sm.field("fit_ok").field(flag(r.fit_ok)).end_row();
  sm.field("decreasing").field(flag(r.decreasing)).end_row();
  sm.field("log_concave").field(flag(r.log_concave)).end_row();
  sm.field("exp_moment").field(r.exp_moment).end_row();
  sm.field("exp_moment_se").field(r.exp_moment_se).end_row();
  sm.field("exp_bound").field(r.exp_bound).end_row();
  sm.field("exp_moment_exceeds_bound").field(flag(r.exp_moment_exceeds)).end_row();
  sm.field("diagnostic").field(r.diagnostic).end_row();
  s.finish(sm);
}

Vector unit_direction(const RunConfig& c, int dim) {
  if (c.xi.empty()) return Vector::Unit(dim, 0);
  Vector xi = resolve_state("probe.xi", c.xi, dim);
  if (xi.norm() == 0.0) semantic("probe.xi", "must be nonzero");
  return xi / xi.norm();
}

void run_gradient(const RunConfig& c, const ModelPtr& model, Session& s) {
  const Vector u0 = resolve_state("run.u0", c.u0, model->dim());
  GradientProbeOptions o;
  o.sim = sim_options(c);
  o.n_paths = c.paths;
  o.eps_fd = c.eps_fd;
  o.workers = c.workers;
  const Vector xi = unit_direction(c, model->dim());
  auto w = s.open("gradient.csv", {"observable", "jacobian_estimate", "jacobian_se", "fd_estimate", "fd_se", "gap",
                                   "combined_se", "paired_se"});
  for (const auto& name : c.probe_observables) {
    const auto phi = observables::by_name(name, *model);
    const auto r = gradient_probe(model, u0, phi, xi, o);
    w.field(phi.name).field(r.jacobian_estimate).field(r.jacobian_se).field(r.finite_difference_estimate);
    w.field(r.finite_difference_se).field(r.gap).field(r.se).field(r.paired_se);
    w.end_row();
  }
  s.finish(w);
}

void run_mixing(const RunConfig& c, const ModelPtr& model, Session& s) {
  std::vector<Vector> u0s;
  if (c.u0_list.empty()) {
    u0s = {Vector::Zero(model->dim()), Vector(5.0 * Vector::Unit(model->dim(), 0))};
  } else {
    for (const auto& v : c.u0_list) u0s.push_back(resolve_state("probe.u0_list", v, model->dim()));
  }
  MixingOptions o;
  o.sim = sim_options(c);
  o.n_paths = c.paths;
  o.common_noise = c.common_noise;
  o.workers = c.workers;
  const auto phi = observables::by_name(c.probe_observables.front(), *model);
  const auto r = mixing_probe(model, u0s, phi, o);
  auto m = s.open("mixing_means.csv", {"index", "u0_norm", "observable", "mean", "se"});
  for (std::size_t i = 0; i < u0s.size(); ++i) {
    m.field(i).field(u0s[i].norm()).field(phi.name).field(r.means[i]).field(r.mean_se[i]);
    m.end_row();
  }
  s.finish(m);
  auto w = s.open("mixing.csv", {"i", "j", "T", "gap", "gap_se"});
  for (std::size_t i = 0; i < u0s.size(); ++i)
    for (std::size_t j = i + 1; j < u0s.size(); ++j) {
      const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
      w.field(i).field(j).field(c.T).field(r.gap(a, b)).field(r.gap_se(a, b));
      w.end_row();
    }
  s.finish(w);
}

void run_irreducibility(const RunConfig& c, const ModelPtr& model, Session& s) {
  IrreducibilityOptions o;
  o.sim = sim_options(c);
  o.radius = c.radius;
  o.eps = c.eps;
  o.n_paths = c.paths;
  o.n_init = c.n_init;
  o.workers = c.workers;
  const auto r = irreducibility_probe(model, o);
  std::vector<std::string> header{"index", "u0_norm", "probability", "zero_hit"};
  auto w = s.open("irreducibility.csv", header);
  for (std::size_t i = 0; i < r.initial_states.size(); ++i) {
    const bool zero = r.hit_probability[i] == 0.0;
    w.field(i).field(r.initial_states[i].norm()).field(r.hit_probability[i]).field(zero ? "true" : "false");
    w.end_row();
  }
  s.finish(w);
  auto sm = s.open("irreducibility_summary.csv", {"key", "value"});
  sm.field("min_probability").field(r.min_probability).end_row();
  sm.field("zero_hit_cells").field(r.zero_hit_cells.size()).end_row();
  sm.field("radius").field(c.radius).end_row();
  sm.field("eps").field(c.eps).end_row();
  s.finish(sm);
}

}  // namespace

int exit_code_for(const std::string& error_class) {
  auto starts = [&](const char* prefix) { return error_class.rfind(prefix, 0) == 0; };
  if (starts("config") || starts("model.") || error_class == "precondition" || starts("ergodics."))
    return kExitConfig;
  if (starts("integration.") || starts("numeric.") || starts("malliavin.") || starts("brackets.")) return kExitNumeric;
  return kExitInternal;
}

ModelPtr build_model(const RunConfig& c) {
  if (c.model.file) return load_model(*c.model.file);
  const auto& m = c.model;
  if (m.builtin == "triad") {
    std::set<int> axes;
    for (const auto& a : split(m.forced, ',')) axes.insert(parse_int("model.forced", a));
    if (axes.empty()) semantic("model.forced", "needs at least one axis");
    return make_triad({m.c[0], m.c[1], m.c[2]}, m.nu, axes);
  }
  if (m.builtin == "galerkin") {
    std::vector<WaveVector> modes;
    for (const auto& token : split(m.forced, ',')) {
      const auto parts = split(token, ':');
      if (parts.size() != 2) semantic("model.forced", "galerkin modes are written kx:ky, got '" + token + "'");
      modes.push_back({parse_int("model.forced", parts[0]), parse_int("model.forced", parts[1])});
    }
    return make_galerkin_nse2d(m.cutoff, m.nu, modes);
  }
  return make_linear(m.dim, m.nu);
}

RunResult run(const RunConfig& config, std::ostream& log) {
  RunResult result;
  try {
    const auto model = build_model(config);
    Session session(config, model, log);
    switch (config.kind) {
      case Kind::validate: run_validate(config, model, session); break;
      case Kind::hormander: run_hormander(config, model, session); break;
      case Kind::simulate: run_simulate(config, model, session); break;
      case Kind::malliavin: run_malliavin(config, model, session); break;
      case Kind::ergodic: run_ergodic(config, model, session); break;
      case Kind::probe_moments: run_moments(config, model, session); break;
      case Kind::probe_gradient: run_gradient(config, model, session); break;
      case Kind::probe_mixing: run_mixing(config, model, session); break;
      case Kind::probe_irreducibility: run_irreducibility(config, model, session); break;
    }
    result.files = session.files();
  } catch (const Error& e) {
    result.error_class = e.error_class();
    result.message = e.what();
    result.exit_code = exit_code_for(e.error_class());
  } catch (const std::filesystem::filesystem_error& e) {
    result.error_class = "io.write";
    result.message = e.what();
    result.exit_code = kExitInternal;
  } catch (const std::exception& e) {
    result.error_class = "internal";
    result.message = e.what();
    result.exit_code = kExitInternal;
  }
  return result;
}

}  // namespace bilinsde::app
