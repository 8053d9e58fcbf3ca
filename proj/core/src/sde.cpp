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

#include "bilinsde/sde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bilinsde/error.hpp"
#include "bilinsde/parallel.hpp"
#include "bilinsde/rng.hpp"
#include "bilinsde/stats.hpp"

namespace bilinsde {

std::string_view to_string(Scheme scheme) {
  return scheme == Scheme::explicit_em ? "explicit_em" : "semi_implicit";
}

Scheme parse_scheme(std::string_view text) {
  if (text == "explicit_em") return Scheme::explicit_em;
  if (text == "semi_implicit") return Scheme::semi_implicit;
  throw PreconditionError("unknown scheme '" + std::string(text) + "' (expected explicit_em or semi_implicit)");
}

NoisePath NoisePath::generate(int noise_dim, std::int64_t steps, double dt, std::uint64_t seed,
                              std::uint64_t stream_id) {
  if (noise_dim < 1) throw PreconditionError("noise dimension must be positive");
  if (steps < 0) throw PreconditionError("negative step count");
  if (!(dt > 0.0)) throw PreconditionError("dt must be positive");
  NoisePath path;
  path.dt = dt;
  path.steps = steps;
  path.seed = seed;
  path.stream_id = stream_id;
  path.increments.resize(steps, noise_dim);
  const GaussianStream normals(seed, stream_id);
  const double scale = std::sqrt(dt);
  std::vector<double> buf(static_cast<std::size_t>(noise_dim));
  for (std::int64_t m = 0; m < steps; ++m) {
    normals.fill(static_cast<std::uint64_t>(m), noise_dim, buf.data());
    for (int k = 0; k < noise_dim; ++k) path.increments(m, k) = scale * buf[static_cast<std::size_t>(k)];
  }
  return path;
}

std::int64_t step_count(double T, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw PreconditionError("dt must be positive and finite");
  if (!(T >= dt) || !std::isfinite(T)) throw PreconditionError("T must be finite and at least dt");
  return std::llround(T / dt);
}

// ---------------------------------------------------------------------------
// Stepper

Stepper::Stepper(ModelPtr model, Scheme scheme, double dt) : model_(std::move(model)), scheme_(scheme), dt_(dt) {
  if (!model_) throw PreconditionError("null model");
  if (!(dt > 0.0)) throw PreconditionError("dt must be positive");
  const int n = model_->dim();
  if (scheme_ == Scheme::semi_implicit) {
    const Matrix lhs = Matrix::Identity(n, n) + dt_ * model_->viscous_operator();
    implicit_lu_.compute(lhs);
    const double det = implicit_lu_.determinant();
    if (!std::isfinite(det) || det == 0.0)
      throw NumericalError("I + dt nu A is singular for dt = " + std::to_string(dt));
  } else {
    Eigen::JacobiSVD<Matrix> svd(model_->viscous_operator());
    explicit_unstable_ = dt_ * svd.singularValues()(0) >= 2.0;
  }
}

void Stepper::step(const Vector& u, const Vector& forcing, Vector& out) const {
  const auto& m = *model_;
  Vector rhs = u - dt_ * m.B().apply(u, u) + forcing;
  if (scheme_ == Scheme::explicit_em) {
    out = rhs - dt_ * (m.viscous_operator() * u);
  } else {
    out = implicit_lu_.solve(rhs);
  }
}

Vector Stepper::solve(const Vector& x) const {
  if (scheme_ == Scheme::explicit_em) return x;
  return implicit_lu_.solve(x);
}

Vector Stepper::solve_transpose(const Vector& x) const {
  if (scheme_ == Scheme::explicit_em) return x;
  return implicit_lu_.transpose().solve(x);
}

Matrix Stepper::solve(const Matrix& x) const {
  if (scheme_ == Scheme::explicit_em) return x;
  return implicit_lu_.solve(x);
}

// ---------------------------------------------------------------------------
// Simulation

Trajectory simulate(ModelPtr model, const Vector& u0, const SimulationOptions& options) {
  if (!model) throw PreconditionError("null model");
  const auto steps = step_count(options.T, options.dt);
  auto noise = NoisePath::generate(model->noise_dim(), steps, options.dt, options.seed, options.stream_id);
  return simulate(std::move(model), u0, std::move(noise), options.scheme, options.blowup_bound);
}

Trajectory simulate(ModelPtr model, const Vector& u0, NoisePath noise, Scheme scheme, double blowup_bound) {
  if (!model) throw PreconditionError("null model");
  if (u0.size() != model->dim()) throw StructuralError("initial state dimension mismatch");
  if (!u0.allFinite()) throw DataError("initial state is not finite");
  if (noise.increments.cols() != model->noise_dim() || noise.increments.rows() != noise.steps)
    throw StructuralError("noise path does not match model noise dimension");
  if (noise.steps < 1) throw PreconditionError("trajectory needs at least one step");

  const Stepper stepper(model, scheme, noise.dt);
  Trajectory traj;
  traj.model = model;
  traj.scheme = scheme;
  if (stepper.explicit_unstable()) {
    std::ostringstream os;
    os << "explicit_em: dt * ||nu A|| >= 2 (dt = " << noise.dt << "); linear part is unstable";
    traj.warnings.push_back(os.str());
  }
  const int n = model->dim();
  traj.states.resize(noise.steps + 1, n);
  traj.states.row(0) = u0.transpose();
  Vector u = u0, next(n);
  const Matrix& sigma = model->sigma();
  for (std::int64_t m = 0; m < noise.steps; ++m) {
    const Vector forcing = sigma * noise.increments.row(m).transpose();
    stepper.step(u, forcing, next);
    const double size = next.norm();
    if (!std::isfinite(size) || size > blowup_bound) {
      std::ostringstream os;
      os << "state left the bound " << blowup_bound << " at step " << (m + 1) << " (t = " << (m + 1) * noise.dt
         << ", |U| = " << size << "); reduce dt";
      throw IntegrationError(m + 1, os.str());
    }
    traj.states.row(m + 1) = next.transpose();
    u.swap(next);
  }
  traj.noise = std::move(noise);
  return traj;
}

Trajectory simulate_path(const ModelPtr& model, const Vector& u0, const SimulationOptions& sim,
                         std::uint64_t path) {
  SimulationOptions opts = sim;
  opts.stream_id = path;
  try {
    return simulate(model, u0, opts);
  } catch (const IntegrationError& e) {
    throw IntegrationError(e.step(), "path " + std::to_string(path) + ": " + e.what());
  }
}

std::vector<double> energy_residual(const Trajectory& traj) {
  const auto& model = *traj.model;
  const double s2 = model.sigma_norm2();
  const double dt = traj.dt();
  std::vector<double> r(static_cast<std::size_t>(traj.steps()));
  for (std::int64_t m = 0; m < traj.steps(); ++m) {
    const Vector u = traj.state(m);
    const Vector u1 = traj.state(m + 1);
    const Vector noise = model.sigma() * traj.noise.increments.row(m).transpose();
    r[static_cast<std::size_t>(m)] = u1.squaredNorm() - u.squaredNorm() +
                                     2.0 * dt * u.dot(model.viscous_operator() * u) - s2 * dt -
                                     2.0 * u.dot(noise);
  }
  return r;
}

std::vector<double> energy_nonlinear_term(const Trajectory& traj) {
  const auto& model = *traj.model;
  std::vector<double> out(static_cast<std::size_t>(traj.steps()));
  for (std::int64_t m = 0; m < traj.steps(); ++m) {
    const Vector u = traj.state(m);
    out[static_cast<std::size_t>(m)] = 2.0 * traj.dt() * model.B().apply(u, u).dot(u);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ensembles

EnsembleStats ensemble(ModelPtr model, const Vector& u0, const EnsembleOptions& options,
                       const std::vector<Observable>& observables) {
  if (options.n_paths < 1) throw PreconditionError("ensemble needs at least one path");
  EnsembleStats stats;
  stats.n_paths = options.n_paths;
  stats.final_states.resize(static_cast<Eigen::Index>(options.n_paths), model->dim());
  parallel_for(options.n_paths, options.workers, [&](std::size_t p) {
    const auto traj = simulate_path(model, u0, options.sim, p);
    stats.final_states.row(static_cast<Eigen::Index>(p)) = traj.final_state().transpose();
  });
  for (const auto& obs : observables) {
    std::vector<double> values(options.n_paths);
    for (std::size_t p = 0; p < options.n_paths; ++p)
      values[p] = obs(stats.final_states.row(static_cast<Eigen::Index>(p)).transpose());
    const auto est = mean_and_se(values);
    ObservableSummary s;
    s.name = obs.name;
    s.mean = est.mean;
    s.se = est.se;
    s.variance = est.se * est.se * static_cast<double>(values.size());  // sample variance
    s.q05 = quantile(values, 0.05);
    s.q50 = quantile(values, 0.50);
    s.q95 = quantile(values, 0.95);
    stats.observables.push_back(std::move(s));
  }
  return stats;
}

MomentTailResult moment_tail_probe(ModelPtr model, const Vector& u0, const MomentTailOptions& options) {
  if (options.n_paths < 1) throw PreconditionError("moment probe needs at least one path");
  if (options.K_grid.empty()) throw PreconditionError("moment probe needs a non-empty K grid");
  const double u0_2 = u0.squaredNorm();
  for (double k : options.K_grid)
    if (k < 2.0 * u0_2) throw PreconditionError("every K must satisfy K >= 2 |U0|^2");

  const double alpha = model->alpha();
  const double s2 = model->sigma_norm2();
  std::vector<double> sup_functional(options.n_paths), exp_arg(options.n_paths);
  parallel_for(options.n_paths, options.workers, [&](std::size_t p) {
    const auto traj = simulate_path(model, u0, options.sim, p);
    const double dt = traj.dt();
    double integral = 0.0, sup_s = -INFINITY, sup_energy = 0.0;
    for (std::int64_t m = 0; m <= traj.steps(); ++m) {
      const double e = traj.states.row(m).squaredNorm();
      sup_s = std::max(sup_s, e + alpha * integral - s2 * traj.time(m));
      sup_energy = std::max(sup_energy, e);
      if (m < traj.steps()) integral += e * dt;
    }
    sup_functional[p] = sup_s;
    exp_arg[p] = sup_energy + alpha * integral;
  });

  MomentTailResult result;
  result.n_paths = options.n_paths;
  std::vector<double> ks = options.K_grid;
  std::sort(ks.begin(), ks.end());
  std::vector<double> fit_x, fit_y;
  for (double k : ks) {
    MomentTailRow row;
    row.K = k;
    row.exceedances = static_cast<std::size_t>(
        std::count_if(sup_functional.begin(), sup_functional.end(), [k](double s) { return s >= k / 2.0; }));
    row.tail = static_cast<double>(row.exceedances) / static_cast<double>(options.n_paths);
    if (row.exceedances > 0) {
      fit_x.push_back(k);
      fit_y.push_back(std::log(row.tail));
    }
    result.rows.push_back(row);
  }
  result.decreasing = true;
  for (std::size_t i = 1; i < result.rows.size(); ++i)
    result.decreasing &= result.rows[i].tail <= result.rows[i - 1].tail;

  if (fit_x.size() >= 3) {
    const auto fit = fit_line(fit_x, fit_y);
    result.slope = fit.slope;
    result.intercept = fit.intercept;
    result.fit_ok = true;
    // concavity of log P on the fitted points (second differences, uneven grid)
    result.log_concave = true;
    for (std::size_t i = 1; i + 1 < fit_x.size(); ++i) {
      const double left = (fit_y[i] - fit_y[i - 1]) / (fit_x[i] - fit_x[i - 1]);
      const double right = (fit_y[i + 1] - fit_y[i]) / (fit_x[i + 1] - fit_x[i]);
      result.log_concave &= right <= left + 1e-12;
    }
  } else {
    result.diagnostic = "too few K values with exceedances (" + std::to_string(fit_x.size()) +
                        ") for a slope fit; increase paths or lower K";
  }
  for (auto& row : result.rows) row.bound_shape = result.fit_ok ? std::exp(result.intercept + result.slope * row.K) : 0.0;

  std::vector<double> exps(options.n_paths);
  for (std::size_t p = 0; p < options.n_paths; ++p) exps[p] = std::exp(options.eta * exp_arg[p]);
  const auto est = mean_and_se(exps);
  result.exp_moment = est.mean;
  result.exp_moment_se = est.se;
  result.exp_bound = std::exp(options.eta * (u0_2 + s2 * options.sim.T));
  result.exp_moment_exceeds = result.exp_moment > result.exp_bound;
  return result;
}

}  // namespace bilinsde
