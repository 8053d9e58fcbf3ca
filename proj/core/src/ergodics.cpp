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

#include "bilinsde/ergodics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bilinsde/error.hpp"
#include "bilinsde/parallel.hpp"
#include "bilinsde/variational.hpp"

namespace bilinsde {

namespace {

std::int64_t first_index(const Trajectory& traj, double burn_in) {
  if (burn_in < 0.0) throw PreconditionError("burn-in must be non-negative");
  if (burn_in >= traj.T()) throw PreconditionError("burn-in must be shorter than the trajectory");
  return static_cast<std::int64_t>(std::ceil(burn_in / traj.dt() - 1e-9));
}

}  // namespace

OccupationMeasure occupation_measure(const Trajectory& traj, std::optional<double> burn_in,
                                     std::optional<std::int64_t> thinning) {
  return occupation_measure(std::vector<Trajectory>{traj}, burn_in, thinning);
}

OccupationMeasure occupation_measure(const std::vector<Trajectory>& paths, std::optional<double> burn_in,
                                     std::optional<std::int64_t> thinning) {
  if (paths.empty()) throw PreconditionError("occupation measure needs at least one trajectory");
  const double b = burn_in.value_or(0.1 * paths.front().T());
  std::int64_t available = 0;
  for (const auto& p : paths) available += p.steps() - first_index(p, b) + 1;
  const std::int64_t stride =
      thinning.value_or(std::max<std::int64_t>(1, (available + static_cast<std::int64_t>(kMaxStoredSamples) - 1) /
                                                      static_cast<std::int64_t>(kMaxStoredSamples)));
  if (stride < 1) throw PreconditionError("thinning must be at least 1");

  OccupationMeasure mu;
  mu.burn_in = b;
  mu.thinning = stride;
  mu.source = paths.size() == 1 ? "trajectory" : "ensemble of " + std::to_string(paths.size()) + " paths";
  std::vector<Vector> rows;
  for (const auto& p : paths) {
    const std::int64_t start = first_index(p, b);
    for (std::int64_t m = start; m <= p.steps(); m += stride) rows.push_back(p.state(m));
    mu.T_effective += p.T() - p.time(start);
  }
  if (rows.empty()) throw PreconditionError("occupation measure is empty");
  mu.samples.resize(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) mu.samples.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  mu.weights.assign(rows.size(), 1.0 / static_cast<double>(rows.size()));
  return mu;
}

MeanEstimate expectation(const OccupationMeasure& mu, const Observable& phi) {
  std::vector<double> values(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) values[i] = phi(mu.samples.row(static_cast<Eigen::Index>(i)).transpose());
  return batch_means(values, mu.weights);
}

MeanEstimate ball_mass(const OccupationMeasure& mu, double radius) {
  return expectation(mu, observables::ball_indicator(radius));
}

double ball_mass_lower_bound(const BilinearModel& model, const Vector& u0, double T, double radius) {
  return 1.0 - (model.sigma_norm2() + u0.squaredNorm() / T) / (2.0 * model.alpha() * radius * radius);
}

ErgodicAverage ergodic_average(const Trajectory& traj, const Observable& phi, double burn_in) {
  const std::int64_t start = first_index(traj, burn_in);
  ErgodicAverage avg;
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(traj.steps() - start + 1));
  double sum = 0.0;
  for (std::int64_t m = start; m <= traj.steps(); ++m) {
    const double v = phi(traj.state(m));
    values.push_back(v);
    sum += v;
    avg.running.push_back(sum / static_cast<double>(values.size()));
  }
  avg.value = avg.running.back();
  avg.se = batch_means(values).se;
  return avg;
}

double generator_apply(const BilinearModel& model, const Observable& phi, const Vector& u) {
  if (!phi.has_gradient() || !phi.has_hessian())
    throw ObservableError("observable '" + phi.name + "' lacks the gradient or hessian the generator needs");
  const Vector f = model.viscous_operator() * u + model.B().apply(u, u);
  const Matrix& s = model.sigma();
  const Matrix h = phi.hessian(u);
  // tr(sigma sigma^T H) = sum_k sigma_k^T H sigma_k
  const double trace = (s.transpose() * h * s).trace();
  return -f.dot(phi.gradient(u)) + 0.5 * trace;
}

MeanEstimate stationarity_residual(const BilinearModel& model, const OccupationMeasure& mu, const Observable& phi) {
  std::vector<double> values(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i)
    values[i] = generator_apply(model, phi, mu.samples.row(static_cast<Eigen::Index>(i)).transpose());
  return batch_means(values, mu.weights);
}

MixingResult mixing_probe(ModelPtr model, const std::vector<Vector>& u0_list, const Observable& phi,
                          const MixingOptions& options) {
  if (u0_list.size() < 2) throw PreconditionError("mixing probe needs at least two initial states");
  if (options.n_paths < 2) throw PreconditionError("mixing probe needs at least two paths");
  const std::size_t k = u0_list.size();
  const std::size_t n = options.n_paths;
  std::vector<double> values(k * n);
  parallel_for(k * n, options.workers, [&](std::size_t idx) {
    const std::size_t i = idx / n, p = idx % n;
    const std::uint64_t stream = options.common_noise ? p : idx;
    const auto traj = simulate_path(model, u0_list[i], options.sim, stream);
    values[idx] = phi(traj.final_state());
  });

  MixingResult r;
  r.gap = Matrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  r.gap_se = r.gap;
  for (std::size_t i = 0; i < k; ++i) {
    const auto est = mean_and_se(std::span<const double>(values).subspan(i * n, n));
    r.means.push_back(est.mean);
    r.mean_se.push_back(est.se);
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      double se;
      if (options.common_noise) {
        std::vector<double> diff(n);
        for (std::size_t p = 0; p < n; ++p) diff[p] = values[i * n + p] - values[j * n + p];
        se = mean_and_se(diff).se;
      } else {
        se = std::hypot(r.mean_se[i], r.mean_se[j]);
      }
      r.gap(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::abs(r.means[i] - r.means[j]);
      r.gap_se(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = se;
    }
  return r;
}

namespace {

double radical_inverse(std::uint64_t index, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base), f = inv, r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

std::vector<std::uint64_t> first_primes(std::size_t count) {
  std::vector<std::uint64_t> primes;
  for (std::uint64_t c = 2; primes.size() < count; ++c)
    if (std::none_of(primes.begin(), primes.end(), [c](std::uint64_t p) { return c % p == 0; })) primes.push_back(c);
  return primes;
}

}  // namespace

std::vector<Vector> ball_grid(int dim, double radius, std::size_t count) {
  if (dim < 1) throw PreconditionError("ball grid dimension must be positive");
  if (!(radius >= 0.0)) throw PreconditionError("ball radius must be non-negative");
  // Halton coordinates: pairs feed Box-Muller for the direction, the last one
  // the radius r = R u^(1/N).
  const int pairs = (dim + 1) / 2;
  const auto primes = first_primes(static_cast<std::size_t>(2 * pairs + 1));
  std::vector<Vector> points;
  points.reserve(count);
  for (std::uint64_t h = 1; points.size() < count; ++h) {
    Vector g(2 * pairs);
    for (int p = 0; p < pairs; ++p) {
      const double u1 = radical_inverse(h, primes[2 * p]);
      const double u2 = radical_inverse(h, primes[2 * p + 1]);
      const double rad = std::sqrt(-2.0 * std::log(u1));
      g[2 * p] = rad * std::cos(2.0 * std::numbers::pi * u2);
      g[2 * p + 1] = rad * std::sin(2.0 * std::numbers::pi * u2);
    }
    Vector dir = g.head(dim);
    const double norm = dir.norm();
    if (norm == 0.0) continue;
    const double r = radius * std::pow(radical_inverse(h, primes.back()), 1.0 / dim);
    points.push_back(dir * (r / norm));
  }
  return points;
}

IrreducibilityResult irreducibility_probe(ModelPtr model, const IrreducibilityOptions& options) {
  if (!(options.eps > 0.0)) throw PreconditionError("eps must be positive");
  if (!(options.sim.T > 0.0)) throw PreconditionError("T must be positive");
  if (options.n_paths < 1 || options.n_init < 1) throw PreconditionError("need at least one path and one initial state");
  IrreducibilityResult r;
  r.initial_states = ball_grid(model->dim(), options.radius, options.n_init);
  const std::size_t n = options.n_paths;
  std::vector<char> hits(options.n_init * n, 0);
  parallel_for(options.n_init * n, options.workers, [&](std::size_t idx) {
    const auto traj = simulate_path(model, r.initial_states[idx / n], options.sim, idx);
    hits[idx] = traj.final_state().norm() <= options.eps ? 1 : 0;
  });
  r.min_probability = 1.0;
  for (std::size_t i = 0; i < options.n_init; ++i) {
    const auto count = std::count(hits.begin() + static_cast<std::ptrdiff_t>(i * n),
                                  hits.begin() + static_cast<std::ptrdiff_t>((i + 1) * n), 1);
    const double prob = static_cast<double>(count) / static_cast<double>(n);
    r.hit_probability.push_back(prob);
    r.min_probability = std::min(r.min_probability, prob);
    if (count == 0) r.zero_hit_cells.push_back(i);
  }
  return r;
}

GradientProbeResult gradient_probe(ModelPtr model, const Vector& u0, const Observable& phi, const Vector& xi,
                                   const GradientProbeOptions& options) {
  if (!phi.has_gradient()) throw ObservableError("observable '" + phi.name + "' has no gradient");
  if (xi.size() != model->dim()) throw StructuralError("xi dimension mismatch");
  if (std::abs(xi.norm() - 1.0) > 1e-12) throw PreconditionError("xi must be a unit vector");
  if (!(options.eps_fd > 0.0)) throw PreconditionError("finite-difference step must be positive");
  if (options.n_paths < 2) throw PreconditionError("gradient probe needs at least two paths");

  const std::size_t n = options.n_paths;
  std::vector<double> jac(n), fd(n), diff(n);
  const Vector shifted = u0 + options.eps_fd * xi;
  parallel_for(n, options.workers, [&](std::size_t p) {
    const auto base = simulate_path(model, u0, options.sim, p);
    const TangentPropagator prop(base);
    const Vector j_xi = tangent(prop, 0, base.steps(), xi);
    const Vector u_t = base.final_state();
    jac[p] = phi.gradient(u_t).dot(j_xi);
    const auto bumped = simulate(model, shifted, base.noise, base.scheme, options.sim.blowup_bound);
    fd[p] = (phi(bumped.final_state()) - phi(u_t)) / options.eps_fd;
    diff[p] = jac[p] - fd[p];
  });
  GradientProbeResult r;
  const auto ej = mean_and_se(jac), ef = mean_and_se(fd), ed = mean_and_se(diff);
  r.jacobian_estimate = ej.mean;
  r.jacobian_se = ej.se;
  r.finite_difference_estimate = ef.mean;
  r.finite_difference_se = ef.se;
  r.gap = ej.mean - ef.mean;
  r.se = std::hypot(ej.se, ef.se);
  r.paired_se = ed.se;
  return r;
}

}  // namespace bilinsde
