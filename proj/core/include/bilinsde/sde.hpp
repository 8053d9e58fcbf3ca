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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "bilinsde/model.hpp"
#include "bilinsde/observable.hpp"

namespace bilinsde {

enum class Scheme { explicit_em, semi_implicit };

std::string_view to_string(Scheme scheme);
Scheme parse_scheme(std::string_view text);

inline constexpr double kDefaultBlowupBound = 1e8;

// Brownian increments on a uniform grid, regenerated bit-for-bit from
// (seed, stream_id, steps, dt).
struct NoisePath {
  double dt = 0.0;
  std::int64_t steps = 0;
  Matrix increments;  // steps x d, variance dt per entry
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  static NoisePath generate(int noise_dim, std::int64_t steps, double dt, std::uint64_t seed,
                            std::uint64_t stream_id);
};

// Number of steps for horizon T at step dt (T / dt rounded to the nearest
// integer). Throws PreconditionError unless dt > 0 and T >= dt.
std::int64_t step_count(double T, double dt);

struct SimulationOptions {
  double T = 1.0;
  double dt = 1e-2;
  Scheme scheme = Scheme::semi_implicit;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  double blowup_bound = kDefaultBlowupBound;
};

// One step of a scheme with its linear solve prefactored for (model, dt):
//   explicit_em:    U' = U + dt f(U) + sigma dW
//   semi_implicit:  (I + dt nu A) U' = U - dt B(U,U) + sigma dW
class Stepper {
public:
  Stepper(ModelPtr model, Scheme scheme, double dt);

  const BilinearModel& model() const { return *model_; }
  const ModelPtr& model_ptr() const { return model_; }
  Scheme scheme() const { return scheme_; }
  double dt() const { return dt_; }

  // `forcing` is the already-applied noise term sigma dW.
  void step(const Vector& u, const Vector& forcing, Vector& out) const;

  // (I + dt nu A)^{-1} x; identity for the explicit scheme.
  Vector solve(const Vector& x) const;
  Vector solve_transpose(const Vector& x) const;
  Matrix solve(const Matrix& x) const;

  // dt ||nu A||_2 >= 2 for the explicit scheme.
  bool explicit_unstable() const { return explicit_unstable_; }

private:
  ModelPtr model_;
  Scheme scheme_;
  double dt_;
  Eigen::PartialPivLU<Matrix> implicit_lu_;
  bool explicit_unstable_ = false;
};

// Discrete solution path. states.row(m) is U(t_m), t_m = m dt.
struct Trajectory {
  ModelPtr model;
  Scheme scheme = Scheme::semi_implicit;
  NoisePath noise;
  Matrix states;
  std::vector<std::string> warnings;

  double dt() const { return noise.dt; }
  std::int64_t steps() const { return noise.steps; }
  double T() const { return static_cast<double>(noise.steps) * noise.dt; }
  double time(std::int64_t m) const { return static_cast<double>(m) * noise.dt; }
  Vector state(std::int64_t m) const { return states.row(m).transpose(); }
  Vector final_state() const { return state(steps()); }
};

Trajectory simulate(ModelPtr model, const Vector& u0, const SimulationOptions& options);

// Drives the scheme with a given noise path (common random numbers).
Trajectory simulate(ModelPtr model, const Vector& u0, NoisePath noise, Scheme scheme,
                    double blowup_bound = kDefaultBlowupBound);

// Per-step Ito energy residual
//   r_m = |U_{m+1}|^2 - |U_m|^2 + 2 dt <nu A U_m, U_m> - |sigma|^2 dt - 2 <U_m, sigma dW_m>.
std::vector<double> energy_residual(const Trajectory& traj);

// Per-step 2 dt <B(U_m, U_m), U_m>; identically zero under cancellation.
std::vector<double> energy_nonlinear_term(const Trajectory& traj);

struct ObservableSummary {
  std::string name;
  double mean = 0.0;
  double variance = 0.0;
  double se = 0.0;
  double q05 = 0.0;
  double q50 = 0.0;
  double q95 = 0.0;
};

struct EnsembleStats {
  std::size_t n_paths = 0;
  std::vector<ObservableSummary> observables;  // of U(T)
  Matrix final_states;                          // n_paths x N
};

struct EnsembleOptions {
  SimulationOptions sim;  // stream_id is ignored: path p uses stream p
  std::size_t n_paths = 1;
  unsigned workers = 0;
};

// Rethrows integration failures as IntegrationError tagged with the path.
Trajectory simulate_path(const ModelPtr& model, const Vector& u0, const SimulationOptions& sim,
                         std::uint64_t path);

EnsembleStats ensemble(ModelPtr model, const Vector& u0, const EnsembleOptions& options,
                       const std::vector<Observable>& observables = {observables::energy()});

struct MomentTailOptions {
  SimulationOptions sim;
  std::size_t n_paths = 1000;
  std::vector<double> K_grid;
  double eta = 0.05;
  unsigned workers = 0;
};

struct MomentTailRow {
  double K = 0.0;
  double tail = 0.0;          // P(sup_t S(t) >= K / 2)
  std::size_t exceedances = 0;
  double bound_shape = 0.0;   // exp(intercept + slope K) from the fit
};

// S(t) = |U(t)|^2 + alpha int_0^t |U|^2 ds - |sigma|^2 t
struct MomentTailResult {
  std::vector<MomentTailRow> rows;
  double slope = 0.0;  // fitted d log P / dK, i.e. -gamma_hat
  double intercept = 0.0;
  bool fit_ok = false;
  bool decreasing = false;
  bool log_concave = false;
  std::string diagnostic;
  // E exp(eta (sup_s |U(s)|^2 + alpha int_0^T |U|^2)) against exp(eta (|U0|^2 + |sigma|^2 T))
  double exp_moment = 0.0;
  double exp_moment_se = 0.0;
  double exp_bound = 0.0;
  bool exp_moment_exceeds = false;
  std::size_t n_paths = 0;
};

MomentTailResult moment_tail_probe(ModelPtr model, const Vector& u0, const MomentTailOptions& options);

}  // namespace bilinsde
