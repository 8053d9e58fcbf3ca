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
#include <vector>

#include "bilinsde/observable.hpp"
#include "bilinsde/sde.hpp"
#include "bilinsde/stats.hpp"

namespace bilinsde {

// Empirical time-averaged law: post burn-in states of one or more paths,
// every `thinning`-th grid point, equally weighted.
struct OccupationMeasure {
  Matrix samples;  // rows are states, in time order (path after path)
  std::vector<double> weights;
  double burn_in = 0.0;
  std::int64_t thinning = 1;
  double T_effective = 0.0;  // post burn-in time covered, summed over paths
  std::string source;

  std::size_t size() const { return weights.size(); }
};

inline constexpr std::size_t kMaxStoredSamples = 100000;

// burn_in defaults to 10% of T; thinning defaults to the smallest stride that
// keeps at most kMaxStoredSamples samples.
OccupationMeasure occupation_measure(const Trajectory& traj, std::optional<double> burn_in = std::nullopt,
                                     std::optional<std::int64_t> thinning = std::nullopt);
OccupationMeasure occupation_measure(const std::vector<Trajectory>& paths,
                                     std::optional<double> burn_in = std::nullopt,
                                     std::optional<std::int64_t> thinning = std::nullopt);

// Weighted mean of phi with a batch-means standard error.
MeanEstimate expectation(const OccupationMeasure& mu, const Observable& phi);

// mu(B_R) with a batch-means standard error.
MeanEstimate ball_mass(const OccupationMeasure& mu, double radius);

// 1 - (|sigma|^2 + |U0|^2 / T) / (2 alpha R^2), the energy-estimate lower
// bound on mu_T(B_R) for the occupation measure started at U0.
double ball_mass_lower_bound(const BilinearModel& model, const Vector& u0, double T, double radius);

struct ErgodicAverage {
  std::vector<double> running;  // running[i]: mean of phi over the first i + 1 samples
  double value = 0.0;
  double se = 0.0;  // batch means
};

// Discrete (1/T) int phi(U) dt over grid points after burn_in.
ErgodicAverage ergodic_average(const Trajectory& traj, const Observable& phi, double burn_in = 0.0);

// L phi(U) = -<nu A U + B(U,U), grad phi> + 1/2 tr(sigma sigma^T hess phi).
double generator_apply(const BilinearModel& model, const Observable& phi, const Vector& u);

// Mean of L phi under mu with a batch-means standard error.
MeanEstimate stationarity_residual(const BilinearModel& model, const OccupationMeasure& mu, const Observable& phi);

struct MixingOptions {
  SimulationOptions sim;
  std::size_t n_paths = 1000;
  // Share one noise stream set across all initial states (paired estimator).
  bool common_noise = false;
  unsigned workers = 0;
};

struct MixingResult {
  std::vector<double> means;  // E phi(U(T, U0_i))
  std::vector<double> mean_se;
  Matrix gap;  // |E phi(U(T,U0_i)) - E phi(U(T,U0_j))|
  Matrix gap_se;
};

MixingResult mixing_probe(ModelPtr model, const std::vector<Vector>& u0_list, const Observable& phi,
                          const MixingOptions& options);

// `count` deterministic points in the closed ball of `radius` (Halton based).
std::vector<Vector> ball_grid(int dim, double radius, std::size_t count);

struct IrreducibilityOptions {
  SimulationOptions sim;
  double radius = 1.0;
  double eps = 0.5;
  std::size_t n_paths = 200;
  std::size_t n_init = 20;
  unsigned workers = 0;
};

struct IrreducibilityResult {
  std::vector<Vector> initial_states;
  std::vector<double> hit_probability;  // P_T(U0_i, B_eps)
  double min_probability = 0.0;
  std::vector<std::size_t> zero_hit_cells;
};

IrreducibilityResult irreducibility_probe(ModelPtr model, const IrreducibilityOptions& options);

struct GradientProbeOptions {
  SimulationOptions sim;
  std::size_t n_paths = 1000;
  double eps_fd = 1e-5;
  unsigned workers = 0;
};

struct GradientProbeResult {
  double jacobian_estimate = 0.0;  // mean <grad phi(U_T), J_{0,T} xi>
  double jacobian_se = 0.0;
  double finite_difference_estimate = 0.0;  // mean (phi(U_T^eps) - phi(U_T)) / eps, common noise
  double finite_difference_se = 0.0;
  double gap = 0.0;  // jacobian - finite difference
  double se = 0.0;   // sqrt(jacobian_se^2 + finite_difference_se^2)
  double paired_se = 0.0;  // standard error of the per-path difference
};

GradientProbeResult gradient_probe(ModelPtr model, const Vector& u0, const Observable& phi, const Vector& xi,
                                   const GradientProbeOptions& options);

}  // namespace bilinsde
