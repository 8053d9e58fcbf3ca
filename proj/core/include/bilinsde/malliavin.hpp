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
#include <vector>

#include "bilinsde/sde.hpp"
#include "bilinsde/variational.hpp"

namespace bilinsde {

// M_{0,T} = sum_m w_m (J_{t_m,T} sigma)(J_{t_m,T} sigma)^T, trapezoidal w_m.
//
// Only the lower triangle is accumulated and then mirrored, so the matrix is
// exactly symmetric.
class MalliavinMatrix {
public:
  MalliavinMatrix(Matrix matrix, double horizon, double dt);

  const Matrix& matrix() const { return matrix_; }
  double horizon() const { return horizon_; }
  double dt() const { return dt_; }
  const char* quadrature() const { return "trapezoidal"; }

  // Ascending eigenvalues; computed once.
  const Vector& spectrum() const;
  const Matrix& eigenvectors() const;
  double lambda_min() const { return spectrum()(0); }
  double lambda_max() const { return spectrum()(spectrum().size() - 1); }
  // lambda_max / lambda_min, +inf when lambda_min <= 0.
  double condition_number() const;

private:
  void decompose() const;

  Matrix matrix_;
  double horizon_;
  double dt_;
  mutable std::optional<Vector> spectrum_;
  mutable Matrix eigenvectors_;
};

MalliavinMatrix assemble_malliavin(const Trajectory& traj);
MalliavinMatrix assemble_malliavin(const Trajectory& traj, const TangentPropagator& prop);

// Ascending eigenvalues of M.
Vector spectrum(const MalliavinMatrix& m);

// sum_m w_m |sigma^T J*_{t_m,T} eta|^2, evaluated by an adjoint sweep; equals
// <M eta, eta>.
double gram_quadratic_form(const Trajectory& traj, const TangentPropagator& prop, const Vector& eta);

struct SpectralTailOptions {
  SimulationOptions sim;
  std::size_t n_paths = 100;
  std::vector<double> eps_grid;
  unsigned workers = 0;
};

struct PathSpectrum {
  std::size_t path = 0;
  bool ok = false;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double condition = 0.0;
  // max |M - M^T| / ||M|| and lambda_min / lambda_max, for the PSD checks
  double asymmetry = 0.0;
};

struct SpectralTailRow {
  double eps = 0.0;
  double probability = 0.0;  // P(lambda_min >= eps)
};

struct SpectralTailResult {
  std::vector<PathSpectrum> paths;
  std::vector<SpectralTailRow> rows;  // eps ascending
  std::size_t failed_paths = 0;
  // slope of log(1 - P) against log eps over rows with 0 < 1 - P < 1
  double tail_exponent = 0.0;
  bool fit_ok = false;
};

SpectralTailResult spectral_tail(ModelPtr model, const Vector& u0, const SpectralTailOptions& options);

// Discrete control v_m = sigma^T J*_{t_m,T} (M + beta I)^{-1} J_{0,T} xi on
// the M + 1 grid nodes.
struct ControlPath {
  Matrix values;  // (M+1) x d
  Vector xi;
  double beta = 0.0;
  double dt = 0.0;
};

// Invertibility threshold for beta == 0: lambda_min > kSingularRatio * lambda_max.
inline constexpr double kSingularRatio = 1e-10;

ControlPath build_control(const Trajectory& traj, const Vector& xi, double beta = 0.0);
ControlPath build_control(const Trajectory& traj, const TangentPropagator& prop, const MalliavinMatrix& m,
                          const Vector& xi, double beta = 0.0);

// |J_{0,T} xi - A v| / |xi|: the terminal value of the controlled linearisation
// started from xi.
double verify_control(const Trajectory& traj, const Vector& xi, const ControlPath& v);
double verify_control(const Trajectory& traj, const TangentPropagator& prop, const Vector& xi,
                      const ControlPath& v);

// beta ||M^{-1}|| |J_{0,T} xi| / |xi|, the Tikhonov residual bound.
double control_residual_bound(const MalliavinMatrix& m, const Vector& j_xi, const Vector& xi, double beta);

// sum_m w_m |v_m|^2 (same trapezoidal rule as the matrix).
double control_cost(const ControlPath& v);

}  // namespace bilinsde
