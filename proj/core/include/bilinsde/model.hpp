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

#include <array>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace bilinsde {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct TensorEntry {
  int i = 0;
  int j = 0;
  int k = 0;
  double value = 0.0;
};

// Rank-3 tensor B with (B(V,U))_i = sum_{j,k} B[i][j][k] V_j U_k.
//
// Stored densely (N^3 doubles) for N <= kDenseLimit and as a sorted
// coordinate list above that. Both layouts answer the same queries.
class BilinearTensor {
public:
  static constexpr int kDenseLimit = 64;

  enum class Storage { dense, sparse };

  BilinearTensor() = default;
  explicit BilinearTensor(int dim);

  // Duplicate coordinates are summed; exact zeros are dropped.
  static BilinearTensor from_entries(int dim, std::vector<TensorEntry> entries);
  static BilinearTensor from_entries(int dim, std::vector<TensorEntry> entries, Storage storage);

  int dim() const { return dim_; }
  Storage storage() const { return storage_; }
  bool is_zero() const;

  double operator()(int i, int j, int k) const;
  std::vector<TensorEntry> entries() const;

  // B(V, U).
  Vector apply(const Vector& v, const Vector& u) const;
  void apply_into(const Vector& v, const Vector& u, Vector& out) const;

  // Matrix of rho -> B(U, rho) + B(rho, U).
  Matrix linearization(const Vector& u) const;
  // (B(U, .) + B(., U))^T w, without forming the matrix.
  Vector linearization_transpose_apply(const Vector& u, const Vector& w) const;

  // max_{i,j,k} |B[i][j][k] + B[k][j][i]|.
  double cancellation_violation() const;
  // Frobenius norm.
  double norm() const;

  BilinearTensor scaled(double factor) const;

private:
  int dim_ = 0;
  Storage storage_ = Storage::dense;
  std::vector<double> dense_;
  std::vector<TensorEntry> sparse_;
};

// The SDE  dU + (nu A U + B(U,U)) dt = sigma dW  on R^N with d noise channels.
//
// Immutable after construction; shared between workers through
// std::shared_ptr<const BilinearModel>. Construction checks shapes and
// finiteness only. Coercivity, cancellation and forcing are reported by
// validate_model.
class BilinearModel {
public:
  BilinearModel(double nu, Matrix a, BilinearTensor b, Matrix sigma, std::string name = "custom");

  int dim() const { return static_cast<int>(a_.rows()); }
  int noise_dim() const { return static_cast<int>(sigma_.cols()); }
  double nu() const { return nu_; }
  const Matrix& A() const { return a_; }
  const BilinearTensor& B() const { return b_; }
  const Matrix& sigma() const { return sigma_; }
  const std::string& name() const { return name_; }

  // Minimum eigenvalue of the symmetric part of nu A.
  double alpha() const { return alpha_; }
  // |sigma|^2 = sum_k |sigma_k|^2.
  double sigma_norm2() const { return sigma_.squaredNorm(); }
  // nu A, cached.
  const Matrix& viscous_operator() const { return nu_a_; }

private:
  double nu_;
  Matrix a_;
  BilinearTensor b_;
  Matrix sigma_;
  std::string name_;
  Matrix nu_a_;
  double alpha_ = 0.0;
};

using ModelPtr = std::shared_ptr<const BilinearModel>;

struct ValidationReport {
  bool coercivity_ok = false;
  double alpha = 0.0;
  double cancellation_max_violation = 0.0;
  bool cancellation_ok = false;
  bool sigma_ok = false;
  std::vector<std::string> messages;

  bool ok() const { return coercivity_ok && cancellation_ok && sigma_ok; }
};

// Default relative tolerance for the structural checks.
inline constexpr double kValidationTolerance = 1e-10;

// Coercivity passes when alpha > tol * max(1, ||nu A||_2); cancellation passes
// when the worst violation is <= tol * max(1, |B|).
ValidationReport validate_model(const BilinearModel& model, double tol = kValidationTolerance);

// -(nu A U + B(U,U)).
Vector eval_drift(const BilinearModel& model, const Vector& u);

// Three-mode triad: A = I, B(U,U) = (c1 U2 U3, c2 U3 U1, c3 U1 U2) with the
// tensor split so that cancellation holds entry by entry. Sigma
// columns are the unit vectors of `forced_axes` (1-based, in ascending order).
ModelPtr make_triad(const std::array<double, 3>& c, double nu, const std::set<int>& forced_axes);

// A = I, B = 0, sigma = I on R^dim.
ModelPtr make_linear(int dim, double nu);

struct WaveVector {
  int kx = 0;
  int ky = 0;

  auto operator<=>(const WaveVector&) const = default;
};

// Layout of the real Fourier basis used by make_galerkin_nse2d.
//
// Modes are the wave-vectors k with max(|kx|, |ky|) <= cutoff in the half
// plane kx > 0 or (kx == 0, ky > 0), sorted by (|k|^2, kx, ky). Mode m owns
// the two coordinates 2m (cosine) and 2m + 1 (sine), with basis functions
// cos(k.x) / (pi sqrt 2) and sin(k.x) / (pi sqrt 2), which are orthonormal
// in L^2([0, 2 pi]^2).
struct GalerkinBasis {
  int cutoff = 0;
  std::vector<WaveVector> modes;

  int dim() const { return 2 * static_cast<int>(modes.size()); }
  // Index of `k` or of -k in `modes`, or -1 when outside the cutoff.
  int mode_index(WaveVector k) const;
};

GalerkinBasis galerkin_basis(int cutoff);

// Vorticity-form 2D Navier-Stokes on the torus truncated to the box cutoff.
// A = diag(|k|^2), B(V, U) is the projection of u(V) . grad U where u(V) is
// the velocity recovered from the vorticity V. Each forced mode contributes
// both its cosine and sine coordinate as noise directions.
ModelPtr make_galerkin_nse2d(int cutoff, double nu, const std::vector<WaveVector>& forced_modes);

}  // namespace bilinsde
