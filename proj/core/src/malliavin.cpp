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

#include "bilinsde/malliavin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "bilinsde/error.hpp"
#include "bilinsde/parallel.hpp"
#include "bilinsde/stats.hpp"

namespace bilinsde {

MalliavinMatrix::MalliavinMatrix(Matrix matrix, double horizon, double dt)
    : matrix_(std::move(matrix)), horizon_(horizon), dt_(dt) {
  if (matrix_.rows() != matrix_.cols()) throw StructuralError("Malliavin matrix must be square");
}

void MalliavinMatrix::decompose() const {
  if (spectrum_) return;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(matrix_);
  if (eig.info() != Eigen::Success) throw NumericalError("symmetric eigen-solve of the Malliavin matrix failed");
  spectrum_ = eig.eigenvalues();
  eigenvectors_ = eig.eigenvectors();
}

const Vector& MalliavinMatrix::spectrum() const {
  decompose();
  return *spectrum_;
}

const Matrix& MalliavinMatrix::eigenvectors() const {
  decompose();
  return eigenvectors_;
}

double MalliavinMatrix::condition_number() const {
  const double lo = lambda_min();
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return lambda_max() / lo;
}

MalliavinMatrix assemble_malliavin(const Trajectory& traj) {
  const TangentPropagator prop(traj);
  return assemble_malliavin(traj, prop);
}

MalliavinMatrix assemble_malliavin(const Trajectory& traj, const TangentPropagator& prop) {
  const int n = traj.model->dim();
  const Matrix& sigma = traj.model->sigma();
  const auto w = quadrature_weights(traj);
  const Eigen::Index d = sigma.cols();

  // One backward adjoint sweep: Q_m = J*_{t_m,T} = P_m^T Q_{m+1}, Q_M = I.
  Matrix q = Matrix::Identity(n, n);
  Matrix lower = Matrix::Zero(n, n);
  auto accumulate = [&](std::int64_t m) {
    const Matrix g = sigma.transpose() * q;  // d x N, rows sigma_k^T J*
    const double wm = w[static_cast<std::size_t>(m)];
    for (int j = 0; j < n; ++j)
      for (int i = j; i < n; ++i) {
        double s = 0.0;
        for (Eigen::Index k = 0; k < d; ++k) s += g(k, i) * g(k, j);
        lower(i, j) += wm * s;
      }
  };
  accumulate(traj.steps());
  for (std::int64_t m = traj.steps() - 1; m >= 0; --m) {
    q = prop.apply_transpose(m, q);
    accumulate(m);
  }
  Matrix full = lower;
  for (int j = 0; j < n; ++j)
    for (int i = j + 1; i < n; ++i) full(j, i) = lower(i, j);
  return MalliavinMatrix(std::move(full), traj.T(), traj.dt());
}

Vector spectrum(const MalliavinMatrix& m) { return m.spectrum(); }

double gram_quadratic_form(const Trajectory& traj, const TangentPropagator& prop, const Vector& eta) {
  const Matrix& sigma = traj.model->sigma();
  const auto w = quadrature_weights(traj);
  Vector q = eta;
  double total = w.back() * (sigma.transpose() * q).squaredNorm();
  for (std::int64_t m = traj.steps() - 1; m >= 0; --m) {
    q = prop.apply_transpose(m, q);
    total += w[static_cast<std::size_t>(m)] * (sigma.transpose() * q).squaredNorm();
  }
  return total;
}

SpectralTailResult spectral_tail(ModelPtr model, const Vector& u0, const SpectralTailOptions& options) {
  if (options.n_paths < 1) throw PreconditionError("spectral tail needs at least one path");
  SpectralTailResult result;
  result.paths.resize(options.n_paths);
  parallel_for(options.n_paths, options.workers, [&](std::size_t p) {
    PathSpectrum& ps = result.paths[p];
    ps.path = p;
    try {
      const auto traj = simulate_path(model, u0, options.sim, p);
      const auto m = assemble_malliavin(traj);
      ps.lambda_min = m.lambda_min();
      ps.lambda_max = m.lambda_max();
      ps.condition = m.condition_number();
      const double scale = std::max(m.matrix().norm(), std::numeric_limits<double>::min());
      ps.asymmetry = (m.matrix() - m.matrix().transpose()).cwiseAbs().maxCoeff() / scale;
      ps.ok = true;
    } catch (const IntegrationError&) {
      ps.ok = false;
    }
  });

  std::vector<double> lmins;
  for (const auto& ps : result.paths) {
    if (ps.ok)
      lmins.push_back(ps.lambda_min);
    else
      ++result.failed_paths;
  }
  std::vector<double> eps = options.eps_grid;
  std::sort(eps.begin(), eps.end());
  std::vector<double> fx, fy;
  for (double e : eps) {
    SpectralTailRow row;
    row.eps = e;
    if (!lmins.empty()) {
      const auto hits = std::count_if(lmins.begin(), lmins.end(), [e](double l) { return l >= e; });
      row.probability = static_cast<double>(hits) / static_cast<double>(lmins.size());
    }
    const double miss = 1.0 - row.probability;
    if (e > 0.0 && miss > 0.0 && miss < 1.0) {
      fx.push_back(std::log(e));
      fy.push_back(std::log(miss));
    }
    result.rows.push_back(row);
  }
  if (fx.size() >= 2) {
    result.tail_exponent = fit_line(fx, fy).slope;
    result.fit_ok = true;
  }
  return result;
}

ControlPath build_control(const Trajectory& traj, const Vector& xi, double beta) {
  const TangentPropagator prop(traj);
  const auto m = assemble_malliavin(traj, prop);
  return build_control(traj, prop, m, xi, beta);
}

ControlPath build_control(const Trajectory& traj, const TangentPropagator& prop, const MalliavinMatrix& m,
                          const Vector& xi, double beta) {
  const int n = traj.model->dim();
  if (xi.size() != n) throw StructuralError("control target dimension mismatch");
  if (!(beta >= 0.0)) throw PreconditionError("beta must be non-negative");
  const Vector& lambda = m.spectrum();
  const double lmin = lambda(0), lmax = lambda(n - 1);
  if (beta == 0.0 && !(lmin > kSingularRatio * lmax)) {
    std::ostringstream os;
    os << "Malliavin matrix is numerically singular (lambda_min = " << lmin << ", lambda_max = " << lmax
       << "); retry with beta = " << 1e-8 * lmax;
    throw SingularityError(lmin, lmax, os.str());
  }

  const Vector j_xi = tangent(prop, 0, traj.steps(), xi);
  const Matrix& v = m.eigenvectors();
  const Vector coeffs = (v.transpose() * j_xi).array() / (lambda.array() + beta);
  Vector q = v * coeffs;  // (M + beta I)^{-1} J xi

  const Matrix& sigma = traj.model->sigma();
  ControlPath out;
  out.xi = xi;
  out.beta = beta;
  out.dt = traj.dt();
  out.values.resize(traj.steps() + 1, sigma.cols());
  out.values.row(traj.steps()) = (sigma.transpose() * q).transpose();
  for (std::int64_t step = traj.steps() - 1; step >= 0; --step) {
    q = prop.apply_transpose(step, q);
    out.values.row(step) = (sigma.transpose() * q).transpose();
  }
  return out;
}

double verify_control(const Trajectory& traj, const Vector& xi, const ControlPath& v) {
  const TangentPropagator prop(traj);
  return verify_control(traj, prop, xi, v);
}

double verify_control(const Trajectory& traj, const TangentPropagator& prop, const Vector& xi,
                      const ControlPath& v) {
  if (xi.size() != traj.model->dim()) throw StructuralError("control target dimension mismatch");
  const double scale = xi.norm();
  if (scale == 0.0) throw PreconditionError("verify_control needs a nonzero xi");
  // rho' + nu A rho + gradB(U) rho = -sigma v, rho(0) = xi, on the same grid
  const Vector terminal = tangent(prop, 0, traj.steps(), xi) - controlled_response(traj, prop, v.values);
  return terminal.norm() / scale;
}

double control_residual_bound(const MalliavinMatrix& m, const Vector& j_xi, const Vector& xi, double beta) {
  const double lmin = m.lambda_min();
  if (beta == 0.0) return 0.0;
  if (lmin <= 0.0) return std::numeric_limits<double>::infinity();
  return beta / lmin * j_xi.norm() / xi.norm();
}

double control_cost(const ControlPath& v) {
  const Eigen::Index rows = v.values.rows();
  if (rows == 0) return 0.0;
  double total = 0.0;
  for (Eigen::Index m = 0; m < rows; ++m) {
    const double w = (m == 0 || m == rows - 1) ? 0.5 * v.dt : v.dt;
    total += w * v.values.row(m).squaredNorm();
  }
  return total;
}

}  // namespace bilinsde
