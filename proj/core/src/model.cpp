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

#include "bilinsde/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "bilinsde/error.hpp"

namespace bilinsde {

namespace {

bool all_finite(const Matrix& m) { return m.allFinite(); }

std::size_t flat(int n, int i, int j, int k) {
  return (static_cast<std::size_t>(i) * n + j) * n + k;
}

}  // namespace

// ---------------------------------------------------------------------------
// BilinearTensor

BilinearTensor::BilinearTensor(int dim) : dim_(dim) {
  if (dim < 0) throw StructuralError("tensor dimension must be non-negative");
  storage_ = dim <= kDenseLimit ? Storage::dense : Storage::sparse;
  if (storage_ == Storage::dense) dense_.assign(static_cast<std::size_t>(dim) * dim * dim, 0.0);
}

BilinearTensor BilinearTensor::from_entries(int dim, std::vector<TensorEntry> entries) {
  return from_entries(dim, std::move(entries), dim <= kDenseLimit ? Storage::dense : Storage::sparse);
}

BilinearTensor BilinearTensor::from_entries(int dim, std::vector<TensorEntry> entries,
                                            Storage storage) {
  BilinearTensor t(dim);
  t.storage_ = storage;
  for (const auto& e : entries) {
    if (e.i < 0 || e.j < 0 || e.k < 0 || e.i >= dim || e.j >= dim || e.k >= dim) {
      std::ostringstream os;
      os << "tensor entry (" << e.i << "," << e.j << "," << e.k << ") outside dimension " << dim;
      throw StructuralError(os.str());
    }
    if (!std::isfinite(e.value)) throw DataError("tensor entry is not finite");
  }
  if (storage == Storage::dense) {
    t.dense_.assign(static_cast<std::size_t>(dim) * dim * dim, 0.0);
    for (const auto& e : entries) t.dense_[flat(dim, e.i, e.j, e.k)] += e.value;
    return t;
  }
  t.dense_.clear();
  std::sort(entries.begin(), entries.end(), [](const TensorEntry& a, const TensorEntry& b) {
    return std::tie(a.i, a.j, a.k) < std::tie(b.i, b.j, b.k);
  });
  for (const auto& e : entries) {
    if (!t.sparse_.empty() && t.sparse_.back().i == e.i && t.sparse_.back().j == e.j &&
        t.sparse_.back().k == e.k) {
      t.sparse_.back().value += e.value;
    } else {
      t.sparse_.push_back(e);
    }
  }
  std::erase_if(t.sparse_, [](const TensorEntry& e) { return e.value == 0.0; });
  return t;
}

bool BilinearTensor::is_zero() const {
  if (storage_ == Storage::dense)
    return std::all_of(dense_.begin(), dense_.end(), [](double v) { return v == 0.0; });
  return sparse_.empty();
}

double BilinearTensor::operator()(int i, int j, int k) const {
  if (storage_ == Storage::dense) return dense_[flat(dim_, i, j, k)];
  auto it = std::lower_bound(sparse_.begin(), sparse_.end(), TensorEntry{i, j, k, 0.0},
                             [](const TensorEntry& a, const TensorEntry& b) {
                               return std::tie(a.i, a.j, a.k) < std::tie(b.i, b.j, b.k);
                             });
  if (it != sparse_.end() && it->i == i && it->j == j && it->k == k) return it->value;
  return 0.0;
}

std::vector<TensorEntry> BilinearTensor::entries() const {
  if (storage_ == Storage::sparse) return sparse_;
  std::vector<TensorEntry> out;
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j)
      for (int k = 0; k < dim_; ++k) {
        const double v = dense_[flat(dim_, i, j, k)];
        if (v != 0.0) out.push_back({i, j, k, v});
      }
  return out;
}

Vector BilinearTensor::apply(const Vector& v, const Vector& u) const {
  Vector out(dim_);
  apply_into(v, u, out);
  return out;
}

void BilinearTensor::apply_into(const Vector& v, const Vector& u, Vector& out) const {
  out.setZero(dim_);
  if (storage_ == Storage::dense) {
    const double* b = dense_.data();
    for (int i = 0; i < dim_; ++i) {
      double acc = 0.0;
      for (int j = 0; j < dim_; ++j) {
        const double vj = v[j];
        if (vj == 0.0) {
          b += dim_;
          continue;
        }
        double inner = 0.0;
        for (int k = 0; k < dim_; ++k) inner += b[k] * u[k];
        acc += vj * inner;
        b += dim_;
      }
      out[i] = acc;
    }
    return;
  }
  for (const auto& e : sparse_) out[e.i] += e.value * v[e.j] * u[e.k];
}

Matrix BilinearTensor::linearization(const Vector& u) const {
  Matrix lin = Matrix::Zero(dim_, dim_);
  if (storage_ == Storage::dense) {
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        for (int k = 0; k < dim_; ++k) {
          const double b = dense_[flat(dim_, i, j, k)];
          if (b == 0.0) continue;
          lin(i, k) += b * u[j];
          lin(i, j) += b * u[k];
        }
    return lin;
  }
  for (const auto& e : sparse_) {
    lin(e.i, e.k) += e.value * u[e.j];
    lin(e.i, e.j) += e.value * u[e.k];
  }
  return lin;
}

Vector BilinearTensor::linearization_transpose_apply(const Vector& u, const Vector& w) const {
  Vector out = Vector::Zero(dim_);
  auto visit = [&](int i, int j, int k, double b) {
    out[k] += b * u[j] * w[i];
    out[j] += b * u[k] * w[i];
  };
  if (storage_ == Storage::dense) {
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        for (int k = 0; k < dim_; ++k) {
          const double b = dense_[flat(dim_, i, j, k)];
          if (b != 0.0) visit(i, j, k, b);
        }
  } else {
    for (const auto& e : sparse_) visit(e.i, e.j, e.k, e.value);
  }
  return out;
}

double BilinearTensor::cancellation_violation() const {
  double worst = 0.0;
  if (storage_ == Storage::dense) {
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        for (int k = 0; k < dim_; ++k)
          worst = std::max(worst, std::abs(dense_[flat(dim_, i, j, k)] + dense_[flat(dim_, k, j, i)]));
    return worst;
  }
  for (const auto& e : sparse_) worst = std::max(worst, std::abs(e.value + (*this)(e.k, e.j, e.i)));
  return worst;
}

double BilinearTensor::norm() const {
  double s = 0.0;
  if (storage_ == Storage::dense) {
    for (double v : dense_) s += v * v;
  } else {
    for (const auto& e : sparse_) s += e.value * e.value;
  }
  return std::sqrt(s);
}

BilinearTensor BilinearTensor::scaled(double factor) const {
  BilinearTensor out = *this;
  for (double& v : out.dense_) v *= factor;
  for (auto& e : out.sparse_) e.value *= factor;
  if (factor == 0.0) std::erase_if(out.sparse_, [](const TensorEntry&) { return true; });
  return out;
}

// ---------------------------------------------------------------------------
// BilinearModel

BilinearModel::BilinearModel(double nu, Matrix a, BilinearTensor b, Matrix sigma, std::string name)
    : nu_(nu), a_(std::move(a)), b_(std::move(b)), sigma_(std::move(sigma)), name_(std::move(name)) {
  const auto n = a_.rows();
  if (n == 0) throw StructuralError("model dimension must be positive");
  if (a_.cols() != n) throw StructuralError("A must be square");
  if (b_.dim() != n) throw StructuralError("B dimension does not match A");
  if (sigma_.rows() != n) throw StructuralError("sigma must have N rows");
  if (sigma_.cols() == 0) throw StructuralError("noise dimension must be positive");
  if (!std::isfinite(nu_) || nu_ <= 0.0) throw DataError("nu must be finite and positive");
  if (!all_finite(a_)) throw DataError("A has non-finite entries");
  if (!all_finite(sigma_)) throw DataError("sigma has non-finite entries");
  nu_a_ = nu_ * a_;
  const Matrix sym = 0.5 * (nu_a_ + nu_a_.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  alpha_ = eig.eigenvalues()(0);
}

ValidationReport validate_model(const BilinearModel& model, double tol) {
  ValidationReport r;
  r.alpha = model.alpha();
  const Matrix sym = 0.5 * (model.viscous_operator() + model.viscous_operator().transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  r.coercivity_ok = r.alpha > tol * scale;
  if (!r.coercivity_ok) {
    std::ostringstream os;
    os << "coercivity fails: min eigenvalue of sym(nu A) is " << r.alpha;
    r.messages.push_back(os.str());
  }

  r.cancellation_max_violation = model.B().cancellation_violation();
  r.cancellation_ok = r.cancellation_max_violation <= tol * std::max(1.0, model.B().norm());
  if (!r.cancellation_ok) {
    std::ostringstream os;
    os << "cancellation fails: max |B[i][j][k] + B[k][j][i]| = " << r.cancellation_max_violation;
    r.messages.push_back(os.str());
  }

  const auto& sigma = model.sigma();
  bool any_nonzero = false;
  for (Eigen::Index c = 0; c < sigma.cols(); ++c) any_nonzero |= sigma.col(c).squaredNorm() > 0.0;
  r.sigma_ok = sigma.allFinite() && any_nonzero;
  if (!r.sigma_ok) r.messages.push_back("sigma has no nonzero column");
  return r;
}

Vector eval_drift(const BilinearModel& model, const Vector& u) {
  if (u.size() != model.dim()) throw StructuralError("state dimension mismatch in eval_drift");
  return -(model.viscous_operator() * u + model.B().apply(u, u));
}

// ---------------------------------------------------------------------------
// Generators

ModelPtr make_triad(const std::array<double, 3>& c, double nu, const std::set<int>& forced_axes) {
  const double sum = c[0] + c[1] + c[2];
  const double scale = std::max({1.0, std::abs(c[0]), std::abs(c[1]), std::abs(c[2])});
  if (std::abs(sum) > 1e-12 * scale)
    throw PreconditionError("triad coefficients must sum to zero (c1 + c2 + c3 = " +
                            std::to_string(sum) + ")");
  if (forced_axes.empty()) throw PreconditionError("triad needs at least one forced axis");
  for (int axis : forced_axes)
    if (axis < 1 || axis > 3) throw PreconditionError("triad forced axes must be in {1,2,3}");

  // B(U,U) = (c1 U2 U3, c2 U3 U1, c3 U1 U2). The literal split
  // B(U,V)_1 = c1 U2 V3 etc. only cancels on the diagonal V = U, so each c_i is
  // shared between the (i, i+1, i+2) and (i, i+2, i+1) slots: x_i + y_i = c_i
  // with y_i = -x_{i+1}, which makes B[i][j][k] = -B[k][j][i] entry by entry.
  // The free constant is fixed by x_0 + x_1 + x_2 = 0.
  std::array<double, 3> x{};
  x[0] = (2.0 * c[0] + c[1]) / 3.0;
  x[1] = x[0] - c[0];
  x[2] = x[1] - c[1];
  std::vector<TensorEntry> entries;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    entries.push_back({i, j, k, x[static_cast<std::size_t>(i)]});
    entries.push_back({i, k, j, -x[static_cast<std::size_t>(j)]});
  }
  auto b = BilinearTensor::from_entries(3, std::move(entries));

  Matrix sigma = Matrix::Zero(3, static_cast<Eigen::Index>(forced_axes.size()));
  int col = 0;
  for (int axis : forced_axes) sigma(axis - 1, col++) = 1.0;
  return std::make_shared<const BilinearModel>(nu, Matrix::Identity(3, 3), std::move(b), std::move(sigma),
                                               "triad");
}

ModelPtr make_linear(int dim, double nu) {
  if (dim < 1) throw PreconditionError("linear model dimension must be positive");
  return std::make_shared<const BilinearModel>(nu, Matrix::Identity(dim, dim), BilinearTensor(dim),
                                               Matrix::Identity(dim, dim), "linear");
}

int GalerkinBasis::mode_index(WaveVector k) const {
  for (std::size_t m = 0; m < modes.size(); ++m) {
    if (modes[m] == k) return static_cast<int>(m);
    if (modes[m].kx == -k.kx && modes[m].ky == -k.ky) return static_cast<int>(m);
  }
  return -1;
}

GalerkinBasis galerkin_basis(int cutoff) {
  if (cutoff < 1) throw PreconditionError("Galerkin cutoff must be >= 1");
  GalerkinBasis basis;
  basis.cutoff = cutoff;
  for (int kx = 0; kx <= cutoff; ++kx)
    for (int ky = -cutoff; ky <= cutoff; ++ky)
      if (kx > 0 || ky > 0) basis.modes.push_back({kx, ky});
  std::sort(basis.modes.begin(), basis.modes.end(), [](const WaveVector& a, const WaveVector& b) {
    const int na = a.kx * a.kx + a.ky * a.ky;
    const int nb = b.kx * b.kx + b.ky * b.ky;
    return std::tie(na, a.kx, a.ky) < std::tie(nb, b.kx, b.ky);
  });
  return basis;
}

ModelPtr make_galerkin_nse2d(int cutoff, double nu, const std::vector<WaveVector>& forced_modes) {
  const GalerkinBasis basis = galerkin_basis(cutoff);
  if (forced_modes.empty()) throw PreconditionError("at least one forced mode is required");
  std::vector<int> forced_index;
  for (const auto& k : forced_modes) {
    const int m = basis.mode_index(k);
    if (m < 0 || (k.kx == 0 && k.ky == 0)) {
      std::ostringstream os;
      os << "forced mode (" << k.kx << "," << k.ky << ") lies outside cutoff " << cutoff;
      throw PreconditionError(os.str());
    }
    if (std::find(forced_index.begin(), forced_index.end(), m) == forced_index.end())
      forced_index.push_back(m);
  }

  const int n = basis.dim();
  const int n_modes = static_cast<int>(basis.modes.size());

  // Basis values, velocities and gradients on a uniform periodic grid. The
  // integrands are trigonometric polynomials of degree <= 3 * cutoff per axis,
  // for which the periodic trapezoidal rule with more points is exact.
  const int grid = 4 * cutoff + 4;
  const int points = grid * grid;
  const double h = 2.0 * std::numbers::pi / grid;
  const double norm = 1.0 / (std::numbers::pi * std::sqrt(2.0));

  Matrix phi(n, points), gx(n, points), gy(n, points), ux(n, points), uy(n, points);
  for (int m = 0; m < n_modes; ++m) {
    const auto [kx, ky] = basis.modes[m];
    const double k2 = kx * kx + ky * ky;
    for (int a = 0; a < grid; ++a)
      for (int b = 0; b < grid; ++b) {
        const int p = a * grid + b;
        const double arg = kx * (a * h) + ky * (b * h);
        const double c = std::cos(arg) * norm;
        const double s = std::sin(arg) * norm;
        // cosine coordinate
        phi(2 * m, p) = c;
        gx(2 * m, p) = -kx * s;
        gy(2 * m, p) = -ky * s;
        // sine coordinate
        phi(2 * m + 1, p) = s;
        gx(2 * m + 1, p) = kx * c;
        gy(2 * m + 1, p) = ky * c;
      }
    // stream function psi = -phi / |k|^2, velocity u = (-d_y psi, d_x psi)
    for (int r : {2 * m, 2 * m + 1}) {
      ux.row(r) = gy.row(r) / k2;
      uy.row(r) = -gx.row(r) / k2;
    }
  }

  const double weight = h * h;
  std::vector<TensorEntry> entries;
  Matrix advect(n, points);
  double largest = 0.0;
  std::vector<TensorEntry> raw;
  for (int j = 0; j < n; ++j) {
    // advect(k, p) = u(phi_j) . grad phi_k at p
    for (int k = 0; k < n; ++k)
      advect.row(k) = ux.row(j).cwiseProduct(gx.row(k)) + uy.row(j).cwiseProduct(gy.row(k));
    const Matrix block = weight * (phi * advect.transpose());  // block(i, k)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        largest = std::max(largest, std::abs(block(i, k)));
        raw.push_back({i, j, k, block(i, k)});
      }
  }
  // Quadrature of an identically zero coefficient leaves round-off only.
  const double floor = 1e-13 * std::max(largest, 1.0);
  for (const auto& e : raw)
    if (std::abs(e.value) > floor) entries.push_back(e);
  auto b = BilinearTensor::from_entries(n, std::move(entries), BilinearTensor::Storage::sparse);

  Matrix a = Matrix::Zero(n, n);
  for (int m = 0; m < n_modes; ++m) {
    const double k2 = basis.modes[m].kx * basis.modes[m].kx + basis.modes[m].ky * basis.modes[m].ky;
    a(2 * m, 2 * m) = k2;
    a(2 * m + 1, 2 * m + 1) = k2;
  }
  Matrix sigma = Matrix::Zero(n, 2 * static_cast<Eigen::Index>(forced_index.size()));
  for (std::size_t f = 0; f < forced_index.size(); ++f) {
    sigma(2 * forced_index[f], 2 * f) = 1.0;
    sigma(2 * forced_index[f] + 1, 2 * f + 1) = 1.0;
  }

  auto model = std::make_shared<const BilinearModel>(nu, std::move(a), std::move(b), std::move(sigma),
                                                     "galerkin_nse2d");
  const auto report = validate_model(*model, 1e-12);
  if (!report.ok()) throw DataError("Galerkin generator produced an invalid model: " +
                                    (report.messages.empty() ? std::string("?") : report.messages.front()));
  return model;
}

}  // namespace bilinsde
