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

#include "bilinsde/poly_field.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bilinsde/error.hpp"

namespace bilinsde {

int monomial_degree(const Monomial& m) { return std::accumulate(m.begin(), m.end(), 0); }

namespace {

double monomial_value(const Monomial& m, const Vector& u) {
  double v = 1.0;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (int p = 0; p < m[i]; ++p) v *= u[static_cast<Eigen::Index>(i)];
  return v;
}

}  // namespace

PolyVectorField::PolyVectorField(int dim, int degree_cap) : dim_(dim), degree_cap_(degree_cap) {
  if (dim < 1) throw StructuralError("vector field dimension must be positive");
  if (degree_cap < 0 || degree_cap > 255) throw PreconditionError("degree cap must be in [0, 255]");
}

PolyVectorField PolyVectorField::constant(const Vector& c, int degree_cap) {
  PolyVectorField f(static_cast<int>(c.size()), degree_cap);
  f.add_term(Monomial(c.size(), 0), c);
  return f;
}

PolyVectorField PolyVectorField::linear(const Matrix& m, int degree_cap) {
  const int n = static_cast<int>(m.rows());
  PolyVectorField f(n, degree_cap);
  for (int k = 0; k < n; ++k) {
    Monomial mono(n, 0);
    mono[k] = 1;
    f.add_term(mono, m.col(k));
  }
  return f;
}

PolyVectorField PolyVectorField::quadratic(const BilinearTensor& b, int degree_cap) {
  const int n = b.dim();
  PolyVectorField f(n, degree_cap);
  for (const auto& e : b.entries()) {
    Monomial mono(n, 0);
    mono[e.j] += 1;
    mono[e.k] += 1;
    Vector c = Vector::Zero(n);
    c[e.i] = e.value;
    f.add_term(mono, c);
  }
  return f;
}

PolyVectorField PolyVectorField::drift(const BilinearModel& model, int degree_cap) {
  PolyVectorField f = linear(-model.viscous_operator(), degree_cap);
  f -= quadratic(model.B(), degree_cap);
  return f;
}

int PolyVectorField::degree() const {
  int deg = -1;
  for (const auto& [mono, coeff] : terms_) deg = std::max(deg, monomial_degree(mono));
  return deg;
}

void PolyVectorField::add_term(const Monomial& monomial, const Vector& coeff) {
  if (static_cast<int>(monomial.size()) != dim_ || coeff.size() != dim_)
    throw StructuralError("polynomial term dimension mismatch");
  if (coeff.isZero(0.0)) return;
  const int deg = monomial_degree(monomial);
  if (deg > degree_cap_) {
    std::ostringstream os;
    os << "polynomial degree " << deg << " exceeds degree cap " << degree_cap_;
    throw CapacityError(os.str());
  }
  auto [it, inserted] = terms_.try_emplace(monomial, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second.isZero(0.0)) terms_.erase(it);
  }
}

Vector PolyVectorField::evaluate(const Vector& u) const {
  if (u.size() != dim_) throw StructuralError("evaluation point dimension mismatch");
  Vector out = Vector::Zero(dim_);
  for (const auto& [mono, coeff] : terms_) out += monomial_value(mono, u) * coeff;
  return out;
}

Matrix PolyVectorField::jacobian(const Vector& u) const {
  if (u.size() != dim_) throw StructuralError("evaluation point dimension mismatch");
  Matrix jac = Matrix::Zero(dim_, dim_);
  for (const auto& [mono, coeff] : terms_) {
    for (int j = 0; j < dim_; ++j) {
      if (mono[j] == 0) continue;
      Monomial lowered = mono;
      lowered[j] -= 1;
      jac.col(j) += (mono[j] * monomial_value(lowered, u)) * coeff;
    }
  }
  return jac;
}

PolyVectorField PolyVectorField::derivative_along(const PolyVectorField& g) const {
  if (g.dim_ != dim_) throw StructuralError("vector field dimension mismatch");
  PolyVectorField out(dim_, std::min(degree_cap_, g.degree_cap_));
  // sum_j G_j d_j H, with G_j = sum_a g_a[j] U^a and d_j U^b = b_j U^(b - e_j).
  for (const auto& [mono_h, coeff_h] : terms_) {
    for (int j = 0; j < dim_; ++j) {
      if (mono_h[j] == 0) continue;
      for (const auto& [mono_g, coeff_g] : g.terms_) {
        const double gj = coeff_g[j];
        if (gj == 0.0) continue;
        Monomial mono(dim_);
        for (int i = 0; i < dim_; ++i) mono[i] = static_cast<std::uint8_t>(mono_h[i] + mono_g[i]);
        mono[j] -= 1;
        out.add_term(mono, (gj * mono_h[j]) * coeff_h);
      }
    }
  }
  return out;
}

PolyVectorField& PolyVectorField::operator+=(const PolyVectorField& other) {
  if (other.dim_ != dim_) throw StructuralError("vector field dimension mismatch");
  for (const auto& [mono, coeff] : other.terms_) add_term(mono, coeff);
  return *this;
}

PolyVectorField& PolyVectorField::operator-=(const PolyVectorField& other) {
  if (other.dim_ != dim_) throw StructuralError("vector field dimension mismatch");
  for (const auto& [mono, coeff] : other.terms_) add_term(mono, -coeff);
  return *this;
}

PolyVectorField& PolyVectorField::operator*=(double factor) {
  if (factor == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [mono, coeff] : terms_) coeff *= factor;
  return *this;
}

PolyVectorField lie_bracket(const PolyVectorField& g, const PolyVectorField& h) {
  if (g.dim() != h.dim()) throw StructuralError("vector field dimension mismatch");
  const int cap = std::min(g.degree_cap(), h.degree_cap());
  if (!g.is_zero() && !h.is_zero()) {
    const int deg = g.degree() + h.degree() - 1;
    if (deg > cap) {
      std::ostringstream os;
      os << "bracket of degree-" << g.degree() << " and degree-" << h.degree()
         << " fields has degree " << deg << " above cap " << cap;
      throw CapacityError(os.str());
    }
  }
  PolyVectorField out = h.derivative_along(g);
  out -= g.derivative_along(h);
  return out;
}

}  // namespace bilinsde
