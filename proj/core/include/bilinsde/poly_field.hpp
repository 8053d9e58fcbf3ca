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
#include <map>
#include <vector>

#include "bilinsde/model.hpp"

namespace bilinsde {

inline constexpr int kDefaultDegreeCap = 4;

// Exponent vector of a monomial U_1^e_1 ... U_N^e_N.
using Monomial = std::vector<std::uint8_t>;

int monomial_degree(const Monomial& m);

// Polynomial vector field R^N -> R^N stored as monomial -> coefficient vector.
//
// The degree-m part is the set of terms whose monomial has total degree m; in
// coefficient form this is the symmetric (m+1)-tensor of that homogeneous part.
// Terms with an exactly zero coefficient vector are never stored, so the zero
// field has no terms.
class PolyVectorField {
public:
  PolyVectorField(int dim, int degree_cap = kDefaultDegreeCap);

  static PolyVectorField constant(const Vector& c, int degree_cap = kDefaultDegreeCap);
  // U -> M U
  static PolyVectorField linear(const Matrix& m, int degree_cap = kDefaultDegreeCap);
  // U -> B(U, U)
  static PolyVectorField quadratic(const BilinearTensor& b, int degree_cap = kDefaultDegreeCap);
  // F(U) = -nu A U - B(U, U)
  static PolyVectorField drift(const BilinearModel& model, int degree_cap = kDefaultDegreeCap);

  int dim() const { return dim_; }
  int degree_cap() const { return degree_cap_; }
  // -1 for the zero field.
  int degree() const;
  bool is_zero() const { return terms_.empty(); }
  const std::map<Monomial, Vector>& terms() const { return terms_; }

  // Adds `coeff` to the term of `monomial`. Throws CapacityError past the cap.
  void add_term(const Monomial& monomial, const Vector& coeff);

  Vector evaluate(const Vector& u) const;
  Matrix jacobian(const Vector& u) const;

  // (grad this)(U) G(U), as a polynomial field.
  PolyVectorField derivative_along(const PolyVectorField& g) const;

  PolyVectorField& operator+=(const PolyVectorField& other);
  PolyVectorField& operator-=(const PolyVectorField& other);
  PolyVectorField& operator*=(double factor);

  friend PolyVectorField operator+(PolyVectorField a, const PolyVectorField& b) { return a += b; }
  friend PolyVectorField operator-(PolyVectorField a, const PolyVectorField& b) { return a -= b; }
  friend PolyVectorField operator*(double s, PolyVectorField a) { return a *= s; }
  PolyVectorField operator-() const { return -1.0 * *this; }

private:
  int dim_;
  int degree_cap_;
  std::map<Monomial, Vector> terms_;
};

// [G, H] = grad H . G - grad G . H. Throws CapacityError when the result's
// degree would exceed the smaller of the two degree caps.
PolyVectorField lie_bracket(const PolyVectorField& g, const PolyVectorField& h);

}  // namespace bilinsde
