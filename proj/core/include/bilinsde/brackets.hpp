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

#include <optional>
#include <vector>

#include "bilinsde/model.hpp"
#include "bilinsde/poly_field.hpp"

namespace bilinsde {

// Singular values below tol * sigma_max * N count as zero.
inline constexpr double kRankTolerance = 1e-8;

// Numerical rank of the matrix whose columns are `vectors`.
int span_dimension(const std::vector<Vector>& vectors, double tol = kRankTolerance);

// Ladder of constant bracket directions
//   W_0 = {sigma_j},  W_n = W_{n-1} + {B(psi, sigma_j) + B(sigma_j, psi) : psi in W_{n-1}}.
//
// levels[n] is W_n after rank de-duplication: a candidate is kept only if it
// raises the numerical rank, so |levels[n]| == span_dim[n] <= N. Iteration
// stops at full span, at a level that adds nothing (the ladder is then
// constant from there on), or at n_max.
struct BracketLadder {
  std::vector<std::vector<Vector>> levels;
  std::vector<int> new_vectors;
  std::vector<int> span_dim;
  std::optional<int> spanning_level;
  bool stabilized = false;  // a level added nothing
  int n_max = 0;

  int levels_built() const { return static_cast<int>(levels.size()); }
  // Span dimension at level n for any n <= n_max, extending a stabilised ladder.
  int span_dim_at(int n) const;
};

BracketLadder build_W_ladder(const BilinearModel& model, int n_max, double tol = kRankTolerance);

// Same ladder with the quadratic part replaced by `b` (used for sign checks
// and for ladders of tensors that are not wrapped in a model).
BracketLadder build_W_ladder(const BilinearTensor& b, const Matrix& sigma, int n_max,
                             double tol = kRankTolerance);

// General ladder of polynomial fields
//   V_0 = span{sigma_k},  V_n = span{E, [E, F], [E, sigma_k] : E in V_{n-1}}.
//
// levels[n] is a basis (over constant coefficients) of V_n. Brackets whose
// degree would exceed the cap are counted in `overflowed[n]` and dropped.
struct FieldLadder {
  std::vector<std::vector<PolyVectorField>> levels;
  std::vector<int> new_fields;
  std::vector<int> overflowed;
  bool stabilized = false;
  int degree_cap = kDefaultDegreeCap;
};

FieldLadder build_V_ladder(const BilinearModel& model, int n_max, int degree_cap = kDefaultDegreeCap);
FieldLadder build_V_ladder(const std::vector<PolyVectorField>& forcing, const PolyVectorField& drift,
                           int n_max, int degree_cap = kDefaultDegreeCap);

struct PointwiseHormander {
  int span_dim = 0;
  bool spanning = false;
  // span of V_n(U) for each level that was evaluated
  std::vector<int> level_span;
  std::optional<int> spanning_level;
};

// Evaluates the V-ladder at U level by level, stopping at full span. Throws
// CapacityError when a level lost brackets to the degree cap before the span
// became full, since the answer would then depend on the cap.
PointwiseHormander check_hormander_at_point(const BilinearModel& model, const Vector& u, int n_max,
                                            double tol = kRankTolerance,
                                            int degree_cap = kDefaultDegreeCap);

}  // namespace bilinsde
