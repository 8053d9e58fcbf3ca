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

namespace bilinsde {

// Per-step tangent propagators of a frozen trajectory, matched to its scheme:
//   semi_implicit:  P_m = (I + dt nu A)^{-1} (I - dt gradB(U_m))
//   explicit_em:    P_m = I - dt nu A - dt gradB(U_m)
// with gradB(U) rho = B(U, rho) + B(rho, U). P_m is exactly the derivative of
// the discrete step map at U_m, so products of P_m differentiate the scheme.
//
// For N <= materialize_limit every P_m is formed once; above it P_m is
// applied on the fly from the stored states.
class TangentPropagator {
public:
  static constexpr int kMaterializeLimit = 128;

  explicit TangentPropagator(const Trajectory& traj, int materialize_limit = kMaterializeLimit);

  std::int64_t steps() const { return steps_; }
  int dim() const { return dim_; }
  bool materialized() const { return !matrices_.empty(); }

  Vector apply(std::int64_t m, const Vector& v) const;
  Vector apply_transpose(std::int64_t m, const Vector& w) const;
  Matrix apply(std::int64_t m, const Matrix& v) const;
  Matrix apply_transpose(std::int64_t m, const Matrix& w) const;

  // Second derivative of step m applied to (a, b): -S dt (B(a,b) + B(b,a)),
  // S the scheme's implicit solve.
  Vector second_order_source(const Vector& a, const Vector& b) const;

private:
  const Trajectory* traj_;
  Stepper stepper_;
  std::int64_t steps_;
  int dim_;
  std::vector<Matrix> matrices_;
};

enum class FlowDirection { forward, adjoint };

// J_{s,t} (forward) or its transpose J*_{s,t} (adjoint) between grid indices.
struct FlowOperator {
  std::int64_t s_index = 0;
  std::int64_t t_index = 0;
  double s = 0.0;
  double t = 0.0;
  Matrix matrix;
  FlowDirection direction = FlowDirection::forward;
};

FlowOperator jacobian_flow(const Trajectory& traj, std::int64_t s_index, std::int64_t t_index);
FlowOperator jacobian_flow(const Trajectory& traj, const TangentPropagator& prop, std::int64_t s_index,
                           std::int64_t t_index);

// Transpose of the forward product, so <J xi, eta> = <xi, J* eta> exactly.
FlowOperator adjoint_flow(const Trajectory& traj, std::int64_t s_index, std::int64_t t_index);
FlowOperator adjoint_flow(const Trajectory& traj, const TangentPropagator& prop, std::int64_t s_index,
                          std::int64_t t_index);

// J_{s,t} xi without forming the matrix.
Vector tangent(const TangentPropagator& prop, std::int64_t s_index, std::int64_t t_index, const Vector& xi);

// J^(2)_{s,t}(xi, xi2): zero start at s, forced by the discrete counterpart of
// -(B(J xi, J xi2) + B(J xi2, J xi)). Symmetric in its arguments.
Vector second_variation(const Trajectory& traj, std::int64_t s_index, std::int64_t t_index, const Vector& xi,
                        const Vector& xi2);

// Trapezoidal weights w_0..w_M on the trajectory grid (dt/2 at both ends).
std::vector<double> quadrature_weights(const Trajectory& traj);

// A v = sum_m w_m J_{t_m,T} sigma v_m for controls on the M + 1 grid nodes
// (v is (M+1) x d), integrated by the same propagators from rho(0) = 0.
Vector controlled_response(const Trajectory& traj, const Matrix& v);
Vector controlled_response(const Trajectory& traj, const TangentPropagator& prop, const Matrix& v);

}  // namespace bilinsde
