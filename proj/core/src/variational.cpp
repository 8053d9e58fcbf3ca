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

#include "bilinsde/variational.hpp"

#include <sstream>

#include "bilinsde/error.hpp"

namespace bilinsde {

namespace {

void check_range(const Trajectory& traj, std::int64_t s, std::int64_t t) {
  if (s < 0 || t > traj.steps() || s > t) {
    std::ostringstream os;
    os << "flow indices (" << s << ", " << t << ") outside 0 <= s <= t <= " << traj.steps();
    throw PreconditionError(os.str());
  }
}

}  // namespace

TangentPropagator::TangentPropagator(const Trajectory& traj, int materialize_limit)
    : traj_(&traj),
      stepper_(traj.model, traj.scheme, traj.dt()),
      steps_(traj.steps()),
      dim_(traj.model->dim()) {
  if (dim_ > materialize_limit) return;
  const double dt = traj.dt();
  const Matrix eye = Matrix::Identity(dim_, dim_);
  matrices_.reserve(static_cast<std::size_t>(steps_));
  for (std::int64_t m = 0; m < steps_; ++m) {
    const Matrix lin = traj.model->B().linearization(traj.state(m));
    if (traj.scheme == Scheme::semi_implicit) {
      matrices_.push_back(stepper_.solve(Matrix(eye - dt * lin)));
    } else {
      matrices_.push_back(eye - dt * traj.model->viscous_operator() - dt * lin);
    }
  }
}

Vector TangentPropagator::apply(std::int64_t m, const Vector& v) const {
  if (materialized()) return matrices_[static_cast<std::size_t>(m)] * v;
  const auto& model = *traj_->model;
  const Vector u = traj_->state(m);
  const double dt = traj_->dt();
  Vector rhs = v - dt * (model.B().apply(u, v) + model.B().apply(v, u));
  if (traj_->scheme == Scheme::explicit_em) return rhs - dt * (model.viscous_operator() * v);
  return stepper_.solve(rhs);
}

Vector TangentPropagator::apply_transpose(std::int64_t m, const Vector& w) const {
  if (materialized()) return matrices_[static_cast<std::size_t>(m)].transpose() * w;
  const auto& model = *traj_->model;
  const Vector u = traj_->state(m);
  const double dt = traj_->dt();
  if (traj_->scheme == Scheme::explicit_em)
    return w - dt * (model.viscous_operator().transpose() * w) - dt * model.B().linearization_transpose_apply(u, w);
  const Vector y = stepper_.solve_transpose(w);
  return y - dt * model.B().linearization_transpose_apply(u, y);
}

Matrix TangentPropagator::apply(std::int64_t m, const Matrix& v) const {
  if (materialized()) return matrices_[static_cast<std::size_t>(m)] * v;
  Matrix out(v.rows(), v.cols());
  for (Eigen::Index c = 0; c < v.cols(); ++c) out.col(c) = apply(m, Vector(v.col(c)));
  return out;
}

Matrix TangentPropagator::apply_transpose(std::int64_t m, const Matrix& w) const {
  if (materialized()) return matrices_[static_cast<std::size_t>(m)].transpose() * w;
  Matrix out(w.rows(), w.cols());
  for (Eigen::Index c = 0; c < w.cols(); ++c) out.col(c) = apply_transpose(m, Vector(w.col(c)));
  return out;
}

Vector TangentPropagator::second_order_source(const Vector& a, const Vector& b) const {
  const auto& model = *traj_->model;
  return stepper_.solve(Vector(-traj_->dt() * (model.B().apply(a, b) + model.B().apply(b, a))));
}

FlowOperator jacobian_flow(const Trajectory& traj, std::int64_t s_index, std::int64_t t_index) {
  check_range(traj, s_index, t_index);
  const TangentPropagator prop(traj);
  return jacobian_flow(traj, prop, s_index, t_index);
}

FlowOperator jacobian_flow(const Trajectory& traj, const TangentPropagator& prop, std::int64_t s_index,
                           std::int64_t t_index) {
  check_range(traj, s_index, t_index);
  FlowOperator op;
  op.s_index = s_index;
  op.t_index = t_index;
  op.s = traj.time(s_index);
  op.t = traj.time(t_index);
  op.matrix = Matrix::Identity(prop.dim(), prop.dim());
  for (std::int64_t m = s_index; m < t_index; ++m) op.matrix = prop.apply(m, op.matrix);
  return op;
}

FlowOperator adjoint_flow(const Trajectory& traj, std::int64_t s_index, std::int64_t t_index) {
  check_range(traj, s_index, t_index);
  const TangentPropagator prop(traj);
  return adjoint_flow(traj, prop, s_index, t_index);
}

FlowOperator adjoint_flow(const Trajectory& traj, const TangentPropagator& prop, std::int64_t s_index,
                          std::int64_t t_index) {
  FlowOperator op = jacobian_flow(traj, prop, s_index, t_index);
  op.matrix.transposeInPlace();
  op.direction = FlowDirection::adjoint;
  return op;
}

Vector tangent(const TangentPropagator& prop, std::int64_t s_index, std::int64_t t_index, const Vector& xi) {
  if (s_index < 0 || t_index > prop.steps() || s_index > t_index)
    throw PreconditionError("tangent: flow indices out of range");
  Vector rho = xi;
  for (std::int64_t m = s_index; m < t_index; ++m) rho = prop.apply(m, rho);
  return rho;
}

Vector second_variation(const Trajectory& traj, std::int64_t s_index, std::int64_t t_index, const Vector& xi,
                        const Vector& xi2) {
  check_range(traj, s_index, t_index);
  const int n = traj.model->dim();
  if (xi.size() != n || xi2.size() != n) throw StructuralError("second_variation: direction dimension mismatch");
  const TangentPropagator prop(traj);
  Vector a = xi, b = xi2, r = Vector::Zero(n);
  for (std::int64_t m = s_index; m < t_index; ++m) {
    r = prop.apply(m, r) + prop.second_order_source(a, b);
    a = prop.apply(m, a);
    b = prop.apply(m, b);
  }
  return r;
}

std::vector<double> quadrature_weights(const Trajectory& traj) {
  std::vector<double> w(static_cast<std::size_t>(traj.steps() + 1), traj.dt());
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

Vector controlled_response(const Trajectory& traj, const Matrix& v) {
  const TangentPropagator prop(traj);
  return controlled_response(traj, prop, v);
}

Vector controlled_response(const Trajectory& traj, const TangentPropagator& prop, const Matrix& v) {
  const auto& sigma = traj.model->sigma();
  if (v.rows() != traj.steps() + 1 || v.cols() != sigma.cols()) {
    std::ostringstream os;
    os << "control grid is " << v.rows() << "x" << v.cols() << ", expected " << traj.steps() + 1 << "x"
       << sigma.cols();
    throw PreconditionError(os.str());
  }
  const auto w = quadrature_weights(traj);
  Vector rho = w[0] * (sigma * v.row(0).transpose());
  for (std::int64_t m = 0; m < traj.steps(); ++m)
    rho = prop.apply(m, rho) + w[static_cast<std::size_t>(m + 1)] * (sigma * v.row(m + 1).transpose());
  return rho;
}

}  // namespace bilinsde
