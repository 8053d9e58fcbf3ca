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

#include <functional>
#include <string>

#include "bilinsde/model.hpp"

namespace bilinsde {

// Scalar test function phi on state space with optional first and second
// derivatives (needed by the generator and the gradient probe).
struct Observable {
  std::string name;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> hessian;

  double operator()(const Vector& u) const { return value(u); }
  bool has_gradient() const { return static_cast<bool>(gradient); }
  bool has_hessian() const { return static_cast<bool>(hessian); }
};

namespace observables {

// |U|^2
Observable energy();
// <U, e_k>, k 0-based
Observable coordinate(int k);
// <Q U, U>
Observable quadratic_form(const Matrix& q, std::string name = "quadratic");
// 2 <nu A U, U>
Observable dissipation(const BilinearModel& model);
// phi == 1
Observable one();
// 1{|U| <= radius}; value only
Observable ball_indicator(double radius);

// Parses "energy", "one", "coord:K" (1-based K) and "dissipation".
Observable by_name(const std::string& name, const BilinearModel& model);

}  // namespace observables

}  // namespace bilinsde
