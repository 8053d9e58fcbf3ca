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

#include "bilinsde/observable.hpp"

#include <charconv>

#include "bilinsde/error.hpp"

namespace bilinsde::observables {

Observable energy() {
  return {"energy", [](const Vector& u) { return u.squaredNorm(); },
          [](const Vector& u) -> Vector { return 2.0 * u; },
          [](const Vector& u) -> Matrix { return 2.0 * Matrix::Identity(u.size(), u.size()); }};
}

Observable coordinate(int k) {
  if (k < 0) throw PreconditionError("coordinate index must be non-negative");
  return {"coord:" + std::to_string(k + 1),
          [k](const Vector& u) {
            if (k >= u.size()) throw StructuralError("coordinate index outside state dimension");
            return u[k];
          },
          [k](const Vector& u) -> Vector {
            Vector g = Vector::Zero(u.size());
            g[k] = 1.0;
            return g;
          },
          [](const Vector& u) -> Matrix { return Matrix::Zero(u.size(), u.size()); }};
}

Observable quadratic_form(const Matrix& q, std::string name) {
  if (q.rows() != q.cols()) throw StructuralError("quadratic form matrix must be square");
  const Matrix sym = q + q.transpose();
  return {std::move(name), [q](const Vector& u) { return u.dot(q * u); },
          [sym](const Vector& u) -> Vector { return sym * u; }, [sym](const Vector&) -> Matrix { return sym; }};
}

Observable dissipation(const BilinearModel& model) {
  return quadratic_form(2.0 * model.viscous_operator(), "dissipation");
}

Observable one() {
  return {"one", [](const Vector&) { return 1.0; }, [](const Vector& u) -> Vector { return Vector::Zero(u.size()); },
          [](const Vector& u) -> Matrix { return Matrix::Zero(u.size(), u.size()); }};
}

Observable ball_indicator(double radius) {
  return {"ball", [radius](const Vector& u) { return u.norm() <= radius ? 1.0 : 0.0; }, {}, {}};
}

Observable by_name(const std::string& name, const BilinearModel& model) {
  if (name == "energy") return energy();
  if (name == "one") return one();
  if (name == "dissipation") return dissipation(model);
  if (name.rfind("coord:", 0) == 0) {
    int k = 0;
    const char* first = name.data() + 6;
    const char* last = name.data() + name.size();
    auto [ptr, ec] = std::from_chars(first, last, k);
    if (ec != std::errc() || ptr != last || k < 1 || k > model.dim())
      throw PreconditionError("observable '" + name + "': index must be in 1.." + std::to_string(model.dim()));
    return coordinate(k - 1);
  }
  throw PreconditionError("unknown observable '" + name + "' (expected energy, one, dissipation, coord:K)");
}

}  // namespace bilinsde::observables
