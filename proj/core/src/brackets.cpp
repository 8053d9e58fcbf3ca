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

#include "bilinsde/brackets.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <utility>

#include <Eigen/SVD>

#include "bilinsde/error.hpp"

namespace bilinsde {

int span_dimension(const std::vector<Vector>& vectors, double tol) {
  if (vectors.empty()) return 0;
  const auto n = vectors.front().size();
  Matrix m(n, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t c = 0; c < vectors.size(); ++c) {
    if (vectors[c].size() != n) throw StructuralError("span_dimension: vectors differ in length");
    m.col(static_cast<Eigen::Index>(c)) = vectors[c];
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  const double threshold = tol * s[0] * static_cast<double>(n);
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > threshold) ++rank;
  return rank;
}

int BracketLadder::span_dim_at(int n) const {
  if (levels.empty()) return 0;
  if (n < levels_built()) return span_dim[n];
  return span_dim.back();
}

BracketLadder build_W_ladder(const BilinearModel& model, int n_max, double tol) {
  return build_W_ladder(model.B(), model.sigma(), n_max, tol);
}

BracketLadder build_W_ladder(const BilinearTensor& b, const Matrix& sigma, int n_max, double tol) {
  if (n_max < 0) throw PreconditionError("n_max must be non-negative");
  if (sigma.rows() != b.dim()) throw StructuralError("sigma rows must match tensor dimension");
  const int n = b.dim();
  BracketLadder ladder;
  ladder.n_max = n_max;

  std::vector<Vector> current;
  int rank = 0;
  auto try_add = [&](const Vector& candidate) {
    current.push_back(candidate);
    const int r = span_dimension(current, tol);
    if (r > rank) {
      rank = r;
      return true;
    }
    current.pop_back();
    return false;
  };

  std::vector<Vector> frontier;
  for (Eigen::Index j = 0; j < sigma.cols(); ++j)
    if (try_add(sigma.col(j))) frontier.push_back(sigma.col(j));
  ladder.levels.push_back(current);
  ladder.new_vectors.push_back(static_cast<int>(frontier.size()));
  ladder.span_dim.push_back(rank);
  if (rank == n) ladder.spanning_level = 0;

  for (int level = 1; level <= n_max && !ladder.spanning_level; ++level) {
    // The map psi -> B(psi, s) + B(s, psi) is linear, so bracketing the newly
    // added basis vectors reaches the whole new span.
    std::vector<Vector> added;
    for (const auto& psi : frontier) {
      for (Eigen::Index j = 0; j < sigma.cols() && rank < n; ++j) {
        const Vector s = sigma.col(j);
        Vector candidate = b.apply(psi, s) + b.apply(s, psi);
        if (try_add(candidate)) added.push_back(std::move(candidate));
      }
    }
    ladder.levels.push_back(current);
    ladder.new_vectors.push_back(static_cast<int>(added.size()));
    ladder.span_dim.push_back(rank);
    if (rank == n) {
      ladder.spanning_level = level;
      break;
    }
    if (added.empty()) {
      ladder.stabilized = true;
      break;
    }
    frontier = std::move(added);
  }
  return ladder;
}

namespace {

using CoeffKey = std::pair<Monomial, int>;
using SparseCoeffs = std::map<CoeffKey, double>;

SparseCoeffs flatten(const PolyVectorField& f) {
  SparseCoeffs out;
  for (const auto& [mono, coeff] : f.terms())
    for (int i = 0; i < coeff.size(); ++i)
      if (coeff[i] != 0.0) out[{mono, i}] = coeff[i];
  return out;
}

double dot(const SparseCoeffs& a, const SparseCoeffs& b) {
  const SparseCoeffs& small = a.size() < b.size() ? a : b;
  const SparseCoeffs& large = a.size() < b.size() ? b : a;
  double s = 0.0;
  for (const auto& [key, v] : small) {
    auto it = large.find(key);
    if (it != large.end()) s += v * it->second;
  }
  return s;
}

double norm(const SparseCoeffs& a) {
  double s = 0.0;
  for (const auto& [key, v] : a) s += v * v;
  return std::sqrt(s);
}

// Orthonormal basis of a span of polynomial fields in coefficient space.
class CoefficientSpan {
public:
  bool add_if_independent(const PolyVectorField& f) {
    SparseCoeffs v = flatten(f);
    const double original = norm(v);
    if (original == 0.0) return false;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis_) {
        const double c = dot(v, q);
        if (c == 0.0) continue;
        for (const auto& [key, qv] : q) v[key] -= c * qv;
      }
    }
    const double residual = norm(v);
    if (residual <= 1e-10 * original) return false;
    for (auto& [key, x] : v) x /= residual;
    basis_.push_back(std::move(v));
    return true;
  }

private:
  std::vector<SparseCoeffs> basis_;
};

class VLadderBuilder {
public:
  VLadderBuilder(std::vector<PolyVectorField> forcing, PolyVectorField drift, int degree_cap)
      : forcing_(std::move(forcing)), drift_(std::move(drift)) {
    ladder_.degree_cap = degree_cap;
    std::vector<PolyVectorField> level;
    for (const auto& s : forcing_) {
      if (span_.add_if_independent(s)) {
        level.push_back(s);
        frontier_.push_back(s);
      }
    }
    ladder_.levels.push_back(level);
    ladder_.new_fields.push_back(static_cast<int>(frontier_.size()));
    ladder_.overflowed.push_back(0);
  }

  // Builds the next level; false once the ladder has stabilised.
  bool step() {
    if (ladder_.stabilized) return false;
    std::vector<PolyVectorField> level = ladder_.levels.back();
    std::vector<PolyVectorField> added;
    int overflow = 0;
    auto consider = [&](const PolyVectorField& e, const PolyVectorField& other) {
      try {
        PolyVectorField candidate = lie_bracket(e, other);
        if (span_.add_if_independent(candidate)) added.push_back(std::move(candidate));
      } catch (const CapacityError&) {
        ++overflow;
      }
    };
    for (const auto& e : frontier_) {
      consider(e, drift_);
      for (const auto& s : forcing_) consider(e, s);
    }
    for (const auto& f : added) level.push_back(f);
    ladder_.levels.push_back(std::move(level));
    ladder_.new_fields.push_back(static_cast<int>(added.size()));
    ladder_.overflowed.push_back(overflow);
    if (added.empty()) ladder_.stabilized = true;
    frontier_ = std::move(added);
    return !ladder_.stabilized;
  }

  const FieldLadder& ladder() const { return ladder_; }
  FieldLadder take() { return std::move(ladder_); }

private:
  std::vector<PolyVectorField> forcing_;
  PolyVectorField drift_;
  FieldLadder ladder_;
  CoefficientSpan span_;
  std::vector<PolyVectorField> frontier_;
};

std::vector<PolyVectorField> forcing_fields(const BilinearModel& model, int degree_cap) {
  std::vector<PolyVectorField> out;
  for (Eigen::Index k = 0; k < model.sigma().cols(); ++k)
    out.push_back(PolyVectorField::constant(model.sigma().col(k), degree_cap));
  return out;
}

}  // namespace

FieldLadder build_V_ladder(const BilinearModel& model, int n_max, int degree_cap) {
  return build_V_ladder(forcing_fields(model, degree_cap), PolyVectorField::drift(model, degree_cap),
                        n_max, degree_cap);
}

FieldLadder build_V_ladder(const std::vector<PolyVectorField>& forcing, const PolyVectorField& drift,
                           int n_max, int degree_cap) {
  if (degree_cap < 2) throw PreconditionError("degree cap must be at least 2");
  if (n_max < 0) throw PreconditionError("n_max must be non-negative");
  VLadderBuilder builder(forcing, drift, degree_cap);
  for (int level = 1; level <= n_max; ++level)
    if (!builder.step()) break;
  return builder.take();
}

PointwiseHormander check_hormander_at_point(const BilinearModel& model, const Vector& u, int n_max,
                                            double tol, int degree_cap) {
  if (u.size() != model.dim()) throw StructuralError("state dimension mismatch");
  if (degree_cap < 2) throw PreconditionError("degree cap must be at least 2");
  if (n_max < 0) throw PreconditionError("n_max must be non-negative");
  const int n = model.dim();
  VLadderBuilder builder(forcing_fields(model, degree_cap), PolyVectorField::drift(model, degree_cap),
                         degree_cap);
  PointwiseHormander result;
  int total_overflow = 0;
  for (int level = 0;; ++level) {
    const auto& ladder = builder.ladder();
    total_overflow += ladder.overflowed.back();
    std::vector<Vector> values;
    for (const auto& f : ladder.levels.back()) values.push_back(f.evaluate(u));
    result.span_dim = span_dimension(values, tol);
    result.level_span.push_back(result.span_dim);
    if (result.span_dim == n) {
      result.spanning = true;
      result.spanning_level = level;
      return result;
    }
    if (level == n_max || !builder.step()) break;
  }
  if (total_overflow > 0) {
    std::ostringstream os;
    os << total_overflow << " bracket(s) exceeded degree cap " << degree_cap
       << " before the span at the given point became full (span " << result.span_dim << " of " << n
       << ")";
    throw CapacityError(os.str());
  }
  return result;
}

}  // namespace bilinsde
