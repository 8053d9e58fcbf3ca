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

#include "bilinsde/stats.hpp"

#include <algorithm>
#include <cmath>

#include "bilinsde/error.hpp"

namespace bilinsde {

MeanEstimate mean_and_se(std::span<const double> xs) {
  MeanEstimate r;
  r.count = xs.size();
  if (xs.empty()) return r;
  double sum = 0.0;
  for (double x : xs) sum += x;
  r.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return r;
  // shifted by the first sample, so a constant sample has exactly zero spread
  const double shift = xs.front();
  double sd = 0.0, ss = 0.0;
  for (double x : xs) {
    sd += x - shift;
    ss += (x - shift) * (x - shift);
  }
  const double n = static_cast<double>(xs.size());
  const double var = std::max(0.0, (ss - sd * sd / n) / (n - 1.0));
  r.se = std::sqrt(var / static_cast<double>(xs.size()));
  return r;
}

MeanEstimate batch_means(std::span<const double> series, int batches) {
  std::vector<double> w(series.size(), 1.0);
  return batch_means(series, w, batches);
}

MeanEstimate batch_means(std::span<const double> series, std::span<const double> weights, int batches) {
  if (series.size() != weights.size()) throw PreconditionError("batch_means: weights length mismatch");
  if (batches < 2) throw PreconditionError("batch_means needs at least two batches");
  MeanEstimate r;
  r.count = series.size();
  if (series.empty()) return r;

  double wsum = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    wsum += weights[i];
    sum += weights[i] * series[i];
  }
  r.mean = wsum > 0.0 ? sum / wsum : 0.0;

  const std::size_t b = std::min<std::size_t>(static_cast<std::size_t>(batches), series.size());
  if (b < 2) return r;
  const std::size_t len = series.size() / b;
  std::vector<double> means;
  means.reserve(b);
  for (std::size_t k = 0; k < b; ++k) {
    double bw = 0.0, bs = 0.0;
    for (std::size_t i = k * len; i < (k + 1) * len; ++i) {
      bw += weights[i];
      bs += weights[i] * series[i];
    }
    if (bw > 0.0) means.push_back(bs / bw);
  }
  r.se = mean_and_se(means).se;
  return r;
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw PreconditionError("quantile of an empty sample");
  std::sort(xs.begin(), xs.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return xs[lo] + frac * (xs[hi] - xs[lo]);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw PreconditionError("fit_line: length mismatch");
  LineFit fit;
  fit.points = x.size();
  if (x.size() < 2) return fit;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

}  // namespace bilinsde
