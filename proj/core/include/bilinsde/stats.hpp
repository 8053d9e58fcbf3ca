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

#include <cstddef>
#include <span>
#include <vector>

namespace bilinsde {

struct MeanEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t count = 0;
};

// Sample mean with the i.i.d. standard error sqrt(s^2 / n).
MeanEstimate mean_and_se(std::span<const double> xs);

inline constexpr int kDefaultBatches = 32;

// Batch-means estimate for a correlated series: the series is cut into
// `batches` contiguous blocks of equal length (the trailing remainder is
// folded into the last block's mean only through the overall mean) and the
// standard error is that of the block means.
MeanEstimate batch_means(std::span<const double> series, int batches = kDefaultBatches);

// Weighted variant; weights need not be normalised.
MeanEstimate batch_means(std::span<const double> series, std::span<const double> weights,
                         int batches = kDefaultBatches);

// Linear interpolation between order statistics (type 7).
double quantile(std::vector<double> xs, double q);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

// Ordinary least squares y = intercept + slope * x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace bilinsde
