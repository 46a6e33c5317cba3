// Copyright 2026 The whisqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace whisqa {

/// Loss value with its gradient w.r.t. the predictions, laid out like the
/// predictions: row-major [samples, heads].
template <class Real>
struct LossResult {
  Real value = 0;
  std::vector<Real> grad;
};

/// Training-set size per dataset tag, i.e. N_d. N is their sum.
using DatasetSizes = std::map<std::string, std::size_t>;

/// Squared error averaged over samples and heads. predictions/targets are
/// [n, heads]; throws ShapeError on mismatch or an empty batch.
template <class Real>
LossResult<Real> mse_loss(std::span<const Real> predictions, std::span<const Real> targets, std::size_t heads);

/// One sample's share of a weighted MSE over `count` prediction entries:
/// returns weight * sum_h err_h^2 and writes 2 * weight * err_h / count to
/// `grad`. The batch loss is the sum of these shares divided by `count`.
template <class Real>
Real weighted_squared_error(std::span<const Real> prediction, std::span<const Real> target, Real weight, Real count,
                            std::span<Real> grad);

/// Per-sample squared error scaled by `weights` (one per sample), averaged
/// over samples and heads.
template <class Real>
LossResult<Real> weighted_mse_loss(std::span<const Real> predictions, std::span<const Real> targets,
                                   std::size_t heads, std::span<const Real> weights);

/// Weights w_i = N / (D * N_{d(i)}) with D = sizes.size(), rescaled to mean 1
/// over the batch. A sample from a dataset a third the size of another gets
/// three times its weight. Throws DataError for a tag missing from `sizes`.
template <class Real>
std::vector<Real> bias_aware_weights(std::span<const std::string> tags, const DatasetSizes& sizes);

template <class Real>
LossResult<Real> bias_aware_loss(std::span<const Real> predictions, std::span<const Real> targets, std::size_t heads,
                                  std::span<const std::string> tags, const DatasetSizes& sizes);

/// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> x);

/// Pearson correlation. Throws UndefinedCorrelationError when either input
/// has zero variance, ShapeError on length mismatch or fewer than 2 samples.
double pearson(std::span<const double> x, std::span<const double> y);

/// Pearson correlation of average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

/// Mean squared error; callers pass values on the 1-5 MOS scale.
double mse_metric(std::span<const double> predicted, std::span<const double> truth);

struct EvalResult {
  double r = 0.0;  // Spearman
  double e = 0.0;  // MSE on the 1-5 scale
  std::size_t n = 0;
};

/// Both inputs on the 1-5 MOS scale.
EvalResult evaluate_mos(std::span<const double> predicted, std::span<const double> truth);

struct NamedEval {
  std::string name;
  EvalResult result;
};

/// Appends an AVERAGE row: unweighted mean of r and of e, n summed.
std::vector<NamedEval> with_average(std::vector<NamedEval> rows);

/// CSV with header `testset,n,r,e`.
void write_eval_csv(std::ostream& out, std::span<const NamedEval> rows);

struct CorrelationMatrix {
  std::vector<std::string> names;
  std::vector<double> values;  // row-major [k, k]

  double at(std::size_t i, std::size_t j) const { return values[i * names.size() + j]; }
};

using NamedColumn = std::pair<std::string, std::vector<double>>;

/// Pairwise Spearman over named columns; unit diagonal, symmetric.
CorrelationMatrix correlation_matrix(std::span<const NamedColumn> columns);

/// CSV: header `,name1,...,namek`, then one row per column name.
void write_correlation_csv(std::ostream& out, const CorrelationMatrix& m);

/// Shortest round-trip decimal form, used for every CSV number.
std::string format_number(double v);

}  // namespace whisqa
