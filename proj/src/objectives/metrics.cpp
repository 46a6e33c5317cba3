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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>

#include "whisqa/errors.hpp"
#include "whisqa/objectives.hpp"

namespace whisqa {

namespace {

void check_pair(std::span<const double> x, std::span<const double> y, const char* what) {
  if (x.size() != y.size()) {
    throw ShapeError(std::string(what) + ": length mismatch (" + std::to_string(x.size()) + " vs " +
                     std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) throw ShapeError(std::string(what) + ": need at least 2 samples");
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && x[order[j]] == x[order[i]]) ++j;
    // Positions i..j-1 hold 1-based ranks i+1..j.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, "pearson");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelationError("correlation undefined for a constant vector");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, "spearman");
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  return pearson(rx, ry);
}

double mse_metric(std::span<const double> predicted, std::span<const double> truth) {
  if (predicted.size() != truth.size()) throw ShapeError("mse: length mismatch");
  if (predicted.empty()) throw ShapeError("mse: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double e = predicted[i] - truth[i];
    total += e * e;
  }
  return total / static_cast<double>(predicted.size());
}

EvalResult evaluate_mos(std::span<const double> predicted, std::span<const double> truth) {
  EvalResult r;
  r.n = predicted.size();
  r.e = mse_metric(predicted, truth);
  r.r = spearman(predicted, truth);
  return r;
}

std::vector<NamedEval> with_average(std::vector<NamedEval> rows) {
  if (rows.empty()) throw DataError("average of zero test sets");
  NamedEval avg{"AVERAGE", {}};
  for (const NamedEval& row : rows) {
    avg.result.r += row.result.r;
    avg.result.e += row.result.e;
    avg.result.n += row.result.n;
  }
  avg.result.r /= static_cast<double>(rows.size());
  avg.result.e /= static_cast<double>(rows.size());
  rows.push_back(avg);
  return rows;
}

void write_eval_csv(std::ostream& out, std::span<const NamedEval> rows) {
  out << "testset,n,r,e\n";
  for (const NamedEval& row : rows) {
    out << row.name << ',' << row.result.n << ',' << format_number(row.result.r) << ','
        << format_number(row.result.e) << '\n';
  }
}

CorrelationMatrix correlation_matrix(std::span<const NamedColumn> columns) {
  CorrelationMatrix m;
  const std::size_t k = columns.size();
  for (const auto& [name, values] : columns) {
    if (values.size() != columns.front().second.size()) {
      throw ShapeError("correlation matrix: column '" + name + "' has " + std::to_string(values.size()) +
                       " values, expected " + std::to_string(columns.front().second.size()));
    }
    m.names.push_back(name);
  }
  m.values.assign(k * k, 1.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double r = spearman(columns[i].second, columns[j].second);
      m.values[i * k + j] = r;
      m.values[j * k + i] = r;
    }
  }
  return m;
}

void write_correlation_csv(std::ostream& out, const CorrelationMatrix& m) {
  for (const std::string& name : m.names) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < m.names.size(); ++i) {
    out << m.names[i];
    for (std::size_t j = 0; j < m.names.size(); ++j) out << ',' << format_number(m.at(i, j));
    out << '\n';
  }
}

}  // namespace whisqa
