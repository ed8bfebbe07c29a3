/* Copyright 2026 The modguard Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef MODGUARD_TESTS_ORACLES_HPP_
#define MODGUARD_TESTS_ORACLES_HPP_

// Reference computations written independently of the library code, used as
// test oracles.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "modguard/metrics.hpp"
#include "modguard/types.hpp"

namespace modguard::testing {

// Non-negative rational in lowest terms.
struct Fraction {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  static Fraction make(std::uint64_t num, std::uint64_t den);
  // Correctly rounded, since both parts are exactly representable.
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Fraction&, const Fraction&) = default;
};

struct RationalPrf1 {
  std::optional<Fraction> precision;  // nullopt when undefined
  std::optional<Fraction> recall;
  std::optional<Fraction> f1;  // harmonic mean 2pr / (p + r)
};
RationalPrf1 rational_prf1(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn);

// Per-element counting.
metrics::ConfusionCounts count_confusion(std::span<const Label> labels,
                                         std::span<const Label> preds);

// Probability that a random positive outscores a random negative, ties
// counted one half, by comparing every pair.
double pairwise_auc(std::span<const double> scores, std::span<const Label> labels);

// Central differences of f along each coordinate of x.
std::vector<double> numeric_gradient(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> x, double h);

// |a - b| / max(|a|, |b|) over whole vectors (0 when both are zero).
double relative_error(std::span<const double> a, std::span<const double> b);

// Trustworthiness from its definition:
//   1 - 2 / (n k (2n - 3k - 1)) * sum_i sum_{j in U_i} (r(i, j) - k)
// where U_i are the low-dimensional k nearest neighbours of i that are not
// among its high-dimensional k nearest, and r(i, j) is the rank of j among
// the high-dimensional neighbours of i. Euclidean distances, ties broken by
// index.
double trustworthiness_oracle(std::span<const double> high, std::size_t high_dim,
                              std::span<const double> low, std::size_t low_dim,
                              std::size_t k);

}  // namespace modguard::testing

#endif  // MODGUARD_TESTS_ORACLES_HPP_
