// core/src/odds.cpp

// Copyright 2026 The relpop Authors

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

#include "relpop/odds.hpp"

#include <cmath>
#include <limits>

#include "relpop/errors.hpp"

namespace relpop {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// log(1 + e^x) without overflow.
double softplus(double x) {
  if (x == kInf) return kInf;
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}
}  // namespace

OddsAgainst::OddsAgainst(double log_odds) : log_odds_(log_odds) {
  if (std::isnan(log_odds_)) {
    throw ValidationError("odds-against must not be NaN");
  }
}

OddsAgainst OddsAgainst::from_value(double odds) {
  if (std::isnan(odds) || odds < 0.0) {
    throw ValidationError("odds-against must be nonnegative");
  }
  return OddsAgainst(std::log(odds));  // log(0) = -inf encodes certainty
}

OddsAgainst OddsAgainst::from_prob(double p) { return prob_to_odds_against(p); }

double OddsAgainst::value() const { return std::exp(log_odds_); }

double OddsAgainst::prob() const {
  // 1/(1 + e^L), branch on sign so neither exp can overflow.
  if (log_odds_ == kInf) return 0.0;
  if (log_odds_ > 0.0) {
    const double e = std::exp(-log_odds_);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(log_odds_));
}

bool OddsAgainst::is_infinite() const { return log_odds_ == kInf; }

OddsAgainst prob_to_odds_against(double p) {
  if (std::isnan(p) || p < 0.0 || p > 1.0) {
    throw ValidationError("probability must lie in [0,1]");
  }
  if (p == 0.0) return OddsAgainst::from_log(kInf);
  // log((1-p)/p); exact at p = 1 where log1p(-1) = -inf.
  return OddsAgainst::from_log(std::log1p(-p) - std::log(p));
}

double odds_against_to_prob(const OddsAgainst& odds) { return odds.prob(); }

OddsAgainst combine_odds_exact(std::span<const OddsAgainst> components) {
  // prod(1 + O_i) - 1 = expm1(sum log1p(O_i)); log1p(O) = softplus(log O).
  double log_product = 0.0;
  for (const auto& o : components) {
    if (o.is_infinite()) return OddsAgainst::from_log(kInf);
    log_product += softplus(o.log_value());
  }
  const double combined = std::expm1(log_product);
  // Back to log form; for large log_product expm1 overflows, but the log
  // of the combined odds is then log_product itself to double precision.
  if (combined == kInf) return OddsAgainst::from_log(log_product);
  return OddsAgainst::from_log(std::log(combined));
}

AdditiveOddsCombination combine_odds_additive(
    std::span<const OddsAgainst> components, double theta) {
  if (!(theta > 0.0)) {
    throw ValidationError("theta must be positive");
  }
  const std::size_t n = components.size();

  double sum = 0.0;
  bool any_infinite = false;
  bool all_below = true;
  for (const auto& o : components) {
    const double v = o.value();
    sum += v;
    any_infinite = any_infinite || o.is_infinite();
    all_below = all_below && v < theta;
  }

  AdditiveOddsCombination result{
      .approximate = OddsAgainst::from_value(sum),
      .epsilon = std::numeric_limits<double>::quiet_NaN(),
      .all_components_below_theta = all_below,
      .within_bound = true,
  };
  if (!any_infinite) {
    result.epsilon = combine_odds_exact(components).value() - sum;
    if (all_below) {
      const double bound =
          std::expm1(static_cast<double>(n) * std::log1p(theta)) -
          static_cast<double>(n) * theta;
      result.within_bound = result.epsilon <= bound;
    }
  }
  return result;
}

}  // namespace relpop
