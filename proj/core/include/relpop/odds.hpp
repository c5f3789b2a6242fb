// core/include/relpop/odds.hpp

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

#ifndef RELPOP_ODDS_HPP_
#define RELPOP_ODDS_HPP_

#include <span>

namespace relpop {

/// Odds *against* a proposition with probability P: value = (1-P)/P.
/// Nonnegative extended real; +inf encodes P = 0, zero encodes P = 1.
/// Stored as a natural log so products and tiny odds never overflow or
/// round to zero.
class OddsAgainst {
 public:
  static OddsAgainst from_value(double odds);
  static OddsAgainst from_log(double log_odds) { return OddsAgainst(log_odds); }
  static OddsAgainst from_prob(double p);

  /// Linear odds; may be +inf (or 0 after underflow of a tiny log value).
  double value() const;
  double log_value() const { return log_odds_; }
  /// P = 1/(1 + odds), evaluated stably from the log representation.
  double prob() const;
  bool is_infinite() const;

 private:
  explicit OddsAgainst(double log_odds);
  double log_odds_;
};

/// (1-p)/p for p in [0,1]; p = 0 gives +inf, p = 1 gives 0.
OddsAgainst prob_to_odds_against(double p);

/// 1/(1+odds); +inf gives 0.
double odds_against_to_prob(const OddsAgainst& odds);

/// Posterior odds against a conjunction of independent propositions:
///   O'_f = prod_i (1 + O'_i) - 1.
/// Any infinite component makes the result infinite.
OddsAgainst combine_odds_exact(std::span<const OddsAgainst> components);

/// The small-odds shortcut O'_f ~= sum_i O'_i and its error term.
struct AdditiveOddsCombination {
  OddsAgainst approximate;        ///< sum of the component odds
  double epsilon;                 ///< exact minus approximate (linear)
  bool all_components_below_theta;
  /// When every component is below theta, epsilon must not exceed
  /// (1+theta)^n - 1 - n*theta (= 3 theta^2 + theta^3 for three terms).
  /// Vacuously true when some component reaches theta.
  bool within_bound;
};

AdditiveOddsCombination combine_odds_additive(
    std::span<const OddsAgainst> components, double theta);

}  // namespace relpop

#endif  // RELPOP_ODDS_HPP_
