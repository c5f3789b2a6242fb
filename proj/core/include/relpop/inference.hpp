// core/include/relpop/inference.hpp

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

#ifndef RELPOP_INFERENCE_HPP_
#define RELPOP_INFERENCE_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "relpop/model.hpp"
#include "relpop/odds.hpp"

namespace relpop {

/// Default reasonable-doubt ceiling on the final odds against the
/// same-source hypothesis: 1/10000.
inline constexpr double kDefaultReasonableDoubtThreshold = 1e-4;

/// Priors over the catalog's categories, aligned with catalog order:
/// a simplex for the suspect's category, a simplex for the trace's
/// (perpetrator's) category, and per-category priors for the same-source
/// hypothesis given that both fall in that category. Zero entries express
/// hard conditioning (category ruled out). The per-category same-source
/// prior may be left unset for categories outside the joint support.
class PriorConfig {
 public:
  PriorConfig(std::vector<double> suspect_prior,
              std::vector<double> trace_prior,
              std::vector<std::optional<double>> h1_prior_per_category);

  std::size_t size() const { return suspect_prior_.size(); }
  std::span<const double> suspect_prior() const { return suspect_prior_; }
  std::span<const double> trace_prior() const { return trace_prior_; }
  const std::optional<double>& h1_prior(std::size_t k) const {
    return h1_prior_per_category_.at(k);
  }

  std::vector<std::size_t> suspect_support() const;
  std::vector<std::size_t> trace_support() const;
  /// Categories with positive prior mass on both sides.
  std::vector<std::size_t> joint_support() const;
  bool supports_are_disjoint() const { return joint_support().empty(); }

  /// Same priors with every joint-support same-source prior replaced.
  PriorConfig with_h1_prior(double pi_h) const;

 private:
  std::vector<double> suspect_prior_;
  std::vector<double> trace_prior_;
  std::vector<std::optional<double>> h1_prior_per_category_;
};

/// Memoized closed-form likelihoods for one (catalog, evidence) pair.
/// Entries are computed on first use; the evaluation counter exposes how
/// many closed-form evaluations a computation actually triggered.
/// Lazy fills are not synchronized: share across threads only after
/// materialize().
class LikelihoodCache {
 public:
  LikelihoodCache(const CategoryCatalog& catalog, const Evidence& evidence);

  const CategoryCatalog& catalog() const { return catalog_; }
  const Evidence& evidence() const { return evidence_; }

  double suspect_log_ml(std::size_t k) const;
  double trace_log_ml(std::size_t k) const;
  double same_source_log_ml(std::size_t k) const;
  /// ln R_h for category k: different-source minus same-source log density.
  double same_source_log_odds_lr(std::size_t k) const;

  /// Number of closed-form likelihood evaluations performed so far.
  std::size_t evaluations() const { return evaluations_; }
  /// Evaluate every entry now; afterwards reads have no side effects.
  void materialize() const;

 private:
  const CategoryCatalog& catalog_;
  const Evidence& evidence_;
  mutable std::vector<std::optional<double>> suspect_ml_;
  mutable std::vector<std::optional<double>> trace_ml_;
  mutable std::vector<std::optional<double>> same_source_ml_;
  mutable std::size_t evaluations_ = 0;
};

/// Log likelihood ratio of the recordings under two category models.
double category_log_lr(std::span<const Eigen::VectorXd> recordings,
                       const CategoryModel& numerator,
                       const CategoryModel& denominator);

/// ln R_h: the likelihood ratio *against* same source within one category,
///   R_h = p(X_r) p(X_s) / p(X_r, X_s | same source),
/// so large values favor different sources.
double same_source_log_odds_lr(const Evidence& evidence,
                               const CategoryModel& model);

/// Posterior over categories given recordings of one individual:
/// posterior_k proportional to prior_k * p(recordings | model_k),
/// normalized with max-log subtraction. Zero-prior categories are excluded
/// exactly and their likelihood is never evaluated.
std::vector<double> category_posterior(
    std::span<const Eigen::VectorXd> recordings, const CategoryCatalog& catalog,
    std::span<const double> prior);

/// P(same source | evidence, category model, prior pi_h), through the
/// odds identity O'_h = O_h * R_h and P_h = 1/(1 + O'_h).
double conditional_h1_posterior(const Evidence& evidence,
                                const CategoryModel& model, double pi_h);

enum class Verdict { find_h1, find_h2 };

enum class DecisionRule {
  three_tests,  ///< each of the three component odds thresholded separately
  additive,     ///< sum of the three component odds thresholded
  exact,        ///< final combined odds thresholded
};

/// One question's odds bookkeeping: prior odds, likelihood ratio, their
/// product, and the posterior it implies.
struct DecisionChannel {
  double log_prior_odds;
  double log_lr;
  OddsAgainst posterior_odds;  ///< O' = O * R
  double posterior;            ///< 1/(1 + O')
};

/// Extra structure available when the priors have the two-by-two shape:
/// suspect support {intersection, suspect_other}, trace support
/// {intersection, trace_other}. The three channels answer: is the suspect
/// in the intersection category, is the trace, and are they the same
/// individual given both are.
struct FactorizedBreakdown {
  std::size_t intersection;
  std::size_t suspect_other;
  std::size_t trace_other;
  DecisionChannel suspect;      ///< "a" question, odds against intersection
  DecisionChannel trace;        ///< "g" question
  DecisionChannel same_source;  ///< "h" question
  OddsAgainst additive_odds;    ///< sum of the three posterior odds
  double epsilon;               ///< exact combined odds minus the sum
};

/// Full inference output for one case.
struct CaseResult {
  std::vector<double> suspect_posterior;  ///< over catalog categories
  std::vector<double> trace_posterior;
  /// Per category: ln R_h and the conditional same-source posterior,
  /// present where the computation needed them (joint support).
  std::vector<std::optional<double>> same_source_log_odds;
  std::vector<std::optional<double>> h1_posterior;
  double final_posterior = 0.0;  ///< P_f
  OddsAgainst final_odds = OddsAgainst::from_prob(0.0);  ///< odds against H1
  std::optional<FactorizedBreakdown> factorized;
  std::size_t likelihood_evaluations = 0;
};

/// The two-by-two special case: final posterior as the product of the
/// three channel posteriors, P_f = P_a * P_g * P_h. Requires the
/// factorized prior structure (two-category supports, one intersection).
CaseResult posterior_factorized(LikelihoodCache& cache,
                                const PriorConfig& priors);
CaseResult posterior_factorized(const Evidence& evidence,
                                const CategoryCatalog& catalog,
                                const PriorConfig& priors);

/// The K-category posterior
///   P_f = sum_k P(s in C_k | X_s) P(r in C_k | X_r) P(H1 | X, M_k, pi_hk).
/// Disjoint prior supports short-circuit to P_f = 0 with no likelihood
/// evaluation. When the factorized structure holds, the breakdown is
/// attached as well.
CaseResult posterior_general(LikelihoodCache& cache, const PriorConfig& priors);
CaseResult posterior_general(const Evidence& evidence,
                             const CategoryCatalog& catalog,
                             const PriorConfig& priors);

/// Threshold decision at reasonable-doubt level theta (strict: odds equal
/// to theta already find for H2). three_tests and additive require the
/// factorized breakdown.
Verdict decide(const CaseResult& result, double theta, DecisionRule rule);

/// One grid point of a prior-sensitivity sweep: named coordinates for
/// reporting plus the full prior configuration they induce.
struct SweepPoint {
  std::vector<std::pair<std::string, double>> coordinates;
  PriorConfig priors;
};

struct SweepRow {
  std::vector<std::pair<std::string, double>> coordinates;
  double final_posterior;
  OddsAgainst final_odds;
  Verdict verdict;  ///< exact rule at the sweep's theta
};

/// Evaluates the general posterior at every grid point, reusing one
/// likelihood cache so evidence is analyzed exactly once.
std::vector<SweepRow> sensitivity_sweep(const Evidence& evidence,
                                        const CategoryCatalog& catalog,
                                        std::span<const SweepPoint> grid,
                                        double theta);

}  // namespace relpop

#endif  // RELPOP_INFERENCE_HPP_
