// core/src/inference.cpp

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

#include "relpop/inference.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "relpop/errors.hpp"

namespace relpop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSimplexTol = 1e-12;

void check_simplex(std::span<const double> prior, const char* name) {
  double sum = 0.0;
  for (double p : prior) {
    if (std::isnan(p) || p < 0.0) {
      throw ValidationError(std::string(name) +
                            " prior entries must be nonnegative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSimplexTol) {
    throw ValidationError(std::string(name) + " prior does not sum to 1");
  }
}

std::vector<std::size_t> support_of(std::span<const double> prior) {
  std::vector<std::size_t> support;
  for (std::size_t k = 0; k < prior.size(); ++k) {
    if (prior[k] > 0.0) support.push_back(k);
  }
  return support;
}

// P = 1/(1 + e^log_odds), stable for either sign.
double prob_from_log_odds(double log_odds) {
  if (log_odds == kInf) return 0.0;
  if (log_odds > 0.0) {
    const double e = std::exp(-log_odds);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(log_odds));
}

// log((1 - pi) / pi): +inf at pi = 0, -inf at pi = 1.
double log_prior_odds_against(double pi) {
  if (pi == 0.0) return kInf;
  return std::log1p(-pi) - std::log(pi);
}

}  // namespace

PriorConfig::PriorConfig(std::vector<double> suspect_prior,
                         std::vector<double> trace_prior,
                         std::vector<std::optional<double>> h1_prior)
    : suspect_prior_(std::move(suspect_prior)),
      trace_prior_(std::move(trace_prior)),
      h1_prior_per_category_(std::move(h1_prior)) {
  if (suspect_prior_.empty() ||
      suspect_prior_.size() != trace_prior_.size() ||
      suspect_prior_.size() != h1_prior_per_category_.size()) {
    throw ValidationError("prior vectors must share the catalog size");
  }
  check_simplex(suspect_prior_, "suspect");
  check_simplex(trace_prior_, "trace");
  for (const auto& h : h1_prior_per_category_) {
    if (h && (std::isnan(*h) || *h < 0.0 || *h > 1.0)) {
      throw ValidationError("same-source prior must lie in [0,1]");
    }
  }
}

std::vector<std::size_t> PriorConfig::suspect_support() const {
  return support_of(suspect_prior_);
}

std::vector<std::size_t> PriorConfig::trace_support() const {
  return support_of(trace_prior_);
}

std::vector<std::size_t> PriorConfig::joint_support() const {
  std::vector<std::size_t> joint;
  for (std::size_t k = 0; k < suspect_prior_.size(); ++k) {
    if (suspect_prior_[k] > 0.0 && trace_prior_[k] > 0.0) joint.push_back(k);
  }
  return joint;
}

PriorConfig PriorConfig::with_h1_prior(double pi_h) const {
  std::vector<std::optional<double>> h1 = h1_prior_per_category_;
  for (std::size_t k : joint_support()) h1[k] = pi_h;
  return PriorConfig(suspect_prior_, trace_prior_, std::move(h1));
}

LikelihoodCache::LikelihoodCache(const CategoryCatalog& catalog,
                                 const Evidence& evidence)
    : catalog_(catalog),
      evidence_(evidence),
      suspect_ml_(catalog.size()),
      trace_ml_(catalog.size()),
      same_source_ml_(catalog.size()) {
  if (evidence.dim() != catalog.dim()) {
    throw ValidationError("evidence dimension does not match the catalog");
  }
}

double LikelihoodCache::suspect_log_ml(std::size_t k) const {
  if (!suspect_ml_.at(k)) {
    suspect_ml_[k] =
        marginal_log_likelihood(evidence_.suspect_recordings(), catalog_.at(k));
    ++evaluations_;
  }
  return *suspect_ml_[k];
}

double LikelihoodCache::trace_log_ml(std::size_t k) const {
  if (!trace_ml_.at(k)) {
    trace_ml_[k] =
        marginal_log_likelihood(evidence_.trace_recordings(), catalog_.at(k));
    ++evaluations_;
  }
  return *trace_ml_[k];
}

double LikelihoodCache::same_source_log_ml(std::size_t k) const {
  if (!same_source_ml_.at(k)) {
    same_source_ml_[k] = same_source_log_likelihood(evidence_, catalog_.at(k));
    ++evaluations_;
  }
  return *same_source_ml_[k];
}

double LikelihoodCache::same_source_log_odds_lr(std::size_t k) const {
  return suspect_log_ml(k) + trace_log_ml(k) - same_source_log_ml(k);
}

void LikelihoodCache::materialize() const {
  for (std::size_t k = 0; k < catalog_.size(); ++k) {
    suspect_log_ml(k);
    trace_log_ml(k);
    same_source_log_ml(k);
  }
}

double category_log_lr(std::span<const Eigen::VectorXd> recordings,
                       const CategoryModel& numerator,
                       const CategoryModel& denominator) {
  return marginal_log_likelihood(recordings, numerator) -
         marginal_log_likelihood(recordings, denominator);
}

double same_source_log_odds_lr(const Evidence& evidence,
                               const CategoryModel& model) {
  return different_source_log_likelihood(evidence, model, model) -
         same_source_log_likelihood(evidence, model);
}

namespace {

// Normalized posterior over the prior's support, max-log subtraction.
// log_ml is only invoked on supported categories.
std::vector<double> posterior_from_logs(
    std::span<const double> prior,
    const std::function<double(std::size_t)>& log_ml) {
  std::vector<double> posterior(prior.size(), 0.0);
  double max_weight = -kInf;
  std::vector<std::pair<std::size_t, double>> weights;
  for (std::size_t k = 0; k < prior.size(); ++k) {
    if (prior[k] <= 0.0) continue;
    const double w = std::log(prior[k]) + log_ml(k);
    weights.emplace_back(k, w);
    max_weight = std::max(max_weight, w);
  }
  if (weights.empty() || max_weight == -kInf) {
    throw NumericError("category posterior has zero total mass");
  }
  double total = 0.0;
  for (auto& [k, w] : weights) {
    w = std::exp(w - max_weight);
    total += w;
  }
  for (const auto& [k, w] : weights) posterior[k] = w / total;
  return posterior;
}

}  // namespace

std::vector<double> category_posterior(
    std::span<const Eigen::VectorXd> recordings,
    const CategoryCatalog& catalog, std::span<const double> prior) {
  if (prior.size() != catalog.size()) {
    throw ValidationError("prior length does not match the catalog");
  }
  double sum = 0.0;
  for (double p : prior) {
    if (std::isnan(p) || p < 0.0) {
      throw ValidationError("prior entries must be nonnegative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("prior does not sum to 1");
  }
  return posterior_from_logs(prior, [&](std::size_t k) {
    return marginal_log_likelihood(recordings, catalog.at(k));
  });
}

double conditional_h1_posterior(const Evidence& evidence,
                                const CategoryModel& model, double pi_h) {
  if (std::isnan(pi_h) || pi_h < 0.0 || pi_h > 1.0) {
    throw ValidationError("same-source prior must lie in [0,1]");
  }
  if (pi_h == 0.0) return 0.0;
  if (pi_h == 1.0) return 1.0;
  const double log_odds =
      log_prior_odds_against(pi_h) + same_source_log_odds_lr(evidence, model);
  return prob_from_log_odds(log_odds);
}

namespace {

struct FactorizedShape {
  std::size_t intersection;
  std::size_t suspect_other;
  std::size_t trace_other;
};

std::optional<FactorizedShape> factorized_shape(const PriorConfig& priors) {
  const auto ss = priors.suspect_support();
  const auto ts = priors.trace_support();
  if (ss.size() != 2 || ts.size() != 2) return std::nullopt;
  std::vector<std::size_t> common;
  for (std::size_t k : ss) {
    if (std::find(ts.begin(), ts.end(), k) != ts.end()) common.push_back(k);
  }
  if (common.size() != 1) return std::nullopt;
  const std::size_t k0 = common.front();
  return FactorizedShape{
      .intersection = k0,
      .suspect_other = ss[0] == k0 ? ss[1] : ss[0],
      .trace_other = ts[0] == k0 ? ts[1] : ts[0],
  };
}

DecisionChannel make_channel(double log_prior_odds, double log_lr) {
  const double log_posterior_odds = log_prior_odds + log_lr;
  return DecisionChannel{
      .log_prior_odds = log_prior_odds,
      .log_lr = log_lr,
      .posterior_odds = OddsAgainst::from_log(log_posterior_odds),
      .posterior = prob_from_log_odds(log_posterior_odds),
  };
}

double require_h1_prior(const PriorConfig& priors, std::size_t k,
                        const CategoryCatalog& catalog) {
  const auto& pi = priors.h1_prior(k);
  if (!pi) {
    throw ValidationError("same-source prior missing for category '" +
                          catalog.at(k).id() + "'");
  }
  return *pi;
}

FactorizedBreakdown make_breakdown(LikelihoodCache& cache,
                                   const PriorConfig& priors,
                                   const FactorizedShape& shape) {
  const auto sp = priors.suspect_prior();
  const auto tp = priors.trace_prior();
  const std::size_t k0 = shape.intersection;

  // Odds are against membership of the intersection category, so the
  // likelihood ratio puts the *other* category's density on top.
  const DecisionChannel a = make_channel(
      std::log(sp[shape.suspect_other]) - std::log(sp[k0]),
      cache.suspect_log_ml(shape.suspect_other) - cache.suspect_log_ml(k0));
  const DecisionChannel g = make_channel(
      std::log(tp[shape.trace_other]) - std::log(tp[k0]),
      cache.trace_log_ml(shape.trace_other) - cache.trace_log_ml(k0));

  const double pi_h = require_h1_prior(priors, k0, cache.catalog());
  const DecisionChannel h = make_channel(log_prior_odds_against(pi_h),
                                         cache.same_source_log_odds_lr(k0));

  const OddsAgainst components[3] = {a.posterior_odds, g.posterior_odds,
                                     h.posterior_odds};
  const OddsAgainst exact = combine_odds_exact(components);
  const double sum = a.posterior_odds.value() + g.posterior_odds.value() +
                     h.posterior_odds.value();

  return FactorizedBreakdown{
      .intersection = k0,
      .suspect_other = shape.suspect_other,
      .trace_other = shape.trace_other,
      .suspect = a,
      .trace = g,
      .same_source = h,
      .additive_odds = OddsAgainst::from_value(sum),
      .epsilon = exact.value() - sum,
  };
}

}  // namespace

CaseResult posterior_factorized(LikelihoodCache& cache,
                                const PriorConfig& priors) {
  if (priors.size() != cache.catalog().size()) {
    throw ValidationError("prior size does not match the catalog");
  }
  const auto shape = factorized_shape(priors);
  if (!shape) {
    throw ValidationError(
        "priors do not have the factorized structure (two-category suspect "
        "and trace supports with a single common category)");
  }

  const std::size_t n = cache.catalog().size();
  const std::size_t evals_before = cache.evaluations();
  FactorizedBreakdown breakdown = make_breakdown(cache, priors, *shape);

  CaseResult result;
  result.suspect_posterior.assign(n, 0.0);
  result.trace_posterior.assign(n, 0.0);
  result.same_source_log_odds.assign(n, std::nullopt);
  result.h1_posterior.assign(n, std::nullopt);

  const std::size_t k0 = shape->intersection;
  result.suspect_posterior[k0] = breakdown.suspect.posterior;
  result.suspect_posterior[shape->suspect_other] =
      1.0 - breakdown.suspect.posterior;
  result.trace_posterior[k0] = breakdown.trace.posterior;
  result.trace_posterior[shape->trace_other] = 1.0 - breakdown.trace.posterior;
  result.same_source_log_odds[k0] = breakdown.same_source.log_lr;
  result.h1_posterior[k0] = breakdown.same_source.posterior;

  // Final posterior as the three-way product; the combined odds are kept
  // alongside as the equivalent odds-form route.
  result.final_posterior = breakdown.suspect.posterior *
                           breakdown.trace.posterior *
                           breakdown.same_source.posterior;
  const OddsAgainst components[3] = {breakdown.suspect.posterior_odds,
                                     breakdown.trace.posterior_odds,
                                     breakdown.same_source.posterior_odds};
  result.final_odds = combine_odds_exact(components);
  result.factorized = std::move(breakdown);
  result.likelihood_evaluations = cache.evaluations() - evals_before;
  return result;
}

CaseResult posterior_factorized(const Evidence& evidence,
                                const CategoryCatalog& catalog,
                                const PriorConfig& priors) {
  LikelihoodCache cache(catalog, evidence);
  return posterior_factorized(cache, priors);
}

CaseResult posterior_general(LikelihoodCache& cache,
                             const PriorConfig& priors) {
  if (priors.size() != cache.catalog().size()) {
    throw ValidationError("prior size does not match the catalog");
  }
  const std::size_t n = cache.catalog().size();
  CaseResult result;

  const auto joint = priors.joint_support();
  if (joint.empty()) {
    // Empty intersection of the two relevant populations: different
    // sources follows deductively, before any evidence is touched.
    result.final_posterior = 0.0;
    result.final_odds = OddsAgainst::from_prob(0.0);
    result.likelihood_evaluations = 0;
    return result;
  }

  const std::size_t evals_before = cache.evaluations();
  result.suspect_posterior = posterior_from_logs(
      priors.suspect_prior(),
      [&](std::size_t k) { return cache.suspect_log_ml(k); });
  result.trace_posterior = posterior_from_logs(
      priors.trace_prior(),
      [&](std::size_t k) { return cache.trace_log_ml(k); });
  result.same_source_log_odds.assign(n, std::nullopt);
  result.h1_posterior.assign(n, std::nullopt);

  double final_posterior = 0.0;
  for (std::size_t k : joint) {
    const double pi_h = require_h1_prior(priors, k, cache.catalog());
    double p_h = 0.0;
    if (pi_h > 0.0) {
      const double log_r_h = cache.same_source_log_odds_lr(k);
      result.same_source_log_odds[k] = log_r_h;
      p_h = prob_from_log_odds(log_prior_odds_against(pi_h) + log_r_h);
    }
    result.h1_posterior[k] = p_h;
    final_posterior +=
        result.suspect_posterior[k] * result.trace_posterior[k] * p_h;
  }
  result.final_posterior = final_posterior;
  result.final_odds = prob_to_odds_against(final_posterior);

  if (const auto shape = factorized_shape(priors)) {
    result.factorized = make_breakdown(cache, priors, *shape);
  }
  result.likelihood_evaluations = cache.evaluations() - evals_before;
  return result;
}

CaseResult posterior_general(const Evidence& evidence,
                             const CategoryCatalog& catalog,
                             const PriorConfig& priors) {
  LikelihoodCache cache(catalog, evidence);
  return posterior_general(cache, priors);
}

Verdict decide(const CaseResult& result, double theta, DecisionRule rule) {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw ValidationError("theta must lie in (0,1)");
  }
  const double log_theta = std::log(theta);
  switch (rule) {
    case DecisionRule::exact:
      return result.final_odds.log_value() < log_theta ? Verdict::find_h1
                                                       : Verdict::find_h2;
    case DecisionRule::three_tests: {
      if (!result.factorized) {
        throw ValidationError(
            "three-tests rule requires the factorized breakdown");
      }
      const auto& f = *result.factorized;
      // Either population question already in doubt rejects H1 outright;
      // only then is the same-source question thresholded.
      const bool populations_ok =
          f.suspect.posterior_odds.log_value() < log_theta &&
          f.trace.posterior_odds.log_value() < log_theta;
      if (!populations_ok) return Verdict::find_h2;
      return f.same_source.posterior_odds.log_value() < log_theta
                 ? Verdict::find_h1
                 : Verdict::find_h2;
    }
    case DecisionRule::additive: {
      if (!result.factorized) {
        throw ValidationError("additive rule requires the factorized breakdown");
      }
      return result.factorized->additive_odds.log_value() < log_theta
                 ? Verdict::find_h1
                 : Verdict::find_h2;
    }
  }
  throw ValidationError("unknown decision rule");
}

std::vector<SweepRow> sensitivity_sweep(const Evidence& evidence,
                                        const CategoryCatalog& catalog,
                                        std::span<const SweepPoint> grid,
                                        double theta) {
  if (grid.empty()) {
    throw ValidationError("sensitivity sweep needs a nonempty grid");
  }
  LikelihoodCache cache(catalog, evidence);
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (const auto& point : grid) {
    const CaseResult result = posterior_general(cache, point.priors);
    rows.push_back(SweepRow{
        .coordinates = point.coordinates,
        .final_posterior = result.final_posterior,
        .final_odds = result.final_odds,
        .verdict = decide(result, theta, DecisionRule::exact),
    });
  }
  return rows;
}

}  // namespace relpop
