// core/src/oracle.cpp

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

#include "relpop/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "relpop/errors.hpp"
#include "relpop/random.hpp"

namespace relpop {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kInf = std::numeric_limits<double>::infinity();

double log_sum_exp(const std::vector<double>& values) {
  double max_value = -kInf;
  for (double v : values) max_value = std::max(max_value, v);
  if (max_value == -kInf) return -kInf;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max_value);
  return max_value + std::log(sum);
}

// log N(x; mean, W) using the model's cached within-covariance pieces.
double within_log_density(const CategoryModel& model, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& mean) {
  return -0.5 * (static_cast<double>(model.dim()) * kLog2Pi +
                 model.log_det_within() +
                 model.within_inv_quadratic(x - mean));
}

// Log joint density of the recordings given the identity variable y.
double log_likelihood_given_identity(
    std::span<const Eigen::VectorXd> recordings, const CategoryModel& model,
    const Eigen::VectorXd& y) {
  double total = 0.0;
  for (const auto& r : recordings) total += within_log_density(model, r, y);
  return total;
}

void check_spec(const QuadratureSpec& spec, const CategoryModel& model) {
  const Eigen::Index d = model.dim();
  if (spec.lower.size() != d || spec.upper.size() != d) {
    throw ValidationError("quadrature bounds do not match model dimension");
  }
  if (spec.points_per_dimension < 16) {
    throw ValidationError("quadrature needs at least 16 points per dimension");
  }
  const double spread = 8.0 * std::sqrt(model.max_total_eigenvalue());
  for (Eigen::Index i = 0; i < d; ++i) {
    if (spec.lower[i] > model.mean()[i] - spread ||
        spec.upper[i] < model.mean()[i] + spread) {
      throw ValidationError(
          "quadrature bounds do not cover mean +/- 8 total standard "
          "deviations");
    }
  }
}

}  // namespace

QuadratureSpec QuadratureSpec::covering(
    const CategoryModel& model, std::span<const Eigen::VectorXd> recordings,
    int points_per_dimension) {
  const double spread = 8.0 * std::sqrt(model.max_total_eigenvalue());
  Eigen::VectorXd lower = model.mean();
  Eigen::VectorXd upper = model.mean();
  for (const auto& r : recordings) {
    lower = lower.cwiseMin(r);
    upper = upper.cwiseMax(r);
  }
  lower.array() -= spread;
  upper.array() += spread;
  return QuadratureSpec{std::move(lower), std::move(upper),
                        points_per_dimension};
}

double quadrature_marginal(std::span<const Eigen::VectorXd> recordings,
                           const CategoryModel& model,
                           const QuadratureSpec& spec) {
  if (recordings.empty()) {
    throw ValidationError("quadrature of zero recordings");
  }
  const Eigen::Index d = model.dim();
  if (d > 2) {
    throw ValidationError("grid quadrature supports d <= 2 only");
  }
  check_spec(spec, model);

  if (model.between_is_zero()) {
    // Degenerate identity prior: the integral collapses to the exact
    // product of within-model densities at the mean.
    return log_likelihood_given_identity(recordings, model, model.mean());
  }
  if (!model.between_is_positive_definite()) {
    throw ValidationError(
        "grid quadrature needs a positive definite (or zero) between_cov");
  }

  // log N(y; mu, B) pieces for the identity prior.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(model.between_cov());
  const Eigen::VectorXd lambda = eig.eigenvalues();
  const Eigen::MatrixXd between_inv = eig.eigenvectors() *
                                      lambda.cwiseInverse().asDiagonal() *
                                      eig.eigenvectors().transpose();
  const double log_det_between = lambda.array().log().sum();
  const auto prior_log_density = [&](const Eigen::VectorXd& y) {
    const Eigen::VectorXd c = y - model.mean();
    return -0.5 * (static_cast<double>(d) * kLog2Pi + log_det_between +
                   c.dot(between_inv * c));
  };

  const int m = spec.points_per_dimension;
  // Trapezoid log-weights per axis: h at interior nodes, h/2 at the ends.
  // On an integrand decaying to ~0 at the bounds the end weights hardly
  // matter, but they keep the rule exact for its own definition.
  const auto axis_log_weight = [&](Eigen::Index axis, int t) {
    const double h =
        (spec.upper[axis] - spec.lower[axis]) / static_cast<double>(m - 1);
    double lw = std::log(h);
    if (t == 0 || t == m - 1) lw -= std::log(2.0);
    return lw;
  };
  const auto axis_node = [&](Eigen::Index axis, int t) {
    const double h =
        (spec.upper[axis] - spec.lower[axis]) / static_cast<double>(m - 1);
    return spec.lower[axis] + h * static_cast<double>(t);
  };

  std::vector<double> log_terms;
  Eigen::VectorXd y(d);
  if (d == 1) {
    log_terms.reserve(static_cast<std::size_t>(m));
    for (int t = 0; t < m; ++t) {
      y[0] = axis_node(0, t);
      log_terms.push_back(log_likelihood_given_identity(recordings, model, y) +
                          prior_log_density(y) + axis_log_weight(0, t));
    }
  } else {
    log_terms.reserve(static_cast<std::size_t>(m) * m);
    for (int t0 = 0; t0 < m; ++t0) {
      y[0] = axis_node(0, t0);
      for (int t1 = 0; t1 < m; ++t1) {
        y[1] = axis_node(1, t1);
        log_terms.push_back(
            log_likelihood_given_identity(recordings, model, y) +
            prior_log_density(y) + axis_log_weight(0, t0) +
            axis_log_weight(1, t1));
      }
    }
  }
  return log_sum_exp(log_terms);
}

double quadrature_same_source(const Evidence& evidence,
                              const CategoryModel& model,
                              const QuadratureSpec& spec) {
  const std::vector<Eigen::VectorXd> pooled = evidence.pooled_recordings();
  return quadrature_marginal(pooled, model, spec);
}

McEstimate mc_marginal(std::span<const Eigen::VectorXd> recordings,
                       const CategoryModel& model, std::size_t n_samples,
                       std::uint64_t seed) {
  if (recordings.empty()) {
    throw ValidationError("Monte Carlo marginal of zero recordings");
  }
  if (n_samples < 10000) {
    throw ValidationError("Monte Carlo marginal needs >= 10000 samples");
  }
  for (const auto& r : recordings) {
    if (r.size() != model.dim()) {
      throw ValidationError("recording dimension does not match the model");
    }
  }

  Rng rng(seed);
  std::vector<double> log_weights(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Eigen::VectorXd y =
        model.mean() + model.between_sqrt() * rng.gaussian_vector(model.dim());
    log_weights[i] = log_likelihood_given_identity(recordings, model, y);
  }

  double max_log = -kInf;
  for (double w : log_weights) max_log = std::max(max_log, w);
  const double n = static_cast<double>(n_samples);
  double sum = 0.0;
  for (double w : log_weights) sum += std::exp(w - max_log);
  const double mean = sum / n;

  double var = 0.0;
  for (double w : log_weights) {
    const double r = std::exp(w - max_log) - mean;
    var += r * r;
  }
  var /= (n - 1.0);

  // Delta method: se(log mhat) = sd(weights) / (sqrt(n) * mhat).
  return McEstimate{
      .log_value = max_log + std::log(mean),
      .standard_error = std::sqrt(var / n) / mean,
  };
}

JointHypothesisSpace::JointHypothesisSpace(CategoryCatalog catalog,
                                           PriorConfig priors)
    : catalog_(std::move(catalog)), priors_(std::move(priors)) {
  if (priors_.size() != catalog_.size()) {
    throw ValidationError("prior size does not match the catalog");
  }
  for (std::size_t k : priors_.joint_support()) {
    if (!priors_.h1_prior(k)) {
      throw ValidationError("same-source prior missing for category '" +
                            catalog_.at(k).id() + "'");
    }
  }
  if (std::abs(total_prior_mass() - 1.0) > 1e-12) {
    throw NumericError("joint hypothesis space mass does not sum to 1");
  }
}

double JointHypothesisSpace::prior_mass(std::size_t suspect_category,
                                        std::size_t trace_category,
                                        bool same_source) const {
  const double ps = priors_.suspect_prior()[suspect_category];
  const double pr = priors_.trace_prior()[trace_category];
  const double cell = ps * pr;
  if (cell == 0.0) return 0.0;
  if (suspect_category != trace_category) {
    return same_source ? 0.0 : cell;  // same source needs a common category
  }
  const double pi_h = priors_.h1_prior(suspect_category).value();
  return same_source ? cell * pi_h : cell * (1.0 - pi_h);
}

double JointHypothesisSpace::total_prior_mass() const {
  double total = 0.0;
  const std::size_t n = catalog_.size();
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      total += prior_mass(k, j, true) + prior_mass(k, j, false);
    }
  }
  return total;
}

double exact_joint_posterior(const Evidence& evidence,
                             const JointHypothesisSpace& space) {
  const CategoryCatalog& catalog = space.catalog();
  const std::size_t n = catalog.size();
  if (evidence.dim() != catalog.dim()) {
    throw ValidationError("evidence dimension does not match the catalog");
  }

  // Per-category pieces, each evaluated at most once.
  std::vector<std::optional<double>> suspect_ml(n), trace_ml(n), same_ml(n);
  const auto suspect = [&](std::size_t k) {
    if (!suspect_ml[k]) {
      suspect_ml[k] =
          marginal_log_likelihood(evidence.suspect_recordings(), catalog.at(k));
    }
    return *suspect_ml[k];
  };
  const auto trace = [&](std::size_t j) {
    if (!trace_ml[j]) {
      trace_ml[j] =
          marginal_log_likelihood(evidence.trace_recordings(), catalog.at(j));
    }
    return *trace_ml[j];
  };
  const auto same = [&](std::size_t k) {
    if (!same_ml[k]) {
      same_ml[k] = same_source_log_likelihood(evidence, catalog.at(k));
    }
    return *same_ml[k];
  };

  std::vector<double> h1_terms;
  for (std::size_t k = 0; k < n; ++k) {
    const double mass_h1 = space.prior_mass(k, k, true);
    if (mass_h1 > 0.0) h1_terms.push_back(std::log(mass_h1) + same(k));
  }
  // No same-source cell carries mass (disjoint supports, or every pi_h is
  // zero): the posterior is zero with no further evaluation.
  if (h1_terms.empty()) return 0.0;

  std::vector<double> all_terms = h1_terms;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      const double mass_h2 = space.prior_mass(k, j, false);
      if (mass_h2 > 0.0) {
        all_terms.push_back(std::log(mass_h2) + suspect(k) + trace(j));
      }
    }
  }

  const double log_total = log_sum_exp(all_terms);
  if (log_total == -kInf || std::isnan(log_total)) {
    throw NumericError("zero total evidence probability in enumeration");
  }
  const double log_h1 = log_sum_exp(h1_terms);
  return std::exp(log_h1 - log_total);
}

DiscrepancyReport discrepancy_report(const Evidence& evidence,
                                     const CategoryCatalog& catalog,
                                     const PriorConfig& priors) {
  const CaseResult general = posterior_general(evidence, catalog, priors);
  const JointHypothesisSpace space(catalog, priors);
  const double exact = exact_joint_posterior(evidence, space);

  const double a = general.final_posterior;
  double relative;
  if (exact > 0.0) {
    relative = std::abs(a / exact - 1.0);
  } else {
    relative = (a == 0.0) ? 0.0 : kInf;
  }
  return DiscrepancyReport{
      .general_formula = a,
      .exact_enumeration = exact,
      .absolute_gap = std::abs(a - exact),
      .relative_gap = relative,
  };
}

}  // namespace relpop
