// core/include/relpop/oracle.hpp

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

#ifndef RELPOP_ORACLE_HPP_
#define RELPOP_ORACLE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>

#include <Eigen/Core>

#include "relpop/inference.hpp"
#include "relpop/model.hpp"

namespace relpop {

/// Fixed-grid trapezoid rule over the identity variable. Bounds must cover
/// the model mean plus/minus 8 standard deviations of the total spread
/// (sqrt of the largest eigenvalue of between_cov + within_cov) in every
/// dimension; the covering() factory also stretches them over the
/// recordings so off-center evidence stays inside the grid.
struct QuadratureSpec {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  int points_per_dimension = 2048;

  static QuadratureSpec covering(const CategoryModel& model,
                                 std::span<const Eigen::VectorXd> recordings,
                                 int points_per_dimension);
};

/// Numerical check of the marginalized likelihood: integrates
/// prod_i N(x_i; y, W) N(y; mu, B) over a trapezoid grid in y. Supports
/// d <= 2 with positive definite B; a zero B falls back to the exact
/// product of within-model densities (the integral is then a point mass).
double quadrature_marginal(std::span<const Eigen::VectorXd> recordings,
                           const CategoryModel& model,
                           const QuadratureSpec& spec);

/// Same-source joint density by quadrature: all recordings share one
/// identity variable.
double quadrature_same_source(const Evidence& evidence,
                              const CategoryModel& model,
                              const QuadratureSpec& spec);

struct McEstimate {
  double log_value;       ///< log of the Monte Carlo mean
  double standard_error;  ///< delta-method standard error of log_value
};

/// Monte Carlo check of the marginalized likelihood: averages
/// prod_i N(x_i; Y, W) over draws Y ~ N(mu, B). Deterministic for a fixed
/// seed. Requires n_samples >= 10000.
McEstimate mc_marginal(std::span<const Eigen::VectorXd> recordings,
                       const CategoryModel& model, std::size_t n_samples,
                       std::uint64_t seed);

/// The fully explicit discrete hypothesis space: a joint prior over
/// (suspect category k, trace category j, same-source flag). Mass is
/// pi_sk * pi_rj * pi_hk on the same-source diagonal, pi_sk * pi_rj times
/// (1 - pi_hk) on the different-source diagonal, and pi_sk * pi_rj off the
/// diagonal (same source off-diagonal is impossible). Total mass is 1.
class JointHypothesisSpace {
 public:
  JointHypothesisSpace(CategoryCatalog catalog, PriorConfig priors);

  const CategoryCatalog& catalog() const { return catalog_; }
  const PriorConfig& priors() const { return priors_; }

  double prior_mass(std::size_t suspect_category, std::size_t trace_category,
                    bool same_source) const;
  double total_prior_mass() const;

 private:
  CategoryCatalog catalog_;
  PriorConfig priors_;
};

/// Exact same-source posterior by direct enumeration of the joint
/// hypothesis space; the reference the factorized and general formulas are
/// compared against.
double exact_joint_posterior(const Evidence& evidence,
                             const JointHypothesisSpace& space);

/// Side-by-side comparison of the summation formula and the enumeration.
/// Never treats a gap as an error; it only measures it.
struct DiscrepancyReport {
  double general_formula;    ///< posterior_general's P_f
  double exact_enumeration;  ///< exact_joint_posterior
  double absolute_gap;
  double relative_gap;  ///< |general/exact - 1|; 0 when both are 0
};

DiscrepancyReport discrepancy_report(const Evidence& evidence,
                                     const CategoryCatalog& catalog,
                                     const PriorConfig& priors);

}  // namespace relpop

#endif  // RELPOP_ORACLE_HPP_
