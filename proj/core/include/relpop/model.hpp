// core/include/relpop/model.hpp

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

#ifndef RELPOP_MODEL_HPP_
#define RELPOP_MODEL_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace relpop {

// Eigenvalue threshold, relative to the largest eigenvalue, below which a
// covariance direction counts as zero. The between covariance may be
// singular (identically zero is the "no identity variation" model); the
// within covariance must be strictly positive definite.
inline constexpr double kEigenvalueTol = 1e-10;

/// Generative model for one sub-population ("category") of individuals.
///
/// Each individual carries a constant hidden identity vector
///   Y ~ N(mean, between_cov),
/// and every recording of that individual is an independent noisy view
///   X | Y ~ N(Y, within_cov).
///
/// The between covariance spreads identities across the category; the
/// within covariance spreads recordings around one identity.
class CategoryModel {
 public:
  CategoryModel(std::string id, std::string label, Eigen::VectorXd mean,
                Eigen::MatrixXd between_cov, Eigen::MatrixXd within_cov);

  const std::string& id() const { return id_; }
  const std::string& label() const { return label_; }
  Eigen::Index dim() const { return mean_.size(); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& between_cov() const { return between_cov_; }
  const Eigen::MatrixXd& within_cov() const { return within_cov_; }

  // Derived quantities cached at construction.
  double log_det_within() const { return log_det_within_; }
  /// Symmetric square roots (U sqrt(L) U^T); used for sampling.
  const Eigen::MatrixXd& between_sqrt() const { return between_sqrt_; }
  const Eigen::MatrixXd& within_sqrt() const { return within_sqrt_; }
  /// x^T within_cov^{-1} x.
  double within_inv_quadratic(const Eigen::VectorXd& x) const;
  /// Largest eigenvalue of between_cov + within_cov (total spread).
  double max_total_eigenvalue() const { return max_total_eigenvalue_; }
  /// True when between_cov is zero to tolerance (degenerate identity prior).
  bool between_is_zero() const { return between_is_zero_; }
  bool between_is_positive_definite() const { return between_is_pd_; }

 private:
  std::string id_;
  std::string label_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd between_cov_;
  Eigen::MatrixXd within_cov_;

  Eigen::MatrixXd between_sqrt_;
  Eigen::MatrixXd within_sqrt_;
  Eigen::MatrixXd within_inv_;
  double log_det_within_ = 0.0;
  double max_total_eigenvalue_ = 0.0;
  bool between_is_zero_ = false;
  bool between_is_pd_ = false;
};

/// Ordered set of K >= 1 category models with distinct ids and a common
/// feature dimension.
class CategoryCatalog {
 public:
  explicit CategoryCatalog(std::vector<CategoryModel> categories);

  std::size_t size() const { return categories_.size(); }
  Eigen::Index dim() const { return categories_.front().dim(); }
  const CategoryModel& at(std::size_t k) const { return categories_.at(k); }
  const std::vector<CategoryModel>& categories() const { return categories_; }
  std::optional<std::size_t> index_of(std::string_view id) const;

 private:
  std::vector<CategoryModel> categories_;
};

/// The two recording sets under comparison: one from the suspect, one from
/// the questioned trace. Both lists are nonempty, finite, and share one
/// feature dimension.
class Evidence {
 public:
  Evidence(std::vector<Eigen::VectorXd> suspect_recordings,
           std::vector<Eigen::VectorXd> trace_recordings);

  const std::vector<Eigen::VectorXd>& suspect_recordings() const {
    return suspect_recordings_;
  }
  const std::vector<Eigen::VectorXd>& trace_recordings() const {
    return trace_recordings_;
  }
  Eigen::Index dim() const { return suspect_recordings_.front().size(); }
  /// Suspect recordings followed by trace recordings.
  std::vector<Eigen::VectorXd> pooled_recordings() const;

 private:
  std::vector<Eigen::VectorXd> suspect_recordings_;
  std::vector<Eigen::VectorXd> trace_recordings_;
};

/// log p(recordings | model) with the identity variable integrated out:
/// the joint density of n >= 1 recordings of a single unknown individual
/// from this category. Closed form; see model.cpp for the derivation.
double marginal_log_likelihood(std::span<const Eigen::VectorXd> recordings,
                               const CategoryModel& model);

/// Joint density of all suspect and trace recordings under a single shared
/// identity variable (same-source hypothesis), in the given category.
double same_source_log_likelihood(const Evidence& evidence,
                                  const CategoryModel& model);

/// Joint density when suspect and trace are two independent individuals,
/// each marginalized over its own identity variable.
double different_source_log_likelihood(const Evidence& evidence,
                                       const CategoryModel& suspect_model,
                                       const CategoryModel& trace_model);

}  // namespace relpop

#endif  // RELPOP_MODEL_HPP_
