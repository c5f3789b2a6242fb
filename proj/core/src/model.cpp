// core/src/model.cpp

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

#include "relpop/model.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "relpop/errors.hpp"

namespace relpop {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2*pi)

bool is_symmetric(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

void check_all_finite(const Eigen::MatrixXd& m, const std::string& what) {
  if (!m.allFinite()) {
    throw ValidationError(what + " contains a non-finite entry");
  }
}

// log N(x; mean, cov) for positive definite cov, via Cholesky.
double gaussian_log_density(const Eigen::VectorXd& x,
                            const Eigen::VectorXd& mean,
                            const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw NumericError("covariance not positive definite in density");
  }
  const Eigen::VectorXd z = llt.matrixL().solve(x - mean);
  const double log_det =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + log_det +
                 z.squaredNorm());
}

}  // namespace

CategoryModel::CategoryModel(std::string id, std::string label,
                             Eigen::VectorXd mean, Eigen::MatrixXd between_cov,
                             Eigen::MatrixXd within_cov)
    : id_(std::move(id)),
      label_(std::move(label)),
      mean_(std::move(mean)),
      between_cov_(std::move(between_cov)),
      within_cov_(std::move(within_cov)) {
  const Eigen::Index d = mean_.size();
  if (d < 1) throw ValidationError("model '" + id_ + "': empty mean vector");
  if (!mean_.allFinite()) {
    throw ValidationError("model '" + id_ + "': non-finite mean");
  }
  if (between_cov_.rows() != d || between_cov_.cols() != d ||
      within_cov_.rows() != d || within_cov_.cols() != d) {
    throw ValidationError("model '" + id_ +
                          "': covariance dimensions do not match the mean");
  }
  check_all_finite(between_cov_, "model '" + id_ + "': between_cov");
  check_all_finite(within_cov_, "model '" + id_ + "': within_cov");
  if (!is_symmetric(between_cov_)) {
    throw ValidationError("model '" + id_ + "': between_cov not symmetric");
  }
  if (!is_symmetric(within_cov_)) {
    throw ValidationError("model '" + id_ + "': within_cov not symmetric");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> between_eig(between_cov_);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> within_eig(within_cov_);
  if (between_eig.info() != Eigen::Success ||
      within_eig.info() != Eigen::Success) {
    throw NumericError("model '" + id_ + "': eigendecomposition failed");
  }

  const Eigen::VectorXd bl = between_eig.eigenvalues();
  const Eigen::VectorXd wl = within_eig.eigenvalues();
  const double b_max = bl.maxCoeff();
  const double w_max = wl.maxCoeff();

  if (bl.minCoeff() < -kEigenvalueTol * std::max(b_max, 0.0)) {
    throw ValidationError("model '" + id_ +
                          "': between_cov not positive semidefinite");
  }
  if (!(wl.minCoeff() > kEigenvalueTol * w_max) || !(w_max > 0.0)) {
    throw ValidationError("model '" + id_ +
                          "': within_cov not positive definite");
  }

  between_is_zero_ = b_max <= 0.0;
  between_is_pd_ = bl.minCoeff() > kEigenvalueTol * b_max && b_max > 0.0;

  const Eigen::VectorXd b_clamped = bl.cwiseMax(0.0);
  between_sqrt_ = between_eig.eigenvectors() *
                  b_clamped.cwiseSqrt().asDiagonal() *
                  between_eig.eigenvectors().transpose();
  within_sqrt_ = within_eig.eigenvectors() * wl.cwiseSqrt().asDiagonal() *
                 within_eig.eigenvectors().transpose();
  within_inv_ = within_eig.eigenvectors() *
                wl.cwiseInverse().asDiagonal() *
                within_eig.eigenvectors().transpose();
  log_det_within_ = wl.array().log().sum();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> total_eig(
      Eigen::MatrixXd(between_cov_ + within_cov_));
  max_total_eigenvalue_ = total_eig.eigenvalues().maxCoeff();
}

double CategoryModel::within_inv_quadratic(const Eigen::VectorXd& x) const {
  return x.dot(within_inv_ * x);
}

CategoryCatalog::CategoryCatalog(std::vector<CategoryModel> categories)
    : categories_(std::move(categories)) {
  if (categories_.empty()) {
    throw ValidationError("catalog must contain at least one category");
  }
  const Eigen::Index d = categories_.front().dim();
  std::set<std::string> ids;
  for (const auto& model : categories_) {
    if (model.dim() != d) {
      throw ValidationError("catalog categories disagree on dimension");
    }
    if (!ids.insert(model.id()).second) {
      throw ValidationError("duplicate category id '" + model.id() + "'");
    }
  }
}

std::optional<std::size_t> CategoryCatalog::index_of(
    std::string_view id) const {
  for (std::size_t k = 0; k < categories_.size(); ++k) {
    if (categories_[k].id() == id) return k;
  }
  return std::nullopt;
}

namespace {

void check_recordings(const std::vector<Eigen::VectorXd>& recordings,
                      Eigen::Index dim, const char* side) {
  if (recordings.empty()) {
    throw ValidationError(std::string(side) + " recordings must be nonempty");
  }
  for (const auto& r : recordings) {
    if (r.size() != dim) {
      throw ValidationError(std::string(side) +
                            " recordings disagree on dimension");
    }
    if (!r.allFinite()) {
      throw ValidationError(std::string(side) +
                            " recordings contain a non-finite value");
    }
  }
}

}  // namespace

Evidence::Evidence(std::vector<Eigen::VectorXd> suspect_recordings,
                   std::vector<Eigen::VectorXd> trace_recordings)
    : suspect_recordings_(std::move(suspect_recordings)),
      trace_recordings_(std::move(trace_recordings)) {
  if (suspect_recordings_.empty() || trace_recordings_.empty()) {
    throw ValidationError("both recording lists must be nonempty");
  }
  const Eigen::Index d = suspect_recordings_.front().size();
  check_recordings(suspect_recordings_, d, "suspect");
  check_recordings(trace_recordings_, d, "trace");
}

std::vector<Eigen::VectorXd> Evidence::pooled_recordings() const {
  std::vector<Eigen::VectorXd> all = suspect_recordings_;
  all.insert(all.end(), trace_recordings_.begin(), trace_recordings_.end());
  return all;
}

/*
  Closed form for the marginalized likelihood of n recordings x_1..x_n of
  one individual, with Y ~ N(mu, B) and x_i | Y ~ N(Y, W) independent:

    p(x_1..x_n) = integral over y of  [prod_i N(x_i; y, W)] N(y; mu, B) dy.

  Splitting the product around the sample mean xbar,

    sum_i (x_i - y)' W^{-1} (x_i - y)
      = n (xbar - y)' W^{-1} (xbar - y) + sum_i (x_i - xbar)' W^{-1} (x_i - xbar),

  so  prod_i N(x_i; y, W) = N(xbar; y, W/n) * C  with the y-free factor

    log C = -((n-1) d / 2) log(2 pi) - ((n-1)/2) log|W| - (d/2) log n
            - (1/2) sum_i (x_i - xbar)' W^{-1} (x_i - xbar),

  and the remaining integral is the standard convolution

    integral N(xbar; y, W/n) N(y; mu, B) dy = N(xbar; mu, B + W/n).

  B + W/n is positive definite for any PSD B (W is PD), so the degenerate
  B = 0 model needs no special casing. This is the same n-recording
  likelihood one gets by stacking the joint normal with covariance
  I_n (x) W + 1_n 1_n' (x) B, without forming the nd-by-nd matrix.
*/
double marginal_log_likelihood(std::span<const Eigen::VectorXd> recordings,
                               const CategoryModel& model) {
  if (recordings.empty()) {
    throw ValidationError("marginal likelihood of zero recordings");
  }
  const Eigen::Index d = model.dim();
  for (const auto& r : recordings) {
    if (r.size() != d) {
      throw ValidationError("recording dimension does not match model '" +
                            model.id() + "'");
    }
  }
  const double n = static_cast<double>(recordings.size());

  Eigen::VectorXd mean_rec = Eigen::VectorXd::Zero(d);
  for (const auto& r : recordings) mean_rec += r;
  mean_rec /= n;

  const Eigen::MatrixXd pooled_cov =
      model.between_cov() + model.within_cov() / n;
  double ll = gaussian_log_density(mean_rec, model.mean(), pooled_cov);

  if (recordings.size() > 1) {
    double deviation = 0.0;
    for (const auto& r : recordings) {
      deviation += model.within_inv_quadratic(r - mean_rec);
    }
    ll -= 0.5 * ((n - 1.0) * static_cast<double>(d) * kLog2Pi +
                 (n - 1.0) * model.log_det_within() +
                 static_cast<double>(d) * std::log(n) + deviation);
  }
  return ll;
}

double same_source_log_likelihood(const Evidence& evidence,
                                  const CategoryModel& model) {
  const std::vector<Eigen::VectorXd> pooled = evidence.pooled_recordings();
  return marginal_log_likelihood(pooled, model);
}

double different_source_log_likelihood(const Evidence& evidence,
                                       const CategoryModel& suspect_model,
                                       const CategoryModel& trace_model) {
  return marginal_log_likelihood(evidence.suspect_recordings(),
                                 suspect_model) +
         marginal_log_likelihood(evidence.trace_recordings(), trace_model);
}

}  // namespace relpop
