// tests/test_model.cpp

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "relpop/errors.hpp"
#include "relpop/model.hpp"
#include "relpop/oracle.hpp"
#include "relpop/random.hpp"
#include "test_support.hpp"

using namespace relpop;
using namespace relpop::testing;

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

TEST_CASE("model construction validates covariances") {
  CHECK_NOTHROW(model1("ok", 0.0, 1.0, 1.0));
  // zero between covariance is the legal degenerate model
  CHECK_NOTHROW(model1("ok", 0.0, 0.0, 1.0));
  CHECK_THROWS_AS(model1("bad", 0.0, -0.5, 1.0), ValidationError);
  CHECK_THROWS_AS(model1("bad", 0.0, 1.0, 0.0), ValidationError);
  CHECK_THROWS_AS(model1("bad", 0.0, 1.0, -1.0), ValidationError);

  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, -0.5, 1.0;
  CHECK_THROWS_AS(CategoryModel("bad", "bad", Eigen::VectorXd::Zero(2), asym,
                                Eigen::MatrixXd::Identity(2, 2)),
                  ValidationError);
  // dimension mismatch between mean and covariances
  CHECK_THROWS_AS(CategoryModel("bad", "bad", Eigen::VectorXd::Zero(3),
                                Eigen::MatrixXd::Identity(2, 2),
                                Eigen::MatrixXd::Identity(2, 2)),
                  ValidationError);
  CHECK_THROWS_AS(CategoryModel("bad", "bad", Eigen::VectorXd::Zero(0),
                                Eigen::MatrixXd::Identity(0, 0),
                                Eigen::MatrixXd::Identity(0, 0)),
                  ValidationError);
}

TEST_CASE("catalog requires unique ids and one dimension") {
  std::vector<CategoryModel> models;
  models.push_back(model1("a", 0.0, 1.0, 1.0));
  models.push_back(model1("a", 1.0, 1.0, 1.0));
  CHECK_THROWS_AS(CategoryCatalog(std::move(models)), ValidationError);

  std::vector<CategoryModel> mixed;
  mixed.push_back(model1("a", 0.0, 1.0, 1.0));
  mixed.push_back(CategoryModel("b", "b", Eigen::VectorXd::Zero(2),
                                Eigen::MatrixXd::Identity(2, 2),
                                Eigen::MatrixXd::Identity(2, 2)));
  CHECK_THROWS_AS(CategoryCatalog(std::move(mixed)), ValidationError);

  CHECK_THROWS_AS(CategoryCatalog({}), ValidationError);

  std::vector<CategoryModel> ok;
  ok.push_back(model1("a", 0.0, 1.0, 1.0));
  ok.push_back(model1("b", 1.0, 1.0, 1.0));
  const CategoryCatalog catalog(std::move(ok));
  CHECK(catalog.index_of("b") == 1);
  CHECK_FALSE(catalog.index_of("c").has_value());
}

TEST_CASE("evidence validates recordings") {
  CHECK_THROWS_AS(Evidence({}, {v1(0.0)}), ValidationError);
  CHECK_THROWS_AS(Evidence({v1(0.0)}, {}), ValidationError);
  CHECK_THROWS_AS(Evidence({v1(0.0)}, {Eigen::VectorXd::Zero(2)}),
                  ValidationError);
  CHECK_THROWS_AS(Evidence({v1(std::nan(""))}, {v1(0.0)}), ValidationError);
}

TEST_CASE("marginal log likelihood: single-recording closed forms") {
  // B = 0 collapses to the within model alone
  const CategoryModel degenerate = model1("d", 0.0, 0.0, 1.0);
  CHECK(marginal_log_likelihood({{v1(0.0)}}, degenerate) ==
        doctest::Approx(-0.5 * kLog2Pi).epsilon(1e-12));

  // marginal variance is between + within
  const CategoryModel unit = model1("u", 0.0, 1.0, 1.0);
  CHECK(marginal_log_likelihood({{v1(0.0)}}, unit) ==
        doctest::Approx(-0.5 * std::log(4.0 * std::numbers::pi))
            .epsilon(1e-12));
}

TEST_CASE("marginal log likelihood: quadrature-frozen two-recording value") {
  // mu=0.5, B=2, W=1, recordings [1.0, -0.2]; value frozen from the
  // trapezoid oracle at 2^16 points (agrees with the closed form to 7e-15).
  const CategoryModel m = model1("m", 0.5, 2.0, 1.0);
  const std::vector<Eigen::VectorXd> recs{v1(1.0), v1(-0.2)};
  CHECK(marginal_log_likelihood(recs, m) ==
        doctest::Approx(-3.004596022626396).epsilon(1e-12));

  const auto spec = QuadratureSpec::covering(m, recs, 4096);
  CHECK(std::abs(quadrature_marginal(recs, m, spec) -
                 marginal_log_likelihood(recs, m)) < 1e-9);
}

TEST_CASE("marginal log likelihood rejects bad inputs") {
  const CategoryModel m = model1("m", 0.0, 1.0, 1.0);
  CHECK_THROWS_AS(marginal_log_likelihood({}, m), ValidationError);
  CHECK_THROWS_AS(marginal_log_likelihood({{Eigen::VectorXd::Zero(2)}}, m),
                  ValidationError);
}

TEST_CASE("same-source likelihood: shared identity variable") {
  const CategoryModel m = model1("m", 0.0, 1.0, 1.0);
  const Evidence ev({v1(0.0)}, {v1(0.0)});
  // joint of two recordings with covariance [[2,1],[1,2]]
  const double expected = -kLog2Pi - 0.5 * std::log(3.0);
  CHECK(same_source_log_likelihood(ev, m) ==
        doctest::Approx(expected).epsilon(1e-12));

  const auto spec =
      QuadratureSpec::covering(m, ev.pooled_recordings(), 4096);
  CHECK(std::abs(quadrature_same_source(ev, m, spec) - expected) < 1e-9);
}

TEST_CASE("B = 0 makes recordings independent") {
  const CategoryModel m = model1("m", 0.3, 0.0, 1.4);
  const Evidence ev({v1(0.9)}, {v1(-0.4)});
  const double same = same_source_log_likelihood(ev, m);
  const double diff = different_source_log_likelihood(ev, m, m);
  CHECK(same == doctest::Approx(diff).epsilon(1e-12));

  const double sum_of_singles =
      marginal_log_likelihood(ev.suspect_recordings(), m) +
      marginal_log_likelihood(ev.trace_recordings(), m);
  CHECK(same == doctest::Approx(sum_of_singles).epsilon(1e-12));
}

TEST_CASE("different-source likelihood is the sum of the marginals") {
  Rng rng(71);
  const CategoryModel a = random_model_1d(rng, "a");
  const CategoryModel b = random_model_1d(rng, "b");
  const Evidence ev(sample_recordings(rng, a, 2), sample_recordings(rng, b, 3));
  CHECK(different_source_log_likelihood(ev, a, b) ==
        marginal_log_likelihood(ev.suspect_recordings(), a) +
            marginal_log_likelihood(ev.trace_recordings(), b));

  const CategoryModel unit = model1("u", 0.0, 1.0, 1.0);
  const Evidence zeros({v1(0.0)}, {v1(0.0)});
  CHECK(different_source_log_likelihood(zeros, unit, unit) ==
        doctest::Approx(-std::log(4.0 * std::numbers::pi)).epsilon(1e-12));
}

TEST_CASE("diagonal d=2 factorizes into per-dimension 1-D results") {
  Eigen::VectorXd mean(2);
  mean << 0.4, -1.2;
  Eigen::MatrixXd between = Eigen::MatrixXd::Zero(2, 2);
  between(0, 0) = 0.7;
  between(1, 1) = 2.1;
  Eigen::MatrixXd within = Eigen::MatrixXd::Zero(2, 2);
  within(0, 0) = 1.3;
  within(1, 1) = 0.6;
  const CategoryModel joint("j", "j", mean, between, within);
  const CategoryModel dim0 = model1("x", 0.4, 0.7, 1.3);
  const CategoryModel dim1 = model1("y", -1.2, 2.1, 0.6);

  Eigen::VectorXd r1(2), r2(2);
  r1 << 0.9, -0.8;
  r2 << 0.1, -1.9;
  const std::vector<Eigen::VectorXd> recs{r1, r2};
  const std::vector<Eigen::VectorXd> recs0{v1(0.9), v1(0.1)};
  const std::vector<Eigen::VectorXd> recs1{v1(-0.8), v1(-1.9)};

  CHECK(marginal_log_likelihood(recs, joint) ==
        doctest::Approx(marginal_log_likelihood(recs0, dim0) +
                        marginal_log_likelihood(recs1, dim1))
            .epsilon(1e-12));
}

TEST_CASE("exchangeability: recording order is irrelevant") {
  Rng rng(1234);
  for (int trial = 0; trial < 20; ++trial) {
    const CategoryModel m = random_model_1d(rng, "m");
    std::vector<Eigen::VectorXd> recs = sample_recordings(rng, m, 4);
    const double base = marginal_log_likelihood(recs, m);
    std::swap(recs[0], recs[3]);
    std::swap(recs[1], recs[2]);
    CHECK(marginal_log_likelihood(recs, m) ==
          doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("translation equivariance") {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index d = 2;
    const CategoryModel m = random_model(rng, d, "m");
    std::vector<Eigen::VectorXd> recs = sample_recordings(rng, m, 3);
    const double base = marginal_log_likelihood(recs, m);

    const Eigen::VectorXd shift = rng.gaussian_vector(d) * 3.0;
    std::vector<Eigen::VectorXd> shifted = recs;
    for (auto& r : shifted) r += shift;
    const CategoryModel moved("m2", "m2", m.mean() + shift, m.between_cov(),
                              m.within_cov());
    CHECK(std::abs(marginal_log_likelihood(shifted, moved) - base) < 1e-10);
  }
}

TEST_CASE("identical evidence favors the same source") {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const CategoryModel m = random_model_1d(rng, "m");
    const std::vector<Eigen::VectorXd> recs = sample_recordings(rng, m, 1);
    const Evidence ev(recs, recs);
    CHECK(same_source_log_likelihood(ev, m) >=
          different_source_log_likelihood(ev, m, m));
  }
}

TEST_CASE("closed form tracks the 1-D quadrature oracle") {
  Rng rng(555);
  for (int trial = 0; trial < 25; ++trial) {
    const CategoryModel m = random_model_1d(rng, "m");
    const int count = 1 + static_cast<int>(rng.uniform() * 3);
    const std::vector<Eigen::VectorXd> recs = sample_recordings(rng, m, count);
    const auto spec = QuadratureSpec::covering(m, recs, 4096);
    const double closed = marginal_log_likelihood(recs, m);
    const double quad = quadrature_marginal(recs, m, spec);
    CHECK(std::abs(quad - closed) < 1e-6);
  }
}

TEST_CASE("closed form tracks the d=3 Monte Carlo oracle") {
  Rng rng(808);
  for (int trial = 0; trial < 5; ++trial) {
    const CategoryModel m = random_model(rng, 3, "m");
    const std::vector<Eigen::VectorXd> recs = sample_recordings(rng, m, 2);
    const double closed = marginal_log_likelihood(recs, m);
    const McEstimate mc = mc_marginal(recs, m, 50000, 40 + trial);
    CHECK(std::abs(mc.log_value - closed) <= 3.0 * mc.standard_error);
  }
}
