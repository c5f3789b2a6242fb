// benchmarks/bench_core.cpp

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

#include <benchmark/benchmark.h>

#include <optional>
#include <vector>

#include "relpop/inference.hpp"
#include "relpop/model.hpp"
#include "relpop/oracle.hpp"
#include "relpop/random.hpp"
#include "relpop/synth.hpp"

namespace {

using namespace relpop;

Eigen::MatrixXd random_spd(Rng& rng, Eigen::Index d) {
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = rng.gaussian();
  }
  return g * g.transpose() / static_cast<double>(d) +
         0.2 * Eigen::MatrixXd::Identity(d, d);
}

CategoryModel make_model(Rng& rng, Eigen::Index d, const std::string& id) {
  Eigen::VectorXd mean(d);
  for (Eigen::Index i = 0; i < d; ++i) mean[i] = rng.uniform(-2.0, 2.0);
  return CategoryModel(id, id, mean, random_spd(rng, d), random_spd(rng, d));
}

std::vector<Eigen::VectorXd> make_recordings(Rng& rng,
                                             const CategoryModel& model,
                                             int count) {
  const Eigen::VectorXd identity =
      model.mean() + model.between_sqrt() * rng.gaussian_vector(model.dim());
  std::vector<Eigen::VectorXd> recordings;
  for (int i = 0; i < count; ++i) {
    recordings.push_back(identity +
                         model.within_sqrt() * rng.gaussian_vector(model.dim()));
  }
  return recordings;
}

CategoryCatalog make_catalog(Rng& rng, std::size_t categories,
                             Eigen::Index d) {
  std::vector<CategoryModel> models;
  for (std::size_t k = 0; k < categories; ++k) {
    models.push_back(make_model(rng, d, "c" + std::to_string(k)));
  }
  return CategoryCatalog(std::move(models));
}

PriorConfig uniform_priors(std::size_t categories, double pi_h) {
  std::vector<double> uniform(categories, 1.0 / static_cast<double>(categories));
  std::vector<std::optional<double>> h1(categories, pi_h);
  return PriorConfig(uniform, uniform, std::move(h1));
}

void BM_MarginalLogLikelihood(benchmark::State& state) {
  Rng rng(1);
  const Eigen::Index d = state.range(0);
  const int count = static_cast<int>(state.range(1));
  const CategoryModel model = make_model(rng, d, "m");
  const auto recordings = make_recordings(rng, model, count);
  for (auto _ : state) {
    benchmark::DoNotOptimize(marginal_log_likelihood(recordings, model));
  }
}
BENCHMARK(BM_MarginalLogLikelihood)
    ->ArgsProduct({{1, 8}, {1, 10}})
    ->ArgNames({"dim", "recordings"});

void BM_PosteriorGeneral(benchmark::State& state) {
  Rng rng(2);
  const std::size_t categories = static_cast<std::size_t>(state.range(0));
  const CategoryCatalog catalog = make_catalog(rng, categories, 4);
  const PriorConfig priors = uniform_priors(categories, 0.1);
  const Evidence evidence(make_recordings(rng, catalog.at(0), 2),
                          make_recordings(rng, catalog.at(0), 1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(posterior_general(evidence, catalog, priors));
  }
}
BENCHMARK(BM_PosteriorGeneral)->Arg(4)->Arg(16)->ArgName("categories");

void BM_ExactJointPosterior(benchmark::State& state) {
  Rng rng(3);
  const std::size_t categories = static_cast<std::size_t>(state.range(0));
  const CategoryCatalog catalog = make_catalog(rng, categories, 4);
  const JointHypothesisSpace space(catalog, uniform_priors(categories, 0.1));
  const Evidence evidence(make_recordings(rng, catalog.at(0), 2),
                          make_recordings(rng, catalog.at(0), 1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_joint_posterior(evidence, space));
  }
}
BENCHMARK(BM_ExactJointPosterior)->Arg(4)->Arg(8)->ArgName("categories");

void BM_CombineOddsExact(benchmark::State& state) {
  Rng rng(4);
  std::vector<OddsAgainst> odds;
  for (int i = 0; i < 3; ++i) {
    odds.push_back(OddsAgainst::from_log(rng.uniform(-10.0, 2.0)));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(combine_odds_exact(odds));
  }
}
BENCHMARK(BM_CombineOddsExact);

void BM_QuadratureMarginal(benchmark::State& state) {
  Rng rng(5);
  const CategoryModel model = make_model(rng, 1, "m");
  const auto recordings = make_recordings(rng, model, 2);
  const auto spec = QuadratureSpec::covering(
      model, recordings, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(quadrature_marginal(recordings, model, spec));
  }
}
BENCHMARK(BM_QuadratureMarginal)->Arg(2048)->Arg(8192)->ArgName("points");

void BM_SampleCase(benchmark::State& state) {
  Rng rng(6);
  const ScenarioSpec spec{
      .catalog = make_catalog(rng, 4, 4),
      .analysis_priors = uniform_priors(4, 0.1),
      .generating_priors = std::nullopt,
      .suspect_recordings = 2,
      .trace_recordings = 1,
      .seed = 99,
  };
  std::uint64_t index = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_case(spec, index++));
  }
}
BENCHMARK(BM_SampleCase);

}  // namespace

BENCHMARK_MAIN();
