// core/src/synth.cpp

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

#include "relpop/synth.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "relpop/errors.hpp"
#include "relpop/random.hpp"

namespace relpop {

namespace {

struct Cell {
  std::size_t suspect_category;
  std::size_t trace_category;
  bool same_source;
};

// Flattened joint prior cells with positive mass, in a fixed order so the
// categorical draw is reproducible.
void enumerate_cells(const JointHypothesisSpace& space,
                     std::vector<Cell>& cells, std::vector<double>& masses) {
  const std::size_t n = space.catalog().size();
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      for (bool h1 : {true, false}) {
        const double mass = space.prior_mass(k, j, h1);
        if (mass > 0.0) {
          cells.push_back(Cell{k, j, h1});
          masses.push_back(mass);
        }
      }
    }
  }
}

std::vector<Eigen::VectorXd> draw_recordings(Rng& rng,
                                             const CategoryModel& model,
                                             const Eigen::VectorXd& identity,
                                             int count) {
  std::vector<Eigen::VectorXd> recordings;
  recordings.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    recordings.push_back(identity +
                         model.within_sqrt() * rng.gaussian_vector(model.dim()));
  }
  return recordings;
}

void check_scenario(const ScenarioSpec& spec) {
  if (spec.suspect_recordings < 1 || spec.trace_recordings < 1) {
    throw ValidationError("scenario needs at least one recording per side");
  }
  if (spec.analysis_priors.size() != spec.catalog.size() ||
      spec.effective_generating_priors().size() != spec.catalog.size()) {
    throw ValidationError("scenario priors do not match the catalog");
  }
}

double predict_posterior(const ScenarioSpec& spec, const Evidence& evidence,
                         PosteriorSource source) {
  if (source == PosteriorSource::general_formula) {
    return posterior_general(evidence, spec.catalog, spec.analysis_priors)
        .final_posterior;
  }
  const JointHypothesisSpace space(spec.catalog, spec.analysis_priors);
  return exact_joint_posterior(evidence, space);
}

}  // namespace

SampledCase sample_case(const ScenarioSpec& spec, std::uint64_t case_index) {
  check_scenario(spec);
  const JointHypothesisSpace space(spec.catalog,
                                   spec.effective_generating_priors());
  std::vector<Cell> cells;
  std::vector<double> masses;
  enumerate_cells(space, cells, masses);

  Rng rng(split_seed(spec.seed, case_index));
  const Cell cell = cells.at(rng.categorical(masses));
  const CategoryModel& suspect_model = spec.catalog.at(cell.suspect_category);
  const CategoryModel& trace_model = spec.catalog.at(cell.trace_category);

  std::vector<Eigen::VectorXd> suspect_recs, trace_recs;
  if (cell.same_source) {
    const Eigen::VectorXd identity =
        suspect_model.mean() +
        suspect_model.between_sqrt() * rng.gaussian_vector(suspect_model.dim());
    suspect_recs =
        draw_recordings(rng, suspect_model, identity, spec.suspect_recordings);
    trace_recs =
        draw_recordings(rng, suspect_model, identity, spec.trace_recordings);
  } else {
    const Eigen::VectorXd suspect_identity =
        suspect_model.mean() +
        suspect_model.between_sqrt() * rng.gaussian_vector(suspect_model.dim());
    const Eigen::VectorXd trace_identity =
        trace_model.mean() +
        trace_model.between_sqrt() * rng.gaussian_vector(trace_model.dim());
    suspect_recs = draw_recordings(rng, suspect_model, suspect_identity,
                                   spec.suspect_recordings);
    trace_recs =
        draw_recordings(rng, trace_model, trace_identity, spec.trace_recordings);
  }

  return SampledCase{
      .evidence = Evidence(std::move(suspect_recs), std::move(trace_recs)),
      .truth = GroundTruth{cell.suspect_category, cell.trace_category,
                           cell.same_source},
  };
}

CalibrationTable calibration_experiment(const ScenarioSpec& spec,
                                        std::size_t n_cases, int bins,
                                        PosteriorSource source) {
  check_scenario(spec);
  if (n_cases < 1000) {
    throw ValidationError("calibration needs at least 1000 cases");
  }
  if (bins < 1) throw ValidationError("calibration needs at least one bin");

  CalibrationTable table;
  table.n_cases = n_cases;
  table.bins.resize(static_cast<std::size_t>(bins));
  const double width = 1.0 / static_cast<double>(bins);
  for (int b = 0; b < bins; ++b) {
    table.bins[static_cast<std::size_t>(b)].lower = width * b;
    table.bins[static_cast<std::size_t>(b)].upper = width * (b + 1);
  }

  std::vector<double> sum_pred(table.bins.size(), 0.0);
  std::vector<double> sum_var(table.bins.size(), 0.0);
  std::vector<std::size_t> h1_count(table.bins.size(), 0);

  for (std::size_t i = 0; i < n_cases; ++i) {
    const SampledCase sampled = sample_case(spec, i);
    const double p = predict_posterior(spec, sampled.evidence, source);
    auto b = static_cast<std::size_t>(
        std::min<double>(std::floor(p / width), bins - 1.0));
    table.bins[b].count += 1;
    sum_pred[b] += p;
    sum_var[b] += p * (1.0 - p);
    if (sampled.truth.same_source) h1_count[b] += 1;
  }

  for (std::size_t b = 0; b < table.bins.size(); ++b) {
    CalibrationBin& bin = table.bins[b];
    if (bin.count == 0) continue;
    const double n = static_cast<double>(bin.count);
    bin.mean_predicted = sum_pred[b] / n;
    bin.empirical_h1_rate = static_cast<double>(h1_count[b]) / n;
    bin.standard_error = std::sqrt(sum_var[b]) / n;
    bin.low_count = bin.count < 20;
  }
  return table;
}

ErrorRates error_rate_experiment(const ScenarioSpec& spec, std::size_t n_cases,
                                 double theta, DecisionRule rule,
                                 PosteriorSource source) {
  check_scenario(spec);
  if (n_cases == 0) {
    throw ValidationError("error-rate experiment needs at least one case");
  }
  if (!(theta > 0.0 && theta < 1.0)) {
    throw ValidationError("theta must lie in (0,1)");
  }

  ErrorRates rates;
  rates.n_cases = n_cases;
  for (std::size_t i = 0; i < n_cases; ++i) {
    const SampledCase sampled = sample_case(spec, i);

    Verdict verdict;
    if (source == PosteriorSource::general_formula) {
      const CaseResult result =
          posterior_general(sampled.evidence, spec.catalog,
                            spec.analysis_priors);
      verdict = decide(result, theta, rule);
    } else {
      if (rule != DecisionRule::exact) {
        throw ValidationError(
            "enumeration posteriors support only the exact rule");
      }
      const JointHypothesisSpace space(spec.catalog, spec.analysis_priors);
      CaseResult result;
      result.final_posterior = exact_joint_posterior(sampled.evidence, space);
      result.final_odds = prob_to_odds_against(result.final_posterior);
      verdict = decide(result, theta, rule);
    }

    const bool truth_h1 = sampled.truth.same_source;
    rates.truth_h1 += truth_h1 ? 1 : 0;
    rates.truth_h2 += truth_h1 ? 0 : 1;
    if (verdict == Verdict::find_h1) {
      rates.found_h1 += 1;
      if (!truth_h1) rates.false_h1 += 1;
    } else if (truth_h1) {
      rates.false_h2 += 1;
    }
  }

  const auto rate_and_ci = [](std::size_t errors, std::size_t denom,
                              double& rate, double& ci) {
    if (denom == 0) {
      rate = 0.0;
      ci = 0.0;
      return;
    }
    const double n = static_cast<double>(denom);
    rate = static_cast<double>(errors) / n;
    ci = 1.96 * std::sqrt(std::max(rate * (1.0 - rate), 0.0) / n);
  };
  rate_and_ci(rates.false_h1, rates.truth_h2, rates.false_h1_rate,
              rates.false_h1_ci95);
  rate_and_ci(rates.false_h2, rates.truth_h1, rates.false_h2_rate,
              rates.false_h2_ci95);
  return rates;
}

}  // namespace relpop
