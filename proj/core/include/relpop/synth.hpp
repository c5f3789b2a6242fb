// core/include/relpop/synth.hpp

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

#ifndef RELPOP_SYNTH_HPP_
#define RELPOP_SYNTH_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "relpop/inference.hpp"
#include "relpop/model.hpp"
#include "relpop/oracle.hpp"

namespace relpop {

/// Recipe for drawing synthetic cases with known ground truth. Cases are
/// generated from the joint hypothesis space of the generating priors
/// (analysis priors unless a mismatch is being studied) and scored with
/// the analysis priors.
struct ScenarioSpec {
  CategoryCatalog catalog;
  PriorConfig analysis_priors;
  /// Set to study misspecified analysis priors; defaults to analysis_priors.
  std::optional<PriorConfig> generating_priors;
  int suspect_recordings = 1;
  int trace_recordings = 1;
  std::uint64_t seed = 0;

  const PriorConfig& effective_generating_priors() const {
    return generating_priors ? *generating_priors : analysis_priors;
  }
};

struct GroundTruth {
  std::size_t suspect_category;
  std::size_t trace_category;
  bool same_source;
};

struct SampledCase {
  Evidence evidence;
  GroundTruth truth;
};

/// Draws one case: hypothesis and categories from the joint prior,
/// identity variable(s) from the between model (one shared under same
/// source, two independent otherwise), then recordings around them.
/// Deterministic in (spec.seed, case_index).
SampledCase sample_case(const ScenarioSpec& spec, std::uint64_t case_index);

/// Which posterior the experiments feed to the decision rule.
enum class PosteriorSource {
  general_formula,    ///< posterior_general with the analysis priors
  exact_enumeration,  ///< exact_joint_posterior over the analysis priors
};

struct CalibrationBin {
  double lower;
  double upper;
  std::size_t count = 0;
  double mean_predicted = 0.0;    ///< average predicted posterior in the bin
  double empirical_h1_rate = 0.0;
  /// Standard deviation of the empirical rate under perfect calibration:
  /// sqrt(sum p_i (1 - p_i)) / count.
  double standard_error = 0.0;
  bool low_count = true;  ///< flagged (not asserted) below 20 cases
};

struct CalibrationTable {
  std::vector<CalibrationBin> bins;
  std::size_t n_cases = 0;
};

/// Bins predicted same-source posteriors and tabulates how often the
/// ground truth really was same-source per bin. Requires n_cases >= 1000.
CalibrationTable calibration_experiment(const ScenarioSpec& spec,
                                        std::size_t n_cases, int bins,
                                        PosteriorSource source);

struct ErrorRates {
  std::size_t n_cases = 0;
  std::size_t truth_h1 = 0;
  std::size_t truth_h2 = 0;
  std::size_t found_h1 = 0;
  std::size_t false_h1 = 0;  ///< found same-source, truly different
  std::size_t false_h2 = 0;  ///< found different, truly same
  double false_h1_rate = 0.0;  ///< false_h1 / truth_h2 (0 when undefined)
  double false_h2_rate = 0.0;  ///< false_h2 / truth_h1
  double false_h1_ci95 = 0.0;  ///< normal-approximation half-widths
  double false_h2_ci95 = 0.0;
};

/// Applies decide() case by case against ground truth. The three_tests and
/// additive rules need factorized-structure analysis priors and the
/// general-formula source.
ErrorRates error_rate_experiment(const ScenarioSpec& spec, std::size_t n_cases,
                                 double theta, DecisionRule rule,
                                 PosteriorSource source);

}  // namespace relpop

#endif  // RELPOP_SYNTH_HPP_
