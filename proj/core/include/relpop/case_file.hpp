// core/include/relpop/case_file.hpp

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

#ifndef RELPOP_CASE_FILE_HPP_
#define RELPOP_CASE_FILE_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "relpop/inference.hpp"
#include "relpop/model.hpp"

namespace relpop {

/// A complete case: catalog, priors, evidence, and the decision threshold.
/// JSON on disk; schema_version 1. Unknown fields are rejected, priors
/// within 1e-9 of a simplex are renormalized with a warning, anything
/// further off is an error.
struct CaseFile {
  int schema_version;
  CategoryCatalog catalog;
  PriorConfig priors;
  Evidence evidence;
  double threshold;  ///< reasonable-doubt ceiling, default 1e-4
  std::vector<std::string> warnings;  ///< parse-time notes, not serialized
};

CaseFile parse_case_file(const std::string& text);
CaseFile load_case_file(const std::filesystem::path& path);

/// Canonical serialization: fixed key order, zero prior entries elided.
/// parse(serialize(parse(text))) reproduces the same case.
std::string serialize_case_file(const CaseFile& file);

/// Simulation recipe: like a case file but with recording counts instead
/// of evidence, plus a seed and optional mismatched generating priors.
struct ScenarioFile {
  int schema_version;
  CategoryCatalog catalog;
  PriorConfig priors;
  std::optional<PriorConfig> generating_priors;
  int suspect_recordings;
  int trace_recordings;
  std::uint64_t seed;
  std::vector<std::string> warnings;
};

ScenarioFile parse_scenario_file(const std::string& text);
ScenarioFile load_scenario_file(const std::filesystem::path& path);

}  // namespace relpop

#endif  // RELPOP_CASE_FILE_HPP_
