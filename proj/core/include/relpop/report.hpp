// core/include/relpop/report.hpp

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

#ifndef RELPOP_REPORT_HPP_
#define RELPOP_REPORT_HPP_

#include <optional>
#include <string>
#include <vector>

#include "relpop/case_file.hpp"
#include "relpop/inference.hpp"
#include "relpop/oracle.hpp"
#include "relpop/synth.hpp"

namespace relpop {

enum class ReportMode { factorized, general };
enum class OutputFormat { text, machine };

/// Evidence-only findings: likelihood ratios against a fixed reference
/// category plus the per-category same-source odds ratio. A pure function
/// of (catalog, evidence); priors never reach this section, so its
/// rendering is byte-identical across prior changes.
struct ScientistSection {
  struct Entry {
    std::string id;
    double suspect_log_lr;          ///< ln LR of this category vs reference
    double trace_log_lr;
    double same_source_log_odds_lr; ///< ln R_h
  };
  std::string reference_id;
  std::vector<Entry> entries;
};

/// Prior-dependent conclusions: posteriors, odds, verdicts.
struct CourtSection {
  double theta;
  ReportMode mode;
  CaseResult result;
  Verdict verdict_exact;
  std::optional<Verdict> verdict_three_tests;  ///< present when factorized
  std::optional<Verdict> verdict_additive;
};

struct OracleSection {
  DiscrepancyReport discrepancy;
};

struct Report {
  std::vector<std::string> category_ids;
  /// Absent when disjoint prior supports short-circuited the case and the
  /// evidence was never analyzed.
  std::optional<ScientistSection> scientist;
  CourtSection court;
  std::optional<OracleSection> oracle;
  std::vector<std::string> warnings;
};

struct RunOptions {
  ReportMode mode = ReportMode::general;
  std::optional<double> theta_override;  ///< else the file's threshold
  bool include_oracle = false;
};

/// Full case evaluation. Disjoint prior supports return a court-only
/// report with a zero final posterior and no likelihood evaluations.
Report run_case(const CaseFile& file, const RunOptions& options);

/// The scientist section alone (always evaluates the evidence).
ScientistSection scientist_section(const CategoryCatalog& catalog,
                                   const Evidence& evidence);

std::string render_report(const Report& report, OutputFormat format);
std::string render_scientist(const ScientistSection& section,
                             OutputFormat format);

std::string render_sweep(const std::vector<SweepRow>& rows,
                         OutputFormat format);
std::string render_calibration(const CalibrationTable& table,
                               OutputFormat format);
std::string render_error_rates(const ErrorRates& rates, OutputFormat format);

const char* verdict_name(Verdict verdict);

/// Shortest round-trip decimal form of a double (stable across runs).
std::string format_double(double value);

}  // namespace relpop

#endif  // RELPOP_REPORT_HPP_
