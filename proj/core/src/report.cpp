// core/src/report.cpp

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

#include "relpop/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "relpop/errors.hpp"

namespace relpop {

namespace {

constexpr double kLn10 = 2.302585092994045684;
constexpr double kInf = std::numeric_limits<double>::infinity();

// log10 of a probability given the log odds against it:
// log10 P = -log(1 + e^L) / ln 10, computed without overflow.
double log10_prob_from_log_odds(double log_odds) {
  if (log_odds == kInf) return -kInf;
  double log1p_term;
  if (log_odds > 0.0) {
    log1p_term = log_odds + std::log1p(std::exp(-log_odds));
  } else {
    log1p_term = std::log1p(std::exp(log_odds));
  }
  return -log1p_term / kLn10;
}

std::string format_short(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6g", value);
  return buffer;
}

// Key/value emitter for the machine format; keys are emitted in a fixed
// order by construction, so output is reproducible byte for byte.
class MachineWriter {
 public:
  void kv(const std::string& key, const std::string& value) {
    out_ << key << '=' << value << '\n';
  }
  void kv(const std::string& key, double value) {
    kv(key, format_double(value));
  }
  void kv(const std::string& key, std::size_t value) {
    kv(key, std::to_string(value));
  }
  /// Linear value plus its log10 on a sibling key.
  void kv_with_log10(const std::string& key, double linear, double log10) {
    kv(key, linear);
    kv(key + ".log10", log10);
  }
  /// For values carried in natural-log form (odds, LRs).
  void kv_from_ln(const std::string& key, double ln_value) {
    kv_with_log10(key, std::exp(ln_value), ln_value / kLn10);
  }
  void kv_prob(const std::string& key, double p) {
    kv_with_log10(key, p, std::log10(p));
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

void write_channel(MachineWriter& w, const std::string& prefix,
                   const DecisionChannel& channel) {
  w.kv_from_ln(prefix + ".prior_odds", channel.log_prior_odds);
  w.kv_from_ln(prefix + ".lr", channel.log_lr);
  w.kv_from_ln(prefix + ".posterior_odds",
               channel.posterior_odds.log_value());
  w.kv_with_log10(prefix + ".posterior", channel.posterior,
                  log10_prob_from_log_odds(channel.posterior_odds.log_value()));
}

void write_scientist_machine(MachineWriter& w,
                             const ScientistSection& section) {
  w.kv("scientist.reference", section.reference_id);
  for (const auto& entry : section.entries) {
    const std::string base = "scientist." + entry.id;
    w.kv_from_ln(base + ".suspect_lr", entry.suspect_log_lr);
    w.kv_from_ln(base + ".trace_lr", entry.trace_log_lr);
    w.kv_from_ln(base + ".same_source_odds_lr",
                 entry.same_source_log_odds_lr);
  }
}

void write_court_machine(MachineWriter& w,
                         const std::vector<std::string>& ids,
                         const CourtSection& court) {
  w.kv("court.theta", court.theta);
  w.kv("court.mode",
       court.mode == ReportMode::factorized ? "factorized" : "general");

  const CaseResult& r = court.result;
  if (!r.suspect_posterior.empty()) {
    for (std::size_t k = 0; k < ids.size(); ++k) {
      w.kv_prob("court.suspect_posterior." + ids[k], r.suspect_posterior[k]);
    }
    for (std::size_t k = 0; k < ids.size(); ++k) {
      w.kv_prob("court.trace_posterior." + ids[k], r.trace_posterior[k]);
    }
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (r.h1_posterior[k]) {
        w.kv_prob("court.h1_posterior." + ids[k], *r.h1_posterior[k]);
      }
    }
  }

  if (r.factorized) {
    const FactorizedBreakdown& f = *r.factorized;
    w.kv("court.intersection", ids[f.intersection]);
    write_channel(w, "court.channel.suspect", f.suspect);
    write_channel(w, "court.channel.trace", f.trace);
    write_channel(w, "court.channel.same_source", f.same_source);
    w.kv_from_ln("court.additive_odds", f.additive_odds.log_value());
    w.kv("court.epsilon", f.epsilon);
  }

  w.kv_with_log10("court.final_posterior", r.final_posterior,
                  log10_prob_from_log_odds(r.final_odds.log_value()));
  w.kv_from_ln("court.final_odds", r.final_odds.log_value());

  w.kv("court.verdict.exact", verdict_name(court.verdict_exact));
  if (court.verdict_three_tests) {
    w.kv("court.verdict.three_tests", verdict_name(*court.verdict_three_tests));
  }
  if (court.verdict_additive) {
    w.kv("court.verdict.additive", verdict_name(*court.verdict_additive));
  }
  w.kv("meta.likelihood_evaluations", r.likelihood_evaluations);
}

void write_scientist_text(std::ostringstream& out,
                          const ScientistSection& section) {
  out << "Scientist section (prior-free)\n";
  out << "  reference category: " << section.reference_id << "\n";
  out << "  category | log10 LR suspect | log10 LR trace | log10 R_h\n";
  for (const auto& entry : section.entries) {
    out << "  " << entry.id << " | "
        << format_short(entry.suspect_log_lr / kLn10) << " | "
        << format_short(entry.trace_log_lr / kLn10) << " | "
        << format_short(entry.same_source_log_odds_lr / kLn10) << "\n";
  }
}

void write_court_text(std::ostringstream& out,
                      const std::vector<std::string>& ids,
                      const CourtSection& court) {
  const CaseResult& r = court.result;
  out << "Court section (theta = " << format_short(court.theta) << ", mode = "
      << (court.mode == ReportMode::factorized ? "factorized" : "general")
      << ")\n";
  if (r.suspect_posterior.empty()) {
    out << "  prior supports are disjoint: different sources follows "
           "deductively; evidence not analyzed\n";
  } else {
    for (std::size_t k = 0; k < ids.size(); ++k) {
      out << "  P(suspect in " << ids[k]
          << " | evidence) = " << format_short(r.suspect_posterior[k]) << "\n";
    }
    for (std::size_t k = 0; k < ids.size(); ++k) {
      out << "  P(trace in " << ids[k]
          << " | evidence) = " << format_short(r.trace_posterior[k]) << "\n";
    }
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (r.h1_posterior[k]) {
        out << "  P(same source | both in " << ids[k]
            << ") = " << format_short(*r.h1_posterior[k]) << "\n";
      }
    }
  }
  if (r.factorized) {
    const FactorizedBreakdown& f = *r.factorized;
    const auto channel = [&](const char* name, const DecisionChannel& c) {
      out << "  " << name << ": prior odds "
          << format_short(std::exp(c.log_prior_odds)) << ", LR "
          << format_short(std::exp(c.log_lr)) << ", posterior odds "
          << format_short(c.posterior_odds.value()) << ", posterior "
          << format_short(c.posterior) << "\n";
    };
    out << "  factorized breakdown (intersection " << ids[f.intersection]
        << ")\n";
    channel("suspect-category question", f.suspect);
    channel("trace-category question", f.trace);
    channel("same-source question", f.same_source);
    out << "  additive combined odds = "
        << format_short(f.additive_odds.value())
        << " (epsilon = " << format_short(f.epsilon) << ")\n";
  }
  out << "  final posterior P(H1 | evidence) = "
      << format_short(r.final_posterior)
      << " (log10 = "
      << format_short(log10_prob_from_log_odds(r.final_odds.log_value()))
      << ")\n";
  out << "  final odds against H1 = " << format_short(r.final_odds.value())
      << "\n";
  out << "  verdict (exact rule): " << verdict_name(court.verdict_exact)
      << "\n";
  if (court.verdict_three_tests) {
    out << "  verdict (three tests): "
        << verdict_name(*court.verdict_three_tests) << "\n";
  }
  if (court.verdict_additive) {
    out << "  verdict (additive): " << verdict_name(*court.verdict_additive)
        << "\n";
  }
  out << "  likelihood evaluations: " << r.likelihood_evaluations << "\n";
}

}  // namespace

const char* verdict_name(Verdict verdict) {
  return verdict == Verdict::find_h1 ? "H1" : "H2";
}

std::string format_double(double value) {
  if (value == 0.0) value = 0.0;  // canonicalize the sign of zero
  char buffer[64];
  const auto result =
      std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

ScientistSection scientist_section(const CategoryCatalog& catalog,
                                   const Evidence& evidence) {
  LikelihoodCache cache(catalog, evidence);
  cache.materialize();

  ScientistSection section;
  section.reference_id = catalog.at(0).id();
  for (std::size_t k = 0; k < catalog.size(); ++k) {
    section.entries.push_back(ScientistSection::Entry{
        .id = catalog.at(k).id(),
        .suspect_log_lr = cache.suspect_log_ml(k) - cache.suspect_log_ml(0),
        .trace_log_lr = cache.trace_log_ml(k) - cache.trace_log_ml(0),
        .same_source_log_odds_lr = cache.same_source_log_odds_lr(k),
    });
  }
  return section;
}

Report run_case(const CaseFile& file, const RunOptions& options) {
  const double theta = options.theta_override.value_or(file.threshold);
  if (!(theta > 0.0 && theta < 1.0)) {
    throw ValidationError("theta must lie in (0,1)");
  }

  Report report;
  for (const auto& model : file.catalog.categories()) {
    report.category_ids.push_back(model.id());
  }
  report.warnings = file.warnings;

  if (file.priors.supports_are_disjoint()) {
    // Different sources is already certain; do not touch the evidence.
    CaseResult result =
        posterior_general(file.evidence, file.catalog, file.priors);
    const Verdict verdict = decide(result, theta, DecisionRule::exact);
    report.court = CourtSection{theta, options.mode, std::move(result),
                                verdict, std::nullopt, std::nullopt};
    return report;
  }

  LikelihoodCache cache(file.catalog, file.evidence);
  CaseResult result = options.mode == ReportMode::factorized
                          ? posterior_factorized(cache, file.priors)
                          : posterior_general(cache, file.priors);

  CourtSection court{theta, options.mode, std::move(result),
                     Verdict::find_h2, std::nullopt, std::nullopt};
  court.verdict_exact = decide(court.result, theta, DecisionRule::exact);
  if (court.result.factorized) {
    court.verdict_three_tests =
        decide(court.result, theta, DecisionRule::three_tests);
    court.verdict_additive =
        decide(court.result, theta, DecisionRule::additive);
  }
  report.court = std::move(court);

  // Reuses the cache entries already computed for the court section.
  ScientistSection scientist;
  scientist.reference_id = file.catalog.at(0).id();
  for (std::size_t k = 0; k < file.catalog.size(); ++k) {
    scientist.entries.push_back(ScientistSection::Entry{
        .id = file.catalog.at(k).id(),
        .suspect_log_lr = cache.suspect_log_ml(k) - cache.suspect_log_ml(0),
        .trace_log_lr = cache.trace_log_ml(k) - cache.trace_log_ml(0),
        .same_source_log_odds_lr = cache.same_source_log_odds_lr(k),
    });
  }
  report.scientist = std::move(scientist);

  if (options.include_oracle) {
    report.oracle = OracleSection{
        discrepancy_report(file.evidence, file.catalog, file.priors)};
  }
  return report;
}

std::string render_scientist(const ScientistSection& section,
                             OutputFormat format) {
  if (format == OutputFormat::machine) {
    MachineWriter w;
    write_scientist_machine(w, section);
    return w.str();
  }
  std::ostringstream out;
  write_scientist_text(out, section);
  return out.str();
}

std::string render_report(const Report& report, OutputFormat format) {
  if (format == OutputFormat::machine) {
    MachineWriter w;
    w.kv("report.schema", std::string("relpop.report.v1"));
    std::string ids;
    for (const auto& id : report.category_ids) {
      if (!ids.empty()) ids += ',';
      ids += id;
    }
    w.kv("case.categories", ids);
    if (report.scientist) write_scientist_machine(w, *report.scientist);
    write_court_machine(w, report.category_ids, report.court);
    if (report.oracle) {
      const DiscrepancyReport& d = report.oracle->discrepancy;
      w.kv("oracle.general_formula", d.general_formula);
      w.kv("oracle.exact_enumeration", d.exact_enumeration);
      w.kv("oracle.absolute_gap", d.absolute_gap);
      w.kv("oracle.relative_gap", d.relative_gap);
    }
    for (std::size_t i = 0; i < report.warnings.size(); ++i) {
      w.kv("warning." + std::to_string(i), report.warnings[i]);
    }
    return w.str();
  }

  std::ostringstream out;
  out << "Categories:";
  for (const auto& id : report.category_ids) out << ' ' << id;
  out << "\n\n";
  if (report.scientist) {
    write_scientist_text(out, *report.scientist);
    out << "\n";
  }
  write_court_text(out, report.category_ids, report.court);
  if (report.oracle) {
    const DiscrepancyReport& d = report.oracle->discrepancy;
    out << "\nOracle section\n";
    out << "  summation formula:  " << format_short(d.general_formula) << "\n";
    out << "  exact enumeration:  " << format_short(d.exact_enumeration)
        << "\n";
    out << "  absolute gap:       " << format_short(d.absolute_gap) << "\n";
    out << "  relative gap:       " << format_short(d.relative_gap) << "\n";
  }
  if (!report.warnings.empty()) {
    out << "\nWarnings\n";
    for (const auto& warning : report.warnings) {
      out << "  " << warning << "\n";
    }
  }
  return out.str();
}

std::string render_sweep(const std::vector<SweepRow>& rows,
                         OutputFormat format) {
  if (format == OutputFormat::machine) {
    MachineWriter w;
    w.kv("sweep.rows", rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string base = "sweep.row." + std::to_string(i);
      for (const auto& [name, value] : rows[i].coordinates) {
        w.kv(base + ".point." + name, value);
      }
      w.kv_with_log10(
          base + ".final_posterior", rows[i].final_posterior,
          log10_prob_from_log_odds(rows[i].final_odds.log_value()));
      w.kv_from_ln(base + ".final_odds", rows[i].final_odds.log_value());
      w.kv(base + ".verdict", verdict_name(rows[i].verdict));
    }
    return w.str();
  }

  std::ostringstream out;
  out << "point | P(H1|E) | odds against | verdict\n";
  for (const auto& row : rows) {
    std::string point;
    for (const auto& [name, value] : row.coordinates) {
      if (!point.empty()) point += ' ';
      point += name + "=" + format_short(value);
    }
    out << point << " | " << format_short(row.final_posterior) << " | "
        << format_short(row.final_odds.value()) << " | "
        << verdict_name(row.verdict) << "\n";
  }
  return out.str();
}

std::string render_calibration(const CalibrationTable& table,
                               OutputFormat format) {
  if (format == OutputFormat::machine) {
    MachineWriter w;
    w.kv("calibration.cases", table.n_cases);
    w.kv("calibration.bins", table.bins.size());
    for (std::size_t i = 0; i < table.bins.size(); ++i) {
      const CalibrationBin& bin = table.bins[i];
      const std::string base = "calibration.bin." + std::to_string(i);
      w.kv(base + ".lower", bin.lower);
      w.kv(base + ".upper", bin.upper);
      w.kv(base + ".count", bin.count);
      w.kv(base + ".mean_predicted", bin.mean_predicted);
      w.kv(base + ".empirical_h1_rate", bin.empirical_h1_rate);
      w.kv(base + ".standard_error", bin.standard_error);
      w.kv(base + ".low_count", std::string(bin.low_count ? "1" : "0"));
    }
    return w.str();
  }

  std::ostringstream out;
  out << "bin | count | mean predicted | empirical H1 rate | se | flag\n";
  for (const auto& bin : table.bins) {
    out << "[" << format_short(bin.lower) << "," << format_short(bin.upper)
        << ") | " << bin.count << " | " << format_short(bin.mean_predicted)
        << " | " << format_short(bin.empirical_h1_rate) << " | "
        << format_short(bin.standard_error) << " | "
        << (bin.low_count ? "low-count" : "ok") << "\n";
  }
  out << "cases: " << table.n_cases << "\n";
  return out.str();
}

std::string render_error_rates(const ErrorRates& rates, OutputFormat format) {
  if (format == OutputFormat::machine) {
    MachineWriter w;
    w.kv("errors.cases", rates.n_cases);
    w.kv("errors.truth_h1", rates.truth_h1);
    w.kv("errors.truth_h2", rates.truth_h2);
    w.kv("errors.found_h1", rates.found_h1);
    w.kv("errors.false_h1", rates.false_h1);
    w.kv("errors.false_h2", rates.false_h2);
    w.kv("errors.false_h1_rate", rates.false_h1_rate);
    w.kv("errors.false_h1_ci95", rates.false_h1_ci95);
    w.kv("errors.false_h2_rate", rates.false_h2_rate);
    w.kv("errors.false_h2_ci95", rates.false_h2_ci95);
    return w.str();
  }

  std::ostringstream out;
  out << "cases: " << rates.n_cases << " (true H1: " << rates.truth_h1
      << ", true H2: " << rates.truth_h2 << ")\n";
  out << "found H1: " << rates.found_h1 << "\n";
  out << "false H1 findings: " << rates.false_h1 << " (rate "
      << format_short(rates.false_h1_rate) << " +/- "
      << format_short(rates.false_h1_ci95) << ")\n";
  out << "false H2 findings: " << rates.false_h2 << " (rate "
      << format_short(rates.false_h2_rate) << " +/- "
      << format_short(rates.false_h2_ci95) << ")\n";
  return out.str();
}

}  // namespace relpop
