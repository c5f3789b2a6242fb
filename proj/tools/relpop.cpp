// tools/relpop.cpp

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

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relpop/case_file.hpp"
#include "relpop/errors.hpp"
#include "relpop/inference.hpp"
#include "relpop/oracle.hpp"
#include "relpop/report.hpp"
#include "relpop/synth.hpp"

namespace {

using namespace relpop;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitFindH1 = 10;

OutputFormat to_format(const std::string& name) {
  return name == "machine" ? OutputFormat::machine : OutputFormat::text;
}

ReportMode to_mode(const std::string& name) {
  return name == "factorized" ? ReportMode::factorized : ReportMode::general;
}

DecisionRule to_rule(const std::string& name) {
  if (name == "three-tests") return DecisionRule::three_tests;
  if (name == "additive") return DecisionRule::additive;
  return DecisionRule::exact;
}

PosteriorSource to_source(const std::string& name) {
  return name == "exact" ? PosteriorSource::exact_enumeration
                         : PosteriorSource::general_formula;
}

// "a:b:n" -> n evenly spaced values from a to b inclusive.
std::vector<double> parse_grid_range(const std::string& text) {
  const auto first = text.find(':');
  const auto second = text.find(':', first + 1);
  if (first == std::string::npos || second == std::string::npos) {
    throw ValidationError("grid range must have the form a:b:n");
  }
  double lo, hi;
  long n;
  try {
    lo = std::stod(text.substr(0, first));
    hi = std::stod(text.substr(first + 1, second - first - 1));
    n = std::stol(text.substr(second + 1));
  } catch (const std::exception&) {
    throw ValidationError("grid range must have the form a:b:n");
  }
  if (n < 1) throw ValidationError("grid range needs n >= 1 points");
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    values.push_back(
        n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) /
                           static_cast<double>(n - 1));
  }
  return values;
}

// "suspect:<id>=a:b:n" or "trace:<id>=a:b:n".
struct PriorAxis {
  bool suspect_side = true;
  std::string id;
  std::vector<double> values;
};

PriorAxis parse_prior_axis(const std::string& text) {
  const auto colon = text.find(':');
  const auto equals = text.find('=');
  if (colon == std::string::npos || equals == std::string::npos ||
      equals < colon) {
    throw ValidationError("prior grid must have the form side:id=a:b:n");
  }
  PriorAxis axis;
  const std::string side = text.substr(0, colon);
  if (side == "suspect") {
    axis.suspect_side = true;
  } else if (side == "trace") {
    axis.suspect_side = false;
  } else {
    throw ValidationError("prior grid side must be 'suspect' or 'trace'");
  }
  axis.id = text.substr(colon + 1, equals - colon - 1);
  axis.values = parse_grid_range(text.substr(equals + 1));
  return axis;
}

// Sets one category's prior mass to `value` and rescales the rest.
std::vector<double> reweighted_prior(std::span<const double> prior,
                                     std::size_t index, double value) {
  if (value < 0.0 || value > 1.0) {
    throw ValidationError("prior grid values must lie in [0,1]");
  }
  const double rest = 1.0 - prior[index];
  if (rest <= 0.0 && value < 1.0) {
    throw ValidationError(
        "cannot vary a category that already holds all prior mass");
  }
  std::vector<double> result(prior.begin(), prior.end());
  const double scale = value == 1.0 ? 0.0 : (1.0 - value) / rest;
  for (double& p : result) p *= scale;
  result[index] = value;
  return result;
}

int run_validate(const std::string& path, const std::string& output) {
  const CaseFile file = load_case_file(path);
  if (to_format(output) == OutputFormat::machine) {
    std::cout << "validate.ok=1\n";
    std::cout << "validate.categories=" << file.catalog.size() << "\n";
    std::cout << "validate.dim=" << file.catalog.dim() << "\n";
    std::cout << "validate.threshold=" << format_double(file.threshold)
              << "\n";
    for (std::size_t i = 0; i < file.warnings.size(); ++i) {
      std::cout << "validate.warning." << i << "=" << file.warnings[i] << "\n";
    }
  } else {
    std::cout << "OK: " << file.catalog.size() << " categories, dim "
              << file.catalog.dim() << ", threshold "
              << format_double(file.threshold) << "\n";
    for (const auto& warning : file.warnings) {
      std::cout << "warning: " << warning << "\n";
    }
  }
  return kExitOk;
}

int run_lr(const std::string& path, const std::string& output) {
  const CaseFile file = load_case_file(path);
  const ScientistSection section =
      scientist_section(file.catalog, file.evidence);
  std::cout << render_scientist(section, to_format(output));
  return kExitOk;
}

int run_posterior(const std::string& path, const std::string& mode,
                  const std::string& output, bool with_oracle) {
  const CaseFile file = load_case_file(path);
  const Report report = run_case(
      file, RunOptions{to_mode(mode), std::nullopt, with_oracle});
  std::cout << render_report(report, to_format(output));
  return report.court.verdict_exact == Verdict::find_h1 ? kExitFindH1
                                                        : kExitOk;
}

int run_decide(const std::string& path, std::optional<double> theta,
               const std::string& rule_name, const std::string& output) {
  const CaseFile file = load_case_file(path);
  const DecisionRule rule = to_rule(rule_name);
  const Report report =
      run_case(file, RunOptions{ReportMode::general, theta, false});
  const double effective_theta = theta.value_or(file.threshold);
  const Verdict verdict = decide(report.court.result, effective_theta, rule);

  if (to_format(output) == OutputFormat::machine) {
    std::cout << "decide.rule=" << rule_name << "\n";
    std::cout << "decide.theta=" << format_double(effective_theta) << "\n";
    std::cout << "decide.final_odds="
              << format_double(report.court.result.final_odds.value()) << "\n";
    std::cout << "decide.final_odds.log10="
              << format_double(report.court.result.final_odds.log_value() /
                               std::log(10.0))
              << "\n";
    std::cout << "decide.verdict=" << verdict_name(verdict) << "\n";
  } else {
    std::cout << "rule " << rule_name << ", theta "
              << format_double(effective_theta) << ": find for "
              << verdict_name(verdict) << " (final odds against H1 = "
              << format_double(report.court.result.final_odds.value())
              << ")\n";
  }
  return verdict == Verdict::find_h1 ? kExitFindH1 : kExitOk;
}

int run_sweep(const std::string& path, const std::string& pi_h_range,
              const std::string& prior_grid, std::optional<double> theta,
              const std::string& output) {
  const CaseFile file = load_case_file(path);
  if (pi_h_range.empty() && prior_grid.empty()) {
    throw ValidationError("sweep needs --pi-h and/or --prior-grid");
  }

  std::optional<PriorAxis> prior_axis;
  if (!prior_grid.empty()) {
    prior_axis = parse_prior_axis(prior_grid);
    if (!file.catalog.index_of(prior_axis->id)) {
      throw ValidationError("prior grid names unknown category '" +
                            prior_axis->id + "'");
    }
  }
  std::vector<double> pi_h_values;
  if (!pi_h_range.empty()) pi_h_values = parse_grid_range(pi_h_range);

  std::vector<SweepPoint> grid;
  const auto add_point = [&](std::optional<double> prior_value,
                             std::optional<double> pi_h) {
    std::vector<std::pair<std::string, double>> coords;
    PriorConfig priors = file.priors;
    if (prior_value) {
      const std::size_t index = *file.catalog.index_of(prior_axis->id);
      const std::string side = prior_axis->suspect_side ? "suspect" : "trace";
      coords.emplace_back(side + "." + prior_axis->id, *prior_value);
      std::vector<double> suspect(priors.suspect_prior().begin(),
                                  priors.suspect_prior().end());
      std::vector<double> trace(priors.trace_prior().begin(),
                                priors.trace_prior().end());
      std::vector<std::optional<double>> h1;
      for (std::size_t k = 0; k < priors.size(); ++k) {
        h1.push_back(priors.h1_prior(k));
      }
      if (prior_axis->suspect_side) {
        suspect = reweighted_prior(suspect, index, *prior_value);
      } else {
        trace = reweighted_prior(trace, index, *prior_value);
      }
      priors = PriorConfig(std::move(suspect), std::move(trace), std::move(h1));
    }
    if (pi_h) {
      coords.emplace_back("pi_h", *pi_h);
      priors = priors.with_h1_prior(*pi_h);
    }
    grid.push_back(SweepPoint{std::move(coords), std::move(priors)});
  };

  if (prior_axis && !pi_h_values.empty()) {
    for (double pv : prior_axis->values) {
      for (double hv : pi_h_values) add_point(pv, hv);
    }
  } else if (prior_axis) {
    for (double pv : prior_axis->values) add_point(pv, std::nullopt);
  } else {
    for (double hv : pi_h_values) add_point(std::nullopt, hv);
  }

  const double effective_theta = theta.value_or(file.threshold);
  const auto rows = sensitivity_sweep(file.evidence, file.catalog, grid,
                                      effective_theta);
  std::cout << render_sweep(rows, to_format(output));
  return kExitOk;
}

int run_simulate(const std::string& path, std::size_t cases,
                 std::optional<std::uint64_t> seed, bool calibration,
                 bool error_rates, int bins, std::optional<double> theta,
                 const std::string& rule_name, const std::string& source_name,
                 const std::string& output) {
  const ScenarioFile scenario = load_scenario_file(path);
  ScenarioSpec spec{
      .catalog = scenario.catalog,
      .analysis_priors = scenario.priors,
      .generating_priors = scenario.generating_priors,
      .suspect_recordings = scenario.suspect_recordings,
      .trace_recordings = scenario.trace_recordings,
      .seed = seed.value_or(scenario.seed),
  };

  if (calibration && error_rates) {
    throw ValidationError("choose one of --calibration or --error-rates");
  }
  if (error_rates) {
    const ErrorRates rates = error_rate_experiment(
        spec, cases, theta.value_or(kDefaultReasonableDoubtThreshold),
        to_rule(rule_name), to_source(source_name));
    std::cout << render_error_rates(rates, to_format(output));
  } else {
    const CalibrationTable table =
        calibration_experiment(spec, cases, bins, to_source(source_name));
    std::cout << render_calibration(table, to_format(output));
  }
  return kExitOk;
}

int run_oracle(const std::string& path, const std::string& check, int points,
               std::size_t samples, std::uint64_t seed,
               const std::string& output) {
  const CaseFile file = load_case_file(path);
  const bool machine = to_format(output) == OutputFormat::machine;
  const bool all = check.empty();

  if (all || check == "marginal") {
    for (const auto& model : file.catalog.categories()) {
      const auto compare = [&](const char* side,
                               const std::vector<Eigen::VectorXd>& recs) {
        const double closed = marginal_log_likelihood(recs, model);
        const std::string base =
            "oracle.marginal." + model.id() + "." + side;
        if (model.dim() <= 2) {
          const auto spec = QuadratureSpec::covering(model, recs, points);
          const double quad = quadrature_marginal(recs, model, spec);
          if (machine) {
            std::cout << base << ".closed=" << format_double(closed) << "\n"
                      << base << ".quadrature=" << format_double(quad) << "\n"
                      << base << ".gap=" << format_double(quad - closed)
                      << "\n";
          } else {
            std::cout << model.id() << " " << side << ": closed "
                      << format_double(closed) << ", quadrature "
                      << format_double(quad) << ", gap "
                      << format_double(quad - closed) << "\n";
          }
        } else {
          const McEstimate mc = mc_marginal(recs, model, samples, seed);
          if (machine) {
            std::cout << base << ".closed=" << format_double(closed) << "\n"
                      << base << ".mc=" << format_double(mc.log_value) << "\n"
                      << base << ".mc_se=" << format_double(mc.standard_error)
                      << "\n";
          } else {
            std::cout << model.id() << " " << side << ": closed "
                      << format_double(closed) << ", mc "
                      << format_double(mc.log_value) << " +/- "
                      << format_double(mc.standard_error) << "\n";
          }
        }
      };
      compare("suspect", file.evidence.suspect_recordings());
      compare("trace", file.evidence.trace_recordings());
    }
  }

  if (all || check == "joint") {
    const JointHypothesisSpace space(file.catalog, file.priors);
    double h1_mass = 0.0;
    for (std::size_t k = 0; k < file.catalog.size(); ++k) {
      h1_mass += space.prior_mass(k, k, true);
    }
    if (machine) {
      std::cout << "oracle.joint.total_mass="
                << format_double(space.total_prior_mass()) << "\n";
      std::cout << "oracle.joint.h1_mass=" << format_double(h1_mass) << "\n";
    } else {
      std::cout << "joint prior: total mass "
                << format_double(space.total_prior_mass()) << ", same-source "
                << "mass " << format_double(h1_mass) << "\n";
    }
  }

  if (all || check == "posterior") {
    const DiscrepancyReport d =
        discrepancy_report(file.evidence, file.catalog, file.priors);
    if (machine) {
      std::cout << "oracle.posterior.general_formula="
                << format_double(d.general_formula) << "\n";
      std::cout << "oracle.posterior.exact_enumeration="
                << format_double(d.exact_enumeration) << "\n";
      std::cout << "oracle.posterior.absolute_gap="
                << format_double(d.absolute_gap) << "\n";
      std::cout << "oracle.posterior.relative_gap="
                << format_double(d.relative_gap) << "\n";
    } else {
      std::cout << "posterior: summation formula "
                << format_double(d.general_formula) << ", exact enumeration "
                << format_double(d.exact_enumeration) << ", absolute gap "
                << format_double(d.absolute_gap) << ", relative gap "
                << format_double(d.relative_gap) << "\n";
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian identity-of-source inference over sub-population "
               "mixtures"};
  app.require_subcommand(1);

  std::string file;
  std::string output = "text";
  std::string mode = "general";
  std::string rule = "exact";
  std::string source = "general";
  std::string check;
  std::string pi_h_range;
  std::string prior_grid;
  std::optional<double> theta;
  std::optional<std::uint64_t> seed_override;
  std::size_t cases = 0;
  std::uint64_t oracle_seed = 0;
  std::size_t samples = 100000;
  int points = 4096;
  int bins = 10;
  bool with_oracle = false;
  bool calibration = false;
  bool error_rates = false;

  bool log_domain = true;
  const auto add_output = [&](CLI::App* cmd) {
    cmd->add_option("--output", output, "Output format")
        ->check(CLI::IsMember({"text", "machine"}));
    cmd->add_flag("--log-domain", log_domain,
                  "Emit log-scale values alongside linear ones (always on)");
  };

  auto* validate = app.add_subcommand("validate", "Check a case file");
  validate->add_option("file", file, "Case file")->required();
  add_output(validate);

  auto* lr = app.add_subcommand(
      "lr", "Scientist mode: likelihood ratios only, no priors");
  lr->add_option("file", file, "Case file")->required();
  add_output(lr);

  auto* posterior =
      app.add_subcommand("posterior", "Full posterior report for a case");
  posterior->add_option("file", file, "Case file")->required();
  posterior->add_option("--mode", mode, "Posterior formula")
      ->check(CLI::IsMember({"factorized", "general"}));
  posterior->add_flag("--with-oracle", with_oracle,
                      "Append the enumeration cross-check");
  add_output(posterior);

  auto* decide_cmd =
      app.add_subcommand("decide", "Threshold decision with exit status");
  decide_cmd->add_option("file", file, "Case file")->required();
  decide_cmd->add_option("--theta", theta, "Reasonable-doubt threshold");
  decide_cmd->add_option("--rule", rule, "Decision rule")
      ->check(CLI::IsMember({"three-tests", "additive", "exact"}));
  add_output(decide_cmd);

  auto* sweep = app.add_subcommand("sweep", "Prior sensitivity sweep");
  sweep->add_option("file", file, "Case file")->required();
  sweep->add_option("--pi-h", pi_h_range,
                    "Same-source prior grid a:b:n (applied to every "
                    "joint-support category)");
  sweep->add_option("--prior-grid", prior_grid,
                    "Category prior grid side:id=a:b:n");
  sweep->add_option("--theta", theta, "Reasonable-doubt threshold");
  add_output(sweep);

  auto* simulate =
      app.add_subcommand("simulate", "Synthetic-case experiments");
  simulate->add_option("--spec", file, "Scenario file")->required();
  simulate->add_option("--cases", cases, "Number of cases")->required();
  simulate->add_option("--seed", seed_override, "Override the scenario seed");
  simulate->add_flag("--calibration", calibration,
                     "Reliability table (default)");
  simulate->add_flag("--error-rates", error_rates, "Decision error rates");
  simulate->add_option("--bins", bins, "Calibration bins");
  simulate->add_option("--theta", theta, "Reasonable-doubt threshold");
  simulate->add_option("--rule", rule, "Decision rule")
      ->check(CLI::IsMember({"three-tests", "additive", "exact"}));
  simulate->add_option("--posterior-source", source,
                       "Posterior fed to decisions")
      ->check(CLI::IsMember({"general", "exact"}));
  add_output(simulate);

  auto* oracle =
      app.add_subcommand("oracle", "Independent numerical cross-checks");
  oracle->add_option("file", file, "Case file")->required();
  oracle->add_option("--check", check, "Which check to run")
      ->check(CLI::IsMember({"marginal", "joint", "posterior"}));
  oracle->add_option("--points", points, "Quadrature points per dimension");
  oracle->add_option("--samples", samples, "Monte Carlo samples");
  oracle->add_option("--seed", oracle_seed, "Monte Carlo seed");
  add_output(oracle);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (app.got_subcommand(validate)) return run_validate(file, output);
    if (app.got_subcommand(lr)) return run_lr(file, output);
    if (app.got_subcommand(posterior)) {
      return run_posterior(file, mode, output, with_oracle);
    }
    if (app.got_subcommand(decide_cmd)) {
      return run_decide(file, theta, rule, output);
    }
    if (app.got_subcommand(sweep)) {
      return run_sweep(file, pi_h_range, prior_grid, theta, output);
    }
    if (app.got_subcommand(simulate)) {
      return run_simulate(file, cases, seed_override, calibration, error_rates,
                          bins, theta, rule, source, output);
    }
    if (app.got_subcommand(oracle)) {
      return run_oracle(file, check, points, samples, oracle_seed, output);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}
