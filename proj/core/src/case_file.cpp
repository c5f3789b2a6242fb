// core/src/case_file.cpp

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

#include "relpop/case_file.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "relpop/errors.hpp"

namespace relpop {

namespace {

using Json = nlohmann::ordered_json;

// Path-carrying view onto a JSON node, so every diagnostic can name the
// field it is complaining about.
class Cursor {
 public:
  Cursor(const Json& node, std::string path)
      : node_(&node), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const Json& raw() const { return *node_; }

  [[noreturn]] void fail(const std::string& message) const {
    throw ValidationError(path_.empty() ? "(root)" : path_, message);
  }

  Cursor at(const std::string& key) const {
    require_object();
    if (!node_->contains(key)) fail("missing required field '" + key + "'");
    return Cursor((*node_)[key], join(key));
  }

  std::optional<Cursor> maybe(const std::string& key) const {
    require_object();
    if (!node_->contains(key)) return std::nullopt;
    return Cursor((*node_)[key], join(key));
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    require_object();
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : node_->items()) {
      if (!allowed.contains(key)) {
        Cursor(value, join(key)).fail("unknown field");
      }
    }
  }

  void require_object() const {
    if (!node_->is_object()) fail("expected an object");
  }

  void require_array() const {
    if (!node_->is_array()) fail("expected an array");
  }

  Cursor element(std::size_t i) const {
    return Cursor((*node_)[i], path_ + "[" + std::to_string(i) + "]");
  }

  std::size_t array_size() const {
    require_array();
    return node_->size();
  }

  double as_double() const {
    if (!node_->is_number()) fail("expected a number");
    const double v = node_->get<double>();
    if (!std::isfinite(v)) fail("number must be finite");
    return v;
  }

  std::int64_t as_integer() const {
    if (!node_->is_number_integer()) fail("expected an integer");
    return node_->get<std::int64_t>();
  }

  std::string as_string() const {
    if (!node_->is_string()) fail("expected a string");
    return node_->get<std::string>();
  }

  Eigen::VectorXd as_vector() const {
    require_array();
    Eigen::VectorXd v(static_cast<Eigen::Index>(node_->size()));
    for (std::size_t i = 0; i < node_->size(); ++i) {
      v[static_cast<Eigen::Index>(i)] = element(i).as_double();
    }
    return v;
  }

  Eigen::MatrixXd as_matrix() const {
    require_array();
    const std::size_t rows = node_->size();
    if (rows == 0) fail("matrix must be nonempty");
    Eigen::MatrixXd m;
    for (std::size_t i = 0; i < rows; ++i) {
      const Eigen::VectorXd row = element(i).as_vector();
      if (i == 0) {
        m.resize(static_cast<Eigen::Index>(rows), row.size());
      } else if (row.size() != m.cols()) {
        element(i).fail("matrix rows have unequal lengths");
      }
      m.row(static_cast<Eigen::Index>(i)) = row;
    }
    return m;
  }

 private:
  std::string join(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const Json* node_;
  std::string path_;
};

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
}

int parse_schema_version(const Cursor& root) {
  const auto version = root.at("schema_version").as_integer();
  if (version != 1) {
    root.at("schema_version").fail("unsupported schema version");
  }
  return static_cast<int>(version);
}

CategoryCatalog parse_catalog(const Cursor& node) {
  node.require_array();
  std::vector<CategoryModel> models;
  for (std::size_t i = 0; i < node.array_size(); ++i) {
    const Cursor entry = node.element(i);
    entry.allow_only({"id", "label", "mean", "between_cov", "within_cov"});
    const std::string id = entry.at("id").as_string();
    if (id.empty()) entry.at("id").fail("category id must be nonempty");
    const auto label = entry.maybe("label");
    try {
      models.emplace_back(id, label ? label->as_string() : id,
                          entry.at("mean").as_vector(),
                          entry.at("between_cov").as_matrix(),
                          entry.at("within_cov").as_matrix());
    } catch (const ValidationError& e) {
      entry.fail(e.what());
    }
  }
  try {
    return CategoryCatalog(std::move(models));
  } catch (const ValidationError& e) {
    node.fail(e.what());
  }
}

// One side's prior map {id: probability}; ids absent from the map carry
// zero mass (hard conditioning).
std::vector<double> parse_prior_map(const Cursor& node,
                                    const CategoryCatalog& catalog,
                                    std::vector<std::string>& warnings) {
  node.require_object();
  std::vector<double> prior(catalog.size(), 0.0);
  for (const auto& [id, value] : node.raw().items()) {
    const Cursor entry(value, node.path() + "." + id);
    const auto index = catalog.index_of(id);
    if (!index) entry.fail("unknown category id");
    const double p = entry.as_double();
    if (p < 0.0) entry.fail("probability must be nonnegative");
    if (p > 1.0) entry.fail("probability must not exceed 1");
    prior[*index] = p;
  }
  double sum = 0.0;
  for (double p : prior) sum += p;
  if (std::abs(sum - 1.0) > 1e-9) {
    node.fail("prior masses sum to " + std::to_string(sum) + ", not 1");
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    for (double& p : prior) p /= sum;
    warnings.push_back(node.path() + ": prior renormalized (sum was off by " +
                       std::to_string(sum - 1.0) + ")");
  }
  return prior;
}

std::vector<std::optional<double>> parse_h1_map(
    const Cursor& node, const CategoryCatalog& catalog) {
  node.require_object();
  std::vector<std::optional<double>> h1(catalog.size());
  for (const auto& [id, value] : node.raw().items()) {
    const Cursor entry(value, node.path() + "." + id);
    const auto index = catalog.index_of(id);
    if (!index) entry.fail("unknown category id");
    const double p = entry.as_double();
    if (p < 0.0 || p > 1.0) entry.fail("probability must lie in [0,1]");
    h1[*index] = p;
  }
  return h1;
}

PriorConfig parse_priors(const Cursor& node, const CategoryCatalog& catalog,
                         std::vector<std::string>& warnings) {
  node.allow_only({"suspect", "trace", "h1_given_category"});
  auto suspect = parse_prior_map(node.at("suspect"), catalog, warnings);
  auto trace = parse_prior_map(node.at("trace"), catalog, warnings);
  auto h1 = parse_h1_map(node.at("h1_given_category"), catalog);
  try {
    return PriorConfig(std::move(suspect), std::move(trace), std::move(h1));
  } catch (const ValidationError& e) {
    node.fail(e.what());
  }
}

std::vector<Eigen::VectorXd> parse_recordings(const Cursor& node,
                                              Eigen::Index dim) {
  node.require_array();
  if (node.array_size() == 0) node.fail("needs at least one recording");
  std::vector<Eigen::VectorXd> recordings;
  for (std::size_t i = 0; i < node.array_size(); ++i) {
    Eigen::VectorXd r = node.element(i).as_vector();
    if (r.size() != dim) {
      node.element(i).fail("recording dimension does not match the catalog");
    }
    recordings.push_back(std::move(r));
  }
  return recordings;
}

Evidence parse_evidence(const Cursor& node, const CategoryCatalog& catalog) {
  node.allow_only({"suspect_recordings", "trace_recordings"});
  return Evidence(
      parse_recordings(node.at("suspect_recordings"), catalog.dim()),
      parse_recordings(node.at("trace_recordings"), catalog.dim()));
}

double parse_threshold(const Cursor& root) {
  const auto threshold = root.maybe("threshold");
  if (!threshold) return kDefaultReasonableDoubtThreshold;
  const double theta = threshold->as_double();
  if (!(theta > 0.0 && theta < 1.0)) {
    threshold->fail("threshold must lie strictly between 0 and 1");
  }
  return theta;
}

Json prior_map_to_json(const CategoryCatalog& catalog,
                       std::span<const double> prior) {
  Json map = Json::object();
  for (std::size_t k = 0; k < catalog.size(); ++k) {
    if (prior[k] > 0.0) map[catalog.at(k).id()] = prior[k];
  }
  return map;
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  Json row = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back(v[i]);
  return row;
}

Json catalog_to_json(const CategoryCatalog& catalog) {
  Json entries = Json::array();
  for (const auto& model : catalog.categories()) {
    Json entry = Json::object();
    entry["id"] = model.id();
    entry["label"] = model.label();
    entry["mean"] = vector_to_json(model.mean());
    entry["between_cov"] = matrix_to_json(model.between_cov());
    entry["within_cov"] = matrix_to_json(model.within_cov());
    entries.push_back(std::move(entry));
  }
  return entries;
}

Json priors_to_json(const CategoryCatalog& catalog, const PriorConfig& priors) {
  Json node = Json::object();
  node["suspect"] = prior_map_to_json(catalog, priors.suspect_prior());
  node["trace"] = prior_map_to_json(catalog, priors.trace_prior());
  Json h1 = Json::object();
  for (std::size_t k = 0; k < catalog.size(); ++k) {
    if (priors.h1_prior(k)) h1[catalog.at(k).id()] = *priors.h1_prior(k);
  }
  node["h1_given_category"] = std::move(h1);
  return node;
}

Json recordings_to_json(const std::vector<Eigen::VectorXd>& recordings) {
  Json rows = Json::array();
  for (const auto& r : recordings) rows.push_back(vector_to_json(r));
  return rows;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open file '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

CaseFile parse_case_file(const std::string& text) {
  const Json document = parse_json(text);
  const Cursor root(document, "");
  root.allow_only(
      {"schema_version", "catalog", "priors", "evidence", "threshold"});

  const int version = parse_schema_version(root);
  std::vector<std::string> warnings;
  CategoryCatalog catalog = parse_catalog(root.at("catalog"));
  PriorConfig priors = parse_priors(root.at("priors"), catalog, warnings);
  Evidence evidence = parse_evidence(root.at("evidence"), catalog);
  const double threshold = parse_threshold(root);

  return CaseFile{version, std::move(catalog), std::move(priors),
                  std::move(evidence), threshold, std::move(warnings)};
}

CaseFile load_case_file(const std::filesystem::path& path) {
  return parse_case_file(read_file(path));
}

std::string serialize_case_file(const CaseFile& file) {
  Json document = Json::object();
  document["schema_version"] = file.schema_version;
  document["catalog"] = catalog_to_json(file.catalog);
  document["priors"] = priors_to_json(file.catalog, file.priors);
  Json evidence = Json::object();
  evidence["suspect_recordings"] =
      recordings_to_json(file.evidence.suspect_recordings());
  evidence["trace_recordings"] =
      recordings_to_json(file.evidence.trace_recordings());
  document["evidence"] = std::move(evidence);
  document["threshold"] = file.threshold;
  return document.dump(2) + "\n";
}

ScenarioFile parse_scenario_file(const std::string& text) {
  const Json document = parse_json(text);
  const Cursor root(document, "");
  root.allow_only({"schema_version", "catalog", "priors", "generating_priors",
                   "recordings_per_side", "seed"});

  const int version = parse_schema_version(root);
  std::vector<std::string> warnings;
  CategoryCatalog catalog = parse_catalog(root.at("catalog"));
  PriorConfig priors = parse_priors(root.at("priors"), catalog, warnings);

  std::optional<PriorConfig> generating;
  if (const auto node = root.maybe("generating_priors")) {
    generating = parse_priors(*node, catalog, warnings);
  }

  const Cursor counts = root.at("recordings_per_side");
  counts.allow_only({"suspect", "trace"});
  const auto suspect_count = counts.at("suspect").as_integer();
  const auto trace_count = counts.at("trace").as_integer();
  if (suspect_count < 1 || trace_count < 1) {
    counts.fail("recording counts must be at least 1");
  }

  std::uint64_t seed = 0;
  if (const auto node = root.maybe("seed")) {
    const auto s = node->as_integer();
    if (s < 0) node->fail("seed must be nonnegative");
    seed = static_cast<std::uint64_t>(s);
  }

  return ScenarioFile{version,
                      std::move(catalog),
                      std::move(priors),
                      std::move(generating),
                      static_cast<int>(suspect_count),
                      static_cast<int>(trace_count),
                      seed,
                      std::move(warnings)};
}

ScenarioFile load_scenario_file(const std::filesystem::path& path) {
  return parse_scenario_file(read_file(path));
}

}  // namespace relpop
