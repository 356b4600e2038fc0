#include "cli/config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "bagvote/ensemble.hpp"
#include "bagvote/error.hpp"

namespace bagvote::cli {

namespace {

constexpr const char* kModule = "cli";
using nlohmann::json;

[[noreturn]] void config_error(const std::string& message) {
  throw Error(Errc::kConfig, kModule, message);
}

void reject_unknown(const json& doc, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) config_error("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read_key(const json& doc, const char* key, T& target) {
  if (!doc.contains(key)) return;
  try {
    target = doc.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(std::string("invalid value for '") + key + "'");
  }
}

template <class T>
void read_optional(const json& doc, const char* key, std::optional<T>& target) {
  if (!doc.contains(key)) return;
  if (doc.at(key).is_null()) {
    target.reset();
    return;
  }
  T value{};
  read_key(doc, key, value);
  target = value;
}

template <class T>
json optional_json(const std::optional<T>& value) {
  return value ? json(*value) : json(nullptr);
}

}  // namespace

void RunConfig::validate() const {
  if (input.empty() && prototype_n < 10) config_error("prototype n must be >= 10");
  if (schema.kind != "columns" && schema.kind != "alloy21") {
    config_error("schema kind must be 'columns' or 'alloy21'");
  }
  for (double v : sigma_grid) {
    if (!(v > 0.0)) config_error("sigma grid values must be > 0");
  }
  for (double v : lambda_grid) {
    if (!(v >= 0.0)) config_error("lambda grid values must be >= 0");
  }
  if (folds < 2) config_error("folds must be >= 2");
  if (sigma && !(*sigma > 0.0)) config_error("sigma must be > 0");
  if (lambda && !(*lambda >= 0.0)) config_error("lambda must be >= 0");
  if (bags < 1) config_error("bags must be >= 1");
  if (!(bag_fraction > 0.0 && bag_fraction < 1.0)) config_error("bag_fraction must lie in (0, 1)");
  if (focus_ids.size() > kMaxFocusInstances) config_error("at most 64 focus ids");
  if (delta_thres && !(*delta_thres > 0.0)) config_error("delta_thres must be > 0");
  if (!(delta_percentile >= 0.0 && delta_percentile <= 100.0)) {
    config_error("delta_percentile must lie in [0, 100]");
  }
  if (k_thres.has_value() == n_neighbors.has_value()) {
    config_error("set exactly one of k_thres and n_neighbors");
  }
  // delta is checked above; a placeholder stands in for a percentile-derived one
  vote_config(delta_thres.value_or(1.0)).validate();
  if (k_max < 1) config_error("k_max must be >= 1");
  if (restarts < 1) config_error("restarts must be >= 1");
  if (clusters < 1) config_error("clusters must be >= 1");
  if (workers < 1) config_error("workers must be >= 1");
  if (out.empty()) config_error("output directory must be set");
}

VoteConfig RunConfig::vote_config(double delta) const {
  VoteConfig v;
  v.delta_thres = delta;
  v.k_thres = k_thres;
  v.n_neighbors = n_neighbors;
  v.literal_eq5 = eq5_literal;
  return v;
}

json to_json(const RunConfig& c) {
  json doc;
  doc["seed"] = c.seed;
  doc["input"] = c.input;
  doc["prototype_n"] = c.prototype_n;
  doc["schema"] = {{"kind", c.schema.kind},
                   {"id_column", c.schema.id_column},
                   {"target_column", c.schema.target_column},
                   {"descriptor_columns", c.schema.descriptor_columns},
                   {"ignored_columns", c.schema.ignored_columns}};
  doc["standardize"] = c.standardize;
  doc["cv"] = {{"sigma_grid", c.sigma_grid},
               {"lambda_grid", c.lambda_grid},
               {"folds", c.folds},
               {"sigma", optional_json(c.sigma)},
               {"lambda", optional_json(c.lambda)}};
  doc["bagging"] = {{"bags", c.bags},
                    {"bag_fraction", c.bag_fraction},
                    {"per_bag_cv", c.per_bag_cv},
                    {"focus_ids", c.focus_ids}};
  doc["vote"] = {{"delta_thres", optional_json(c.delta_thres)},
                 {"delta_percentile", c.delta_percentile},
                 {"k_thres", optional_json(c.k_thres)},
                 {"n_neighbors", optional_json(c.n_neighbors)},
                 {"eq5_literal", c.eq5_literal}};
  doc["gmm"] = {{"k_max", c.k_max}, {"restarts", c.restarts}};
  doc["clusters"] = c.clusters;
  doc["workers"] = c.workers;
  doc["out"] = c.out;
  return doc;
}

RunConfig config_from_json(const json& doc) {
  if (!doc.is_object()) config_error("config must be a JSON object");
  reject_unknown(doc,
                 {"seed", "input", "prototype_n", "schema", "standardize", "cv", "bagging", "vote",
                  "gmm", "clusters", "workers", "out"},
                 "config");
  RunConfig c;
  read_key(doc, "seed", c.seed);
  read_key(doc, "input", c.input);
  read_key(doc, "prototype_n", c.prototype_n);
  read_key(doc, "standardize", c.standardize);
  read_key(doc, "clusters", c.clusters);
  read_key(doc, "workers", c.workers);
  read_key(doc, "out", c.out);
  if (doc.contains("schema")) {
    const json& s = doc.at("schema");
    reject_unknown(s, {"kind", "id_column", "target_column", "descriptor_columns", "ignored_columns"},
                   "schema");
    read_key(s, "kind", c.schema.kind);
    read_key(s, "id_column", c.schema.id_column);
    read_key(s, "target_column", c.schema.target_column);
    read_key(s, "descriptor_columns", c.schema.descriptor_columns);
    read_key(s, "ignored_columns", c.schema.ignored_columns);
  }
  if (doc.contains("cv")) {
    const json& s = doc.at("cv");
    reject_unknown(s, {"sigma_grid", "lambda_grid", "folds", "sigma", "lambda"}, "cv");
    read_key(s, "sigma_grid", c.sigma_grid);
    read_key(s, "lambda_grid", c.lambda_grid);
    read_key(s, "folds", c.folds);
    read_optional(s, "sigma", c.sigma);
    read_optional(s, "lambda", c.lambda);
  }
  if (doc.contains("bagging")) {
    const json& s = doc.at("bagging");
    reject_unknown(s, {"bags", "bag_fraction", "per_bag_cv", "focus_ids"}, "bagging");
    read_key(s, "bags", c.bags);
    read_key(s, "bag_fraction", c.bag_fraction);
    read_key(s, "per_bag_cv", c.per_bag_cv);
    read_key(s, "focus_ids", c.focus_ids);
  }
  if (doc.contains("vote")) {
    const json& s = doc.at("vote");
    reject_unknown(s, {"delta_thres", "delta_percentile", "k_thres", "n_neighbors", "eq5_literal"},
                   "vote");
    read_optional(s, "delta_thres", c.delta_thres);
    read_key(s, "delta_percentile", c.delta_percentile);
    read_optional(s, "k_thres", c.k_thres);
    read_optional(s, "n_neighbors", c.n_neighbors);
    // Naming only k_thres switches the neighborhood mode.
    if (c.k_thres && !s.contains("n_neighbors")) c.n_neighbors.reset();
    read_key(s, "eq5_literal", c.eq5_literal);
  }
  if (doc.contains("gmm")) {
    const json& s = doc.at("gmm");
    reject_unknown(s, {"k_max", "restarts"}, "gmm");
    read_key(s, "k_max", c.k_max);
    read_key(s, "restarts", c.restarts);
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    config_error(path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

void save_config(const std::filesystem::path& path, const RunConfig& config) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::kIo, kModule, "cannot write " + path.string());
  out << to_json(config).dump(2) << '\n';
}

DescriptorSchema resolve_schema(const SchemaConfig& schema) {
  const bool alloy = schema.kind == "alloy21";
  const std::string target = !schema.target_column.empty() ? schema.target_column : alloy ? "Tc" : "y";
  DescriptorSchema s = alloy ? DescriptorSchema::alloy21(schema.id_column, target)
                             : DescriptorSchema{schema.id_column, target, schema.descriptor_columns, {}};
  s.ignored_columns = schema.ignored_columns;
  return s;
}

}  // namespace bagvote::cli
