#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "bagvote/dataset.hpp"
#include "bagvote/dissimilarity.hpp"

namespace bagvote::cli {

struct SchemaConfig {
  // "columns" uses the fields below; "alloy21" uses the canonical descriptor list.
  std::string kind = "columns";
  std::string id_column = "id";
  std::string target_column;  // empty: "y" for columns, "Tc" for alloy21
  std::vector<std::string> descriptor_columns;  // empty: every column not named elsewhere
  std::vector<std::string> ignored_columns;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string input;  // CSV path; empty runs on the generated prototype
  std::size_t prototype_n = 70;
  SchemaConfig schema;
  bool standardize = true;

  std::vector<double> sigma_grid;   // empty: default grid
  std::vector<double> lambda_grid;  // empty: default grid
  std::size_t folds = 10;
  std::optional<double> sigma;   // fixes sigma, skipping its search
  std::optional<double> lambda;  // fixes lambda, skipping its search

  std::size_t bags = 10000;
  double bag_fraction = 0.66;
  bool per_bag_cv = false;
  std::vector<std::string> focus_ids;

  std::optional<double> delta_thres;  // absolute; overrides the percentile
  double delta_percentile = 10.0;
  std::optional<double> k_thres;
  std::optional<std::size_t> n_neighbors = 5;
  bool eq5_literal = false;

  std::size_t k_max = 10;
  std::size_t restarts = 10;

  std::size_t clusters = 2;
  std::size_t workers = 1;
  std::string out = "run";

  // Throws Errc::kConfig on any out-of-range field.
  void validate() const;
  VoteConfig vote_config(double delta) const;
};

nlohmann::json to_json(const RunConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const RunConfig& config);

DescriptorSchema resolve_schema(const SchemaConfig& schema);

}  // namespace bagvote::cli
