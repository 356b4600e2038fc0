#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bagvote/clustering.hpp"
#include "bagvote/dataset.hpp"
#include "bagvote/dissimilarity.hpp"
#include "bagvote/ensemble.hpp"
#include "bagvote/kernel_regression.hpp"
#include "bagvote/mixture.hpp"
#include "cli/config.hpp"

namespace bagvote::cli {

namespace fs = std::filesystem;

// Files written by one command. If the command fails, everything it wrote is
// renamed with a ".partial" suffix.
class Artifacts {
 public:
  explicit Artifacts(fs::path dir);
  const fs::path& dir() const { return dir_; }
  // Registers a file (or directory) under dir() and clears any stale
  // ".partial" copy of it.
  fs::path add(const fs::path& relative);
  void mark_partial() noexcept;

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
};

struct PreparedData {
  Dataset raw;
  Dataset model;  // standardized copy when enabled, otherwise raw
  std::optional<std::vector<Branch>> labels;  // prototype runs only
};

PreparedData prepare(const RunConfig& config);

struct Hyperparams {
  double sigma = 0.0;
  double lambda = 0.0;
};

CvReport tune(const PreparedData& data, const RunConfig& config);

struct BagOutcome {
  BagPlan plan;
  BagRunStore store;
};

BagOutcome bag(const PreparedData& data, const RunConfig& config, Hyperparams hp);

// One fit per instance; empty where the instance has fewer than 2 records.
std::vector<std::optional<GmmFit>> fit_mixtures(const BagRunStore& store, const RunConfig& config);

struct VoteOutcome {
  double delta_thres = 0.0;
  IndexLists qualifying;
  IndexLists neighbors;
  DissimMatrix dissim;
  NormalizedDissim normalized;
};

VoteOutcome vote_stage(const PreparedData& data, const BagRunStore& store, const BagPlan& plan,
                       const RunConfig& config, Hyperparams hp);

struct ClusterOutcome {
  Dendrogram dendrogram;
  std::vector<std::size_t> labels;
};

ClusterOutcome cluster_stage(const Eigen::MatrixXd& distance, const RunConfig& config);

// Artifact writers. Each returns nothing and registers its files.
void write_synth(Artifacts& out, const Prototype& proto);
void write_tune(Artifacts& out, const CvReport& report, Hyperparams hp, const RunConfig& config);
void write_bag(Artifacts& out, const PreparedData& data, const BagOutcome& bags, Hyperparams hp);
void write_mixtures(Artifacts& out, const PreparedData& data,
                    const std::vector<std::optional<GmmFit>>& fits);
void write_vote(Artifacts& out, const PreparedData& data, const BagRunStore& store,
                const VoteOutcome& vote);
void write_clusters(Artifacts& out, const std::vector<std::string>& ids, const ClusterOutcome& c);

// Readers used by the stage-by-stage commands.
Hyperparams read_hyperparams(const fs::path& run_dir);
BagRunStore read_bag_store(const fs::path& run_dir, const PreparedData& data, const RunConfig& config);

// Unordered pairs ranked by symmetrized distance, ties by (i, j).
struct RankedPair {
  std::size_t i = 0;
  std::size_t j = 0;
  double distance = 0.0;
};
std::vector<RankedPair> top_pairs(const Eigen::MatrixXd& distance, std::size_t count);

// Summary of a finished run directory; throws Errc::kIo when it holds no run.
void report(const fs::path& run_dir, std::ostream& out);

// Entry points shared by the executable and the tests. Each writes under
// config.out and returns normally on success; errors propagate.
void cmd_synth(const RunConfig& config);
void cmd_tune(const RunConfig& config);
void cmd_bag(const RunConfig& config);
void cmd_gmm(const RunConfig& config);
void cmd_vote(const RunConfig& config);
void cmd_cluster(const RunConfig& config);
void cmd_pipeline(const RunConfig& config);

}  // namespace bagvote::cli
