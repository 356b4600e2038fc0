#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bagvote/error.hpp"
#include "cli/config.hpp"
#include "cli/stages.hpp"

namespace {

using bagvote::cli::RunConfig;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> input;
  std::optional<std::size_t> n;
  std::optional<std::string> schema;
  std::optional<std::string> id_column;
  std::optional<std::string> target_column;
  std::vector<std::string> ignore;
  bool no_standardize = false;
  std::optional<std::size_t> folds;
  std::optional<double> sigma;
  std::optional<double> lambda;
  std::optional<std::size_t> bags;
  std::optional<double> bag_fraction;
  bool per_bag_cv = false;
  std::vector<std::string> focus;
  std::optional<double> delta_thres;
  std::optional<double> delta_percentile;
  std::optional<std::size_t> n_neighbors;
  std::optional<double> k_thres;
  bool eq5_literal = false;
  std::optional<std::size_t> k_max;
  std::optional<std::size_t> restarts;
  std::optional<std::size_t> clusters;
  std::optional<std::size_t> workers;
  std::optional<std::string> out;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON run configuration");
  app->add_option("--seed", o.seed, "master seed");
  app->add_option("--out", o.out, "run directory");
  app->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--input", o.input, "CSV dataset (default: generated prototype)");
  app->add_option("--n", o.n, "prototype instance count");
  app->add_option("--schema", o.schema, "'columns' or 'alloy21'");
  app->add_option("--id-column", o.id_column, "id column name");
  app->add_option("--target-column", o.target_column, "target column name");
  app->add_option("--ignore", o.ignore, "columns to skip")->delimiter(',');
  app->add_flag("--no-standardize", o.no_standardize, "use descriptors unscaled");
  app->add_option("--folds", o.folds, "cross-validation folds");
  app->add_option("--sigma", o.sigma, "fix the kernel width");
  app->add_option("--lambda", o.lambda, "fix the ridge strength");
  app->add_option("--bags", o.bags, "bag count T");
  app->add_option("--bag-fraction", o.bag_fraction, "training fraction per bag");
  app->add_flag("--per-bag-cv", o.per_bag_cv, "cross-validate inside every bag");
  app->add_option("--focus", o.focus, "ids whose contributions are stored")->delimiter(',');
  app->add_option("--delta-thres", o.delta_thres, "absolute error tolerance");
  app->add_option("--delta-percentile", o.delta_percentile, "tolerance as a percentile of bag errors");
  auto* nn = app->add_option("--n-neighbors", o.n_neighbors, "neighbors per instance");
  auto* kt = app->add_option("--k-thres", o.k_thres, "kernel similarity threshold");
  nn->excludes(kt);
  app->add_flag("--eq5-literal", o.eq5_literal, "vote on non-neighbors instead");
  app->add_option("--k-max", o.k_max, "largest mixture size");
  app->add_option("--restarts", o.restarts, "EM restarts");
  app->add_option("--clusters", o.clusters, "flat cluster count");
}

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : bagvote::cli::load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.input) c.input = *o.input;
  if (o.n) c.prototype_n = *o.n;
  if (o.schema) c.schema.kind = *o.schema;
  if (o.id_column) c.schema.id_column = *o.id_column;
  if (o.target_column) c.schema.target_column = *o.target_column;
  if (!o.ignore.empty()) c.schema.ignored_columns = o.ignore;
  if (o.no_standardize) c.standardize = false;
  if (o.folds) c.folds = *o.folds;
  if (o.sigma) c.sigma = *o.sigma;
  if (o.lambda) c.lambda = *o.lambda;
  if (o.bags) c.bags = *o.bags;
  if (o.bag_fraction) c.bag_fraction = *o.bag_fraction;
  if (o.per_bag_cv) c.per_bag_cv = true;
  if (!o.focus.empty()) c.focus_ids = o.focus;
  if (o.delta_thres) c.delta_thres = *o.delta_thres;
  if (o.delta_percentile) {
    c.delta_percentile = *o.delta_percentile;
    c.delta_thres.reset();
  }
  if (o.n_neighbors) {
    c.n_neighbors = *o.n_neighbors;
    c.k_thres.reset();
  }
  if (o.k_thres) {
    c.k_thres = *o.k_thres;
    c.n_neighbors.reset();
  }
  if (o.eq5_literal) c.eq5_literal = true;
  if (o.k_max) c.k_max = *o.k_max;
  if (o.restarts) c.restarts = *o.restarts;
  if (o.clusters) c.clusters = *o.clusters;
  if (o.workers) c.workers = *o.workers;
  if (o.out) c.out = *o.out;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bagging kernel ridge regression with dissimilarity voting"};
  app.require_subcommand(1);
  Overrides o;
  std::string report_dir;

  struct Command {
    const char* name;
    const char* help;
    void (*run)(const RunConfig&);
  };
  const Command commands[] = {
      {"synth", "write the bifurcated prototype dataset", bagvote::cli::cmd_synth},
      {"tune", "cross-validate sigma and lambda", bagvote::cli::cmd_tune},
      {"bag", "run the bagging ensemble", bagvote::cli::cmd_bag},
      {"gmm", "fit a mixture to each instance's predictions", bagvote::cli::cmd_gmm},
      {"vote", "vote dissimilarity between neighbors", bagvote::cli::cmd_vote},
      {"cluster", "cluster the vote-rate distance", bagvote::cli::cmd_cluster},
      {"pipeline", "run every stage", bagvote::cli::cmd_pipeline},
  };
  for (const auto& command : commands) add_common(app.add_subcommand(command.name, command.help), o);
  auto* report = app.add_subcommand("report", "summarize a finished run");
  report->add_option("run_dir", report_dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (report->parsed()) {
      bagvote::cli::report(report_dir, std::cout);
      return 0;
    }
    const RunConfig config = resolve(o);
    for (const auto& command : commands) {
      if (app.got_subcommand(command.name)) command.run(config);
    }
    return 0;
  } catch (const bagvote::Error& e) {
    std::cerr << "bagvote: " << e.what() << '\n';
    return bagvote::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "bagvote: " << e.what() << '\n';
    return 3;
  }
}
