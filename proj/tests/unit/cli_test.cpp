#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "bagvote/csv.hpp"
#include "bagvote/io.hpp"
#include "cli/config.hpp"
#include "cli/stages.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

namespace bagvote {
namespace {

namespace fs = std::filesystem;
using testing::code_of;
using testing::line;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Every regular file under dir keyed by relative path.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return out;
}

int run(const std::string& args) {
  const std::string cmd = std::string(BAGVOTE_EXE) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("bagvote_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string out(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

const char* kSmallRun = "--bags 300 --bag-fraction 0.35 --k-max 3 --restarts 2";

TEST(Config, JsonRoundTrip) {
  cli::RunConfig c;
  c.seed = 77;
  c.input = "data.csv";
  c.schema.kind = "alloy21";
  c.schema.ignored_columns = {"note"};
  c.standardize = false;
  c.sigma_grid = {0.5, 1.0};
  c.lambda = 0.01;
  c.bags = 123;
  c.bag_fraction = 0.5;
  c.focus_ids = {"a", "b"};
  c.delta_thres = 0.02;
  c.n_neighbors.reset();
  c.k_thres = 0.4;
  c.eq5_literal = true;
  c.k_max = 4;
  c.workers = 3;
  const auto back = cli::config_from_json(cli::to_json(c));
  EXPECT_EQ(cli::to_json(back), cli::to_json(c));
  EXPECT_EQ(back.seed, 77u);
  EXPECT_EQ(back.k_thres, 0.4);
  EXPECT_FALSE(back.n_neighbors);
  EXPECT_FALSE(back.sigma);
}

TEST(Config, DefaultsSurviveEmptyDocument) {
  const auto c = cli::config_from_json(nlohmann::json::object());
  EXPECT_EQ(cli::to_json(c), cli::to_json(cli::RunConfig{}));
  EXPECT_EQ(c.prototype_n, 70u);
  EXPECT_EQ(c.bag_fraction, 0.66);
  EXPECT_EQ(c.n_neighbors, 5u);
  EXPECT_EQ(c.k_max, 10u);
  EXPECT_EQ(c.restarts, 10u);
}

TEST(Config, UnknownKeysRejected) {
  EXPECT_EQ(code_of([] { cli::config_from_json({{"sede", 1}}); }), Errc::kConfig);
  EXPECT_EQ(code_of([] { cli::config_from_json({{"vote", {{"delta", 1}}}}); }), Errc::kConfig);
}

TEST(Config, ValidationCatchesBadFields) {
  const auto bad = [](auto mutate) {
    cli::RunConfig c;
    mutate(c);
    return code_of([&] { c.validate(); });
  };
  EXPECT_EQ(bad([](cli::RunConfig& c) { c.bag_fraction = 1.0; }), Errc::kConfig);
  EXPECT_EQ(bad([](cli::RunConfig& c) { c.bags = 0; }), Errc::kConfig);
  EXPECT_EQ(bad([](cli::RunConfig& c) { c.workers = 0; }), Errc::kConfig);
  EXPECT_EQ(bad([](cli::RunConfig& c) { c.k_thres = 0.5; }), Errc::kConfig);
  EXPECT_EQ(bad([](cli::RunConfig& c) { c.delta_percentile = 120; }), Errc::kConfig);
  EXPECT_EQ(bad([](cli::RunConfig& c) { c.schema.kind = "other"; }), Errc::kConfig);
  EXPECT_NO_THROW(cli::RunConfig{}.validate());
}

TEST(TopPairs, OrderedByDistanceThenIndex) {
  Eigen::MatrixXd d(3, 3);
  d << 0, 0.5, 0.2, 0.5, 0, 0.5, 0.2, 0.5, 0;
  const auto pairs = cli::top_pairs(d, 10);
  ASSERT_EQ(pairs.size(), 3u);
  EXPECT_EQ(pairs[0].i, 0u);
  EXPECT_EQ(pairs[0].j, 1u);
  EXPECT_EQ(pairs[1].i, 1u);
  EXPECT_EQ(pairs[1].j, 2u);
  EXPECT_EQ(pairs[2].distance, 0.2);
  EXPECT_EQ(cli::top_pairs(d, 1).size(), 1u);
}

TEST_F(CliTest, SynthIsDeterministic) {
  ASSERT_EQ(run("synth --seed 1 --out " + out("a")), 0);
  ASSERT_EQ(run("synth --seed 1 --out " + out("b")), 0);
  EXPECT_EQ(slurp(dir_ / "a" / "prototype.csv"), slurp(dir_ / "b" / "prototype.csv"));
  EXPECT_EQ(csv::read(dir_ / "a" / "prototype.csv").rows.size(), 70u);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run("synth --n 5 --out " + out("a")), 2);
  EXPECT_EQ(run("synth --no-such-flag"), 2);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("pipeline --bag-fraction 1.5 --out " + out("b")), 2);
  EXPECT_EQ(run("tune --input " + out("missing.csv") + " --out " + out("c")), 3);
  EXPECT_EQ(run("report " + out("empty")), 3);
  fs::create_directories(dir_ / "empty");
  EXPECT_EQ(run("report " + out("empty")), 3);
}

TEST_F(CliTest, PipelineOutputsParseAndRerunIdentically) {
  ASSERT_EQ(run(std::string("pipeline --seed 3 ") + kSmallRun + " --focus i010 --out " + out("a")), 0);
  const fs::path a = dir_ / "a";
  for (const char* f : {"config_echo.json", "cv_report.csv", "hyperparams.json", "predictions.csv",
                        "bag_summary.json", "gmm_summary.csv", "dissimilarity.csv", "exposures.csv",
                        "dissimilarity_rate.csv", "distance.csv", "qualifying.csv", "vote_summary.json",
                        "dendrogram.json", "dendrogram.nwk", "clusters.csv", "contributions/i010.csv"}) {
    EXPECT_TRUE(fs::exists(a / f)) << f;
  }
  std::vector<std::string> ids;
  const auto votes = io::read_count_matrix(a / "dissimilarity.csv", &ids);
  const auto exposures = io::read_count_matrix(a / "exposures.csv");
  EXPECT_EQ(ids.size(), 70u);
  EXPECT_TRUE((votes.array() <= exposures.array()).all());
  const auto distance = io::read_real_matrix(a / "distance.csv");
  EXPECT_EQ(distance, distance.transpose());
  EXPECT_EQ(io::read_dendrogram(a / "dendrogram.json").merges.size(), 69u);
  EXPECT_EQ(io::read_clusters(a / "clusters.csv").size(), 70u);
  EXPECT_FALSE(io::read_cv_report(a / "cv_report.csv").empty());
  EXPECT_NO_THROW(io::read_gmm(a / "gmm" / "i010.json"));
  const auto echo = cli::load_config(a / "config_echo.json");
  EXPECT_EQ(echo.seed, 3u);
  EXPECT_EQ(echo.bags, 300u);

  ASSERT_EQ(run(std::string("pipeline --seed 3 ") + kSmallRun + " --focus i010 --workers 3 --out " + out("b")),
            0);
  auto first = snapshot(a), second = snapshot(dir_ / "b");
  first.erase("config_echo.json");
  second.erase("config_echo.json");
  EXPECT_EQ(first, second);
}

TEST_F(CliTest, StagesCompose) {
  const std::string common = std::string("--seed 4 ") + kSmallRun + " --out " + out("s");
  ASSERT_EQ(run("tune " + common), 0);
  ASSERT_EQ(run("bag " + common), 0);
  ASSERT_EQ(run("gmm " + common), 0);
  ASSERT_EQ(run("vote " + common), 0);
  ASSERT_EQ(run("cluster " + common), 0);
  ASSERT_EQ(run("pipeline " + std::string("--seed 4 ") + kSmallRun + " --out " + out("p")), 0);
  for (const char* f : {"distance.csv", "clusters.csv", "gmm_summary.csv"}) {
    EXPECT_EQ(slurp(dir_ / "s" / f), slurp(dir_ / "p" / f)) << f;
  }
  // A changed bag count no longer matches the stored bags.
  EXPECT_EQ(run("vote --seed 4 --bags 301 --bag-fraction 0.35 --out " + out("s")), 3);
}

TEST_F(CliTest, ReportIsReadOnly) {
  ASSERT_EQ(run(std::string("pipeline --seed 5 ") + kSmallRun + " --out " + out("r")), 0);
  const auto before = snapshot(dir_ / "r");
  std::ostringstream text;
  cli::report(dir_ / "r", text);
  EXPECT_NE(text.str().find("top dissimilar pairs"), std::string::npos);
  EXPECT_NE(text.str().find("selected K histogram"), std::string::npos);
  EXPECT_EQ(snapshot(dir_ / "r"), before);
  EXPECT_EQ(run("report " + out("r")), 0);
}

// Exhaustive p = 4 toy: every 2-subset is a bag. The top pair in the report
// must be the pair with the largest oracle vote-rate distance.
TEST_F(CliTest, ReportTopPairMatchesEnumeration) {
  const auto d = line({0.0, 0.4, 1.1, 1.5}, {0.2, 0.5, -0.1, 0.3});
  const auto sets = oracle::combinations(4, 2);
  const auto plan = BagPlan::from_train_sets(4, sets);
  BaggingOptions o;
  o.params.sigma = 0.8;
  o.lambda = 0.01;
  const auto store = run_bagging(d, plan, o);
  const double delta = error_quantile(store, 0.5);

  oracle::Mat err(6, oracle::Vec(4, std::numeric_limits<double>::quiet_NaN()));
  for (std::size_t j = 0; j < 4; ++j) {
    for (const auto& r : store.records(j)) err[r.bag][j] = r.abs_error;
  }
  oracle::Relation all(4, std::vector<bool>(4, true));
  const auto ref = oracle::brute_force_votes(4, sets, err, delta, all);
  const auto rate = [&](std::size_t i, std::size_t j) {
    return ref.exposures[i][j] == 0 ? 0.0
                                    : static_cast<double>(ref.votes[i][j]) / static_cast<double>(ref.exposures[i][j]);
  };
  double best = -1.0;
  std::size_t bi = 0, bj = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) {
      const double dist = (rate(i, j) + rate(j, i)) / 2.0;
      if (dist > best) {
        best = dist;
        bi = i;
        bj = j;
      }
    }
  }

  IndexLists neighbors(4);
  for (std::size_t j = 0; j < 4; ++j) {
    for (std::size_t i = 0; i < 4; ++i) {
      if (i != j) neighbors[j].push_back(i);
    }
  }
  const auto m = vote(store, plan, qualifying_records(store, d, delta), neighbors);
  io::write_real_matrix(dir_ / "distance.csv", normalize(m).distance, d.ids());
  std::ostringstream text;
  cli::report(dir_, text);
  const std::string expected = "  " + d.ids()[bi] + ' ' + d.ids()[bj] + ' ' + csv::format_double(best) + '\n';
  const auto at = text.str().find("top dissimilar pairs");
  ASSERT_NE(at, std::string::npos);
  EXPECT_EQ(text.str().substr(text.str().find('\n', at) + 1, expected.size()), expected) << text.str();
}

}  // namespace
}  // namespace bagvote
