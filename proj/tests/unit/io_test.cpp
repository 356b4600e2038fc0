#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "bagvote/csv.hpp"
#include "bagvote/io.hpp"
#include "helpers.hpp"

namespace bagvote {
namespace {

namespace fs = std::filesystem;
using testing::code_of;
using testing::random_dataset;

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("bagvote_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST_F(IoTest, CvReportRoundTrip) {
  CvReport r;
  r.grid = {{0.5, 1e-3, 0.125, 0.9}, {1.0 / 3.0, 1e-6, 0.2, -0.1}};
  r.sigma = 0.5;
  r.lambda = 1e-3;
  io::write_cv_report(dir_ / "cv.csv", r);
  EXPECT_EQ(csv::read(dir_ / "cv.csv").header,
            (std::vector<std::string>{"sigma", "lambda", "fold_mae_mean", "fold_r2_mean"}));
  const auto back = io::read_cv_report(dir_ / "cv.csv");
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t g = 0; g < 2; ++g) {
    EXPECT_EQ(back[g].sigma, r.grid[g].sigma);
    EXPECT_EQ(back[g].lambda, r.grid[g].lambda);
    EXPECT_EQ(back[g].mae, r.grid[g].mae);
    EXPECT_EQ(back[g].r2, r.grid[g].r2);
  }
}

TEST_F(IoTest, PredictionsRoundTripExactly) {
  Rng rng(61);
  const auto d = random_dataset(rng, 9, 2);
  const auto plan = make_bag_plan(9, 0.5, 12, 3);
  const auto store = run_bagging(d, plan, {});
  io::write_predictions(dir_ / "pred.csv", store, d);
  const auto back = io::read_predictions(dir_ / "pred.csv", d, 12);
  ASSERT_EQ(back.p(), 9u);
  for (std::size_t j = 0; j < 9; ++j) {
    ASSERT_EQ(back.records(j).size(), store.records(j).size());
    for (std::size_t k = 0; k < store.records(j).size(); ++k) {
      EXPECT_EQ(back.records(j)[k].bag, store.records(j)[k].bag);
      EXPECT_EQ(back.records(j)[k].y_hat, store.records(j)[k].y_hat);
      EXPECT_EQ(back.records(j)[k].abs_error, store.records(j)[k].abs_error);
    }
  }
}

TEST_F(IoTest, PredictionsWithUnknownIdRejected) {
  Rng rng(62);
  const auto d = random_dataset(rng, 4, 1);
  std::ofstream(dir_ / "pred.csv") << "instance_id,bag_index,y_hat,abs_error\nnobody,0,1,1\n";
  EXPECT_EQ(code_of([&] { io::read_predictions(dir_ / "pred.csv", d, 1); }), Errc::kConsistency);
}

TEST_F(IoTest, ContributionsRoundTrip) {
  const auto proto = generate_prototype(3, 12);
  const auto plan = make_bag_plan(12, 0.5, 8, 3);
  BaggingOptions o;
  o.store_contributions = true;
  o.focus = {2, 7};
  const auto store = run_bagging(proto.data, plan, o);
  io::write_contributions(dir_ / "contrib", store, proto.data);
  EXPECT_TRUE(fs::exists(dir_ / "contrib" / (proto.data.ids()[2] + ".csv")));
  EXPECT_FALSE(fs::exists(dir_ / "contrib" / (proto.data.ids()[3] + ".csv")));
  const auto back = io::read_contributions(dir_ / "contrib" / (proto.data.ids()[7] + ".csv"), proto.data);
  const auto ref = contribution_profile(store, 7);
  EXPECT_EQ(back.bags, ref.bags);
  EXPECT_EQ(back.values, ref.values);
}

TEST_F(IoTest, GmmRoundTrip) {
  GmmFit f;
  f.k = 2;
  f.weights = {0.3, 0.7};
  f.means = {-1.0 / 7.0, 2.5};
  f.sds = {0.1, 0.2};
  f.log_likelihood = -123.456;
  f.bic = 300.25;
  f.n_samples = 99;
  f.restarts_used = 10;
  f.seed = 0xfeedfacecafebeefULL;
  f.iterations = 42;
  f.sd_floor = 1e-6;
  io::write_gmm(dir_ / "g.json", f);
  const auto b = io::read_gmm(dir_ / "g.json");
  EXPECT_EQ(b.k, f.k);
  EXPECT_EQ(b.weights, f.weights);
  EXPECT_EQ(b.means, f.means);
  EXPECT_EQ(b.sds, f.sds);
  EXPECT_EQ(b.log_likelihood, f.log_likelihood);
  EXPECT_EQ(b.bic, f.bic);
  EXPECT_EQ(b.n_samples, f.n_samples);
  EXPECT_EQ(b.seed, f.seed);
  EXPECT_EQ(b.iterations, f.iterations);
  EXPECT_EQ(b.sd_floor, f.sd_floor);
}

TEST_F(IoTest, MatricesRoundTrip) {
  const std::vector<std::string> ids{"a", "b,c", "d"};
  CountMatrix c(3, 3);
  c << 0, 1, 2, 3, 0, 5, 6, 7, 0;
  io::write_count_matrix(dir_ / "c.csv", c, ids);
  std::vector<std::string> back_ids;
  EXPECT_EQ(io::read_count_matrix(dir_ / "c.csv", &back_ids), c);
  EXPECT_EQ(back_ids, ids);
  Eigen::MatrixXd r(3, 3);
  r << 0, 0.1, 1.0 / 3.0, 0.1, 0, 2e-300, 1.0 / 3.0, 2e-300, 0;
  io::write_real_matrix(dir_ / "r.csv", r, ids);
  EXPECT_EQ(io::read_real_matrix(dir_ / "r.csv"), r);
}

TEST_F(IoTest, MatrixWithMismatchedRowIdsRejected) {
  std::ofstream(dir_ / "m.csv") << "id,a,b\na,0,1\nz,1,0\n";
  EXPECT_THROW(io::read_count_matrix(dir_ / "m.csv"), Error);
}

TEST_F(IoTest, DendrogramAndClustersRoundTrip) {
  Eigen::MatrixXd d(4, 4);
  d << 0, 1, 5, 6, 1, 0, 5.5, 6, 5, 5.5, 0, 2, 6, 6, 2, 0;
  const auto dg = agglomerate(d);
  const std::vector<std::string> ids{"w", "x", "y", "z"};
  io::write_dendrogram(dir_ / "dg.json", dg, ids);
  std::vector<std::string> back_ids;
  const auto back = io::read_dendrogram(dir_ / "dg.json", &back_ids);
  EXPECT_EQ(back_ids, ids);
  ASSERT_EQ(back.merges.size(), dg.merges.size());
  for (std::size_t m = 0; m < dg.merges.size(); ++m) {
    EXPECT_EQ(back.merges[m].left, dg.merges[m].left);
    EXPECT_EQ(back.merges[m].right, dg.merges[m].right);
    EXPECT_EQ(back.merges[m].height, dg.merges[m].height);
    EXPECT_EQ(back.merges[m].count, dg.merges[m].count);
  }
  const auto labels = cut(dg, 2);
  io::write_clusters(dir_ / "cl.csv", labels, ids);
  EXPECT_EQ(io::read_clusters(dir_ / "cl.csv"), labels);
}

TEST_F(IoTest, MissingFileIsIoError) {
  EXPECT_EQ(code_of([&] { io::read_gmm(dir_ / "absent.json"); }), Errc::kIo);
  EXPECT_EQ(code_of([&] { io::read_cv_report(dir_ / "absent.csv"); }), Errc::kIo);
}

}  // namespace
}  // namespace bagvote
