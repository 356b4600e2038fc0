// Hot paths of a pipeline run: gram matrices, single fits, a batch of bags,
// EM on one instance's prediction samples, and the vote accumulation.

#include <numeric>

#include <benchmark/benchmark.h>

#include "bagvote/dataset.hpp"
#include "bagvote/dissimilarity.hpp"
#include "bagvote/ensemble.hpp"
#include "bagvote/kernel_regression.hpp"
#include "bagvote/mixture.hpp"
#include "bagvote/random.hpp"

namespace {

using namespace bagvote;

Dataset random_dataset(std::size_t p, std::size_t m) {
  Rng rng(p * 131 + m);
  RowMatrix x(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(m));
  Eigen::VectorXd y(static_cast<Eigen::Index>(p));
  std::vector<std::string> ids, names;
  for (std::size_t c = 0; c < m; ++c) names.push_back("x" + std::to_string(c));
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t c = 0; c < m; ++c) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rng.normal();
    y[static_cast<Eigen::Index>(i)] = rng.normal();
    ids.push_back("r" + std::to_string(i));
  }
  return Dataset(std::move(ids), std::move(x), std::move(y), std::move(names));
}

void BM_Gram(benchmark::State& state) {
  const auto d = random_dataset(static_cast<std::size_t>(state.range(0)), 21);
  for (auto _ : state) benchmark::DoNotOptimize(gram_matrix(d.x(), {1.0}));
}
BENCHMARK(BM_Gram)->Arg(35)->Arg(70)->Arg(101);

void BM_FitPredict(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  const auto d = random_dataset(p, 21);
  std::vector<std::size_t> train(p * 2 / 3);
  std::iota(train.begin(), train.end(), 0);
  for (auto _ : state) {
    const auto model = fit_krr(d, train, {2.0}, 1e-3);
    benchmark::DoNotOptimize(predict_value(model, d, d.row(p - 1)));
  }
}
BENCHMARK(BM_FitPredict)->Arg(70)->Arg(101);

void BM_Bagging(benchmark::State& state) {
  const auto proto = generate_prototype(1);
  const auto plan = make_bag_plan(proto.data.p(), 0.35, static_cast<std::size_t>(state.range(0)), 1);
  BaggingOptions o;
  o.params.sigma = 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(run_bagging(proto.data, plan, o));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Bagging)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_SelectK(benchmark::State& state) {
  Rng rng(7);
  std::vector<double> v(static_cast<std::size_t>(state.range(0)));
  for (auto& x : v) x = rng.uniform() < 0.5 ? rng.normal(-0.1, 0.02) : rng.normal(0.2, 0.02);
  for (auto _ : state) benchmark::DoNotOptimize(select_k_bic(v, 10, 10, 1));
}
BENCHMARK(BM_SelectK)->Arg(1000)->Arg(13000)->Unit(benchmark::kMillisecond);

void BM_Vote(benchmark::State& state) {
  const auto proto = generate_prototype(1);
  const auto plan = make_bag_plan(proto.data.p(), 0.35, 2000, 1);
  BaggingOptions o;
  o.params.sigma = 0.5;
  const auto store = run_bagging(proto.data, plan, o);
  VoteConfig vc;
  vc.delta_thres = error_quantile(store, 0.1);
  vc.n_neighbors = static_cast<std::size_t>(state.range(0));
  const auto qualifying = qualifying_records(store, proto.data, vc.delta_thres);
  const auto neighbors = neighbor_sets(proto.data, o.params, vc);
  for (auto _ : state) benchmark::DoNotOptimize(vote(store, plan, qualifying, neighbors));
}
BENCHMARK(BM_Vote)->Arg(5)->Arg(69)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
