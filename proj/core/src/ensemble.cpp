#include "bagvote/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bagvote/error.hpp"
#include "bagvote/parallel.hpp"
#include "bagvote/random.hpp"

namespace bagvote {

namespace {

constexpr const char* kModule = "ensemble";

// Per-bag output, merged into the store in bag order.
struct BagResult {
  bool failed = false;
  double sigma = 0.0;
  double lambda = 0.0;
  std::vector<std::size_t> test;
  std::vector<double> y_hat;
  // Full-length contribution vectors for focus instances in the test set.
  std::vector<std::pair<std::size_t, Eigen::VectorXd>> contributions;
};

}  // namespace

BagPlan::BagPlan(std::size_t p, double fraction, std::uint64_t seed,
                 std::vector<std::vector<std::size_t>> train)
    : p_(p), bag_fraction_(fraction), seed_(seed), train_(std::move(train)) {
  train_size_ = train_.empty() ? 0 : train_.front().size();
  membership_.assign(train_.size() * p_, 0);
  for (std::size_t t = 0; t < train_.size(); ++t) {
    for (auto i : train_[t]) membership_[t * p_ + i] = 1;
  }
}

std::vector<std::size_t> BagPlan::test(std::size_t t) const {
  std::vector<std::size_t> out;
  out.reserve(p_ - train_size_);
  for (std::size_t i = 0; i < p_; ++i) {
    if (!in_train(t, i)) out.push_back(i);
  }
  return out;
}

BagPlan BagPlan::from_train_sets(std::size_t p, std::vector<std::vector<std::size_t>> train_sets) {
  if (train_sets.empty()) throw Error(Errc::kSize, kModule, "no bags");
  const auto size = train_sets.front().size();
  if (size < 1 || size + 1 > p) {
    throw Error(Errc::kSize, kModule, "training subsets must have between 1 and p-1 members");
  }
  for (auto& set : train_sets) {
    std::sort(set.begin(), set.end());
    if (set.size() != size) throw Error(Errc::kSize, kModule, "training subsets differ in size");
    if (set.back() >= p || std::adjacent_find(set.begin(), set.end()) != set.end()) {
      throw Error(Errc::kRange, kModule, "training subset has out-of-range or repeated indices");
    }
  }
  return BagPlan(p, static_cast<double>(size) / static_cast<double>(p), 0, std::move(train_sets));
}

std::size_t bag_train_size(std::size_t p, double bag_fraction) {
  // The epsilon keeps products like 0.35 * 70 = 24.499999999999996 at 25.
  return static_cast<std::size_t>(std::floor(bag_fraction * static_cast<double>(p) + 0.5 + 1e-9));
}

BagPlan make_bag_plan(std::size_t p, double bag_fraction, std::size_t bags, std::uint64_t seed) {
  if (!(bag_fraction > 0.0 && bag_fraction < 1.0)) {
    throw Error(Errc::kSize, kModule, "bag fraction must lie in (0, 1)");
  }
  if (bags == 0) throw Error(Errc::kSize, kModule, "bag count must be >= 1");
  const std::size_t size = bag_train_size(p, bag_fraction);
  if (size < 2 || size + 1 > p) {
    throw Error(Errc::kSize, kModule,
                "training size " + std::to_string(size) + " for p=" + std::to_string(p) +
                    " leaves no room for a bag/test split");
  }
  std::vector<std::vector<std::size_t>> train(bags);
  for (std::size_t t = 0; t < bags; ++t) {
    Rng rng({seed, static_cast<std::uint64_t>(t)});
    train[t] = sample_without_replacement(p, size, rng);
  }
  return BagPlan(p, bag_fraction, seed, std::move(train));
}

bool BagRunStore::failed(std::size_t t) const {
  return std::binary_search(failed_.begin(), failed_.end(), t);
}

std::vector<std::size_t> BagRunStore::uncovered() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < records_.size(); ++j) {
    if (records_[j].empty()) out.push_back(j);
  }
  return out;
}

const std::vector<BagRunStore::ContributionRow>& BagRunStore::contribution_rows(std::size_t j) const {
  const auto it = contributions_.find(j);
  if (it == contributions_.end()) {
    throw Error(Errc::kCapability, kModule,
                "contributions were not stored for instance " + std::to_string(j));
  }
  return it->second;
}

BagRunStore BagRunStore::from_records(std::size_t p, std::size_t bags,
                                      std::vector<std::vector<BagRecord>> records,
                                      std::vector<std::size_t> failed) {
  if (records.size() != p) throw Error(Errc::kConsistency, kModule, "record table size differs from p");
  BagRunStore store;
  store.bags_ = bags;
  for (auto& list : records) {
    std::stable_sort(list.begin(), list.end(),
                     [](const BagRecord& a, const BagRecord& b) { return a.bag < b.bag; });
    for (const auto& r : list) {
      if (r.bag >= bags) throw Error(Errc::kConsistency, kModule, "record bag index out of range");
    }
  }
  store.records_ = std::move(records);
  std::sort(failed.begin(), failed.end());
  store.failed_ = std::move(failed);
  return store;
}

BagRunStore run_bagging(const Dataset& d, const BagPlan& plan, const BaggingOptions& options) {
  if (plan.p() != d.p()) {
    throw Error(Errc::kConsistency, kModule,
                "plan built for p=" + std::to_string(plan.p()) + ", dataset has p=" +
                    std::to_string(d.p()));
  }
  const std::size_t p = d.p();

  std::vector<std::uint8_t> focus(p, 0);
  if (options.store_contributions) {
    if (options.focus.empty()) {
      if (p > kMaxFocusInstances) {
        throw Error(Errc::kRange, kModule,
                    "storing contributions for all " + std::to_string(p) +
                        " instances exceeds the cap of " + std::to_string(kMaxFocusInstances) +
                        "; name focus instances");
      }
      std::fill(focus.begin(), focus.end(), 1);
    } else {
      if (options.focus.size() > kMaxFocusInstances) {
        throw Error(Errc::kRange, kModule, "too many focus instances");
      }
      for (auto j : options.focus) {
        if (j >= p) throw Error(Errc::kRange, kModule, "focus instance out of range");
        focus[j] = 1;
      }
    }
  }

  std::vector<BagResult> results(plan.bags());
  parallel_for(plan.bags(), options.workers, [&](std::size_t t) {
    BagResult& out = results[t];
    const auto& train = plan.train(t);
    KernelParams params = options.params;
    double lambda = options.lambda;
    if (options.per_bag_cv) {
      CvOptions cv = *options.per_bag_cv;
      cv.workers = 1;
      cv.folds = std::min(cv.folds, train.size());
      cv.seed = Rng({plan.seed(), static_cast<std::uint64_t>(t), 0x6376u}).next();
      try {
        const CvReport report = cross_validate(d, cv, train);
        params.sigma = report.sigma;
        lambda = report.lambda;
      } catch (const Error& e) {
        if (e.code() != Errc::kIllConditioned) throw;
        out.failed = true;
        return;
      }
    }
    out.sigma = params.sigma;
    out.lambda = lambda;
    const auto model = try_fit_krr(d, train, params, lambda);
    if (!model) {
      out.failed = true;
      return;
    }
    out.test = plan.test(t);
    out.y_hat.reserve(out.test.size());
    for (auto j : out.test) {
      if (focus[j]) {
        Prediction pred = predict(*model, d, d.row(j));
        Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
        for (std::size_t r = 0; r < train.size(); ++r) {
          full[static_cast<Eigen::Index>(train[r])] = pred.contributions[static_cast<Eigen::Index>(r)];
        }
        out.y_hat.push_back(pred.y_hat);
        out.contributions.emplace_back(j, std::move(full));
      } else {
        out.y_hat.push_back(predict_value(*model, d, d.row(j)));
      }
    }
  });

  BagRunStore store;
  store.bags_ = plan.bags();
  store.records_.resize(p);
  store.contributions_stored_ = options.store_contributions;
  if (options.store_contributions) {
    for (std::size_t j = 0; j < p; ++j) {
      if (focus[j]) store.contributions_[j];
    }
  }
  if (options.per_bag_cv) store.bag_params_.resize(plan.bags());

  for (std::size_t t = 0; t < results.size(); ++t) {
    BagResult& r = results[t];
    if (options.per_bag_cv) store.bag_params_[t] = {r.sigma, r.lambda};
    if (r.failed) {
      store.failed_.push_back(t);
      continue;
    }
    for (std::size_t k = 0; k < r.test.size(); ++k) {
      const auto j = r.test[k];
      const double y = d.y()[static_cast<Eigen::Index>(j)];
      store.records_[j].push_back({t, r.y_hat[k], std::abs(r.y_hat[k] - y)});
    }
    for (auto& [j, values] : r.contributions) {
      store.contributions_[j].push_back({t, std::move(values)});
    }
    r = BagResult{};
  }
  return store;
}

std::vector<double> prediction_samples(const BagRunStore& store, std::size_t j) {
  if (j >= store.p()) throw Error(Errc::kRange, kModule, "instance index out of range");
  const auto records = store.records(j);
  if (records.empty()) {
    throw Error(Errc::kCoverage, kModule,
                "instance " + std::to_string(j) + " has no prediction records");
  }
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.y_hat);
  return out;
}

ContributionProfile contribution_profile(const BagRunStore& store, std::size_t j,
                                         const BagFilter& filter) {
  if (!store.has_contributions()) {
    throw Error(Errc::kCapability, kModule, "contributions were not stored in this run");
  }
  const auto& rows = store.contribution_rows(j);
  const auto records = store.records(j);
  ContributionProfile out;
  std::vector<const Eigen::VectorXd*> selected;
  std::size_t k = 0;
  for (const auto& row : rows) {
    while (k < records.size() && records[k].bag < row.bag) ++k;
    if (k == records.size() || records[k].bag != row.bag) {
      throw Error(Errc::kConsistency, kModule, "contribution row without a prediction record");
    }
    if (filter && !filter(records[k])) continue;
    out.bags.push_back(row.bag);
    selected.push_back(&row.values);
  }
  out.values.resize(static_cast<Eigen::Index>(selected.size()), static_cast<Eigen::Index>(store.p()));
  for (std::size_t r = 0; r < selected.size(); ++r) {
    out.values.row(static_cast<Eigen::Index>(r)) = selected[r]->transpose();
  }
  return out;
}

std::vector<std::size_t> order_by_distance(const Dataset& d, std::size_t j) {
  if (j >= d.p()) throw Error(Errc::kRange, kModule, "instance index out of range");
  std::vector<std::size_t> order;
  std::vector<double> dist(d.p());
  for (std::size_t i = 0; i < d.p(); ++i) {
    dist[i] = l1_distance(d.row(i), d.row(j));
    if (i != j) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&dist](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  return order;
}

}  // namespace bagvote
