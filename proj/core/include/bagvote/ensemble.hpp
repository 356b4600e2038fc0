#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bagvote/dataset.hpp"
#include "bagvote/kernel_regression.hpp"

namespace bagvote {

// Training subsets for T bags over p instances. Bag t's subset depends only
// on (seed, t); its complement is the bag's test set.
class BagPlan {
 public:
  std::size_t p() const { return p_; }
  std::size_t bags() const { return train_.size(); }
  std::size_t train_size() const { return train_size_; }
  double bag_fraction() const { return bag_fraction_; }
  std::uint64_t seed() const { return seed_; }

  // Sorted training indices of bag t.
  const std::vector<std::size_t>& train(std::size_t t) const { return train_[t]; }
  std::vector<std::size_t> test(std::size_t t) const;
  bool in_train(std::size_t t, std::size_t i) const {
    return membership_[t * p_ + i] != 0;
  }

  // Explicit subsets, e.g. an exhaustive enumeration. Every subset must have
  // the same size in [1, p-1] with distinct in-range indices.
  static BagPlan from_train_sets(std::size_t p, std::vector<std::vector<std::size_t>> train_sets);

 private:
  friend BagPlan make_bag_plan(std::size_t, double, std::size_t, std::uint64_t);
  BagPlan(std::size_t p, double fraction, std::uint64_t seed,
          std::vector<std::vector<std::size_t>> train);

  std::size_t p_ = 0;
  std::size_t train_size_ = 0;
  double bag_fraction_ = 0.0;
  std::uint64_t seed_ = 0;
  std::vector<std::vector<std::size_t>> train_;
  std::vector<std::uint8_t> membership_;
};

// Training-set size for a fraction of p (half rounds up).
std::size_t bag_train_size(std::size_t p, double bag_fraction);

// Throws Errc::kSize when the training set would have fewer than 2 or more
// than p-1 members, or when bags == 0.
BagPlan make_bag_plan(std::size_t p, double bag_fraction, std::size_t bags, std::uint64_t seed);

struct BagRecord {
  std::size_t bag = 0;
  double y_hat = 0.0;
  double abs_error = 0.0;
};

struct BaggingOptions {
  KernelParams params;
  double lambda = 1e-3;
  bool store_contributions = false;
  // Instances whose contribution vectors are kept. Empty with
  // store_contributions set means every instance, subject to the cap.
  std::vector<std::size_t> focus;
  std::size_t workers = 1;
  // When set, each bag picks its own (sigma, lambda) by CV on its training
  // rows with this grid; the CV seed is derived from (plan seed, bag).
  std::optional<CvOptions> per_bag_cv;
};

inline constexpr std::size_t kMaxFocusInstances = 64;

// Results of running every bag of a plan. Records are grouped per test
// instance and ordered by bag index.
class BagRunStore {
 public:
  std::size_t p() const { return records_.size(); }
  std::size_t bags() const { return bags_; }

  std::span<const BagRecord> records(std::size_t j) const { return records_[j]; }
  const std::vector<std::size_t>& failed_bags() const { return failed_; }
  std::size_t failure_count() const { return failed_.size(); }
  bool failed(std::size_t t) const;
  // Instances without any prediction record.
  std::vector<std::size_t> uncovered() const;

  bool has_contributions() const { return contributions_stored_; }
  bool has_contributions(std::size_t j) const { return contributions_.count(j) != 0; }

  // Per-bag (sigma, lambda) when per-bag CV was enabled; empty otherwise.
  const std::vector<std::pair<double, double>>& bag_params() const { return bag_params_; }

  struct ContributionRow {
    std::size_t bag;
    Eigen::VectorXd values;  // length p, zero for non-members
  };
  const std::vector<ContributionRow>& contribution_rows(std::size_t j) const;

  // Assembles a store from previously exported records (no contributions).
  static BagRunStore from_records(std::size_t p, std::size_t bags,
                                  std::vector<std::vector<BagRecord>> records,
                                  std::vector<std::size_t> failed = {});

 private:
  friend BagRunStore run_bagging(const Dataset&, const BagPlan&, const BaggingOptions&);

  std::size_t bags_ = 0;
  std::vector<std::vector<BagRecord>> records_;
  std::vector<std::size_t> failed_;
  bool contributions_stored_ = false;
  std::map<std::size_t, std::vector<ContributionRow>> contributions_;
  std::vector<std::pair<double, double>> bag_params_;
};

// Fits one model per bag on its training rows and predicts every test row.
// Singular bag fits are skipped and listed in failed_bags(). Output does not
// depend on options.workers. Throws Errc::kConsistency when plan.p() != d.p()
// and Errc::kRange when more than kMaxFocusInstances are requested.
BagRunStore run_bagging(const Dataset& d, const BagPlan& plan, const BaggingOptions& options);

// Predicted values for instance j in bag order. Throws Errc::kCoverage when
// j has no records.
std::vector<double> prediction_samples(const BagRunStore& store, std::size_t j);

struct ContributionProfile {
  std::vector<std::size_t> bags;
  RowMatrix values;  // bags.size() x p
};

using BagFilter = std::function<bool(const BagRecord&)>;

// Contribution rows of instance j for the bags accepted by `filter` (all when
// empty). Throws Errc::kCapability if contributions were not kept for j.
ContributionProfile contribution_profile(const BagRunStore& store, std::size_t j,
                                         const BagFilter& filter = {});

// Column order for a contribution heat map: instances by ascending L1
// distance to instance j (ties by index), j itself excluded.
std::vector<std::size_t> order_by_distance(const Dataset& d, std::size_t j);

}  // namespace bagvote
