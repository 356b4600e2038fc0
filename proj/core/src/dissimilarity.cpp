#include "bagvote/dissimilarity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bagvote/error.hpp"
#include "bagvote/parallel.hpp"

namespace bagvote {

namespace {

constexpr const char* kModule = "dissimilarity";

}  // namespace

void VoteConfig::validate() const {
  if (!(delta_thres > 0.0)) throw Error(Errc::kConfig, kModule, "delta_thres must be > 0");
  if (k_thres.has_value() == n_neighbors.has_value()) {
    throw Error(Errc::kConfig, kModule, "set exactly one of k_thres and n_neighbors");
  }
  if (k_thres && !(*k_thres > 0.0 && *k_thres < 1.0)) {
    throw Error(Errc::kConfig, kModule, "k_thres must lie in (0, 1)");
  }
  if (n_neighbors && *n_neighbors < 1) {
    throw Error(Errc::kConfig, kModule, "n_neighbors must be >= 1");
  }
}

IndexLists qualifying_records(const BagRunStore& store, const Dataset& d, double delta_thres) {
  if (store.p() != d.p()) throw Error(Errc::kConsistency, kModule, "store and dataset differ in p");
  IndexLists out(store.p());
  for (std::size_t j = 0; j < store.p(); ++j) {
    for (const auto& r : store.records(j)) {
      if (r.abs_error < delta_thres) out[j].push_back(r.bag);
    }
  }
  return out;
}

IndexLists neighbor_sets(const Dataset& d, KernelParams params, const VoteConfig& config) {
  config.validate();
  const std::size_t p = d.p();
  const Eigen::MatrixXd k = gram_matrix(d.x(), params);
  IndexLists out(p);
  for (std::size_t j = 0; j < p; ++j) {
    std::vector<std::uint8_t> near(p, 0);
    if (config.k_thres) {
      for (std::size_t i = 0; i < p; ++i) {
        if (i != j && k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) >= *config.k_thres) {
          near[i] = 1;
        }
      }
    } else {
      std::vector<std::size_t> order;
      for (std::size_t i = 0; i < p; ++i) {
        if (i != j) order.push_back(i);
      }
      const auto col = static_cast<Eigen::Index>(j);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return k(static_cast<Eigen::Index>(a), col) > k(static_cast<Eigen::Index>(b), col);
      });
      const std::size_t take = std::min(*config.n_neighbors, order.size());
      for (std::size_t r = 0; r < take; ++r) near[order[r]] = 1;
    }
    for (std::size_t i = 0; i < p; ++i) {
      if (i == j) continue;
      if (static_cast<bool>(near[i]) != config.literal_eq5) out[j].push_back(i);
    }
  }
  return out;
}

DissimMatrix vote(const BagRunStore& store, const BagPlan& plan, const IndexLists& qualifying,
                  const IndexLists& neighbors, std::size_t workers) {
  const std::size_t p = plan.p();
  if (store.p() != p || qualifying.size() != p || neighbors.size() != p) {
    throw Error(Errc::kConsistency, kModule, "store, plan, qualifying and neighbor lists differ in p");
  }
  if (store.bags() != plan.bags()) {
    throw Error(Errc::kConsistency, kModule, "store and plan differ in bag count");
  }
  for (std::size_t j = 0; j < p; ++j) {
    for (auto t : qualifying[j]) {
      if (t >= plan.bags() || plan.in_train(t, j)) {
        throw Error(Errc::kConsistency, kModule,
                    "bag " + std::to_string(t) + " cannot qualify instance " + std::to_string(j));
      }
    }
    for (auto i : neighbors[j]) {
      if (i >= p || i == j) throw Error(Errc::kConsistency, kModule, "invalid neighbor index");
    }
  }

  // Column j depends only on instance j, so columns are independent work items.
  DissimMatrix out;
  out.votes = CountMatrix::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  out.exposures = CountMatrix::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  parallel_for(p, workers, [&](std::size_t j) {
    const auto col = static_cast<Eigen::Index>(j);
    const auto exposure = static_cast<std::int64_t>(qualifying[j].size());
    for (auto i : neighbors[j]) {
      const auto row = static_cast<Eigen::Index>(i);
      std::int64_t count = 0;
      for (auto t : qualifying[j]) count += plan.in_train(t, i) ? 0 : 1;
      out.votes(row, col) = count;
      out.exposures(row, col) = exposure;
    }
  });
  return out;
}

NormalizedDissim normalize(const DissimMatrix& m) {
  const Eigen::Index p = m.votes.rows();
  NormalizedDissim out;
  out.rate = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      if (i != j && m.exposures(i, j) > 0) {
        out.rate(i, j) = static_cast<double>(m.votes(i, j)) / static_cast<double>(m.exposures(i, j));
      }
    }
  }
  out.distance = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      const double v = 0.5 * (out.rate(i, j) + out.rate(j, i));
      out.distance(i, j) = v;
      out.distance(j, i) = v;
    }
  }
  return out;
}

double error_quantile(const BagRunStore& store, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw Error(Errc::kRange, kModule, "quantile must lie in [0, 1]");
  std::vector<double> errors;
  for (std::size_t j = 0; j < store.p(); ++j) {
    for (const auto& r : store.records(j)) errors.push_back(r.abs_error);
  }
  if (errors.empty()) throw Error(Errc::kCoverage, kModule, "store has no prediction records");
  std::sort(errors.begin(), errors.end());
  const double pos = q * static_cast<double>(errors.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, errors.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return errors[lo] + frac * (errors[hi] - errors[lo]);
}

}  // namespace bagvote
