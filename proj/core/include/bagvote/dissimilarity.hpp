#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "bagvote/dataset.hpp"
#include "bagvote/ensemble.hpp"
#include "bagvote/kernel_regression.hpp"

namespace bagvote {

// Voting parameters. Exactly one of k_thres / n_neighbors selects the
// neighborhood of each instance.
struct VoteConfig {
  double delta_thres = 0.0;  // prediction counts as accurate when |y_hat - y| < delta_thres
  std::optional<double> k_thres;
  std::optional<std::size_t> n_neighbors;
  // false: neighbors are the pairs with k >= k_thres (near pairs).
  // true: the literal reading, pairs with k < k_thres.
  bool literal_eq5 = false;

  void validate() const;
};

using IndexLists = std::vector<std::vector<std::size_t>>;
using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// votes(i, j): times i was absent from the training set of an accurate model
// for j while being j's neighbor. exposures(i, j): times the pair was
// eligible, i.e. i was j's neighbor and j's model was accurate.
struct DissimMatrix {
  CountMatrix votes;
  CountMatrix exposures;
  VoteConfig config;
};

// Bags in which j was a test instance with |y_hat - y_j| < delta_thres.
IndexLists qualifying_records(const BagRunStore& store, const Dataset& d, double delta_thres);

// Neighbor lists, ascending by index, never containing the instance itself.
// With n_neighbors the instances with the highest kernel value are taken
// (ties to the lower index); in literal mode the complement of that set.
IndexLists neighbor_sets(const Dataset& d, KernelParams params, const VoteConfig& config);

// Throws Errc::kConsistency when the inputs disagree on p or bag indices.
DissimMatrix vote(const BagRunStore& store, const BagPlan& plan, const IndexLists& qualifying,
                  const IndexLists& neighbors, std::size_t workers = 1);

struct NormalizedDissim {
  Eigen::MatrixXd rate;      // votes / exposures, 0 where unexposed
  Eigen::MatrixXd distance;  // (rate + rate^T) / 2, zero diagonal
};

NormalizedDissim normalize(const DissimMatrix& m);

// q-quantile (q in [0, 1], linear interpolation) of every absolute error in
// the store.
double error_quantile(const BagRunStore& store, double q);

}  // namespace bagvote
