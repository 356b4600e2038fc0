#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bagvote {

// Node ids follow the usual linkage convention: leaves are 0..p-1 and the
// cluster created by merge m is node p+m.
struct Merge {
  std::size_t left = 0;   // smaller node id
  std::size_t right = 0;  // larger node id
  double height = 0.0;
  std::size_t count = 0;  // leaves under the new node
};

struct Dendrogram {
  std::size_t leaves = 0;
  std::vector<Merge> merges;  // p - 1 entries, heights non-decreasing
};

// Average-linkage (UPGMA) agglomeration. Among equal distances the pair with
// the smallest (i, j) node ids merges first. Throws Errc::kValidation for a
// non-square, asymmetric, negative, non-finite or non-zero-diagonal input.
Dendrogram agglomerate(const Eigen::MatrixXd& distance);

// Flat labels after the first p - n_clusters merges, numbered 0.. in order
// of each cluster's first leaf. Throws Errc::kRange unless 1 <= n_clusters <= p.
std::vector<std::size_t> cut(const Dendrogram& dendrogram, std::size_t n_clusters);

// Newick text with leaf names and branch lengths (parent height minus child
// height).
std::string to_newick(const Dendrogram& dendrogram, const std::vector<std::string>& leaf_names);

// Adjusted Rand index of two labelings of the same items (Hubert-Arabie).
// Returns 1 when both labelings are trivial in the same way.
double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b);

}  // namespace bagvote
