#include "bagvote/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>

#include "bagvote/csv.hpp"
#include "bagvote/error.hpp"

namespace bagvote {

namespace {

constexpr const char* kModule = "clustering";

void validate_distance(const Eigen::MatrixXd& d) {
  if (d.rows() != d.cols()) throw Error(Errc::kValidation, kModule, "distance matrix is not square");
  if (d.rows() < 1) throw Error(Errc::kValidation, kModule, "distance matrix is empty");
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    if (d(i, i) != 0.0) throw Error(Errc::kValidation, kModule, "distance diagonal must be zero");
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
      if (!std::isfinite(d(i, j)) || d(i, j) < 0.0) {
        throw Error(Errc::kValidation, kModule, "distances must be finite and non-negative");
      }
      if (d(i, j) != d(j, i)) throw Error(Errc::kValidation, kModule, "distance matrix is asymmetric");
    }
  }
}

std::string newick_name(const std::string& name) {
  if (name.find_first_of(" ():;,[]'") == std::string::npos) return name;
  std::string quoted = "'";
  for (char c : name) {
    if (c == '\'') quoted += '\'';
    quoted += c;
  }
  return quoted + "'";
}

}  // namespace

Dendrogram agglomerate(const Eigen::MatrixXd& distance) {
  validate_distance(distance);
  const auto p = static_cast<std::size_t>(distance.rows());
  Dendrogram out;
  out.leaves = p;

  // Slot s holds the active cluster with node id node[s]; rows of `dist`
  // are updated in place by the average-linkage rule.
  Eigen::MatrixXd dist = distance;
  std::vector<std::size_t> node(p);
  std::vector<std::size_t> size(p, 1);
  std::vector<bool> active(p, true);
  std::iota(node.begin(), node.end(), std::size_t{0});

  for (std::size_t step = 0; step + 1 < p; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0;
    std::size_t bj = 0;
    std::pair<std::size_t, std::size_t> best_ids{0, 0};
    for (std::size_t i = 0; i < p; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < p; ++j) {
        if (!active[j]) continue;
        const double v = dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        const std::pair<std::size_t, std::size_t> ids = std::minmax(node[i], node[j]);
        if (v < best || (v == best && ids < best_ids)) {
          best = v;
          bi = i;
          bj = j;
          best_ids = {ids.first, ids.second};
        }
      }
    }
    const std::size_t merged = size[bi] + size[bj];
    out.merges.push_back({best_ids.first, best_ids.second, best, merged});
    for (std::size_t k = 0; k < p; ++k) {
      if (!active[k] || k == bi || k == bj) continue;
      const auto kk = static_cast<Eigen::Index>(k);
      const double v = (static_cast<double>(size[bi]) * dist(static_cast<Eigen::Index>(bi), kk) +
                        static_cast<double>(size[bj]) * dist(static_cast<Eigen::Index>(bj), kk)) /
                       static_cast<double>(merged);
      dist(static_cast<Eigen::Index>(bi), kk) = v;
      dist(kk, static_cast<Eigen::Index>(bi)) = v;
    }
    node[bi] = p + step;
    size[bi] = merged;
    active[bj] = false;
  }
  return out;
}

std::vector<std::size_t> cut(const Dendrogram& dendrogram, std::size_t n_clusters) {
  const std::size_t p = dendrogram.leaves;
  if (n_clusters < 1 || n_clusters > p) {
    throw Error(Errc::kRange, kModule,
                "cluster count " + std::to_string(n_clusters) + " outside [1, " + std::to_string(p) + "]");
  }
  // Union-find over node ids; merged nodes point at their parent.
  std::vector<std::size_t> parent(p + dendrogram.merges.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&parent](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (std::size_t m = 0; m < p - n_clusters; ++m) {
    const auto& merge = dendrogram.merges[m];
    parent[find(merge.left)] = p + m;
    parent[find(merge.right)] = p + m;
  }
  std::map<std::size_t, std::size_t> label_of_root;
  std::vector<std::size_t> labels(p);
  for (std::size_t leaf = 0; leaf < p; ++leaf) {
    const auto root = find(leaf);
    const auto [it, inserted] = label_of_root.emplace(root, label_of_root.size());
    labels[leaf] = it->second;
  }
  return labels;
}

std::string to_newick(const Dendrogram& dendrogram, const std::vector<std::string>& leaf_names) {
  const std::size_t p = dendrogram.leaves;
  if (leaf_names.size() != p) throw Error(Errc::kValidation, kModule, "leaf name count differs from p");
  auto height = [&](std::size_t id) {
    return id < p ? 0.0 : dendrogram.merges[id - p].height;
  };
  std::function<std::string(std::size_t)> render = [&](std::size_t id) -> std::string {
    if (id < p) return newick_name(leaf_names[id]);
    const auto& m = dendrogram.merges[id - p];
    return "(" + render(m.left) + ":" + csv::format_double(m.height - height(m.left)) + "," +
           render(m.right) + ":" + csv::format_double(m.height - height(m.right)) + ")";
  };
  if (p == 1) return newick_name(leaf_names[0]) + ";";
  return render(p + dendrogram.merges.size() - 1) + ";";
}

double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) throw Error(Errc::kDimension, kModule, "labelings differ in length");
  const double n = static_cast<double>(a.size());
  if (a.size() < 2) return 1.0;
  std::map<std::pair<std::size_t, std::size_t>, double> table;
  std::map<std::size_t, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto pairs = [](double c) { return c * (c - 1.0) / 2.0; };
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [key, c] : table) index += pairs(c);
  for (const auto& [key, c] : rows) sum_rows += pairs(c);
  for (const auto& [key, c] : cols) sum_cols += pairs(c);
  const double expected = sum_rows * sum_cols / pairs(n);
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace bagvote
