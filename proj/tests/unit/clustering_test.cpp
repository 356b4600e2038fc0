#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "bagvote/clustering.hpp"
#include "bagvote/error.hpp"
#include "bagvote/random.hpp"
#include "helpers.hpp"

namespace bagvote {
namespace {

using testing::code_of;

Eigen::MatrixXd random_distance(Rng& rng, Eigen::Index p) {
  Eigen::MatrixXd pts(p, 2);
  for (Eigen::Index i = 0; i < p; ++i) pts.row(i) << rng.normal(), rng.normal();
  Eigen::MatrixXd d(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) d(i, j) = (pts.row(i) - pts.row(j)).norm();
  }
  return d;
}

// Partition as a set of sorted member lists, independent of label numbering.
std::set<std::vector<std::size_t>> blocks(const std::vector<std::size_t>& labels) {
  std::map<std::size_t, std::vector<std::size_t>> by;
  for (std::size_t i = 0; i < labels.size(); ++i) by[labels[i]].push_back(i);
  std::set<std::vector<std::size_t>> out;
  for (auto& [_, members] : by) out.insert(members);
  return out;
}

// Plain O(p^3) UPGMA on cluster member lists; returns the sorted merge heights.
std::vector<double> reference_heights(const Eigen::MatrixXd& d) {
  std::vector<std::vector<Eigen::Index>> clusters;
  for (Eigen::Index i = 0; i < d.rows(); ++i) clusters.push_back({i});
  std::vector<double> heights;
  while (clusters.size() > 1) {
    double best = INFINITY;
    std::size_t ba = 0, bb = 0;
    for (std::size_t a = 0; a < clusters.size(); ++a) {
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        double s = 0.0;
        for (auto i : clusters[a]) {
          for (auto j : clusters[b]) s += d(i, j);
        }
        s /= static_cast<double>(clusters[a].size() * clusters[b].size());
        if (s < best) {
          best = s;
          ba = a;
          bb = b;
        }
      }
    }
    heights.push_back(best);
    clusters[ba].insert(clusters[ba].end(), clusters[bb].begin(), clusters[bb].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bb));
  }
  return heights;
}

TEST(Agglomerate, TwoLeaves) {
  Eigen::MatrixXd d(2, 2);
  d << 0, 3.5, 3.5, 0;
  const auto dg = agglomerate(d);
  ASSERT_EQ(dg.merges.size(), 1u);
  EXPECT_EQ(dg.merges[0].left, 0u);
  EXPECT_EQ(dg.merges[0].right, 1u);
  EXPECT_EQ(dg.merges[0].height, 3.5);
  EXPECT_EQ(dg.merges[0].count, 2u);
}

TEST(Agglomerate, ThreePointHandExample) {
  Eigen::MatrixXd d(3, 3);
  d << 0, 1, 10, 1, 0, 10, 10, 10, 0;
  const auto dg = agglomerate(d);
  ASSERT_EQ(dg.merges.size(), 2u);
  EXPECT_EQ(dg.merges[0].left, 0u);
  EXPECT_EQ(dg.merges[0].right, 1u);
  EXPECT_EQ(dg.merges[0].height, 1.0);
  EXPECT_EQ(dg.merges[1].left, 2u);
  EXPECT_EQ(dg.merges[1].right, 3u);
  EXPECT_EQ(dg.merges[1].height, 10.0);
  EXPECT_EQ(dg.merges[1].count, 3u);
  const auto labels = cut(dg, 2);
  EXPECT_EQ(labels, (std::vector<std::size_t>{0, 0, 1}));
}

TEST(Agglomerate, AverageOfUnequalDistances) {
  // {0,1} merge at 1; then d({0,1}, 2) = (4 + 6) / 2 = 5.
  Eigen::MatrixXd d(3, 3);
  d << 0, 1, 4, 1, 0, 6, 4, 6, 0;
  const auto dg = agglomerate(d);
  EXPECT_EQ(dg.merges[1].height, 5.0);
}

TEST(Agglomerate, TiesMergeSmallestPairFirst) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Constant(4, 4, 2.0);
  d.diagonal().setZero();
  const auto dg = agglomerate(d);
  EXPECT_EQ(dg.merges[0].left, 0u);
  EXPECT_EQ(dg.merges[0].right, 1u);
  EXPECT_EQ(dg.merges[1].left, 2u);
  EXPECT_EQ(dg.merges[1].right, 3u);
}

TEST(Agglomerate, MatchesReferenceAndHeightsNonDecreasing) {
  Rng rng(51);
  for (int rep = 0; rep < 30; ++rep) {
    const auto p = static_cast<Eigen::Index>(2 + rng.below(25));
    const auto d = random_distance(rng, p);
    const auto dg = agglomerate(d);
    ASSERT_EQ(dg.merges.size(), static_cast<std::size_t>(p - 1));
    const auto ref = reference_heights(d);
    for (std::size_t m = 0; m < dg.merges.size(); ++m) {
      EXPECT_NEAR(dg.merges[m].height, ref[m], 1e-12);
      if (m > 0) EXPECT_GE(dg.merges[m].height, dg.merges[m - 1].height);
      EXPECT_LT(dg.merges[m].left, dg.merges[m].right);
      EXPECT_LT(dg.merges[m].right, static_cast<std::size_t>(p) + m);
    }
    EXPECT_EQ(dg.merges.back().count, static_cast<std::size_t>(p));
    // every node except the root is used exactly once as a child
    std::vector<int> used(static_cast<std::size_t>(2 * p - 1), 0);
    for (const auto& m : dg.merges) {
      ++used[m.left];
      ++used[m.right];
    }
    for (std::size_t n = 0; n + 1 < used.size(); ++n) EXPECT_EQ(used[n], 1);
    EXPECT_EQ(used.back(), 0);
  }
}

TEST(Agglomerate, RejectsBadMatrices) {
  Eigen::MatrixXd asym(2, 2);
  asym << 0, 1, 2, 0;
  EXPECT_EQ(code_of([&] { agglomerate(asym); }), Errc::kValidation);
  Eigen::MatrixXd neg(2, 2);
  neg << 0, -1, -1, 0;
  EXPECT_EQ(code_of([&] { agglomerate(neg); }), Errc::kValidation);
  Eigen::MatrixXd diag(2, 2);
  diag << 1, 1, 1, 0;
  EXPECT_EQ(code_of([&] { agglomerate(diag); }), Errc::kValidation);
  EXPECT_EQ(code_of([&] { agglomerate(Eigen::MatrixXd::Zero(2, 3)); }), Errc::kValidation);
  Eigen::MatrixXd nan(2, 2);
  nan << 0, NAN, NAN, 0;
  EXPECT_EQ(code_of([&] { agglomerate(nan); }), Errc::kValidation);
}

TEST(Cut, ExtremesAndRange) {
  Rng rng(52);
  const auto dg = agglomerate(random_distance(rng, 9));
  EXPECT_EQ(cut(dg, 1), std::vector<std::size_t>(9, 0));
  const auto singles = cut(dg, 9);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(singles[i], i);
  EXPECT_EQ(code_of([&] { cut(dg, 0); }), Errc::kRange);
  EXPECT_EQ(code_of([&] { cut(dg, 10); }), Errc::kRange);
}

TEST(Cut, LabelsNumberedByFirstLeafAndRefine) {
  Rng rng(53);
  for (int rep = 0; rep < 20; ++rep) {
    const auto p = 3 + rng.below(20);
    const auto dg = agglomerate(random_distance(rng, static_cast<Eigen::Index>(p)));
    std::vector<std::size_t> coarser;
    for (std::size_t k = 1; k <= p; ++k) {
      const auto labels = cut(dg, k);
      EXPECT_EQ(std::set<std::size_t>(labels.begin(), labels.end()).size(), k);
      std::size_t next = 0;
      for (auto l : labels) {
        EXPECT_LE(l, next);
        if (l == next) ++next;
      }
      // each finer cut refines the previous one
      if (!coarser.empty()) {
        for (std::size_t i = 0; i < p; ++i) {
          for (std::size_t j = 0; j < p; ++j) {
            if (labels[i] == labels[j]) EXPECT_EQ(coarser[i], coarser[j]);
          }
        }
      }
      coarser = labels;
    }
  }
}

TEST(Cut, PermutationEquivariant) {
  Rng rng(54);
  const Eigen::Index p = 12;
  const auto d = random_distance(rng, p);
  std::vector<std::size_t> perm(static_cast<std::size_t>(p));
  std::iota(perm.begin(), perm.end(), 0);
  shuffle(perm, rng);
  Eigen::MatrixXd dp(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      dp(i, j) = d(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]),
                   static_cast<Eigen::Index>(perm[static_cast<std::size_t>(j)]));
    }
  }
  for (std::size_t k : {2u, 3u, 5u}) {
    const auto a = cut(agglomerate(d), k);
    const auto b = cut(agglomerate(dp), k);
    std::vector<std::size_t> back(a.size());
    for (std::size_t i = 0; i < perm.size(); ++i) back[perm[i]] = b[i];
    EXPECT_EQ(blocks(a), blocks(back));
  }
}

TEST(Newick, ThreeLeafTree) {
  Eigen::MatrixXd d(3, 3);
  d << 0, 1, 10, 1, 0, 10, 10, 10, 0;
  const auto text = to_newick(agglomerate(d), {"a", "b", "c"});
  EXPECT_EQ(text, "(c:10,(a:1,b:1):9);");
  EXPECT_EQ(code_of([&] { to_newick(agglomerate(d), {"a", "b"}); }), Errc::kValidation);
}

TEST(Ari, KnownValues) {
  const std::vector<std::size_t> a{0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(adjusted_rand_index(a, a), 1.0);
  EXPECT_DOUBLE_EQ(adjusted_rand_index(a, {1, 1, 0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(adjusted_rand_index(a, {0, 1, 0, 1}), -0.5);
  // Hand computation: contingency [[2,1],[0,2]] over 5 items.
  // index = C(2,2)+C(2,2) = 2; sum_a = C(3,2)+C(2,2) = 4; sum_b = C(2,2)+C(3,2) = 4;
  // expected = 16/10 = 1.6; max = 4; ari = (2-1.6)/(4-1.6) = 1/6.
  EXPECT_NEAR(adjusted_rand_index({0, 0, 0, 1, 1}, {0, 0, 1, 1, 1}), 1.0 / 6.0, 1e-15);
  EXPECT_DOUBLE_EQ(adjusted_rand_index({0, 0, 0}, {1, 1, 1}), 1.0);
  EXPECT_EQ(code_of([&] { adjusted_rand_index(a, {0, 1}); }), Errc::kDimension);
}

}  // namespace
}  // namespace bagvote
