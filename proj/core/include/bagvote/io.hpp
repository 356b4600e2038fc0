#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bagvote/clustering.hpp"
#include "bagvote/dataset.hpp"
#include "bagvote/dissimilarity.hpp"
#include "bagvote/ensemble.hpp"
#include "bagvote/kernel_regression.hpp"
#include "bagvote/mixture.hpp"

// Readers and writers for every run artifact. Each writer's output parses
// back through the matching reader; doubles are written in shortest
// round-trip form so re-reading is exact.
namespace bagvote::io {

namespace fs = std::filesystem;

// sigma,lambda,fold_mae_mean,fold_r2_mean
void write_cv_report(const fs::path& path, const CvReport& report);
std::vector<CvPoint> read_cv_report(const fs::path& path);

// instance_id,bag_index,y_hat,abs_error in (instance, bag) order.
void write_predictions(const fs::path& path, const BagRunStore& store, const Dataset& d);
// Rebuilds a record-only store; `bags` is the plan's bag count.
BagRunStore read_predictions(const fs::path& path, const Dataset& d, std::size_t bags,
                             std::vector<std::size_t> failed = {});

// One file per focus instance: bag_index, then one column per instance id.
void write_contributions(const fs::path& dir, const BagRunStore& store, const Dataset& d);
ContributionProfile read_contributions(const fs::path& path, const Dataset& d);

// {K, weights[], means[], sds[], loglik, bic, n, ...}
void write_gmm(const fs::path& path, const GmmFit& fit);
GmmFit read_gmm(const fs::path& path);

// Square matrix with an id header row and id first column.
void write_count_matrix(const fs::path& path, const CountMatrix& m, const std::vector<std::string>& ids);
CountMatrix read_count_matrix(const fs::path& path, std::vector<std::string>* ids = nullptr);
void write_real_matrix(const fs::path& path, const Eigen::MatrixXd& m, const std::vector<std::string>& ids);
Eigen::MatrixXd read_real_matrix(const fs::path& path, std::vector<std::string>* ids = nullptr);

// {leaves: [ids], merges: [{left, right, height, count}], newick}
void write_dendrogram(const fs::path& path, const Dendrogram& dendrogram,
                      const std::vector<std::string>& ids);
Dendrogram read_dendrogram(const fs::path& path, std::vector<std::string>* ids = nullptr);

// id,cluster
void write_clusters(const fs::path& path, const std::vector<std::size_t>& labels,
                    const std::vector<std::string>& ids);
std::vector<std::size_t> read_clusters(const fs::path& path, std::vector<std::string>* ids = nullptr);

}  // namespace bagvote::io
