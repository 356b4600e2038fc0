#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bagvote/dataset.hpp"

namespace bagvote {

struct KernelParams {
  double sigma = 1.0;  // width in descriptor L1-distance units, > 0
};

double l1_distance(std::span<const double> a, std::span<const double> b);

// exp(-|a - b|_1 / sigma). Throws Errc::kDimension on length mismatch and
// Errc::kRange for sigma <= 0.
double laplacian_kernel(std::span<const double> a, std::span<const double> b, KernelParams params);

// Symmetric n x n kernel matrix with unit diagonal.
Eigen::MatrixXd gram_matrix(const RowMatrix& x, KernelParams params);

// Laplacian-kernel ridge regression without intercept. Coefficients solve
// (K + lambda I) c = y over the training rows; the prediction at x* is
// sum_i c_i k(x*, x_i).
class KrrModel {
 public:
  KrrModel(KernelParams params, double lambda, std::vector<std::size_t> train_indices,
           Eigen::VectorXd coefficients);

  KernelParams params() const { return params_; }
  double lambda() const { return lambda_; }
  const std::vector<std::size_t>& train_indices() const { return train_indices_; }
  const Eigen::VectorXd& coefficients() const { return coefficients_; }

 private:
  KernelParams params_;
  double lambda_;
  std::vector<std::size_t> train_indices_;
  Eigen::VectorXd coefficients_;
};

// Throws Errc::kRange for empty/out-of-range/duplicate indices or lambda < 0,
// Errc::kIllConditioned when the Cholesky factorization breaks down (e.g.
// duplicated training rows with lambda = 0).
KrrModel fit_krr(const Dataset& d, std::span<const std::size_t> train_indices,
                 KernelParams params, double lambda);

// fit_krr that reports a singular system as nullopt instead of throwing.
std::optional<KrrModel> try_fit_krr(const Dataset& d, std::span<const std::size_t> train_indices,
                                    KernelParams params, double lambda);

struct Prediction {
  double y_hat = 0.0;
  // contributions[r] = c_r k(x*, x_{train_indices[r]}); y_hat is their sum.
  Eigen::VectorXd contributions;
};

Prediction predict(const KrrModel& model, const Dataset& d, std::span<const double> x_star);
// Same value as predict(...).y_hat without materializing contributions.
double predict_value(const KrrModel& model, const Dataset& d, std::span<const double> x_star);

struct CvPoint {
  double sigma = 0.0;
  double lambda = 0.0;
  double mae = 0.0;  // mean over folds of the fold mean absolute error
  double r2 = 0.0;   // mean over folds of the fold R^2
};

struct CvReport {
  double sigma = 0.0;
  double lambda = 0.0;
  std::vector<CvPoint> grid;  // sigma-major, in grid order
  std::size_t folds = 0;
  std::uint64_t seed = 0;

  const CvPoint& chosen() const;
};

struct CvOptions {
  std::vector<double> sigma_grid;
  std::vector<double> lambda_grid;
  std::size_t folds = 10;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

// Seeded k-fold partition of {0..n-1}: fold f holds the shuffled positions
// congruent to f mod folds. Throws Errc::kPartition unless 2 <= folds <= n.
std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t folds,
                                                      std::uint64_t seed);

// Grid search by k-fold CV restricted to `rows` (all rows when empty). The
// chosen point minimizes MAE; exact ties prefer larger lambda, then larger sigma.
CvReport cross_validate(const Dataset& d, const CvOptions& options,
                        std::span<const std::size_t> rows = {});

// {2^-4, ..., 2^6} times the median pairwise L1 distance.
std::vector<double> default_sigma_grid(const Dataset& d);
// {1e-6, ..., 1e1}.
std::vector<double> default_lambda_grid();

}  // namespace bagvote
