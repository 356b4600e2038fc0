#include "bagvote/kernel_regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "bagvote/error.hpp"
#include "bagvote/parallel.hpp"
#include "bagvote/random.hpp"

namespace bagvote {

namespace {

constexpr const char* kModule = "kernel_regression";

void check_sigma(KernelParams params) {
  if (!(params.sigma > 0.0) || !std::isfinite(params.sigma)) {
    throw Error(Errc::kRange, kModule, "kernel width must be positive and finite");
  }
}

// Cholesky pivots below this (relative to the diagonal) are treated as a
// breakdown rather than trusted.
constexpr double kPivotFloor = 1e-13;

}  // namespace

std::optional<KrrModel> try_fit_krr(const Dataset& d, std::span<const std::size_t> train_indices,
                                    KernelParams params, double lambda) {
  try {
    return fit_krr(d, train_indices, params, lambda);
  } catch (const Error& e) {
    if (e.code() != Errc::kIllConditioned) throw;
    return std::nullopt;
  }
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(Errc::kDimension, kModule,
                "vector lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum;
}

double laplacian_kernel(std::span<const double> a, std::span<const double> b, KernelParams params) {
  check_sigma(params);
  return std::exp(-l1_distance(a, b) / params.sigma);
}

Eigen::MatrixXd gram_matrix(const RowMatrix& x, KernelParams params) {
  check_sigma(params);
  const Eigen::Index n = x.rows();
  const auto m = static_cast<std::size_t>(x.cols());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    const std::span<const double> a(x.row(i).data(), m);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = std::exp(-l1_distance(a, {x.row(j).data(), m}) / params.sigma);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

KrrModel::KrrModel(KernelParams params, double lambda, std::vector<std::size_t> train_indices,
                   Eigen::VectorXd coefficients)
    : params_(params),
      lambda_(lambda),
      train_indices_(std::move(train_indices)),
      coefficients_(std::move(coefficients)) {
  if (static_cast<std::size_t>(coefficients_.size()) != train_indices_.size()) {
    throw Error(Errc::kDimension, kModule, "coefficient count differs from training-set size");
  }
}

KrrModel fit_krr(const Dataset& d, std::span<const std::size_t> train_indices, KernelParams params,
                 double lambda) {
  check_sigma(params);
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(Errc::kRange, kModule, "ridge strength must be finite and >= 0");
  }
  if (train_indices.empty()) throw Error(Errc::kRange, kModule, "empty training set");
  std::vector<std::size_t> sorted(train_indices.begin(), train_indices.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.back() >= d.p()) throw Error(Errc::kRange, kModule, "training index out of range");
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(Errc::kRange, kModule, "duplicate training index");
  }

  const auto n = static_cast<Eigen::Index>(train_indices.size());
  Eigen::MatrixXd a(n, n);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto i = train_indices[static_cast<std::size_t>(r)];
    rhs[r] = d.y()[static_cast<Eigen::Index>(i)];
    a(r, r) = 1.0 + lambda;
    for (Eigen::Index s = r + 1; s < n; ++s) {
      const auto j = train_indices[static_cast<std::size_t>(s)];
      const double v = std::exp(-l1_distance(d.row(i), d.row(j)) / params.sigma);
      a(r, s) = v;
      a(s, r) = v;
    }
  }

  const Eigen::LLT<Eigen::MatrixXd> llt(a);
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    const auto diag = llt.matrixLLT().diagonal();
    ok = (diag.array().square() > kPivotFloor * (1.0 + lambda)).all();
  }
  if (!ok) {
    throw Error(Errc::kIllConditioned, kModule,
                "kernel system is singular (duplicated training rows?); use lambda > 0");
  }
  Eigen::VectorXd c = llt.solve(rhs);
  if (!c.allFinite()) throw Error(Errc::kIllConditioned, kModule, "non-finite coefficients");
  return KrrModel(params, lambda, {train_indices.begin(), train_indices.end()}, std::move(c));
}

Prediction predict(const KrrModel& model, const Dataset& d, std::span<const double> x_star) {
  if (x_star.size() != d.m()) {
    throw Error(Errc::kDimension, kModule,
                "query has " + std::to_string(x_star.size()) + " descriptors, dataset has " +
                    std::to_string(d.m()));
  }
  const auto& idx = model.train_indices();
  Prediction out;
  out.contributions.resize(static_cast<Eigen::Index>(idx.size()));
  double sum = 0.0;
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const double k = std::exp(-l1_distance(x_star, d.row(idx[r])) / model.params().sigma);
    const double term = model.coefficients()[static_cast<Eigen::Index>(r)] * k;
    out.contributions[static_cast<Eigen::Index>(r)] = term;
    sum += term;
  }
  out.y_hat = sum;
  return out;
}

double predict_value(const KrrModel& model, const Dataset& d, std::span<const double> x_star) {
  if (x_star.size() != d.m()) throw Error(Errc::kDimension, kModule, "query dimension mismatch");
  const auto& idx = model.train_indices();
  double sum = 0.0;
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const double k = std::exp(-l1_distance(x_star, d.row(idx[r])) / model.params().sigma);
    sum += model.coefficients()[static_cast<Eigen::Index>(r)] * k;
  }
  return sum;
}

const CvPoint& CvReport::chosen() const {
  for (const auto& point : grid) {
    if (point.sigma == sigma && point.lambda == lambda) return point;
  }
  throw Error(Errc::kConsistency, kModule, "chosen point missing from grid");
}

std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t folds,
                                                      std::uint64_t seed) {
  if (folds < 2 || folds > n) {
    throw Error(Errc::kPartition, kModule,
                std::to_string(folds) + " folds requested for " + std::to_string(n) + " instances");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(order, rng);
  std::vector<std::vector<std::size_t>> out(folds);
  for (std::size_t pos = 0; pos < n; ++pos) out[pos % folds].push_back(order[pos]);
  for (auto& fold : out) std::sort(fold.begin(), fold.end());
  return out;
}

CvReport cross_validate(const Dataset& d, const CvOptions& options,
                        std::span<const std::size_t> rows) {
  if (options.sigma_grid.empty() || options.lambda_grid.empty()) {
    throw Error(Errc::kRange, kModule, "empty hyperparameter grid");
  }
  std::vector<std::size_t> universe(rows.begin(), rows.end());
  if (universe.empty()) {
    universe.resize(d.p());
    std::iota(universe.begin(), universe.end(), std::size_t{0});
  }
  auto folds = kfold_partition(universe.size(), options.folds, options.seed);
  for (auto& fold : folds) {
    for (auto& pos : fold) pos = universe[pos];
  }

  // Training complement of each fold.
  std::vector<std::vector<std::size_t>> train(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f) train[f].insert(train[f].end(), folds[g].begin(), folds[g].end());
    }
    std::sort(train[f].begin(), train[f].end());
  }

  CvReport report;
  report.folds = options.folds;
  report.seed = options.seed;
  for (double sigma : options.sigma_grid) {
    for (double lambda : options.lambda_grid) report.grid.push_back({sigma, lambda, 0.0, 0.0});
  }

  parallel_for(report.grid.size(), options.workers, [&](std::size_t g) {
    auto& point = report.grid[g];
    double mae_sum = 0.0;
    double r2_sum = 0.0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const auto fitted = try_fit_krr(d, train[f], KernelParams{point.sigma}, point.lambda);
      if (!fitted) {
        mae_sum = std::numeric_limits<double>::infinity();
        r2_sum = -std::numeric_limits<double>::infinity();
        break;
      }
      const KrrModel& model = *fitted;
      double abs_sum = 0.0;
      double ss_res = 0.0;
      double mean_y = 0.0;
      for (auto i : folds[f]) mean_y += d.y()[static_cast<Eigen::Index>(i)];
      mean_y /= static_cast<double>(folds[f].size());
      double ss_tot = 0.0;
      for (auto i : folds[f]) {
        const double y = d.y()[static_cast<Eigen::Index>(i)];
        const double err = predict_value(model, d, d.row(i)) - y;
        abs_sum += std::abs(err);
        ss_res += err * err;
        ss_tot += (y - mean_y) * (y - mean_y);
      }
      mae_sum += abs_sum / static_cast<double>(folds[f].size());
      // A constant fold has no variance to explain: score 1 for a perfect
      // fit, 0 otherwise.
      r2_sum += ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
    }
    point.mae = mae_sum / static_cast<double>(folds.size());
    point.r2 = r2_sum / static_cast<double>(folds.size());
  });

  const CvPoint* best = nullptr;
  for (const auto& point : report.grid) {
    if (!std::isfinite(point.mae)) continue;
    if (best == nullptr || point.mae < best->mae ||
        (point.mae == best->mae &&
         (point.lambda > best->lambda ||
          (point.lambda == best->lambda && point.sigma > best->sigma)))) {
      best = &point;
    }
  }
  if (best == nullptr) {
    throw Error(Errc::kIllConditioned, kModule, "every grid point failed to fit; raise lambda");
  }
  report.sigma = best->sigma;
  report.lambda = best->lambda;
  return report;
}

std::vector<double> default_sigma_grid(const Dataset& d) {
  std::vector<double> distances;
  distances.reserve(d.p() * (d.p() - 1) / 2);
  for (std::size_t i = 0; i < d.p(); ++i) {
    for (std::size_t j = i + 1; j < d.p(); ++j) distances.push_back(l1_distance(d.row(i), d.row(j)));
  }
  const auto mid = distances.begin() + static_cast<std::ptrdiff_t>(distances.size() / 2);
  std::nth_element(distances.begin(), mid, distances.end());
  double median = *mid;
  if (distances.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(distances.begin(), mid));
  }
  if (!(median > 0.0)) median = 1.0;
  std::vector<double> grid;
  for (int e = -4; e <= 6; ++e) grid.push_back(std::ldexp(median, e));
  return grid;
}

std::vector<double> default_lambda_grid() {
  return {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1e0, 1e1};
}

}  // namespace bagvote
