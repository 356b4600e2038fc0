#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace bagvote {

// One-dimensional Gaussian mixture. Components are sorted by mean.
struct GmmFit {
  std::size_t k = 0;
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> sds;
  double log_likelihood = 0.0;
  double bic = 0.0;
  std::size_t n_samples = 0;
  std::size_t restarts_used = 0;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;  // EM iterations of the winning restart
  double sd_floor = 0.0;

  // Index of the largest-weight component (ties: lower mean).
  std::size_t dominant() const;
};

struct EmSettings {
  std::size_t max_iterations = 500;
  double tolerance = 1e-8;  // stop when the per-sample log-likelihood gain drops below
};

// Log-likelihood after every E-step, one list per restart.
struct EmTrace {
  std::vector<std::vector<double>> log_likelihood;
};

// 1e-6 times the sample range, or 1e-12 for constant samples.
double sd_floor_for(std::span<const double> samples);

// kappa ln(n) - 2 lnL with kappa = 3k - 1 free parameters.
double gmm_bic(double log_likelihood, std::size_t k, std::size_t n);

// Best-of-`restarts` EM fit with k components. Each restart seeds its means
// by D^2-weighted farthest-point sampling from its own (seed, k, restart)
// stream. Throws Errc::kSampleSize when samples.size() < 2k and Errc::kRange
// for k == 0 or restarts == 0.
GmmFit fit_gmm_1d(std::span<const double> samples, std::size_t k, std::size_t restarts,
                  std::uint64_t seed, EmTrace* trace = nullptr, const EmSettings& settings = {});

// Fits k = 1..min(k_max, n/2) and returns the lowest-BIC fit (ties to the
// smaller k). `candidates`, when given, receives every fit in k order.
GmmFit select_k_bic(std::span<const double> samples, std::size_t k_max, std::size_t restarts,
                    std::uint64_t seed, std::vector<GmmFit>* candidates = nullptr,
                    const EmSettings& settings = {});

// Posterior component probabilities of `value`.
std::vector<double> responsibility(const GmmFit& fit, double value);

// Log density of the mixture at `value`.
double log_density(const GmmFit& fit, double value);

}  // namespace bagvote
