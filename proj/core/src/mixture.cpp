#include "bagvote/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "bagvote/error.hpp"
#include "bagvote/random.hpp"

namespace bagvote {

namespace {

constexpr const char* kModule = "mixture";
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

struct Params {
  std::vector<double> weight;
  std::vector<double> mean;
  std::vector<double> var;
};

// D^2 seeding followed by one hard assignment for the initial spreads.
Params initialize(std::span<const double> x, std::size_t k, double var_floor, Rng& rng) {
  const std::size_t n = x.size();
  std::vector<double> centers;
  centers.push_back(x[rng.below(n)]);
  std::vector<double> d2(n);
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double c : centers) best = std::min(best, (x[i] - c) * (x[i] - c));
      d2[i] = best;
      total += best;
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.below(n);
    }
    centers.push_back(x[pick]);
  }

  const double mean_all = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double var_all = 0.0;
  for (double v : x) var_all += (v - mean_all) * (v - mean_all);
  var_all /= static_cast<double>(n);

  std::vector<double> count(k, 0.0), sum(k, 0.0), sq(k, 0.0);
  for (double v : x) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < k; ++c) {
      if (std::abs(v - centers[c]) < std::abs(v - centers[best])) best = c;
    }
    count[best] += 1.0;
    sum[best] += v;
  }
  Params p;
  p.weight.resize(k);
  p.mean = centers;
  p.var.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    if (count[c] > 0.0) p.mean[c] = sum[c] / count[c];
  }
  for (double v : x) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < k; ++c) {
      if (std::abs(v - centers[c]) < std::abs(v - centers[best])) best = c;
    }
    sq[best] += (v - p.mean[best]) * (v - p.mean[best]);
  }
  for (std::size_t c = 0; c < k; ++c) {
    p.weight[c] = std::max(count[c], 1.0) / static_cast<double>(n);
    const double spread = count[c] >= 2.0 ? sq[c] / count[c]
                                          : var_all / static_cast<double>(k * k);
    p.var[c] = std::max(spread, var_floor);
  }
  const double wsum = std::accumulate(p.weight.begin(), p.weight.end(), 0.0);
  for (auto& w : p.weight) w /= wsum;
  return p;
}

struct EmResult {
  Params params;
  double log_likelihood = -std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
};

EmResult run_em(std::span<const double> x, Params params, double var_floor,
                const EmSettings& settings, std::vector<double>* trace) {
  const std::size_t n = x.size();
  const std::size_t k = params.mean.size();
  std::vector<double> resp(n * k);
  std::vector<double> offset(k), scale(k);
  // Responsibility sums and first moments, filled by the E-step for the
  // following M-step.
  std::vector<double> nk(k), sx(k), sv(k);

  auto e_step = [&]() {
    for (std::size_t c = 0; c < k; ++c) {
      offset[c] = std::log(params.weight[c]) - kLogSqrt2Pi - 0.5 * std::log(params.var[c]);
      scale[c] = 0.5 / params.var[c];
    }
    std::fill(nk.begin(), nk.end(), 0.0);
    std::fill(sx.begin(), sx.end(), 0.0);
    double ll = 0.0;
    // Each per-sample normalizer lies in [1, k], so short runs of them can be
    // multiplied before taking one logarithm.
    double product = 1.0;
    std::size_t pending = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double* r = resp.data() + i * k;
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = x[i] - params.mean[c];
        r[c] = offset[c] - d * d * scale[c];
        top = std::max(top, r[c]);
      }
      double total = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        r[c] = std::exp(r[c] - top);
        total += r[c];
      }
      const double inv = 1.0 / total;
      for (std::size_t c = 0; c < k; ++c) {
        r[c] *= inv;
        nk[c] += r[c];
        sx[c] += r[c] * x[i];
      }
      ll += top;
      product *= total;
      if (++pending == 32) {
        ll += std::log(product);
        product = 1.0;
        pending = 0;
      }
    }
    return ll + std::log(product);
  };

  auto m_step = [&]() {
    for (std::size_t c = 0; c < k; ++c) {
      if (nk[c] > 0.0) params.mean[c] = sx[c] / nk[c];
    }
    std::fill(sv.begin(), sv.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* r = resp.data() + i * k;
      for (std::size_t c = 0; c < k; ++c) {
        const double d = x[i] - params.mean[c];
        sv[c] += r[c] * d * d;
      }
    }
    const double total = std::accumulate(nk.begin(), nk.end(), 0.0);
    for (std::size_t c = 0; c < k; ++c) {
      params.weight[c] = nk[c] / total;
      // A component with no mass keeps its last spread; its weight is 0.
      if (nk[c] > 0.0) params.var[c] = std::max(sv[c] / nk[c], var_floor);
    }
  };

  EmResult result;
  const double gain_scale = static_cast<double>(n);
  double ll = e_step();
  if (trace) trace->push_back(ll);
  std::size_t iter = 0;
  while (iter < settings.max_iterations) {
    const Params previous = params;
    m_step();
    ++iter;
    const double next = e_step();
    if (trace) trace->push_back(next);
    if (!((next - ll) / gain_scale >= settings.tolerance)) {
      // Keep whichever of the last two states scores higher so a rounding
      // dip at convergence never lowers the returned likelihood.
      if (next < ll) {
        params = previous;
      } else {
        ll = next;
      }
      break;
    }
    ll = next;
  }
  result.params = std::move(params);
  result.log_likelihood = ll;
  result.iterations = iter;
  return result;
}

GmmFit to_fit(const EmResult& em, std::size_t n, std::size_t restarts_used, std::uint64_t seed,
              double sd_floor) {
  const std::size_t k = em.params.mean.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return em.params.mean[a] < em.params.mean[b];
  });
  GmmFit fit;
  fit.k = k;
  for (auto c : order) {
    fit.weights.push_back(em.params.weight[c]);
    fit.means.push_back(em.params.mean[c]);
    fit.sds.push_back(std::max(std::sqrt(em.params.var[c]), sd_floor));
  }
  fit.log_likelihood = em.log_likelihood;
  fit.bic = gmm_bic(em.log_likelihood, k, n);
  fit.n_samples = n;
  fit.restarts_used = restarts_used;
  fit.seed = seed;
  fit.iterations = em.iterations;
  fit.sd_floor = sd_floor;
  return fit;
}

}  // namespace

std::size_t GmmFit::dominant() const {
  std::size_t best = 0;
  for (std::size_t c = 1; c < k; ++c) {
    if (weights[c] > weights[best]) best = c;
  }
  return best;
}

double sd_floor_for(std::span<const double> samples) {
  if (samples.empty()) return 1e-12;
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  const double range = *hi - *lo;
  return range > 0.0 ? 1e-6 * range : 1e-12;
}

double gmm_bic(double log_likelihood, std::size_t k, std::size_t n) {
  const double kappa = 3.0 * static_cast<double>(k) - 1.0;
  return kappa * std::log(static_cast<double>(n)) - 2.0 * log_likelihood;
}

GmmFit fit_gmm_1d(std::span<const double> samples, std::size_t k, std::size_t restarts,
                  std::uint64_t seed, EmTrace* trace, const EmSettings& settings) {
  if (k == 0) throw Error(Errc::kRange, kModule, "component count must be >= 1");
  if (restarts == 0) throw Error(Errc::kRange, kModule, "restart count must be >= 1");
  if (samples.size() < 2 * k) {
    throw Error(Errc::kSampleSize, kModule,
                std::to_string(samples.size()) + " samples cannot support " + std::to_string(k) +
                    " components (need " + std::to_string(2 * k) + ")");
  }
  for (double v : samples) {
    if (!std::isfinite(v)) throw Error(Errc::kParse, kModule, "non-finite sample");
  }
  const double floor = sd_floor_for(samples);
  const double var_floor = floor * floor;

  // With one component every start converges to the same moments.
  const std::size_t runs = k == 1 ? 1 : restarts;
  EmResult best;
  for (std::size_t r = 0; r < runs; ++r) {
    Rng rng({seed, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(r)});
    Params init = initialize(samples, k, var_floor, rng);
    std::vector<double>* log = nullptr;
    if (trace) log = &trace->log_likelihood.emplace_back();
    EmResult em = run_em(samples, std::move(init), var_floor, settings, log);
    if (em.log_likelihood > best.log_likelihood) best = std::move(em);
  }
  return to_fit(best, samples.size(), runs, seed, floor);
}

GmmFit select_k_bic(std::span<const double> samples, std::size_t k_max, std::size_t restarts,
                    std::uint64_t seed, std::vector<GmmFit>* candidates,
                    const EmSettings& settings) {
  if (samples.size() < 2) {
    throw Error(Errc::kSampleSize, kModule, "need at least 2 samples for model selection");
  }
  if (k_max == 0) throw Error(Errc::kRange, kModule, "k_max must be >= 1");
  const std::size_t upper = std::min(k_max, samples.size() / 2);
  GmmFit best;
  for (std::size_t k = 1; k <= upper; ++k) {
    GmmFit fit = fit_gmm_1d(samples, k, restarts, seed, nullptr, settings);
    if (candidates) candidates->push_back(fit);
    if (k == 1 || fit.bic < best.bic) best = std::move(fit);
  }
  return best;
}

std::vector<double> responsibility(const GmmFit& fit, double value) {
  std::vector<double> out(fit.k);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < fit.k; ++c) {
    const double z = (value - fit.means[c]) / fit.sds[c];
    out[c] = std::log(fit.weights[c]) - std::log(fit.sds[c]) - 0.5 * z * z;
    top = std::max(top, out[c]);
  }
  double total = 0.0;
  for (auto& v : out) {
    v = std::exp(v - top);
    total += v;
  }
  for (auto& v : out) v /= total;
  return out;
}

double log_density(const GmmFit& fit, double value) {
  double top = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(fit.k);
  for (std::size_t c = 0; c < fit.k; ++c) {
    const double z = (value - fit.means[c]) / fit.sds[c];
    terms[c] = std::log(fit.weights[c]) - kLogSqrt2Pi - std::log(fit.sds[c]) - 0.5 * z * z;
    top = std::max(top, terms[c]);
  }
  double total = 0.0;
  for (double t : terms) total += std::exp(t - top);
  return top + std::log(total);
}

}  // namespace bagvote
