#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "bagvote/dataset.hpp"
#include "bagvote/error.hpp"
#include "bagvote/random.hpp"

namespace bagvote::testing {

// Error code thrown by fn; records a failure when nothing is thrown.
inline Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::kIo;
}

// One-descriptor dataset with ids r0, r1, ...
inline Dataset line(const std::vector<double>& xs, const std::vector<double>& ys) {
  RowMatrix x(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::VectorXd y(static_cast<Eigen::Index>(ys.size()));
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    x(static_cast<Eigen::Index>(i), 0) = xs[i];
    y[static_cast<Eigen::Index>(i)] = ys[i];
    ids.push_back("r" + std::to_string(i));
  }
  return Dataset(std::move(ids), std::move(x), std::move(y), {"x"});
}

// Standard-normal descriptors, N(0, 3^2) targets.
inline Dataset random_dataset(Rng& rng, std::size_t p, std::size_t m) {
  RowMatrix x(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(m));
  Eigen::VectorXd y(static_cast<Eigen::Index>(p));
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t c = 0; c < m; ++c) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rng.normal();
    y[static_cast<Eigen::Index>(i)] = rng.normal(0.0, 3.0);
    ids.push_back("r" + std::to_string(i));
  }
  return Dataset(std::move(ids), std::move(x), std::move(y), {});
}

}  // namespace bagvote::testing
