#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace bagvote {

// Row-major so that each instance's descriptor vector is contiguous.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// p instances x m descriptors plus a target vector. Immutable once built;
// construction validates shapes, finiteness, id uniqueness and p >= 3.
class Dataset {
 public:
  static constexpr std::size_t kMinInstances = 3;

  Dataset(std::vector<std::string> ids, RowMatrix x, Eigen::VectorXd y,
          std::vector<std::string> descriptor_names, std::string target_name = "y");

  std::size_t p() const { return ids_.size(); }
  std::size_t m() const { return static_cast<std::size_t>(x_.cols()); }

  const std::vector<std::string>& ids() const { return ids_; }
  const RowMatrix& x() const { return x_; }
  const Eigen::VectorXd& y() const { return y_; }
  const std::vector<std::string>& descriptor_names() const { return descriptor_names_; }
  const std::string& target_name() const { return target_name_; }

  std::span<const double> row(std::size_t i) const {
    return {x_.data() + i * m(), m()};
  }

  // Index of `id`, or p() when absent.
  std::size_t index_of(std::string_view id) const;

  // Rows `indices` in the given order.
  Dataset subset(std::span<const std::size_t> indices) const;

 private:
  std::vector<std::string> ids_;
  RowMatrix x_;
  Eigen::VectorXd y_;
  std::vector<std::string> descriptor_names_;
  std::string target_name_;
};

// Which CSV columns play which role. An empty descriptor list means "every
// column that is neither the id, the target, nor ignored".
struct DescriptorSchema {
  std::string id_column = "id";
  std::string target_column = "y";
  std::vector<std::string> descriptor_columns;
  std::vector<std::string> ignored_columns;

  // Throws Errc::kSchema when descriptor columns overlap id/target or repeat.
  void validate() const;

  // 21 descriptors for rare-earth / transition-metal binary alloys: atomic
  // number, covalent radius, first ionization energy and electronegativity
  // of both constituents; 3d and 4f spin, orbital and total angular
  // momentum; 4f moment projections J*g_j and J*(1-g_j); T and R
  // concentrations (atoms per cubic angstrom); mean R-R, T-T and T-R radii.
  static DescriptorSchema alloy21(std::string id_column = "id",
                                  std::string target_column = "Tc");
  static const std::vector<std::string>& alloy21_descriptors();
};

Dataset load_csv(const std::filesystem::path& path, const DescriptorSchema& schema);
Dataset parse_csv_dataset(std::string_view text, const DescriptorSchema& schema);

// Per-column z-score parameters (sample standard deviation, n-1).
struct ScalingParams {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;

  RowMatrix apply(const RowMatrix& x) const;
  RowMatrix inverse(const RowMatrix& x) const;
};

// Throws Errc::kDegenerateColumn naming the first constant column.
std::pair<Dataset, ScalingParams> standardize(const Dataset& d);

enum class Branch : std::uint8_t { kMonotonic, kUpper, kLower };

std::string_view to_string(Branch b);
Branch parse_branch(std::string_view text);

struct Prototype {
  Dataset data;
  std::vector<Branch> labels;
};

// Noise-free target of each branch of the bifurcated toy function. Flat at
// 0.1 for x < -0.4; beyond it the upper branch ramps linearly to 0.3 and the
// lower branch to -0.15 at x = 1.
double prototype_branch_value(Branch branch, double x);

inline constexpr double kPrototypeSplit = -0.4;
inline constexpr double kPrototypeNoiseSd = 0.01;

// Bifurcated one-descriptor dataset: x ~ U[-1, 1], y = branch value + N(0, 0.01^2),
// branch chosen by a fair coin when x >= -0.4. Instances are ordered by x and
// named i000, i001, ... Deterministic given (seed, n). Throws Errc::kSize for n < 10.
Prototype generate_prototype(std::uint64_t seed, std::size_t n = 70);

// Columns id,x,y,branch.
void write_prototype_csv(const std::filesystem::path& path, const Prototype& proto);

}  // namespace bagvote
