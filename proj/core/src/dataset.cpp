#include "bagvote/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_set>

#include "bagvote/csv.hpp"
#include "bagvote/error.hpp"
#include "bagvote/random.hpp"

namespace bagvote {

namespace {

constexpr const char* kModule = "dataset";

bool contains(const std::vector<std::string>& names, std::string_view name) {
  return std::find(names.begin(), names.end(), name) != names.end();
}

}  // namespace

Dataset::Dataset(std::vector<std::string> ids, RowMatrix x, Eigen::VectorXd y,
                 std::vector<std::string> descriptor_names, std::string target_name)
    : ids_(std::move(ids)),
      x_(std::move(x)),
      y_(std::move(y)),
      descriptor_names_(std::move(descriptor_names)),
      target_name_(std::move(target_name)) {
  const auto p = ids_.size();
  if (p < kMinInstances) {
    throw Error(Errc::kSize, kModule,
                "need at least " + std::to_string(kMinInstances) + " instances, got " +
                    std::to_string(p));
  }
  if (static_cast<std::size_t>(x_.rows()) != p || static_cast<std::size_t>(y_.size()) != p) {
    throw Error(Errc::kValidation, kModule, "ids, descriptor rows and targets differ in length");
  }
  if (x_.cols() == 0) throw Error(Errc::kValidation, kModule, "no descriptor columns");
  if (descriptor_names_.empty()) {
    for (Eigen::Index c = 0; c < x_.cols(); ++c) descriptor_names_.push_back("x" + std::to_string(c));
  }
  if (static_cast<Eigen::Index>(descriptor_names_.size()) != x_.cols()) {
    throw Error(Errc::kValidation, kModule, "descriptor name count does not match column count");
  }
  for (std::size_t i = 0; i < p; ++i) {
    if (!std::isfinite(y_[static_cast<Eigen::Index>(i)])) {
      throw Error(Errc::kParse, kModule, "non-finite target at row " + std::to_string(i));
    }
    for (Eigen::Index c = 0; c < x_.cols(); ++c) {
      if (!std::isfinite(x_(static_cast<Eigen::Index>(i), c))) {
        throw Error(Errc::kParse, kModule,
                    "non-finite descriptor '" + descriptor_names_[c] + "' at row " +
                        std::to_string(i));
      }
    }
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : ids_) {
    if (!seen.insert(id).second) throw Error(Errc::kValidation, kModule, "duplicate id '" + id + "'");
  }
}

std::size_t Dataset::index_of(std::string_view id) const {
  const auto it = std::find(ids_.begin(), ids_.end(), id);
  return static_cast<std::size_t>(it - ids_.begin());
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<std::string> ids;
  RowMatrix x(static_cast<Eigen::Index>(indices.size()), x_.cols());
  Eigen::VectorXd y(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto i = indices[r];
    if (i >= p()) throw Error(Errc::kRange, kModule, "subset index out of range");
    ids.push_back(ids_[i]);
    x.row(static_cast<Eigen::Index>(r)) = x_.row(static_cast<Eigen::Index>(i));
    y[static_cast<Eigen::Index>(r)] = y_[static_cast<Eigen::Index>(i)];
  }
  return Dataset(std::move(ids), std::move(x), std::move(y), descriptor_names_, target_name_);
}

void DescriptorSchema::validate() const {
  if (id_column == target_column) {
    throw Error(Errc::kSchema, kModule, "id and target column are both '" + id_column + "'");
  }
  std::unordered_set<std::string> seen;
  for (const auto& name : descriptor_columns) {
    if (name == id_column || name == target_column) {
      throw Error(Errc::kSchema, kModule, "descriptor column '" + name + "' is also the id or target");
    }
    if (!seen.insert(name).second) {
      throw Error(Errc::kSchema, kModule, "descriptor column '" + name + "' listed twice");
    }
  }
}

const std::vector<std::string>& DescriptorSchema::alloy21_descriptors() {
  static const std::vector<std::string> names = {
      "Z_R",  "Z_T",  "r_covR", "r_covT",  "IP_R",      "IP_T", "chi_R",
      "chi_T", "S_3d", "S_4f",   "L_3d",    "L_4f",      "J_3d", "J_4f",
      "J_4f_gj", "J_4f_1mgj", "C_T", "C_R", "r_RR", "r_TT", "r_TR",
  };
  return names;
}

DescriptorSchema DescriptorSchema::alloy21(std::string id_column, std::string target_column) {
  DescriptorSchema schema;
  schema.id_column = std::move(id_column);
  schema.target_column = std::move(target_column);
  schema.descriptor_columns = alloy21_descriptors();
  return schema;
}

Dataset parse_csv_dataset(std::string_view text, const DescriptorSchema& schema) {
  schema.validate();
  const csv::Table table = csv::parse(text);

  auto require = [&table](const std::string& name) {
    const auto col = table.column(name);
    if (!col) throw Error(Errc::kSchema, kModule, "missing column '" + name + "'");
    return *col;
  };
  const std::size_t id_col = require(schema.id_column);
  const std::size_t target_col = require(schema.target_column);

  std::vector<std::string> names = schema.descriptor_columns;
  if (names.empty()) {
    for (const auto& h : table.header) {
      if (h != schema.id_column && h != schema.target_column && !contains(schema.ignored_columns, h)) {
        names.push_back(h);
      }
    }
    if (names.empty()) throw Error(Errc::kSchema, kModule, "no descriptor columns in header");
  }
  std::vector<std::size_t> cols;
  for (const auto& name : names) cols.push_back(require(name));

  const auto p = table.rows.size();
  std::vector<std::string> ids;
  ids.reserve(p);
  RowMatrix x(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(cols.size()));
  Eigen::VectorXd y(static_cast<Eigen::Index>(p));
  for (std::size_t r = 0; r < p; ++r) {
    const auto& row = table.rows[r];
    ids.push_back(row[id_col]);
    y[static_cast<Eigen::Index>(r)] = csv::parse_double(row[target_col], r, schema.target_column);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          csv::parse_double(row[cols[c]], r, names[c]);
    }
  }
  return Dataset(std::move(ids), std::move(x), std::move(y), std::move(names), schema.target_column);
}

Dataset load_csv(const std::filesystem::path& path, const DescriptorSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, kModule, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv_dataset(buffer.str(), schema);
}

RowMatrix ScalingParams::apply(const RowMatrix& x) const {
  RowMatrix out = x;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    out.col(c) = (x.col(c).array() - mean[c]) / sd[c];
  }
  return out;
}

RowMatrix ScalingParams::inverse(const RowMatrix& x) const {
  RowMatrix out = x;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    out.col(c) = x.col(c).array() * sd[c] + mean[c];
  }
  return out;
}

std::pair<Dataset, ScalingParams> standardize(const Dataset& d) {
  const auto& x = d.x();
  const auto n = static_cast<double>(d.p());
  ScalingParams params;
  params.mean.resize(x.cols());
  params.sd.resize(x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double mean = x.col(c).sum() / n;
    const double ss = (x.col(c).array() - mean).square().sum();
    const double sd = std::sqrt(ss / (n - 1.0));
    const double scale = std::max(1.0, x.col(c).cwiseAbs().maxCoeff());
    if (!(sd > 1e-12 * scale)) {
      throw Error(Errc::kDegenerateColumn, kModule,
                  "descriptor column '" + d.descriptor_names()[static_cast<std::size_t>(c)] +
                      "' is constant");
    }
    params.mean[c] = mean;
    params.sd[c] = sd;
  }
  Dataset scaled(d.ids(), params.apply(x), d.y(), d.descriptor_names(), d.target_name());
  return {std::move(scaled), std::move(params)};
}

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::kMonotonic: return "monotonic";
    case Branch::kUpper: return "upper";
    case Branch::kLower: return "lower";
  }
  return "monotonic";
}

Branch parse_branch(std::string_view text) {
  if (text == "monotonic") return Branch::kMonotonic;
  if (text == "upper") return Branch::kUpper;
  if (text == "lower") return Branch::kLower;
  throw Error(Errc::kParse, kModule, "unknown branch label '" + std::string(text) + "'");
}

double prototype_branch_value(Branch branch, double x) {
  const double ramp = (x - kPrototypeSplit) / (1.0 - kPrototypeSplit);
  switch (branch) {
    case Branch::kMonotonic: return 0.1;
    case Branch::kUpper: return 0.1 + 0.2 * ramp;
    case Branch::kLower: return 0.1 - 0.25 * ramp;
  }
  return 0.1;
}

Prototype generate_prototype(std::uint64_t seed, std::size_t n) {
  if (n < 10) {
    throw Error(Errc::kSize, kModule, "prototype needs n >= 10, got " + std::to_string(n));
  }
  Rng rng(seed);
  struct Draw {
    double x;
    double y;
    Branch branch;
  };
  std::vector<Draw> draws(n);
  for (auto& draw : draws) {
    draw.x = rng.uniform(-1.0, 1.0);
    // The coin is drawn for every instance so the stream layout does not
    // depend on x.
    const bool upper = rng.uniform() < 0.5;
    const double noise = rng.normal(0.0, kPrototypeNoiseSd);
    draw.branch = draw.x < kPrototypeSplit ? Branch::kMonotonic
                  : upper                  ? Branch::kUpper
                                           : Branch::kLower;
    draw.y = prototype_branch_value(draw.branch, draw.x) + noise;
  }
  std::stable_sort(draws.begin(), draws.end(),
                   [](const Draw& a, const Draw& b) { return a.x < b.x; });

  const int width = std::max(3, static_cast<int>(std::to_string(n - 1).size()));
  std::vector<std::string> ids;
  RowMatrix x(static_cast<Eigen::Index>(n), 1);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  std::vector<Branch> labels;
  for (std::size_t i = 0; i < n; ++i) {
    std::ostringstream id;
    id << 'i' << std::setw(width) << std::setfill('0') << i;
    ids.push_back(id.str());
    x(static_cast<Eigen::Index>(i), 0) = draws[i].x;
    y[static_cast<Eigen::Index>(i)] = draws[i].y;
    labels.push_back(draws[i].branch);
  }
  return Prototype{Dataset(std::move(ids), std::move(x), std::move(y), {"x"}, "y"), std::move(labels)};
}

void write_prototype_csv(const std::filesystem::path& path, const Prototype& proto) {
  csv::Table table;
  table.header = {"id", "x", "y", "branch"};
  const auto& d = proto.data;
  for (std::size_t i = 0; i < d.p(); ++i) {
    table.rows.push_back({d.ids()[i], csv::format_double(d.x()(static_cast<Eigen::Index>(i), 0)),
                          csv::format_double(d.y()[static_cast<Eigen::Index>(i)]),
                          std::string(to_string(proto.labels[i]))});
  }
  csv::write(path, table);
}

}  // namespace bagvote
