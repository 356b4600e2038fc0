#include "bagvote/io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bagvote/csv.hpp"
#include "bagvote/error.hpp"

namespace bagvote::io {

namespace {

constexpr const char* kModule = "io";
using nlohmann::json;

std::size_t require_column(const csv::Table& table, std::string_view name, const fs::path& path) {
  const auto col = table.column(name);
  if (!col) {
    throw Error(Errc::kSchema, kModule, path.string() + ": missing column '" + std::string(name) + "'");
  }
  return *col;
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::kIo, kModule, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, kModule, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::kParse, kModule, path.string() + ": " + e.what());
  }
}

template <class T>
T json_get(const json& doc, const char* key, const fs::path& path) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(Errc::kParse, kModule, path.string() + ": missing or invalid '" + key + "'");
  }
}

std::map<std::string, std::size_t> id_index(const Dataset& d) {
  std::map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < d.p(); ++i) out.emplace(d.ids()[i], i);
  return out;
}

// Header "id", then ids; first column ids. Returns the body cells.
csv::Table square_table(const fs::path& path, std::vector<std::string>* ids) {
  csv::Table table = csv::read(path);
  const std::size_t p = table.rows.size();
  if (table.header.size() != p + 1) {
    throw Error(Errc::kParse, kModule, path.string() + ": matrix is not square");
  }
  for (std::size_t r = 0; r < p; ++r) {
    if (table.rows[r][0] != table.header[r + 1]) {
      throw Error(Errc::kParse, kModule, path.string() + ": row and column ids differ at " + std::to_string(r));
    }
  }
  if (ids) ids->assign(table.header.begin() + 1, table.header.end());
  return table;
}

}  // namespace

void write_cv_report(const fs::path& path, const CvReport& report) {
  csv::Table table;
  table.header = {"sigma", "lambda", "fold_mae_mean", "fold_r2_mean"};
  for (const auto& point : report.grid) {
    table.rows.push_back({csv::format_double(point.sigma), csv::format_double(point.lambda),
                          csv::format_double(point.mae), csv::format_double(point.r2)});
  }
  csv::write(path, table);
}

std::vector<CvPoint> read_cv_report(const fs::path& path) {
  const csv::Table table = csv::read(path);
  const auto cs = require_column(table, "sigma", path);
  const auto cl = require_column(table, "lambda", path);
  const auto cm = require_column(table, "fold_mae_mean", path);
  const auto cr = require_column(table, "fold_r2_mean", path);
  std::vector<CvPoint> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    out.push_back({csv::parse_double(row[cs], r, "sigma"), csv::parse_double(row[cl], r, "lambda"),
                   csv::parse_double(row[cm], r, "fold_mae_mean"),
                   csv::parse_double(row[cr], r, "fold_r2_mean")});
  }
  return out;
}

void write_predictions(const fs::path& path, const BagRunStore& store, const Dataset& d) {
  if (store.p() != d.p()) throw Error(Errc::kConsistency, kModule, "store and dataset differ in p");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kIo, kModule, "cannot write " + path.string());
  // Streamed rather than built as a Table: this file has T*(1-f)*p rows.
  out << "instance_id,bag_index,y_hat,abs_error\n";
  csv::Table one;
  for (std::size_t j = 0; j < store.p(); ++j) {
    std::string id = d.ids()[j];
    if (id.find_first_of(",\"\r\n") != std::string::npos) {
      std::ostringstream quoted;
      csv::write(quoted, csv::Table{{id}, {}});
      id = quoted.str();
      id.pop_back();
    }
    for (const auto& r : store.records(j)) {
      out << id << ',' << r.bag << ',' << csv::format_double(r.y_hat) << ','
          << csv::format_double(r.abs_error) << '\n';
    }
  }
  if (!out) throw Error(Errc::kIo, kModule, "write failed for " + path.string());
}

BagRunStore read_predictions(const fs::path& path, const Dataset& d, std::size_t bags,
                             std::vector<std::size_t> failed) {
  const csv::Table table = csv::read(path);
  const auto ci = require_column(table, "instance_id", path);
  const auto cb = require_column(table, "bag_index", path);
  const auto cy = require_column(table, "y_hat", path);
  const auto ce = require_column(table, "abs_error", path);
  const auto index = id_index(d);
  std::vector<std::vector<BagRecord>> records(d.p());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto it = index.find(row[ci]);
    if (it == index.end()) {
      throw Error(Errc::kConsistency, kModule, path.string() + ": unknown instance '" + row[ci] + "'");
    }
    const auto bag = csv::parse_integer(row[cb], r, "bag_index");
    if (bag < 0) throw Error(Errc::kParse, kModule, "negative bag index");
    records[it->second].push_back({static_cast<std::size_t>(bag), csv::parse_double(row[cy], r, "y_hat"),
                                   csv::parse_double(row[ce], r, "abs_error")});
  }
  return BagRunStore::from_records(d.p(), bags, std::move(records), std::move(failed));
}

void write_contributions(const fs::path& dir, const BagRunStore& store, const Dataset& d) {
  if (!store.has_contributions()) return;
  fs::create_directories(dir);
  for (std::size_t j = 0; j < store.p(); ++j) {
    if (!store.has_contributions(j)) continue;
    csv::Table table;
    table.header.push_back("bag_index");
    table.header.insert(table.header.end(), d.ids().begin(), d.ids().end());
    for (const auto& row : store.contribution_rows(j)) {
      std::vector<std::string> cells{std::to_string(row.bag)};
      for (Eigen::Index i = 0; i < row.values.size(); ++i) cells.push_back(csv::format_double(row.values[i]));
      table.rows.push_back(std::move(cells));
    }
    csv::write(dir / (d.ids()[j] + ".csv"), table);
  }
}

ContributionProfile read_contributions(const fs::path& path, const Dataset& d) {
  const csv::Table table = csv::read(path);
  if (table.header.size() != d.p() + 1 || table.header[0] != "bag_index") {
    throw Error(Errc::kSchema, kModule, path.string() + ": expected bag_index plus one column per instance");
  }
  const auto index = id_index(d);
  std::vector<std::size_t> column_of(d.p());
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    const auto it = index.find(table.header[c]);
    if (it == index.end()) throw Error(Errc::kConsistency, kModule, "unknown instance column " + table.header[c]);
    column_of[it->second] = c;
  }
  ContributionProfile out;
  out.values.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(d.p()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    out.bags.push_back(static_cast<std::size_t>(csv::parse_integer(row[0], r, "bag_index")));
    for (std::size_t i = 0; i < d.p(); ++i) {
      out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) =
          csv::parse_double(row[column_of[i]], r, table.header[column_of[i]]);
    }
  }
  return out;
}

void write_gmm(const fs::path& path, const GmmFit& fit) {
  json doc;
  doc["K"] = fit.k;
  doc["weights"] = fit.weights;
  doc["means"] = fit.means;
  doc["sds"] = fit.sds;
  doc["loglik"] = fit.log_likelihood;
  doc["bic"] = fit.bic;
  doc["n"] = fit.n_samples;
  doc["restarts_used"] = fit.restarts_used;
  doc["seed"] = fit.seed;
  doc["iterations"] = fit.iterations;
  doc["sd_floor"] = fit.sd_floor;
  write_json(path, doc);
}

GmmFit read_gmm(const fs::path& path) {
  const json doc = read_json(path);
  GmmFit fit;
  fit.k = json_get<std::size_t>(doc, "K", path);
  fit.weights = json_get<std::vector<double>>(doc, "weights", path);
  fit.means = json_get<std::vector<double>>(doc, "means", path);
  fit.sds = json_get<std::vector<double>>(doc, "sds", path);
  fit.log_likelihood = json_get<double>(doc, "loglik", path);
  fit.bic = json_get<double>(doc, "bic", path);
  fit.n_samples = json_get<std::size_t>(doc, "n", path);
  fit.restarts_used = doc.value("restarts_used", std::size_t{0});
  fit.seed = doc.value("seed", std::uint64_t{0});
  fit.iterations = doc.value("iterations", std::size_t{0});
  fit.sd_floor = doc.value("sd_floor", 0.0);
  if (fit.weights.size() != fit.k || fit.means.size() != fit.k || fit.sds.size() != fit.k) {
    throw Error(Errc::kParse, kModule, path.string() + ": component arrays disagree with K");
  }
  return fit;
}

void write_count_matrix(const fs::path& path, const CountMatrix& m, const std::vector<std::string>& ids) {
  csv::Table table;
  table.header.push_back("id");
  table.header.insert(table.header.end(), ids.begin(), ids.end());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<std::string> row{ids[static_cast<std::size_t>(i)]};
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(std::to_string(m(i, j)));
    table.rows.push_back(std::move(row));
  }
  csv::write(path, table);
}

CountMatrix read_count_matrix(const fs::path& path, std::vector<std::string>* ids) {
  const csv::Table table = square_table(path, ids);
  const auto p = static_cast<Eigen::Index>(table.rows.size());
  CountMatrix m(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      m(i, j) = csv::parse_integer(table.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j + 1)],
                                   static_cast<std::size_t>(i), table.header[static_cast<std::size_t>(j + 1)]);
    }
  }
  return m;
}

void write_real_matrix(const fs::path& path, const Eigen::MatrixXd& m, const std::vector<std::string>& ids) {
  csv::Table table;
  table.header.push_back("id");
  table.header.insert(table.header.end(), ids.begin(), ids.end());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<std::string> row{ids[static_cast<std::size_t>(i)]};
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(csv::format_double(m(i, j)));
    table.rows.push_back(std::move(row));
  }
  csv::write(path, table);
}

Eigen::MatrixXd read_real_matrix(const fs::path& path, std::vector<std::string>* ids) {
  const csv::Table table = square_table(path, ids);
  const auto p = static_cast<Eigen::Index>(table.rows.size());
  Eigen::MatrixXd m(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      m(i, j) = csv::parse_double(table.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j + 1)],
                                  static_cast<std::size_t>(i), table.header[static_cast<std::size_t>(j + 1)]);
    }
  }
  return m;
}

void write_dendrogram(const fs::path& path, const Dendrogram& dendrogram,
                      const std::vector<std::string>& ids) {
  json doc;
  doc["leaves"] = ids;
  json merges = json::array();
  for (const auto& m : dendrogram.merges) {
    merges.push_back({{"left", m.left}, {"right", m.right}, {"height", m.height}, {"count", m.count}});
  }
  doc["merges"] = std::move(merges);
  doc["linkage"] = "average";
  doc["newick"] = to_newick(dendrogram, ids);
  write_json(path, doc);
}

Dendrogram read_dendrogram(const fs::path& path, std::vector<std::string>* ids) {
  const json doc = read_json(path);
  const auto leaves = json_get<std::vector<std::string>>(doc, "leaves", path);
  Dendrogram out;
  out.leaves = leaves.size();
  try {
    for (const auto& m : doc.at("merges")) {
      out.merges.push_back({m.at("left").get<std::size_t>(), m.at("right").get<std::size_t>(),
                            m.at("height").get<double>(), m.at("count").get<std::size_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kParse, kModule, path.string() + ": " + e.what());
  }
  if (out.leaves > 0 && out.merges.size() + 1 != out.leaves) {
    throw Error(Errc::kParse, kModule, path.string() + ": expected p-1 merges");
  }
  if (ids) *ids = leaves;
  return out;
}

void write_clusters(const fs::path& path, const std::vector<std::size_t>& labels,
                    const std::vector<std::string>& ids) {
  csv::Table table;
  table.header = {"id", "cluster"};
  for (std::size_t i = 0; i < labels.size(); ++i) table.rows.push_back({ids[i], std::to_string(labels[i])});
  csv::write(path, table);
}

std::vector<std::size_t> read_clusters(const fs::path& path, std::vector<std::string>* ids) {
  const csv::Table table = csv::read(path);
  const auto ci = require_column(table, "id", path);
  const auto cc = require_column(table, "cluster", path);
  std::vector<std::size_t> labels;
  if (ids) ids->clear();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto v = csv::parse_integer(table.rows[r][cc], r, "cluster");
    if (v < 0) throw Error(Errc::kParse, kModule, "negative cluster label");
    labels.push_back(static_cast<std::size_t>(v));
    if (ids) ids->push_back(table.rows[r][ci]);
  }
  return labels;
}

}  // namespace bagvote::io
