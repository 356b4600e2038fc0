#include "cli/stages.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

#include "bagvote/csv.hpp"
#include "bagvote/error.hpp"
#include "bagvote/io.hpp"
#include "bagvote/parallel.hpp"
#include "bagvote/random.hpp"

namespace bagvote::cli {

namespace {

constexpr const char* kModule = "cli";
using nlohmann::json;

// Keeps the mixture seeds of different instances on separate streams.
constexpr std::uint64_t kMixtureStream = 0x676d6d;

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

std::vector<double> sigma_grid_for(const Dataset& d, const RunConfig& config) {
  if (config.sigma) return {*config.sigma};
  return config.sigma_grid.empty() ? default_sigma_grid(d) : config.sigma_grid;
}

std::vector<double> lambda_grid_for(const RunConfig& config) {
  if (config.lambda) return {*config.lambda};
  return config.lambda_grid.empty() ? default_lambda_grid() : config.lambda_grid;
}

CvOptions cv_options(const Dataset& d, const RunConfig& config) {
  CvOptions cv;
  cv.sigma_grid = sigma_grid_for(d, config);
  cv.lambda_grid = lambda_grid_for(config);
  cv.folds = config.folds;
  cv.seed = config.seed;
  cv.workers = config.workers;
  return cv;
}

std::string join_ids(const std::vector<std::size_t>& indices, const std::vector<std::string>& ids) {
  std::string out;
  for (auto i : indices) {
    if (!out.empty()) out += ';';
    out += ids[i];
  }
  return out;
}

// Runs `body`, renaming everything it registered if it throws.
template <class Fn>
void guarded(const RunConfig& config, Fn&& body) {
  config.validate();
  std::error_code ec;
  fs::create_directories(config.out, ec);
  if (ec) throw Error(Errc::kIo, kModule, "cannot create " + config.out + ": " + ec.message());
  Artifacts artifacts(config.out);
  try {
    body(artifacts);
    save_config(artifacts.add("config_echo.json"), config);
  } catch (...) {
    artifacts.mark_partial();
    throw;
  }
}

Hyperparams hyperparams_for(const fs::path& run_dir, const RunConfig& config) {
  if (!fs::exists(run_dir / "hyperparams.json") && config.sigma && config.lambda) {
    return {*config.sigma, *config.lambda};
  }
  return read_hyperparams(run_dir);
}

BagPlan plan_for(const PreparedData& data, const RunConfig& config) {
  return make_bag_plan(data.model.p(), config.bag_fraction, config.bags, config.seed);
}

}  // namespace

Artifacts::Artifacts(fs::path dir) : dir_(std::move(dir)) {}

fs::path Artifacts::add(const fs::path& relative) {
  fs::path path = dir_ / relative;
  std::error_code ec;
  fs::path stale = path;
  stale += ".partial";
  fs::remove_all(stale, ec);
  written_.push_back(path);
  return path;
}

void Artifacts::mark_partial() noexcept {
  for (const auto& path : written_) {
    std::error_code ec;
    if (!fs::exists(path, ec)) continue;
    fs::path target = path;
    target += ".partial";
    fs::remove_all(target, ec);
    fs::rename(path, target, ec);
  }
}

PreparedData prepare(const RunConfig& config) {
  if (config.input.empty()) {
    Prototype proto = generate_prototype(config.seed, config.prototype_n);
    Dataset model = config.standardize ? standardize(proto.data).first : proto.data;
    return {std::move(proto.data), std::move(model), std::move(proto.labels)};
  }
  Dataset raw = load_csv(config.input, resolve_schema(config.schema));
  Dataset model = config.standardize ? standardize(raw).first : raw;
  return {std::move(raw), std::move(model), std::nullopt};
}

CvReport tune(const PreparedData& data, const RunConfig& config) {
  return cross_validate(data.model, cv_options(data.model, config));
}

BagOutcome bag(const PreparedData& data, const RunConfig& config, Hyperparams hp) {
  BagPlan plan = plan_for(data, config);
  BaggingOptions options;
  options.params.sigma = hp.sigma;
  options.lambda = hp.lambda;
  options.workers = config.workers;
  for (const auto& id : config.focus_ids) {
    const auto j = data.model.index_of(id);
    if (j == data.model.p()) {
      throw Error(Errc::kConfig, kModule, "focus id '" + id + "' is not in the dataset");
    }
    options.focus.push_back(j);
  }
  options.store_contributions = !options.focus.empty();
  if (config.per_bag_cv) options.per_bag_cv = cv_options(data.model, config);
  BagRunStore store = run_bagging(data.model, plan, options);
  return {std::move(plan), std::move(store)};
}

std::vector<std::optional<GmmFit>> fit_mixtures(const BagRunStore& store, const RunConfig& config) {
  std::vector<std::optional<GmmFit>> fits(store.p());
  parallel_for(store.p(), config.workers, [&](std::size_t j) {
    if (store.records(j).size() < 2) return;
    const auto samples = prediction_samples(store, j);
    const std::uint64_t seed =
        Rng({config.seed, static_cast<std::uint64_t>(j), kMixtureStream}).next();
    fits[j] = select_k_bic(samples, config.k_max, config.restarts, seed);
  });
  return fits;
}

VoteOutcome vote_stage(const PreparedData& data, const BagRunStore& store, const BagPlan& plan,
                       const RunConfig& config, Hyperparams hp) {
  VoteOutcome out;
  out.delta_thres = config.delta_thres ? *config.delta_thres
                                       : error_quantile(store, config.delta_percentile / 100.0);
  if (!(out.delta_thres > 0.0)) {
    throw Error(Errc::kConfig, kModule,
                "the error percentile gives delta_thres = 0; raise delta_percentile or set delta_thres");
  }
  const VoteConfig vc = config.vote_config(out.delta_thres);
  vc.validate();
  out.qualifying = qualifying_records(store, data.model, out.delta_thres);
  out.neighbors = neighbor_sets(data.model, KernelParams{hp.sigma}, vc);
  out.dissim = vote(store, plan, out.qualifying, out.neighbors, config.workers);
  out.dissim.config = vc;
  out.normalized = normalize(out.dissim);
  return out;
}

ClusterOutcome cluster_stage(const Eigen::MatrixXd& distance, const RunConfig& config) {
  ClusterOutcome out;
  out.dendrogram = agglomerate(distance);
  out.labels = cut(out.dendrogram, config.clusters);
  return out;
}

void write_synth(Artifacts& out, const Prototype& proto) {
  write_prototype_csv(out.add("prototype.csv"), proto);
}

void write_tune(Artifacts& out, const CvReport& report, Hyperparams hp, const RunConfig& config) {
  io::write_cv_report(out.add("cv_report.csv"), report);
  const CvPoint& chosen = report.chosen();
  write_json(out.add("hyperparams.json"), {{"sigma", hp.sigma},
                                           {"lambda", hp.lambda},
                                           {"fold_mae_mean", chosen.mae},
                                           {"fold_r2_mean", chosen.r2},
                                           {"folds", report.folds},
                                           {"seed", report.seed},
                                           {"standardized", config.standardize}});
}

void write_bag(Artifacts& out, const PreparedData& data, const BagOutcome& bags, Hyperparams hp) {
  const auto& store = bags.store;
  io::write_predictions(out.add("predictions.csv"), store, data.model);
  if (store.has_contributions()) io::write_contributions(out.add("contributions"), store, data.model);
  if (!store.bag_params().empty()) {
    csv::Table table;
    table.header = {"bag_index", "sigma", "lambda"};
    for (std::size_t t = 0; t < store.bag_params().size(); ++t) {
      const auto [sigma, lambda] = store.bag_params()[t];
      table.rows.push_back({std::to_string(t), csv::format_double(sigma), csv::format_double(lambda)});
    }
    csv::write(out.add("bag_params.csv"), table);
  }
  json uncovered = json::array();
  for (auto j : store.uncovered()) uncovered.push_back(data.model.ids()[j]);
  write_json(out.add("bag_summary.json"), {{"p", bags.plan.p()},
                                           {"bags", bags.plan.bags()},
                                           {"bag_fraction", bags.plan.bag_fraction()},
                                           {"train_size", bags.plan.train_size()},
                                           {"seed", bags.plan.seed()},
                                           {"sigma", hp.sigma},
                                           {"lambda", hp.lambda},
                                           {"failed_bags", store.failed_bags()},
                                           {"uncovered_ids", uncovered}});
}

void write_mixtures(Artifacts& out, const PreparedData& data,
                    const std::vector<std::optional<GmmFit>>& fits) {
  const fs::path dir = out.add("gmm");
  fs::create_directories(dir);
  csv::Table summary;
  summary.header = {"id", "K", "n_samples", "bic", "dominant_weight", "dominant_mean", "dominant_sd"};
  for (std::size_t j = 0; j < fits.size(); ++j) {
    const auto& id = data.model.ids()[j];
    if (!fits[j]) {
      summary.rows.push_back({id, "0", "0", "", "", "", ""});
      continue;
    }
    const GmmFit& fit = *fits[j];
    io::write_gmm(dir / (id + ".json"), fit);
    const auto c = fit.dominant();
    summary.rows.push_back({id, std::to_string(fit.k), std::to_string(fit.n_samples),
                            csv::format_double(fit.bic), csv::format_double(fit.weights[c]),
                            csv::format_double(fit.means[c]), csv::format_double(fit.sds[c])});
  }
  csv::write(out.add("gmm_summary.csv"), summary);
}

void write_vote(Artifacts& out, const PreparedData& data, const BagRunStore& store,
                const VoteOutcome& vote) {
  const auto& ids = data.model.ids();
  io::write_count_matrix(out.add("dissimilarity.csv"), vote.dissim.votes, ids);
  io::write_count_matrix(out.add("exposures.csv"), vote.dissim.exposures, ids);
  io::write_real_matrix(out.add("dissimilarity_rate.csv"), vote.normalized.rate, ids);
  io::write_real_matrix(out.add("distance.csv"), vote.normalized.distance, ids);

  csv::Table table;
  table.header = {"id", "records", "qualifying", "neighbors"};
  json silent = json::array();
  for (std::size_t j = 0; j < ids.size(); ++j) {
    table.rows.push_back({ids[j], std::to_string(store.records(j).size()),
                          std::to_string(vote.qualifying[j].size()), join_ids(vote.neighbors[j], ids)});
    if (vote.qualifying[j].empty()) silent.push_back(ids[j]);
  }
  csv::write(out.add("qualifying.csv"), table);

  const VoteConfig& vc = vote.dissim.config;
  json summary = {{"delta_thres", vote.delta_thres},
                  {"eq5_literal", vc.literal_eq5},
                  {"instances_without_qualifying_models", silent}};
  if (vc.k_thres) summary["k_thres"] = *vc.k_thres;
  if (vc.n_neighbors) summary["n_neighbors"] = *vc.n_neighbors;
  write_json(out.add("vote_summary.json"), summary);
}

void write_clusters(Artifacts& out, const std::vector<std::string>& ids, const ClusterOutcome& c) {
  io::write_dendrogram(out.add("dendrogram.json"), c.dendrogram, ids);
  {
    std::ofstream nwk(out.add("dendrogram.nwk"), std::ios::trunc);
    if (!nwk) throw Error(Errc::kIo, kModule, "cannot write dendrogram.nwk");
    nwk << to_newick(c.dendrogram, ids) << '\n';
  }
  io::write_clusters(out.add("clusters.csv"), c.labels, ids);
}

Hyperparams read_hyperparams(const fs::path& run_dir) {
  const fs::path path = run_dir / "hyperparams.json";
  if (!fs::exists(path)) {
    throw Error(Errc::kIo, kModule, path.string() + " not found; run 'tune' first");
  }
  const json doc = read_json(path);
  try {
    return {doc.at("sigma").get<double>(), doc.at("lambda").get<double>()};
  } catch (const json::exception&) {
    throw Error(Errc::kParse, kModule, path.string() + ": missing sigma or lambda");
  }
}

BagRunStore read_bag_store(const fs::path& run_dir, const PreparedData& data, const RunConfig& config) {
  const fs::path path = run_dir / "bag_summary.json";
  if (!fs::exists(path)) throw Error(Errc::kIo, kModule, path.string() + " not found; run 'bag' first");
  const json doc = read_json(path);
  std::size_t p = 0, bags = 0;
  double fraction = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> failed;
  try {
    p = doc.at("p").get<std::size_t>();
    bags = doc.at("bags").get<std::size_t>();
    fraction = doc.at("bag_fraction").get<double>();
    seed = doc.at("seed").get<std::uint64_t>();
    failed = doc.at("failed_bags").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw Error(Errc::kParse, kModule, path.string() + ": " + e.what());
  }
  if (p != data.model.p() || bags != config.bags || fraction != config.bag_fraction ||
      seed != config.seed) {
    throw Error(Errc::kConsistency, kModule,
                "bag run in " + run_dir.string() + " was made with a different dataset or plan");
  }
  return io::read_predictions(run_dir / "predictions.csv", data.model, bags, std::move(failed));
}

std::vector<RankedPair> top_pairs(const Eigen::MatrixXd& distance, std::size_t count) {
  std::vector<RankedPair> pairs;
  const auto p = static_cast<std::size_t>(distance.rows());
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i + 1; j < p; ++j) {
      pairs.push_back({i, j, distance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const RankedPair& a, const RankedPair& b) { return a.distance > b.distance; });
  if (pairs.size() > count) pairs.resize(count);
  return pairs;
}

void report(const fs::path& run_dir, std::ostream& out) {
  const bool has_votes = fs::exists(run_dir / "distance.csv");
  const bool has_gmm = fs::exists(run_dir / "gmm_summary.csv");
  const bool has_bags = fs::exists(run_dir / "qualifying.csv") || fs::exists(run_dir / "predictions.csv");
  if (!fs::is_directory(run_dir) || !(has_votes || has_gmm || has_bags)) {
    throw Error(Errc::kIo, kModule, run_dir.string() + " holds no run outputs");
  }
  out << "run: " << run_dir.string() << '\n';

  if (fs::exists(run_dir / "qualifying.csv")) {
    const csv::Table table = csv::read(run_dir / "qualifying.csv");
    const auto cr = table.column("records");
    const auto cq = table.column("qualifying");
    if (!cr || !cq) throw Error(Errc::kSchema, kModule, "qualifying.csv lacks records/qualifying");
    std::vector<long long> records, qualifying;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      records.push_back(csv::parse_integer(table.rows[r][*cr], r, "records"));
      qualifying.push_back(csv::parse_integer(table.rows[r][*cq], r, "qualifying"));
    }
    out << "instances: " << table.rows.size() << '\n';
    if (!records.empty()) {
      const auto [rmin, rmax] = std::minmax_element(records.begin(), records.end());
      const auto [qmin, qmax] = std::minmax_element(qualifying.begin(), qualifying.end());
      const double qmean = static_cast<double>(std::accumulate(qualifying.begin(), qualifying.end(), 0LL)) /
                           static_cast<double>(qualifying.size());
      out << "prediction records per instance: min " << *rmin << ", max " << *rmax << '\n';
      out << "qualifying models per instance: min " << *qmin << ", mean " << csv::format_double(qmean)
          << ", max " << *qmax << ", none for "
          << std::count(qualifying.begin(), qualifying.end(), 0LL) << " instance(s)\n";
    }
    if (fs::exists(run_dir / "vote_summary.json")) {
      const json vs = read_json(run_dir / "vote_summary.json");
      if (vs.contains("delta_thres")) {
        out << "delta_thres: " << csv::format_double(vs.at("delta_thres").get<double>()) << '\n';
      }
    }
  } else if (fs::exists(run_dir / "predictions.csv")) {
    const csv::Table table = csv::read(run_dir / "predictions.csv");
    std::map<std::string, std::size_t> per;
    for (const auto& row : table.rows) ++per[row.at(0)];
    out << "instances with predictions: " << per.size() << '\n';
  }

  if (has_gmm) {
    const csv::Table table = csv::read(run_dir / "gmm_summary.csv");
    const auto ck = table.column("K");
    if (!ck) throw Error(Errc::kSchema, kModule, "gmm_summary.csv lacks K");
    std::map<long long, std::size_t> histogram;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      ++histogram[csv::parse_integer(table.rows[r][*ck], r, "K")];
    }
    out << "selected K histogram:\n";
    for (const auto& [k, n] : histogram) {
      out << "  K=" << k << ": " << n << (k == 0 ? " (too few records)" : "") << '\n';
    }
  }

  if (has_votes) {
    std::vector<std::string> ids;
    const Eigen::MatrixXd distance = io::read_real_matrix(run_dir / "distance.csv", &ids);
    out << "top dissimilar pairs (symmetrized vote rate):\n";
    for (const auto& pair : top_pairs(distance, 10)) {
      out << "  " << ids[pair.i] << ' ' << ids[pair.j] << ' ' << csv::format_double(pair.distance) << '\n';
    }
  }
}

void cmd_synth(const RunConfig& config) {
  guarded(config, [&](Artifacts& out) {
    write_synth(out, generate_prototype(config.seed, config.prototype_n));
  });
}

void cmd_tune(const RunConfig& config) {
  guarded(config, [&](Artifacts& out) {
    const PreparedData data = prepare(config);
    const CvReport report = tune(data, config);
    write_tune(out, report, {report.sigma, report.lambda}, config);
  });
}

void cmd_bag(const RunConfig& config) {
  guarded(config, [&](Artifacts& out) {
    const PreparedData data = prepare(config);
    const Hyperparams hp = hyperparams_for(out.dir(), config);
    write_bag(out, data, bag(data, config, hp), hp);
  });
}

void cmd_gmm(const RunConfig& config) {
  guarded(config, [&](Artifacts& out) {
    const PreparedData data = prepare(config);
    const BagRunStore store = read_bag_store(out.dir(), data, config);
    write_mixtures(out, data, fit_mixtures(store, config));
  });
}

void cmd_vote(const RunConfig& config) {
  guarded(config, [&](Artifacts& out) {
    const PreparedData data = prepare(config);
    const Hyperparams hp = hyperparams_for(out.dir(), config);
    const BagRunStore store = read_bag_store(out.dir(), data, config);
    const BagPlan plan = plan_for(data, config);
    write_vote(out, data, store, vote_stage(data, store, plan, config, hp));
  });
}

void cmd_cluster(const RunConfig& config) {
  guarded(config, [&](Artifacts& out) {
    const fs::path path = out.dir() / "distance.csv";
    if (!fs::exists(path)) throw Error(Errc::kIo, kModule, path.string() + " not found; run 'vote' first");
    std::vector<std::string> ids;
    const Eigen::MatrixXd distance = io::read_real_matrix(path, &ids);
    write_clusters(out, ids, cluster_stage(distance, config));
  });
}

void cmd_pipeline(const RunConfig& config) {
  guarded(config, [&](Artifacts& out) {
    const PreparedData data = prepare(config);
    if (data.labels) {
      write_synth(out, Prototype{data.raw, *data.labels});
    }
    const CvReport report = tune(data, config);
    const Hyperparams hp{report.sigma, report.lambda};
    write_tune(out, report, hp, config);
    const BagOutcome bags = bag(data, config, hp);
    write_bag(out, data, bags, hp);
    write_mixtures(out, data, fit_mixtures(bags.store, config));
    const VoteOutcome vote = vote_stage(data, bags.store, bags.plan, config, hp);
    write_vote(out, data, bags.store, vote);
    write_clusters(out, data.model.ids(), cluster_stage(vote.normalized.distance, config));
  });
}

}  // namespace bagvote::cli
