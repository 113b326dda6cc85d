#include "hpdet/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

#include "hpdet/bandwidth.hpp"
#include "hpdet/baselines.hpp"
#include "hpdet/calibration.hpp"
#include "hpdet/det.hpp"
#include "hpdet/error.hpp"
#include "hpdet/hpd.hpp"
#include "hpdet/loss.hpp"
#include "hpdet/samples.hpp"
#include "hpdet/targets.hpp"
#include "hpdet/truncation.hpp"

namespace hpdet::cli {

namespace {

using nlohmann::json;

std::uint64_t fnv1a_bytes(const void* data, std::size_t size) {
  const unsigned char* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 14695981039346656037ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open '", path, "'");
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return "fnv64:" + hex64(fnv1a_bytes(bytes.data(), bytes.size()));
}

/// Provenance record carried by every output. The hash covers the command,
/// its configuration, input hashes, the seed and the output list; timings
/// are excluded so reruns remain byte-identical apart from them.
struct Manifest {
  std::string command;
  json config = json::object();
  json inputs = json::object();
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();

  void add_input(const std::string& path) { inputs[path] = hash_file(path); }

  json core() const {
    return {{"command", command},
            {"config", config},
            {"inputs", inputs},
            {"seed", seed},
            {"outputs", outputs}};
  }

  std::string hash() const {
    std::string dump = core().dump();
    return "fnv64:" + hex64(fnv1a_bytes(dump.data(), dump.size()));
  }

  json full() const {
    json j = core();
    double sec = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - start)
                     .count();
    j["timings"] = {{"total_sec", sec}};
    return j;
  }
};

void embed_manifest(json& j, const Manifest& manifest) {
  j["manifest"] = manifest.full();
  j["manifest_hash"] = manifest.hash();
}

/// Staged output writer: contents accumulate in memory and hit the
/// filesystem only after the whole command succeeded.
class OutputStage {
 public:
  void add(const std::string& path, std::string content) {
    staged_.emplace_back(path, std::move(content));
  }

  void commit() {
    namespace fs = std::filesystem;
    for (const auto& [path, content] : staged_) {
      fs::path tmp = fs::path(path).concat(".tmp");
      {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        require(out.good(), "cannot open '", tmp.string(), "' for writing");
        out << content;
        require(out.good(), "write to '", tmp.string(), "' failed");
      }
      fs::rename(tmp, path);
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> staged_;
};

std::string csv_string(const SampleMatrix& samples) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    for (std::size_t j = 0; j < samples.dims(); ++j) {
      if (j) out << ',';
      out << samples(i, j);
    }
    if (samples.has_q()) out << ',' << samples.q_at(i);
    out << '\n';
  }
  return out.str();
}

std::string membership_csv_string(const SetMembershipFn& member,
                                  const SampleMatrix& points,
                                  double* fraction) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t j = 0; j < points.dims(); ++j) out << 'x' << j << ',';
  out << "in_set\n";
  std::int64_t inside = 0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    bool in = member(points.row(i));
    inside += in;
    for (std::size_t j = 0; j < points.dims(); ++j) out << points(i, j) << ',';
    out << (in ? 1 : 0) << '\n';
  }
  if (fraction) {
    *fraction =
        static_cast<double>(inside) / static_cast<double>(points.rows());
  }
  return out.str();
}

std::pair<std::size_t, std::size_t> parse_col_range(const std::string& text) {
  auto pos = text.find("..");
  try {
    if (pos == std::string::npos) {
      std::size_t v = std::stoul(text);
      return {v, v};
    }
    std::size_t a = std::stoul(text.substr(0, pos));
    std::size_t b = std::stoul(text.substr(pos + 2));
    require(a <= b, "column range '", text, "' is reversed");
    return {a, b};
  } catch (const std::logic_error&) {
    fail("cannot parse column range '", text, "' (expected e.g. 0..2)");
  }
}

SampleMatrix select_columns(const SampleMatrix& src, std::size_t first,
                            std::size_t last) {
  require(last < src.dims(), "column range ", first, "..", last,
          " exceeds the ", src.dims(), " columns available");
  SampleMatrix out(src.rows(), last - first + 1);
  for (std::size_t i = 0; i < src.rows(); ++i) {
    for (std::size_t j = first; j <= last; ++j) out(i, j - first) = src(i, j);
  }
  return out;
}

TruncationMode parse_mode(const std::string& mode) {
  if (mode == "bounding-box") return TruncationMode::bounding_box;
  if (mode == "quantile") return TruncationMode::per_dim_quantile;
  fail("unknown truncation mode '", mode,
       "' (expected bounding-box or quantile)");
}

struct CommonFlags {
  double alpha = 0.9;
  std::string tau_grid;
  double delta = 0.05;
  double t_alpha = 1.0;
  int m_g = 64;
  std::int64_t budget = 4096;
  int starts = 16;
  std::uint64_t seed = 1;
  std::string mode = "bounding-box";
  double p_target = 0.99;
  bool use_truncation_p = false;
};

std::vector<double> parse_tau_grid(const std::string& text) {
  if (text.empty()) return BandwidthSearchConfig::default_tau_grid();
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      grid.push_back(std::stod(item));
    } catch (const std::logic_error&) {
      fail("cannot parse tau grid entry '", item, "'");
    }
  }
  return grid;
}

// ---------------------------------------------------------------------------
// gen

int cmd_gen(const std::string& target, std::size_t n, std::size_t dim,
            std::uint64_t seed, const std::string& out_path) {
  Manifest manifest;
  manifest.command = "gen";
  manifest.seed = seed;
  manifest.config = {{"target", target}, {"n", n}, {"seed", seed}};

  SampleMatrix samples;
  if (target == "gauss") {
    manifest.config["dim"] = dim;
    samples = sample_gauss(n, dim, seed, /*with_q=*/true);
  } else if (target == "banana") {
    BananaParams params;
    manifest.config["params"] = {{"A", params.a},
                                 {"B", params.b},
                                 {"C1", params.c1},
                                 {"C2", params.c2},
                                 {"burn_in", params.burn_in},
                                 {"thin", params.thin}};
    samples = sample_banana(n, seed, params, /*with_q=*/false);
  } else if (target == "donut") {
    samples = sample_donut(n, seed, /*with_q=*/true);
  } else if (target == "skewnorm-like") {
    samples = sample_skewnorm_like(n, seed, /*with_q=*/false);
  } else {
    fail("unknown target '", target,
         "' (expected gauss|banana|donut|skewnorm-like)");
  }
  manifest.config["q_column"] = samples.has_q();
  manifest.outputs = {out_path, out_path + ".manifest.json"};

  OutputStage stage;
  stage.add(out_path, csv_string(samples));
  json mj;
  embed_manifest(mj, manifest);
  stage.add(out_path + ".manifest.json", mj.dump(2) + "\n");
  stage.commit();
  return 0;
}

// ---------------------------------------------------------------------------
// fit

int cmd_fit(const std::string& train_path, bool q_col, double tau,
            const CommonFlags& flags, const std::string& out_path) {
  Manifest manifest;
  manifest.command = "fit";
  manifest.seed = flags.seed;
  manifest.add_input(train_path);
  manifest.config = {{"tau", tau},         {"q_col", q_col},
                     {"m_g", flags.m_g},   {"budget", flags.budget},
                     {"starts", flags.starts}, {"seed", flags.seed},
                     {"mode", flags.mode}, {"p_target", flags.p_target}};
  manifest.outputs = {out_path};

  SampleMatrix train = load_samples(train_path, {.q_in_last_column = q_col});
  TruncationMode mode = parse_mode(flags.mode);
  TruncationReport trunc = estimate_truncation(
      train, mode,
      mode == TruncationMode::per_dim_quantile
          ? std::optional<double>(flags.p_target)
          : std::nullopt);

  DetConfig det;
  det.disc.m_g = flags.m_g;
  det.disc.budget = flags.budget;
  det.disc.starts = flags.starts;
  det.disc.seed = flags.seed;
  PartitionTree tree = build_det(train, trunc.rect, tau, det);

  json j = to_json(tree);
  j["truncation"] = to_json(trunc);
  embed_manifest(j, manifest);

  OutputStage stage;
  stage.add(out_path, j.dump(2) + "\n");
  stage.commit();
  return 0;
}

// ---------------------------------------------------------------------------
// hpd

int cmd_hpd(const std::string& train_path, const std::string& test_path,
            const std::string& data_path, double train_frac, bool q_col,
            const CommonFlags& flags, bool strict_pass,
            const std::string& out_path, const std::string& trace_path,
            const std::string& trace_csv_path) {
  Manifest manifest;
  manifest.command = "hpd";
  manifest.seed = flags.seed;

  SampleMatrix train, test;
  if (!data_path.empty()) {
    require(train_path.empty() && test_path.empty(),
            "--data excludes --train/--test");
    manifest.add_input(data_path);
    SampleMatrix all = load_samples(data_path, {.q_in_last_column = q_col});
    auto n_train = static_cast<std::size_t>(
        std::llround(train_frac * static_cast<double>(all.rows())));
    require(n_train >= 1 && n_train < all.rows(),
            "--train-frac ", train_frac, " leaves no usable split for n = ",
            all.rows());
    std::tie(train, test) = split_train_test(all, n_train, flags.seed);
  } else {
    require(!train_path.empty() && !test_path.empty(),
            "provide either --data or both --train and --test");
    manifest.add_input(train_path);
    manifest.add_input(test_path);
    train = load_samples(train_path, {.q_in_last_column = q_col});
    test = load_samples(test_path, {.q_in_last_column = q_col});
  }

  const bool tractable = train.has_q() && test.has_q();

  BandwidthSearchConfig cfg;
  cfg.tau_grid = parse_tau_grid(flags.tau_grid);
  cfg.delta = flags.delta;
  cfg.t_alpha = flags.t_alpha;
  cfg.det.disc.m_g = flags.m_g;
  cfg.det.disc.budget = flags.budget;
  cfg.det.disc.starts = flags.starts;
  cfg.det.disc.seed = flags.seed;

  TruncationMode mode = parse_mode(flags.mode);
  TruncationReport trunc = estimate_truncation(
      train, mode,
      mode == TruncationMode::per_dim_quantile
          ? std::optional<double>(flags.p_target)
          : std::nullopt);
  if (flags.use_truncation_p) cfg.p = trunc.p_estimate;

  manifest.config = {{"alpha", flags.alpha},
                     {"tau_grid", cfg.tau_grid},
                     {"delta", flags.delta},
                     {"t_alpha", flags.t_alpha},
                     {"m_g", flags.m_g},
                     {"budget", flags.budget},
                     {"starts", flags.starts},
                     {"seed", flags.seed},
                     {"q_col", q_col},
                     {"mode", flags.mode},
                     {"use_truncation_p", flags.use_truncation_p},
                     {"train_frac", data_path.empty() ? json() : json(train_frac)},
                     {"algorithm", tractable ? 2 : 1}};
  manifest.outputs = {out_path};
  if (!trace_path.empty()) manifest.outputs.push_back(trace_path);
  if (!trace_csv_path.empty()) manifest.outputs.push_back(trace_csv_path);

  BandwidthTrace trace =
      tractable
          ? select_bandwidth_tractable(train, test, trunc.rect, flags.alpha,
                                       cfg)
          : select_bandwidth_intractable(train, test, trunc.rect, flags.alpha,
                                         cfg);

  if (!trace.any_passed) {
    std::cerr << "warning: the coverage test rejected at every tau; "
                 "returning the closest candidate (tau = "
              << trace.chosen_tau
              << "). A larger training set may be needed.\n";
  }

  json set_json = to_json(trace.chosen_set);
  set_json["truncation"] = to_json(trunc);
  set_json["chosen_tau"] = trace.chosen_tau;
  set_json["any_passed"] = trace.any_passed;
  set_json["algorithm"] = tractable ? 2 : 1;
  embed_manifest(set_json, manifest);

  OutputStage stage;
  stage.add(out_path, set_json.dump(2) + "\n");
  if (!trace_path.empty()) {
    json tj = to_json(trace);
    embed_manifest(tj, manifest);
    stage.add(trace_path, tj.dump(2) + "\n");
  }
  if (!trace_csv_path.empty()) {
    std::ostringstream csv;
    csv.precision(17);
    csv << "tau,leaf_count,alpha_hat,test_passed,fp,fn,total_loss\n";
    for (const TauRecord& rec : trace.records) {
      csv << rec.tau << ',' << rec.leaf_count << ',' << rec.alpha_hat << ','
          << (rec.test_passed ? 1 : 0) << ',';
      if (!std::isnan(rec.fp)) csv << rec.fp;
      csv << ',';
      if (!std::isnan(rec.fn)) csv << rec.fn;
      csv << ',';
      if (!std::isnan(rec.total_loss)) csv << rec.total_loss;
      csv << '\n';
    }
    stage.add(trace_csv_path, csv.str());
  }
  stage.commit();
  return trace.any_passed || !strict_pass ? 0 : 4;
}

// ---------------------------------------------------------------------------
// loss

int cmd_loss(const std::string& set_path, const std::string& test_path,
             double alpha, std::optional<double> gamma_value,
             const std::string& gamma_from, const std::string& tempered_path,
             double beta, const std::string& out_path) {
  Manifest manifest;
  manifest.command = "loss";
  manifest.add_input(set_path);
  manifest.add_input(test_path);
  manifest.config = {{"alpha", alpha}};
  manifest.outputs = {out_path};

  std::ifstream in(set_path);
  require(in.good(), "cannot open '", set_path, "'");
  json set_json = json::parse(in);
  HpdSet set = hpdset_from_json(set_json);

  SampleMatrix test = load_samples(test_path, {.q_in_last_column = true});

  double gamma;
  if (gamma_value.has_value()) {
    require(gamma_from.empty(), "--gamma and --gamma-from are exclusive");
    gamma = *gamma_value;
    manifest.config["gamma"] = gamma;
  } else {
    require(!gamma_from.empty(), "provide --gamma or --gamma-from");
    manifest.add_input(gamma_from);
    SampleMatrix train = load_samples(gamma_from, {.q_in_last_column = true});
    gamma = gamma_hat(train.q_values(), alpha);
    manifest.config["gamma_from"] = gamma_from;
  }

  LossReport report = loss_estimate(set, test, gamma, alpha);
  json j = to_json(report);
  j["alpha"] = alpha;

  if (!tempered_path.empty()) {
    manifest.add_input(tempered_path);
    manifest.config["beta"] = beta;
    SampleMatrix tempered =
        load_samples(tempered_path, {.q_in_last_column = true});
    j["tempered"] = to_json(tempered_diagnostic(gamma, tempered, beta));
  }

  embed_manifest(j, manifest);
  OutputStage stage;
  stage.add(out_path, j.dump(2) + "\n");
  stage.commit();
  return 0;
}

// ---------------------------------------------------------------------------
// baseline

int cmd_baseline(const std::string& method, const std::string& train_path,
                 const std::string& test_path, double alpha, double tol,
                 const std::string& out_path) {
  Manifest manifest;
  manifest.command = "baseline";
  manifest.add_input(train_path);
  manifest.add_input(test_path);
  manifest.config = {{"method", method}, {"alpha", alpha}, {"tol", tol}};
  manifest.outputs = {out_path};

  SampleMatrix train = load_samples(train_path, {});
  SampleMatrix test = load_samples(test_path, {});

  ProductSet set;
  if (method == "bghm") {
    set = bghm_set(train, test, alpha, tol);
  } else if (method == "sr") {
    set = sr_set(train, test, alpha, tol);
  } else {
    fail("unknown baseline method '", method, "' (expected bghm or sr)");
  }
  if (!set.reached_target) {
    std::cerr << "warning: joint coverage " << set.realized_coverage
              << " cannot reach " << alpha
              << " even with the widest marginals; returning those.\n";
  }

  json j = to_json(set);
  j["alpha"] = alpha;
  embed_manifest(j, manifest);
  OutputStage stage;
  stage.add(out_path, j.dump(2) + "\n");
  stage.commit();
  return 0;
}

// ---------------------------------------------------------------------------
// calibrate

int cmd_calibrate(const std::string& set_path, const std::string& product_path,
                  const std::string& sim_path, const std::string& theta_cols,
                  const std::string& y_cols, const std::string& y_obs_text,
                  int poly_degree, double ridge, int max_iter,
                  const std::string& out_path) {
  Manifest manifest;
  manifest.command = "calibrate";
  manifest.add_input(sim_path);
  manifest.config = {{"theta_cols", theta_cols}, {"y_cols", y_cols},
                     {"poly_degree", poly_degree}, {"ridge", ridge},
                     {"max_iter", max_iter}};
  manifest.outputs = {out_path};

  require(set_path.empty() != product_path.empty(),
          "provide exactly one of --set or --product-set");

  SetMembershipFn member;
  HpdSet hpd_set;
  ProductSet product_set;
  if (!set_path.empty()) {
    manifest.add_input(set_path);
    std::ifstream in(set_path);
    require(in.good(), "cannot open '", set_path, "'");
    hpd_set = hpdset_from_json(json::parse(in));
    member = [&hpd_set](std::span<const double> x) {
      return hpd_set.contains(x);
    };
  } else {
    manifest.add_input(product_path);
    std::ifstream in(product_path);
    require(in.good(), "cannot open '", product_path, "'");
    product_set = product_set_from_json(json::parse(in));
    member = [&product_set](std::span<const double> x) {
      return product_set.contains(x);
    };
  }

  SampleMatrix sim = load_samples(sim_path, {});
  auto [t_first, t_last] = parse_col_range(theta_cols);
  auto [y_first, y_last] = parse_col_range(y_cols);
  SampleMatrix thetas = select_columns(sim, t_first, t_last);
  SampleMatrix ys = select_columns(sim, y_first, y_last);

  std::vector<double> y_obs;
  {
    std::stringstream ss(y_obs_text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        y_obs.push_back(std::stod(item));
      } catch (const std::logic_error&) {
        fail("cannot parse --y-obs entry '", item, "'");
      }
    }
  }
  require(y_obs.size() == ys.dims(), "--y-obs has ", y_obs.size(),
          " entries but the y block has ", ys.dims(), " columns");
  manifest.config["y_obs"] = y_obs;

  CalibrationDataset dataset = build_calibration_dataset(member, thetas, ys);
  if (dataset.ones() == 0 || dataset.zeros() == 0) {
    std::cerr << "warning: calibration labels are all "
              << (dataset.ones() == 0 ? "zero" : "one")
              << "; the fit degenerates to a clamped constant.\n";
  }
  CalibrationModel model = fit_logistic(dataset, max_iter, ridge, poly_degree);
  CalibrationEstimate estimate = calibrate_at(model, y_obs);

  json j = {{"c_hat", estimate.c_hat},
            {"se", estimate.se},
            {"label_ones", dataset.ones()},
            {"label_zeros", dataset.zeros()},
            {"model", to_json(model)}};
  embed_manifest(j, manifest);
  OutputStage stage;
  stage.add(out_path, j.dump(2) + "\n");
  stage.commit();
  return 0;
}

// ---------------------------------------------------------------------------
// query

int cmd_query(const std::string& set_path, const std::string& product_path,
              const std::string& points_path, bool q_col,
              const std::string& out_path) {
  Manifest manifest;
  manifest.command = "query";
  manifest.add_input(points_path);
  manifest.outputs = {out_path};
  manifest.config = {{"q_col", q_col}};

  require(set_path.empty() != product_path.empty(),
          "provide exactly one of --set or --product-set");

  SampleMatrix points = load_samples(points_path, {.q_in_last_column = q_col});

  double fraction = 0.0;
  std::string csv;
  if (!set_path.empty()) {
    manifest.add_input(set_path);
    std::ifstream in(set_path);
    require(in.good(), "cannot open '", set_path, "'");
    HpdSet set = hpdset_from_json(json::parse(in));
    csv = membership_csv_string(
        [&set](std::span<const double> x) { return set.contains(x); },
        points, &fraction);
  } else {
    manifest.add_input(product_path);
    std::ifstream in(product_path);
    require(in.good(), "cannot open '", product_path, "'");
    ProductSet set = product_set_from_json(json::parse(in));
    csv = membership_csv_string(
        [&set](std::span<const double> x) { return set.contains(x); },
        points, &fraction);
  }

  OutputStage stage;
  stage.add(out_path, csv);
  stage.commit();
  std::cout << "fraction_inside=" << fraction << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Joint highest-density credible sets from Monte Carlo "
               "samples via discrepancy-partition density trees"};
  app.require_subcommand(1);

  CommonFlags flags;

  // gen
  auto* gen = app.add_subcommand("gen", "Sample a synthetic target to CSV");
  std::string gen_target = "gauss", gen_out = "samples.csv";
  std::size_t gen_n = 1000, gen_dim = 2;
  gen->add_option("--target", gen_target,
                  "gauss|banana|donut|skewnorm-like");
  gen->add_option("-n,--n", gen_n, "number of samples");
  gen->add_option("--dim", gen_dim, "dimension (gauss only)");
  gen->add_option("--seed", flags.seed, "RNG seed");
  gen->add_option("-o,--out", gen_out, "output CSV path")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "Build one density tree at a fixed tau");
  std::string fit_train, fit_out = "tree.json";
  double fit_tau = 0.1;
  bool fit_qcol = false;
  fit->add_option("--train", fit_train, "training CSV")->required();
  fit->add_flag("--q-col", fit_qcol, "final CSV column holds q values");
  fit->add_option("--tau", fit_tau, "bandwidth")->required();
  fit->add_option("--m-g", flags.m_g, "grid bins per dimension");
  fit->add_option("--budget", flags.budget, "discrepancy evaluation budget");
  fit->add_option("--starts", flags.starts, "coordinate-ascent starts");
  fit->add_option("--seed", flags.seed, "RNG seed");
  fit->add_option("--mode", flags.mode, "bounding-box|quantile");
  fit->add_option("--p-target", flags.p_target, "quantile truncation mass");
  fit->add_option("-o,--out", fit_out, "output tree JSON")->required();

  // hpd
  auto* hpd = app.add_subcommand(
      "hpd", "Bandwidth search and credible-set extraction");
  std::string hpd_train, hpd_test, hpd_data, hpd_out = "set.json";
  std::string hpd_trace, hpd_trace_csv;
  double hpd_train_frac = 0.9;
  bool hpd_qcol = false, hpd_strict = false;
  hpd->add_option("--train", hpd_train, "training CSV");
  hpd->add_option("--test", hpd_test, "test CSV");
  hpd->add_option("--data", hpd_data, "single CSV to split");
  hpd->add_option("--train-frac", hpd_train_frac,
                  "training fraction for --data");
  hpd->add_flag("--q-col", hpd_qcol, "final CSV column holds q values");
  hpd->add_option("--alpha", flags.alpha, "target coverage");
  hpd->add_option("--tau-grid", flags.tau_grid,
                  "comma-separated decreasing taus");
  hpd->add_option("--delta", flags.delta, "coverage test size");
  hpd->add_option("--t-alpha", flags.t_alpha,
                  "integrated autocorrelation time of the test set");
  hpd->add_option("--m-g", flags.m_g, "grid bins per dimension");
  hpd->add_option("--budget", flags.budget, "discrepancy evaluation budget");
  hpd->add_option("--starts", flags.starts, "coordinate-ascent starts");
  hpd->add_option("--seed", flags.seed, "RNG seed");
  hpd->add_option("--mode", flags.mode, "bounding-box|quantile");
  hpd->add_option("--p-target", flags.p_target, "quantile truncation mass");
  hpd->add_flag("--use-truncation-p", flags.use_truncation_p,
                "target alpha/p instead of alpha");
  hpd->add_flag("--strict-pass", hpd_strict,
                "exit 4 when no tau passes the coverage test");
  hpd->add_option("-o,--out", hpd_out, "output set JSON")->required();
  hpd->add_option("--trace", hpd_trace, "bandwidth trace JSON");
  hpd->add_option("--trace-csv", hpd_trace_csv, "bandwidth trace CSV");

  // loss
  auto* loss = app.add_subcommand("loss",
                                  "Symmetric-difference loss of a stored set");
  std::string loss_set, loss_test, loss_gamma_from, loss_tempered;
  std::string loss_out = "loss.json";
  double loss_beta = 1.0;
  std::optional<double> loss_gamma;
  double loss_gamma_raw = 0.0;
  bool loss_gamma_given = false;
  loss->add_option("--set", loss_set, "HPD set JSON")->required();
  loss->add_option("--test", loss_test,
                   "test CSV; the final column must hold q values")
      ->required();
  loss->add_option("--alpha", flags.alpha, "target coverage");
  auto* gopt = loss->add_option("--gamma", loss_gamma_raw,
                                "level-set threshold");
  loss->add_option("--gamma-from", loss_gamma_from,
                   "training CSV (final column q) to estimate the threshold");
  loss->add_option("--tempered", loss_tempered,
                   "tempered sample CSV (final column q)");
  loss->add_option("--beta", loss_beta, "tempering exponent");
  loss->add_option("-o,--out", loss_out, "output JSON")->required();
  gopt->each([&](const std::string&) { loss_gamma_given = true; });

  // baseline
  auto* baseline =
      app.add_subcommand("baseline", "Product-of-marginals credible set");
  std::string base_method = "bghm", base_train, base_test;
  std::string base_out = "product_set.json";
  double base_tol = 0.01;
  baseline->add_option("--method", base_method, "bghm|sr");
  baseline->add_option("--train", base_train, "training CSV")->required();
  baseline->add_option("--test", base_test, "test CSV")->required();
  baseline->add_option("--alpha", flags.alpha, "target coverage");
  baseline->add_option("--tol", base_tol, "coverage matching tolerance");
  baseline->add_option("-o,--out", base_out, "output JSON")->required();

  // calibrate
  auto* calibrate = app.add_subcommand(
      "calibrate", "True-posterior coverage of a stored set");
  std::string cal_set, cal_product, cal_sim, cal_theta_cols, cal_y_cols;
  std::string cal_y_obs, cal_out = "calibration.json";
  int cal_degree = 1, cal_max_iter = 100;
  double cal_ridge = 0.0;
  calibrate->add_option("--set", cal_set, "HPD set JSON");
  calibrate->add_option("--product-set", cal_product, "product set JSON");
  calibrate->add_option("--sim", cal_sim, "simulated (theta, y) CSV")
      ->required();
  calibrate->add_option("--theta-cols", cal_theta_cols,
                        "theta column range, e.g. 0..1")
      ->required();
  calibrate->add_option("--y-cols", cal_y_cols, "y column range, e.g. 2..3")
      ->required();
  calibrate->add_option("--y-obs", cal_y_obs,
                        "observed summary, comma separated")
      ->required();
  calibrate->add_option("--poly-degree", cal_degree,
                        "componentwise polynomial feature degree");
  calibrate->add_option("--ridge", cal_ridge, "ridge penalty");
  calibrate->add_option("--max-iter", cal_max_iter, "IRLS iteration cap");
  calibrate->add_option("-o,--out", cal_out, "output JSON")->required();

  // query
  auto* query =
      app.add_subcommand("query", "Point-in-set membership for a stored set");
  std::string query_set, query_product, query_points, query_out = "member.csv";
  bool query_qcol = false;
  query->add_option("--set", query_set, "HPD set JSON");
  query->add_option("--product-set", query_product, "product set JSON");
  query->add_option("--points", query_points, "points CSV")->required();
  query->add_flag("--q-col", query_qcol,
                  "final CSV column holds q values (ignored)");
  query->add_option("-o,--out", query_out, "output membership CSV")
      ->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed())
      return cmd_gen(gen_target, gen_n, gen_dim, flags.seed, gen_out);
    if (fit->parsed())
      return cmd_fit(fit_train, fit_qcol, fit_tau, flags, fit_out);
    if (hpd->parsed())
      return cmd_hpd(hpd_train, hpd_test, hpd_data, hpd_train_frac, hpd_qcol,
                     flags, hpd_strict, hpd_out, hpd_trace, hpd_trace_csv);
    if (loss->parsed()) {
      if (loss_gamma_given) loss_gamma = loss_gamma_raw;
      return cmd_loss(loss_set, loss_test, flags.alpha, loss_gamma,
                      loss_gamma_from, loss_tempered, loss_beta, loss_out);
    }
    if (baseline->parsed())
      return cmd_baseline(base_method, base_train, base_test, flags.alpha,
                          base_tol, base_out);
    if (calibrate->parsed())
      return cmd_calibrate(cal_set, cal_product, cal_sim, cal_theta_cols,
                           cal_y_cols, cal_y_obs, cal_degree, cal_ridge,
                           cal_max_iter, cal_out);
    if (query->parsed())
      return cmd_query(query_set, query_product, query_points, query_qcol,
                       query_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace hpdet::cli
