#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>
#include <unistd.h>

#include "idkit/asa.hpp"
#include "idkit/atn1.hpp"
#include "idkit/backend.hpp"
#include "idkit/corpus.hpp"
#include "idkit/error.hpp"
#include "idkit/gsa.hpp"
#include "idkit/metrics.hpp"
#include "idkit/parallel.hpp"
#include "idkit/random.hpp"
#include "idkit/resample.hpp"
#include "idkit/serialize.hpp"
#include "idkit/subprocess.hpp"
#include "idkit/svg.hpp"
#include "idkit/wom.hpp"

namespace idkit::cli {
namespace {

namespace fs = std::filesystem;
using json = Json;

struct Settings {
  std::string config_path;
  std::uint64_t seed = 0;
  bool json_output = false;
  std::size_t workers = 1;

  // feature metrics
  double lambda = 0.1;
  std::string ned_variant = "eq1";
  std::string log_base = "natural";
  bool ele_case_sensitive = false;
  std::vector<std::string> categories;
  std::string vocab;
  std::string repair = "coerce";

  // common outputs
  std::string csv_path;
  std::string svg_path;
  std::string out_path;

  // positionals
  std::string corpus;
  std::string gold;
  std::string pred;
  std::string records;
  std::vector<std::string> inputs;

  // resample
  std::string strategy = "stratified";
  std::size_t count = 23;
  std::size_t rarity_bins = 4;
  bool no_rarity_control = false;
  std::vector<double> rates = {1.0, 0.9, 0.8, 0.7, 0.6, 0.5};
  std::string out_dir;
  bool write_conll = false;

  // evaluate and command surfaces
  std::string command;
  double timeout_s = 600;

  // correlate
  std::vector<std::string> features;
  std::string target = "f1";

  // gsa
  std::string surface = "knn";
  std::size_t k = 3;
  std::string method = "both";
  std::size_t trajectories = 20;
  std::size_t levels = 6;
  std::size_t base_samples = 1024;
  std::size_t bootstrap = 1000;
  std::string svg_morris;
  std::string svg_sobol;

  // asa
  std::string asa_mode = "row_wise_1d";
  std::string asa_weight = "bin_index";
  std::string asa_aggregate = "mean";
  std::vector<std::string> pairs;

  // wom
  std::size_t window_size = 30;
  double threshold = 0.07;
  std::string threshold_mode = "fixed";
  double adaptive_fraction = 0.8;
  std::string wom_mode = "wom";
  std::string backend = "mock";
  std::string endpoint;
  std::string token_env = "IDKIT_BACKEND_TOKEN";
  std::string cassette;
  std::string record_cassette;
  std::string source_lang = "en";
  std::string pivot_lang = "zh";
  std::size_t max_in_flight = 4;
  std::size_t retries = 2;
  std::size_t backoff_ms = 100;
  double max_failure_rate = 0.5;
  std::string sweep_t;
  std::string sweep_w;
};

// Options that may also come from the config file. A value given on the
// command line wins over the file.
class Binder {
 public:
  template <typename T>
  CLI::Option* option(CLI::App* app, const std::string& names, T& var,
                      const std::string& pointer, const std::string& help) {
    auto* opt = app->add_option(names, var, help);
    if constexpr (!std::is_same_v<T, std::vector<std::string>> &&
                  !std::is_same_v<T, std::vector<double>>) {
      opt->capture_default_str();
    }
    remember(app, opt, var, pointer);
    return opt;
  }

  CLI::Option* flag(CLI::App* app, const std::string& names, bool& var,
                    const std::string& pointer, const std::string& help) {
    auto* opt = app->add_flag(names, var, help);
    remember(app, opt, var, pointer);
    return opt;
  }

  void apply(const json& config) const {
    for (const auto& b : bindings_) {
      if (!b.app->parsed() || b.opt->count() > 0) continue;
      const json::json_pointer ptr(b.pointer);
      if (!config.contains(ptr)) continue;
      try {
        b.assign(config.at(ptr));
      } catch (const json::exception& e) {
        throw UsageError("config key " + b.pointer + ": " + e.what());
      }
    }
  }

 private:
  template <typename T>
  void remember(CLI::App* app, CLI::Option* opt, T& var, const std::string& pointer) {
    if (pointer.empty()) return;
    bindings_.push_back({app, opt, pointer, [&var](const json& j) { var = j.get<T>(); }});
  }

  struct Binding {
    CLI::App* app;
    CLI::Option* opt;
    std::string pointer;
    std::function<void(const json&)> assign;
  };
  std::vector<Binding> bindings_;
};

template <typename E>
E choose(const std::string& flag, const std::string& value,
         std::initializer_list<std::pair<const char*, E>> choices) {
  std::string allowed;
  for (const auto& [name, e] : choices) {
    if (value == name) return e;
    allowed += (allowed.empty() ? "" : ", ") + std::string(name);
  }
  throw UsageError(flag + " must be one of " + allowed + "; got '" + value + "'");
}

void conflict(bool a, bool b, const std::string& what) {
  if (a && b) throw UsageError("conflicting options: " + what);
}

void require_path(const std::string& value, const std::string& what) {
  if (value.empty()) throw UsageError("missing " + what);
}

FeatureConfig feature_config(const Settings& s) {
  FeatureConfig cfg;
  cfg.lambda = s.lambda;
  cfg.ned_variant = choose<NedVariant>(
      "--ned-variant", s.ned_variant,
      {{"eq1", NedVariant::kEq1}, {"ratio_log", NedVariant::kRatioLog}});
  cfg.log_base = choose<LogBase>(
      "--log-base", s.log_base,
      {{"natural", LogBase::kNatural}, {"base2", LogBase::kBase2}});
  cfg.ele_case_sensitive = s.ele_case_sensitive;
  cfg.category_universe = s.categories;
  if (!s.vocab.empty()) {
    cfg.wordpiece_vocab_path = s.vocab;
    cfg.load_vocab();
  }
  cfg.validate();
  return cfg;
}

json feature_config_json(const Settings& s) {
  return {{"lambda", s.lambda},
          {"ned_variant", s.ned_variant},
          {"log_base", s.log_base},
          {"ele_case_sensitive", s.ele_case_sensitive},
          {"category_universe", s.categories},
          {"subword", s.vocab.empty() ? "heuristic" : "wordpiece"}};
}

RepairPolicy repair_policy(const Settings& s) {
  return choose<RepairPolicy>(
      "--repair", s.repair,
      {{"strict", RepairPolicy::kStrict}, {"coerce", RepairPolicy::kCoerce}});
}

ParseResult load_corpus(const Settings& s, const std::string& path) {
  return read_conll_file(path, repair_policy(s));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error("failed writing " + path);
}

// Emits `doc` as JSON when --json is set and `csv` otherwise; --csv also
// saves the CSV to a file.
void emit(const Settings& s, std::ostream& out, const json& doc,
          const std::string& csv) {
  if (s.json_output) {
    out << doc.dump(2) << '\n';
  } else {
    out << csv;
  }
  if (!s.csv_path.empty()) write_text(s.csv_path, csv);
}

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

double parse_real(const std::string& text, const std::string& what) {
  double v = 0;
  const auto* b = text.data();
  const auto* e = text.data() + text.size();
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) {
    throw UsageError(what + ": '" + text + "' is not a number");
  }
  return v;
}

// "a:b:step" -> a, a+step, ..., up to b inclusive.
std::vector<double> parse_grid(const std::string& spec, const std::string& flag) {
  const auto c1 = spec.find(':');
  const auto c2 = c1 == std::string::npos ? c1 : spec.find(':', c1 + 1);
  if (c2 == std::string::npos) {
    throw UsageError(flag + " expects start:stop:step, got '" + spec + "'");
  }
  const double a = parse_real(spec.substr(0, c1), flag);
  const double b = parse_real(spec.substr(c1 + 1, c2 - c1 - 1), flag);
  const double step = parse_real(spec.substr(c2 + 1), flag);
  if (!(step > 0) || !(b >= a)) {
    throw UsageError(flag + " needs step > 0 and stop >= start");
  }
  const auto n = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = std::round((a + step * static_cast<double>(i)) * 1e12) / 1e12;
  }
  return grid;
}

// ---- metrics ----------------------------------------------------------------

int cmd_metrics(const Settings& s, std::ostream& out) {
  require_path(s.corpus, "corpus path");
  const auto cfg = feature_config(s);
  const auto parsed = load_corpus(s, s.corpus);
  const auto& corpus = parsed.corpus;
  const auto fv = compute_features(corpus, cfg);
  json doc{{"command", "metrics"},
           {"corpus", s.corpus},
           {"sentences", corpus.size()},
           {"tokens", corpus.token_count()},
           {"entity_spans", corpus.span_count()},
           {"repairs", parsed.repairs},
           {"features", to_json(fv)},
           {"o_proportion", o_label_proportion(corpus)},
           {"config", feature_config_json(s)}};
  emit(s, out, doc, csv_header_features() + "\n" + csv_row(fv) + "\n");
  return kExitOk;
}

// ---- resample ---------------------------------------------------------------

int cmd_resample(const Settings& s, std::ostream& out) {
  require_path(s.corpus, "corpus path");
  require_path(s.out_dir, "--out-dir");
  const auto strategy = choose<SubsetStrategy>(
      "--strategy", s.strategy,
      {{"stratified", SubsetStrategy::kStratified},
       {"density_family", SubsetStrategy::kDensityFamily}});
  const auto cfg = feature_config(s);
  const auto corpus = load_corpus(s, s.corpus).corpus;
  const std::uint64_t seed = derive_seed(s.seed, "cli/resample");

  std::vector<SubsetManifest> manifests;
  if (strategy == SubsetStrategy::kStratified) {
    SubsetSpec spec;
    spec.seed = seed;
    spec.count = s.count;
    spec.rarity_bins = s.rarity_bins;
    spec.rarity_control = !s.no_rarity_control;
    manifests = build_stratified_subsets(corpus, spec, cfg);
  } else {
    manifests = build_density_family(corpus, s.rates, seed, cfg,
                                     s.no_rarity_control ? 1 : s.rarity_bins);
  }

  fs::create_directories(s.out_dir);
  json subsets = json::array();
  std::string csv = "subset_id,sentences,o_proportion," + csv_header_features() + "\n";
  for (std::size_t i = 0; i < manifests.size(); ++i) {
    const auto& m = manifests[i];
    char id[32];
    std::snprintf(id, sizeof(id), "subset_%03zu", i);
    const auto manifest_path = (fs::path(s.out_dir) / (std::string(id) + ".json")).string();
    write_text(manifest_path, to_json(m).dump(1) + "\n");
    const auto sub = materialize(corpus, m);
    json entry{{"id", id},
               {"manifest", manifest_path},
               {"sentences", m.sentence_ids.size()},
               {"o_proportion", o_label_proportion(sub)},
               {"features", to_json(m.features)}};
    if (strategy == SubsetStrategy::kDensityFamily) entry["p"] = m.spec.p;
    if (s.write_conll) {
      const auto conll = (fs::path(s.out_dir) / (std::string(id) + ".conll")).string();
      write_conll_file(sub, conll);
      entry["conll"] = conll;
    }
    json bins = json::array();
    for (const auto& b : m.bins) {
      bins.push_back({{"bin", b.bin}, {"population", b.population},
                      {"retained", b.retained}, {"rate", b.rate}});
    }
    entry["bins"] = bins;
    subsets.push_back(entry);
    csv += std::string(id) + ',' + std::to_string(m.sentence_ids.size()) + ',' +
           format_double(o_label_proportion(sub)) + ',' + csv_row(m.features) + "\n";
  }
  json doc{{"command", "resample"},
           {"strategy", s.strategy},
           {"seed", s.seed},
           {"corpus", s.corpus},
           {"config", feature_config_json(s)},
           {"subsets", subsets}};
  emit(s, out, doc, csv);
  return kExitOk;
}

// ---- evaluate ---------------------------------------------------------------

// Reads a real, or a JSON object with "f1" and optional "precision"/"recall".
ExperimentRecord parse_evaluator_output(const std::string& text,
                                        const std::string& subset) {
  const auto b = text.find_first_not_of(" \t\r\n");
  const auto e = text.find_last_not_of(" \t\r\n");
  if (b == std::string::npos) {
    throw BackendError("evaluator printed nothing for " + subset);
  }
  const std::string body = text.substr(b, e - b + 1);
  ExperimentRecord r;
  if (body.front() == '{') {
    const auto j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.contains("f1") || !j["f1"].is_number()) {
      throw BackendError("evaluator output for " + subset + " lacks a numeric f1");
    }
    r.f1 = j["f1"].get<double>();
    if (j.contains("precision") && j["precision"].is_number()) {
      r.precision = j["precision"].get<double>();
    }
    if (j.contains("recall") && j["recall"].is_number()) {
      r.recall = j["recall"].get<double>();
    }
  } else {
    const auto res = std::from_chars(body.data(), body.data() + body.size(), r.f1);
    if (res.ec != std::errc() || res.ptr != body.data() + body.size()) {
      throw BackendError("evaluator output for " + subset + " is not a number: '" +
                         body + "'");
    }
  }
  if (!std::isfinite(r.f1)) throw BackendError("evaluator returned non-finite f1");
  return r;
}

int cmd_evaluate(const Settings& s, std::ostream& out) {
  require_path(s.corpus, "--corpus");
  if (s.inputs.empty()) throw UsageError("missing manifest files");
  require_path(s.command, "--command");
  const auto cfg = feature_config(s);
  const auto corpus = load_corpus(s, s.corpus).corpus;

  std::vector<SubsetManifest> manifests;
  for (const auto& path : s.inputs) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    const auto j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw DataError(path + ": invalid JSON");
    manifests.push_back(manifest_from_json(j));
    verify_manifest(corpus, manifests.back(), cfg, 1e-9);
  }

  const auto scratch = fs::temp_directory_path() /
                       ("idkit-eval-" + std::to_string(::getpid()) + "-" +
                        std::to_string(derive_seed(s.seed, s.command) & 0xffffff));
  fs::create_directories(scratch);
  struct Cleanup {
    fs::path dir;
    ~Cleanup() {
      std::error_code ec;
      fs::remove_all(dir, ec);
    }
  } cleanup{scratch};

  const auto timeout = std::chrono::milliseconds(static_cast<long long>(s.timeout_s * 1000));
  std::vector<ExperimentRecord> records(manifests.size());
  parallel_for(manifests.size(), s.workers, [&](std::size_t i) {
    const std::string id = stem(s.inputs[i]);
    const auto conll = (scratch / (id + "_" + std::to_string(i) + ".conll")).string();
    write_conll_file(materialize(corpus, manifests[i]), conll);
    const json request{{"subset_id", id},
                       {"conll", conll},
                       {"sentences", manifests[i].sentence_ids.size()},
                       {"features", to_json(manifests[i].features)}};
    const auto result = run_shell(s.command, request.dump() + "\n", timeout);
    if (result.exit_code != 0) {
      throw BackendError("evaluator exited with " + std::to_string(result.exit_code) +
                         " on " + id + ": " + result.err);
    }
    auto r = parse_evaluator_output(result.out, id);
    r.features = manifests[i].features;
    r.subset_id = id;
    records[i] = std::move(r);
  });

  std::string jsonl;
  json list = json::array();
  for (const auto& r : records) {
    jsonl += to_json(r).dump() + "\n";
    list.push_back(to_json(r));
  }
  if (!s.out_path.empty()) write_text(s.out_path, jsonl);
  std::string csv = csv_header_record() + "\n";
  for (const auto& r : records) csv += csv_row(r) + "\n";
  if (!s.csv_path.empty()) write_text(s.csv_path, csv);
  if (s.json_output) {
    out << json{{"command", "evaluate"}, {"records", list}}.dump(2) << '\n';
  } else {
    out << jsonl;
  }
  return kExitOk;
}

// ---- correlate --------------------------------------------------------------

std::vector<double> target_series(std::span<const ExperimentRecord> records,
                                  const std::string& target) {
  std::vector<double> y;
  for (const auto& r : records) {
    if (target == "f1") {
      y.push_back(r.f1);
    } else {
      const auto& v = target == "precision" ? r.precision : r.recall;
      if (!v) throw DataError("record '" + r.subset_id + "' has no " + target);
      y.push_back(*v);
    }
  }
  return y;
}

int cmd_correlate(const Settings& s, std::ostream& out) {
  require_path(s.records, "records path");
  choose<int>("--target", s.target, {{"f1", 0}, {"precision", 1}, {"recall", 2}});
  std::vector<std::string> features = s.features;
  // Without an explicit --feature, constant features are skipped, not fatal.
  const bool implicit = features.empty();
  if (implicit) features.assign(kFeatureNames.begin(), kFeatureNames.end());
  for (const auto& f : features) feature_index(f);

  const auto records = read_records_file(s.records);
  const auto y = target_series(records, s.target);
  json results = json::array();
  json skipped = json::array();
  std::string csv = "feature,target,n,pearson,spearman,pearson_p,spearman_p\n";
  for (const auto& f : features) {
    std::vector<double> x;
    const auto idx = feature_index(f);
    for (const auto& r : records) x.push_back(r.features[idx]);
    if (implicit && records.size() >= 3 &&
        std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); })) {
      skipped.push_back(f);
      continue;
    }
    const auto c = correlate_series(x, y, f, s.target);
    results.push_back(to_json(c));
    csv += f + ',' + s.target + ',' + std::to_string(c.n) + ',' +
           format_double(c.pearson) + ',' + format_double(c.spearman) + ',' +
           format_double(c.pearson_p) + ',' + format_double(c.spearman_p) + "\n";
  }
  if (results.empty()) throw DataError("every feature is constant across records");
  if (!s.svg_path.empty()) {
    const auto name = results.front()["feature"].get<std::string>();
    const auto idx = feature_index(name);
    svg::Series series{name, {}, y, {}};
    for (const auto& r : records) {
      series.x.push_back(r.features[idx]);
      series.point_labels.push_back(r.subset_id);
    }
    write_text(s.svg_path,
               svg::scatter(std::span<const svg::Series>(&series, 1),
                            {name + " vs " + s.target, name, s.target, false}));
  }
  json doc{{"command", "correlate"},
           {"records", s.records},
           {"target", s.target},
           {"n", records.size()},
           {"results", results}};
  if (!skipped.empty()) doc["skipped"] = skipped;
  emit(s, out, doc, csv);
  return kExitOk;
}

// ---- gsa --------------------------------------------------------------------

std::vector<std::string> ranking(const std::vector<std::string>& names,
                                 const std::vector<double>& score) {
  std::vector<std::size_t> order(names.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  std::vector<std::string> out;
  for (auto i : order) out.push_back(names[i]);
  return out;
}

int cmd_gsa(const Settings& s, std::ostream& out) {
  require_path(s.records, "records path");
  const bool knn = choose<bool>("--surface", s.surface, {{"knn", true}, {"command", false}});
  const auto method = choose<int>("--method", s.method,
                                  {{"morris", 1}, {"sobol", 2}, {"both", 3}});
  conflict(knn, !s.command.empty(), "--command requires --surface command");
  if (!knn) require_path(s.command, "--command for --surface command");
  conflict(!(method & 1), !s.svg_morris.empty(), "--svg-morris requires Morris");
  conflict(!(method & 2), !s.svg_sobol.empty(), "--svg-sobol requires Sobol");

  const auto records = read_records_file(s.records);
  std::vector<std::string> names(kFeatureNames.begin(), kFeatureNames.end());
  json surface_doc;
  auto surface = [&]() {
    if (knn) {
      surface_doc = {{"kind", "knn"}, {"k", s.k}, {"records", records.size()}};
      return fit_knn_surrogate(records, s.k);
    }
    surface_doc = {{"kind", "command"}, {"command", s.command}};
    return ResponseSurface::external_command(
        s.command, record_bounds(records), names,
        std::chrono::milliseconds(static_cast<long long>(s.timeout_s * 1000)));
  }();

  json bounds = json::object();
  for (std::size_t i = 0; i < names.size(); ++i) {
    bounds[names[i]] = {surface.bounds()[i].lo, surface.bounds()[i].hi};
  }
  json doc{{"command", "gsa"},
           {"records", s.records},
           {"seed", s.seed},
           {"surface", surface_doc},
           {"bounds", bounds}};
  json rank = json::object();

  std::optional<MorrisResult> morris;
  std::optional<SobolResult> sobol;
  if (method & 1) {
    MorrisOptions opts;
    opts.trajectories = s.trajectories;
    opts.levels = s.levels;
    opts.seed = derive_seed(s.seed, "cli/morris");
    opts.workers = s.workers;
    morris = run_morris(surface, opts);
    doc["morris"] = to_json(*morris);
    rank["morris"] = ranking(morris->names, morris->mu_star);
  }
  if (method & 2) {
    SobolOptions opts;
    opts.base_samples = s.base_samples;
    opts.bootstrap = s.bootstrap;
    opts.seed = derive_seed(s.seed, "cli/sobol");
    opts.workers = s.workers;
    sobol = run_sobol(surface, opts);
    doc["sobol"] = to_json(*sobol);
    rank["sobol"] = ranking(sobol->names, sobol->st);
  }
  doc["ranking"] = rank;
  doc["defaults"] = {{"trajectories", s.trajectories},
                     {"levels", s.levels},
                     {"base_samples", s.base_samples},
                     {"bootstrap", s.bootstrap},
                     {"note", "trajectory, level, sample and bootstrap counts are "
                              "toolkit defaults unless overridden"}};

  std::string csv = "feature,mu_star,mu,sigma,s1,st,s1_lo,s1_hi,st_lo,st_hi\n";
  for (std::size_t i = 0; i < names.size(); ++i) {
    csv += names[i];
    if (morris) {
      csv += ',' + format_double(morris->mu_star[i]) + ',' +
             format_double(morris->mu[i]) + ',' + format_double(morris->sigma[i]);
    } else {
      csv += ",,,";
    }
    if (sobol) {
      csv += ',' + format_double(sobol->s1[i]) + ',' + format_double(sobol->st[i]) +
             ',' + format_double(sobol->s1_ci95[i][0]) + ',' +
             format_double(sobol->s1_ci95[i][1]) + ',' +
             format_double(sobol->st_ci95[i][0]) + ',' +
             format_double(sobol->st_ci95[i][1]);
    } else {
      csv += ",,,,,,";
    }
    csv += "\n";
  }
  if (morris && !s.svg_morris.empty()) {
    write_text(s.svg_morris, svg::morris_plot(morris->names, morris->mu_star, morris->sigma));
  }
  if (sobol && !s.svg_sobol.empty()) {
    write_text(s.svg_sobol, svg::bars(sobol->names, sobol->st,
                                      {"Sobol total-order indices", "ST", "", false}));
  }
  emit(s, out, doc, csv);
  return kExitOk;
}

// ---- asa --------------------------------------------------------------------

AsaConfig asa_config(const Settings& s) {
  AsaConfig cfg;
  cfg.mode = choose<AsaMode>("--mode", s.asa_mode,
                             {{"row_wise_1d", AsaMode::kRowWise1d},
                              {"full_2d", AsaMode::kFull2d}});
  cfg.weight = choose<AsaWeight>(
      "--weight", s.asa_weight,
      {{"bin_index", AsaWeight::kBinIndex},
       {"normalized_frequency", AsaWeight::kNormalizedFrequency}});
  cfg.aggregate = choose<AsaAggregate>(
      "--aggregate", s.asa_aggregate,
      {{"mean", AsaAggregate::kMean}, {"per_layer", AsaAggregate::kPerLayer}});
  return cfg;
}

int cmd_asa(const Settings& s, std::ostream& out) {
  conflict(!s.inputs.empty(), !s.pairs.empty(),
           "attention files and --pair cannot be combined");
  if (s.inputs.empty() && s.pairs.empty()) {
    throw UsageError("missing attention files or --pair MANIFEST=ATTENTION");
  }
  const auto cfg = asa_config(s);
  json config{{"mode", s.asa_mode}, {"weight", s.asa_weight},
              {"aggregate", s.asa_aggregate}};

  if (!s.pairs.empty()) {
    std::vector<DensityAsaInput> inputs;
    for (const auto& pair : s.pairs) {
      const auto eq = pair.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == pair.size()) {
        throw UsageError("--pair expects MANIFEST=ATTENTION, got '" + pair + "'");
      }
      const auto manifest_path = pair.substr(0, eq);
      std::ifstream in(manifest_path);
      if (!in) throw DataError("cannot open " + manifest_path);
      const auto j = json::parse(in, nullptr, false);
      if (j.is_discarded()) throw DataError(manifest_path + ": invalid JSON");
      const auto features = j.contains("features") ? feature_vector_from_json(j["features"])
                                                   : feature_vector_from_json(j);
      inputs.push_back({stem(manifest_path), features,
                        read_attention_file(pair.substr(eq + 1))});
    }
    const auto table = asa_vs_density(inputs, cfg);
    std::string csv = "label,ned,mean_asa,tensors\n";
    svg::Series curve{"mean ASA", {}, {}, {}};
    for (const auto& r : table.rows) {
      csv += r.label + ',' + format_double(r.ned) + ',' + format_double(r.mean_asa) +
             ',' + std::to_string(r.tensors) + "\n";
      curve.x.push_back(r.ned);
      curve.y.push_back(r.mean_asa);
      curve.point_labels.push_back(r.label);
    }
    if (!s.svg_path.empty()) {
      write_text(s.svg_path, svg::scatter(std::span<const svg::Series>(&curve, 1),
                                          {"ASA vs density", "ned", "ASA", true}));
    }
    json doc = to_json(table);
    doc["command"] = "asa";
    doc["config"] = config;
    emit(s, out, doc, csv);
    return kExitOk;
  }

  conflict(!s.svg_path.empty(), true, "--svg requires --pair inputs");
  json tensors = json::array();
  std::string csv = "file,index,sentence_id,seq_len,asa\n";
  double total = 0;
  std::size_t n = 0;
  for (const auto& path : s.inputs) {
    const auto loaded = read_attention_file(path);
    for (std::size_t i = 0; i < loaded.size(); ++i) {
      const auto r = compute_asa(loaded[i], cfg);
      json row{{"file", path},
               {"index", i},
               {"sentence_id", loaded[i].meta.sentence_id},
               {"seq_len", loaded[i].seq_len},
               {"asa", r.asa}};
      if (!r.per_layer.empty()) row["per_layer"] = r.per_layer;
      tensors.push_back(row);
      csv += path + ',' + std::to_string(i) + ',' + loaded[i].meta.sentence_id + ',' +
             std::to_string(loaded[i].seq_len) + ',' + format_double(r.asa) + "\n";
      total += r.asa;
      ++n;
    }
  }
  json doc{{"command", "asa"},
           {"config", config},
           {"tensors", tensors},
           {"mean_asa", n ? total / static_cast<double>(n) : 0.0}};
  emit(s, out, doc, csv);
  return kExitOk;
}

// ---- wom --------------------------------------------------------------------

struct BackendHandle {
  std::unique_ptr<TranslationBackend> base;
  std::unique_ptr<CassetteBackend> recorder;
  TranslationBackend& get() { return recorder ? *recorder : *base; }
};

BackendHandle make_backend(const Settings& s, CLI::App* wom) {
  const int kind = choose<int>("--backend", s.backend,
                               {{"mock", 0}, {"mock-identity", 1}, {"http", 2},
                                {"cassette", 3}});
  conflict(kind != 2, !s.endpoint.empty(), "--endpoint requires --backend http");
  conflict(kind != 2, wom->count("--token-env") > 0, "--token-env requires --backend http");
  conflict(kind != 3, !s.cassette.empty(), "--cassette requires --backend cassette");
  conflict(kind == 3, !s.record_cassette.empty(),
           "--record-cassette cannot wrap --backend cassette");
  BackendHandle h;
  const auto mock_seed = derive_seed(s.seed, "cli/wom/mock");
  switch (kind) {
    case 0:
      h.base = std::make_unique<MockBackend>(MockBackend::Behavior::kParaphrase, mock_seed);
      break;
    case 1:
      h.base = std::make_unique<MockBackend>(MockBackend::Behavior::kIdentity, mock_seed);
      break;
    case 2: {
      require_path(s.endpoint, "--endpoint for --backend http");
      HttpBackendConfig cfg;
      cfg.endpoint = s.endpoint;
      cfg.token_env = s.token_env;
      cfg.timeout = std::chrono::milliseconds(static_cast<long long>(s.timeout_s * 1000));
      h.base = std::make_unique<HttpBackend>(cfg);
      break;
    }
    default:
      require_path(s.cassette, "--cassette for --backend cassette");
      h.base = CassetteBackend::replay(s.cassette);
  }
  if (!s.record_cassette.empty()) {
    h.recorder = CassetteBackend::record(*h.base, s.record_cassette);
  }
  return h;
}

int cmd_wom(const Settings& s, CLI::App* wom, std::ostream& out) {
  require_path(s.corpus, "corpus path");
  const bool sweep_t = !s.sweep_t.empty();
  const bool sweep_w = !s.sweep_w.empty();
  conflict(sweep_t, sweep_w, "--sweep-T and --sweep-W");
  conflict(sweep_t, wom->count("--threshold") > 0, "--sweep-T and --threshold");
  conflict(sweep_w, wom->count("--window-size") > 0, "--sweep-W and --window-size");
  conflict(sweep_t || sweep_w, !s.out_path.empty(), "--out and a sweep");
  conflict(sweep_t || sweep_w, !s.svg_path.empty(), "--svg and a sweep");

  WomConfig cfg;
  cfg.window_size = s.window_size;
  cfg.threshold = s.threshold;
  cfg.threshold_mode = choose<ThresholdMode>(
      "--threshold-mode", s.threshold_mode,
      {{"fixed", ThresholdMode::kFixed}, {"adaptive", ThresholdMode::kAdaptive}});
  conflict(sweep_t, cfg.threshold_mode == ThresholdMode::kAdaptive,
           "--sweep-T and --threshold-mode adaptive");
  cfg.adaptive_fraction = s.adaptive_fraction;
  cfg.mode = choose<WomMode>("--mode", s.wom_mode,
                             {{"wom", WomMode::kWom},
                              {"global_augment", WomMode::kGlobalAugment},
                              {"off", WomMode::kOff}});
  cfg.source_language = s.source_lang;
  cfg.pivot_language = s.pivot_lang;
  cfg.seed = derive_seed(s.seed, "cli/wom");
  cfg.max_in_flight = s.max_in_flight;
  cfg.retries = s.retries;
  cfg.retry_backoff = std::chrono::milliseconds(s.backoff_ms);
  cfg.max_failure_rate = s.max_failure_rate;
  cfg.validate();

  const auto metric_cfg = feature_config(s);
  const auto corpus = load_corpus(s, s.corpus).corpus;
  auto backend = make_backend(s, wom);

  if (sweep_t || sweep_w) {
    std::vector<SweepRow> rows;
    if (sweep_t) {
      rows = sweep_threshold(corpus, cfg, metric_cfg, backend.get(),
                             parse_grid(s.sweep_t, "--sweep-T"));
    } else {
      std::vector<std::size_t> sizes;
      for (double w : parse_grid(s.sweep_w, "--sweep-W")) {
        if (w < 1 || w != std::floor(w)) {
          throw UsageError("--sweep-W values must be positive integers");
        }
        sizes.push_back(static_cast<std::size_t>(w));
      }
      rows = sweep_window(corpus, cfg, metric_cfg, backend.get(), sizes);
    }
    if (backend.recorder) backend.recorder->save();
    json list = json::array();
    std::string csv = csv_header_sweep() + "\n";
    for (const auto& r : rows) {
      list.push_back(to_json(r));
      csv += csv_row(r) + "\n";
    }
    json doc{{"command", "wom"},
             {"sweep", sweep_t ? "threshold" : "window_size"},
             {"mode", s.wom_mode},
             {"backend", backend.get().name()},
             {"rows", list}};
    emit(s, out, doc, csv);
    return kExitOk;
  }

  WomRun run;
  try {
    run = run_wom(corpus, cfg, metric_cfg, backend.get());
  } catch (const WomAborted&) {
    if (backend.recorder) backend.recorder->save();
    throw;
  }
  if (backend.recorder) backend.recorder->save();
  if (!s.out_path.empty()) write_conll_file(run.augmented, s.out_path);

  std::map<std::size_t, const AugmentationResult*> by_window;
  for (const auto& r : run.report) by_window[r.window_index] = &r;
  std::string csv = "window,begin,end,density,barren,accepted,rejected,density_after\n";
  svg::Series before{"before", {}, {}, {}};
  svg::Series after{"after", {}, {}, {}};
  for (const auto& w : run.windows) {
    const auto it = by_window.find(w.index);
    const auto* r = it == by_window.end() ? nullptr : it->second;
    const double density_after = r ? r->density_after : w.density;
    csv += std::to_string(w.index) + ',' + std::to_string(w.begin) + ',' +
           std::to_string(w.end) + ',' + format_double(w.density) + ',' +
           (w.barren ? "1" : "0") + ',' + std::to_string(r ? r->accepted.size() : 0) +
           ',' + std::to_string(r ? r->rejected.size() : 0) + ',' +
           format_double(density_after) + "\n";
    before.x.push_back(static_cast<double>(w.index));
    before.y.push_back(w.density);
    after.x.push_back(static_cast<double>(w.index));
    after.y.push_back(density_after);
  }
  if (!s.svg_path.empty()) {
    const std::vector<svg::Series> series{before, after};
    write_text(s.svg_path, svg::scatter(series, {"Window density", "window",
                                                 "density", true}));
  }
  json doc = to_json(run);
  doc["command"] = "wom";
  doc["mode"] = s.wom_mode;
  doc["backend"] = backend.get().name();
  if (!s.out_path.empty()) doc["output"] = s.out_path;
  emit(s, out, doc, csv);
  return kExitOk;
}

// ---- score ------------------------------------------------------------------

int cmd_score(const Settings& s, std::ostream& out) {
  require_path(s.gold, "gold path");
  require_path(s.pred, "prediction path");
  const auto gold = load_corpus(s, s.gold).corpus;
  const auto pred = load_corpus(s, s.pred).corpus;
  const auto report = score_spans(gold, pred);
  json doc = to_json(report);
  doc["command"] = "score";
  doc["gold"] = s.gold;
  doc["predicted"] = s.pred;
  emit(s, out, doc, csv_header_score() + "\n" + csv_row(report) + "\n");
  return kExitOk;
}

// ---- wiring -----------------------------------------------------------------

void add_feature_options(Binder& b, CLI::App* app, Settings& s) {
  b.option(app, "--lambda", s.lambda, "/feature/lambda",
           "Weight of the sentence-length correction in the density score");
  b.option(app, "--ned-variant", s.ned_variant, "/feature/ned_variant",
           "eq1 or ratio_log");
  b.option(app, "--log-base", s.log_base, "/feature/log_base", "natural or base2");
  b.flag(app, "--ele-case-sensitive", s.ele_case_sensitive,
         "/feature/ele_case_sensitive", "Do not case-fold entity surfaces");
  b.option(app, "--categories", s.categories, "/feature/category_universe",
           "Category universe, comma separated")
      ->delimiter(',');
  b.option(app, "--vocab", s.vocab, "/feature/wordpiece_vocab",
           "WordPiece vocabulary file (one piece per line)");
}

void add_repair_option(Binder& b, CLI::App* app, Settings& s) {
  b.option(app, "--repair", s.repair, "/io/repair",
           "strict: reject BIO violations; coerce: repair them");
}

void add_output_options(Binder& b, CLI::App* app, Settings& s, bool svg) {
  b.option(app, "--csv", s.csv_path, "", "Also write the CSV report to this file");
  if (svg) b.option(app, "--svg", s.svg_path, "", "Write an SVG chart to this file");
}

int dispatch(CLI::App& app, Settings& s, const Binder& binder, std::ostream& out) {
  if (!s.config_path.empty()) {
    std::ifstream in(s.config_path);
    if (!in) throw DataError("cannot open config " + s.config_path);
    const auto config = json::parse(in, nullptr, false);
    if (config.is_discarded() || !config.is_object()) {
      throw DataError(s.config_path + ": config must be a JSON object");
    }
    binder.apply(config);
  }
  if (s.workers == 0) throw UsageError("--workers must be >= 1");
  const auto* sub = app.get_subcommands().front();
  const auto& name = sub->get_name();
  if (name == "metrics") return cmd_metrics(s, out);
  if (name == "resample") return cmd_resample(s, out);
  if (name == "evaluate") return cmd_evaluate(s, out);
  if (name == "correlate") return cmd_correlate(s, out);
  if (name == "gsa") return cmd_gsa(s, out);
  if (name == "asa") return cmd_asa(s, out);
  if (name == "wom") return cmd_wom(s, app.get_subcommand("wom"), out);
  return cmd_score(s, out);
}

void report_error(std::ostream& err, const char* type, const std::string& msg) {
  err << json{{"error", {{"type", type}, {"message", msg}}}}.dump() << '\n';
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Settings s;
  Binder b;
  CLI::App app{"Information-density diagnostics for NER corpora", "idkit"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.set_version_flag("--version", "idkit 0.1.0");
  b.option(&app, "--config", s.config_path, "", "JSON config file; flags override it");
  b.option(&app, "--seed", s.seed, "/seed", "Root seed for every stochastic step");
  b.flag(&app, "--json", s.json_output, "/json", "Print the report as JSON");
  b.option(&app, "--workers", s.workers, "/workers", "Worker threads");

  auto* metrics = app.add_subcommand("metrics", "Six structural features of a corpus");
  metrics->add_option("corpus", s.corpus, "CoNLL file");
  add_feature_options(b, metrics, s);
  add_repair_option(b, metrics, s);
  add_output_options(b, metrics, s, false);

  auto* resample = app.add_subcommand("resample", "Build subset manifests");
  resample->add_option("corpus", s.corpus, "CoNLL file");
  b.option(resample, "--strategy", s.strategy, "/resample/strategy",
           "stratified or density_family");
  b.option(resample, "--count", s.count, "/resample/count", "Stratified subset count");
  b.option(resample, "--rarity-bins", s.rarity_bins, "/resample/rarity_bins",
           "Entity rarity quantile bins");
  b.flag(resample, "--no-rarity-control", s.no_rarity_control,
         "/resample/no_rarity_control",
         "Stratified: one rate per rarity bin; density family: plain random cut");
  b.option(resample, "--rates", s.rates, "/resample/rates",
           "Density family retention rates, comma separated")
      ->delimiter(',');
  b.option(resample, "--out-dir", s.out_dir, "/resample/out_dir",
           "Directory for manifests");
  b.flag(resample, "--write-conll", s.write_conll, "/resample/write_conll",
         "Also write each subset as CoNLL");
  add_feature_options(b, resample, s);
  add_repair_option(b, resample, s);
  add_output_options(b, resample, s, false);

  auto* evaluate = app.add_subcommand(
      "evaluate", "Score each subset with an external command and emit records");
  evaluate->add_option("manifests", s.inputs, "Manifest JSON files");
  b.option(evaluate, "--corpus", s.corpus, "/io/corpus", "Parent CoNLL corpus");
  b.option(evaluate, "--command", s.command, "/evaluate/command",
           "Shell command; reads one JSON request on stdin, prints f1");
  b.option(evaluate, "--timeout", s.timeout_s, "/evaluate/timeout",
           "Seconds per evaluation");
  b.option(evaluate, "--out", s.out_path, "", "Write records as JSON lines");
  add_feature_options(b, evaluate, s);
  add_repair_option(b, evaluate, s);
  add_output_options(b, evaluate, s, false);

  auto* correlate = app.add_subcommand("correlate", "Pearson and Spearman per feature");
  correlate->add_option("records", s.records, "Records (CSV or JSON lines)");
  b.option(correlate, "--feature", s.features, "/correlate/features",
           "Feature name (repeatable; default all)");
  b.option(correlate, "--target", s.target, "/correlate/target",
           "f1, precision or recall");
  add_output_options(b, correlate, s, true);

  auto* gsa = app.add_subcommand("gsa", "Morris screening and Sobol indices");
  gsa->add_option("records", s.records, "Records (CSV or JSON lines)");
  b.option(gsa, "--surface", s.surface, "/gsa/surface", "knn or command");
  b.option(gsa, "--k", s.k, "/gsa/k", "Neighbors for the knn surface");
  b.option(gsa, "--command", s.command, "", "Shell command for --surface command");
  b.option(gsa, "--timeout", s.timeout_s, "/gsa/timeout", "Seconds per evaluation");
  b.option(gsa, "--method", s.method, "/gsa/method", "morris, sobol or both");
  b.option(gsa, "--trajectories", s.trajectories, "/gsa/trajectories",
           "Morris trajectories");
  b.option(gsa, "--levels", s.levels, "/gsa/levels", "Morris grid levels");
  b.option(gsa, "--base-samples", s.base_samples, "/gsa/base_samples",
           "Sobol base sample count (power of two)");
  b.option(gsa, "--bootstrap", s.bootstrap, "/gsa/bootstrap", "Bootstrap replicates");
  b.option(gsa, "--svg-morris", s.svg_morris, "", "Write the mu*-sigma chart");
  b.option(gsa, "--svg-sobol", s.svg_sobol, "", "Write the total-order bar chart");
  add_output_options(b, gsa, s, false);

  auto* asa = app.add_subcommand("asa", "Attention spectrum scores");
  asa->add_option("attention", s.inputs, "ATN1 files");
  b.option(asa, "--pair", s.pairs, "", "MANIFEST=ATTENTION (repeatable)");
  b.option(asa, "--mode", s.asa_mode, "/asa/mode", "row_wise_1d or full_2d");
  b.option(asa, "--weight", s.asa_weight, "/asa/weight",
           "bin_index or normalized_frequency");
  b.option(asa, "--aggregate", s.asa_aggregate, "/asa/aggregate", "mean or per_layer");
  add_output_options(b, asa, s, true);

  auto* wom = app.add_subcommand("wom", "Window-based optimization by back-translation");
  wom->add_option("corpus", s.corpus, "CoNLL file");
  b.option(wom, "--window-size", s.window_size, "/wom/window_size",
           "Sentences per window");
  b.option(wom, "--threshold", s.threshold, "/wom/threshold", "Barren threshold");
  b.option(wom, "--threshold-mode", s.threshold_mode, "/wom/threshold_mode",
           "fixed or adaptive");
  b.option(wom, "--adaptive-fraction", s.adaptive_fraction, "/wom/adaptive_fraction",
           "Share of the mean window density used as adaptive threshold");
  b.option(wom, "--mode", s.wom_mode, "/wom/mode", "wom, global_augment or off");
  b.option(wom, "--backend", s.backend, "/wom/backend",
           "mock, mock-identity, http or cassette");
  b.option(wom, "--endpoint", s.endpoint, "/wom/endpoint", "HTTP backend URL");
  b.option(wom, "--token-env", s.token_env, "/wom/token_env",
           "Environment variable holding the backend bearer token");
  b.option(wom, "--cassette", s.cassette, "/wom/cassette", "Cassette file to replay");
  b.option(wom, "--record-cassette", s.record_cassette, "/wom/record_cassette",
           "Record backend traffic to this cassette file");
  b.option(wom, "--source-lang", s.source_lang, "/wom/source_language", "Source language");
  b.option(wom, "--pivot-lang", s.pivot_lang, "/wom/pivot_language", "Pivot language");
  b.option(wom, "--max-in-flight", s.max_in_flight, "/wom/max_in_flight",
           "Concurrent backend round trips");
  b.option(wom, "--retries", s.retries, "/wom/retries", "Retries per translation");
  b.option(wom, "--backoff-ms", s.backoff_ms, "/wom/retry_backoff_ms",
           "Initial retry backoff");
  b.option(wom, "--max-failure-rate", s.max_failure_rate, "/wom/max_failure_rate",
           "Abort above this backend failure share");
  b.option(wom, "--timeout", s.timeout_s, "/wom/timeout", "HTTP timeout in seconds");
  b.option(wom, "--sweep-T", s.sweep_t, "", "Threshold grid start:stop:step");
  b.option(wom, "--sweep-W", s.sweep_w, "", "Window size grid start:stop:step");
  b.option(wom, "--out", s.out_path, "", "Write the augmented corpus as CoNLL");
  add_feature_options(b, wom, s);
  add_repair_option(b, wom, s);
  add_output_options(b, wom, s, true);

  auto* score = app.add_subcommand("score", "Span-level precision, recall and F1");
  score->add_option("gold", s.gold, "Gold CoNLL file");
  score->add_option("predicted", s.pred, "Predicted CoNLL file");
  add_repair_option(b, score, s);
  add_output_options(b, score, s, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what());
    return kExitUsage;
  }

  try {
    return dispatch(app, s, b, out);
  } catch (const UsageError& e) {
    report_error(err, "usage", e.what());
    return kExitUsage;
  } catch (const BackendError& e) {
    report_error(err, "backend", e.what());
    return kExitBackend;
  } catch (const DataError& e) {
    report_error(err, "data", e.what());
    return kExitData;
  } catch (const Error& e) {
    report_error(err, "io", e.what());
    return kExitData;
  } catch (const json::exception& e) {
    report_error(err, "data", e.what());
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    report_error(err, "io", e.what());
    return kExitData;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"idkit"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace idkit::cli
