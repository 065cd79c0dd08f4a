#include "idkit/serialize.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "idkit/error.hpp"

namespace idkit {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string strategy_name(SubsetStrategy s) {
  return s == SubsetStrategy::kStratified ? "stratified" : "density_family";
}

Json optional_number(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cell));
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  out.push_back(std::move(cell));
  return out;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double parse_number(const std::string& s, std::size_t line, const std::string& col) {
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ParseError(line, "column '" + col + "' is not a number: '" + s + "'");
  }
  return v;
}

}  // namespace

Json to_json(const FeatureVector& fv) {
  Json j = Json::object();
  const auto v = fv.as_array();
  for (std::size_t i = 0; i < v.size(); ++i) j[std::string(kFeatureNames[i])] = v[i];
  return j;
}

FeatureVector feature_vector_from_json(const nlohmann::json& j) {
  std::array<double, kFeatureCount> v{};
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string key(kFeatureNames[i]);
    if (!j.contains(key) || !j[key].is_number()) {
      throw DataError("feature vector lacks numeric '" + key + "'");
    }
    v[i] = j[key].get<double>();
  }
  return FeatureVector::from_array(v);
}

std::string csv_header_features() {
  return "ned,norm_std,redundancy,ele,ssr,vocab_entropy";
}

std::string csv_row(const FeatureVector& fv) {
  std::string out;
  for (double v : fv.as_array()) {
    if (!out.empty()) out += ',';
    out += format_double(v);
  }
  return out;
}

Json to_json(const ScoreReport& r) {
  return Json{{"tp", r.tp},
              {"fp", r.fp},
              {"fn", r.fn},
              {"precision", r.precision},
              {"recall", r.recall},
              {"f1", r.f1},
              {"missed_rate", r.missed_rate},
              {"precision_undefined", r.precision_undefined},
              {"recall_undefined", r.recall_undefined}};
}

std::string csv_header_score() { return "tp,fp,fn,precision,recall,f1,missed_rate"; }

std::string csv_row(const ScoreReport& r) {
  return std::to_string(r.tp) + ',' + std::to_string(r.fp) + ',' +
         std::to_string(r.fn) + ',' + format_double(r.precision) + ',' +
         format_double(r.recall) + ',' + format_double(r.f1) + ',' +
         format_double(r.missed_rate);
}

Json to_json(const SubsetSpec& s) {
  return Json{{"seed", s.seed},
              {"strategy", strategy_name(s.strategy)},
              {"p", s.p},
              {"count", s.count},
              {"rarity_bins", s.rarity_bins},
              {"rarity_control", s.rarity_control}};
}

Json to_json(const SubsetManifest& m) {
  Json bins = Json::array();
  for (const auto& b : m.bins) {
    bins.push_back({{"bin", b.bin},
                    {"population", b.population},
                    {"retained", b.retained},
                    {"rate", b.rate}});
  }
  return Json{{"spec", to_json(m.spec)},
              {"sentence_ids", m.sentence_ids},
              {"features", to_json(m.features)},
              {"bins", bins}};
}

SubsetManifest manifest_from_json(const nlohmann::json& j) {
  try {
    SubsetManifest m;
    const auto& s = j.at("spec");
    m.spec.seed = s.at("seed").get<std::uint64_t>();
    const auto strategy = s.at("strategy").get<std::string>();
    if (strategy == "stratified") {
      m.spec.strategy = SubsetStrategy::kStratified;
    } else if (strategy == "density_family") {
      m.spec.strategy = SubsetStrategy::kDensityFamily;
    } else {
      throw DataError("unknown subset strategy '" + strategy + "'");
    }
    m.spec.p = s.value("p", 1.0);
    m.spec.count = s.value("count", std::size_t{1});
    m.spec.rarity_bins = s.value("rarity_bins", std::size_t{4});
    m.spec.rarity_control = s.value("rarity_control", true);
    m.sentence_ids = j.at("sentence_ids").get<std::vector<std::size_t>>();
    m.features = feature_vector_from_json(j.at("features"));
    for (const auto& b : j.value("bins", nlohmann::json::array())) {
      m.bins.push_back({b.at("bin").get<std::string>(),
                        b.at("population").get<std::size_t>(),
                        b.at("retained").get<std::size_t>(),
                        b.at("rate").get<double>()});
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad manifest: ") + e.what());
  }
}

Json to_json(const ExperimentRecord& r) {
  return Json{{"subset_id", r.subset_id},
              {"features", to_json(r.features)},
              {"f1", r.f1},
              {"precision", optional_number(r.precision)},
              {"recall", optional_number(r.recall)}};
}

ExperimentRecord record_from_json(const nlohmann::json& j) {
  ExperimentRecord r;
  try {
    r.features = feature_vector_from_json(j.contains("features") ? j.at("features") : j);
    r.f1 = j.at("f1").get<double>();
    if (j.contains("precision") && j["precision"].is_number()) {
      r.precision = j["precision"].get<double>();
    }
    if (j.contains("recall") && j["recall"].is_number()) {
      r.recall = j["recall"].get<double>();
    }
    if (j.contains("subset_id")) {
      r.subset_id = j["subset_id"].is_string() ? j["subset_id"].get<std::string>()
                                               : j["subset_id"].dump();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad record: ") + e.what());
  }
  if (!std::isfinite(r.f1)) throw DataError("record f1 is not finite");
  return r;
}

std::string csv_header_record() {
  return "subset_id," + csv_header_features() + ",f1,precision,recall";
}

std::string csv_row(const ExperimentRecord& r) {
  return csv_escape(r.subset_id) + ',' + csv_row(r.features) + ',' +
         format_double(r.f1) + ',' +
         (r.precision ? format_double(*r.precision) : std::string()) + ',' +
         (r.recall ? format_double(*r.recall) : std::string());
}

std::vector<ExperimentRecord> read_records(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw DataError("no records");
  std::istringstream lines(text);
  std::string line;
  std::size_t lineno = 0;
  std::vector<ExperimentRecord> out;

  if (text[first] == '{') {
    while (std::getline(lines, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded()) throw ParseError(lineno, "invalid JSON");
      try {
        out.push_back(record_from_json(j));
      } catch (const DataError& e) {
        throw ParseError(lineno, e.what());
      }
    }
    return out;
  }

  std::map<std::string, std::size_t> col;
  while (std::getline(lines, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (col.empty()) {
      for (std::size_t i = 0; i < cells.size(); ++i) col[cells[i]] = i;
      for (auto name : kFeatureNames) {
        if (!col.count(std::string(name))) {
          throw ParseError(lineno, "missing column '" + std::string(name) + "'");
        }
      }
      if (!col.count("f1")) throw ParseError(lineno, "missing column 'f1'");
      continue;
    }
    if (cells.size() != col.size()) {
      throw ParseError(lineno, "expected " + std::to_string(col.size()) +
                                   " columns, got " + std::to_string(cells.size()));
    }
    ExperimentRecord r;
    std::array<double, kFeatureCount> v{};
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string name(kFeatureNames[i]);
      v[i] = parse_number(cells[col[name]], lineno, name);
    }
    r.features = FeatureVector::from_array(v);
    r.f1 = parse_number(cells[col["f1"]], lineno, "f1");
    for (const char* opt : {"precision", "recall"}) {
      if (col.count(opt) && !cells[col[opt]].empty()) {
        (std::string(opt) == "precision" ? r.precision : r.recall) =
            parse_number(cells[col[opt]], lineno, opt);
      }
    }
    if (col.count("subset_id")) r.subset_id = cells[col["subset_id"]];
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ExperimentRecord> read_records_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_records(in);
}

Json to_json(const CorrelationResult& r) {
  return Json{{"feature", r.feature},   {"n", r.n},
              {"pearson", r.pearson},   {"spearman", r.spearman},
              {"pearson_p", r.pearson_p}, {"spearman_p", r.spearman_p}};
}

Json to_json(const MorrisResult& r) {
  Json features = Json::array();
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    features.push_back({{"name", r.names[i]},
                        {"mu_star", r.mu_star[i]},
                        {"mu", r.mu[i]},
                        {"sigma", r.sigma[i]}});
  }
  return Json{{"method", "morris"},
              {"trajectories", r.trajectories},
              {"levels", r.levels},
              {"delta", r.delta},
              {"features", features}};
}

Json to_json(const SobolResult& r) {
  Json features = Json::array();
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    features.push_back({{"name", r.names[i]},
                        {"s1", r.s1[i]},
                        {"st", r.st[i]},
                        {"s1_ci95", {r.s1_ci95[i][0], r.s1_ci95[i][1]}},
                        {"st_ci95", {r.st_ci95[i][0], r.st_ci95[i][1]}}});
  }
  return Json{{"method", "sobol"},
              {"base_samples", r.base_samples},
              {"bootstrap", r.bootstrap},
              {"features", features}};
}

Json to_json(const AsaResult& r) {
  Json j{{"asa", r.asa}};
  if (!r.per_layer.empty()) j["per_layer"] = r.per_layer;
  return j;
}

Json to_json(const DensityAsaTable& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"label", r.label},
                    {"ned", r.ned},
                    {"mean_asa", r.mean_asa},
                    {"tensors", r.tensors}});
  }
  Json j{{"rows", rows}};
  j["correlation"] = t.correlation ? to_json(*t.correlation) : Json(nullptr);
  if (!t.note.empty()) j["note"] = t.note;
  return j;
}

Json to_json(const Window& w) {
  return Json{{"index", w.index},     {"begin", w.begin},
              {"end", w.end},         {"density", w.density},
              {"barren", w.barren}};
}

Json to_json(const AugmentationResult& r) {
  Json rejected = Json::array();
  for (const auto& x : r.rejected) {
    rejected.push_back({{"sentence_id", x.sentence_id},
                        {"reason", std::string(to_string(x.reason))},
                        {"detail", x.detail}});
  }
  return Json{{"window_index", r.window_index},
              {"accepted", r.accepted.size()},
              {"accepted_from", r.accepted_from},
              {"rejected", rejected},
              {"density_before", r.density_before},
              {"density_after", r.density_after}};
}

Json to_json(const WomRun& run) {
  Json windows = Json::array();
  for (const auto& w : run.windows) windows.push_back(to_json(w));
  Json report = Json::array();
  for (const auto& r : run.report) report.push_back(to_json(r));
  return Json{{"threshold", run.threshold},
              {"windows", windows},
              {"candidates", run.candidates},
              {"accepted", run.accepted},
              {"rejected", run.rejected},
              {"sentences_in", run.augmented.size() - run.accepted},
              {"sentences_out", run.augmented.size()},
              {"verification", "structural placeholder preservation only"},
              {"report", report}};
}

Json to_json(const SweepRow& row) {
  return Json{{"window_size", row.window_size},
              {"threshold", row.threshold},
              {"windows", row.windows},
              {"barren_windows", row.barren_windows},
              {"candidates", row.candidates},
              {"accepted", row.accepted},
              {"rejected", row.rejected},
              {"sentences_out", row.sentences_out}};
}

std::string csv_header_sweep() {
  return "window_size,threshold,windows,barren_windows,candidates,accepted,"
         "rejected,sentences_out";
}

std::string csv_row(const SweepRow& r) {
  return std::to_string(r.window_size) + ',' + format_double(r.threshold) + ',' +
         std::to_string(r.windows) + ',' + std::to_string(r.barren_windows) + ',' +
         std::to_string(r.candidates) + ',' + std::to_string(r.accepted) + ',' +
         std::to_string(r.rejected) + ',' + std::to_string(r.sentences_out);
}

}  // namespace idkit
