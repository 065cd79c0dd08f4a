#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "idkit/asa.hpp"
#include "idkit/atn1.hpp"
#include "idkit/backend.hpp"
#include "idkit/corpus.hpp"
#include "idkit/error.hpp"
#include "idkit/gsa.hpp"
#include "idkit/metrics.hpp"
#include "idkit/resample.hpp"
#include "idkit/serialize.hpp"
#include "idkit/wom.hpp"

namespace py = pybind11;
using namespace idkit;

namespace {

// Report structs cross the boundary as JSON text; the Python side decodes it.
template <typename T>
std::string dump(const T& value) {
  return to_json(value).dump();
}

FeatureConfig make_feature_config(double lambda, const std::string& ned_variant,
                                  const std::string& log_base,
                                  bool ele_case_sensitive,
                                  std::vector<std::string> category_universe,
                                  std::optional<std::string> vocab) {
  FeatureConfig cfg;
  cfg.lambda = lambda;
  if (ned_variant == "eq1") {
    cfg.ned_variant = NedVariant::kEq1;
  } else if (ned_variant == "ratio_log") {
    cfg.ned_variant = NedVariant::kRatioLog;
  } else {
    throw UsageError("unknown ned_variant '" + ned_variant + "'");
  }
  if (log_base == "natural") {
    cfg.log_base = LogBase::kNatural;
  } else if (log_base == "base2") {
    cfg.log_base = LogBase::kBase2;
  } else {
    throw UsageError("unknown log_base '" + log_base + "'");
  }
  cfg.ele_case_sensitive = ele_case_sensitive;
  cfg.category_universe = std::move(category_universe);
  cfg.wordpiece_vocab_path = std::move(vocab);
  cfg.validate();
  cfg.load_vocab();
  return cfg;
}

std::vector<Bounds> to_bounds(const std::vector<std::pair<double, double>>& b) {
  std::vector<Bounds> out;
  out.reserve(b.size());
  for (const auto& [lo, hi] : b) out.push_back({lo, hi});
  return out;
}

AttentionTensor tensor_from_array(
    const py::array_t<float, py::array::c_style | py::array::forcecast>& a,
    const std::string& sentence_id) {
  if (a.ndim() != 4 || a.shape(2) != a.shape(3)) {
    throw DataError("attention array must have shape (layers, heads, L, L)");
  }
  AttentionMeta meta;
  meta.sentence_id = sentence_id;
  AttentionTensor t(a.shape(0), a.shape(1), a.shape(2), std::move(meta));
  std::copy(a.data(), a.data() + a.size(), t.weights.begin());
  return t;
}

py::array_t<float> tensor_to_array(const AttentionTensor& t) {
  py::array_t<float> a({t.layers, t.heads, t.seq_len, t.seq_len});
  std::copy(t.weights.begin(), t.weights.end(), a.mutable_data());
  return a;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the idkit NER corpus diagnostics toolkit.";

  auto error = py::register_exception<Error>(m, "Error");
  auto data_error = py::register_exception<DataError>(m, "DataError", error);
  py::register_exception<UsageError>(m, "UsageError", error);
  py::register_exception<BackendError>(m, "BackendError", error);
  py::register_exception<ParseError>(m, "ParseError", data_error);
  py::register_exception<FormatError>(m, "FormatError", data_error);

  m.attr("FEATURE_NAMES") = std::vector<std::string>(kFeatureNames.begin(),
                                                     kFeatureNames.end());

  py::class_<FeatureConfig>(m, "FeatureConfig")
      .def(py::init(&make_feature_config), py::arg("lambda_") = 0.1,
           py::arg("ned_variant") = "eq1", py::arg("log_base") = "natural",
           py::arg("ele_case_sensitive") = false,
           py::arg("category_universe") = std::vector<std::string>{},
           py::arg("vocab") = std::nullopt)
      .def_readonly("lambda_", &FeatureConfig::lambda)
      .def_readonly("category_universe", &FeatureConfig::category_universe);

  py::class_<Corpus>(m, "Corpus")
      .def(py::init([](const std::vector<std::vector<std::pair<std::string, std::string>>>&
                           sentences) {
             std::vector<std::vector<Token>> tokens;
             for (const auto& s : sentences) {
               auto& row = tokens.emplace_back();
               for (const auto& [text, label] : s) row.push_back({text, label});
             }
             return Corpus(std::move(tokens));
           }),
           py::arg("sentences"))
      .def_static(
          "read",
          [](const std::string& path, bool strict) {
            auto r = read_conll_file(path, strict ? RepairPolicy::kStrict
                                                  : RepairPolicy::kCoerce);
            return py::make_tuple(std::move(r.corpus), r.repairs);
          },
          py::arg("path"), py::arg("strict") = false,
          "Reads a CoNLL file; returns (corpus, repairs).")
      .def_static(
          "parse",
          [](const std::string& text, bool strict) {
            auto r = parse_conll_string(text, strict ? RepairPolicy::kStrict
                                                     : RepairPolicy::kCoerce);
            return py::make_tuple(std::move(r.corpus), r.repairs);
          },
          py::arg("text"), py::arg("strict") = false)
      .def("to_conll", &to_conll_string)
      .def("write", [](const Corpus& c, const std::string& path) {
        write_conll_file(c, path);
      })
      .def("__len__", &Corpus::size)
      .def_property_readonly("token_count", &Corpus::token_count)
      .def_property_readonly("span_count", &Corpus::span_count)
      .def_property_readonly("categories", &Corpus::categories)
      .def("sentence", [](const Corpus& c, std::size_t i) {
        if (i >= c.size()) throw py::index_error();
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& t : c[i].tokens()) out.emplace_back(t.text, t.label);
        return out;
      })
      .def("spans", [](const Corpus& c) {
        std::vector<py::tuple> out;
        for (const auto& s : c.sentences()) {
          for (const auto& e : s.spans()) {
            out.push_back(py::make_tuple(e.sentence_id, e.start, e.end,
                                         e.category, e.surface));
          }
        }
        return out;
      })
      .def("__eq__", &Corpus::operator==);

  m.def(
      "compute_features",
      [](const Corpus& c, const FeatureConfig& cfg) {
        return dump(compute_features(c, cfg));
      },
      py::arg("corpus"), py::arg("config") = FeatureConfig{});
  m.def("o_label_proportion", &o_label_proportion);
  m.def("score", [](const Corpus& gold, const Corpus& pred) {
    return dump(score_spans(gold, pred));
  });

  m.def(
      "density_family",
      [](const Corpus& c, const std::vector<double>& rates, std::uint64_t seed,
         const FeatureConfig& cfg, std::size_t rarity_bins) {
        std::vector<std::string> out;
        for (const auto& mf : build_density_family(c, rates, seed, cfg, rarity_bins)) {
          out.push_back(dump(mf));
        }
        return out;
      },
      py::arg("corpus"), py::arg("rates"), py::arg("seed") = 0,
      py::arg("config") = FeatureConfig{}, py::arg("rarity_bins") = 4);
  m.def(
      "stratified_subsets",
      [](const Corpus& c, std::size_t count, std::uint64_t seed,
         std::size_t rarity_bins, bool rarity_control, const FeatureConfig& cfg) {
        SubsetSpec spec;
        spec.seed = seed;
        spec.count = count;
        spec.rarity_bins = rarity_bins;
        spec.rarity_control = rarity_control;
        std::vector<std::string> out;
        for (const auto& mf : build_stratified_subsets(c, spec, cfg)) {
          out.push_back(dump(mf));
        }
        return out;
      },
      py::arg("corpus"), py::arg("count") = 23, py::arg("seed") = 0,
      py::arg("rarity_bins") = 4, py::arg("rarity_control") = true,
      py::arg("config") = FeatureConfig{});
  m.def("materialize", [](const Corpus& c, const std::string& manifest_json) {
    return materialize(c, manifest_from_json(nlohmann::json::parse(manifest_json)));
  });

  m.def(
      "correlate",
      [](const std::string& records_path, const std::string& feature) {
        return dump(correlate(read_records_file(records_path), feature));
      },
      py::arg("records"), py::arg("feature"));
  m.def(
      "correlate_series",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        return dump(correlate_series(x, y));
      },
      py::arg("x"), py::arg("y"));

  py::class_<ResponseSurface>(m, "Surface")
      .def_static(
          "knn",
          [](const std::string& records_path, std::size_t k) {
            return fit_knn_surrogate(read_records_file(records_path), k);
          },
          py::arg("records"), py::arg("k") = 5)
      .def_static(
          "function",
          [](std::vector<std::pair<double, double>> bounds, py::function fn,
             std::vector<std::string> names) {
            // The callback may run on a worker thread with the GIL released.
            auto call = [fn](std::span<const double> x) {
              py::gil_scoped_acquire gil;
              return fn(std::vector<double>(x.begin(), x.end())).cast<double>();
            };
            return ResponseSurface::from_function(to_bounds(bounds), call,
                                                  std::move(names));
          },
          py::arg("bounds"), py::arg("fn"),
          py::arg("names") = std::vector<std::string>{})
      .def_property_readonly("dims", &ResponseSurface::dims)
      .def_property_readonly("names", &ResponseSurface::names)
      .def("__call__", [](const ResponseSurface& s, const std::vector<double>& x) {
        py::gil_scoped_release release;
        return s.evaluate(x);
      });

  m.def(
      "morris",
      [](const ResponseSurface& s, std::size_t trajectories, std::size_t levels,
         std::uint64_t seed, std::size_t workers) {
        MorrisOptions o{trajectories, levels, seed, workers};
        py::gil_scoped_release release;
        return dump(run_morris(s, o));
      },
      py::arg("surface"), py::arg("trajectories") = 20, py::arg("levels") = 6,
      py::arg("seed") = 0, py::arg("workers") = 1);
  m.def(
      "sobol",
      [](const ResponseSurface& s, std::size_t base_samples, std::size_t bootstrap,
         std::uint64_t seed, std::size_t workers) {
        SobolOptions o{base_samples, seed, bootstrap, workers};
        py::gil_scoped_release release;
        return dump(run_sobol(s, o));
      },
      py::arg("surface"), py::arg("base_samples") = 1024,
      py::arg("bootstrap") = 1000, py::arg("seed") = 0, py::arg("workers") = 1);

  m.def(
      "compute_asa",
      [](const py::array_t<float, py::array::c_style | py::array::forcecast>& a,
         const std::string& mode, const std::string& weight, bool per_layer) {
        AsaConfig cfg;
        if (mode == "full_2d") {
          cfg.mode = AsaMode::kFull2d;
        } else if (mode != "row_wise_1d") {
          throw UsageError("unknown mode '" + mode + "'");
        }
        if (weight == "normalized_frequency") {
          cfg.weight = AsaWeight::kNormalizedFrequency;
        } else if (weight != "bin_index") {
          throw UsageError("unknown weight '" + weight + "'");
        }
        if (per_layer) cfg.aggregate = AsaAggregate::kPerLayer;
        return dump(compute_asa(tensor_from_array(a, ""), cfg));
      },
      py::arg("attention"), py::arg("mode") = "row_wise_1d",
      py::arg("weight") = "bin_index", py::arg("per_layer") = false);
  m.def(
      "write_attention",
      [](const std::string& path, const std::vector<py::array_t<float>>& arrays,
         const std::vector<std::string>& sentence_ids) {
        if (!sentence_ids.empty() && sentence_ids.size() != arrays.size()) {
          throw UsageError("sentence_ids must match the number of arrays");
        }
        std::vector<AttentionTensor> tensors;
        for (std::size_t i = 0; i < arrays.size(); ++i) {
          tensors.push_back(tensor_from_array(
              arrays[i], sentence_ids.empty() ? std::to_string(i) : sentence_ids[i]));
        }
        write_attention_file(path, tensors);
      },
      py::arg("path"), py::arg("arrays"),
      py::arg("sentence_ids") = std::vector<std::string>{});
  m.def("read_attention", [](const std::string& path) {
    std::vector<py::tuple> out;
    for (const auto& t : read_attention_file(path)) {
      out.push_back(py::make_tuple(t.meta.sentence_id, tensor_to_array(t)));
    }
    return out;
  });

  m.def(
      "run_wom",
      [](const Corpus& c, py::object translate, std::size_t window_size,
         double threshold, const std::string& mode, std::uint64_t seed,
         std::size_t max_in_flight, const FeatureConfig& metric_cfg) {
        WomConfig cfg;
        cfg.window_size = window_size;
        cfg.threshold = threshold;
        cfg.seed = seed;
        cfg.max_in_flight = max_in_flight;
        cfg.retry_backoff = std::chrono::milliseconds(0);
        if (mode == "global_augment") {
          cfg.mode = WomMode::kGlobalAugment;
        } else if (mode == "off") {
          cfg.mode = WomMode::kOff;
        } else if (mode != "wom") {
          throw UsageError("unknown mode '" + mode + "'");
        }
        std::unique_ptr<TranslationBackend> backend;
        if (translate.is_none()) {
          backend = std::make_unique<MockBackend>(MockBackend::Behavior::kIdentity,
                                                  seed);
        } else if (py::isinstance<py::str>(translate)) {
          const auto name = translate.cast<std::string>();
          if (name == "identity") {
            backend = std::make_unique<MockBackend>(MockBackend::Behavior::kIdentity,
                                                    seed);
          } else if (name == "paraphrase") {
            backend = std::make_unique<MockBackend>(
                MockBackend::Behavior::kParaphrase, seed);
          } else {
            throw UsageError("unknown mock backend '" + name + "'");
          }
        } else {
          auto fn = translate.cast<py::function>();
          backend = std::make_unique<FunctionBackend>(
              [fn](const std::string& text, const std::string& src,
                   const std::string& dst) {
                py::gil_scoped_acquire gil;
                return fn(text, src, dst).cast<std::string>();
              },
              "python");
        }
        WomRun run;
        {
          py::gil_scoped_release release;
          run = run_wom(c, cfg, metric_cfg, *backend);
        }
        return py::make_tuple(std::move(run.augmented), dump(run));
      },
      py::arg("corpus"), py::arg("translate") = py::none(),
      py::arg("window_size") = 30, py::arg("threshold") = 0.07,
      py::arg("mode") = "wom", py::arg("seed") = 0, py::arg("max_in_flight") = 4,
      py::arg("config") = FeatureConfig{});

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process; returns (code, out, err).");
}
