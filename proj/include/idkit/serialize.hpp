#pragma once

#include <istream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "idkit/asa.hpp"
#include "idkit/gsa.hpp"
#include "idkit/metrics.hpp"
#include "idkit/resample.hpp"
#include "idkit/wom.hpp"

// JSON and CSV forms of every report type. CSV column orders:
//   FeatureVector     ned,norm_std,redundancy,ele,ssr,vocab_entropy
//   ScoreReport       tp,fp,fn,precision,recall,f1,missed_rate
//   ExperimentRecord  subset_id,<FeatureVector columns>,f1,precision,recall
//   SweepRow          window_size,threshold,windows,barren_windows,
//                     candidates,accepted,rejected,sentences_out
namespace idkit {

using Json = nlohmann::ordered_json;

Json to_json(const FeatureVector& fv);
FeatureVector feature_vector_from_json(const nlohmann::json& j);
std::string csv_header_features();
std::string csv_row(const FeatureVector& fv);

Json to_json(const ScoreReport& r);
std::string csv_header_score();
std::string csv_row(const ScoreReport& r);

Json to_json(const SubsetSpec& s);
Json to_json(const SubsetManifest& m);
SubsetManifest manifest_from_json(const nlohmann::json& j);

Json to_json(const ExperimentRecord& r);
ExperimentRecord record_from_json(const nlohmann::json& j);
std::string csv_header_record();
std::string csv_row(const ExperimentRecord& r);
// CSV (header required, columns by name) or JSON lines, chosen by the
// first non-blank character.
std::vector<ExperimentRecord> read_records(std::istream& in);
std::vector<ExperimentRecord> read_records_file(const std::string& path);

Json to_json(const CorrelationResult& r);
Json to_json(const MorrisResult& r);
Json to_json(const SobolResult& r);
Json to_json(const AsaResult& r);
Json to_json(const DensityAsaTable& t);
Json to_json(const Window& w);
Json to_json(const AugmentationResult& r);
Json to_json(const WomRun& run);
Json to_json(const SweepRow& row);
std::string csv_header_sweep();
std::string csv_row(const SweepRow& row);

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace idkit
