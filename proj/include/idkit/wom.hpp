#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "idkit/backend.hpp"
#include "idkit/corpus.hpp"
#include "idkit/error.hpp"
#include "idkit/metrics.hpp"

namespace idkit {

enum class WomMode { kWom, kGlobalAugment, kOff };
enum class ThresholdMode { kFixed, kAdaptive };

struct WomConfig {
  std::size_t window_size = 30;
  double threshold = 0.07;
  ThresholdMode threshold_mode = ThresholdMode::kFixed;
  // Adaptive threshold = fraction * mean window density of the corpus.
  double adaptive_fraction = 0.8;
  std::string source_language = "en";
  std::string pivot_language = "zh";
  std::uint64_t seed = 0;
  WomMode mode = WomMode::kWom;
  std::size_t max_in_flight = 4;
  std::size_t retries = 2;
  std::chrono::milliseconds retry_backoff{100};
  // Abort when more than this share of candidates end in backend errors.
  double max_failure_rate = 0.5;
  std::string placeholder_prefix = "⟦ENT";
  std::string placeholder_suffix = "⟧";

  void validate() const;
  std::string placeholder(std::size_t n) const {
    return placeholder_prefix + std::to_string(n) + placeholder_suffix;
  }
};

// Sentences [begin, end) of the corpus.
struct Window {
  std::size_t index = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
  double density = 0;
  bool barren = false;
};

// The threshold windows are compared against under `cfg` (fixed, or
// adaptive from the mean window density).
double resolve_threshold(const Corpus& corpus, const WomConfig& cfg,
                         const FeatureConfig& metric_cfg);

// ceil(n / W) consecutive windows; the last may be short. A window is barren
// when its density is <= the resolved threshold.
std::vector<Window> segment_windows(const Corpus& corpus, const WomConfig& cfg,
                                    const FeatureConfig& metric_cfg);

struct AugmentationCandidate {
  std::size_t sentence_id = 0;
  std::string placeholdered_text;
  std::vector<std::pair<std::string, EntitySpan>> placeholder_map;
};

// Replaces each entity span by one placeholder (numbered in textual order)
// and joins all tokens with single spaces. Throws DataError when the
// sentence has no entity.
AugmentationCandidate placeholder_encode(const Sentence& sentence,
                                         const WomConfig& cfg = {});

// Backend failure during a round trip; stage is "forward" or "back".
class BacktranslateError : public BackendError {
 public:
  BacktranslateError(std::string stage, const std::string& what)
      : BackendError(stage + " translation failed: " + what),
        stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// source -> pivot -> source through the backend, retrying each stage
// cfg.retries times with exponential backoff.
std::string backtranslate(const AugmentationCandidate& candidate,
                          TranslationBackend& backend, const WomConfig& cfg);

enum class RejectReason {
  kPlaceholderLost,
  kPlaceholderDuplicated,
  kEntityMutated,
  kBackendError,
};
std::string_view to_string(RejectReason reason);

// Accepts when every placeholder occurs exactly once, in the original order,
// and no unknown placeholder appears. Placeholders are restored to the
// original entity tokens and labels; every other token is labeled O. The
// restored sentence keeps the candidate's sentence id.
std::variant<Sentence, RejectReason> verify_and_restore(
    const AugmentationCandidate& candidate, std::string_view roundtrip,
    const WomConfig& cfg = {});

struct RejectedCandidate {
  std::size_t sentence_id = 0;
  RejectReason reason = RejectReason::kBackendError;
  std::string detail;
};

struct AugmentationResult {
  std::size_t window_index = 0;
  std::vector<std::size_t> accepted_from;  // source sentence id per accept
  std::vector<Sentence> accepted;
  std::vector<RejectedCandidate> rejected;
  double density_before = 0;
  double density_after = 0;
};

struct WomRun {
  Corpus augmented;
  std::vector<AugmentationResult> report;
  std::vector<Window> windows;
  double threshold = 0;
  std::size_t candidates = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

// Thrown when the backend failure rate exceeds cfg.max_failure_rate; holds
// the report gathered so far.
class WomAborted : public BackendError {
 public:
  WomAborted(const std::string& what, std::vector<AugmentationResult> report)
      : BackendError(what), report_(std::move(report)) {}
  const std::vector<AugmentationResult>& report() const { return report_; }

 private:
  std::vector<AugmentationResult> report_;
};

// wom: entity-bearing sentences of barren windows are round-tripped, and the
//      accepted variants follow their window's original sentences;
// global_augment: the same for every entity-bearing sentence;
// off: the corpus is returned unchanged.
// Up to cfg.max_in_flight sentences are in flight at once; the output does
// not depend on completion order.
WomRun run_wom(const Corpus& corpus, const WomConfig& cfg,
               const FeatureConfig& metric_cfg, TranslationBackend& backend);

struct SweepRow {
  std::size_t window_size = 0;
  double threshold = 0;
  std::size_t windows = 0;
  std::size_t barren_windows = 0;
  std::size_t candidates = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t sentences_out = 0;
};

// One WOM run per threshold value (fixed threshold mode).
std::vector<SweepRow> sweep_threshold(const Corpus& corpus, WomConfig cfg,
                                      const FeatureConfig& metric_cfg,
                                      TranslationBackend& backend,
                                      const std::vector<double>& thresholds);
// One WOM run per window size.
std::vector<SweepRow> sweep_window(const Corpus& corpus, WomConfig cfg,
                                   const FeatureConfig& metric_cfg,
                                   TranslationBackend& backend,
                                   const std::vector<std::size_t>& sizes);

}  // namespace idkit
