#include "idkit/wom.hpp"

#include <cmath>
#include <optional>
#include <sstream>
#include <thread>

#include "idkit/parallel.hpp"

namespace idkit {

namespace {

std::vector<std::string> split_ws(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    pos = text.find_first_not_of(" \t\r\n\v\f", pos);
    if (pos == std::string_view::npos) break;
    auto end = text.find_first_of(" \t\r\n\v\f", pos);
    if (end == std::string_view::npos) end = text.size();
    out.emplace_back(text.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

std::vector<double> window_densities(const Corpus& corpus, std::size_t w,
                                     const FeatureConfig& metric_cfg) {
  std::vector<double> d;
  const auto sentences = corpus.sentences();
  for (std::size_t begin = 0; begin < sentences.size(); begin += w) {
    const std::size_t len = std::min(w, sentences.size() - begin);
    d.push_back(compute_ned(sentences.subspan(begin, len), metric_cfg));
  }
  return d;
}

// Splits placeholders off any glued text. Returns nullopt when the text holds
// a damaged placeholder (prefix without a well-formed number and suffix, or a
// stray suffix).
std::optional<std::string> isolate_placeholders(std::string_view text,
                                                const WomConfig& cfg) {
  const std::string_view prefix = cfg.placeholder_prefix;
  const std::string_view suffix = cfg.placeholder_suffix;
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t at = text.find(prefix, pos);
    std::string_view plain = text.substr(pos, at == std::string_view::npos
                                                   ? std::string_view::npos
                                                   : at - pos);
    if (!suffix.empty() && plain.find(suffix) != std::string_view::npos) {
      return std::nullopt;
    }
    out.append(plain);
    if (at == std::string_view::npos) break;
    std::size_t digits = at + prefix.size();
    std::size_t end = digits;
    while (end < text.size() && text[end] >= '0' && text[end] <= '9') ++end;
    if (end == digits || text.substr(end, suffix.size()) != suffix) {
      return std::nullopt;
    }
    end += suffix.size();
    out += ' ';
    out.append(text.substr(at, end - at));
    out += ' ';
    pos = end;
  }
  return out;
}

}  // namespace

void WomConfig::validate() const {
  if (window_size < 1) throw UsageError("window size W must be >= 1");
  if (!(threshold >= 0) || !std::isfinite(threshold)) {
    throw UsageError("threshold T must be a finite value >= 0");
  }
  if (!(adaptive_fraction > 0) || !std::isfinite(adaptive_fraction)) {
    throw UsageError("adaptive fraction must be > 0");
  }
  if (max_in_flight < 1) throw UsageError("max_in_flight must be >= 1");
  if (placeholder_prefix.empty()) throw UsageError("placeholder prefix is empty");
  if (!(max_failure_rate >= 0 && max_failure_rate <= 1)) {
    throw UsageError("max_failure_rate must lie in [0, 1]");
  }
}

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::kPlaceholderLost:
      return "placeholder_lost";
    case RejectReason::kPlaceholderDuplicated:
      return "placeholder_duplicated";
    case RejectReason::kEntityMutated:
      return "entity_mutated";
    case RejectReason::kBackendError:
      return "backend_error";
  }
  return "unknown";
}

double resolve_threshold(const Corpus& corpus, const WomConfig& cfg,
                         const FeatureConfig& metric_cfg) {
  if (cfg.threshold_mode == ThresholdMode::kFixed) return cfg.threshold;
  const auto d = window_densities(corpus, cfg.window_size, metric_cfg);
  double sum = 0;
  for (double v : d) sum += v;
  return cfg.adaptive_fraction * sum / static_cast<double>(d.size());
}

std::vector<Window> segment_windows(const Corpus& corpus, const WomConfig& cfg,
                                    const FeatureConfig& metric_cfg) {
  cfg.validate();
  if (corpus.empty()) throw DataError("cannot window an empty corpus");
  const auto densities = window_densities(corpus, cfg.window_size, metric_cfg);
  const double threshold = resolve_threshold(corpus, cfg, metric_cfg);
  std::vector<Window> windows;
  for (std::size_t i = 0; i < densities.size(); ++i) {
    const std::size_t begin = i * cfg.window_size;
    const std::size_t end = std::min(corpus.size(), begin + cfg.window_size);
    windows.push_back({i, begin, end, densities[i], densities[i] <= threshold});
  }
  return windows;
}

AugmentationCandidate placeholder_encode(const Sentence& sentence,
                                         const WomConfig& cfg) {
  const auto& spans = sentence.spans();
  if (spans.empty()) {
    throw DataError("sentence " + std::to_string(sentence.id()) +
                    " has no entity to protect");
  }
  AugmentationCandidate c;
  c.sentence_id = sentence.id();
  const auto tokens = sentence.tokens();
  std::size_t next = 0;
  for (std::size_t i = 0; i < tokens.size();) {
    if (!c.placeholdered_text.empty()) c.placeholdered_text += ' ';
    if (next < spans.size() && spans[next].start == i) {
      auto ph = cfg.placeholder(next);
      c.placeholdered_text += ph;
      c.placeholder_map.emplace_back(std::move(ph), spans[next]);
      i = spans[next].end;
      ++next;
    } else {
      c.placeholdered_text += tokens[i].text;
      ++i;
    }
  }
  return c;
}

std::string backtranslate(const AugmentationCandidate& candidate,
                          TranslationBackend& backend, const WomConfig& cfg) {
  auto stage = [&](const std::string& name, const std::string& text,
                   const std::string& from, const std::string& to) {
    for (std::size_t attempt = 0;; ++attempt) {
      try {
        return backend.translate(text, from, to);
      } catch (const std::exception& e) {
        if (attempt >= cfg.retries) throw BacktranslateError(name, e.what());
      }
      std::this_thread::sleep_for(cfg.retry_backoff * (1LL << attempt));
    }
  };
  const auto pivot = stage("forward", candidate.placeholdered_text,
                           cfg.source_language, cfg.pivot_language);
  return stage("back", pivot, cfg.pivot_language, cfg.source_language);
}

std::variant<Sentence, RejectReason> verify_and_restore(
    const AugmentationCandidate& candidate, std::string_view roundtrip,
    const WomConfig& cfg) {
  const auto isolated = isolate_placeholders(roundtrip, cfg);
  if (!isolated) return RejectReason::kEntityMutated;
  const auto words = split_ws(*isolated);

  const std::size_t m = candidate.placeholder_map.size();
  std::vector<std::size_t> seen(m, 0);
  std::vector<std::size_t> order;
  std::vector<std::optional<std::size_t>> slot(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i].rfind(cfg.placeholder_prefix, 0) != 0) continue;
    std::size_t k = 0;
    while (k < m && candidate.placeholder_map[k].first != words[i]) ++k;
    if (k == m) return RejectReason::kEntityMutated;  // unknown placeholder
    ++seen[k];
    order.push_back(k);
    slot[i] = k;
  }
  for (auto n : seen) {
    if (n == 0) return RejectReason::kPlaceholderLost;
  }
  for (auto n : seen) {
    if (n > 1) return RejectReason::kPlaceholderDuplicated;
  }
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (order[k] != k) return RejectReason::kEntityMutated;
  }

  std::vector<Token> tokens;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (!slot[i]) {
      tokens.push_back({words[i], "O"});
      continue;
    }
    const auto& span = candidate.placeholder_map[*slot[i]].second;
    const auto parts = split_ws(span.surface);
    if (parts.size() != span.length()) return RejectReason::kEntityMutated;
    for (std::size_t p = 0; p < parts.size(); ++p) {
      tokens.push_back({parts[p], (p == 0 ? "B-" : "I-") + span.category});
    }
  }
  try {
    return Sentence(candidate.sentence_id, std::move(tokens));
  } catch (const DataError&) {
    return RejectReason::kEntityMutated;
  }
}

WomRun run_wom(const Corpus& corpus, const WomConfig& cfg,
               const FeatureConfig& metric_cfg, TranslationBackend& backend) {
  cfg.validate();
  WomRun run;
  run.windows = segment_windows(corpus, cfg, metric_cfg);
  run.threshold = resolve_threshold(corpus, cfg, metric_cfg);
  if (cfg.mode == WomMode::kOff) {
    run.augmented = corpus;
    return run;
  }

  struct Job {
    std::size_t window = 0;
    AugmentationCandidate candidate;
  };
  std::vector<Job> jobs;
  std::vector<std::size_t> targeted;
  for (const auto& w : run.windows) {
    if (cfg.mode == WomMode::kWom && !w.barren) continue;
    targeted.push_back(w.index);
    for (std::size_t id = w.begin; id < w.end; ++id) {
      if (corpus[id].has_entities()) {
        jobs.push_back({w.index, placeholder_encode(corpus[id], cfg)});
      }
    }
  }

  struct Outcome {
    std::optional<Sentence> sentence;
    RejectReason reason = RejectReason::kBackendError;
    std::string detail;
  };
  std::vector<Outcome> outcomes(jobs.size());
  parallel_for(jobs.size(), cfg.max_in_flight, [&](std::size_t i) {
    auto& out = outcomes[i];
    try {
      const auto text = backtranslate(jobs[i].candidate, backend, cfg);
      auto verdict = verify_and_restore(jobs[i].candidate, text, cfg);
      if (auto* s = std::get_if<Sentence>(&verdict)) {
        out.sentence = std::move(*s);
      } else {
        out.reason = std::get<RejectReason>(verdict);
        out.detail = text;
      }
    } catch (const BackendError& e) {
      out.reason = RejectReason::kBackendError;
      out.detail = e.what();
    }
  });

  std::vector<std::vector<Token>> output;
  std::size_t job = 0;
  std::size_t failures = 0;
  auto target = targeted.begin();
  for (const auto& w : run.windows) {
    for (std::size_t id = w.begin; id < w.end; ++id) {
      const auto t = corpus[id].tokens();
      output.emplace_back(t.begin(), t.end());
    }
    if (target == targeted.end() || *target != w.index) continue;
    ++target;

    AugmentationResult res;
    res.window_index = w.index;
    std::vector<Sentence> window_sentences(
        corpus.sentences().begin() + static_cast<long>(w.begin),
        corpus.sentences().begin() + static_cast<long>(w.end));
    for (; job < jobs.size() && jobs[job].window == w.index; ++job) {
      auto& o = outcomes[job];
      const std::size_t source = jobs[job].candidate.sentence_id;
      if (o.sentence) {
        const auto t = o.sentence->tokens();
        output.emplace_back(t.begin(), t.end());
        window_sentences.push_back(*o.sentence);
        res.accepted_from.push_back(source);
        res.accepted.push_back(std::move(*o.sentence));
      } else {
        if (o.reason == RejectReason::kBackendError) ++failures;
        res.rejected.push_back({source, o.reason, std::move(o.detail)});
      }
    }
    res.density_before = w.density;
    res.density_after = compute_ned(window_sentences, metric_cfg);
    run.accepted += res.accepted.size();
    run.rejected += res.rejected.size();
    run.report.push_back(std::move(res));
  }
  run.candidates = jobs.size();

  if (!jobs.empty() && static_cast<double>(failures) >
                           cfg.max_failure_rate * static_cast<double>(jobs.size())) {
    std::ostringstream msg;
    msg << failures << " of " << jobs.size()
        << " back-translations failed, above the limit of "
        << cfg.max_failure_rate;
    throw WomAborted(msg.str(), std::move(run.report));
  }
  run.augmented = Corpus(std::move(output), corpus.source_path());
  return run;
}

namespace {

SweepRow summarize(const WomRun& run, const WomConfig& cfg) {
  SweepRow row;
  row.window_size = cfg.window_size;
  row.threshold = run.threshold;
  row.windows = run.windows.size();
  for (const auto& w : run.windows) row.barren_windows += w.barren ? 1 : 0;
  row.candidates = run.candidates;
  row.accepted = run.accepted;
  row.rejected = run.rejected;
  row.sentences_out = run.augmented.size();
  return row;
}

}  // namespace

std::vector<SweepRow> sweep_threshold(const Corpus& corpus, WomConfig cfg,
                                      const FeatureConfig& metric_cfg,
                                      TranslationBackend& backend,
                                      const std::vector<double>& thresholds) {
  cfg.threshold_mode = ThresholdMode::kFixed;
  std::vector<SweepRow> rows;
  for (double t : thresholds) {
    cfg.threshold = t;
    rows.push_back(summarize(run_wom(corpus, cfg, metric_cfg, backend), cfg));
  }
  return rows;
}

std::vector<SweepRow> sweep_window(const Corpus& corpus, WomConfig cfg,
                                   const FeatureConfig& metric_cfg,
                                   TranslationBackend& backend,
                                   const std::vector<std::size_t>& sizes) {
  std::vector<SweepRow> rows;
  for (auto w : sizes) {
    cfg.window_size = w;
    rows.push_back(summarize(run_wom(corpus, cfg, metric_cfg, backend), cfg));
  }
  return rows;
}

}  // namespace idkit
