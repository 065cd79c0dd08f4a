#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace idkit {

// A machine translation service. Implementations must tolerate concurrent
// translate() calls and report failures as BackendError.
class TranslationBackend {
 public:
  virtual ~TranslationBackend() = default;
  virtual std::string translate(const std::string& text,
                                const std::string& source_lang,
                                const std::string& target_lang) = 0;
  virtual std::string name() const = 0;
};

// Offline backend with two deterministic behaviors:
//   identity    returns the input unchanged;
//   paraphrase  replaces words found in a small synonym table, then rotates
//               the non-placeholder tokens by 1 + h % (m - 1) positions,
//               where m is their count and h = fnv1a64(text) ^ seed mixed
//               with the language pair. Placeholders keep their slots.
class MockBackend : public TranslationBackend {
 public:
  enum class Behavior { kIdentity, kParaphrase };

  explicit MockBackend(Behavior behavior, std::uint64_t seed = 0,
                       std::string placeholder_prefix = "⟦ENT");

  std::string translate(const std::string& text, const std::string& source_lang,
                        const std::string& target_lang) override;
  std::string name() const override;

 private:
  Behavior behavior_;
  std::uint64_t seed_;
  std::string placeholder_prefix_;
};

// Adapts a callable; used for tests and language bindings.
class FunctionBackend : public TranslationBackend {
 public:
  using Fn = std::function<std::string(const std::string&, const std::string&,
                                       const std::string&)>;
  explicit FunctionBackend(Fn fn, std::string name = "function")
      : fn_(std::move(fn)), name_(std::move(name)) {}
  std::string translate(const std::string& text, const std::string& source_lang,
                        const std::string& target_lang) override {
    return fn_(text, source_lang, target_lang);
  }
  std::string name() const override { return name_; }

 private:
  Fn fn_;
  std::string name_;
};

struct TranslationCall {
  std::string text;
  std::string source_lang;
  std::string target_lang;
};

// Forwards to another backend and logs every request.
class RecordingBackend : public TranslationBackend {
 public:
  explicit RecordingBackend(TranslationBackend& inner) : inner_(inner) {}
  std::string translate(const std::string& text, const std::string& source_lang,
                        const std::string& target_lang) override;
  std::string name() const override { return inner_.name(); }
  std::vector<TranslationCall> calls() const;

 private:
  TranslationBackend& inner_;
  mutable std::mutex mu_;
  std::vector<TranslationCall> calls_;
};

struct HttpBackendConfig {
  // e.g. "http://127.0.0.1:8080/translate"
  std::string endpoint;
  // Name of the environment variable holding a bearer token; unset or empty
  // variables send no Authorization header.
  std::string token_env = "IDKIT_BACKEND_TOKEN";
  std::chrono::milliseconds timeout{30000};
};

// POSTs {"text", "source_lang", "target_lang"} as JSON and expects
// {"text": ...} back.
class HttpBackend : public TranslationBackend {
 public:
  explicit HttpBackend(HttpBackendConfig cfg);
  std::string translate(const std::string& text, const std::string& source_lang,
                        const std::string& target_lang) override;
  std::string name() const override { return "http:" + cfg_.endpoint; }

 private:
  HttpBackendConfig cfg_;
  std::string base_;  // scheme://host[:port]
  std::string path_;
};

// Record/replay fixture around another backend. The file holds
//   {"interactions": [{"request": {"text", "source_lang", "target_lang"},
//                      "response": {"text"}}, ...]}
class CassetteBackend : public TranslationBackend {
 public:
  // Replays from `path`; unknown requests throw BackendError.
  static std::unique_ptr<CassetteBackend> replay(const std::string& path);
  // Forwards to `inner` and keeps the interactions for save().
  static std::unique_ptr<CassetteBackend> record(TranslationBackend& inner,
                                                 std::string path);

  std::string translate(const std::string& text, const std::string& source_lang,
                        const std::string& target_lang) override;
  std::string name() const override { return "cassette:" + path_; }
  // Writes the interactions (sorted, deduplicated) to the cassette path.
  void save() const;

 private:
  CassetteBackend() = default;
  struct Entry {
    TranslationCall request;
    std::string response;
  };
  TranslationBackend* inner_ = nullptr;
  std::string path_;
  mutable std::mutex mu_;
  std::vector<Entry> entries_;
};

}  // namespace idkit
