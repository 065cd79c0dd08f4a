#include "idkit/backend.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string_view>

#include "idkit/error.hpp"
#include "idkit/random.hpp"

#if defined(IDKIT_HTTPS)
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

namespace idkit {

namespace {

std::vector<std::string> split_ws(const std::string& text) {
  std::istringstream is(text);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::string join(const std::vector<std::string>& toks) {
  std::string out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i) out += ' ';
    out += toks[i];
  }
  return out;
}

const std::map<std::string, std::string, std::less<>>& synonyms() {
  static const std::map<std::string, std::string, std::less<>> table = {
      {"4", "for"},          {"deadline", "due date"},
      {"extends", "pushes back"}, {"gonna", "going to"},
      {"good", "nice"},      {"got", "have"},
      {"great", "awesome"},  {"living", "staying"},
      {"lol", "haha"},       {"love", "adore"},
      {"really", "truly"},   {"tix", "tickets"},
      {"u", "you"},          {"wanna", "want to"},
  };
  return table;
}

}  // namespace

MockBackend::MockBackend(Behavior behavior, std::uint64_t seed,
                         std::string placeholder_prefix)
    : behavior_(behavior), seed_(seed),
      placeholder_prefix_(std::move(placeholder_prefix)) {}

std::string MockBackend::name() const {
  return behavior_ == Behavior::kIdentity ? "mock:identity" : "mock:paraphrase";
}

std::string MockBackend::translate(const std::string& text,
                                   const std::string& source_lang,
                                   const std::string& target_lang) {
  if (behavior_ == Behavior::kIdentity) return text;

  std::vector<std::string> tokens;
  for (auto& tok : split_ws(text)) {
    const auto it = synonyms().find(tok);
    if (it == synonyms().end()) {
      tokens.push_back(std::move(tok));
    } else {
      for (auto& w : split_ws(it->second)) tokens.push_back(std::move(w));
    }
  }

  std::vector<std::size_t> slots;  // positions of non-placeholder tokens
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].rfind(placeholder_prefix_, 0) != 0) slots.push_back(i);
  }
  const std::size_t m = slots.size();
  if (m >= 2) {
    const std::uint64_t h = splitmix64(
        fnv1a64(text) ^ seed_ ^ fnv1a64(source_lang + ">" + target_lang));
    const std::size_t shift = 1 + static_cast<std::size_t>(h % (m - 1));
    std::vector<std::string> moved(m);
    for (std::size_t j = 0; j < m; ++j) {
      moved[(j + shift) % m] = tokens[slots[j]];
    }
    for (std::size_t j = 0; j < m; ++j) tokens[slots[j]] = std::move(moved[j]);
  }
  return join(tokens);
}

std::string RecordingBackend::translate(const std::string& text,
                                        const std::string& source_lang,
                                        const std::string& target_lang) {
  {
    std::lock_guard lock(mu_);
    calls_.push_back({text, source_lang, target_lang});
  }
  return inner_.translate(text, source_lang, target_lang);
}

std::vector<TranslationCall> RecordingBackend::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

HttpBackend::HttpBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {
  const auto scheme_end = cfg_.endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw UsageError("backend endpoint must be an http(s) URL: " + cfg_.endpoint);
  }
  const auto path_start = cfg_.endpoint.find('/', scheme_end + 3);
  base_ = cfg_.endpoint.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : cfg_.endpoint.substr(path_start);
#if !defined(IDKIT_HTTPS)
  if (cfg_.endpoint.rfind("https://", 0) == 0) {
    throw UsageError("this build has no TLS support; use an http:// endpoint");
  }
#endif
}

std::string HttpBackend::translate(const std::string& text,
                                   const std::string& source_lang,
                                   const std::string& target_lang) {
  httplib::Client client(base_);
  const auto secs = cfg_.timeout.count() / 1000;
  const auto usecs = (cfg_.timeout.count() % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (const char* token = std::getenv(cfg_.token_env.c_str()); token && *token) {
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }
  const nlohmann::json body = {{"text", text},
                               {"source_lang", source_lang},
                               {"target_lang", target_lang}};
  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) {
    throw BackendError("request to " + cfg_.endpoint + " failed: " +
                       httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw BackendError("backend returned HTTP " + std::to_string(res->status));
  }
  const auto reply = nlohmann::json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.is_object() || !reply.contains("text") ||
      !reply["text"].is_string()) {
    throw BackendError("backend response lacks a string \"text\" field");
  }
  return reply["text"].get<std::string>();
}

std::unique_ptr<CassetteBackend> CassetteBackend::replay(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open cassette " + path);
  const auto doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.contains("interactions")) {
    throw DataError("cassette " + path + " is not a valid fixture");
  }
  std::unique_ptr<CassetteBackend> c(new CassetteBackend());
  c->path_ = path;
  for (const auto& it : doc["interactions"]) {
    const auto& req = it.at("request");
    c->entries_.push_back(
        {{req.at("text").get<std::string>(), req.at("source_lang").get<std::string>(),
          req.at("target_lang").get<std::string>()},
         it.at("response").at("text").get<std::string>()});
  }
  return c;
}

std::unique_ptr<CassetteBackend> CassetteBackend::record(TranslationBackend& inner,
                                                         std::string path) {
  std::unique_ptr<CassetteBackend> c(new CassetteBackend());
  c->inner_ = &inner;
  c->path_ = std::move(path);
  return c;
}

std::string CassetteBackend::translate(const std::string& text,
                                       const std::string& source_lang,
                                       const std::string& target_lang) {
  if (inner_ == nullptr) {
    std::lock_guard lock(mu_);
    for (const auto& e : entries_) {
      if (e.request.text == text && e.request.source_lang == source_lang &&
          e.request.target_lang == target_lang) {
        return e.response;
      }
    }
    throw BackendError("cassette " + path_ + " has no response for " +
                       source_lang + ">" + target_lang + " '" + text + "'");
  }
  auto reply = inner_->translate(text, source_lang, target_lang);
  std::lock_guard lock(mu_);
  entries_.push_back({{text, source_lang, target_lang}, reply});
  return reply;
}

void CassetteBackend::save() const {
  std::vector<Entry> sorted;
  {
    std::lock_guard lock(mu_);
    sorted = entries_;
  }
  auto key = [](const Entry& e) {
    return std::tie(e.request.text, e.request.source_lang, e.request.target_lang);
  };
  std::sort(sorted.begin(), sorted.end(),
            [&](const Entry& a, const Entry& b) { return key(a) < key(b); });
  sorted.erase(std::unique(sorted.begin(), sorted.end(),
                           [&](const Entry& a, const Entry& b) {
                             return key(a) == key(b);
                           }),
               sorted.end());
  nlohmann::ordered_json doc;
  doc["interactions"] = nlohmann::ordered_json::array();
  for (const auto& e : sorted) {
    doc["interactions"].push_back(
        {{"request",
          {{"text", e.request.text},
           {"source_lang", e.request.source_lang},
           {"target_lang", e.request.target_lang}}},
         {"response", {{"text", e.response}}}});
  }
  std::ofstream out(path_);
  if (!out) throw Error("cannot write cassette " + path_);
  out << doc.dump(2) << '\n';
}

}  // namespace idkit
