#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "panonav/decision.hpp"
#include "panonav/error.hpp"

namespace panonav {

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string content;
  std::vector<std::string> attachments_b64;  // optional inline images
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  double timeout_s = 30.0;
};

inline uint64_t fnv1a(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

// Stable identity of a request, used to match replays against recordings.
// Attachments enter by hash so keys stay small.
inline std::string canonical_request_key(const ChatRequest& req) {
  nlohmann::ordered_json j;
  j["model"] = req.model;
  j["temperature"] = req.temperature;
  auto& msgs = j["messages"] = nlohmann::ordered_json::array();
  for (const auto& m : req.messages) {
    nlohmann::ordered_json msg;
    msg["role"] = m.role;
    msg["content"] = m.content;
    if (!m.attachments_b64.empty()) {
      auto& at = msg["attachments"] = nlohmann::ordered_json::array();
      for (const auto& a : m.attachments_b64) at.push_back(fnv1a(a));
    }
    msgs.push_back(std::move(msg));
  }
  return j.dump();
}

inline nlohmann::ordered_json chat_request_body(const ChatRequest& req) {
  nlohmann::ordered_json body;
  body["model"] = req.model;
  auto& msgs = body["messages"] = nlohmann::ordered_json::array();
  for (const auto& m : req.messages) {
    nlohmann::ordered_json msg;
    msg["role"] = m.role;
    if (m.attachments_b64.empty()) {
      msg["content"] = m.content;
    } else {
      auto& parts = msg["content"] = nlohmann::ordered_json::array();
      parts.push_back({{"type", "text"}, {"text", m.content}});
      for (const auto& a : m.attachments_b64)
        parts.push_back(
            {{"type", "image_url"}, {"image_url", {{"url", "data:image/png;base64," + a}}}});
    }
    msgs.push_back(std::move(msg));
  }
  body["temperature"] = req.temperature;
  return body;
}

struct TranscriptEntry {
  std::string key;
  nlohmann::ordered_json request;
  int status = 0;  // 0 = transport failure before a status arrived
  std::string content;
  std::string error;
  int tokens = 0;
  std::string time;

  bool ok() const { return status >= 200 && status < 300 && error.empty(); }
};

inline std::string utc_now_iso8601() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Append-only log of every remote attempt, also usable as a replay source:
// lookups return the last successful response for a request key and never
// consume entries, so a repeated identical request replays identically.
class Transcript {
 public:
  void append(TranscriptEntry entry) {
    std::lock_guard<std::mutex> lock(*mu_);
    if (entry.ok()) replies_[entry.key] = entry.content;
    entries_.push_back(std::move(entry));
  }

  std::optional<std::string> lookup(const std::string& key) const {
    std::lock_guard<std::mutex> lock(*mu_);
    auto it = replies_.find(key);
    if (it == replies_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<TranscriptEntry> entries() const {
    std::lock_guard<std::mutex> lock(*mu_);
    return entries_;
  }

  size_t size() const {
    std::lock_guard<std::mutex> lock(*mu_);
    return entries_.size();
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    require(out.good(), Errc::invalid_input, "cannot write transcript: " + path);
    std::lock_guard<std::mutex> lock(*mu_);
    for (const auto& e : entries_) {
      nlohmann::ordered_json j;
      j["key"] = e.key;
      j["request"] = e.request;
      j["status"] = e.status;
      j["content"] = e.content;
      j["error"] = e.error;
      j["tokens"] = e.tokens;
      j["time"] = e.time;
      out << j.dump() << "\n";
    }
  }

  static Transcript load(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), Errc::invalid_input, "cannot open transcript: " + path);
    Transcript t;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        fail(Errc::invalid_input,
             "bad transcript line " + std::to_string(lineno) + ": " + e.what());
      }
      TranscriptEntry e;
      e.key = j.value("key", "");
      if (j.contains("request")) e.request = j["request"];
      e.status = j.value("status", 0);
      e.content = j.value("content", "");
      e.error = j.value("error", "");
      e.tokens = j.value("tokens", 0);
      e.time = j.value("time", "");
      t.append(std::move(e));
    }
    return t;
  }

 private:
  // Pointer-held so transcripts stay movable.
  mutable std::unique_ptr<std::mutex> mu_ = std::make_unique<std::mutex>();
  std::vector<TranscriptEntry> entries_;
  std::map<std::string, std::string> replies_;
};

// Chat-completions client with retries and record/replay. In replay mode no
// socket is ever opened; a global attempt counter lets tests assert that.
class LlmClient {
 public:
  enum class Mode { live, replay };

  struct Options {
    Mode mode = Mode::live;
    std::string endpoint;  // http://host:port[/prefix]
    std::string api_key;
    std::string model = "generic-llm";
    std::string mllm_model = "generic-mllm";
    int max_retries = 2;
    double backoff_s = 0.25;
    double timeout_s = 30.0;
    bool forbid_network = false;
  };

  explicit LlmClient(Options opts) : opts_(std::move(opts)) {}

  static Options options_from_env(Mode mode = Mode::live) {
    Options o;
    o.mode = mode;
    if (const char* v = std::getenv("PANONAV_LLM_ENDPOINT")) o.endpoint = v;
    if (const char* v = std::getenv("PANONAV_LLM_API_KEY")) o.api_key = v;
    if (const char* v = std::getenv("PANONAV_LLM_MODEL")) o.model = v;
    if (const char* v = std::getenv("PANONAV_MLLM_MODEL")) o.mllm_model = v;
    return o;
  }

  const Options& options() const { return opts_; }

  void record_to(Transcript* t) { record_ = t; }
  void replay_from(const Transcript* t) { replay_ = t; }

  static uint64_t network_attempts() { return network_attempts_.load(); }

  std::string complete(const ChatRequest& req) {
    std::string key = canonical_request_key(req);
    if (opts_.mode == Mode::replay) {
      require(replay_ != nullptr, Errc::invalid_input, "replay mode without a transcript");
      auto hit = replay_->lookup(key);
      if (!hit)
        fail(Errc::replay, "no recorded response for request (model " + req.model + ")");
      return *hit;
    }

    require(!opts_.endpoint.empty(), Errc::invalid_input,
            "remote endpoint not configured (set PANONAV_LLM_ENDPOINT)");
    require(opts_.endpoint.rfind("http://", 0) == 0, Errc::invalid_input,
            "only http:// endpoints are supported; front an https service with a local proxy");

    auto [base, prefix] = split_endpoint(opts_.endpoint);
    nlohmann::ordered_json body = chat_request_body(req);
    std::string body_text = body.dump();
    std::string last_error = "no attempts made";

    for (int attempt = 0; attempt <= opts_.max_retries; ++attempt) {
      if (attempt > 0)
        std::this_thread::sleep_for(
            std::chrono::duration<double>(opts_.backoff_s * (1 << (attempt - 1))));
      require(!opts_.forbid_network, Errc::contract,
              "network attempt while networking is forbidden");
      ++network_attempts_;

      httplib::Client cli(base);
      cli.set_connection_timeout(std::chrono::duration<double>(req.timeout_s));
      cli.set_read_timeout(std::chrono::duration<double>(req.timeout_s));
      httplib::Headers headers;
      if (!opts_.api_key.empty()) headers.insert({"Authorization", "Bearer " + opts_.api_key});

      TranscriptEntry entry;
      entry.key = key;
      entry.request = body;
      entry.time = utc_now_iso8601();

      auto res = cli.Post(prefix + "/chat/completions", headers, body_text, "application/json");
      if (!res) {
        entry.error = "transport: " + httplib::to_string(res.error());
        last_error = entry.error;
        record(entry);
        continue;
      }
      entry.status = res->status;
      if (res->status < 200 || res->status >= 300) {
        entry.error = "http status " + std::to_string(res->status);
        last_error = entry.error;
        record(entry);
        continue;
      }
      auto parsed = parse_completion_body(res->body);
      if (!parsed) {
        entry.error = "unparseable completion body";
        last_error = entry.error;
        record(entry);
        continue;
      }
      entry.content = parsed->first;
      entry.tokens = parsed->second;
      record(entry);
      return entry.content;
    }
    fail(Errc::transport, "remote call failed after " + std::to_string(opts_.max_retries + 1) +
                              " attempts: " + last_error);
  }

 private:
  static std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    size_t host_start = std::string("http://").size();
    size_t slash = endpoint.find('/', host_start);
    if (slash == std::string::npos) return {endpoint, ""};
    std::string prefix = endpoint.substr(slash);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {endpoint.substr(0, slash), prefix};
  }

  static std::optional<std::pair<std::string, int>> parse_completion_body(
      const std::string& body) {
    try {
      auto j = nlohmann::json::parse(body);
      const auto& content = j.at("choices").at(0).at("message").at("content");
      int tokens = 0;
      if (j.contains("usage") && j["usage"].contains("total_tokens"))
        tokens = j["usage"]["total_tokens"].get<int>();
      return std::make_pair(content.get<std::string>(), tokens);
    } catch (const nlohmann::json::exception&) {
      return std::nullopt;
    }
  }

  void record(const TranscriptEntry& entry) {
    if (record_) record_->append(entry);
  }

  Options opts_;
  Transcript* record_ = nullptr;
  const Transcript* replay_ = nullptr;
  static inline std::atomic<uint64_t> network_attempts_{0};
};

// Versioned prompt templates with {{PLACEHOLDER}} substitution. Shipped
// defaults are compiled in; a directory of <name>.txt files overrides them.
class PromptLibrary {
 public:
  static PromptLibrary builtin() {
    PromptLibrary lib;
    lib.templates_["decision_v1"] =
        "You are guiding a robot through an indoor scene toward a target object.\n"
        "Target: {{TARGET}}\n"
        "\n"
        "Directional descriptions of the surroundings:\n"
        "{{LOCAL_DESCRIPTIONS}}\n"
        "\n"
        "{{GLOBAL_SUMMARY}}\n"
        "{{HISTORY_SECTION}}"
        "Pick the sector (1-6) the robot should head toward next. If the target is visible in\n"
        "some sector, pick that sector and set found to true. Avoid directions that look like\n"
        "places already covered by the history.\n"
        "Reply with exactly one JSON object: {\"sector\": <1-6>, \"found\": <true|false>, "
        "\"reason\": \"<short>\"}\n";
    lib.templates_["parse_local_v1"] =
        "You are converting one directional observation from a robot into a structured parse.\n"
        "Target object: {{TARGET}}\n"
        "\n"
        "Observation:\n"
        "{{VIEW}}\n"
        "\n"
        "Reply with exactly one JSON object:\n"
        "{\"room\": \"<room type or unknown>\", \"target_likelihood\": <0..1>, "
        "\"richness\": <0..1>, \"summary\": \"<one sentence>\"}\n";
    lib.templates_["summarize_v1"] =
        "You are summarizing a robot's panoramic observations at one waypoint.\n"
        "\n"
        "Sector parses:\n"
        "{{LOCAL_DESCRIPTIONS}}\n"
        "\n"
        "Reply with exactly one JSON object: {\"room\": \"<room type or unknown>\", "
        "\"summary\": \"<one sentence>\"}\n";
    lib.templates_["one_step_v1"] =
        "You are guiding a robot through an indoor scene toward a target object.\n"
        "Target: {{TARGET}}\n"
        "\n"
        "Raw directional observations, one per sector:\n"
        "{{LOCAL_DESCRIPTIONS}}\n"
        "\n"
        "{{HISTORY_SECTION}}"
        "Decide directly, without writing out an intermediate scene parse.\n"
        "Reply with exactly one JSON object: {\"sector\": <1-6>, \"found\": <true|false>, "
        "\"reason\": \"<short>\"}\n";
    return lib;
  }

  void load_dir(const std::string& dir) {
    for (auto& [name, text] : templates_) {
      std::ifstream in(dir + "/" + name + ".txt");
      if (!in.good()) continue;
      std::ostringstream buf;
      buf << in.rdbuf();
      text = buf.str();
    }
  }

  const std::string& get(const std::string& name) const {
    auto it = templates_.find(name);
    require(it != templates_.end(), Errc::invalid_input, "unknown prompt template: " + name);
    return it->second;
  }

  std::string render(const std::string& name,
                     const std::map<std::string, std::string>& subs) const {
    std::string out = get(name);
    for (const auto& [key, value] : subs) {
      std::string token = "{{" + key + "}}";
      size_t pos = 0;
      while ((pos = out.find(token, pos)) != std::string::npos) {
        out.replace(pos, token.size(), value);
        pos += value.size();
      }
    }
    require(out.find("{{") == std::string::npos, Errc::contract,
            "unresolved placeholder in template " + name);
    return out;
  }

 private:
  std::map<std::string, std::string> templates_;
};

enum class PromptMode { decoupled, one_step };

inline std::string history_section(const std::vector<std::string>& queue_texts) {
  if (queue_texts.empty()) return "";
  std::ostringstream out;
  out << "Exploration history (oldest first):\n";
  for (const auto& t : queue_texts) out << "- " << t << "\n";
  out << "\n";
  return out.str();
}

inline ChatRequest render_decision_prompt(const std::vector<std::string>& ld_texts,
                                          const std::string& gs_text,
                                          const std::optional<std::vector<std::string>>& queue,
                                          const std::string& target, PromptMode mode,
                                          const PromptLibrary& lib, const std::string& model,
                                          double timeout_s = 30.0) {
  std::ostringstream lds;
  for (size_t i = 0; i < ld_texts.size(); ++i) {
    if (i) lds << "\n";
    lds << ld_texts[i];
  }
  std::map<std::string, std::string> subs;
  subs["TARGET"] = target;
  subs["LOCAL_DESCRIPTIONS"] = lds.str();
  subs["GLOBAL_SUMMARY"] = gs_text;
  subs["HISTORY_SECTION"] = queue ? history_section(*queue) : "";
  ChatRequest req;
  req.model = model;
  req.temperature = 0.0;
  req.timeout_s = timeout_s;
  req.messages.push_back({"system",
                          "You control a robot in a grid building. Answer with one JSON object "
                          "and nothing else.",
                          {}});
  req.messages.push_back(
      {"user",
       lib.render(mode == PromptMode::decoupled ? "decision_v1" : "one_step_v1", subs),
       {}});
  return req;
}

// Best-effort extraction of the first JSON object in a model reply: the
// whole text, then a fenced block, then the first balanced brace span.
inline std::optional<nlohmann::json> extract_json_object(const std::string& text) {
  auto try_parse = [](const std::string& s) -> std::optional<nlohmann::json> {
    try {
      auto j = nlohmann::json::parse(s);
      if (j.is_object()) return j;
    } catch (const nlohmann::json::exception&) {
    }
    return std::nullopt;
  };
  if (auto j = try_parse(text)) return j;
  size_t fence = text.find("```");
  if (fence != std::string::npos) {
    size_t body = text.find('\n', fence);
    size_t close = body == std::string::npos ? std::string::npos : text.find("```", body);
    if (body != std::string::npos && close != std::string::npos)
      if (auto j = try_parse(text.substr(body + 1, close - body - 1))) return j;
  }
  size_t open = text.find('{');
  while (open != std::string::npos) {
    int depth = 0;
    for (size_t i = open; i < text.size(); ++i) {
      if (text[i] == '{') ++depth;
      if (text[i] == '}' && --depth == 0) {
        if (auto j = try_parse(text.substr(open, i - open + 1))) return j;
        break;
      }
    }
    open = text.find('{', open + 1);
  }
  return std::nullopt;
}

// Structured parse, then keyword scraping; empty when nothing usable.
inline std::optional<DecisionResult> parse_decision_reply(const std::string& text) {
  if (auto j = extract_json_object(text)) {
    try {
      int sector = -1;
      if (j->contains("sector")) {
        if ((*j)["sector"].is_number_integer())
          sector = (*j)["sector"].get<int>();
        else if ((*j)["sector"].is_string())
          sector = std::stoi((*j)["sector"].get<std::string>());
      } else if (j->contains("direction") && (*j)["direction"].is_number_integer()) {
        sector = (*j)["direction"].get<int>();
      }
      if (sector >= 1 && sector <= 6) {
        DecisionResult r;
        r.sector = sector;
        if (j->contains("found")) {
          if ((*j)["found"].is_boolean())
            r.found = (*j)["found"].get<bool>();
          else if ((*j)["found"].is_string())
            r.found = (*j)["found"].get<std::string>() == "true";
        }
        if (j->contains("reason") && (*j)["reason"].is_string())
          r.rationale = (*j)["reason"].get<std::string>();
        else
          r.rationale = "structured reply";
        return r;
      }
    } catch (const std::exception&) {
    }
  }
  static const std::regex sector_re(R"((?:sector|direction)[^0-9\n]{0,10}?([1-6]))",
                                    std::regex::icase);
  std::smatch m;
  if (!std::regex_search(text, m, sector_re)) return std::nullopt;
  DecisionResult r;
  r.sector = m[1].str()[0] - '0';
  static const std::regex not_found_re(R"(\bnot\s+(?:yet\s+)?found\b|found\s*[":=\s]+false)",
                                       std::regex::icase);
  static const std::regex found_re(
      R"(found\s*[":=\s]+true|\btarget\s+(?:is\s+)?(?:found|visible|in\s+sight)\b)",
      std::regex::icase);
  if (std::regex_search(text, not_found_re))
    r.found = false;
  else if (std::regex_search(text, found_re))
    r.found = true;
  r.rationale = "keyword extraction";
  return r;
}

struct LocalParseReply {
  std::string room = "unknown";
  double target_likelihood = 0.0;
  double richness = 0.0;
  std::string summary;
};

inline std::optional<LocalParseReply> parse_local_reply(const std::string& text) {
  auto j = extract_json_object(text);
  if (!j) return std::nullopt;
  try {
    LocalParseReply r;
    if (j->contains("room") && (*j)["room"].is_string()) r.room = (*j)["room"].get<std::string>();
    if (j->contains("target_likelihood") && (*j)["target_likelihood"].is_number())
      r.target_likelihood = std::clamp((*j)["target_likelihood"].get<double>(), 0.0, 1.0);
    if (j->contains("richness") && (*j)["richness"].is_number())
      r.richness = std::clamp((*j)["richness"].get<double>(), 0.0, 1.0);
    if (j->contains("summary") && (*j)["summary"].is_string())
      r.summary = (*j)["summary"].get<std::string>();
    return r;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

struct SummaryReply {
  std::string room = "unknown";
  std::string summary;
};

inline std::optional<SummaryReply> parse_summary_reply(const std::string& text) {
  auto j = extract_json_object(text);
  if (!j) return std::nullopt;
  try {
    SummaryReply r;
    if (j->contains("room") && (*j)["room"].is_string()) r.room = (*j)["room"].get<std::string>();
    if (j->contains("summary") && (*j)["summary"].is_string())
      r.summary = (*j)["summary"].get<std::string>();
    return r;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace panonav
