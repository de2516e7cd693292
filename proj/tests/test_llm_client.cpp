#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "panonav/llm_client.hpp"

using namespace panonav;

namespace {

ChatRequest simple_request(std::string content, std::string model = "m1") {
  ChatRequest req;
  req.model = std::move(model);
  req.messages.push_back({"system", "sys", {}});
  req.messages.push_back({"user", std::move(content), {}});
  return req;
}

std::string completion_body(const std::string& content, int tokens = 7) {
  nlohmann::ordered_json msg;
  msg["role"] = "assistant";
  msg["content"] = content;
  nlohmann::ordered_json choice;
  choice["message"] = msg;
  nlohmann::ordered_json j;
  j["choices"] = nlohmann::ordered_json::array({choice});
  j["usage"]["total_tokens"] = tokens;
  return j.dump();
}

TranscriptEntry ok_entry(const std::string& key, const std::string& content) {
  TranscriptEntry e;
  e.key = key;
  e.status = 200;
  e.content = content;
  return e;
}

// Local chat-completions stand-in; handler decides status per call.
class StubServer {
 public:
  explicit StubServer(const std::string& route = "/chat/completions") {
    svr_.Post(route, [this](const httplib::Request& req, httplib::Response& res) {
      int n = ++hits_;
      last_auth_ = req.get_header_value("Authorization");
      last_body_ = req.body;
      if (n < succeed_after_) {
        res.status = 500;
        res.set_content("overloaded", "text/plain");
        return;
      }
      res.status = 200;
      res.set_content(completion_body(reply_), "application/json");
    });
    port_ = svr_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { svr_.listen_after_bind(); });
    svr_.wait_until_ready();
  }

  ~StubServer() {
    svr_.stop();
    thread_.join();
  }

  std::string endpoint(const std::string& prefix = "") const {
    return "http://127.0.0.1:" + std::to_string(port_) + prefix;
  }

  int hits() const { return hits_; }

  int succeed_after_ = 1;  // nth call that returns 200
  std::string reply_ = "{\"sector\": 2, \"found\": false, \"reason\": \"stub\"}";
  std::string last_auth_;
  std::string last_body_;

 private:
  httplib::Server svr_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> hits_{0};
};

}  // namespace

TEST(CanonicalKey, StableAndSensitiveToEveryField) {
  ChatRequest a = simple_request("hello");
  EXPECT_EQ(canonical_request_key(a), canonical_request_key(a));
  ChatRequest b = simple_request("hello");
  EXPECT_EQ(canonical_request_key(a), canonical_request_key(b));

  ChatRequest other_text = simple_request("goodbye");
  EXPECT_NE(canonical_request_key(a), canonical_request_key(other_text));
  ChatRequest other_model = simple_request("hello", "m2");
  EXPECT_NE(canonical_request_key(a), canonical_request_key(other_model));
  ChatRequest other_temp = simple_request("hello");
  other_temp.temperature = 0.7;
  EXPECT_NE(canonical_request_key(a), canonical_request_key(other_temp));

  std::string blob(5000, 'A');
  ChatRequest with_image = simple_request("hello");
  with_image.messages[1].attachments_b64.push_back(blob);
  std::string key = canonical_request_key(with_image);
  EXPECT_EQ(key.find(blob), std::string::npos);  // hashed, not embedded
  ChatRequest other_image = simple_request("hello");
  other_image.messages[1].attachments_b64.push_back(std::string(5000, 'B'));
  EXPECT_NE(key, canonical_request_key(other_image));
}

TEST(ReplyParsing, ExtractsTheFirstJsonObject) {
  ASSERT_TRUE(extract_json_object("{\"a\": 1}").has_value());
  auto fenced = extract_json_object("Sure!\n```json\n{\"a\": 2}\n```\ntrailing");
  ASSERT_TRUE(fenced.has_value());
  EXPECT_EQ((*fenced)["a"], 2);
  auto prose = extract_json_object("I think {\"a\": {\"b\": 3}} works");
  ASSERT_TRUE(prose.has_value());
  EXPECT_EQ((*prose)["a"]["b"], 3);
  EXPECT_FALSE(extract_json_object("no json here").has_value());
  EXPECT_FALSE(extract_json_object("[1, 2, 3]").has_value());
  EXPECT_FALSE(extract_json_object("{broken").has_value());
}

TEST(ReplyParsing, DecisionLadderFallsBackToKeywords) {
  auto r = parse_decision_reply("{\"sector\": 4, \"found\": true, \"reason\": \"couch ahead\"}");
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->sector, 4);
  EXPECT_TRUE(r->found);
  EXPECT_EQ(r->rationale, "couch ahead");

  r = parse_decision_reply("{\"sector\": \"3\", \"found\": \"true\"}");
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->sector, 3);
  EXPECT_TRUE(r->found);

  r = parse_decision_reply("{\"direction\": 2}");
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->sector, 2);
  EXPECT_FALSE(r->found);
  EXPECT_EQ(r->rationale, "structured reply");

  r = parse_decision_reply("I would take sector 5; the target is not yet found.");
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->sector, 5);
  EXPECT_FALSE(r->found);
  EXPECT_EQ(r->rationale, "keyword extraction");

  r = parse_decision_reply("Direction 2 looks right, target visible there");
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->sector, 2);
  EXPECT_TRUE(r->found);

  EXPECT_FALSE(parse_decision_reply("{\"sector\": 9}").has_value());
  EXPECT_FALSE(parse_decision_reply("shrug").has_value());
}

TEST(ReplyParsing, LocalAndSummaryRepliesClampAndDefault) {
  auto lp = parse_local_reply(
      "{\"room\": \"kitchen\", \"target_likelihood\": 1.7, \"richness\": -0.2, "
      "\"summary\": \"mostly appliances\"}");
  ASSERT_TRUE(lp.has_value());
  EXPECT_EQ(lp->room, "kitchen");
  EXPECT_DOUBLE_EQ(lp->target_likelihood, 1.0);
  EXPECT_DOUBLE_EQ(lp->richness, 0.0);
  EXPECT_EQ(lp->summary, "mostly appliances");

  lp = parse_local_reply("{}");
  ASSERT_TRUE(lp.has_value());
  EXPECT_EQ(lp->room, "unknown");
  EXPECT_DOUBLE_EQ(lp->target_likelihood, 0.0);
  EXPECT_FALSE(parse_local_reply("nope").has_value());

  auto sp = parse_summary_reply("{\"room\": \"office\", \"summary\": \"desks\"}");
  ASSERT_TRUE(sp.has_value());
  EXPECT_EQ(sp->room, "office");
  EXPECT_EQ(sp->summary, "desks");
  EXPECT_FALSE(parse_summary_reply("").has_value());
}

TEST(Prompts, RenderSubstitutesAndRejectsLeftovers) {
  PromptLibrary lib = PromptLibrary::builtin();
  std::string out = lib.render("decision_v1", {{"TARGET", "sofa"},
                                               {"LOCAL_DESCRIPTIONS", "lds"},
                                               {"GLOBAL_SUMMARY", "gs"},
                                               {"HISTORY_SECTION", ""}});
  EXPECT_NE(out.find("Target: sofa"), std::string::npos);
  EXPECT_EQ(out.find("{{"), std::string::npos);
  EXPECT_THROW(lib.render("decision_v1", {{"TARGET", "sofa"}}), Error);
  EXPECT_THROW(lib.render("no_such_template", {}), Error);
  EXPECT_THROW(lib.get("no_such_template"), Error);
}

TEST(Prompts, ShippedFilesMatchTheCompiledTemplates) {
  PromptLibrary compiled = PromptLibrary::builtin();
  PromptLibrary from_disk = PromptLibrary::builtin();
  ASSERT_TRUE(std::filesystem::exists("data/prompts/decision_v1.txt"))
      << "run tests from the repository root";
  from_disk.load_dir("data/prompts");
  for (const char* name : {"decision_v1", "parse_local_v1", "summarize_v1", "one_step_v1"})
    EXPECT_EQ(from_disk.get(name), compiled.get(name)) << name;
}

TEST(Prompts, HistorySectionListsOldestFirst) {
  EXPECT_EQ(history_section({}), "");
  EXPECT_EQ(history_section({"first", "second"}),
            "Exploration history (oldest first):\n- first\n- second\n\n");
}

TEST(Prompts, DecisionRequestCarriesTheRightSections) {
  PromptLibrary lib = PromptLibrary::builtin();
  std::vector<std::string> lds{"Sector 1: a.", "Sector 2: b."};
  auto req = render_decision_prompt(lds, "Waypoint 3: summary.", std::nullopt, "sofa",
                                    PromptMode::decoupled, lib, "m1");
  ASSERT_EQ(req.messages.size(), 2u);
  EXPECT_EQ(req.messages[0].role, "system");
  EXPECT_EQ(req.messages[0].content,
            "You control a robot in a grid building. Answer with one JSON object and nothing "
            "else.");
  EXPECT_NE(req.messages[1].content.find("Sector 1: a.\nSector 2: b."), std::string::npos);
  EXPECT_NE(req.messages[1].content.find("Waypoint 3: summary."), std::string::npos);
  EXPECT_EQ(req.messages[1].content.find("Exploration history"), std::string::npos);
  EXPECT_DOUBLE_EQ(req.temperature, 0.0);

  auto with_history =
      render_decision_prompt(lds, "gs", std::vector<std::string>{"w1", "w2"}, "sofa",
                             PromptMode::decoupled, lib, "m1");
  EXPECT_NE(with_history.messages[1].content.find(
                "Exploration history (oldest first):\n- w1\n- w2\n"),
            std::string::npos);

  auto one_step = render_decision_prompt(lds, "unused", std::nullopt, "sofa",
                                         PromptMode::one_step, lib, "m1");
  EXPECT_NE(one_step.messages[1].content.find("Decide directly"), std::string::npos);
}

TEST(Transcript, KeepsTheLastGoodReplyPerKey) {
  Transcript t;
  EXPECT_FALSE(t.lookup("k1").has_value());
  TranscriptEntry failed;
  failed.key = "k1";
  failed.status = 500;
  failed.error = "http status 500";
  t.append(failed);
  EXPECT_FALSE(t.lookup("k1").has_value());
  t.append(ok_entry("k1", "first"));
  t.append(ok_entry("k2", "other"));
  t.append(ok_entry("k1", "second"));
  EXPECT_EQ(t.lookup("k1").value(), "second");
  EXPECT_EQ(t.lookup("k1").value(), "second");  // lookups never consume
  EXPECT_EQ(t.lookup("k2").value(), "other");
  EXPECT_EQ(t.size(), 4u);
}

TEST(Transcript, SavesAndReloadsJsonLines) {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "panonav_transcript_test";
  fs::create_directories(dir);
  fs::path path = dir / "t.jsonl";

  Transcript t;
  TranscriptEntry e = ok_entry("k1", "{\"sector\": 1}");
  e.request = {{"model", "m1"}};
  e.tokens = 12;
  e.time = "2026-01-01T00:00:00Z";
  t.append(e);
  TranscriptEntry bad;
  bad.key = "k2";
  bad.error = "transport: Connection refused";
  t.append(bad);
  t.save(path.string());

  Transcript back = Transcript::load(path.string());
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.entries()[0].key, "k1");
  EXPECT_EQ(back.entries()[0].tokens, 12);
  EXPECT_EQ(back.entries()[0].time, "2026-01-01T00:00:00Z");
  EXPECT_EQ(back.entries()[1].error, "transport: Connection refused");
  EXPECT_EQ(back.lookup("k1").value(), "{\"sector\": 1}");
  EXPECT_FALSE(back.lookup("k2").has_value());

  std::ofstream(path) << "not json\n";
  EXPECT_THROW(Transcript::load(path.string()), Error);
  EXPECT_THROW(Transcript::load((dir / "missing.jsonl").string()), Error);
  fs::remove_all(dir);
}

TEST(Client, ReplayModeAnswersWithoutTouchingTheNetwork) {
  ChatRequest req = simple_request("what now");
  Transcript t;
  t.append(ok_entry(canonical_request_key(req), "{\"sector\": 6, \"found\": false}"));

  LlmClient::Options opts;
  opts.mode = LlmClient::Mode::replay;
  opts.forbid_network = true;
  LlmClient client(opts);
  client.replay_from(&t);

  uint64_t before = LlmClient::network_attempts();
  EXPECT_EQ(client.complete(req), "{\"sector\": 6, \"found\": false}");
  EXPECT_EQ(client.complete(req), "{\"sector\": 6, \"found\": false}");
  EXPECT_EQ(LlmClient::network_attempts(), before);

  try {
    client.complete(simple_request("unseen"));
    FAIL() << "expected a replay miss";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::replay);
    EXPECT_EQ(e.exit_code(), 1);
  }

  LlmClient bare({LlmClient::Mode::replay});
  EXPECT_THROW(bare.complete(req), Error);
}

TEST(Client, LiveModeValidatesTheEndpoint) {
  LlmClient::Options opts;
  opts.mode = LlmClient::Mode::live;
  EXPECT_THROW(LlmClient(opts).complete(simple_request("x")), Error);
  opts.endpoint = "https://api.example.com";
  try {
    LlmClient(opts).complete(simple_request("x"));
    FAIL() << "expected https rejection";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_input);
    EXPECT_NE(std::string(e.what()).find("http://"), std::string::npos);
  }
}

TEST(Client, ForbiddenNetworkTripsBeforeAnySocket) {
  LlmClient::Options opts;
  opts.endpoint = "http://127.0.0.1:1";
  opts.forbid_network = true;
  LlmClient client(opts);
  uint64_t before = LlmClient::network_attempts();
  try {
    client.complete(simple_request("x"));
    FAIL() << "expected the network guard to fire";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::contract);
  }
  EXPECT_EQ(LlmClient::network_attempts(), before);
}

TEST(Client, RetriesUntilTheServerRecovers) {
  StubServer server;
  server.succeed_after_ = 3;

  LlmClient::Options opts;
  opts.endpoint = server.endpoint();
  opts.api_key = "k123";
  opts.max_retries = 2;
  opts.backoff_s = 0.0;
  LlmClient client(opts);
  Transcript t;
  client.record_to(&t);

  ChatRequest req = simple_request("pick a sector");
  uint64_t before = LlmClient::network_attempts();
  std::string reply = client.complete(req);
  EXPECT_EQ(reply, server.reply_);
  EXPECT_EQ(LlmClient::network_attempts(), before + 3);
  EXPECT_EQ(server.hits(), 3);
  EXPECT_EQ(server.last_auth_, "Bearer k123");
  EXPECT_EQ(nlohmann::json::parse(server.last_body_)["model"], "m1");

  auto entries = t.entries();
  ASSERT_EQ(entries.size(), 3u);
  EXPECT_EQ(entries[0].error, "http status 500");
  EXPECT_EQ(entries[1].error, "http status 500");
  EXPECT_TRUE(entries[2].ok());
  EXPECT_EQ(entries[2].content, server.reply_);
  EXPECT_EQ(entries[2].tokens, 7);
  EXPECT_EQ(t.lookup(canonical_request_key(req)).value(), server.reply_);
}

TEST(Client, GivesUpWithATransportErrorAfterAllRetries) {
  StubServer server;
  server.succeed_after_ = 99;

  LlmClient::Options opts;
  opts.endpoint = server.endpoint();
  opts.max_retries = 1;
  opts.backoff_s = 0.0;
  LlmClient client(opts);
  Transcript t;
  client.record_to(&t);

  try {
    client.complete(simple_request("x"));
    FAIL() << "expected transport failure";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::transport);
    EXPECT_EQ(e.exit_code(), 2);
    EXPECT_NE(std::string(e.what()).find("2 attempts"), std::string::npos);
  }
  EXPECT_EQ(server.hits(), 2);
  EXPECT_EQ(t.size(), 2u);
}

TEST(Client, EndpointPathPrefixIsPreserved) {
  StubServer server("/v1/chat/completions");
  LlmClient::Options opts;
  opts.endpoint = server.endpoint("/v1");
  opts.backoff_s = 0.0;
  LlmClient client(opts);
  EXPECT_EQ(client.complete(simple_request("x")), server.reply_);

  opts.endpoint = server.endpoint("/v1/");  // trailing slash folds away
  LlmClient slash(opts);
  EXPECT_EQ(slash.complete(simple_request("x")), server.reply_);
}

TEST(Client, OptionsComeFromTheEnvironment) {
  auto stash = [](const char* name) {
    const char* v = std::getenv(name);
    return v ? std::optional<std::string>(v) : std::nullopt;
  };
  auto restore = [](const char* name, const std::optional<std::string>& v) {
    if (v)
      setenv(name, v->c_str(), 1);
    else
      unsetenv(name);
  };
  auto e = stash("PANONAV_LLM_ENDPOINT");
  auto k = stash("PANONAV_LLM_API_KEY");
  auto m = stash("PANONAV_LLM_MODEL");
  auto mm = stash("PANONAV_MLLM_MODEL");

  setenv("PANONAV_LLM_ENDPOINT", "http://10.0.0.1:8000", 1);
  setenv("PANONAV_LLM_API_KEY", "secret", 1);
  setenv("PANONAV_LLM_MODEL", "chat-model", 1);
  setenv("PANONAV_MLLM_MODEL", "vision-model", 1);
  auto opts = LlmClient::options_from_env(LlmClient::Mode::replay);
  EXPECT_EQ(opts.mode, LlmClient::Mode::replay);
  EXPECT_EQ(opts.endpoint, "http://10.0.0.1:8000");
  EXPECT_EQ(opts.api_key, "secret");
  EXPECT_EQ(opts.model, "chat-model");
  EXPECT_EQ(opts.mllm_model, "vision-model");

  unsetenv("PANONAV_LLM_ENDPOINT");
  unsetenv("PANONAV_LLM_API_KEY");
  unsetenv("PANONAV_LLM_MODEL");
  unsetenv("PANONAV_MLLM_MODEL");
  auto defaults = LlmClient::options_from_env();
  EXPECT_EQ(defaults.mode, LlmClient::Mode::live);
  EXPECT_TRUE(defaults.endpoint.empty());
  EXPECT_EQ(defaults.model, "generic-llm");
  EXPECT_EQ(defaults.mllm_model, "generic-mllm");

  restore("PANONAV_LLM_ENDPOINT", e);
  restore("PANONAV_LLM_API_KEY", k);
  restore("PANONAV_LLM_MODEL", m);
  restore("PANONAV_MLLM_MODEL", mm);
}
