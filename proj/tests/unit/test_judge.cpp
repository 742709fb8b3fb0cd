#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <doctest.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "bemseval/judge.hpp"
#include "expect_error.hpp"
#include "fake_judge.hpp"
#include "tempdir.hpp"

using namespace bemseval;
using testsupport::error_kind;

namespace {

constexpr const char* kTokenVar = "BEMSEVAL_TEST_JUDGE_TOKEN";

std::string completion_body(const std::string& content) {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}
      .dump();
}

// Local chat-completion server on an ephemeral port.
class StubServer {
 public:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  explicit StubServer(Handler handler) {
    server_.Post("/v1/chat/completions", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  JudgeConfig config() const {
    JudgeConfig c;
    c.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
    c.api_key_env = kTokenVar;
    c.initial_backoff_ms = 5;
    c.timeout_seconds = 10;
    return c;
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

struct TokenEnv {
  TokenEnv() { ::setenv(kTokenVar, "secret-token", 1); }
  ~TokenEnv() { ::unsetenv(kTokenVar); }
};

const std::vector<ChatMessage> kMessages{{"system", "be brief"}, {"user", "score this"}};

}  // namespace

TEST_CASE("http judge returns the first choice and sends the wire format") {
  TokenEnv env;
  nlohmann::json seen;
  std::string auth;
  StubServer server([&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(completion_body("the reply"), "application/json");
  });
  HttpJudge judge(server.config());
  CHECK(judge.complete(kMessages) == "the reply");
  CHECK(HttpJudge::last_attempts() == 1);
  CHECK(auth == "Bearer secret-token");
  CHECK(seen["model"] == "gpt-4o-mini");
  CHECK(seen["temperature"] == 0.0);
  CHECK(seen["messages"].size() == 2);
  CHECK(seen["messages"][1]["content"] == "score this");
}

TEST_CASE("http judge retries 429 twice then succeeds") {
  TokenEnv env;
  std::atomic<int> hits{0};
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    if (hits++ < 2) {
      res.status = 429;
      return;
    }
    res.set_content(completion_body("finally"), "application/json");
  });
  HttpJudge judge(server.config());
  CHECK(judge.complete(kMessages) == "finally");
  CHECK(hits.load() == 3);
  CHECK(HttpJudge::last_attempts() == 3);
}

TEST_CASE("http judge gives up after max_retries and maps bad bodies to protocol errors") {
  TokenEnv env;
  std::atomic<int> hits{0};
  StubServer failing([&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 503;
  });
  auto cfg = failing.config();
  cfg.max_retries = 2;
  HttpJudge judge(cfg);
  CHECK(error_kind([&] { judge.complete(kMessages); }) == ErrorKind::kTransport);
  CHECK(hits.load() == 3);

  StubServer garbage([](const httplib::Request&, httplib::Response& res) {
    res.set_content("<html>", "text/html");
  });
  HttpJudge g(garbage.config());
  CHECK(error_kind([&] { g.complete(kMessages); }) == ErrorKind::kProtocol);

  StubServer shapeless([](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"choices":[]})", "application/json");
  });
  HttpJudge s(shapeless.config());
  CHECK(error_kind([&] { s.complete(kMessages); }) == ErrorKind::kProtocol);

  StubServer denied([](const httplib::Request&, httplib::Response& res) { res.status = 401; });
  HttpJudge d(denied.config());
  CHECK(error_kind([&] { d.complete(kMessages); }) == ErrorKind::kTransport);
}

TEST_CASE("http judge never has more than max_in_flight requests outstanding") {
  TokenEnv env;
  std::atomic<int> in_flight{0}, peak{0}, total{0};
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    const int now = ++in_flight;
    int prev = peak.load();
    while (now > prev && !peak.compare_exchange_weak(prev, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(40));
    ++total;
    --in_flight;
    res.set_content(completion_body("ok"), "application/json");
  });
  auto cfg = server.config();
  cfg.max_in_flight = 3;
  HttpJudge judge(cfg);
  std::vector<std::thread> callers;
  for (int i = 0; i < 12; ++i) {
    callers.emplace_back([&] { CHECK(judge.complete(kMessages) == "ok"); });
  }
  for (auto& t : callers) t.join();
  CHECK(total.load() == 12);
  CHECK(peak.load() <= 3);
  CHECK(peak.load() >= 1);
}

TEST_CASE("http judge refuses to start without its token variable") {
  ::unsetenv(kTokenVar);
  JudgeConfig cfg;
  cfg.base_url = "http://127.0.0.1:9/v1";
  cfg.api_key_env = kTokenVar;
  CHECK(error_kind([&] { HttpJudge j(cfg); }) == ErrorKind::kConfig);
  cfg.max_in_flight = 0;
  CHECK(error_kind([&] { cfg.validate(); }) == ErrorKind::kConfig);
  cfg.max_in_flight = 1;
  cfg.base_url = "ftp://x";
  CHECK(error_kind([&] { cfg.validate(); }) == ErrorKind::kConfig);
}

TEST_CASE("request fingerprints are stable SHA-256 hex over model and messages") {
  const auto a = request_fingerprint("m", kMessages);
  CHECK(a.size() == 64);
  CHECK(a == request_fingerprint("m", kMessages));
  CHECK(a != request_fingerprint("other", kMessages));
  auto changed = kMessages;
  changed[1].content += " ";
  CHECK(a != request_fingerprint("m", changed));
  // SHA-256 of {"messages":[{"content":"hi","role":"user"}],"model":"gpt-4o-mini"},
  // computed outside the library; pins the canonical form across platforms.
  CHECK(request_fingerprint("gpt-4o-mini", std::vector<ChatMessage>{{"user", "hi"}}) ==
        "63c79dc424921f8c470d13eb9d3230e9bd005cf624ae0d23a696cf9258781bbb");
}

TEST_CASE("strict replay answers from the store and fails on a miss without a live judge") {
  auto store = std::make_shared<ReplayStore>();
  store->record(request_fingerprint("m", kMessages), "recorded reply");
  ReplayJudge strict(store, "m", ReplayMode::kStrict);
  CHECK(strict.complete(kMessages) == "recorded reply");
  auto other = kMessages;
  other[1].content = "unseen";
  const auto msg = testsupport::error_message([&] { strict.complete(other); });
  CHECK(msg.find(request_fingerprint("m", other)) != std::string::npos);
  CHECK(error_kind([&] { strict.complete(other); }) == ErrorKind::kReplayMiss);
}

TEST_CASE("record mode forwards misses once and persists them") {
  auto live = std::make_shared<testsupport::FakeJudge>(
      [](const std::string& p, int) { return "echo:" + p; }, "m");
  auto store = std::make_shared<ReplayStore>();
  ReplayJudge rec(store, "m", ReplayMode::kRecord, live);
  CHECK(rec.complete(kMessages) == "echo:score this");
  CHECK(rec.complete(kMessages) == "echo:score this");
  CHECK(live->calls() == 1);
  CHECK(rec.misses() == 1);

  testsupport::TempDir dir("replay");
  store->save(dir / "store.json");
  auto loaded = ReplayStore::load(dir / "store.json");
  CHECK(loaded->size() == 1);
  ReplayJudge strict(loaded, "m", ReplayMode::kStrict);
  CHECK(strict.complete(kMessages) == "echo:score this");
  CHECK(ReplayStore::load(dir / "absent.json")->size() == 0);
  testsupport::write_text(dir / "bad.json", "[1,2]");
  CHECK(error_kind([&] { ReplayStore::load(dir / "bad.json"); }) == ErrorKind::kConfig);
}
