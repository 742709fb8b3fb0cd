#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "bemseval/judge.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "bemseval/error.hpp"
#include "bemseval/util.hpp"

namespace bemseval {

using json = nlohmann::json;

namespace {

thread_local int tl_last_attempts = 0;

json messages_json(std::span<const ChatMessage> messages) {
  json arr = json::array();
  for (const auto& m : messages) arr.push_back({{"role", m.role}, {"content", m.content}});
  return arr;
}

bool retryable_status(int status) { return status == 429 || (status >= 500 && status <= 599); }

JudgeConfig validated(JudgeConfig config) {
  config.validate();
  return config;
}

class GateSlot {
 public:
  explicit GateSlot(std::counting_semaphore<1024>& gate) : gate_(gate) { gate_.acquire(); }
  ~GateSlot() { gate_.release(); }
  GateSlot(const GateSlot&) = delete;
  GateSlot& operator=(const GateSlot&) = delete;

 private:
  std::counting_semaphore<1024>& gate_;
};

}  // namespace

void JudgeConfig::validate() const {
  if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0) {
    throw Error(ErrorKind::kConfig, fmt::format("judge base_url '{}' is not http(s)", base_url));
  }
  if (model.empty()) throw Error(ErrorKind::kConfig, "judge model is empty");
  if (max_retries < 0) throw Error(ErrorKind::kConfig, "judge max_retries must be >= 0");
  if (max_in_flight < 1 || max_in_flight > 1024) {
    throw Error(ErrorKind::kConfig, "judge max_in_flight must be in [1, 1024]");
  }
  if (!(timeout_seconds > 0.0)) throw Error(ErrorKind::kConfig, "judge timeout must be > 0");
  if (initial_backoff_ms < 0) throw Error(ErrorKind::kConfig, "judge backoff must be >= 0");
  if (!(backoff_jitter >= 0.0 && backoff_jitter < 1.0)) {
    throw Error(ErrorKind::kConfig, "judge backoff_jitter must be in [0, 1)");
  }
  if (api_key_env.empty()) throw Error(ErrorKind::kConfig, "judge api_key_env is empty");
}

HttpJudge::HttpJudge(JudgeConfig config)
    : config_(validated(std::move(config))), gate_(config_.max_in_flight) {
  const char* token = std::getenv(config_.api_key_env.c_str());
  if (token == nullptr || *token == '\0') {
    throw Error(ErrorKind::kConfig,
                fmt::format("environment variable {} with the judge API token is not set",
                            config_.api_key_env));
  }
  token_ = token;
  auto scheme_end = config_.base_url.find("://") + 3;
  auto path_start = config_.base_url.find('/', scheme_end);
  scheme_host_port_ = config_.base_url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : config_.base_url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

int HttpJudge::last_attempts() { return tl_last_attempts; }

std::string HttpJudge::complete(std::span<const ChatMessage> messages) {
  if (messages.empty()) throw Error(ErrorKind::kPrecondition, "judge request has no messages");
  const json body = {{"model", config_.model},
                     {"messages", messages_json(messages)},
                     {"temperature", config_.temperature}};
  const std::string payload = body.dump();
  const std::string path = path_prefix_ + "/chat/completions";

  std::mt19937 rng(std::random_device{}());
  std::uniform_real_distribution<double> jitter(1.0 - config_.backoff_jitter,
                                                1.0 + config_.backoff_jitter);
  std::string last_failure;
  tl_last_attempts = 0;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      const double delay_ms =
          config_.initial_backoff_ms * std::pow(2.0, attempt - 1) * jitter(rng);
      std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(delay_ms));
    }
    ++tl_last_attempts;
    httplib::Result res;
    {
      GateSlot slot(gate_);
      httplib::Client client(scheme_host_port_);
      const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
          std::chrono::duration<double>(config_.timeout_seconds));
      client.set_connection_timeout(timeout);
      client.set_read_timeout(timeout);
      client.set_write_timeout(timeout);
      httplib::Headers headers = {{"Authorization", "Bearer " + token_}};
      res = client.Post(path, headers, payload, "application/json");
    }
    if (!res) {
      last_failure = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (retryable_status(res->status)) {
      last_failure = fmt::format("HTTP {}", res->status);
      continue;
    }
    if (res->status < 200 || res->status > 299) {
      throw Error(ErrorKind::kTransport,
                  fmt::format("judge returned HTTP {}: {}", res->status, res->body.substr(0, 200)));
    }
    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::exception&) {
      throw Error(ErrorKind::kProtocol, "judge reply body is not JSON");
    }
    try {
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
      throw Error(ErrorKind::kProtocol, "judge reply lacks choices[0].message.content");
    }
  }
  throw Error(ErrorKind::kTransport,
              fmt::format("judge request failed after {} attempts ({})", tl_last_attempts,
                          last_failure));
}

std::string request_fingerprint(std::string_view model, std::span<const ChatMessage> messages) {
  // nlohmann objects keep keys sorted, so the dump is canonical.
  const json doc = {{"model", std::string(model)}, {"messages", messages_json(messages)}};
  const std::string canonical = doc.dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(canonical.data(), canonical.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::kProtocol, "SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::shared_ptr<ReplayStore> ReplayStore::load(const std::filesystem::path& path) {
  auto store = std::make_shared<ReplayStore>();
  if (!std::filesystem::exists(path)) return store;
  try {
    auto doc = json::parse(read_file(path));
    if (!doc.is_object()) throw Error(ErrorKind::kConfig, "replay store must be a JSON object");
    for (const auto& [k, v] : doc.items()) store->replies_[k] = v.get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, fmt::format("bad replay store {}: {}", path.string(), e.what()));
  }
  return store;
}

bool ReplayStore::contains(const std::string& fingerprint) const {
  std::lock_guard lock(mu_);
  return replies_.count(fingerprint) != 0;
}

std::string ReplayStore::lookup(const std::string& fingerprint) const {
  std::lock_guard lock(mu_);
  auto it = replies_.find(fingerprint);
  if (it == replies_.end()) {
    throw Error(ErrorKind::kReplayMiss, fmt::format("no recorded reply for request {}", fingerprint));
  }
  return it->second;
}

void ReplayStore::record(const std::string& fingerprint, std::string reply) {
  std::lock_guard lock(mu_);
  replies_[fingerprint] = std::move(reply);
}

std::size_t ReplayStore::size() const {
  std::lock_guard lock(mu_);
  return replies_.size();
}

std::string ReplayStore::to_json() const {
  std::lock_guard lock(mu_);
  json doc = json::object();
  for (const auto& [k, v] : replies_) doc[k] = v;
  return doc.dump(2) + "\n";
}

void ReplayStore::save(const std::filesystem::path& path) const {
  write_file_atomic(path, to_json());
}

ReplayJudge::ReplayJudge(std::shared_ptr<ReplayStore> store, std::string model, ReplayMode mode,
                         std::shared_ptr<Judge> live)
    : store_(std::move(store)), model_(std::move(model)), mode_(mode), live_(std::move(live)) {
  if (!store_) throw Error(ErrorKind::kConfig, "replay judge needs a store");
  if (mode_ == ReplayMode::kRecord && !live_) {
    throw Error(ErrorKind::kConfig, "record mode needs a live judge");
  }
}

std::string ReplayJudge::complete(std::span<const ChatMessage> messages) {
  const auto fp = request_fingerprint(model_, messages);
  if (mode_ == ReplayMode::kStrict || store_->contains(fp)) return store_->lookup(fp);
  ++misses_;
  auto reply = live_->complete(messages);
  store_->record(fp, reply);
  return reply;
}

}  // namespace bemseval
