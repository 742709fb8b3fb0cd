#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bemseval {

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
};

// Anything that turns a chat request into the assistant's reply text.
class Judge {
 public:
  virtual ~Judge() = default;
  virtual std::string complete(std::span<const ChatMessage> messages) = 0;
  virtual const std::string& model() const = 0;
};

struct JudgeConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4o-mini";
  double temperature = 0.0;
  double timeout_seconds = 120.0;
  int max_retries = 3;
  int max_in_flight = 4;
  std::string api_key_env = "OPENAI_API_KEY";
  int initial_backoff_ms = 1000;
  double backoff_jitter = 0.2;

  void validate() const;
};

// Chat-completion client: POST {base_url}/chat/completions, reply taken from
// choices[0].message.content. Retries transport failures, 429 and 5xx with
// exponential backoff. Safe to share between threads; at most max_in_flight
// requests are outstanding at any time.
class HttpJudge final : public Judge {
 public:
  // Throws Error(kConfig) when the token variable is unset.
  explicit HttpJudge(JudgeConfig config);

  std::string complete(std::span<const ChatMessage> messages) override;
  const std::string& model() const override { return config_.model; }

  // Attempts made by the most recent complete() call on this thread.
  static int last_attempts();

 private:
  JudgeConfig config_;
  std::string token_;
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::counting_semaphore<1024> gate_;
};

// SHA-256 (hex) of the canonical JSON {"messages":[...],"model":...}.
std::string request_fingerprint(std::string_view model, std::span<const ChatMessage> messages);

// fingerprint -> recorded reply text, persisted as a JSON object.
class ReplayStore {
 public:
  ReplayStore() = default;
  // Missing file -> empty store.
  static std::shared_ptr<ReplayStore> load(const std::filesystem::path& path);

  bool contains(const std::string& fingerprint) const;
  std::string lookup(const std::string& fingerprint) const;  // throws kReplayMiss
  void record(const std::string& fingerprint, std::string reply);
  std::size_t size() const;

  std::string to_json() const;
  void save(const std::filesystem::path& path) const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::string> replies_;
};

enum class ReplayMode { kStrict, kRecord };

// Strict mode answers only from the store and never touches the network.
// Record mode forwards misses to `live` and stores the reply.
class ReplayJudge final : public Judge {
 public:
  ReplayJudge(std::shared_ptr<ReplayStore> store, std::string model, ReplayMode mode,
              std::shared_ptr<Judge> live = nullptr);

  std::string complete(std::span<const ChatMessage> messages) override;
  const std::string& model() const override { return model_; }

  std::size_t misses() const { return misses_.load(); }

 private:
  std::shared_ptr<ReplayStore> store_;
  std::string model_;
  ReplayMode mode_;
  std::shared_ptr<Judge> live_;
  std::atomic<std::size_t> misses_{0};
};

}  // namespace bemseval
