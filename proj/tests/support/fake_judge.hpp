#pragma once

#include <atomic>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include "bemseval/judge.hpp"

namespace testsupport {

// Judge whose reply is computed from the last message; records every call.
class FakeJudge final : public bemseval::Judge {
 public:
  using Reply = std::function<std::string(const std::string& prompt, int call)>;

  explicit FakeJudge(Reply reply, std::string model = "fake-model")
      : reply_(std::move(reply)), model_(std::move(model)) {}

  std::string complete(std::span<const bemseval::ChatMessage> messages) override {
    const int call = calls_++;
    {
      std::lock_guard lock(mu_);
      prompts_.push_back(messages.back().content);
    }
    return reply_(messages.back().content, call);
  }
  const std::string& model() const override { return model_; }

  int calls() const { return calls_.load(); }
  std::vector<std::string> prompts() const {
    std::lock_guard lock(mu_);
    return prompts_;
  }

 private:
  Reply reply_;
  std::string model_;
  std::atomic<int> calls_{0};
  mutable std::mutex mu_;
  std::vector<std::string> prompts_;
};

}  // namespace testsupport
