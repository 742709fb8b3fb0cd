#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bemseval/error.hpp"

namespace bemseval {

enum class Role { kUser, kAssistant };

std::string_view to_string(Role role);
Role parse_role(std::string_view text);

struct Participant {
  std::string id;
  double domain_knowledge = 1.0;  // 1..5 scale mean
  double ai_literacy = 1.0;       // 1..5 scale mean
};

struct Turn {
  Role role = Role::kUser;
  std::string text;
};

struct Transcript {
  std::string session_id;
  Participant participant;
  std::vector<Turn> turns;
  std::string conclusion;

  // Throws Error(kSchema) when a role is absent or a score is off-scale.
  void validate() const;
};

struct EngagementMetrics {
  int total_turns = 0;
  double avg_prompt_length = 0.0;      // words per user turn
  double prompt_response_ratio = 0.0;  // user words / assistant words
};

struct FileError {
  std::filesystem::path file;
  ErrorKind kind;
  std::string message;
};

struct TranscriptSet {
  std::vector<Transcript> transcripts;  // sorted by file name
  std::vector<FileError> errors;
};

Transcript parse_transcript_json(std::string_view json_text);
std::string transcript_to_json(const Transcript& t);

// Loads every *.json file in `dir`. Files that fail to parse and files whose
// session_id repeats an earlier one are reported in `errors` and skipped.
TranscriptSet load_transcripts(const std::filesystem::path& dir);

EngagementMetrics engagement_metrics(const Transcript& t);

std::vector<std::string> side_view(const Transcript& t, Role side);

}  // namespace bemseval
