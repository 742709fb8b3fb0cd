#include "bemseval/transcript.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "bemseval/util.hpp"

namespace bemseval {

using json = nlohmann::json;

std::string_view to_string(Role role) { return role == Role::kUser ? "user" : "assistant"; }

Role parse_role(std::string_view text) {
  if (text == "user") return Role::kUser;
  if (text == "assistant") return Role::kAssistant;
  throw Error(ErrorKind::kSchema, fmt::format("unknown role '{}'", text));
}

void Transcript::validate() const {
  if (session_id.empty()) throw Error(ErrorKind::kSchema, "empty session_id");
  if (participant.id.empty()) throw Error(ErrorKind::kSchema, "empty participant id");
  auto in_scale = [](double v) { return v >= 1.0 && v <= 5.0; };
  if (!in_scale(participant.domain_knowledge)) {
    throw Error(ErrorKind::kSchema, "participant.domain_knowledge outside [1, 5]");
  }
  if (!in_scale(participant.ai_literacy)) {
    throw Error(ErrorKind::kSchema, "participant.ai_literacy outside [1, 5]");
  }
  bool user = false, assistant = false;
  for (const auto& t : turns) (t.role == Role::kUser ? user : assistant) = true;
  if (!user || !assistant) {
    throw Error(ErrorKind::kSchema, "transcript needs at least one user and one assistant turn");
  }
}

Transcript parse_transcript_json(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("not valid JSON: ") + e.what());
  }
  auto field = [](const json& obj, const char* name, const char* path) -> const json& {
    if (!obj.is_object() || !obj.contains(name)) {
      throw Error(ErrorKind::kParse, fmt::format("missing field \"{}\"", path));
    }
    return obj.at(name);
  };
  Transcript t;
  try {
    t.session_id = field(doc, "session_id", "session_id").get<std::string>();
    const auto& p = field(doc, "participant", "participant");
    t.participant.id = field(p, "id", "participant.id").get<std::string>();
    t.participant.domain_knowledge =
        field(p, "domain_knowledge", "participant.domain_knowledge").get<double>();
    t.participant.ai_literacy = field(p, "ai_literacy", "participant.ai_literacy").get<double>();
    const auto& turns = field(doc, "turns", "turns");
    if (!turns.is_array()) throw Error(ErrorKind::kParse, "field \"turns\" must be an array");
    for (const auto& turn : turns) {
      Turn tr;
      tr.role = parse_role(field(turn, "role", "turns[].role").get<std::string>());
      tr.text = field(turn, "text", "turns[].text").get<std::string>();
      t.turns.push_back(std::move(tr));
    }
    t.conclusion = field(doc, "conclusion", "conclusion").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("wrong field type: ") + e.what());
  }
  t.validate();
  return t;
}

std::string transcript_to_json(const Transcript& t) {
  json doc;
  doc["session_id"] = t.session_id;
  doc["participant"] = {{"id", t.participant.id},
                        {"domain_knowledge", t.participant.domain_knowledge},
                        {"ai_literacy", t.participant.ai_literacy}};
  doc["turns"] = json::array();
  for (const auto& turn : t.turns) {
    doc["turns"].push_back({{"role", to_string(turn.role)}, {"text", turn.text}});
  }
  doc["conclusion"] = t.conclusion;
  return doc.dump(2) + "\n";
}

TranscriptSet load_transcripts(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw Error(ErrorKind::kConfig, "transcripts directory not found: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  TranscriptSet out;
  std::map<std::string, fs::path> owners;
  for (const auto& f : files) {
    try {
      auto t = parse_transcript_json(read_file(f));
      if (auto it = owners.find(t.session_id); it != owners.end()) {
        out.errors.push_back({f, ErrorKind::kConflict,
                              fmt::format("session_id '{}' already defined by {}", t.session_id,
                                          it->second.filename().string())});
        continue;
      }
      owners.emplace(t.session_id, f);
      out.transcripts.push_back(std::move(t));
    } catch (const Error& e) {
      out.errors.push_back({f, e.kind(), e.what()});
    }
  }
  return out;
}

EngagementMetrics engagement_metrics(const Transcript& t) {
  std::size_t user_turns = 0, user_words = 0, assistant_turns = 0, assistant_words = 0;
  for (const auto& turn : t.turns) {
    const auto words = count_words(turn.text);
    if (turn.role == Role::kUser) {
      ++user_turns;
      user_words += words;
    } else {
      ++assistant_turns;
      assistant_words += words;
    }
  }
  if (user_turns == 0 || assistant_turns == 0) {
    throw Error(ErrorKind::kPrecondition, "transcript needs both user and assistant turns");
  }
  if (assistant_words == 0) {
    throw Error(ErrorKind::kUndefinedRatio,
                fmt::format("session '{}': assistant turns contain no words", t.session_id));
  }
  EngagementMetrics m;
  m.total_turns = static_cast<int>(user_turns + assistant_turns);
  m.avg_prompt_length = static_cast<double>(user_words) / static_cast<double>(user_turns);
  m.prompt_response_ratio =
      static_cast<double>(user_words) / static_cast<double>(assistant_words);
  return m;
}

std::vector<std::string> side_view(const Transcript& t, Role side) {
  std::vector<std::string> out;
  for (const auto& turn : t.turns) {
    if (turn.role == side) out.push_back(turn.text);
  }
  return out;
}

}  // namespace bemseval
