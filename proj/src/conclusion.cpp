#include "bemseval/conclusion.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "bemseval/error.hpp"
#include "bemseval/util.hpp"

namespace bemseval {

using json = nlohmann::json;

std::string_view to_string(ReviewStatus status) {
  switch (status) {
    case ReviewStatus::kUnreviewed: return "unreviewed";
    case ReviewStatus::kConfirmed: return "confirmed";
    case ReviewStatus::kCorrected: return "corrected";
  }
  return "?";
}

std::string_view to_string(FlagKind kind) {
  return kind == FlagKind::kAppliance ? "appliance" : "strategy";
}

namespace {

ReviewStatus parse_status(std::string_view s) {
  if (s == "unreviewed") return ReviewStatus::kUnreviewed;
  if (s == "confirmed") return ReviewStatus::kConfirmed;
  if (s == "corrected") return ReviewStatus::kCorrected;
  throw Error(ErrorKind::kSchema, fmt::format("unknown review status '{}'", s));
}

FlagKind parse_kind(std::string_view s) {
  if (s == "appliance") return FlagKind::kAppliance;
  if (s == "strategy") return FlagKind::kStrategy;
  throw Error(ErrorKind::kSchema, fmt::format("unknown flag kind '{}'", s));
}

ConclusionVerdict blank_verdict(const ReferenceSolutions& refs) {
  ConclusionVerdict v;
  for (const auto& a : refs.target_appliances) v.appliances.push_back({a, false, false, ""});
  for (const auto& s : refs.strategies) v.strategies.push_back({s.id, false, false, ""});
  return v;
}

// A matched strategy implies its appliance was identified.
void apply_strategy_implication(ConclusionVerdict& v, const ReferenceSolutions& refs) {
  for (std::size_t i = 0; i < refs.strategies.size(); ++i) {
    if (!v.strategies[i].match) continue;
    for (auto& a : v.appliances) {
      if (a.key != refs.strategies[i].appliance_id || a.match) continue;
      a.match = a.judge_match = true;
      a.justification += fmt::format(" [implied by matched strategy {}]", refs.strategies[i].id);
    }
  }
}

}  // namespace

const VerdictFlag& ConclusionVerdict::flag(FlagKind kind, std::string_view key) const {
  const auto& list = kind == FlagKind::kAppliance ? appliances : strategies;
  for (const auto& f : list) {
    if (f.key == key) return f;
  }
  throw Error(ErrorKind::kPrecondition, fmt::format("verdict has no {} flag '{}'", to_string(kind), key));
}

std::vector<ChatMessage> build_conclusion_prompt(std::string_view conclusion_text,
                                                 const ReferenceSolutions& refs,
                                                 const ConclusionOptions& options) {
  std::string system =
      "You are an expert residential energy auditor. You compare a participant's final "
      "energy-saving recommendations with a fixed set of expert reference solutions and decide, "
      "item by item, whether the participant's recommendations substantively match them. Think "
      "step by step: list the participant's recommendations, then check each reference item "
      "against them before deciding. Respond with a single JSON object and nothing else.";

  std::string body = "REFERENCE TARGET APPLIANCES:\n";
  for (const auto& a : refs.target_appliances) body += fmt::format("- {}\n", a);
  body += "\nREFERENCE STRATEGIES:\n";
  for (const auto& s : refs.strategies) {
    body += fmt::format("- [{}] ({}) {}\n", s.id, s.appliance_id, s.text);
  }
  body +=
      "\nMATCHING RULES:\n"
      "- An appliance is identified only when the participant recommends an actionable change "
      "for it. Naming the appliance without a change does not count.\n"
      "- A strategy is matched when a participant recommendation proposes substantively the same "
      "change, even if it is worded differently.\n";
  body += options.allow_multi_match
              ? "- One participant recommendation may match more than one reference strategy.\n"
              : "- Each participant recommendation may match at most one reference strategy.\n";
  body += "\nPARTICIPANT CONCLUSION:\n<<<\n";
  body += conclusion_text;
  body += "\n>>>\n";
  body +=
      "\nSTEPS:\n"
      "1. List the participant's distinct recommendations.\n"
      "2. For each reference appliance and strategy, find the recommendation that matches it, if "
      "any, and explain why.\n"
      "3. Report every reference item exactly once.\n"
      "\nOUTPUT FORMAT (strict JSON, no other text):\n"
      "{\"appliances\":{\"<appliance>\":{\"match\":true|false,\"justification\":s}},"
      "\"strategies\":{\"<strategy id>\":{\"match\":true|false,\"justification\":s}}}\n";
  return {{"system", std::move(system)}, {"user", std::move(body)}};
}

ConclusionVerdict parse_conclusion_response(std::string_view raw, const ReferenceSolutions& refs) {
  auto obj = first_json_object(raw);
  if (!obj) throw Error(ErrorKind::kFormat, "judge reply contains no JSON object");
  json doc;
  try {
    doc = json::parse(*obj);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("judge reply JSON is malformed: ") + e.what());
  }
  auto v = blank_verdict(refs);
  auto read = [&](const char* section, std::vector<VerdictFlag>& flags) {
    auto it = doc.find(section);
    if (it == doc.end() || !it->is_object()) {
      throw Error(ErrorKind::kFormat, fmt::format("judge reply lacks object \"{}\"", section));
    }
    for (auto& f : flags) {
      auto entry = it->find(f.key);
      if (entry == it->end()) {
        throw Error(ErrorKind::kFormat, fmt::format("judge reply omits {} '{}'", section, f.key));
      }
      const json* match = nullptr;
      if (entry->is_boolean()) {
        match = &*entry;
      } else if (entry->is_object() && entry->contains("match") && entry->at("match").is_boolean()) {
        match = &entry->at("match");
        if (auto j = entry->find("justification"); j != entry->end() && j->is_string()) {
          f.justification = j->get<std::string>();
        }
      }
      if (!match) {
        throw Error(ErrorKind::kFormat, fmt::format("{} '{}' has no boolean match", section, f.key));
      }
      f.match = f.judge_match = match->get<bool>();
    }
  };
  read("appliances", v.appliances);
  read("strategies", v.strategies);
  apply_strategy_implication(v, refs);
  v.scored = true;
  return v;
}

ConclusionVerdict judge_conclusion(std::string_view session_id, std::string_view conclusion_text,
                                   const ReferenceSolutions& refs, Judge& judge,
                                   const ConclusionOptions& options) {
  refs.validate();
  if (trim(conclusion_text).empty()) {
    auto v = blank_verdict(refs);
    v.session_id = session_id;
    v.scored = true;
    for (auto& f : v.appliances) f.justification = "empty conclusion";
    for (auto& f : v.strategies) f.justification = "empty conclusion";
    return v;
  }
  const auto prompt = build_conclusion_prompt(conclusion_text, refs, options);
  std::string failure;
  for (int attempt = 0; attempt <= options.parse_retries; ++attempt) {
    try {
      auto v = parse_conclusion_response(judge.complete(prompt), refs);
      v.session_id = session_id;
      return v;
    } catch (const Error& e) {
      failure = e.what();
      if (e.kind() == ErrorKind::kFormat) continue;
      if (e.kind() == ErrorKind::kTransport || e.kind() == ErrorKind::kProtocol) break;
      throw;
    }
  }
  auto v = blank_verdict(refs);
  v.session_id = session_id;
  v.scored = false;
  v.failure = failure;
  return v;
}

AlignmentRates rates(const ConclusionVerdict& v) {
  if (!v.scored) {
    throw Error(ErrorKind::kPrecondition,
                fmt::format("verdict for '{}' is unscored and awaits manual review", v.session_id));
  }
  if (v.appliances.size() != ReferenceSolutions::kTargetCount ||
      v.strategies.size() != ReferenceSolutions::kStrategyCount) {
    throw Error(ErrorKind::kSchema, "verdict must hold 5 appliance and 7 strategy flags");
  }
  AlignmentRates r;
  for (const auto& f : v.appliances) r.appliances_matched += f.match ? 1 : 0;
  for (const auto& f : v.strategies) r.strategies_matched += f.match ? 1 : 0;
  r.appliance_identification_rate =
      static_cast<double>(r.appliances_matched) / ReferenceSolutions::kTargetCount;
  r.strategy_alignment_rate =
      static_cast<double>(r.strategies_matched) / ReferenceSolutions::kStrategyCount;
  r.overall_alignment = (r.appliance_identification_rate + r.strategy_alignment_rate) / 2.0;
  return r;
}

ConclusionVerdict apply_review(const ConclusionVerdict& v, std::span<const ReviewEdit> edits,
                               std::string_view note, bool force) {
  if (!edits.empty() && v.review_status != ReviewStatus::kUnreviewed && !force) {
    throw Error(ErrorKind::kReviewLock,
                fmt::format("verdict for '{}' is already {}; pass force to edit it again",
                            v.session_id, to_string(v.review_status)));
  }
  ConclusionVerdict out = v;
  ReviewLogEntry entry;
  entry.sequence = static_cast<int>(v.review_log.size()) + 1;
  entry.note = note;
  entry.forced = force;
  for (const auto& e : edits) {
    auto& list = e.kind == FlagKind::kAppliance ? out.appliances : out.strategies;
    auto it = std::find_if(list.begin(), list.end(), [&](const auto& f) { return f.key == e.key; });
    if (it == list.end()) {
      throw Error(ErrorKind::kPrecondition,
                  fmt::format("verdict has no {} flag '{}'", to_string(e.kind), e.key));
    }
    entry.changes.push_back({e.kind, e.key, it->match, e.match});
    it->match = e.match;
  }
  if (!edits.empty()) {
    out.review_status = ReviewStatus::kCorrected;
  } else if (out.review_status == ReviewStatus::kUnreviewed) {
    out.review_status = ReviewStatus::kConfirmed;
  }
  // The reviewer's decision stands in for an unusable judge output.
  out.scored = true;
  entry.status_after = out.review_status;
  out.review_log.push_back(std::move(entry));
  return out;
}

std::string verdict_to_json(const ConclusionVerdict& v) {
  auto flags = [](const std::vector<VerdictFlag>& list) {
    json arr = json::array();
    for (const auto& f : list) {
      arr.push_back({{"key", f.key},
                     {"judge_match", f.judge_match},
                     {"match", f.match},
                     {"justification", f.justification}});
    }
    return arr;
  };
  json log = json::array();
  for (const auto& e : v.review_log) {
    json changes = json::array();
    for (const auto& c : e.changes) {
      changes.push_back({{"kind", to_string(c.kind)}, {"key", c.key}, {"from", c.from}, {"to", c.to}});
    }
    log.push_back({{"sequence", e.sequence},
                   {"note", e.note},
                   {"forced", e.forced},
                   {"status_after", to_string(e.status_after)},
                   {"changes", changes}});
  }
  json doc = {{"session_id", v.session_id},
              {"scored", v.scored},
              {"failure", v.failure},
              {"review_status", to_string(v.review_status)},
              {"appliances", flags(v.appliances)},
              {"strategies", flags(v.strategies)},
              {"review_log", log}};
  return doc.dump(2) + "\n";
}

ConclusionVerdict parse_verdict_json(std::string_view json_text) {
  ConclusionVerdict v;
  try {
    auto doc = json::parse(json_text);
    v.session_id = doc.at("session_id").get<std::string>();
    v.scored = doc.at("scored").get<bool>();
    v.failure = doc.value("failure", "");
    v.review_status = parse_status(doc.at("review_status").get<std::string>());
    auto flags = [](const json& arr) {
      std::vector<VerdictFlag> out;
      for (const auto& f : arr) {
        out.push_back({f.at("key").get<std::string>(), f.at("judge_match").get<bool>(),
                       f.at("match").get<bool>(), f.value("justification", "")});
      }
      return out;
    };
    v.appliances = flags(doc.at("appliances"));
    v.strategies = flags(doc.at("strategies"));
    for (const auto& e : doc.value("review_log", json::array())) {
      ReviewLogEntry entry;
      entry.sequence = e.at("sequence").get<int>();
      entry.note = e.value("note", "");
      entry.forced = e.value("forced", false);
      entry.status_after = parse_status(e.at("status_after").get<std::string>());
      for (const auto& c : e.at("changes")) {
        entry.changes.push_back({parse_kind(c.at("kind").get<std::string>()),
                                 c.at("key").get<std::string>(), c.at("from").get<bool>(),
                                 c.at("to").get<bool>()});
      }
      v.review_log.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("bad verdict file: ") + e.what());
  }
  return v;
}

}  // namespace bemseval
