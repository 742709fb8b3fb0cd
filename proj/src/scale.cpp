#include "bemseval/scale.hpp"

#include <cmath>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "bemseval/error.hpp"
#include "bemseval/util.hpp"

namespace bemseval {

using json = nlohmann::json;

namespace {

constexpr std::array<const char*, 4> kFactorIds = {"explicitness", "depth", "consideration",
                                                   "evidence"};
constexpr std::array<const char*, 6> kLevelLabels = {"1.0", "0.8", "0.6", "0.4", "0.2", "0.0"};

}  // namespace

void Rubric::validate() const {
  if (factors.size() != 4) throw Error(ErrorKind::kConfig, "rubric needs exactly 4 factors");
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& f = factors[i];
    if (f.id != kFactorIds[i]) {
      throw Error(ErrorKind::kConfig,
                  fmt::format("rubric factor {} must be '{}', found '{}'", i + 1, kFactorIds[i], f.id));
    }
    if (f.user_criteria.size() != 6 || f.assistant_criteria.size() != 6) {
      throw Error(ErrorKind::kConfig,
                  fmt::format("rubric factor '{}' needs 6 criteria per side", f.id));
    }
  }
  std::set<std::string> ids;
  for (const auto& c : concepts) {
    if (c.id.empty() || !ids.insert(c.id).second) {
      throw Error(ErrorKind::kConfig, fmt::format("empty or duplicate concept id '{}'", c.id));
    }
    if (c.definition.empty()) {
      throw Error(ErrorKind::kConfig, fmt::format("concept '{}' has no definition", c.id));
    }
  }
}

const Concept& Rubric::concept_by_id(std::string_view id) const {
  for (const auto& c : concepts) {
    if (c.id == id) return c;
  }
  throw Error(ErrorKind::kConfig, fmt::format("unknown concept '{}'", id));
}

Rubric parse_rubric_json(std::string_view json_text) {
  Rubric r;
  try {
    auto doc = json::parse(json_text);
    for (const auto& f : doc.at("factors")) {
      r.factors.push_back({f.at("id").get<std::string>(), f.at("name").get<std::string>(),
                           f.at("description").get<std::string>(),
                           f.at("user").get<std::vector<std::string>>(),
                           f.at("assistant").get<std::vector<std::string>>()});
    }
    for (const auto& c : doc.at("concepts")) {
      Concept k;
      k.id = c.at("id").get<std::string>();
      k.name = c.value("name", k.id);
      k.category = c.value("category", "");
      const auto sides = c.value("sides", "both");
      if (sides == "user") {
        k.sides = ConceptSides::kUserOnly;
      } else if (sides == "both") {
        k.sides = ConceptSides::kBoth;
      } else {
        throw Error(ErrorKind::kConfig, fmt::format("concept '{}': sides must be user|both", k.id));
      }
      k.definition = c.at("definition").get<std::string>();
      k.examples = c.value("examples", std::vector<std::string>{});
      r.concepts.push_back(std::move(k));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("bad rubric config: ") + e.what());
  }
  r.validate();
  return r;
}

Rubric default_rubric() { return parse_rubric_json(default_rubric_json()); }

FactorLevel FactorLevel::from_index(int index) {
  if (index < 0 || index >= kLevels) {
    throw Error(ErrorKind::kRubricViolation, fmt::format("factor level index {} out of range", index));
  }
  FactorLevel l;
  l.index_ = index;
  return l;
}

FactorLevel FactorLevel::snap(double raw) {
  if (!std::isfinite(raw) || raw < 0.0 || raw > 1.0) {
    throw Error(ErrorKind::kRubricViolation, fmt::format("factor score {} outside [0, 1]", raw));
  }
  const int nearest = static_cast<int>(std::lround(raw * 5.0));
  // Small slack so that e.g. 0.75 -> 0.8 is not rejected by rounding noise.
  if (std::abs(raw - nearest / 5.0) > kSnapTolerance + 1e-12) {
    throw Error(ErrorKind::kRubricViolation,
                fmt::format("factor score {} is not within {} of a rubric level", raw,
                            kSnapTolerance));
  }
  return from_index(nearest);
}

std::array<double, 4> FactorScores::values() const {
  return {explicitness.value(), depth.value(), consideration.value(), evidence.value()};
}

double confidence(const std::array<double, 4>& f, const FactorWeights& w) {
  for (double x : w) {
    if (!(x >= 0.0)) throw Error(ErrorKind::kPrecondition, "factor weights must be >= 0");
  }
  return (w[0] * f[0] + w[1] * f[1] + w[2] * f[2] + w[3] * f[3]) / 4.0;
}

double confidence(const FactorScores& factors, const FactorWeights& w) {
  for (double x : w) {
    if (!(x >= 0.0)) throw Error(ErrorKind::kPrecondition, "factor weights must be >= 0");
  }
  // Lattice indices keep equal-weight means at the correctly rounded k/20.
  const double weighted = w[0] * factors.explicitness.index() + w[1] * factors.depth.index() +
                          w[2] * factors.consideration.index() + w[3] * factors.evidence.index();
  return weighted / (4.0 * (FactorLevel::kLevels - 1));
}

std::vector<ChatMessage> build_scale_prompt(const Concept& concept_def,
                                            std::span<const std::string> side_texts, Role side,
                                            const Rubric& rubric) {
  if (side_texts.empty()) {
    throw Error(ErrorKind::kPrecondition,
                fmt::format("no {} turns to score for concept '{}'", to_string(side), concept_def.id));
  }
  const bool user = side == Role::kUser;
  std::string system =
      "You are an impartial evaluator of conversations between a homeowner and an AI assistant "
      "that acts as a home energy management system. You decide whether a specific concept is "
      "substantively present in one side of the conversation, judging meaning in context rather "
      "than keyword matches. Reason step by step through each scoring factor before assigning "
      "scores, and summarize that reasoning in the justification field. Respond with a single "
      "JSON object and nothing else.";

  std::string body;
  body += fmt::format("CONCEPT: {} ({})\n", concept_def.name, concept_def.id);
  body += fmt::format("DEFINITION: {}\n", concept_def.definition);
  if (!concept_def.examples.empty()) {
    body += "EXAMPLES:\n";
    for (const auto& e : concept_def.examples) body += fmt::format("- {}\n", e);
  }
  body += fmt::format("SIDE UNDER EVALUATION: {}\n\n",
                      user ? "user prompts" : "GPT responses (assistant turns)");
  body += "SCORING FACTORS (score each as 0.0, 0.2, 0.4, 0.6, 0.8 or 1.0):\n";
  for (std::size_t i = 0; i < rubric.factors.size(); ++i) {
    const auto& f = rubric.factors[i];
    body += fmt::format("{}. {} ({}): {}\n", i + 1, f.name, f.id, f.description);
    const auto& criteria = user ? f.user_criteria : f.assistant_criteria;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
      body += fmt::format("   {}: {}\n", kLevelLabels[k], criteria[k]);
    }
  }
  body += fmt::format("\nCONVERSATION EXCERPT ({} turns only, in order):\n",
                      user ? "user" : "assistant");
  for (std::size_t i = 0; i < side_texts.size(); ++i) {
    body += fmt::format("[{}] {}\n", i + 1, side_texts[i]);
  }
  body +=
      "\nSTEPS:\n"
      "1. Find every passage in the excerpt where the concept is addressed.\n"
      "2. For each factor, compare those passages with the criteria and choose one level.\n"
      "3. Summarize the reasoning behind the four levels in the justification.\n"
      "\nOUTPUT FORMAT (strict JSON, no other text):\n"
      "{\"explicitness\":x,\"depth\":x,\"consideration\":x,\"evidence\":x,\"justification\":s}\n";
  return {{"system", std::move(system)}, {"user", std::move(body)}};
}

FactorScores parse_factor_response(std::string_view raw) {
  auto obj = first_json_object(raw);
  if (!obj) throw Error(ErrorKind::kFormat, "judge reply contains no JSON object");
  json doc;
  try {
    doc = json::parse(*obj);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("judge reply JSON is malformed: ") + e.what());
  }
  auto level = [&](const char* name) {
    auto it = doc.find(name);
    if (it == doc.end() || !it->is_number()) {
      throw Error(ErrorKind::kFormat, fmt::format("judge reply lacks numeric \"{}\"", name));
    }
    return FactorLevel::snap(it->get<double>());
  };
  FactorScores s;
  s.explicitness = level("explicitness");
  s.depth = level("depth");
  s.consideration = level("consideration");
  s.evidence = level("evidence");
  if (auto it = doc.find("justification"); it != doc.end() && it->is_string()) {
    s.justification = it->get<std::string>();
  }
  return s;
}

std::vector<ScaleScore> score_transcript(const Transcript& t, const Rubric& rubric, Judge& judge,
                                         const ScaleOptions& options) {
  std::vector<ScaleScore> out;
  for (const auto& c : rubric.concepts) {
    for (Role side : {Role::kUser, Role::kAssistant}) {
      if (!c.applies_to(side)) continue;
      ScaleScore score;
      score.session_id = t.session_id;
      score.concept_id = c.id;
      score.side = side;
      score.weights = options.weights;
      const auto texts = side_view(t, side);
      if (texts.empty()) {
        score.failure = "no turns on this side";
        out.push_back(std::move(score));
        continue;
      }
      const auto prompt = build_scale_prompt(c, texts, side, rubric);
      for (int attempt = 0; attempt <= options.parse_retries; ++attempt) {
        try {
          auto factors = parse_factor_response(judge.complete(prompt));
          score.confidence = confidence(factors, options.weights);
          score.factors = std::move(factors);
          score.failure.clear();
          break;
        } catch (const Error& e) {
          switch (e.kind()) {
            case ErrorKind::kFormat:
            case ErrorKind::kRubricViolation:
              score.failure = e.what();
              continue;
            case ErrorKind::kTransport:
            case ErrorKind::kProtocol:
              score.failure = e.what();
              attempt = options.parse_retries;  // the client already retried
              continue;
            default:
              throw;
          }
        }
      }
      out.push_back(std::move(score));
    }
  }
  return out;
}

std::string scale_scores_csv_header() {
  return "session_id,concept,side,explicitness,depth,consideration,evidence,confidence\n";
}

std::string scale_score_csv_row(const ScaleScore& s) {
  if (s.missing()) {
    return fmt::format("{},{},{},NA,NA,NA,NA,NA\n", s.session_id, s.concept_id, to_string(s.side));
  }
  const auto v = s.factors->values();
  return fmt::format("{},{},{},{},{},{},{},{}\n", s.session_id, s.concept_id, to_string(s.side),
                     format_double(v[0]), format_double(v[1]), format_double(v[2]),
                     format_double(v[3]), format_double(*s.confidence));
}

}  // namespace bemseval
