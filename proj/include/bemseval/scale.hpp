#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bemseval/judge.hpp"
#include "bemseval/transcript.hpp"

namespace bemseval {

// Four-factor rubric scoring of whether a concept is substantively present in
// one side of a conversation.

enum class ConceptSides { kUserOnly, kBoth };

struct Concept {
  std::string id;
  std::string name;
  std::string category;  // "conversational_reasoning" | "home_energy_analysis"
  ConceptSides sides = ConceptSides::kBoth;
  std::string definition;
  std::vector<std::string> examples;

  bool applies_to(Role side) const { return sides == ConceptSides::kBoth || side == Role::kUser; }
};

struct RubricFactor {
  std::string id;  // explicitness | depth | consideration | evidence
  std::string name;
  std::string description;
  std::vector<std::string> user_criteria;       // 6 lines, 1.0 down to 0.0
  std::vector<std::string> assistant_criteria;  // 6 lines, 1.0 down to 0.0
};

struct Rubric {
  std::vector<RubricFactor> factors;  // exactly 4, in factor order
  std::vector<Concept> concepts;

  void validate() const;
  const Concept& concept_by_id(std::string_view id) const;
};

// The built-in rubric and the 11 default concepts.
std::string default_rubric_json();
Rubric parse_rubric_json(std::string_view json_text);
Rubric default_rubric();

// One of the six rubric levels 0.0, 0.2, ..., 1.0, stored as 0..5.
class FactorLevel {
 public:
  static constexpr int kLevels = 6;
  static constexpr double kSnapTolerance = 0.05;

  constexpr FactorLevel() = default;
  static FactorLevel from_index(int index);
  // Nearest lattice value within kSnapTolerance; throws kRubricViolation.
  static FactorLevel snap(double raw);

  int index() const { return index_; }
  double value() const { return index_ / 5.0; }
  bool operator==(const FactorLevel&) const = default;

 private:
  int index_ = 0;
};

struct FactorScores {
  FactorLevel explicitness;
  FactorLevel depth;
  FactorLevel consideration;
  FactorLevel evidence;
  std::string justification;

  std::array<double, 4> values() const;
};

using FactorWeights = std::array<double, 4>;
inline constexpr FactorWeights kEqualWeights{1.0, 1.0, 1.0, 1.0};

// (w1*E + w2*D + w3*C + w4*V) / 4. The divisor stays 4 for any weights; the
// FactorScores overload sums lattice indices so equal weights give exactly k/20.
double confidence(const FactorScores& factors, const FactorWeights& weights = kEqualWeights);
double confidence(const std::array<double, 4>& factors, const FactorWeights& weights);

std::vector<ChatMessage> build_scale_prompt(const Concept& concept_def,
                                            std::span<const std::string> side_texts, Role side,
                                            const Rubric& rubric);

// Parses the first JSON object in a judge reply.
FactorScores parse_factor_response(std::string_view raw);

struct ScaleScore {
  std::string session_id;
  std::string concept_id;
  Role side = Role::kUser;
  std::optional<FactorScores> factors;  // nullopt = judgment failed
  std::optional<double> confidence;
  FactorWeights weights = kEqualWeights;
  std::string failure;  // why the entry is missing

  bool missing() const { return !confidence.has_value(); }
};

struct ScaleOptions {
  FactorWeights weights = kEqualWeights;
  int parse_retries = 1;  // extra judge calls after a malformed reply
};

// One judgment per (concept, applicable side). Malformed replies and judge
// transport failures become missing entries; replay misses propagate.
std::vector<ScaleScore> score_transcript(const Transcript& t, const Rubric& rubric, Judge& judge,
                                         const ScaleOptions& options = {});

// session_id,concept,side,explicitness,depth,consideration,evidence,confidence
std::string scale_scores_csv_header();
std::string scale_score_csv_row(const ScaleScore& score);

}  // namespace bemseval
