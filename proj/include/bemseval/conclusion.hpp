#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bemseval/judge.hpp"
#include "bemseval/saving_potential.hpp"

namespace bemseval {

enum class ReviewStatus { kUnreviewed, kConfirmed, kCorrected };
enum class FlagKind { kAppliance, kStrategy };

std::string_view to_string(ReviewStatus status);
std::string_view to_string(FlagKind kind);

struct VerdictFlag {
  std::string key;          // appliance id or strategy id
  bool judge_match = false; // as returned by the judge, never edited
  bool match = false;       // current value after review
  std::string justification;
};

struct ReviewEdit {
  FlagKind kind = FlagKind::kStrategy;
  std::string key;
  bool match = false;
};

struct ReviewChange {
  FlagKind kind;
  std::string key;
  bool from;
  bool to;
};

struct ReviewLogEntry {
  int sequence = 0;
  std::string note;
  bool forced = false;
  ReviewStatus status_after = ReviewStatus::kConfirmed;
  std::vector<ReviewChange> changes;
};

struct ConclusionVerdict {
  std::string session_id;
  bool scored = false;  // false: judge output unusable, manual review required
  std::string failure;
  std::vector<VerdictFlag> appliances;  // reference target order
  std::vector<VerdictFlag> strategies;  // reference strategy order
  ReviewStatus review_status = ReviewStatus::kUnreviewed;
  std::vector<ReviewLogEntry> review_log;

  const VerdictFlag& flag(FlagKind kind, std::string_view key) const;
};

struct AlignmentRates {
  int appliances_matched = 0;
  int strategies_matched = 0;
  double appliance_identification_rate = 0.0;  // matched / 5
  double strategy_alignment_rate = 0.0;        // matched / 7
  double overall_alignment = 0.0;              // mean of the two
};

struct ConclusionOptions {
  // Whether one participant recommendation may satisfy several reference strategies.
  bool allow_multi_match = true;
  int parse_retries = 1;
};

std::vector<ChatMessage> build_conclusion_prompt(std::string_view conclusion_text,
                                                 const ReferenceSolutions& refs,
                                                 const ConclusionOptions& options = {});

// Reads {"appliances":{id:{"match":bool,...}}, "strategies":{...}} from a judge reply.
ConclusionVerdict parse_conclusion_response(std::string_view raw, const ReferenceSolutions& refs);

// One judge call for all flags. An empty conclusion is scored without a call.
// Unusable judge output yields an unscored verdict instead of an exception;
// replay misses propagate.
ConclusionVerdict judge_conclusion(std::string_view session_id, std::string_view conclusion_text,
                                   const ReferenceSolutions& refs, Judge& judge,
                                   const ConclusionOptions& options = {});

// Throws kPrecondition for unscored verdicts.
AlignmentRates rates(const ConclusionVerdict& v);

// Returns the reviewed copy. Without `force`, edits are refused once a verdict
// has been confirmed or corrected.
ConclusionVerdict apply_review(const ConclusionVerdict& v, std::span<const ReviewEdit> edits,
                               std::string_view note, bool force = false);

std::string verdict_to_json(const ConclusionVerdict& v);
ConclusionVerdict parse_verdict_json(std::string_view json_text);

}  // namespace bemseval
