#pragma once

#include <array>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bemseval {

enum class Level { kLow, kHigh };
enum class Quadrant { kLL = 0, kLH = 1, kHL = 2, kHH = 3 };  // domain knowledge letter first

inline constexpr std::array<Quadrant, 4> kQuadrants = {Quadrant::kLL, Quadrant::kLH, Quadrant::kHL,
                                                       Quadrant::kHH};

std::string_view to_string(Level level);
std::string_view to_string(Quadrant q);
Quadrant quadrant_of(Level domain_knowledge, Level ai_literacy);

// Middle of the sorted values; mean of the two middles for even sizes.
double median(std::span<const double> values);

// value > median -> High, otherwise Low. Throws kPrecondition on empty input.
std::vector<Level> median_split(std::span<const double> values);

struct ParticipantScores {
  std::string participant_id;
  double domain_knowledge = 0.0;
  double ai_literacy = 0.0;
};

struct GroupAssignment {
  std::string participant_id;
  Level dk_group = Level::kLow;
  Level al_group = Level::kLow;
  Quadrant quadrant = Quadrant::kLL;
};

struct Grouping {
  double dk_median = 0.0;
  double al_median = 0.0;
  std::vector<GroupAssignment> assignments;  // input order
};

// Requires at least two participants.
Grouping assign_groups(std::span<const ParticipantScores> participants);

// Mid-ranks (1-based) of the pooled values, in input order.
std::vector<double> midranks(std::span<const double> values);

// Regularized upper incomplete gamma Q(a, x), a > 0, x >= 0.
double regularized_gamma_q(double a, double x);

// Upper tail of the chi-square distribution.
double chi2_sf(double x, int df);

struct KruskalWallisResult {
  double h = 0.0;
  int df = 0;
  double p = 1.0;
};

// Tie-corrected H with the chi-square approximation. Throws kPrecondition for
// fewer than two groups or an empty group.
KruskalWallisResult kruskal_wallis(std::span<const std::vector<double>> groups);

struct MannWhitneyResult {
  double u = 0.0;    // min(U_a, U_b)
  double u_a = 0.0;  // pairs with a > b, ties counted half
  double p = 1.0;    // two-sided
  bool exact = false;
};

// Exact p is used when both samples have at most this many values and no value repeats.
inline constexpr std::size_t kExactMannWhitneyMax = 8;

MannWhitneyResult mann_whitney(std::span<const double> a, std::span<const double> b);

// Exact two-sided p for min-U statistic `u` with sample sizes m and n (no ties).
double mann_whitney_exact_p(double u, std::size_t m, std::size_t n);

// 1 - 2 U_a / (n_a n_b): positive when b tends to exceed a.
double rank_biserial(std::span<const double> a, std::span<const double> b);

// min(1, m p). Throws kDomain for p outside [0, 1] and kPrecondition for m < 1.
double bonferroni(double p, int m);
std::vector<double> bonferroni(std::span<const double> p, int m);

struct Descriptives {
  std::size_t n = 0;
  std::optional<double> mean;
  std::optional<double> sd;  // sample SD, needs n >= 2
  std::optional<double> median;
};

Descriptives describe(std::span<const double> values);

struct TwoSampleTest {
  std::string a;  // label of the first sample
  std::string b;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  MannWhitneyResult mw;
  double r = 0.0;
  std::optional<double> p_adjusted;  // pairwise comparisons only
};

struct MetricReport {
  std::string metric;
  std::size_t n = 0;        // participants with a value
  std::size_t missing = 0;  // participants dropped for this metric
  std::array<Descriptives, 4> groups;  // indexed by Quadrant
  bool flagged = false;                // some quadrant has no values; tests skipped
  std::optional<KruskalWallisResult> omnibus;
  std::optional<TwoSampleTest> dk_effect;  // Low vs High domain knowledge
  std::optional<TwoSampleTest> al_effect;  // Low vs High AI literacy
  std::vector<TwoSampleTest> pairwise;     // LL-LH, LL-HL, LL-HH, LH-HL, LH-HH, HL-HH
};

struct GroupReport {
  Grouping grouping;
  std::array<std::size_t, 4> quadrant_sizes{};
  std::vector<MetricReport> metrics;
  std::vector<std::string> warnings;
};

// Long-format metric table. Missing values are empty optionals.
struct MetricsTable {
  std::vector<std::string> participants;  // first-seen order
  std::vector<std::string> metrics;       // first-seen order, grouping columns excluded
  std::map<std::string, std::map<std::string, std::optional<double>>> values;  // participant -> metric
  std::map<std::string, ParticipantScores> scores;
};

inline constexpr std::string_view kDomainKnowledgeColumn = "domain_knowledge";
inline constexpr std::string_view kAiLiteracyColumn = "ai_literacy";

// Reads `participant_id,metric,value`. "NA" or an empty value marks a missing
// value. Every participant must carry both grouping rows and a row for every
// metric; violations throw kSchema.
MetricsTable parse_metrics_long_csv(std::istream& in, std::string_view source_name);

GroupReport build_report(const MetricsTable& table);

std::string report_to_json(const GroupReport& report);
std::string report_to_markdown(const GroupReport& report);

}  // namespace bemseval
