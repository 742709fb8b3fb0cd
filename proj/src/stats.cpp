#include "bemseval/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "bemseval/error.hpp"
#include "bemseval/util.hpp"

namespace bemseval {

using ojson = nlohmann::ordered_json;

std::string_view to_string(Level level) { return level == Level::kLow ? "Low" : "High"; }

std::string_view to_string(Quadrant q) {
  switch (q) {
    case Quadrant::kLL: return "LL";
    case Quadrant::kLH: return "LH";
    case Quadrant::kHL: return "HL";
    case Quadrant::kHH: return "HH";
  }
  return "?";
}

Quadrant quadrant_of(Level dk, Level al) {
  return static_cast<Quadrant>((dk == Level::kHigh ? 2 : 0) + (al == Level::kHigh ? 1 : 0));
}

double median(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::kPrecondition, "median of an empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

std::vector<Level> median_split(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::kPrecondition, "median split of an empty sample");
  const double m = median(values);
  std::vector<Level> out;
  out.reserve(values.size());
  for (double x : values) out.push_back(x > m ? Level::kHigh : Level::kLow);
  return out;
}

Grouping assign_groups(std::span<const ParticipantScores> participants) {
  if (participants.size() < 2) {
    throw Error(ErrorKind::kPrecondition, "grouping needs at least two participants");
  }
  std::vector<double> dk, al;
  for (const auto& p : participants) {
    dk.push_back(p.domain_knowledge);
    al.push_back(p.ai_literacy);
  }
  Grouping g;
  g.dk_median = median(dk);
  g.al_median = median(al);
  const auto dk_levels = median_split(dk);
  const auto al_levels = median_split(al);
  for (std::size_t i = 0; i < participants.size(); ++i) {
    g.assignments.push_back({participants[i].participant_id, dk_levels[i], al_levels[i],
                             quadrant_of(dk_levels[i], al_levels[i])});
  }
  return g;
}

std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

namespace {

// Sum of t^3 - t over groups of tied values.
double tie_term(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    sum += t * t * t - t;
    i = j + 1;
  }
  return sum;
}

constexpr double kGammaEps = 1e-16;
constexpr int kGammaMaxIter = 10000;

double gamma_prefactor(double a, double x) { return std::exp(-x + a * std::log(x) - std::lgamma(a)); }

double gamma_p_series(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int i = 0; i < kGammaMaxIter; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kGammaEps) break;
  }
  return sum * gamma_prefactor(a, x);
}

// Modified Lentz evaluation of the continued fraction for Q.
double gamma_q_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kGammaEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kGammaEps) break;
  }
  return gamma_prefactor(a, x) * h;
}

}  // namespace

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0) || !std::isfinite(a)) {
    throw Error(ErrorKind::kDomain, fmt::format("incomplete gamma undefined for a={}, x={}", a, x));
  }
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return std::clamp(1.0 - gamma_p_series(a, x), 0.0, 1.0);
  return std::clamp(gamma_q_fraction(a, x), 0.0, 1.0);
}

double chi2_sf(double x, int df) {
  if (df < 1) throw Error(ErrorKind::kDomain, "chi-square degrees of freedom must be >= 1");
  if (std::isnan(x)) throw Error(ErrorKind::kDomain, "chi-square statistic is NaN");
  if (x <= 0.0) return 1.0;
  return regularized_gamma_q(df / 2.0, x / 2.0);
}

KruskalWallisResult kruskal_wallis(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) throw Error(ErrorKind::kPrecondition, "Kruskal-Wallis needs >= 2 groups");
  std::vector<double> pooled;
  for (const auto& g : groups) {
    if (g.empty()) throw Error(ErrorKind::kPrecondition, "Kruskal-Wallis group is empty");
    pooled.insert(pooled.end(), g.begin(), g.end());
  }
  KruskalWallisResult res;
  res.df = static_cast<int>(groups.size()) - 1;
  const double n = static_cast<double>(pooled.size());
  const double correction = 1.0 - tie_term(pooled) / (n * n * n - n);
  if (correction <= 0.0) return res;  // every value equal

  const auto ranks = midranks(pooled);
  double sum_sq = 0.0;
  std::size_t offset = 0;
  for (const auto& g : groups) {
    double r = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) r += ranks[offset + i];
    sum_sq += r * r / static_cast<double>(g.size());
    offset += g.size();
  }
  const double h = (12.0 / (n * (n + 1.0)) * sum_sq - 3.0 * (n + 1.0)) / correction;
  res.h = std::max(0.0, h);
  res.p = chi2_sf(res.h, res.df);
  return res;
}

double mann_whitney_exact_p(double u, std::size_t m, std::size_t n) {
  // counts[i][j][k]: arrangements of i a-values and j b-values with U_a = k.
  const std::size_t max_u = m * n;
  std::vector<std::vector<std::vector<double>>> counts(
      m + 1, std::vector<std::vector<double>>(n + 1, std::vector<double>(max_u + 1, 0.0)));
  for (std::size_t i = 0; i <= m; ++i) {
    for (std::size_t j = 0; j <= n; ++j) {
      if (i == 0 || j == 0) {
        counts[i][j][0] = 1.0;
        continue;
      }
      for (std::size_t k = 0; k <= i * j; ++k) {
        // Largest value from a beats all j b-values; from b it beats none of a.
        const double from_a = k >= j ? counts[i - 1][j][k - j] : 0.0;
        counts[i][j][k] = from_a + counts[i][j - 1][k];
      }
    }
  }
  const double total = std::accumulate(counts[m][n].begin(), counts[m][n].end(), 0.0);
  double tail = 0.0;
  for (std::size_t k = 0; k <= max_u && static_cast<double>(k) <= u + 1e-9; ++k) tail += counts[m][n][k];
  return std::min(1.0, 2.0 * tail / total);
}

namespace {

bool has_ties(std::span<const double> a, std::span<const double> b) {
  std::vector<double> v(a.begin(), a.end());
  v.insert(v.end(), b.begin(), b.end());
  std::sort(v.begin(), v.end());
  return std::adjacent_find(v.begin(), v.end()) != v.end();
}

double u_of_first(std::span<const double> a, std::span<const double> b) {
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = midranks(pooled);
  const double na = static_cast<double>(a.size());
  double ra = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ra += ranks[i];
  return ra - na * (na + 1.0) / 2.0;
}

void require_nonempty(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorKind::kPrecondition, fmt::format("{} needs two nonempty samples", what));
  }
}

}  // namespace

MannWhitneyResult mann_whitney(std::span<const double> a, std::span<const double> b) {
  require_nonempty(a, b, "Mann-Whitney U");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  MannWhitneyResult res;
  res.u_a = u_of_first(a, b);
  res.u = std::min(res.u_a, na * nb - res.u_a);

  if (a.size() <= kExactMannWhitneyMax && b.size() <= kExactMannWhitneyMax && !has_ties(a, b)) {
    res.exact = true;
    res.p = mann_whitney_exact_p(res.u, a.size(), b.size());
    return res;
  }
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const double n = na + nb;
  const double var = na * nb / 12.0 * ((n + 1.0) - tie_term(pooled) / (n * (n - 1.0)));
  if (!(var > 0.0)) {
    res.p = 1.0;
    return res;
  }
  const double z = std::max(0.0, std::abs(res.u_a - na * nb / 2.0) - 0.5) / std::sqrt(var);
  res.p = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return res;
}

double rank_biserial(std::span<const double> a, std::span<const double> b) {
  require_nonempty(a, b, "rank-biserial correlation");
  const double nanb = static_cast<double>(a.size()) * static_cast<double>(b.size());
  return 1.0 - 2.0 * u_of_first(a, b) / nanb;
}

double bonferroni(double p, int m) {
  if (m < 1) throw Error(ErrorKind::kPrecondition, "Bonferroni needs m >= 1");
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::kDomain, fmt::format("p-value {} outside [0, 1]", p));
  }
  return std::min(1.0, m * p);
}

std::vector<double> bonferroni(std::span<const double> p, int m) {
  std::vector<double> out;
  out.reserve(p.size());
  for (double x : p) out.push_back(bonferroni(x, m));
  return out;
}

Descriptives describe(std::span<const double> values) {
  Descriptives d;
  d.n = values.size();
  if (values.empty()) return d;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  d.mean = mean;
  d.median = median(values);
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double x : values) ss += (x - mean) * (x - mean);
    d.sd = std::sqrt(ss / (n - 1.0));
  }
  return d;
}

MetricsTable parse_metrics_long_csv(std::istream& in, std::string_view source_name) {
  static constexpr std::array<std::string_view, 3> kHeader = {"participant_id", "metric", "value"};
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::kSchema, fmt::format("{}: empty metrics file", source_name));
  }
  const auto header = split_csv_line(line);
  for (std::size_t i = 0; i < kHeader.size(); ++i) {
    const std::string found = i < header.size() ? trim(header[i]) : std::string("<none>");
    if (found != kHeader[i]) {
      throw Error(ErrorKind::kSchema, fmt::format("{}: column {} must be \"{}\", found \"{}\"",
                                                  source_name, i + 1, kHeader[i], found));
    }
  }
  if (header.size() != kHeader.size()) {
    throw Error(ErrorKind::kSchema,
                fmt::format("{}: unexpected column \"{}\"", source_name, trim(header[3])));
  }

  MetricsTable t;
  std::map<std::string, std::map<std::string, std::optional<double>>> grouping;
  std::set<std::string> seen_metrics;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) {
      throw Error(ErrorKind::kSchema, fmt::format("{} row {}: expected 3 fields, found {}",
                                                  source_name, row, fields.size()));
    }
    const auto pid = trim(fields[0]);
    const auto metric = trim(fields[1]);
    const auto raw = trim(fields[2]);
    if (pid.empty()) {
      throw Error(ErrorKind::kSchema,
                  fmt::format("{} row {}: column participant_id is empty", source_name, row));
    }
    if (metric.empty()) {
      throw Error(ErrorKind::kSchema, fmt::format("{} row {}: column metric is empty", source_name, row));
    }
    std::optional<double> value;
    if (!raw.empty() && raw != "NA") {
      value = parse_double(raw);
      if (!value || !std::isfinite(*value)) {
        throw Error(ErrorKind::kSchema, fmt::format("{} row {}: column value: '{}' is not a number",
                                                    source_name, row, raw));
      }
    }
    if (!t.values.count(pid)) {
      t.participants.push_back(pid);
      t.values[pid];
    }
    const bool is_grouping = metric == kDomainKnowledgeColumn || metric == kAiLiteracyColumn;
    auto& slot = is_grouping ? grouping[pid] : t.values[pid];
    if (slot.count(metric)) {
      throw Error(ErrorKind::kSchema, fmt::format("{} row {}: duplicate value for {} / {}",
                                                  source_name, row, pid, metric));
    }
    slot[metric] = value;
    if (!is_grouping && seen_metrics.insert(metric).second) t.metrics.push_back(metric);
  }

  for (const auto& pid : t.participants) {
    ParticipantScores s{pid, 0.0, 0.0};
    for (auto column : {kDomainKnowledgeColumn, kAiLiteracyColumn}) {
      auto it = grouping[pid].find(std::string(column));
      if (it == grouping[pid].end() || !it->second) {
        throw Error(ErrorKind::kSchema, fmt::format("{}: participant {} has no {} value",
                                                    source_name, pid, column));
      }
      (column == kDomainKnowledgeColumn ? s.domain_knowledge : s.ai_literacy) = *it->second;
    }
    t.scores[pid] = s;
    for (const auto& m : t.metrics) {
      if (!t.values[pid].count(m)) {
        throw Error(ErrorKind::kSchema,
                    fmt::format("{}: participant {} has no row for metric {}", source_name, pid, m));
      }
    }
  }
  return t;
}

namespace {

constexpr std::array<std::pair<Quadrant, Quadrant>, 6> kPairs = {{
    {Quadrant::kLL, Quadrant::kLH},
    {Quadrant::kLL, Quadrant::kHL},
    {Quadrant::kLL, Quadrant::kHH},
    {Quadrant::kLH, Quadrant::kHL},
    {Quadrant::kLH, Quadrant::kHH},
    {Quadrant::kHL, Quadrant::kHH},
}};

TwoSampleTest two_sample(std::string a_label, std::string b_label, std::span<const double> a,
                         std::span<const double> b) {
  TwoSampleTest t;
  t.a = std::move(a_label);
  t.b = std::move(b_label);
  t.n_a = a.size();
  t.n_b = b.size();
  t.mw = mann_whitney(a, b);
  t.r = rank_biserial(a, b);
  return t;
}

MetricReport metric_report(const std::string& metric, const MetricsTable& table,
                           const Grouping& grouping, std::vector<std::string>& warnings) {
  MetricReport rep;
  rep.metric = metric;
  std::array<std::vector<double>, 4> by_quadrant;
  std::vector<double> dk_low, dk_high, al_low, al_high;
  for (const auto& g : grouping.assignments) {
    const auto& v = table.values.at(g.participant_id).at(metric);
    if (!v) {
      ++rep.missing;
      continue;
    }
    ++rep.n;
    by_quadrant[static_cast<int>(g.quadrant)].push_back(*v);
    (g.dk_group == Level::kLow ? dk_low : dk_high).push_back(*v);
    (g.al_group == Level::kLow ? al_low : al_high).push_back(*v);
  }
  for (std::size_t q = 0; q < 4; ++q) rep.groups[q] = describe(by_quadrant[q]);

  std::vector<std::string> empty;
  for (auto q : kQuadrants) {
    if (by_quadrant[static_cast<int>(q)].empty()) empty.emplace_back(to_string(q));
  }
  if (!empty.empty()) {
    rep.flagged = true;
    warnings.push_back(fmt::format("metric {}: no values in group(s) {}; tests skipped", metric,
                                   fmt::join(empty, ", ")));
    return rep;
  }
  if (rep.missing > 0) {
    warnings.push_back(fmt::format("metric {}: {} participant(s) missing, dropped", metric, rep.missing));
  }

  rep.omnibus = kruskal_wallis(std::span<const std::vector<double>>(by_quadrant));
  rep.dk_effect = two_sample("Low", "High", dk_low, dk_high);
  rep.al_effect = two_sample("Low", "High", al_low, al_high);
  for (const auto& [qa, qb] : kPairs) {
    auto t = two_sample(std::string(to_string(qa)), std::string(to_string(qb)),
                        by_quadrant[static_cast<int>(qa)], by_quadrant[static_cast<int>(qb)]);
    t.p_adjusted = bonferroni(t.mw.p, static_cast<int>(kPairs.size()));
    rep.pairwise.push_back(std::move(t));
  }
  return rep;
}

}  // namespace

GroupReport build_report(const MetricsTable& table) {
  std::vector<ParticipantScores> scores;
  for (const auto& pid : table.participants) scores.push_back(table.scores.at(pid));
  GroupReport report;
  report.grouping = assign_groups(scores);
  for (const auto& a : report.grouping.assignments) ++report.quadrant_sizes[static_cast<int>(a.quadrant)];
  for (const auto& m : table.metrics) {
    report.metrics.push_back(metric_report(m, table, report.grouping, report.warnings));
  }
  return report;
}

namespace {

ojson opt(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

ojson test_json(const TwoSampleTest& t) {
  ojson j;
  j["a"] = t.a;
  j["b"] = t.b;
  j["n_a"] = t.n_a;
  j["n_b"] = t.n_b;
  j["U"] = t.mw.u;
  j["U_a"] = t.mw.u_a;
  j["exact"] = t.mw.exact;
  if (t.p_adjusted) {
    j["p_raw"] = t.mw.p;
    j["p_bonferroni"] = *t.p_adjusted;
  } else {
    j["p"] = t.mw.p;
  }
  j["r"] = t.r;
  return j;
}

std::string stars(double p) { return p < 0.05 ? "*" : ""; }

std::string mean_sd(const Descriptives& d) {
  if (!d.mean) return "NA";
  if (!d.sd) return format_fixed(*d.mean, 2);
  return fmt::format("{}±{}", format_fixed(*d.mean, 2), format_fixed(*d.sd, 2));
}

}  // namespace

std::string report_to_json(const GroupReport& report) {
  ojson doc;
  ojson groups;
  groups["domain_knowledge_median"] = report.grouping.dk_median;
  groups["ai_literacy_median"] = report.grouping.al_median;
  ojson sizes;
  for (auto q : kQuadrants) sizes[std::string(to_string(q))] = report.quadrant_sizes[static_cast<int>(q)];
  groups["sizes"] = sizes;
  groups["assignments"] = ojson::array();
  for (const auto& a : report.grouping.assignments) {
    groups["assignments"].push_back({{"participant_id", a.participant_id},
                                     {"domain_knowledge", to_string(a.dk_group)},
                                     {"ai_literacy", to_string(a.al_group)},
                                     {"group", to_string(a.quadrant)}});
  }
  doc["groups"] = groups;

  doc["metrics"] = ojson::array();
  for (const auto& m : report.metrics) {
    ojson j;
    j["metric"] = m.metric;
    j["n"] = m.n;
    j["missing"] = m.missing;
    j["flagged"] = m.flagged;
    ojson desc;
    for (auto q : kQuadrants) {
      const auto& d = m.groups[static_cast<int>(q)];
      desc[std::string(to_string(q))] = {
          {"n", d.n}, {"mean", opt(d.mean)}, {"sd", opt(d.sd)}, {"median", opt(d.median)}};
    }
    j["descriptives"] = desc;
    j["omnibus"] = m.omnibus ? ojson{{"H", m.omnibus->h}, {"df", m.omnibus->df}, {"p", m.omnibus->p}}
                             : ojson(nullptr);
    if (m.dk_effect && m.al_effect) {
      j["main_effects"] = {{"domain_knowledge", test_json(*m.dk_effect)},
                           {"ai_literacy", test_json(*m.al_effect)}};
    } else {
      j["main_effects"] = nullptr;
    }
    j["pairwise"] = ojson::array();
    for (const auto& t : m.pairwise) j["pairwise"].push_back(test_json(t));
    doc["metrics"].push_back(std::move(j));
  }
  doc["warnings"] = report.warnings;
  return doc.dump(2) + "\n";
}

std::string report_to_markdown(const GroupReport& report) {
  const auto& sz = report.quadrant_sizes;
  std::string out = "# Group comparison report\n\n";
  out += fmt::format(
      "Median split: domain knowledge median {}, AI literacy median {} (value <= median is Low).\n"
      "Group letters: domain knowledge, then AI literacy. Significance: * p < .05.\n\n",
      format_double(report.grouping.dk_median), format_double(report.grouping.al_median));

  out += "## Descriptives and Kruskal-Wallis H (df = 3)\n\n";
  out += fmt::format("| Metric | LL (n={}) | LH (n={}) | HL (n={}) | HH (n={}) | H | p |\n", sz[0],
                     sz[1], sz[2], sz[3]);
  out += "|---|---|---|---|---|---|---|\n";
  for (const auto& m : report.metrics) {
    out += fmt::format("| {} | {} | {} | {} | {} |", m.metric, mean_sd(m.groups[0]),
                       mean_sd(m.groups[1]), mean_sd(m.groups[2]), mean_sd(m.groups[3]));
    if (m.omnibus) {
      out += fmt::format(" {} | {}{} |\n", format_fixed(m.omnibus->h, 2),
                         format_fixed(m.omnibus->p, 3), stars(m.omnibus->p));
    } else {
      out += " skipped | skipped |\n";
    }
  }

  out += "\n## Main effects (Mann-Whitney U, Low vs High)\n\n";
  out += "| Metric | Factor | n Low | n High | U | p | r |\n|---|---|---|---|---|---|---|\n";
  for (const auto& m : report.metrics) {
    if (!m.dk_effect) continue;
    for (const auto& [name, t] : {std::pair{"domain knowledge", &*m.dk_effect},
                                  std::pair{"AI literacy", &*m.al_effect}}) {
      out += fmt::format("| {} | {} | {} | {} | {} | {}{} | {} |\n", m.metric, name, t->n_a, t->n_b,
                         format_double(t->mw.u), format_fixed(t->mw.p, 3), stars(t->mw.p),
                         format_fixed(t->r, 2));
    }
  }

  out += "\n## Pairwise comparisons (Mann-Whitney U, Bonferroni m = 6)\n\n";
  out += "| Metric | Pair | U | p | p (Bonferroni) | r |\n|---|---|---|---|---|---|\n";
  for (const auto& m : report.metrics) {
    for (const auto& t : m.pairwise) {
      out += fmt::format("| {} | {}-{} | {} | {} | {}{} | {} |\n", m.metric, t.a, t.b,
                         format_double(t.mw.u), format_fixed(t.mw.p, 3),
                         format_fixed(*t.p_adjusted, 3), stars(*t.p_adjusted), format_fixed(t.r, 2));
    }
  }

  if (!report.warnings.empty()) {
    out += "\n## Warnings\n\n";
    for (const auto& w : report.warnings) out += fmt::format("- {}\n", w);
  }
  return out;
}

}  // namespace bemseval
