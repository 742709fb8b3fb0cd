#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

#include "bemseval/stats.hpp"
#include "expect_error.hpp"
#include "rank_oracle.hpp"

using namespace bemseval;
using testsupport::error_kind;

namespace {

std::vector<double> distinct_sample(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> out;
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (std::size_t i = 0; i < n; ++i) out.push_back(u(rng));
  return out;
}

std::vector<double> cubed(std::vector<double> v) {
  for (auto& x : v) x = x * x * x;
  return v;
}

// Eight participants, two per quadrant; `metric_value(i)` empty means NA.
std::string long_csv(const std::function<std::string(int)>& metric_value) {
  const double dk[] = {1, 1.5, 1, 1.5, 4, 4.5, 4, 4.5};
  const double al[] = {1, 1.5, 4, 4.5, 1, 1.5, 4, 4.5};
  std::string out = "participant_id,metric,value\n";
  for (int i = 0; i < 8; ++i) {
    const auto id = fmt::format("P{}", i + 1);
    out += fmt::format("{},domain_knowledge,{}\n{},ai_literacy,{}\n", id, dk[i], id, al[i]);
    const auto v = metric_value(i);
    out += fmt::format("{},turns,{}\n", id, v.empty() ? "NA" : v);
    out += fmt::format("{},constant,5\n", id);
  }
  return out;
}

MetricsTable parse(const std::string& text) {
  std::istringstream in(text);
  return parse_metrics_long_csv(in, "metrics.csv");
}

}  // namespace

TEST_CASE("median split puts the median itself in the low group") {
  const std::vector<double> a{1, 2, 3, 4};
  CHECK(median_split(a) == std::vector<Level>{Level::kLow, Level::kLow, Level::kHigh, Level::kHigh});
  const std::vector<double> b{1, 2, 2, 3};
  CHECK(median_split(b) == std::vector<Level>{Level::kLow, Level::kLow, Level::kLow, Level::kHigh});
  const std::vector<double> same{3, 3, 3};
  for (auto l : median_split(same)) CHECK(l == Level::kLow);
  CHECK(error_kind([] { median_split(std::vector<double>{}); }) == ErrorKind::kPrecondition);
}

TEST_CASE("groups combine both splits into quadrants") {
  const std::vector<ParticipantScores> p{{"A", 1, 1}, {"B", 1, 5}, {"C", 5, 1}, {"D", 5, 5}};
  auto g = assign_groups(p);
  CHECK(g.dk_median == 3.0);
  CHECK(g.assignments[0].quadrant == Quadrant::kLL);
  CHECK(g.assignments[1].quadrant == Quadrant::kLH);
  CHECK(g.assignments[2].quadrant == Quadrant::kHL);
  CHECK(g.assignments[3].quadrant == Quadrant::kHH);
  CHECK(to_string(Quadrant::kLH) == "LH");
}

TEST_CASE("kruskal-wallis on four separated groups of three") {
  const std::vector<std::vector<double>> g{{1, 2, 3}, {4, 5, 6}, {7, 8, 9}, {10, 11, 12}};
  auto r = kruskal_wallis(g);
  CHECK(std::abs(r.h - 10.3846) <= 1e-4);
  CHECK(r.h == doctest::Approx(12.0 / 156.0 * (36 + 225 + 576 + 1089) / 3.0 - 39.0).epsilon(1e-12));
  CHECK(r.df == 3);
  CHECK(r.p == doctest::Approx(chi2_sf(r.h, 3)).epsilon(1e-12));

  const std::vector<std::vector<double>> same{{1, 2, 3}, {1, 2, 3}, {1, 2, 3}, {1, 2, 3}};
  auto s = kruskal_wallis(same);
  CHECK(std::abs(s.h) <= 1e-12);
  CHECK(s.p == doctest::Approx(1.0));

  const std::vector<std::vector<double>> one{{1, 2}};
  CHECK(error_kind([&] { kruskal_wallis(one); }) == ErrorKind::kPrecondition);
  const std::vector<std::vector<double>> hollow{{1, 2}, {}};
  CHECK(error_kind([&] { kruskal_wallis(hollow); }) == ErrorKind::kPrecondition);
}

TEST_CASE("kruskal-wallis without ties matches the textbook statistic") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::vector<double>> groups;
    std::vector<double> pooled;
    std::vector<int> labels;
    for (int g = 0; g < 4; ++g) {
      groups.push_back(distinct_sample(rng, 2 + rng() % 5));
      for (double v : groups.back()) {
        pooled.push_back(v);
        labels.push_back(g);
      }
    }
    CHECK(kruskal_wallis(groups).h ==
          doctest::Approx(testsupport::kw_statistic(pooled, labels, 4)).epsilon(1e-10));
    std::vector<std::vector<double>> c;
    for (const auto& g : groups) c.push_back(cubed(g));
    CHECK(kruskal_wallis(c).h == doctest::Approx(kruskal_wallis(groups).h).epsilon(1e-12));
  }
}

TEST_CASE("chi-square tail and the incomplete gamma function") {
  CHECK(std::abs(chi2_sf(7.815, 3) - 0.05) <= 1e-4);
  CHECK(std::abs(chi2_sf(3.841, 1) - 0.05) <= 1e-4);
  CHECK(chi2_sf(0.0, 3) == 1.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> a(0.1, 30.0), x(0.0, 60.0);
  for (int i = 0; i < 2000; ++i) {
    const double av = a(rng), xv = x(rng);
    const double ref = boost::math::gamma_q(av, xv);
    CHECK(std::abs(regularized_gamma_q(av, xv) - ref) <= 1e-12 + 1e-10 * ref);
  }
}

TEST_CASE("mann-whitney examples") {
  const std::vector<double> lo{1, 2, 3}, hi{4, 5, 6};
  auto r = mann_whitney(lo, hi);
  CHECK(r.u == 0.0);
  CHECK(r.exact);
  CHECK(r.p == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(rank_biserial(lo, hi) == 1.0);
  CHECK(rank_biserial(hi, lo) == -1.0);

  const std::vector<double> a{1, 3}, b{2, 4};
  auto s = mann_whitney(a, b);
  CHECK(s.u == 1.0);
  CHECK(s.u_a == 1.0);
  CHECK(std::abs(s.p - 2.0 / 3.0) <= 1e-12);

  const std::vector<double> x{2, 2, 5, 7}, y{2, 2, 5, 7};
  auto t = mann_whitney(x, y);
  CHECK_FALSE(t.exact);
  CHECK(t.p == doctest::Approx(1.0));
  CHECK(rank_biserial(x, y) == 0.0);
}

TEST_CASE("exact mann-whitney p equals full enumeration") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    auto a = distinct_sample(rng, 1 + rng() % 8);
    auto b = distinct_sample(rng, 1 + rng() % 8);
    auto r = mann_whitney(a, b);
    REQUIRE(r.exact);
    CHECK(r.u_a == testsupport::pair_count_u(a, b));
    CHECK(std::abs(r.p - testsupport::enumerate_mw_p(a.size(), b.size(), r.u)) <= 1e-12);
    CHECK(r.p == mann_whitney_exact_p(r.u, a.size(), b.size()));
    CHECK(r.p > 0.0);
    CHECK(r.p <= 1.0);
    auto c = mann_whitney(cubed(a), cubed(b));
    CHECK(c.u == r.u);
    CHECK(c.p == r.p);
    CHECK(std::abs(rank_biserial(a, b) + rank_biserial(b, a)) <= 1e-12);
  }
}

TEST_CASE("large-sample mann-whitney tracks a permutation oracle") {
  std::mt19937_64 rng(19);
  for (int i = 0; i < 10; ++i) {
    auto a = distinct_sample(rng, 12);
    auto b = distinct_sample(rng, 14);
    for (auto& v : b) v += 15.0;
    auto r = mann_whitney(a, b);
    CHECK_FALSE(r.exact);
    CHECK(std::abs(r.p - testsupport::mw_permutation_p(a, b, 20000, rng)) <= 0.02);
  }
}

TEST_CASE("bonferroni scales and caps at one") {
  CHECK(bonferroni(0.01, 6) == doctest::Approx(0.06));
  CHECK(bonferroni(0.5, 6) == 1.0);
  CHECK(bonferroni(0.0083, 6) == doctest::Approx(0.0498));
  CHECK(error_kind([] { bonferroni(1.5, 6); }) == ErrorKind::kDomain);
  CHECK(error_kind([] { bonferroni(-0.1, 6); }) == ErrorKind::kDomain);
  CHECK(error_kind([] { bonferroni(0.1, 0); }) == ErrorKind::kPrecondition);
  const std::vector<double> ps{0.01, 0.2};
  CHECK(bonferroni(ps, 6) == std::vector<double>{bonferroni(0.01, 6), 1.0});
}

TEST_CASE("descriptives use the sample standard deviation") {
  const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
  auto d = describe(v);
  CHECK(d.n == 8);
  CHECK(*d.mean == 5.0);
  CHECK(*d.sd == doctest::Approx(std::sqrt(32.0 / 7.0)).epsilon(1e-12));
  CHECK(*d.median == 4.5);
  auto one = describe(std::vector<double>{3});
  CHECK_FALSE(one.sd.has_value());
  CHECK_FALSE(describe(std::vector<double>{}).mean.has_value());
}

TEST_CASE("report covers every metric with omnibus, main effects and six pairs") {
  auto table = parse(long_csv([](int i) { return std::to_string(i * 3 + 1); }));
  CHECK(table.metrics == std::vector<std::string>{"turns", "constant"});
  auto rep = build_report(table);
  CHECK(rep.quadrant_sizes == std::array<std::size_t, 4>{2, 2, 2, 2});
  REQUIRE(rep.metrics.size() == 2);
  const auto& turns = rep.metrics[0];
  CHECK(turns.n == 8);
  CHECK_FALSE(turns.flagged);
  REQUIRE(turns.omnibus.has_value());
  CHECK(turns.pairwise.size() == 6);
  for (const auto& t : turns.pairwise) CHECK(*t.p_adjusted == bonferroni(t.mw.p, 6));
  CHECK(turns.dk_effect->r == 1.0);

  const auto& constant = rep.metrics[1];
  CHECK(std::abs(constant.omnibus->h) <= 1e-12);
  CHECK(constant.omnibus->p == doctest::Approx(1.0));
  CHECK(constant.dk_effect->mw.p == doctest::Approx(1.0));

  CHECK(report_to_json(rep) == report_to_json(build_report(table)));
  CHECK(report_to_markdown(rep).find("turns") != std::string::npos);
}

TEST_CASE("missing values shrink n and an empty quadrant flags the metric") {
  auto sparse = build_report(parse(long_csv([](int i) {
    return i == 0 ? std::string() : std::to_string(i);
  })));
  CHECK(sparse.metrics[0].n == 7);
  CHECK(sparse.metrics[0].missing == 1);
  CHECK(sparse.metrics[0].omnibus.has_value());

  auto hollow = build_report(parse(long_csv([](int i) {
    return i < 2 ? std::string() : std::to_string(i);
  })));
  CHECK(hollow.metrics[0].flagged);
  CHECK_FALSE(hollow.metrics[0].omnibus.has_value());
  CHECK(hollow.metrics[0].pairwise.empty());
  CHECK_FALSE(hollow.warnings.empty());
  CHECK_FALSE(hollow.metrics[1].flagged);
}

TEST_CASE("malformed metric tables name the offending column") {
  auto msg = testsupport::error_message([] { parse("participant,metric,value\n"); });
  CHECK(msg.find("participant_id") != std::string::npos);
  CHECK(error_kind([] { parse("participant,metric,value\n"); }) == ErrorKind::kSchema);
  msg = testsupport::error_message(
      [] { parse("participant_id,metric,value\nP1,domain_knowledge,abc\n"); });
  CHECK(msg.find("value") != std::string::npos);
  CHECK(error_kind([] { parse("participant_id,metric,value\nP1,turns,3\n"); }) ==
        ErrorKind::kSchema);
  CHECK(error_kind([] { parse(""); }) == ErrorKind::kSchema);
}
