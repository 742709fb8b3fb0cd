#include <doctest.h>

#include <random>
#include <fmt/format.h>
#include <sstream>

#include "bemseval/energy_data.hpp"
#include "bemseval/error.hpp"
#include "expect_error.hpp"
#include "household.hpp"

using namespace bemseval;

namespace {

std::vector<PowerSeries> parse(const std::string& csv) {
  std::istringstream in(csv);
  return parse_power_csv(in, "mem.csv");
}

PowerSeries series_of(std::vector<std::optional<double>> values) {
  PowerSeries s;
  s.appliance_id = "x";
  auto t = parse_timestamp("2026-07-06T00:00");
  for (auto v : values) {
    s.readings.push_back({t, v});
    t += std::chrono::minutes{15};
  }
  s.day_count = 1;
  return s;
}

}  // namespace

TEST_CASE("power csv: two hours of one appliance load as one series of eight readings") {
  std::string csv = "timestamp,ev\n";
  for (int i = 0; i < 8; ++i) {
    csv += fmt::format("2026-07-06T{:02}:{:02},{}\n", i / 4, 15 * (i % 4), 1.5);
  }
  auto s = parse(csv);
  REQUIRE(s.size() == 1);
  CHECK(s[0].appliance_id == "ev");
  CHECK(s[0].readings.size() == 8);
  CHECK(s[0].day_count == 1);
}

TEST_CASE("power csv: an empty cell is a missing reading and keeps the series length") {
  auto s = parse("timestamp,a,b\n2026-07-06T00:00,1.0,\n2026-07-06T00:15,,2.0\n");
  REQUIRE(s.size() == 2);
  CHECK(s[0].readings.size() == 2);
  CHECK(s[1].readings.size() == 2);
  CHECK_FALSE(s[1].readings[0].kw.has_value());
  CHECK_FALSE(s[0].readings[1].kw.has_value());
  CHECK(*s[1].readings[1].kw == 2.0);
}

TEST_CASE("power csv: swapped rows raise an ordering error naming the later row") {
  const std::string csv =
      "timestamp,a\n2026-07-06T00:00,1\n2026-07-06T00:15,1\n2026-07-06T00:45,1\n"
      "2026-07-06T00:30,1\n";
  try {
    parse(csv);
    FAIL("expected ordering error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kOrdering);
    CHECK(std::string(e.what()).find("row 4") != std::string::npos);
  }
}

TEST_CASE("power csv: malformed input maps to parse and cadence errors") {
  CHECK(testsupport::error_kind([] { parse("timestamp,a\n2026-07-06 00:00,1\n"); }) == ErrorKind::kParse);
  CHECK(testsupport::error_kind([] { parse("timestamp,a\n2026-07-06T00:10,1\n"); }) == ErrorKind::kCadence);
  CHECK(testsupport::error_kind([] { parse("timestamp,a\n2026-07-06T00:00,-1\n"); }) == ErrorKind::kParse);
  CHECK(testsupport::error_kind([] { parse("timestamp,a\n2026-07-06T00:00,1,2\n"); }) == ErrorKind::kParse);
  CHECK(testsupport::error_kind([] { parse(""); }) == ErrorKind::kParse);
  CHECK(testsupport::error_kind([] { parse("timestamp,a\n"); }) == ErrorKind::kParse);
  CHECK(testsupport::error_kind([] { parse("time,a\n2026-07-06T00:00,1\n"); }) == ErrorKind::kParse);
  CHECK(testsupport::error_kind([] { parse("timestamp,a,a\n2026-07-06T00:00,1,1\n"); }) == ErrorKind::kParse);
}

TEST_CASE("power csv: day_count counts distinct calendar dates") {
  auto s = parse("timestamp,a\n2026-07-06T23:45,1\n2026-07-07T00:00,1\n2026-07-09T00:00,1\n");
  CHECK(s[0].day_count == 3);
}

TEST_CASE("power csv: write then parse is lossless on random households") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 5; ++i) {
    auto house = testsupport::random_house(rng);
    auto first = parse(testsupport::to_csv(house));
    std::ostringstream out;
    write_power_csv(out, first);
    auto second = parse(out.str());
    REQUIRE(first.size() == second.size());
    for (std::size_t a = 0; a < first.size(); ++a) {
      CHECK(first[a].appliance_id == second[a].appliance_id);
      REQUIRE(first[a].readings.size() == second[a].readings.size());
      for (std::size_t r = 0; r < first[a].readings.size(); ++r) {
        CHECK(first[a].readings[r].time == second[a].readings[r].time);
        CHECK(first[a].readings[r].kw == second[a].readings[r].kw);
      }
    }
  }
}

TEST_CASE("activation indicator: threshold boundary is inclusive and missing is inactive") {
  CHECK(activation_indicator(series_of({0.5}), 0.1) == std::vector<std::uint8_t>{1});
  CHECK(activation_indicator(series_of({0.1}), 0.1) == std::vector<std::uint8_t>{1});
  CHECK(activation_indicator(series_of({0.05, 0.2, std::nullopt}), 0.1) ==
        std::vector<std::uint8_t>{0, 1, 0});
  CHECK(testsupport::error_kind([] { activation_indicator(series_of({1.0}), 0.0); }) ==
        ErrorKind::kPrecondition);
}

TEST_CASE("activation indicator: monotone in power and all ones below the minimum") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::optional<double>> v;
    for (int i = 0; i < 32; ++i) {
      v.push_back(u(rng) < 0.2 ? std::nullopt : std::optional<double>(u(rng)));
    }
    const double t = 0.05 + u(rng) / 2;
    auto base = activation_indicator(series_of(v), t);
    auto raised = v;
    for (auto& x : raised) {
      if (x) *x += u(rng);
    }
    auto up = activation_indicator(series_of(raised), t);
    for (std::size_t i = 0; i < base.size(); ++i) CHECK(up[i] >= base[i]);

    double min_present = 1e9;
    for (auto& x : v) {
      if (x && *x > 0) min_present = std::min(min_present, *x);
    }
    auto all = activation_indicator(series_of(v), min_present);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] && *v[i] >= min_present) CHECK(all[i] == 1);
    }
  }
}

TEST_CASE("default threshold: five percent of max with a floor") {
  ThresholdConfig cfg;
  CHECK(derive_default_threshold(series_of({1.0, 6.43}), cfg) == doctest::Approx(0.3215).epsilon(1e-12));
  CHECK(derive_default_threshold(series_of({0.5}), cfg) == 0.1);
  CHECK(testsupport::error_kind([&] { derive_default_threshold(series_of({std::nullopt}), cfg); }) ==
        ErrorKind::kInsufficientData);
  cfg.overrides["x"] = 0.7;
  CHECK(cfg.threshold_for(series_of({9.0})) == 0.7);
}

TEST_CASE("tou schedule: default window and partition validation") {
  auto def = TouSchedule::default_schedule();
  CHECK(def.hours(TouLabel::kOnPeak) == std::vector<int>{16, 17, 18, 19, 20});
  CHECK(def.hours(TouLabel::kOffPeak).size() == 19);

  auto parsed = parse_tou_json(
      R"([{"label":"off_peak","start_hour":0,"end_hour":16,"rate_per_kwh":0.1},
          {"label":"on_peak","start_hour":16,"end_hour":21,"rate_per_kwh":null},
          {"label":"off_peak","start_hour":21,"end_hour":24}])");
  CHECK(parsed.hours(TouLabel::kOnPeak) == def.hours(TouLabel::kOnPeak));
  CHECK(parsed.windows()[0].rate_per_kwh == 0.1);

  CHECK(testsupport::error_kind([] {
          parse_tou_json(R"([{"label":"on_peak","start_hour":0,"end_hour":20}])");
        }) == ErrorKind::kConfig);
  CHECK(testsupport::error_kind([] {
          parse_tou_json(R"([{"label":"on_peak","start_hour":0,"end_hour":20},
                             {"label":"off_peak","start_hour":19,"end_hour":24}])");
        }) == ErrorKind::kConfig);
  CHECK(testsupport::error_kind([] { parse_tou_json("{}"); }) == ErrorKind::kConfig);
}

TEST_CASE("threshold config: parse and reject non-positive values") {
  auto cfg = parse_threshold_json(R"({"floor_kw":0.2,"fraction_of_max":0.1,"overrides":{"ev":1.0}})");
  CHECK(cfg.floor_kw == 0.2);
  CHECK(cfg.overrides.at("ev") == 1.0);
  CHECK(testsupport::error_kind([] { parse_threshold_json(R"({"floor_kw":0})"); }) == ErrorKind::kConfig);
  CHECK(testsupport::error_kind([] { parse_threshold_json(R"({"overrides":{"a":-1}})"); }) == ErrorKind::kConfig);
}
