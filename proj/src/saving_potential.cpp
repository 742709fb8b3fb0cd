#include "bemseval/saving_potential.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "bemseval/error.hpp"
#include "bemseval/util.hpp"

namespace bemseval {

using json = nlohmann::json;

std::string_view to_string(Band band) {
  switch (band) {
    case Band::kLow: return "L";
    case Band::kModerate: return "M";
    case Band::kHigh: return "H";
  }
  return "?";
}

Band parse_band(std::string_view text) {
  if (text == "L") return Band::kLow;
  if (text == "M") return Band::kModerate;
  if (text == "H") return Band::kHigh;
  throw Error(ErrorKind::kParse, fmt::format("unknown band '{}'", text));
}

void BandThresholds::validate() const {
  if (!(moderate_kw > 0.0 && high_kw > moderate_kw)) {
    throw Error(ErrorKind::kConfig, "band thresholds need high_kw > moderate_kw > 0");
  }
}

void ReferenceSolutions::validate() const {
  if (target_appliances.size() != kTargetCount) {
    throw Error(ErrorKind::kSchema, fmt::format("reference solutions need exactly {} targets, got {}",
                                                kTargetCount, target_appliances.size()));
  }
  if (strategies.size() != kStrategyCount) {
    throw Error(ErrorKind::kSchema,
                fmt::format("reference solutions need exactly {} strategies, got {}",
                            kStrategyCount, strategies.size()));
  }
  std::set<std::string> ids;
  for (const auto& s : strategies) {
    if (std::find(target_appliances.begin(), target_appliances.end(), s.appliance_id) ==
        target_appliances.end()) {
      throw Error(ErrorKind::kSchema,
                  fmt::format("strategy '{}' names non-target appliance '{}'", s.id, s.appliance_id));
    }
    if (!ids.insert(s.id).second) {
      throw Error(ErrorKind::kSchema, fmt::format("duplicate strategy id '{}'", s.id));
    }
  }
  std::set<std::string> targets(target_appliances.begin(), target_appliances.end());
  if (targets.size() != target_appliances.size()) {
    throw Error(ErrorKind::kSchema, "duplicate target appliance");
  }
}

namespace {

struct Slot {
  int rows = 0;
  int active = 0;
  int present = 0;
  double power_sum = 0.0;
};

using Grid = std::map<Day, std::array<Slot, 24>>;

Grid build_grid(const PowerSeries& series, double threshold_kw) {
  Grid grid;
  for (const auto& r : series.readings) {
    auto& slot = grid[day_of(r.time)][hour_of(r.time)];
    ++slot.rows;
    if (r.kw) {
      ++slot.present;
      slot.power_sum += *r.kw;
      if (*r.kw >= threshold_kw) ++slot.active;
    }
  }
  return grid;
}

void check_hours(std::span<const int> hours) {
  if (hours.empty()) throw Error(ErrorKind::kConfig, "TOU window has no hours");
  for (int h : hours) {
    if (h < 0 || h > 23) throw Error(ErrorKind::kConfig, fmt::format("hour {} out of range", h));
  }
}

double normalized_hourly_frequency(const Grid& grid, int n, int hour,
                                   std::string_view appliance) {
  double sum = 0.0;
  int days = 0;
  for (const auto& [day, slots] : grid) {
    const auto& s = slots[hour];
    if (s.rows != n) continue;
    sum += static_cast<double>(s.active) / n;
    ++days;
  }
  if (days == 0) {
    throw Error(ErrorKind::kCoverage,
                fmt::format("'{}': no day fully covers hour {}", appliance, hour));
  }
  return sum / days;
}

double window_frequency(const Grid& grid, int n, std::span<const int> hours,
                        std::string_view appliance) {
  check_hours(hours);
  double sum = 0.0;
  for (int h : hours) sum += normalized_hourly_frequency(grid, n, h, appliance);
  return sum / static_cast<double>(hours.size());
}

double window_flexibility(const Grid& grid, int n, std::span<const int> hours,
                          std::string_view appliance) {
  const double center = window_frequency(grid, n, hours, appliance);
  double ss = 0.0;
  int samples = 0;
  for (const auto& [day, slots] : grid) {
    for (int h : hours) {
      const auto& s = slots[h];
      if (s.rows != n) continue;
      const double dev = static_cast<double>(s.active) / n - center;
      ss += dev * dev;
      ++samples;
    }
  }
  return std::sqrt(ss / samples);
}

PowerStats window_power_stats(const Grid& grid, int n, std::span<const int> hours,
                              std::string_view appliance) {
  check_hours(hours);
  std::vector<double> hourly;
  for (const auto& [day, slots] : grid) {
    for (int h : hours) {
      const auto& s = slots[h];
      if (s.rows != n || s.present == 0) continue;
      hourly.push_back(s.power_sum / s.present);
    }
  }
  if (hourly.empty()) {
    throw Error(ErrorKind::kCoverage,
                fmt::format("'{}': no covered hour with present readings in window", appliance));
  }
  const double count = static_cast<double>(hourly.size());
  const double avg = std::accumulate(hourly.begin(), hourly.end(), 0.0) / count;
  double ss = 0.0;
  for (double p : hourly) ss += (p - avg) * (p - avg);
  return {avg, std::sqrt(ss / count)};
}

}  // namespace

int hourly_frequency(std::span<const std::uint8_t> hour_indicators, int intervals_per_hour) {
  if (static_cast<int>(hour_indicators.size()) != intervals_per_hour) {
    throw Error(ErrorKind::kCoverage,
                fmt::format("hour has {} of {} intervals", hour_indicators.size(),
                            intervals_per_hour));
  }
  int sum = 0;
  for (auto u : hour_indicators) sum += u ? 1 : 0;
  return sum;
}

double normalized_hourly_frequency(const PowerSeries& series, double threshold_kw, int hour) {
  if (hour < 0 || hour > 23) throw Error(ErrorKind::kConfig, "hour out of range");
  return normalized_hourly_frequency(build_grid(series, threshold_kw),
                                     series.intervals_per_hour(), hour, series.appliance_id);
}

double window_frequency(const PowerSeries& series, double threshold_kw,
                        std::span<const int> window_hours) {
  return window_frequency(build_grid(series, threshold_kw), series.intervals_per_hour(),
                          window_hours, series.appliance_id);
}

double window_frequency(const PowerSeries& series, double threshold_kw, const TouWindow& window) {
  auto hours = window.hours();
  return window_frequency(series, threshold_kw, hours);
}

double window_flexibility(const PowerSeries& series, double threshold_kw,
                          std::span<const int> window_hours) {
  return window_flexibility(build_grid(series, threshold_kw), series.intervals_per_hour(),
                            window_hours, series.appliance_id);
}

double window_flexibility(const PowerSeries& series, double threshold_kw,
                          const TouWindow& window) {
  auto hours = window.hours();
  return window_flexibility(series, threshold_kw, hours);
}

double normalize_flexibility(double raw, double house_min, double house_max) {
  if (!(house_min >= 0.0 && house_max >= house_min)) {
    throw Error(ErrorKind::kDomain, "flexibility range needs max >= min >= 0");
  }
  if (raw < house_min || raw > house_max) {
    throw Error(ErrorKind::kDomain,
                fmt::format("flexibility {} outside house range [{}, {}]", raw, house_min,
                            house_max));
  }
  if (house_max == house_min) return 0.0;
  return (raw - house_min) / (house_max - house_min);
}

PowerStats window_power_stats(const PowerSeries& series, std::span<const int> window_hours) {
  // The threshold does not affect power sums.
  return window_power_stats(build_grid(series, std::numeric_limits<double>::infinity()),
                            series.intervals_per_hour(), window_hours, series.appliance_id);
}

PowerStats window_power_stats(const PowerSeries& series, const TouWindow& window) {
  auto hours = window.hours();
  return window_power_stats(series, hours);
}

ActivePower mean_active_power(const PowerSeries& series, double threshold_kw) {
  auto active = activation_indicator(series, threshold_kw);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < active.size(); ++i) {
    if (!active[i]) continue;
    sum += *series.readings[i].kw;
    ++count;
  }
  if (count == 0) return {0.0, true};
  return {sum / static_cast<double>(count), false};
}

BandRange classify_band(double mean_active_kw, bool comfort_associated,
                        const BandThresholds& thresholds) {
  thresholds.validate();
  Band base = Band::kLow;
  if (mean_active_kw >= thresholds.high_kw) {
    base = Band::kHigh;
  } else if (mean_active_kw >= thresholds.moderate_kw) {
    base = Band::kModerate;
  }
  if (!comfort_associated) return {base, base};
  const Band lower = base == Band::kLow ? Band::kLow : static_cast<Band>(static_cast<int>(base) - 1);
  return {lower, base};
}

std::vector<SavingProfile> analyze_house(std::span<const PowerSeries> series,
                                         const HouseOptions& options) {
  options.thresholds.validate();
  options.banding.validate();
  const auto on_hours = options.schedule.hours(TouLabel::kOnPeak);
  const auto off_hours = options.schedule.hours(TouLabel::kOffPeak);
  if (on_hours.empty() || off_hours.empty()) {
    throw Error(ErrorKind::kConfig, "TOU schedule needs both on_peak and off_peak hours");
  }

  std::vector<SavingProfile> profiles;
  profiles.reserve(series.size());
  for (const auto& s : series) {
    SavingProfile p;
    p.appliance_id = s.appliance_id;
    p.threshold_kw = options.thresholds.threshold_for(s);
    const auto grid = build_grid(s, p.threshold_kw);
    const int n = s.intervals_per_hour();
    auto fill = [&](WindowMetrics& w, std::span<const int> hours) {
      w.frequency = window_frequency(grid, n, hours, s.appliance_id);
      w.flexibility_raw = window_flexibility(grid, n, hours, s.appliance_id);
      auto ps = window_power_stats(grid, n, hours, s.appliance_id);
      w.power_avg = ps.avg;
      w.power_variability = ps.variability;
    };
    fill(p.on_peak, on_hours);
    fill(p.off_peak, off_hours);
    p.mean_active = mean_active_power(s, p.threshold_kw);
    if (auto it = options.comfort.find(s.appliance_id); it != options.comfort.end()) {
      p.comfort_associated = it->second;
    }
    p.band_range = classify_band(p.mean_active.kw, p.comfort_associated, options.banding);
    profiles.push_back(std::move(p));
  }

  auto normalize = [&](WindowMetrics SavingProfile::*window) {
    if (profiles.empty()) return;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& p : profiles) {
      lo = std::min(lo, (p.*window).flexibility_raw);
      hi = std::max(hi, (p.*window).flexibility_raw);
    }
    for (auto& p : profiles) {
      auto& w = p.*window;
      w.flexibility_norm = normalize_flexibility(w.flexibility_raw, lo, hi);
    }
  };
  normalize(&SavingProfile::on_peak);
  normalize(&SavingProfile::off_peak);
  return profiles;
}

ReferenceSolutions build_reference_solutions(std::span<const SavingProfile> profiles,
                                             const StrategyTemplates& templates) {
  std::vector<const SavingProfile*> candidates;
  for (const auto& p : profiles) {
    // Qualifies when the band range reaches M or H and a behavioral change is known for it.
    if (p.band_range.high < Band::kModerate) continue;
    auto it = templates.find(p.appliance_id);
    if (it == templates.end() || it->second.empty()) continue;
    candidates.push_back(&p);
  }
  if (candidates.size() < ReferenceSolutions::kTargetCount) {
    throw Error(ErrorKind::kInsufficientCandidates,
                fmt::format("{} appliances qualify for reference solutions, {} needed",
                            candidates.size(), ReferenceSolutions::kTargetCount));
  }
  std::sort(candidates.begin(), candidates.end(), [](const auto* a, const auto* b) {
    if (a->band_range.high != b->band_range.high) return a->band_range.high > b->band_range.high;
    if (a->mean_active.kw != b->mean_active.kw) return a->mean_active.kw > b->mean_active.kw;
    return a->appliance_id < b->appliance_id;
  });
  candidates.resize(ReferenceSolutions::kTargetCount);

  ReferenceSolutions refs;
  for (const auto* p : candidates) {
    refs.target_appliances.push_back(p->appliance_id);
    for (const auto& t : templates.at(p->appliance_id)) {
      std::string text = t.text;
      for (auto pos = text.find("{appliance}"); pos != std::string::npos;
           pos = text.find("{appliance}", pos)) {
        text.replace(pos, 11, p->appliance_id);
        pos += p->appliance_id.size();
      }
      refs.strategies.push_back({t.id, p->appliance_id, std::move(text)});
    }
  }
  if (refs.strategies.size() != ReferenceSolutions::kStrategyCount) {
    throw Error(ErrorKind::kConfig,
                fmt::format("strategy templates yield {} strategies for the selected targets, "
                            "exactly {} are required",
                            refs.strategies.size(), ReferenceSolutions::kStrategyCount));
  }
  refs.validate();
  return refs;
}

ComfortMap default_comfort_map() {
  return {
      {"ev_charger", false},      {"hvac", true},     {"pool_pump", false},
      {"electric_water_heater", true}, {"oven", true}, {"washing_machine", false},
      {"dishwasher", false},      {"bedroom", true},  {"clothes_dryer", false},
  };
}

StrategyTemplates default_strategy_templates() {
  return {
      {"hvac",
       {{"hvac_pcs_coconditioning",
         "Pair the HVAC with low-power personal comfort systems such as fans so the cooling "
         "setpoint can be raised"},
        {"hvac_setpoint_setback",
         "Apply only a small cooling setpoint setback (about 1-2 F) during on-peak hours"},
        {"hvac_precooling", "Precool the home during off-peak hours before the on-peak window"}}},
      {"pool_pump",
       {{"pool_pump_shift", "Move pool pump runtime out of the on-peak window into off-peak hours"}}},
      {"ev_charger",
       {{"ev_charger_shift", "Schedule EV charging for off-peak hours such as overnight"}}},
      {"dishwasher",
       {{"dishwasher_shift", "Run the dishwasher after the on-peak window ends"}}},
      {"electric_water_heater",
       {{"water_heater_shift",
         "Heat water off-peak by scheduling the electric water heater or preheating the tank "
         "before the on-peak window"}}},
  };
}

ComfortMap parse_comfort_json(std::string_view json_text) {
  ComfortMap map;
  try {
    auto doc = json::parse(json_text);
    if (!doc.is_object()) throw Error(ErrorKind::kConfig, "comfort map must be a JSON object");
    for (const auto& [k, v] : doc.items()) map[k] = v.get<bool>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("bad comfort map: ") + e.what());
  }
  return map;
}

StrategyTemplates parse_strategy_templates_json(std::string_view json_text) {
  StrategyTemplates out;
  try {
    auto doc = json::parse(json_text);
    if (!doc.is_object()) throw Error(ErrorKind::kConfig, "strategy templates must be an object");
    for (const auto& [appliance, list] : doc.items()) {
      auto& dst = out[appliance];
      int n = 0;
      for (const auto& entry : list) {
        ++n;
        if (entry.is_string()) {
          dst.push_back({fmt::format("{}:{}", appliance, n), entry.get<std::string>()});
        } else {
          dst.push_back({entry.at("id").get<std::string>(), entry.at("text").get<std::string>()});
        }
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("bad strategy templates: ") + e.what());
  }
  return out;
}

std::string reference_solutions_to_json(const ReferenceSolutions& refs) {
  json doc;
  doc["target_appliances"] = refs.target_appliances;
  doc["strategies"] = json::array();
  for (const auto& s : refs.strategies) {
    doc["strategies"].push_back({{"id", s.id}, {"appliance", s.appliance_id}, {"text", s.text}});
  }
  return doc.dump(2) + "\n";
}

ReferenceSolutions parse_reference_solutions_json(std::string_view json_text) {
  ReferenceSolutions refs;
  try {
    auto doc = json::parse(json_text);
    refs.target_appliances = doc.at("target_appliances").get<std::vector<std::string>>();
    for (const auto& s : doc.at("strategies")) {
      refs.strategies.push_back({s.at("id").get<std::string>(), s.at("appliance").get<std::string>(),
                                 s.at("text").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("bad reference solutions: ") + e.what());
  }
  refs.validate();
  return refs;
}

ReferenceSolutions load_reference_solutions(const std::filesystem::path& path) {
  try {
    return parse_reference_solutions_json(read_file(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

namespace {
std::vector<const SavingProfile*> by_mean_power(std::span<const SavingProfile> profiles) {
  std::vector<const SavingProfile*> rows;
  for (const auto& p : profiles) rows.push_back(&p);
  std::stable_sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
    if (a->mean_active.kw != b->mean_active.kw) return a->mean_active.kw > b->mean_active.kw;
    return a->appliance_id < b->appliance_id;
  });
  return rows;
}
}  // namespace

std::string profiles_to_csv(std::span<const SavingProfile> profiles) {
  std::string out =
      "appliance,mean_active_kw,freq_off,flex_off,freq_on,flex_on,comfort,band_low,band_high\n";
  for (const auto* p : by_mean_power(profiles)) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", p->appliance_id,
                       format_fixed(p->mean_active.kw, 6), format_fixed(p->off_peak.frequency, 6),
                       format_fixed(p->off_peak.flexibility_norm, 6),
                       format_fixed(p->on_peak.frequency, 6),
                       format_fixed(p->on_peak.flexibility_norm, 6),
                       p->comfort_associated ? "TRUE" : "FALSE", to_string(p->band_range.low),
                       to_string(p->band_range.high));
  }
  return out;
}

std::string profiles_to_json(std::span<const SavingProfile> profiles) {
  auto window = [](const WindowMetrics& w) {
    return json{{"frequency", w.frequency},
                {"flexibility_raw", w.flexibility_raw},
                {"flexibility_norm", w.flexibility_norm},
                {"power_avg_kw", w.power_avg},
                {"power_variability_kw", w.power_variability}};
  };
  json doc = json::array();
  for (const auto* p : by_mean_power(profiles)) {
    doc.push_back({{"appliance", p->appliance_id},
                   {"threshold_kw", p->threshold_kw},
                   {"mean_active_kw", p->mean_active.kw},
                   {"never_active", p->mean_active.never_active},
                   {"on_peak", window(p->on_peak)},
                   {"off_peak", window(p->off_peak)},
                   {"comfort_associated", p->comfort_associated},
                   {"band_low", to_string(p->band_range.low)},
                   {"band_high", to_string(p->band_range.high)}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace bemseval
