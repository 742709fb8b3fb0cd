#include "bemseval/energy_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "bemseval/error.hpp"
#include "bemseval/util.hpp"

namespace bemseval {

using json = nlohmann::json;
namespace chr = std::chrono;

namespace {

bool parse_int(std::string_view text, int& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  // YYYY-MM-DDTHH:MM
  auto fail = [&] {
    return Error(ErrorKind::kParse, fmt::format("malformed timestamp '{}'", text));
  };
  if (text.size() != 16 || text[4] != '-' || text[7] != '-' || text[10] != 'T' ||
      text[13] != ':') {
    throw fail();
  }
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), mo) ||
      !parse_int(text.substr(8, 2), d) || !parse_int(text.substr(11, 2), h) ||
      !parse_int(text.substr(14, 2), mi)) {
    throw fail();
  }
  chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(mo)},
                          chr::day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59) throw fail();
  return Timestamp{chr::sys_days{ymd}} + chr::hours{h} + chr::minutes{mi};
}

std::string format_timestamp(Timestamp t) {
  chr::year_month_day ymd{day_of(t)};
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                     hour_of(t), minute_of(t));
}

Day day_of(Timestamp t) { return chr::floor<chr::days>(t); }

int hour_of(Timestamp t) {
  return static_cast<int>(chr::duration_cast<chr::hours>(t - day_of(t)).count());
}

int minute_of(Timestamp t) { return static_cast<int>((t - day_of(t)).count() % 60); }

std::optional<double> PowerSeries::max_power() const {
  std::optional<double> best;
  for (const auto& r : readings) {
    if (r.kw && (!best || *r.kw > *best)) best = *r.kw;
  }
  return best;
}

std::string_view to_string(TouLabel label) {
  return label == TouLabel::kOnPeak ? "on_peak" : "off_peak";
}

TouLabel parse_tou_label(std::string_view text) {
  if (text == "on_peak") return TouLabel::kOnPeak;
  if (text == "off_peak") return TouLabel::kOffPeak;
  throw Error(ErrorKind::kConfig, fmt::format("unknown TOU label '{}'", text));
}

std::vector<int> TouWindow::hours() const {
  std::vector<int> out;
  for (int h = start_hour; h < end_hour; ++h) out.push_back(h);
  return out;
}

TouSchedule TouSchedule::from_windows(std::vector<TouWindow> windows) {
  std::array<int, 24> owner{};
  owner.fill(-1);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    if (w.start_hour < 0 || w.start_hour > 23 || w.end_hour < 1 || w.end_hour > 24 ||
        w.end_hour <= w.start_hour) {
      throw Error(ErrorKind::kConfig,
                  fmt::format("TOU window {} has invalid hours [{}, {})", i, w.start_hour,
                              w.end_hour));
    }
    if (w.rate_per_kwh && !(std::isfinite(*w.rate_per_kwh) && *w.rate_per_kwh >= 0.0)) {
      throw Error(ErrorKind::kConfig, fmt::format("TOU window {} has an invalid rate", i));
    }
    for (int h = w.start_hour; h < w.end_hour; ++h) {
      if (owner[h] >= 0) {
        throw Error(ErrorKind::kConfig,
                    fmt::format("TOU windows {} and {} overlap at hour {}", owner[h], i, h));
      }
      owner[h] = static_cast<int>(i);
    }
  }
  for (int h = 0; h < 24; ++h) {
    if (owner[h] < 0) {
      throw Error(ErrorKind::kConfig, fmt::format("TOU schedule leaves hour {} uncovered", h));
    }
  }
  std::sort(windows.begin(), windows.end(),
            [](const TouWindow& a, const TouWindow& b) { return a.start_hour < b.start_hour; });
  TouSchedule s;
  s.windows_ = std::move(windows);
  return s;
}

TouSchedule TouSchedule::default_schedule() {
  return from_windows({{TouLabel::kOffPeak, 0, 16, std::nullopt},
                       {TouLabel::kOnPeak, 16, 21, std::nullopt},
                       {TouLabel::kOffPeak, 21, 24, std::nullopt}});
}

std::vector<int> TouSchedule::hours(TouLabel label) const {
  std::vector<int> out;
  for (const auto& w : windows_) {
    if (w.label != label) continue;
    auto h = w.hours();
    out.insert(out.end(), h.begin(), h.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void ThresholdConfig::validate() const {
  if (!(std::isfinite(floor_kw) && floor_kw > 0.0)) {
    throw Error(ErrorKind::kConfig, "threshold floor_kw must be > 0");
  }
  if (!(std::isfinite(fraction_of_max) && fraction_of_max >= 0.0)) {
    throw Error(ErrorKind::kConfig, "threshold fraction_of_max must be >= 0");
  }
  for (const auto& [name, kw] : overrides) {
    if (!(std::isfinite(kw) && kw > 0.0)) {
      throw Error(ErrorKind::kConfig, fmt::format("threshold override for '{}' must be > 0", name));
    }
  }
}

double ThresholdConfig::threshold_for(const PowerSeries& series) const {
  if (auto it = overrides.find(series.appliance_id); it != overrides.end()) return it->second;
  return derive_default_threshold(series, *this);
}

std::vector<PowerSeries> parse_power_csv(std::istream& in, std::string_view source_name,
                                         int cadence_minutes) {
  if (cadence_minutes <= 0 || 60 % cadence_minutes != 0) {
    throw Error(ErrorKind::kConfig,
                fmt::format("cadence of {} minutes does not divide an hour", cadence_minutes));
  }
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    throw Error(ErrorKind::kParse, fmt::format("{}: empty power CSV (no header row)", source_name));
  }
  auto header = split_csv_line(line);
  if (header.size() < 2 || trim(header[0]) != "timestamp") {
    throw Error(ErrorKind::kParse,
                fmt::format("{}: header must be 'timestamp,<appliance>,...'", source_name));
  }
  std::vector<PowerSeries> series(header.size() - 1);
  std::set<std::string> seen;
  for (std::size_t c = 1; c < header.size(); ++c) {
    auto name = trim(header[c]);
    if (name.empty() || !seen.insert(name).second) {
      throw Error(ErrorKind::kParse,
                  fmt::format("{}: empty or duplicate appliance column '{}'", source_name, name));
    }
    series[c - 1].appliance_id = name;
    series[c - 1].cadence_minutes = cadence_minutes;
  }

  std::set<Day> days;
  std::optional<Timestamp> prev;
  int row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::kParse, fmt::format("{}: row {}: expected {} fields, found {}",
                                                 source_name, row, header.size(), fields.size()));
    }
    Timestamp t;
    try {
      t = parse_timestamp(trim(fields[0]));
    } catch (const Error& e) {
      throw Error(ErrorKind::kParse, fmt::format("{}: row {}: {}", source_name, row, e.what()));
    }
    if (minute_of(t) % cadence_minutes != 0) {
      throw Error(ErrorKind::kCadence,
                  fmt::format("{}: row {}: timestamp {} is not aligned to the {}-minute cadence",
                              source_name, row, format_timestamp(t), cadence_minutes));
    }
    if (prev) {
      if (t <= *prev) {
        throw Error(ErrorKind::kOrdering,
                    fmt::format("{}: row {}: timestamp {} does not follow {}", source_name, row,
                                format_timestamp(t), format_timestamp(*prev)));
      }
      auto gap = (t - *prev).count();
      if (gap % cadence_minutes != 0) {
        throw Error(ErrorKind::kCadence,
                    fmt::format("{}: row {}: gap of {} minutes is not a multiple of {}",
                                source_name, row, gap, cadence_minutes));
      }
    }
    prev = t;
    days.insert(day_of(t));
    for (std::size_t c = 1; c < fields.size(); ++c) {
      Reading r{t, std::nullopt};
      if (!trim(fields[c]).empty()) {
        auto v = parse_double(fields[c]);
        if (!v || !std::isfinite(*v) || *v < 0.0) {
          throw Error(ErrorKind::kParse,
                      fmt::format("{}: row {}: invalid power '{}' for '{}'", source_name, row,
                                  fields[c], series[c - 1].appliance_id));
        }
        r.kw = *v;
      }
      series[c - 1].readings.push_back(r);
    }
  }
  if (row == 0) {
    throw Error(ErrorKind::kParse, fmt::format("{}: power CSV has no data rows", source_name));
  }
  for (auto& s : series) s.day_count = static_cast<int>(days.size());
  return series;
}

std::vector<PowerSeries> load_power_csv(const std::filesystem::path& path, int cadence_minutes) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open power CSV " + path.string());
  return parse_power_csv(in, path.string(), cadence_minutes);
}

void write_power_csv(std::ostream& out, std::span<const PowerSeries> series) {
  out << "timestamp";
  for (const auto& s : series) out << ',' << s.appliance_id;
  out << '\n';
  if (series.empty()) return;
  const auto rows = series.front().readings.size();
  for (const auto& s : series) {
    if (s.readings.size() != rows) {
      throw Error(ErrorKind::kPrecondition, "series do not share a common time axis");
    }
  }
  for (std::size_t r = 0; r < rows; ++r) {
    auto t = series.front().readings[r].time;
    out << format_timestamp(t);
    for (const auto& s : series) {
      if (s.readings[r].time != t) {
        throw Error(ErrorKind::kPrecondition, "series do not share a common time axis");
      }
      out << ',';
      if (s.readings[r].kw) out << format_double(*s.readings[r].kw);
    }
    out << '\n';
  }
}

TouSchedule parse_tou_json(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("TOU config is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorKind::kConfig, "TOU config must be a JSON array");
  std::vector<TouWindow> windows;
  for (const auto& w : doc) {
    try {
      TouWindow win;
      win.label = parse_tou_label(w.at("label").get<std::string>());
      win.start_hour = w.at("start_hour").get<int>();
      win.end_hour = w.at("end_hour").get<int>();
      if (auto it = w.find("rate_per_kwh"); it != w.end() && !it->is_null()) {
        win.rate_per_kwh = it->get<double>();
      }
      windows.push_back(win);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kConfig, std::string("bad TOU window: ") + e.what());
    }
  }
  return TouSchedule::from_windows(std::move(windows));
}

TouSchedule load_tou_json(const std::filesystem::path& path) {
  return parse_tou_json(read_file(path));
}

ThresholdConfig parse_threshold_json(std::string_view json_text) {
  ThresholdConfig cfg;
  try {
    auto doc = json::parse(json_text);
    if (!doc.is_object()) throw Error(ErrorKind::kConfig, "threshold config must be an object");
    cfg.floor_kw = doc.value("floor_kw", cfg.floor_kw);
    cfg.fraction_of_max = doc.value("fraction_of_max", cfg.fraction_of_max);
    if (auto it = doc.find("overrides"); it != doc.end() && !it->is_null()) {
      for (const auto& [name, kw] : it->items()) cfg.overrides[name] = kw.get<double>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("bad threshold config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ThresholdConfig load_threshold_json(const std::filesystem::path& path) {
  return parse_threshold_json(read_file(path));
}

std::vector<std::uint8_t> activation_indicator(const PowerSeries& series, double threshold_kw) {
  if (!(threshold_kw > 0.0)) {
    throw Error(ErrorKind::kPrecondition, "activation threshold must be > 0");
  }
  std::vector<std::uint8_t> out;
  out.reserve(series.readings.size());
  for (const auto& r : series.readings) out.push_back(r.kw && *r.kw >= threshold_kw ? 1 : 0);
  return out;
}

double derive_default_threshold(const PowerSeries& series, const ThresholdConfig& params) {
  auto max_kw = series.max_power();
  if (!max_kw) {
    throw Error(ErrorKind::kInsufficientData,
                fmt::format("'{}' has no present readings", series.appliance_id));
  }
  return std::max(params.floor_kw, params.fraction_of_max * *max_kw);
}

}  // namespace bemseval
