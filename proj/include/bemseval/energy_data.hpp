#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bemseval {

// Wall-clock local time at minute resolution. No time zone or DST arithmetic
// is applied; the clock is only used to order readings and to bucket them by
// calendar day and hour.
using Timestamp = std::chrono::sys_time<std::chrono::minutes>;
using Day = std::chrono::sys_days;

Timestamp parse_timestamp(std::string_view text);  // YYYY-MM-DDTHH:MM
std::string format_timestamp(Timestamp t);
Day day_of(Timestamp t);
int hour_of(Timestamp t);
int minute_of(Timestamp t);

struct Reading {
  Timestamp time;
  std::optional<double> kw;  // nullopt = missing cell
};

struct PowerSeries {
  std::string appliance_id;
  std::vector<Reading> readings;  // strictly increasing time
  int cadence_minutes = 15;
  int day_count = 0;  // distinct calendar dates

  int intervals_per_hour() const { return 60 / cadence_minutes; }
  std::optional<double> max_power() const;
};

enum class TouLabel { kOnPeak, kOffPeak };

std::string_view to_string(TouLabel label);
TouLabel parse_tou_label(std::string_view text);

struct TouWindow {
  TouLabel label = TouLabel::kOffPeak;
  int start_hour = 0;  // inclusive, 0..23
  int end_hour = 24;   // exclusive, 1..24
  std::optional<double> rate_per_kwh;

  std::vector<int> hours() const;
};

// A set of windows that partitions the 24-hour day.
class TouSchedule {
 public:
  // Validates the partition; throws Error(kConfig) on gaps or overlaps.
  static TouSchedule from_windows(std::vector<TouWindow> windows);
  // On-peak 16:00-21:00, off-peak elsewhere, no rates.
  static TouSchedule default_schedule();

  const std::vector<TouWindow>& windows() const { return windows_; }
  // Hours belonging to every window carrying `label`, ascending.
  std::vector<int> hours(TouLabel label) const;

 private:
  std::vector<TouWindow> windows_;
};

struct ThresholdConfig {
  double floor_kw = 0.1;
  double fraction_of_max = 0.05;
  std::map<std::string, double> overrides;

  void validate() const;
  // Override if configured, otherwise derive_default_threshold.
  double threshold_for(const PowerSeries& series) const;
};

std::vector<PowerSeries> parse_power_csv(std::istream& in, std::string_view source_name,
                                         int cadence_minutes = 15);
std::vector<PowerSeries> load_power_csv(const std::filesystem::path& path,
                                        int cadence_minutes = 15);

// Series must share the same timestamps (as produced by load_power_csv).
void write_power_csv(std::ostream& out, std::span<const PowerSeries> series);

TouSchedule parse_tou_json(std::string_view json_text);
TouSchedule load_tou_json(const std::filesystem::path& path);
ThresholdConfig parse_threshold_json(std::string_view json_text);
ThresholdConfig load_threshold_json(const std::filesystem::path& path);

// U[t] = 1 iff P[t] >= threshold; missing readings are inactive.
std::vector<std::uint8_t> activation_indicator(const PowerSeries& series, double threshold_kw);

// max(floor_kw, fraction_of_max * max observed power).
double derive_default_threshold(const PowerSeries& series, const ThresholdConfig& params);

}  // namespace bemseval
