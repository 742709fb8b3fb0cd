#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bemseval/energy_data.hpp"

namespace bemseval {

// Appliance-level energy-saving-potential metrics over TOU timeframes.
//
// All window metrics work on (day, hour) slots. A slot is covered when every
// one of its `intervals_per_hour` rows is present in the series (a missing
// power cell still counts as a row and is inactive).

enum class Band { kLow = 0, kModerate = 1, kHigh = 2 };

std::string_view to_string(Band band);  // "L", "M", "H"
Band parse_band(std::string_view text);

struct BandRange {
  Band low = Band::kLow;
  Band high = Band::kLow;

  bool contains(Band b) const { return low <= b && b <= high; }
  bool operator==(const BandRange&) const = default;
};

struct WindowMetrics {
  double frequency = 0.0;         // mean normalized hourly frequency over the window
  double flexibility_raw = 0.0;   // population SD of per-(day, hour) normalized frequency
  double flexibility_norm = 0.0;  // min-max scaled across the house, per timeframe
  double power_avg = 0.0;         // kW, mean of hourly mean power
  double power_variability = 0.0; // kW, root-mean-square deviation of hourly mean power
};

struct ActivePower {
  double kw = 0.0;
  bool never_active = false;
};

struct SavingProfile {
  std::string appliance_id;
  double threshold_kw = 0.0;
  ActivePower mean_active;
  WindowMetrics on_peak;
  WindowMetrics off_peak;
  bool comfort_associated = false;
  BandRange band_range;
};

struct BandThresholds {
  double high_kw = 3.0;
  double moderate_kw = 0.8;

  void validate() const;
};

struct StrategyTemplate {
  std::string id;
  std::string text;  // "{appliance}" is replaced by the appliance id
};

using StrategyTemplates = std::map<std::string, std::vector<StrategyTemplate>>;
using ComfortMap = std::map<std::string, bool>;

struct ReferenceStrategy {
  std::string id;
  std::string appliance_id;
  std::string text;
};

struct ReferenceSolutions {
  static constexpr std::size_t kTargetCount = 5;
  static constexpr std::size_t kStrategyCount = 7;

  std::vector<std::string> target_appliances;
  std::vector<ReferenceStrategy> strategies;

  void validate() const;
};

// ---- per-slot primitives -------------------------------------------------

// Sum of the activation indicators of one hour on one day.
int hourly_frequency(std::span<const std::uint8_t> hour_indicators, int intervals_per_hour = 4);

// Mean over covering days of F(day, hour) / N.
double normalized_hourly_frequency(const PowerSeries& series, double threshold_kw, int hour);

double window_frequency(const PowerSeries& series, double threshold_kw,
                        std::span<const int> window_hours);
double window_frequency(const PowerSeries& series, double threshold_kw, const TouWindow& window);

double window_flexibility(const PowerSeries& series, double threshold_kw,
                          std::span<const int> window_hours);
double window_flexibility(const PowerSeries& series, double threshold_kw,
                          const TouWindow& window);

// (sigma - min) / (max - min); 0 when max == min.
double normalize_flexibility(double raw, double house_min, double house_max);

struct PowerStats {
  double avg = 0.0;
  double variability = 0.0;
};

PowerStats window_power_stats(const PowerSeries& series, std::span<const int> window_hours);
PowerStats window_power_stats(const PowerSeries& series, const TouWindow& window);

ActivePower mean_active_power(const PowerSeries& series, double threshold_kw);

BandRange classify_band(double mean_active_kw, bool comfort_associated,
                        const BandThresholds& thresholds = {});

// ---- house level ---------------------------------------------------------

struct HouseOptions {
  ThresholdConfig thresholds;
  TouSchedule schedule = TouSchedule::default_schedule();
  ComfortMap comfort = {};
  BandThresholds banding;
};

// Profiles in input order. Flexibility is normalized per timeframe across all
// appliances of the house.
std::vector<SavingProfile> analyze_house(std::span<const PowerSeries> series,
                                         const HouseOptions& options);

ReferenceSolutions build_reference_solutions(std::span<const SavingProfile> profiles,
                                             const StrategyTemplates& templates);

ComfortMap default_comfort_map();
StrategyTemplates default_strategy_templates();

ComfortMap parse_comfort_json(std::string_view json_text);
StrategyTemplates parse_strategy_templates_json(std::string_view json_text);

std::string reference_solutions_to_json(const ReferenceSolutions& refs);
ReferenceSolutions parse_reference_solutions_json(std::string_view json_text);
ReferenceSolutions load_reference_solutions(const std::filesystem::path& path);

// appliance,mean_active_kw,freq_off,flex_off,freq_on,flex_on,comfort,band_low,band_high
// Rows sorted by mean active power, descending.
std::string profiles_to_csv(std::span<const SavingProfile> profiles);
std::string profiles_to_json(std::span<const SavingProfile> profiles);

}  // namespace bemseval
