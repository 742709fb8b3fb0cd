#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bemseval/judge.hpp"
#include "bemseval/saving_potential.hpp"
#include "bemseval/scale.hpp"

namespace bemseval {

// Relative paths in a config file resolve against the file's directory.
struct PipelineConfig {
  std::filesystem::path power_csv;
  int cadence_minutes = 15;
  std::filesystem::path tou;
  std::filesystem::path thresholds;
  std::optional<std::filesystem::path> comfort;             // default comfort map when absent
  std::optional<std::filesystem::path> strategy_templates;  // default templates when absent
  BandThresholds banding;

  std::filesystem::path transcripts_dir;
  std::optional<std::filesystem::path> reference_solutions;  // else <output>/reference_solutions.json
  std::optional<std::filesystem::path> rubric;               // else the built-in rubric
  FactorWeights weights = kEqualWeights;
  int parse_retries = 1;
  bool allow_multi_match = true;
  JudgeConfig judge;
  std::optional<std::filesystem::path> replay_store;
  bool strict_replay = false;

  std::optional<std::filesystem::path> metrics_csv;  // else <output>/metrics_long.csv
  std::filesystem::path output_dir = "out";
};

PipelineConfig parse_pipeline_config(std::string_view json_text,
                                     const std::filesystem::path& base_dir);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

enum class Stage { kPotential, kAnalyze, kStats, kPipeline };

std::string_view to_string(Stage stage);

struct StageResult {
  std::vector<std::string> warnings;
  std::vector<std::filesystem::path> outputs;
  // Some judge-derived value is missing; outputs hold NA for it.
  bool incomplete = false;
};

// Column names of the per-participant metric table for a rubric.
std::vector<std::string> metric_columns(const Rubric& rubric);

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);

  const PipelineConfig& config() const { return config_; }
  PipelineConfig& mutable_config() { return config_; }

  // Replaces the judge built from the config (tests, embedding).
  void set_judge(std::shared_ptr<Judge> judge) { judge_override_ = std::move(judge); }

  // Checks everything the stage needs without writing anything.
  void validate(Stage stage) const;

  StageResult run(Stage stage);

 private:
  StageResult run_potential();
  StageResult run_analyze();
  StageResult run_stats();

  std::filesystem::path reference_path() const;
  std::filesystem::path metrics_path() const;
  Rubric load_rubric() const;

  PipelineConfig config_;
  std::shared_ptr<Judge> judge_override_;
};

}  // namespace bemseval
