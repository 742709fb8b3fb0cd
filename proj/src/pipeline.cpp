#include "bemseval/pipeline.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "bemseval/conclusion.hpp"
#include "bemseval/energy_data.hpp"
#include "bemseval/error.hpp"
#include "bemseval/stats.hpp"
#include "bemseval/transcript.hpp"
#include "bemseval/util.hpp"

namespace bemseval {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::kPotential: return "potential";
    case Stage::kAnalyze: return "analyze";
    case Stage::kStats: return "stats";
    case Stage::kPipeline: return "pipeline";
  }
  return "?";
}

namespace {

const std::set<std::string> kTopKeys = {
    "power_csv",  "cadence_minutes", "tou",     "thresholds", "comfort",         "strategy_templates",
    "banding",    "transcripts_dir", "reference_solutions",   "rubric",          "scale",
    "conclusion", "judge",           "replay",  "metrics_csv", "output_dir"};

void reject_unknown(const json& obj, const std::set<std::string>& allowed, std::string_view where) {
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.count(k)) {
      throw Error(ErrorKind::kConfig, fmt::format("unknown key \"{}\" in {}", k, where));
    }
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

void require_file(const fs::path& p, std::string_view what) {
  if (p.empty()) throw Error(ErrorKind::kConfig, fmt::format("{} is not configured", what));
  if (!fs::is_regular_file(p)) {
    throw Error(ErrorKind::kConfig, fmt::format("{} '{}' does not exist", what, p.string()));
  }
}

void require_dir(const fs::path& p, std::string_view what) {
  if (p.empty()) throw Error(ErrorKind::kConfig, fmt::format("{} is not configured", what));
  if (!fs::is_directory(p)) {
    throw Error(ErrorKind::kConfig, fmt::format("{} '{}' is not a directory", what, p.string()));
  }
}

// The output directory either exists or can be created below an existing directory.
void require_output_dir(const fs::path& p) {
  if (p.empty()) throw Error(ErrorKind::kConfig, "output_dir is not configured");
  auto probe = fs::absolute(p);
  while (!fs::exists(probe)) {
    if (!probe.has_parent_path() || probe.parent_path() == probe) break;
    probe = probe.parent_path();
  }
  if (!fs::is_directory(probe)) {
    throw Error(ErrorKind::kConfig,
                fmt::format("output_dir '{}' is not below a directory", p.string()));
  }
  const auto perms = fs::status(probe).permissions();
  if ((perms & (fs::perms::owner_write | fs::perms::group_write | fs::perms::others_write)) ==
      fs::perms::none) {
    throw Error(ErrorKind::kConfig, fmt::format("output_dir '{}' is not writable", p.string()));
  }
}

template <typename F>
auto with_context(std::string_view what, const fs::path& p, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("{} {}: {}", what, p.string(), e.what()));
  }
}

}  // namespace

PipelineConfig parse_pipeline_config(std::string_view json_text, const fs::path& base_dir) {
  PipelineConfig c;
  try {
    const auto doc = json::parse(json_text);
    if (!doc.is_object()) throw Error(ErrorKind::kConfig, "config must be a JSON object");
    reject_unknown(doc, kTopKeys, "config");
    auto path_of = [&](const char* key) -> std::optional<fs::path> {
      auto it = doc.find(key);
      if (it == doc.end() || it->is_null()) return std::nullopt;
      return resolve(base_dir, it->get<std::string>());
    };
    c.power_csv = path_of("power_csv").value_or(fs::path());
    c.cadence_minutes = doc.value("cadence_minutes", c.cadence_minutes);
    c.tou = path_of("tou").value_or(fs::path());
    c.thresholds = path_of("thresholds").value_or(fs::path());
    c.comfort = path_of("comfort");
    c.strategy_templates = path_of("strategy_templates");
    if (auto it = doc.find("banding"); it != doc.end()) {
      reject_unknown(*it, {"high_kw", "moderate_kw"}, "banding");
      c.banding.high_kw = it->value("high_kw", c.banding.high_kw);
      c.banding.moderate_kw = it->value("moderate_kw", c.banding.moderate_kw);
    }
    c.transcripts_dir = path_of("transcripts_dir").value_or(fs::path());
    c.reference_solutions = path_of("reference_solutions");
    c.rubric = path_of("rubric");
    if (auto it = doc.find("scale"); it != doc.end()) {
      reject_unknown(*it, {"weights", "parse_retries"}, "scale");
      if (it->contains("weights")) c.weights = it->at("weights").get<FactorWeights>();
      c.parse_retries = it->value("parse_retries", c.parse_retries);
    }
    if (auto it = doc.find("conclusion"); it != doc.end()) {
      reject_unknown(*it, {"allow_multi_match"}, "conclusion");
      c.allow_multi_match = it->value("allow_multi_match", c.allow_multi_match);
    }
    if (auto it = doc.find("judge"); it != doc.end()) {
      reject_unknown(*it,
                     {"base_url", "model", "temperature", "timeout_seconds", "max_retries",
                      "max_in_flight", "api_key_env", "initial_backoff_ms", "backoff_jitter"},
                     "judge");
      auto& j = c.judge;
      j.base_url = it->value("base_url", j.base_url);
      j.model = it->value("model", j.model);
      j.temperature = it->value("temperature", j.temperature);
      j.timeout_seconds = it->value("timeout_seconds", j.timeout_seconds);
      j.max_retries = it->value("max_retries", j.max_retries);
      j.max_in_flight = it->value("max_in_flight", j.max_in_flight);
      j.api_key_env = it->value("api_key_env", j.api_key_env);
      j.initial_backoff_ms = it->value("initial_backoff_ms", j.initial_backoff_ms);
      j.backoff_jitter = it->value("backoff_jitter", j.backoff_jitter);
    }
    if (auto it = doc.find("replay"); it != doc.end() && !it->is_null()) {
      reject_unknown(*it, {"store", "strict"}, "replay");
      if (it->contains("store") && !it->at("store").is_null()) {
        c.replay_store = resolve(base_dir, it->at("store").get<std::string>());
      }
      c.strict_replay = it->value("strict", false);
    }
    c.metrics_csv = path_of("metrics_csv");
    c.output_dir = path_of("output_dir").value_or(resolve(base_dir, "out"));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("bad config: ") + e.what());
  }
  return c;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  if (!fs::is_regular_file(path)) {
    throw Error(ErrorKind::kConfig, fmt::format("config file '{}' does not exist", path.string()));
  }
  return with_context("config", path, [&] {
    return parse_pipeline_config(read_file(path), fs::absolute(path).parent_path());
  });
}

std::vector<std::string> metric_columns(const Rubric& rubric) {
  std::vector<std::string> cols = {"total_turns", "avg_prompt_length", "prompt_response_ratio"};
  for (const auto& c : rubric.concepts) {
    if (c.sides == ConceptSides::kUserOnly) {
      cols.push_back(c.id);
    } else {
      cols.push_back(c.id + "_user");
      cols.push_back(c.id + "_assistant");
    }
  }
  for (const char* r : {"appliance_identification_rate", "strategy_alignment_rate", "overall_alignment"}) {
    cols.emplace_back(r);
  }
  return cols;
}

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) {}

fs::path Pipeline::reference_path() const {
  return config_.reference_solutions.value_or(config_.output_dir / "reference_solutions.json");
}

fs::path Pipeline::metrics_path() const {
  return config_.metrics_csv.value_or(config_.output_dir / "metrics_long.csv");
}

Rubric Pipeline::load_rubric() const {
  if (!config_.rubric) return default_rubric();
  return with_context("rubric", *config_.rubric,
                      [&] { return parse_rubric_json(read_file(*config_.rubric)); });
}

void Pipeline::validate(Stage stage) const {
  const bool all = stage == Stage::kPipeline;
  require_output_dir(config_.output_dir);

  if (all || stage == Stage::kPotential) {
    require_file(config_.power_csv, "power_csv");
    require_file(config_.tou, "tou");
    require_file(config_.thresholds, "thresholds");
    if (config_.cadence_minutes <= 0 || 60 % config_.cadence_minutes != 0) {
      throw Error(ErrorKind::kConfig, "cadence_minutes must divide 60");
    }
    load_tou_json(config_.tou);
    load_threshold_json(config_.thresholds).validate();
    config_.banding.validate();
    if (config_.comfort) {
      require_file(*config_.comfort, "comfort");
      with_context("comfort", *config_.comfort,
                   [&] { return parse_comfort_json(read_file(*config_.comfort)); });
    }
    if (config_.strategy_templates) {
      require_file(*config_.strategy_templates, "strategy_templates");
      with_context("strategy_templates", *config_.strategy_templates, [&] {
        return parse_strategy_templates_json(read_file(*config_.strategy_templates));
      });
    }
  }

  if (all || stage == Stage::kAnalyze) {
    require_dir(config_.transcripts_dir, "transcripts_dir");
    // A pipeline run produces the reference file itself unless one is configured.
    if (!all || config_.reference_solutions) {
      require_file(reference_path(), "reference_solutions");
      load_reference_solutions(reference_path());
    }
    if (config_.rubric) require_file(*config_.rubric, "rubric");
    load_rubric();
    for (double w : config_.weights) {
      if (!(w >= 0.0)) throw Error(ErrorKind::kConfig, "scale weights must be >= 0");
    }
    if (config_.parse_retries < 0) throw Error(ErrorKind::kConfig, "parse_retries must be >= 0");
    config_.judge.validate();
    if (!judge_override_) {
      const bool strict = config_.replay_store && config_.strict_replay;
      if (config_.strict_replay && !config_.replay_store) {
        throw Error(ErrorKind::kConfig, "strict replay needs a replay store");
      }
      if (strict) {
        require_file(*config_.replay_store, "replay store");
        ReplayStore::load(*config_.replay_store);
      } else {
        const char* token = std::getenv(config_.judge.api_key_env.c_str());
        if (token == nullptr || *token == '\0') {
          throw Error(ErrorKind::kConfig,
                      fmt::format("environment variable {} with the judge API token is not set",
                                  config_.judge.api_key_env));
        }
      }
    }
  }

  if (all || stage == Stage::kStats) {
    if (!all || config_.metrics_csv) require_file(metrics_path(), "metrics_csv");
  }
}

StageResult Pipeline::run(Stage stage) {
  validate(stage);
  if (stage != Stage::kPipeline) {
    switch (stage) {
      case Stage::kPotential: return run_potential();
      case Stage::kAnalyze: return run_analyze();
      default: return run_stats();
    }
  }
  StageResult total;
  for (Stage s : {Stage::kPotential, Stage::kAnalyze, Stage::kStats}) {
    StageResult r;
    try {
      r = s == Stage::kPotential ? run_potential() : s == Stage::kAnalyze ? run_analyze() : run_stats();
    } catch (const Error& e) {
      throw Error(e.kind(), fmt::format("stage {} failed: {}", to_string(s), e.what()));
    }
    for (auto& w : r.warnings) total.warnings.push_back(fmt::format("{}: {}", to_string(s), w));
    total.outputs.insert(total.outputs.end(), r.outputs.begin(), r.outputs.end());
    total.incomplete = total.incomplete || r.incomplete;
  }
  return total;
}

StageResult Pipeline::run_potential() {
  StageResult result;
  const auto series = load_power_csv(config_.power_csv, config_.cadence_minutes);
  HouseOptions opts;
  opts.thresholds = load_threshold_json(config_.thresholds);
  opts.schedule = load_tou_json(config_.tou);
  opts.banding = config_.banding;
  opts.comfort = config_.comfort ? parse_comfort_json(read_file(*config_.comfort)) : default_comfort_map();
  const auto templates = config_.strategy_templates
                             ? parse_strategy_templates_json(read_file(*config_.strategy_templates))
                             : default_strategy_templates();
  for (const auto& s : series) {
    if (!opts.comfort.count(s.appliance_id)) {
      result.warnings.push_back(
          fmt::format("appliance {} has no comfort entry; treated as not comfort-associated",
                      s.appliance_id));
    }
  }
  const auto profiles = analyze_house(series, opts);
  for (const auto& p : profiles) {
    if (p.mean_active.never_active) {
      result.warnings.push_back(fmt::format("appliance {} never reaches its activation threshold",
                                            p.appliance_id));
    }
  }
  const auto refs = build_reference_solutions(profiles, templates);

  fs::create_directories(config_.output_dir);
  const auto csv = config_.output_dir / "appliance_metrics.csv";
  const auto profiles_json = config_.output_dir / "saving_profiles.json";
  const auto refs_json = config_.output_dir / "reference_solutions.json";
  write_file_atomic(csv, profiles_to_csv(profiles));
  write_file_atomic(profiles_json, profiles_to_json(profiles));
  write_file_atomic(refs_json, reference_solutions_to_json(refs));
  result.outputs = {csv, profiles_json, refs_json};
  return result;
}

namespace {

struct SessionOutcome {
  std::vector<std::optional<double>> values;  // metric_columns order
  std::vector<ScaleScore> scores;
  ConclusionVerdict verdict;
  bool reused_verdict = false;
  std::vector<std::pair<std::string, std::string>> failures;  // item, message
};

struct Engagement {
  double total_turns = 0.0;
  double avg_prompt_length = 0.0;
  std::optional<double> prompt_response_ratio;
  std::string ratio_error;
};

// Keeps the two well-defined metrics when the ratio is undefined.
Engagement engagement_or_partial(const Transcript& t) {
  Engagement e;
  try {
    const auto m = engagement_metrics(t);
    e.total_turns = m.total_turns;
    e.avg_prompt_length = m.avg_prompt_length;
    e.prompt_response_ratio = m.prompt_response_ratio;
  } catch (const Error& err) {
    if (err.kind() != ErrorKind::kUndefinedRatio) throw;
    e.ratio_error = err.what();
    double user_turns = 0.0, user_words = 0.0;
    for (const auto& turn : t.turns) {
      if (turn.role != Role::kUser) continue;
      user_turns += 1.0;
      user_words += static_cast<double>(count_words(turn.text));
    }
    e.total_turns = static_cast<double>(t.turns.size());
    e.avg_prompt_length = user_words / user_turns;
  }
  return e;
}

std::string na_or(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

}  // namespace

StageResult Pipeline::run_analyze() {
  StageResult result;
  const auto rubric = load_rubric();
  const auto refs = load_reference_solutions(reference_path());
  const auto columns = metric_columns(rubric);
  auto set = load_transcripts(config_.transcripts_dir);
  const auto verdict_dir = config_.output_dir / "verdicts";

  std::shared_ptr<Judge> judge = judge_override_;
  std::shared_ptr<ReplayStore> store;
  if (!judge) {
    if (config_.replay_store) {
      store = ReplayStore::load(*config_.replay_store);
      std::shared_ptr<Judge> live;
      if (!config_.strict_replay) live = std::make_shared<HttpJudge>(config_.judge);
      judge = std::make_shared<ReplayJudge>(
          store, config_.judge.model,
          config_.strict_replay ? ReplayMode::kStrict : ReplayMode::kRecord, live);
    } else {
      judge = std::make_shared<HttpJudge>(config_.judge);
    }
  }

  ScaleOptions scale_opts;
  scale_opts.weights = config_.weights;
  scale_opts.parse_retries = config_.parse_retries;
  ConclusionOptions conclusion_opts;
  conclusion_opts.allow_multi_match = config_.allow_multi_match;
  conclusion_opts.parse_retries = config_.parse_retries;

  const auto& transcripts = set.transcripts;
  std::vector<SessionOutcome> outcomes(transcripts.size());
  std::vector<std::exception_ptr> errors(transcripts.size());

  auto work = [&](std::size_t i) {
    const auto& t = transcripts[i];
    auto& out = outcomes[i];
    out.values.assign(columns.size(), std::nullopt);
    std::size_t col = 0;
    const auto em = engagement_or_partial(t);
    out.values[col++] = em.total_turns;
    out.values[col++] = em.avg_prompt_length;
    out.values[col++] = em.prompt_response_ratio;
    if (!em.prompt_response_ratio) out.failures.emplace_back("prompt_response_ratio", em.ratio_error);

    out.scores = score_transcript(t, rubric, *judge, scale_opts);
    for (const auto& s : out.scores) {
      out.values[col++] = s.confidence;
      if (s.missing()) {
        out.failures.emplace_back(fmt::format("{}/{}", s.concept_id, to_string(s.side)), s.failure);
      }
    }

    const auto verdict_file = verdict_dir / (t.session_id + ".json");
    std::optional<ConclusionVerdict> previous;
    if (fs::is_regular_file(verdict_file)) {
      auto v = with_context("verdict", verdict_file,
                            [&] { return parse_verdict_json(read_file(verdict_file)); });
      if (v.review_status != ReviewStatus::kUnreviewed) previous = std::move(v);
    }
    if (previous) {
      out.verdict = std::move(*previous);
      out.reused_verdict = true;
    } else {
      out.verdict = judge_conclusion(t.session_id, t.conclusion, refs, *judge, conclusion_opts);
    }
    if (out.verdict.scored) {
      const auto r = rates(out.verdict);
      out.values[col++] = r.appliance_identification_rate;
      out.values[col++] = r.strategy_alignment_rate;
      out.values[col++] = r.overall_alignment;
    } else {
      out.failures.emplace_back("conclusion", out.verdict.failure);
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(transcripts.size(), static_cast<std::size_t>(config_.judge.max_in_flight));
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (std::size_t i = next++; i < transcripts.size(); i = next++) {
      try {
        work(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(drain);
  drain();
  for (auto& th : pool) th.join();
  if (store && !config_.strict_replay) store->save(*config_.replay_store);
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error& e) {
      throw Error(e.kind(), fmt::format("session {}: {}", transcripts[i].session_id, e.what()));
    }
  }

  std::string wide = "session_id,participant_id";
  for (const auto& c : columns) wide += "," + c;
  wide += "\n";
  std::string longf = "participant_id,metric,value\n";
  std::string scales = scale_scores_csv_header();
  ojson report;
  report["file_errors"] = ojson::array();
  report["session_failures"] = ojson::array();
  for (const auto& e : set.errors) {
    report["file_errors"].push_back({{"file", e.file.filename().string()},
                                     {"kind", to_string(e.kind)},
                                     {"message", e.message}});
    result.warnings.push_back(fmt::format("skipped {}: {}", e.file.filename().string(), e.message));
  }
  for (std::size_t i = 0; i < transcripts.size(); ++i) {
    const auto& t = transcripts[i];
    const auto& o = outcomes[i];
    const auto& pid = t.participant.id;
    wide += t.session_id + "," + pid;
    for (const auto& v : o.values) wide += "," + na_or(v);
    wide += "\n";
    longf += fmt::format("{},{},{}\n", pid, kDomainKnowledgeColumn, format_double(t.participant.domain_knowledge));
    longf += fmt::format("{},{},{}\n", pid, kAiLiteracyColumn, format_double(t.participant.ai_literacy));
    for (std::size_t c = 0; c < columns.size(); ++c) {
      longf += fmt::format("{},{},{}\n", pid, columns[c], na_or(o.values[c]));
    }
    for (const auto& s : o.scores) scales += scale_score_csv_row(s);
    for (const auto& [item, msg] : o.failures) {
      report["session_failures"].push_back({{"session_id", t.session_id}, {"item", item}, {"message", msg}});
      result.warnings.push_back(fmt::format("session {}: {} missing ({})", t.session_id, item, msg));
      if (item != "prompt_response_ratio") result.incomplete = true;
    }
  }
  if (transcripts.empty()) result.warnings.push_back("no transcripts to analyze");

  fs::create_directories(verdict_dir);
  const auto wide_path = config_.output_dir / "participant_metrics.csv";
  const auto long_path = config_.output_dir / "metrics_long.csv";
  const auto scale_path = config_.output_dir / "scale_scores.csv";
  const auto errors_path = config_.output_dir / "analyze_errors.json";
  for (std::size_t i = 0; i < transcripts.size(); ++i) {
    if (outcomes[i].reused_verdict) continue;
    const auto p = verdict_dir / (transcripts[i].session_id + ".json");
    write_file_atomic(p, verdict_to_json(outcomes[i].verdict));
    result.outputs.push_back(p);
  }
  write_file_atomic(wide_path, wide);
  write_file_atomic(long_path, longf);
  write_file_atomic(scale_path, scales);
  write_file_atomic(errors_path, report.dump(2) + "\n");
  result.outputs.insert(result.outputs.end(), {wide_path, long_path, scale_path, errors_path});
  return result;
}

StageResult Pipeline::run_stats() {
  StageResult result;
  const auto path = metrics_path();
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, fmt::format("cannot open {}", path.string()));
  const auto table = parse_metrics_long_csv(in, path.string());
  const auto rubric = load_rubric();
  for (const auto& c : metric_columns(rubric)) {
    if (std::find(table.metrics.begin(), table.metrics.end(), c) == table.metrics.end() &&
        !table.participants.empty()) {
      throw Error(ErrorKind::kSchema, fmt::format("{}: metric column \"{}\" is missing", path.string(), c));
    }
  }
  if (table.participants.size() < 2) {
    throw Error(ErrorKind::kPrecondition,
                fmt::format("{}: group statistics need at least two participants", path.string()));
  }
  const auto report = build_report(table);
  result.warnings = report.warnings;
  fs::create_directories(config_.output_dir);
  const auto json_path = config_.output_dir / "group_report.json";
  const auto md_path = config_.output_dir / "group_report.md";
  write_file_atomic(json_path, report_to_json(report));
  write_file_atomic(md_path, report_to_markdown(report));
  result.outputs = {json_path, md_path};
  return result;
}

}  // namespace bemseval
