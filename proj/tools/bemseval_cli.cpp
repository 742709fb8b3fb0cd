// Command-line front end. Talks to the library only through bemseval.h.
//
// Exit codes: 0 success, 1 validation error (bad config or input files),
// 2 runtime error (including judge values that could not be obtained).

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bemseval.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

int exit_code_for(bemseval_status s) {
  if (s == BEMSEVAL_OK) return kExitOk;
  return bemseval_status_is_validation(s) ? kExitValidation : kExitRuntime;
}

int report_failure(bemseval_status s) {
  std::cerr << "error: " << bemseval_status_string(s) << ": " << bemseval_last_error() << "\n";
  return exit_code_for(s);
}

struct GlobalOptions {
  std::string config;
  std::string replay;
  bool strict_replay = false;
  std::string out;
};

int run_stage(const GlobalOptions& g, bemseval_stage stage) {
  if (g.config.empty()) {
    std::cerr << "error: --config is required\n";
    return kExitValidation;
  }
  if (g.strict_replay && g.replay.empty()) {
    std::cerr << "error: --strict-replay needs --replay <store>\n";
    return kExitValidation;
  }
  bemseval_pipeline* p = nullptr;
  auto s = bemseval_pipeline_open(g.config.c_str(), &p);
  if (s != BEMSEVAL_OK) return report_failure(s);
  if (!g.out.empty() && (s = bemseval_pipeline_set_output_dir(p, g.out.c_str())) != BEMSEVAL_OK) {
    bemseval_pipeline_close(p);
    return report_failure(s);
  }
  if (!g.replay.empty() &&
      (s = bemseval_pipeline_set_replay(p, g.replay.c_str(), g.strict_replay ? 1 : 0)) != BEMSEVAL_OK) {
    bemseval_pipeline_close(p);
    return report_failure(s);
  }
  int incomplete = 0;
  s = bemseval_pipeline_run(p, stage, &incomplete);
  for (size_t i = 0; i < bemseval_pipeline_warning_count(p); ++i) {
    std::cerr << "warning: " << bemseval_pipeline_warning(p, i) << "\n";
  }
  int code = kExitOk;
  if (s != BEMSEVAL_OK) {
    code = report_failure(s);
  } else {
    for (size_t i = 0; i < bemseval_pipeline_output_count(p); ++i) {
      std::cout << "wrote " << bemseval_pipeline_output(p, i) << "\n";
    }
    if (incomplete) {
      std::cerr << "error: some judge scores are missing; see analyze_errors.json\n";
      code = kExitRuntime;
    }
  }
  bemseval_pipeline_close(p);
  return code;
}

// "appliance:<id>=true" or "strategy:<id>=false"
bool parse_edit(const std::string& text, bemseval_flag_kind& kind, std::string& key, int& match) {
  const auto colon = text.find(':');
  const auto eq = text.rfind('=');
  if (colon == std::string::npos || eq == std::string::npos || eq < colon) return false;
  const auto k = text.substr(0, colon);
  const auto v = text.substr(eq + 1);
  key = text.substr(colon + 1, eq - colon - 1);
  if (key.empty()) return false;
  if (k == "appliance") {
    kind = BEMSEVAL_FLAG_APPLIANCE;
  } else if (k == "strategy") {
    kind = BEMSEVAL_FLAG_STRATEGY;
  } else {
    return false;
  }
  if (v == "true" || v == "1") {
    match = 1;
  } else if (v == "false" || v == "0") {
    match = 0;
  } else {
    return false;
  }
  return true;
}

int run_review(const std::string& path, const std::vector<std::string>& edits,
               const std::string& note, bool force) {
  bemseval_verdict* v = nullptr;
  auto s = bemseval_verdict_open(path.c_str(), &v);
  if (s != BEMSEVAL_OK) return report_failure(s);
  auto finish = [&](bemseval_status st) {
    bemseval_verdict_close(v);
    return report_failure(st);
  };
  for (const auto& e : edits) {
    bemseval_flag_kind kind;
    std::string key;
    int match = 0;
    if (!parse_edit(e, kind, key, match)) {
      bemseval_verdict_close(v);
      std::cerr << "error: bad --set value '" << e << "' (want appliance:<id>=true|false)\n";
      return kExitValidation;
    }
    if ((s = bemseval_verdict_set_flag(v, kind, key.c_str(), match)) != BEMSEVAL_OK) return finish(s);
  }
  if ((s = bemseval_verdict_commit_review(v, note.c_str(), force ? 1 : 0)) != BEMSEVAL_OK) {
    return finish(s);
  }
  if ((s = bemseval_verdict_save(v, nullptr)) != BEMSEVAL_OK) return finish(s);
  bemseval_rates r{};
  if ((s = bemseval_verdict_rates(v, &r)) != BEMSEVAL_OK) return finish(s);
  std::printf("%s %s appliances %d/5 (%.6f) strategies %d/7 (%.6f) overall %.6f\n",
              bemseval_verdict_session(v), bemseval_verdict_status(v), r.appliances_matched,
              r.appliance_identification_rate, r.strategies_matched, r.strategy_alignment_rate,
              r.overall_alignment);
  bemseval_verdict_close(v);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-saving potential and judge-based conversation evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", bemseval_version());

  GlobalOptions g;
  app.add_option("--config", g.config, "Pipeline config JSON")->check(CLI::ExistingFile);
  app.add_option("--replay", g.replay, "Judge replay store (records misses unless --strict-replay)");
  app.add_flag("--strict-replay", g.strict_replay, "Answer judge calls only from the replay store");
  app.add_option("--out", g.out, "Output directory (overrides the config)");

  auto* potential = app.add_subcommand("potential", "Appliance metrics and reference solutions");
  auto* analyze = app.add_subcommand("analyze", "Per-participant conversation metrics");
  auto* stats = app.add_subcommand("stats", "Group comparison report");
  auto* pipeline = app.add_subcommand("pipeline", "potential, analyze and stats in sequence");
  for (auto* sub : {potential, analyze, stats, pipeline}) sub->fallthrough();

  auto* review = app.add_subcommand("review", "Confirm or correct a conclusion verdict");
  std::string verdict_path, note;
  std::vector<std::string> edits;
  bool force = false;
  review->add_option("verdict", verdict_path, "Verdict JSON file")->required()->check(CLI::ExistingFile);
  review->add_option("--set", edits, "Flag edit, e.g. strategy:pool_pump_shift=true");
  review->add_option("--note", note, "Reviewer note stored in the review log");
  review->add_flag("--force", force, "Edit a verdict that was already reviewed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  if (*potential) return run_stage(g, BEMSEVAL_STAGE_POTENTIAL);
  if (*analyze) return run_stage(g, BEMSEVAL_STAGE_ANALYZE);
  if (*stats) return run_stage(g, BEMSEVAL_STAGE_STATS);
  if (*pipeline) return run_stage(g, BEMSEVAL_STAGE_PIPELINE);
  return run_review(verdict_path, edits, note, force);
}
