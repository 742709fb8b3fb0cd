#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bemseval/pipeline.hpp"
#include "expect_error.hpp"
#include "tempdir.hpp"

using namespace bemseval;
using testsupport::error_kind;
namespace fs = std::filesystem;

namespace {

const fs::path kCorpus = BEMSEVAL_CORPUS_DIR;

// Relative path -> contents for every regular file under `root`.
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) {
      out[fs::relative(e.path(), root).string()] = testsupport::read_text(e.path());
    }
  }
  return out;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

Pipeline corpus_pipeline(const testsupport::TempDir& dir) {
  testsupport::copy_corpus(kCorpus, dir.path());
  return Pipeline(load_pipeline_config(dir / "config.json"));
}

void keep_transcripts(const testsupport::TempDir& dir, const std::vector<std::string>& keep) {
  for (const auto& e : fs::directory_iterator(dir / "transcripts")) {
    if (std::find(keep.begin(), keep.end(), e.path().filename().string()) == keep.end()) {
      fs::remove(e.path());
    }
  }
}

}  // namespace

TEST_CASE("strict replay reproduces the golden outputs byte for byte, twice") {
  testsupport::TempDir dir("pipeline");
  auto p = corpus_pipeline(dir);
  auto r = p.run(Stage::kPipeline);
  CHECK_FALSE(r.incomplete);
  const auto golden = snapshot(kCorpus / "golden");
  const auto first = snapshot(dir / "out");
  CHECK(first.size() == golden.size());
  for (const auto& [name, body] : golden) {
    INFO(name);
    REQUIRE(first.count(name) == 1);
    CHECK(first.at(name) == body);
  }
  Pipeline(load_pipeline_config(dir / "config.json")).run(Stage::kPipeline);
  CHECK(snapshot(dir / "out") == first);
}

TEST_CASE("a subset of transcripts yields the matching golden rows") {
  testsupport::TempDir dir("subset");
  auto p = corpus_pipeline(dir);
  keep_transcripts(dir, {"P01.json", "P05.json", "P09.json"});
  p.run(Stage::kPotential);
  p.run(Stage::kAnalyze);
  const auto got = lines(testsupport::read_text(dir / "out" / "participant_metrics.csv"));
  const auto all = lines(testsupport::read_text(kCorpus / "golden" / "participant_metrics.csv"));
  REQUIRE(got.size() == 4);
  CHECK(got[0] == all[0]);
  CHECK(got[1] == all[1]);
  CHECK(got[2] == all[5]);
  CHECK(got[3] == all[9]);

  auto stats = p.run(Stage::kStats);
  const auto report = nlohmann::json::parse(testsupport::read_text(dir / "out" / "group_report.json"));
  bool any_flagged = false;
  for (const auto& m : report["metrics"]) any_flagged = any_flagged || m["flagged"].get<bool>();
  CHECK(any_flagged);
  CHECK_FALSE(stats.warnings.empty());
}

TEST_CASE("an empty transcript directory gives header-only tables and a warning") {
  testsupport::TempDir dir("empty");
  auto p = corpus_pipeline(dir);
  keep_transcripts(dir, {});
  p.run(Stage::kPotential);
  auto r = p.run(Stage::kAnalyze);
  CHECK(lines(testsupport::read_text(dir / "out" / "participant_metrics.csv")).size() == 1);
  CHECK(r.warnings == std::vector<std::string>{"no transcripts to analyze"});
  CHECK(error_kind([&] { p.run(Stage::kStats); }) == ErrorKind::kPrecondition);
}

TEST_CASE("a malformed transcript is skipped and reported while the rest are analyzed") {
  testsupport::TempDir dir("malformed");
  auto p = corpus_pipeline(dir);
  keep_transcripts(dir, {"P01.json", "P02.json", "P03.json"});
  testsupport::write_text(dir / "transcripts" / "P03.json", R"({"session_id":"S03","turns":[)");
  p.run(Stage::kPotential);
  auto r = p.run(Stage::kAnalyze);
  CHECK(lines(testsupport::read_text(dir / "out" / "participant_metrics.csv")).size() == 3);
  const auto errors =
      nlohmann::json::parse(testsupport::read_text(dir / "out" / "analyze_errors.json"));
  REQUIRE(errors["file_errors"].size() == 1);
  CHECK(errors["file_errors"][0]["file"] == "P03.json");
  CHECK(errors["file_errors"][0]["kind"] == "parse error");
  CHECK(r.warnings.size() == 1);
}

TEST_CASE("configuration errors surface before any output is written") {
  testsupport::TempDir dir("config");
  auto p = corpus_pipeline(dir);
  fs::remove(dir / "house" / "tou.json");
  CHECK(error_kind([&] { p.run(Stage::kPipeline); }) == ErrorKind::kConfig);
  CHECK_FALSE(fs::exists(dir / "out" / "saving_profiles.json"));

  testsupport::TempDir live_dir("live");
  auto live = corpus_pipeline(live_dir);
  live.mutable_config().strict_replay = false;
  live.mutable_config().replay_store.reset();
  live.mutable_config().judge.api_key_env = "BEMSEVAL_TEST_UNSET_TOKEN";
  ::unsetenv("BEMSEVAL_TEST_UNSET_TOKEN");
  const auto msg = testsupport::error_message([&] { live.run(Stage::kPipeline); });
  CHECK(msg.find("BEMSEVAL_TEST_UNSET_TOKEN") != std::string::npos);
  CHECK(error_kind([&] { live.run(Stage::kPipeline); }) == ErrorKind::kConfig);
  CHECK_FALSE(fs::exists(live_dir / "out" / "saving_profiles.json"));

  CHECK(error_kind([] { parse_pipeline_config(R"({"power_csv":"a","bogus":1})", "."); }) ==
        ErrorKind::kConfig);
}

TEST_CASE("metric columns follow the rubric order") {
  const auto cols = metric_columns(default_rubric());
  CHECK(cols.size() == 24);
  CHECK(cols.front() == "total_turns");
  CHECK(cols.back() == "overall_alignment");
}
