#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include "bemseval.h"
#include "tempdir.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kCorpus = BEMSEVAL_CORPUS_DIR;

}  // namespace

TEST_CASE("status strings and validation classes") {
  CHECK(std::strlen(bemseval_version()) > 0);
  CHECK(std::string(bemseval_status_string(BEMSEVAL_OK)) == "ok");
  CHECK(bemseval_status_is_validation(BEMSEVAL_E_CONFIG));
  CHECK(bemseval_status_is_validation(BEMSEVAL_E_SCHEMA));
  CHECK(bemseval_status_is_validation(BEMSEVAL_E_REVIEW_LOCK));
  CHECK_FALSE(bemseval_status_is_validation(BEMSEVAL_E_TRANSPORT));
  CHECK_FALSE(bemseval_status_is_validation(BEMSEVAL_E_REPLAY_MISS));
  CHECK_FALSE(bemseval_status_is_validation(BEMSEVAL_OK));
}

TEST_CASE("numeric primitives through the C interface") {
  const double g1[] = {1, 2, 3}, g2[] = {4, 5, 6}, g3[] = {7, 8, 9}, g4[] = {10, 11, 12};
  const double* groups[] = {g1, g2, g3, g4};
  const size_t sizes[] = {3, 3, 3, 3};
  double h = 0, p = 0;
  int df = 0;
  REQUIRE(bemseval_kruskal_wallis(groups, sizes, 4, &h, &df, &p) == BEMSEVAL_OK);
  CHECK(std::abs(h - 10.3846) <= 1e-4);
  CHECK(df == 3);

  double u = -1, r = 0;
  int exact = 0;
  REQUIRE(bemseval_mann_whitney(g1, 3, g2, 3, &u, &p, &exact) == BEMSEVAL_OK);
  CHECK(u == 0.0);
  CHECK(exact == 1);
  CHECK(std::abs(p - 0.1) <= 1e-12);
  REQUIRE(bemseval_rank_biserial(g1, 3, g2, 3, &r) == BEMSEVAL_OK);
  CHECK(r == 1.0);

  double adj = 0;
  CHECK(bemseval_bonferroni(0.01, 6, &adj) == BEMSEVAL_OK);
  CHECK(std::abs(adj - 0.06) <= 1e-15);
  CHECK(bemseval_bonferroni(2.0, 6, &adj) == BEMSEVAL_E_DOMAIN);
  CHECK(std::string(bemseval_last_error()).size() > 0);

  CHECK(bemseval_chi2_sf(7.815, 3, &p) == BEMSEVAL_OK);
  CHECK(std::abs(p - 0.05) <= 1e-4);

  const double factors[] = {0.8, 0.6, 0.4, 0.2};
  double conf = 0;
  CHECK(bemseval_scale_confidence(factors, nullptr, &conf) == BEMSEVAL_OK);
  CHECK(conf == 0.5);
  const double off_lattice[] = {0.7, 0.6, 0.4, 0.2};
  CHECK(bemseval_scale_confidence(off_lattice, nullptr, &conf) == BEMSEVAL_E_RUBRIC_VIOLATION);
  CHECK(bemseval_mann_whitney(nullptr, 3, g2, 3, &u, &p, &exact) == BEMSEVAL_E_INVALID_ARGUMENT);
}

TEST_CASE("pipeline handle runs the corpus in strict replay") {
  testsupport::TempDir dir("capi");
  testsupport::copy_corpus(kCorpus, dir.path());
  bemseval_pipeline* p = nullptr;
  REQUIRE(bemseval_pipeline_open((dir / "config.json").c_str(), &p) == BEMSEVAL_OK);
  REQUIRE(bemseval_pipeline_set_output_dir(p, (dir / "capi_out").c_str()) == BEMSEVAL_OK);
  int incomplete = -1;
  REQUIRE(bemseval_pipeline_run(p, BEMSEVAL_STAGE_PIPELINE, &incomplete) == BEMSEVAL_OK);
  CHECK(incomplete == 0);
  CHECK(bemseval_pipeline_output_count(p) > 0);
  CHECK(testsupport::read_text(dir / "capi_out" / "group_report.json") ==
        testsupport::read_text(kCorpus / "golden" / "group_report.json"));
  bemseval_pipeline_close(p);

  bemseval_pipeline* missing = nullptr;
  CHECK(bemseval_pipeline_open((dir / "absent.json").c_str(), &missing) == BEMSEVAL_E_CONFIG);
  CHECK(missing == nullptr);
}

TEST_CASE("verdict review through the C interface") {
  testsupport::TempDir dir("capi_review");
  const auto path = dir / "S01.json";
  fs::copy_file(kCorpus / "golden" / "verdicts" / "S01.json", path);

  bemseval_verdict* v = nullptr;
  REQUIRE(bemseval_verdict_open(path.c_str(), &v) == BEMSEVAL_OK);
  CHECK(std::string(bemseval_verdict_session(v)) == "S01");
  CHECK(std::string(bemseval_verdict_status(v)) == "unreviewed");
  CHECK(bemseval_verdict_scored(v) == 1);
  int match = -1;
  REQUIRE(bemseval_verdict_get_flag(v, BEMSEVAL_FLAG_APPLIANCE, "dishwasher", &match) == BEMSEVAL_OK);
  CHECK(match == 0);
  CHECK(bemseval_verdict_get_flag(v, BEMSEVAL_FLAG_APPLIANCE, "toaster", &match) ==
        BEMSEVAL_E_PRECONDITION);

  bemseval_rates before{};
  REQUIRE(bemseval_verdict_rates(v, &before) == BEMSEVAL_OK);
  CHECK(before.appliances_matched == 4);
  CHECK(std::abs(before.overall_alignment - 0.757143) <= 1e-6);

  REQUIRE(bemseval_verdict_set_flag(v, BEMSEVAL_FLAG_STRATEGY, "dishwasher_shift", 1) == BEMSEVAL_OK);
  REQUIRE(bemseval_verdict_commit_review(v, "reviewer found the dishwasher", 0) == BEMSEVAL_OK);
  CHECK(std::string(bemseval_verdict_status(v)) == "corrected");
  bemseval_rates after{};
  REQUIRE(bemseval_verdict_rates(v, &after) == BEMSEVAL_OK);
  CHECK(after.strategies_matched == before.strategies_matched + 1);
  REQUIRE(bemseval_verdict_save(v, nullptr) == BEMSEVAL_OK);
  bemseval_verdict_close(v);

  REQUIRE(bemseval_verdict_open(path.c_str(), &v) == BEMSEVAL_OK);
  CHECK(std::string(bemseval_verdict_status(v)) == "corrected");
  REQUIRE(bemseval_verdict_set_flag(v, BEMSEVAL_FLAG_STRATEGY, "dishwasher_shift", 0) == BEMSEVAL_OK);
  CHECK(bemseval_verdict_commit_review(v, "again", 0) == BEMSEVAL_E_REVIEW_LOCK);
  CHECK(bemseval_verdict_commit_review(v, "again", 1) == BEMSEVAL_OK);
  bemseval_verdict_close(v);
}
