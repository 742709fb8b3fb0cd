#include "bemseval.h"

#include <exception>
#include <new>
#include <string>
#include <vector>

#include "bemseval/conclusion.hpp"
#include "bemseval/error.hpp"
#include "bemseval/pipeline.hpp"
#include "bemseval/scale.hpp"
#include "bemseval/stats.hpp"
#include "bemseval/util.hpp"

using namespace bemseval;

struct bemseval_pipeline {
  Pipeline pipeline;
  std::vector<std::string> warnings;
  std::vector<std::string> outputs;
};

struct bemseval_verdict {
  std::filesystem::path source;
  ConclusionVerdict verdict;
  std::vector<ReviewEdit> staged;
};

namespace {

thread_local std::string tl_last_error;

bemseval_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return BEMSEVAL_E_CONFIG;
    case ErrorKind::kIo: return BEMSEVAL_E_IO;
    case ErrorKind::kParse: return BEMSEVAL_E_PARSE;
    case ErrorKind::kOrdering: return BEMSEVAL_E_ORDERING;
    case ErrorKind::kCadence: return BEMSEVAL_E_CADENCE;
    case ErrorKind::kSchema: return BEMSEVAL_E_SCHEMA;
    case ErrorKind::kConflict: return BEMSEVAL_E_CONFLICT;
    case ErrorKind::kPrecondition: return BEMSEVAL_E_PRECONDITION;
    case ErrorKind::kDomain: return BEMSEVAL_E_DOMAIN;
    case ErrorKind::kCoverage: return BEMSEVAL_E_COVERAGE;
    case ErrorKind::kInsufficientData: return BEMSEVAL_E_INSUFFICIENT_DATA;
    case ErrorKind::kInsufficientCandidates: return BEMSEVAL_E_INSUFFICIENT_CANDIDATES;
    case ErrorKind::kUndefinedRatio: return BEMSEVAL_E_UNDEFINED_RATIO;
    case ErrorKind::kFormat: return BEMSEVAL_E_FORMAT;
    case ErrorKind::kRubricViolation: return BEMSEVAL_E_RUBRIC_VIOLATION;
    case ErrorKind::kTransport: return BEMSEVAL_E_TRANSPORT;
    case ErrorKind::kProtocol: return BEMSEVAL_E_PROTOCOL;
    case ErrorKind::kReplayMiss: return BEMSEVAL_E_REPLAY_MISS;
    case ErrorKind::kReviewLock: return BEMSEVAL_E_REVIEW_LOCK;
  }
  return BEMSEVAL_E_INTERNAL;
}

bemseval_status fail(bemseval_status s, std::string message) {
  tl_last_error = std::move(message);
  return s;
}

// Runs f, translating exceptions into status codes.
template <typename F>
bemseval_status guarded(F&& f) {
  try {
    tl_last_error.clear();
    f();
    return BEMSEVAL_OK;
  } catch (const Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(BEMSEVAL_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(BEMSEVAL_E_INTERNAL, e.what());
  } catch (...) {
    return fail(BEMSEVAL_E_INTERNAL, "unknown error");
  }
}

Stage stage_of(bemseval_stage s) {
  switch (s) {
    case BEMSEVAL_STAGE_POTENTIAL: return Stage::kPotential;
    case BEMSEVAL_STAGE_ANALYZE: return Stage::kAnalyze;
    case BEMSEVAL_STAGE_STATS: return Stage::kStats;
    case BEMSEVAL_STAGE_PIPELINE: return Stage::kPipeline;
  }
  throw Error(ErrorKind::kPrecondition, "unknown stage");
}

FlagKind kind_of(bemseval_flag_kind k) {
  return k == BEMSEVAL_FLAG_APPLIANCE ? FlagKind::kAppliance : FlagKind::kStrategy;
}

#define BEMSEVAL_REQUIRE(cond)                                                   \
  do {                                                                           \
    if (!(cond)) return fail(BEMSEVAL_E_INVALID_ARGUMENT, "invalid argument: " #cond); \
  } while (0)

}  // namespace

extern "C" {

const char* bemseval_version(void) { return "0.1.0"; }

const char* bemseval_status_string(bemseval_status status) {
  switch (status) {
    case BEMSEVAL_OK: return "ok";
    case BEMSEVAL_E_INVALID_ARGUMENT: return "invalid argument";
    case BEMSEVAL_E_INTERNAL: return "internal error";
    default: break;
  }
  for (int k = 0; k <= static_cast<int>(ErrorKind::kReviewLock); ++k) {
    if (status_of(static_cast<ErrorKind>(k)) == status) return to_string(static_cast<ErrorKind>(k)).data();
  }
  return "unknown status";
}

const char* bemseval_last_error(void) { return tl_last_error.c_str(); }

int bemseval_status_is_validation(bemseval_status status) {
  if (status == BEMSEVAL_E_INVALID_ARGUMENT) return 1;
  for (int k = 0; k <= static_cast<int>(ErrorKind::kReviewLock); ++k) {
    const auto kind = static_cast<ErrorKind>(k);
    if (status_of(kind) == status) return is_validation_error(kind) ? 1 : 0;
  }
  return 0;
}

bemseval_status bemseval_pipeline_open(const char* config_path, bemseval_pipeline** out) {
  BEMSEVAL_REQUIRE(config_path != nullptr);
  BEMSEVAL_REQUIRE(out != nullptr);
  *out = nullptr;
  return guarded([&] {
    *out = new bemseval_pipeline{Pipeline(load_pipeline_config(config_path)), {}, {}};
  });
}

void bemseval_pipeline_close(bemseval_pipeline* p) { delete p; }

bemseval_status bemseval_pipeline_set_output_dir(bemseval_pipeline* p, const char* dir) {
  BEMSEVAL_REQUIRE(p != nullptr);
  BEMSEVAL_REQUIRE(dir != nullptr && *dir != '\0');
  return guarded([&] { p->pipeline.mutable_config().output_dir = dir; });
}

bemseval_status bemseval_pipeline_set_replay(bemseval_pipeline* p, const char* store, int strict) {
  BEMSEVAL_REQUIRE(p != nullptr);
  return guarded([&] {
    auto& c = p->pipeline.mutable_config();
    if (store != nullptr) {
      c.replay_store = std::filesystem::path(store);
    } else {
      c.replay_store.reset();
    }
    c.strict_replay = strict != 0;
  });
}

bemseval_status bemseval_pipeline_validate(bemseval_pipeline* p, bemseval_stage stage) {
  BEMSEVAL_REQUIRE(p != nullptr);
  return guarded([&] { p->pipeline.validate(stage_of(stage)); });
}

bemseval_status bemseval_pipeline_run(bemseval_pipeline* p, bemseval_stage stage, int* incomplete) {
  BEMSEVAL_REQUIRE(p != nullptr);
  if (incomplete != nullptr) *incomplete = 0;
  p->warnings.clear();
  p->outputs.clear();
  return guarded([&] {
    auto result = p->pipeline.run(stage_of(stage));
    p->warnings = std::move(result.warnings);
    for (const auto& o : result.outputs) p->outputs.push_back(o.string());
    if (incomplete != nullptr) *incomplete = result.incomplete ? 1 : 0;
  });
}

size_t bemseval_pipeline_warning_count(const bemseval_pipeline* p) {
  return p == nullptr ? 0 : p->warnings.size();
}

const char* bemseval_pipeline_warning(const bemseval_pipeline* p, size_t index) {
  if (p == nullptr || index >= p->warnings.size()) return nullptr;
  return p->warnings[index].c_str();
}

size_t bemseval_pipeline_output_count(const bemseval_pipeline* p) {
  return p == nullptr ? 0 : p->outputs.size();
}

const char* bemseval_pipeline_output(const bemseval_pipeline* p, size_t index) {
  if (p == nullptr || index >= p->outputs.size()) return nullptr;
  return p->outputs[index].c_str();
}

bemseval_status bemseval_verdict_open(const char* path, bemseval_verdict** out) {
  BEMSEVAL_REQUIRE(path != nullptr);
  BEMSEVAL_REQUIRE(out != nullptr);
  *out = nullptr;
  return guarded([&] {
    auto v = parse_verdict_json(read_file(path));
    *out = new bemseval_verdict{path, std::move(v), {}};
  });
}

void bemseval_verdict_close(bemseval_verdict* v) { delete v; }

const char* bemseval_verdict_session(const bemseval_verdict* v) {
  return v == nullptr ? nullptr : v->verdict.session_id.c_str();
}

const char* bemseval_verdict_status(const bemseval_verdict* v) {
  return v == nullptr ? nullptr : to_string(v->verdict.review_status).data();
}

int bemseval_verdict_scored(const bemseval_verdict* v) {
  return v != nullptr && v->verdict.scored ? 1 : 0;
}

bemseval_status bemseval_verdict_get_flag(const bemseval_verdict* v, bemseval_flag_kind kind,
                                          const char* key, int* match) {
  BEMSEVAL_REQUIRE(v != nullptr);
  BEMSEVAL_REQUIRE(key != nullptr);
  BEMSEVAL_REQUIRE(match != nullptr);
  return guarded([&] { *match = v->verdict.flag(kind_of(kind), key).match ? 1 : 0; });
}

bemseval_status bemseval_verdict_set_flag(bemseval_verdict* v, bemseval_flag_kind kind,
                                          const char* key, int match) {
  BEMSEVAL_REQUIRE(v != nullptr);
  BEMSEVAL_REQUIRE(key != nullptr);
  return guarded([&] {
    v->verdict.flag(kind_of(kind), key);  // rejects unknown keys now rather than at commit
    v->staged.push_back({kind_of(kind), key, match != 0});
  });
}

bemseval_status bemseval_verdict_commit_review(bemseval_verdict* v, const char* note, int force) {
  BEMSEVAL_REQUIRE(v != nullptr);
  return guarded([&] {
    v->verdict = apply_review(v->verdict, v->staged, note == nullptr ? "" : note, force != 0);
    v->staged.clear();
  });
}

bemseval_status bemseval_verdict_rates(const bemseval_verdict* v, bemseval_rates* out) {
  BEMSEVAL_REQUIRE(v != nullptr);
  BEMSEVAL_REQUIRE(out != nullptr);
  return guarded([&] {
    const auto r = rates(v->verdict);
    *out = {r.appliances_matched, r.strategies_matched, r.appliance_identification_rate,
            r.strategy_alignment_rate, r.overall_alignment};
  });
}

bemseval_status bemseval_verdict_save(const bemseval_verdict* v, const char* path) {
  BEMSEVAL_REQUIRE(v != nullptr);
  return guarded([&] {
    write_file_atomic(path != nullptr ? std::filesystem::path(path) : v->source,
                      verdict_to_json(v->verdict));
  });
}

bemseval_status bemseval_kruskal_wallis(const double* const* groups, const size_t* sizes, size_t k,
                                        double* h, int* df, double* p) {
  BEMSEVAL_REQUIRE(groups != nullptr && sizes != nullptr);
  BEMSEVAL_REQUIRE(h != nullptr && df != nullptr && p != nullptr);
  return guarded([&] {
    std::vector<std::vector<double>> g(k);
    for (size_t i = 0; i < k; ++i) {
      if (sizes[i] > 0 && groups[i] == nullptr) {
        throw Error(ErrorKind::kPrecondition, "group pointer is null");
      }
      if (sizes[i] > 0) g[i].assign(groups[i], groups[i] + sizes[i]);
    }
    const auto r = kruskal_wallis(g);
    *h = r.h;
    *df = r.df;
    *p = r.p;
  });
}

bemseval_status bemseval_mann_whitney(const double* a, size_t na, const double* b, size_t nb,
                                      double* u, double* p, int* exact) {
  BEMSEVAL_REQUIRE(na == 0 || a != nullptr);
  BEMSEVAL_REQUIRE(nb == 0 || b != nullptr);
  BEMSEVAL_REQUIRE(u != nullptr && p != nullptr);
  return guarded([&] {
    const auto r = mann_whitney(std::span<const double>(a, na), std::span<const double>(b, nb));
    *u = r.u;
    *p = r.p;
    if (exact != nullptr) *exact = r.exact ? 1 : 0;
  });
}

bemseval_status bemseval_rank_biserial(const double* a, size_t na, const double* b, size_t nb,
                                       double* r) {
  BEMSEVAL_REQUIRE(na == 0 || a != nullptr);
  BEMSEVAL_REQUIRE(nb == 0 || b != nullptr);
  BEMSEVAL_REQUIRE(r != nullptr);
  return guarded([&] {
    *r = rank_biserial(std::span<const double>(a, na), std::span<const double>(b, nb));
  });
}

bemseval_status bemseval_bonferroni(double p, int m, double* adjusted) {
  BEMSEVAL_REQUIRE(adjusted != nullptr);
  return guarded([&] { *adjusted = bonferroni(p, m); });
}

bemseval_status bemseval_chi2_sf(double x, int df, double* p) {
  BEMSEVAL_REQUIRE(p != nullptr);
  return guarded([&] { *p = chi2_sf(x, df); });
}

bemseval_status bemseval_scale_confidence(const double* factors, const double* weights,
                                          double* confidence_out) {
  BEMSEVAL_REQUIRE(factors != nullptr);
  BEMSEVAL_REQUIRE(confidence_out != nullptr);
  return guarded([&] {
    FactorScores s;
    s.explicitness = FactorLevel::snap(factors[0]);
    s.depth = FactorLevel::snap(factors[1]);
    s.consideration = FactorLevel::snap(factors[2]);
    s.evidence = FactorLevel::snap(factors[3]);
    FactorWeights w = kEqualWeights;
    if (weights != nullptr) w = {weights[0], weights[1], weights[2], weights[3]};
    *confidence_out = confidence(s, w);
  });
}

}  // extern "C"
