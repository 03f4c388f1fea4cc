#include "shiftscope/shiftscope.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <new>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>

#include "shiftscope/ablation.hpp"
#include "shiftscope/detector.hpp"
#include "shiftscope/error.hpp"
#include "shiftscope/report.hpp"
#include "shiftscope/sampling.hpp"
#include "shiftscope/topology.hpp"

struct shiftscope_embedding {
  shiftscope::EmbeddingSet set;
};

struct shiftscope_report {
  std::variant<shiftscope::ShiftReport, shiftscope::PerturbationReport> value;
};

namespace {

using namespace shiftscope;

thread_local std::string g_last_error;

int fail(int status, const char* message) {
  g_last_error = message;
  return status;
}

// Runs `body` and maps exceptions onto status codes.
template <class F>
int guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return SHIFTSCOPE_OK;
  } catch (const Error& e) {
    return fail(static_cast<int>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SHIFTSCOPE_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(SHIFTSCOPE_INTERNAL_ERROR, e.what());
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw Error(ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

shiftscope_embedding* wrap(EmbeddingSet set) { return new shiftscope_embedding{std::move(set)}; }

MetricConfig to_metric(const shiftscope_metric_options& o) {
  MetricConfig m;
  switch (o.metric) {
    case SHIFTSCOPE_METRIC_ENERGY:
      m.kind = Metric::kEnergy;
      break;
    case SHIFTSCOPE_METRIC_LOCAL_ENERGY:
      m.kind = Metric::kLocalEnergy;
      break;
    case SHIFTSCOPE_METRIC_SWP:
      m.kind = Metric::kSwp;
      break;
    default:
      throw Error(ErrorCode::kConfig, "unknown metric id");
  }
  m.k = o.k;
  m.variant = o.all_local ? distances::LocalEnergyVariant::kAllLocal
                          : distances::LocalEnergyVariant::kCrossLocal;
  m.rips.max_dimension = o.max_dim;
  if (o.max_edge_length > 0.0) m.rips.max_edge_length = o.max_edge_length;
  m.rips.h1_point_cap = o.h1_point_cap;
  m.slices = o.slices;
  return m;
}

void pair_out(std::pair<EmbeddingSet, EmbeddingSet> p, shiftscope_embedding** a,
              shiftscope_embedding** b) {
  *a = wrap(std::move(p.first));
  *b = wrap(std::move(p.second));
}

}  // namespace

extern "C" {

uint32_t shiftscope_api_version(void) { return SHIFTSCOPE_API_VERSION; }

const char* shiftscope_last_error(void) { return g_last_error.c_str(); }

const char* shiftscope_status_name(int status) {
  if (status == SHIFTSCOPE_OK) return "OK";
  if (status == SHIFTSCOPE_INTERNAL_ERROR) return "InternalError";
  if (status >= 1 && status <= static_cast<int>(ErrorCode::kInvalidArgument)) {
    return to_string(static_cast<ErrorCode>(status));
  }
  return "Unknown";
}

void shiftscope_string_free(char* s) { delete[] s; }

void shiftscope_metric_options_init(shiftscope_metric_options* opts) {
  if (opts == nullptr) return;
  const MetricConfig d;
  opts->metric = SHIFTSCOPE_METRIC_LOCAL_ENERGY;
  opts->k = d.k;
  opts->all_local = 0;
  opts->max_dim = d.rips.max_dimension;
  opts->max_edge_length = 0.0;
  opts->h1_point_cap = d.rips.h1_point_cap;
  opts->slices = d.slices;
}

void shiftscope_subsample_options_init(shiftscope_subsample_options* opts) {
  if (opts == nullptr) return;
  const DetectorConfig d;
  shiftscope_metric_options_init(&opts->metric);
  opts->subsample_size = d.subsample_size;
  opts->samples_per_run = d.samples_per_run;
  opts->runs = d.runs;
  opts->alpha = d.alpha;
  opts->seed = 0;
  opts->threads = 0;
}

void shiftscope_perturb_options_init(shiftscope_perturb_options* opts) {
  if (opts == nullptr) return;
  const PerturbConfig d;
  shiftscope_metric_options_init(&opts->metric);
  opts->grid = nullptr;
  opts->grid_size = 0;
  opts->criterion_k = d.criterion_k;
  opts->threshold = d.threshold;
  opts->samples_per_level = d.samples_per_level;
  opts->use_mean = 0;
  opts->full_curve = 0;
  opts->seed = 0;
  opts->threads = 0;
}

void shiftscope_ablation_options_init(shiftscope_ablation_options* opts) {
  if (opts == nullptr) return;
  const AblationConfig d;
  shiftscope_metric_options_init(&opts->metric);
  opts->sample_sizes = nullptr;
  opts->sample_sizes_count = 0;
  opts->concentrations = nullptr;
  opts->concentrations_count = 0;
  opts->reps = d.reps;
  opts->samples_per_run = d.samples_per_run;
  opts->alpha = d.alpha;
  opts->seed = 0;
  opts->threads = 0;
}

int shiftscope_parse_metric(const char* name, shiftscope_metric* out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    switch (parse_metric(name)) {
      case Metric::kEnergy:
        *out = SHIFTSCOPE_METRIC_ENERGY;
        break;
      case Metric::kLocalEnergy:
        *out = SHIFTSCOPE_METRIC_LOCAL_ENERGY;
        break;
      case Metric::kSwp:
        *out = SHIFTSCOPE_METRIC_SWP;
        break;
    }
  });
}

int shiftscope_embedding_load(const char* path, const char* label_column,
                              shiftscope_embedding** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    std::optional<std::string> column;
    if (label_column != nullptr) column = label_column;
    *out = wrap(embedio::load(path, column));
  });
}

int shiftscope_embedding_from_array(const double* data, size_t rows, size_t dim,
                                    const int64_t* labels, shiftscope_embedding** out) {
  return guarded([&] {
    require(data, "data");
    require(out, "out");
    std::optional<std::vector<std::int64_t>> l;
    if (labels != nullptr) l.emplace(labels, labels + rows);
    *out = wrap(EmbeddingSet(std::vector<double>(data, data + rows * dim), rows, dim,
                             std::move(l)));
  });
}

int shiftscope_embedding_save(const shiftscope_embedding* set, const char* path) {
  return guarded([&] {
    require(set, "set");
    require(path, "path");
    embedio::save(set->set, path);
  });
}

int shiftscope_embedding_attach_labels(shiftscope_embedding* set, const char* path) {
  return guarded([&] {
    require(set, "set");
    require(path, "path");
    set->set = set->set.with_labels(embedio::load_npy_labels(path));
  });
}

int shiftscope_embedding_normalize(const shiftscope_embedding* set, shiftscope_embedding** out,
                                   size_t* zero_rows) {
  return guarded([&] {
    require(set, "set");
    require(out, "out");
    embedio::NormalizeResult r = embedio::l2_normalize(set->set);
    if (zero_rows != nullptr) *zero_rows = r.zero_rows;
    *out = wrap(std::move(r.set));
  });
}

size_t shiftscope_embedding_rows(const shiftscope_embedding* set) {
  return set ? set->set.rows() : 0;
}

size_t shiftscope_embedding_dim(const shiftscope_embedding* set) {
  return set ? set->set.dim() : 0;
}

int shiftscope_embedding_has_labels(const shiftscope_embedding* set) {
  return set && set->set.has_labels() ? 1 : 0;
}

const double* shiftscope_embedding_data(const shiftscope_embedding* set) {
  return set ? set->set.data().data() : nullptr;
}

const int64_t* shiftscope_embedding_labels(const shiftscope_embedding* set) {
  return set && set->set.has_labels() ? set->set.labels().data() : nullptr;
}

void shiftscope_embedding_free(shiftscope_embedding* set) { delete set; }

int shiftscope_gen_clusters(size_t classes, size_t per_class, size_t dim, double separation,
                            uint64_t seed, shiftscope_embedding** out) {
  return guarded([&] {
    require(out, "out");
    *out = wrap(sampling::gaussian_clusters(classes, per_class, dim, separation, RngSeed{seed, 0}));
  });
}

int shiftscope_gen_subpop(const shiftscope_embedding* set, double fraction, uint64_t seed,
                          shiftscope_embedding** reference, shiftscope_embedding** candidate) {
  return guarded([&] {
    require(set, "set");
    require(reference, "reference");
    require(candidate, "candidate");
    pair_out(sampling::subpopulation_shift(set->set, fraction, RngSeed{seed, 0}), reference,
             candidate);
  });
}

int shiftscope_gen_subpop_mixture(const shiftscope_embedding* set, const double* fractions_a,
                                  size_t count_a, const double* fractions_b, size_t count_b,
                                  uint64_t seed, shiftscope_embedding** reference,
                                  shiftscope_embedding** candidate) {
  return guarded([&] {
    require(set, "set");
    require(fractions_a, "fractions_a");
    require(fractions_b, "fractions_b");
    require(reference, "reference");
    require(candidate, "candidate");
    const ClassMixture a{std::vector<double>(fractions_a, fractions_a + count_a)};
    const ClassMixture b{std::vector<double>(fractions_b, fractions_b + count_b)};
    pair_out(sampling::subpopulation_shift(set->set, a, b, RngSeed{seed, 0}), reference,
             candidate);
  });
}

int shiftscope_gen_domain(const shiftscope_embedding* set, const int64_t* classes_a,
                          size_t count_a, const int64_t* classes_b, size_t count_b,
                          shiftscope_embedding** reference, shiftscope_embedding** candidate) {
  return guarded([&] {
    require(set, "set");
    require(reference, "reference");
    require(candidate, "candidate");
    if (count_a > 0) require(classes_a, "classes_a");
    if (count_b > 0) require(classes_b, "classes_b");
    const std::set<std::int64_t> a(classes_a, classes_a + count_a);
    const std::set<std::int64_t> b(classes_b, classes_b + count_b);
    pair_out(sampling::domain_split(set->set, a, b), reference, candidate);
  });
}

int shiftscope_gen_dirichlet(const shiftscope_embedding* set, double concentration, uint64_t seed,
                             shiftscope_embedding** reference, shiftscope_embedding** candidate) {
  return guarded([&] {
    require(set, "set");
    require(reference, "reference");
    require(candidate, "candidate");
    if (!(concentration > 0.0)) throw Error(ErrorCode::kConfig, "concentration must be positive");
    const RngSeed rng{seed, 0};
    auto [a, b] = sampling::split_halves(set->set, rng.child(0));
    const ClassMixture mix =
        sampling::dirichlet_mixture(sampling::num_classes(set->set), concentration, rng.child(1));
    EmbeddingSet shifted = sampling::apply_class_mixture(b, mix, rng.child(2));
    pair_out({std::move(a), std::move(shifted)}, reference, candidate);
  });
}

int shiftscope_metric_distance(const shiftscope_embedding* x, const shiftscope_embedding* y,
                               const shiftscope_metric_options* opts, uint64_t seed, double* out) {
  return guarded([&] {
    require(x, "x");
    require(y, "y");
    require(opts, "opts");
    require(out, "out");
    const MetricConfig m = to_metric(*opts);
    m.validate();
    *out = evaluate_metric(x->set, y->set, m, RngSeed{seed, 0});
  });
}

int shiftscope_knn_recall(const shiftscope_embedding* reference,
                          const shiftscope_embedding* evaluation, size_t k, double* out) {
  return guarded([&] {
    require(reference, "reference");
    require(evaluation, "evaluation");
    require(out, "out");
    *out = distances::knn_recall(reference->set, evaluation->set, k);
  });
}

int shiftscope_diagrams_csv(const shiftscope_embedding* set, const shiftscope_metric_options* opts,
                            uint64_t seed, char** out) {
  return guarded([&] {
    require(set, "set");
    require(opts, "opts");
    require(out, "out");
    RipsConfig rips = to_metric(*opts).rips;
    rips.seed = RngSeed{seed, 0};
    *out = copy_string(topology::format_diagrams_csv(topology::rips_diagrams(set->set, rips)));
  });
}

int shiftscope_detect_subsample(const shiftscope_embedding* reference,
                                const shiftscope_embedding* candidate,
                                const shiftscope_subsample_options* opts,
                                shiftscope_report** out) {
  return guarded([&] {
    require(reference, "reference");
    require(candidate, "candidate");
    require(opts, "opts");
    require(out, "out");
    DetectorConfig cfg;
    cfg.metric = to_metric(opts->metric);
    cfg.subsample_size = opts->subsample_size;
    cfg.samples_per_run = opts->samples_per_run;
    cfg.runs = opts->runs;
    cfg.alpha = opts->alpha;
    cfg.seed = RngSeed{opts->seed, 0};
    cfg.threads = opts->threads;
    *out = new shiftscope_report{detector::subsample_shift_test(reference->set, candidate->set, cfg)};
  });
}

int shiftscope_detect_perturbation(const shiftscope_embedding* reference,
                                   const shiftscope_embedding* candidate,
                                   const shiftscope_perturb_options* opts,
                                   shiftscope_report** out) {
  return guarded([&] {
    require(reference, "reference");
    require(candidate, "candidate");
    require(opts, "opts");
    require(out, "out");
    PerturbConfig cfg;
    if (opts->grid != nullptr) cfg.grid.assign(opts->grid, opts->grid + opts->grid_size);
    cfg.criterion_k = opts->criterion_k;
    cfg.threshold = opts->threshold;
    cfg.samples_per_level = opts->samples_per_level;
    cfg.aggregator = opts->use_mean ? Aggregator::kMean : Aggregator::kMedian;
    cfg.full_curve = opts->full_curve != 0;
    cfg.seed = RngSeed{opts->seed, 0};
    cfg.threads = opts->threads;
    *out = new shiftscope_report{detector::perturbation_shift_test(
        reference->set, candidate->set, to_metric(opts->metric), cfg)};
  });
}

int shiftscope_report_decision(const shiftscope_report* report) {
  if (report == nullptr) return -1;
  const Decision d = std::visit([](const auto& r) { return r.decision; }, report->value);
  return d == Decision::kYes ? 1 : 0;
}

size_t shiftscope_report_warning_count(const shiftscope_report* report) {
  if (report == nullptr) return 0;
  const auto* p = std::get_if<PerturbationReport>(&report->value);
  return p ? p->warnings.size() : 0;
}

const char* shiftscope_report_warning(const shiftscope_report* report, size_t index) {
  if (report == nullptr) return nullptr;
  const auto* p = std::get_if<PerturbationReport>(&report->value);
  if (p == nullptr || index >= p->warnings.size()) return nullptr;
  return p->warnings[index].c_str();
}

int shiftscope_report_render(const shiftscope_report* report, shiftscope_format format,
                             char** out) {
  return guarded([&] {
    require(report, "report");
    require(out, "out");
    report::Format f = report::Format::kJson;
    switch (format) {
      case SHIFTSCOPE_FORMAT_JSON:
        f = report::Format::kJson;
        break;
      case SHIFTSCOPE_FORMAT_TABLE:
        f = report::Format::kTable;
        break;
      case SHIFTSCOPE_FORMAT_CSV:
        f = report::Format::kCsv;
        break;
      default:
        throw Error(ErrorCode::kConfig, "unknown format id");
    }
    *out = copy_string(std::visit([&](const auto& r) { return report::render(r, f); },
                                  report->value));
  });
}

void shiftscope_report_free(shiftscope_report* report) { delete report; }

int shiftscope_ablate(const shiftscope_embedding* labeled, const shiftscope_ablation_options* opts,
                      char** csv) {
  return guarded([&] {
    require(labeled, "labeled");
    require(opts, "opts");
    require(csv, "csv");
    AblationConfig cfg;
    cfg.metric = to_metric(opts->metric);
    if (opts->sample_sizes != nullptr) {
      cfg.sample_sizes.assign(opts->sample_sizes, opts->sample_sizes + opts->sample_sizes_count);
    }
    if (opts->concentrations != nullptr) {
      cfg.concentrations.assign(opts->concentrations,
                                opts->concentrations + opts->concentrations_count);
    }
    cfg.reps = opts->reps;
    cfg.samples_per_run = opts->samples_per_run;
    cfg.alpha = opts->alpha;
    cfg.seed = RngSeed{opts->seed, 0};
    cfg.threads = opts->threads;
    *csv = copy_string(ablation::format_csv(ablation::run(labeled->set, cfg)));
  });
}

}  // extern "C"
