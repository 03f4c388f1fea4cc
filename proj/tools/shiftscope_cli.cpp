// shiftscope command line: detect, gen, ablate.
//
// Exit codes: 0 no shift, 3 shift detected, 1 error, 2 bad configuration or
// unlabeled input where labels are required.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "shiftscope/shiftscope.h"

namespace {

constexpr int kExitNoShift = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitShift = 3;

struct EmbeddingDeleter {
  void operator()(shiftscope_embedding* p) const { shiftscope_embedding_free(p); }
};
struct ReportDeleter {
  void operator()(shiftscope_report* p) const { shiftscope_report_free(p); }
};
struct StringDeleter {
  void operator()(char* p) const { shiftscope_string_free(p); }
};
using Embedding = std::unique_ptr<shiftscope_embedding, EmbeddingDeleter>;
using Report = std::unique_ptr<shiftscope_report, ReportDeleter>;
using CString = std::unique_ptr<char, StringDeleter>;

// Carries a library status up to main, which turns it into an exit code.
struct Failure {
  int status;
  std::string message;
};

void check(int status, const std::string& context) {
  if (status == SHIFTSCOPE_OK) return;
  throw Failure{status, context + ": " + shiftscope_last_error()};
}

int exit_code_for(int status) {
  switch (status) {
    case SHIFTSCOPE_CONFIG_ERROR:
    case SHIFTSCOPE_LABELS_REQUIRED:
    case SHIFTSCOPE_INVALID_SPLIT:
    case SHIFTSCOPE_SAMPLE_TOO_LARGE:
    case SHIFTSCOPE_K_TOO_LARGE:
    case SHIFTSCOPE_INVALID_ARGUMENT:
      return kExitConfig;
    default:
      return kExitError;
  }
}

struct InputOptions {
  std::string label_column;
  std::string labels;
  bool no_normalize = false;
};

void add_input_options(CLI::App* app, InputOptions& in) {
  app->add_option("--label-column", in.label_column, "CSV column holding integer labels");
  app->add_option("--labels", in.labels, "1-D integer NPY file with labels for the input");
  app->add_flag("--no-normalize", in.no_normalize, "Skip unit-norm row normalization");
}

Embedding load(const std::string& path, const InputOptions& in, bool attach_labels = true) {
  shiftscope_embedding* raw = nullptr;
  check(shiftscope_embedding_load(path.c_str(),
                                  in.label_column.empty() ? nullptr : in.label_column.c_str(),
                                  &raw),
        path);
  Embedding set(raw);
  if (attach_labels && !in.labels.empty()) {
    check(shiftscope_embedding_attach_labels(set.get(), in.labels.c_str()), in.labels);
  }
  if (in.no_normalize) return set;
  size_t zero_rows = 0;
  check(shiftscope_embedding_normalize(set.get(), &raw, &zero_rows), path);
  if (zero_rows > 0) {
    std::cerr << "warning: " << path << ": " << zero_rows << " zero rows left unnormalized\n";
  }
  return Embedding(raw);
}

void save(const shiftscope_embedding* set, const std::string& path) {
  if (shiftscope_embedding_has_labels(set) && path.ends_with(".npy")) {
    std::cerr << "warning: " << path << ": NPY keeps no labels; use .embv1 or .csv to keep them\n";
  }
  check(shiftscope_embedding_save(set, path.c_str()), path);
}

// Writes to `path`, or stdout when empty. Called only once everything
// succeeded, so a failed run never leaves a partial report behind.
void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{SHIFTSCOPE_IO_ERROR, "cannot open " + path + " for writing"};
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
  if (!out) throw Failure{SHIFTSCOPE_IO_ERROR, "write failed: " + path};
}

// "0-4,7" -> {0,1,2,3,4,7}
std::vector<int64_t> parse_class_list(const std::string& text) {
  std::set<int64_t> out;
  std::stringstream ss(text);
  std::string item;
  auto number = [&](std::string_view s) {
    int64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) {
      throw Failure{SHIFTSCOPE_CONFIG_ERROR, "bad class list '" + text + "'"};
    }
    return v;
  };
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const std::size_t dash = item.find('-', 1);
    if (dash == std::string::npos) {
      out.insert(number(item));
      continue;
    }
    const int64_t lo = number(std::string_view(item).substr(0, dash));
    const int64_t hi = number(std::string_view(item).substr(dash + 1));
    if (hi < lo) throw Failure{SHIFTSCOPE_CONFIG_ERROR, "bad class range '" + item + "'"};
    for (int64_t c = lo; c <= hi; ++c) out.insert(c);
  }
  return {out.begin(), out.end()};
}

struct MetricFlags {
  std::string metric = "local-energy";
  std::optional<size_t> k;
  bool all_local = false;
  std::optional<int> max_dim;
  std::optional<double> max_edge;
  std::optional<size_t> h1_cap;
  std::optional<size_t> slices;
};

void add_metric_options(CLI::App* app, MetricFlags& m) {
  app->add_option("--metric", m.metric, "energy, local-energy or swp")
      ->check(CLI::IsMember({"energy", "local-energy", "swp"}));
  app->add_option("--k", m.k, "Local energy neighborhood size (default 5)");
  app->add_flag("--all-local", m.all_local, "Restrict the within-set terms to kNN as well");
  app->add_option("--max-dim", m.max_dim, "Highest homology dimension for swp (0 or 1)");
  app->add_option("--max-edge", m.max_edge, "Rips threshold for swp; default enclosing radius");
  app->add_option("--h1-cap", m.h1_cap, "Points kept for the H1 computation (default 400)");
  app->add_option("--slices", m.slices, "Sliced Wasserstein directions (default 50)");
}

shiftscope_metric_options metric_options(const MetricFlags& m) {
  shiftscope_metric_options o;
  shiftscope_metric_options_init(&o);
  check(shiftscope_parse_metric(m.metric.c_str(), &o.metric), "--metric");
  if (m.k) o.k = *m.k;
  o.all_local = m.all_local ? 1 : 0;
  if (m.max_dim) o.max_dim = *m.max_dim;
  if (m.max_edge) {
    if (!(*m.max_edge > 0.0)) throw Failure{SHIFTSCOPE_CONFIG_ERROR, "--max-edge must be positive"};
    o.max_edge_length = *m.max_edge;
  }
  if (m.h1_cap) o.h1_point_cap = *m.h1_cap;
  if (m.slices) o.slices = *m.slices;
  return o;
}

// ---- detect ---------------------------------------------------------------

struct DetectFlags {
  std::string reference;
  std::string candidate;
  std::string test = "subsample";
  MetricFlags metric;
  InputOptions input;
  std::optional<size_t> subsample_size;
  std::optional<size_t> samples;
  std::optional<size_t> runs;
  std::optional<double> alpha;
  std::vector<double> grid;
  std::optional<size_t> criterion_k;
  std::optional<double> threshold;
  std::optional<size_t> samples_per_level;
  std::string aggregator = "median";
  bool full_curve = false;
  uint64_t seed = 0;
  size_t threads = 0;
  std::string out;
  std::string format = "json";
  std::string export_diagrams;
};

void export_diagrams(const DetectFlags& f, const shiftscope_embedding* x,
                     const shiftscope_embedding* y, const shiftscope_metric_options& m) {
  const std::pair<const char*, const shiftscope_embedding*> sides[] = {{"reference", x},
                                                                       {"candidate", y}};
  for (const auto& [name, set] : sides) {
    char* raw = nullptr;
    check(shiftscope_diagrams_csv(set, &m, f.seed, &raw), "diagram export");
    CString csv(raw);
    emit(csv.get(), f.export_diagrams + "." + name + ".csv");
  }
}

int run_detect(const DetectFlags& f) {
  const Embedding x = load(f.reference, f.input);
  const Embedding y = load(f.candidate, f.input);
  const shiftscope_metric_options metric = metric_options(f.metric);

  shiftscope_report* raw = nullptr;
  if (f.test == "subsample") {
    shiftscope_subsample_options o;
    shiftscope_subsample_options_init(&o);
    o.metric = metric;
    if (f.subsample_size) o.subsample_size = *f.subsample_size;
    if (f.samples) o.samples_per_run = *f.samples;
    if (f.runs) o.runs = *f.runs;
    if (f.alpha) o.alpha = *f.alpha;
    o.seed = f.seed;
    o.threads = f.threads;
    check(shiftscope_detect_subsample(x.get(), y.get(), &o, &raw), "subsample test");
  } else {
    shiftscope_perturb_options o;
    shiftscope_perturb_options_init(&o);
    o.metric = metric;
    if (!f.grid.empty()) {
      o.grid = f.grid.data();
      o.grid_size = f.grid.size();
    }
    if (f.criterion_k) o.criterion_k = *f.criterion_k;
    if (f.threshold) o.threshold = *f.threshold;
    if (f.samples_per_level) o.samples_per_level = *f.samples_per_level;
    o.use_mean = f.aggregator == "mean" ? 1 : 0;
    o.full_curve = f.full_curve ? 1 : 0;
    o.seed = f.seed;
    o.threads = f.threads;
    check(shiftscope_detect_perturbation(x.get(), y.get(), &o, &raw), "perturbation test");
  }
  const Report report(raw);
  for (size_t i = 0; i < shiftscope_report_warning_count(report.get()); ++i) {
    std::cerr << "warning: " << shiftscope_report_warning(report.get(), i) << '\n';
  }

  shiftscope_format format = SHIFTSCOPE_FORMAT_JSON;
  if (f.format == "table") format = SHIFTSCOPE_FORMAT_TABLE;
  if (f.format == "csv") format = SHIFTSCOPE_FORMAT_CSV;
  char* text_raw = nullptr;
  check(shiftscope_report_render(report.get(), format, &text_raw), "render");
  const CString text(text_raw);

  std::string body = text.get();
  if (format == SHIFTSCOPE_FORMAT_JSON) {
    // The library knows the test config; the inputs and preprocessing are
    // only known here.
    nlohmann::ordered_json doc = nlohmann::ordered_json::parse(body);
    doc["inputs"] = {{"reference", f.reference},
                     {"candidate", f.candidate},
                     {"label_column", f.input.label_column},
                     {"labels", f.input.labels},
                     {"normalize", !f.input.no_normalize}};
    body = doc.dump(2) + "\n";
  }
  if (!f.export_diagrams.empty()) export_diagrams(f, x.get(), y.get(), metric);
  emit(body, f.out);
  return shiftscope_report_decision(report.get()) == 1 ? kExitShift : kExitNoShift;
}

// ---- gen ------------------------------------------------------------------

struct GenFlags {
  std::string kind;
  std::string input;
  InputOptions input_options;
  size_t classes = 10;
  size_t per_class = 700;
  size_t dim = 128;
  double sep = 6.0;
  double fraction = 0.1;
  std::vector<double> fractions_a;
  std::vector<double> fractions_b;
  std::string classes_a;
  std::string classes_b;
  double concentration = 1.0;
  uint64_t seed = 0;
  std::string out;
  std::string reference_out;
  std::string candidate_out;
};

int run_gen(const GenFlags& f) {
  shiftscope_embedding* a = nullptr;
  shiftscope_embedding* b = nullptr;
  if (f.kind == "clusters") {
    if (f.out.empty()) throw Failure{SHIFTSCOPE_CONFIG_ERROR, "gen clusters needs --out"};
    check(shiftscope_gen_clusters(f.classes, f.per_class, f.dim, f.sep, f.seed, &a), "clusters");
    const Embedding set(a);
    save(set.get(), f.out);
    return kExitNoShift;
  }
  if (f.input.empty()) throw Failure{SHIFTSCOPE_CONFIG_ERROR, "gen " + f.kind + " needs --input"};
  if (f.reference_out.empty() || f.candidate_out.empty()) {
    throw Failure{SHIFTSCOPE_CONFIG_ERROR, "gen " + f.kind + " needs --reference-out and --candidate-out"};
  }
  // Generated pairs keep the raw coordinates; detect normalizes later.
  InputOptions raw = f.input_options;
  raw.no_normalize = true;
  const Embedding set = load(f.input, raw);
  if (!shiftscope_embedding_has_labels(set.get())) {
    throw Failure{SHIFTSCOPE_LABELS_REQUIRED, f.input + ": gen " + f.kind + " needs labels"};
  }
  if (f.kind == "subpop") {
    if (f.fractions_a.empty() && f.fractions_b.empty()) {
      check(shiftscope_gen_subpop(set.get(), f.fraction, f.seed, &a, &b), "subpop");
    } else {
      // Classes without an explicit fraction are kept whole.
      const auto classes = [&](std::vector<double> v, size_t n) {
        if (v.size() < n) v.resize(n, 1.0);
        return v;
      };
      const int64_t* labels = shiftscope_embedding_labels(set.get());
      const size_t rows = shiftscope_embedding_rows(set.get());
      size_t n = std::max(f.fractions_a.size(), f.fractions_b.size());
      for (size_t i = 0; i < rows; ++i) n = std::max(n, static_cast<size_t>(labels[i]) + 1);
      const std::vector<double> fa = classes(f.fractions_a, n);
      const std::vector<double> fb = classes(f.fractions_b, n);
      check(shiftscope_gen_subpop_mixture(set.get(), fa.data(), fa.size(), fb.data(), fb.size(),
                                          f.seed, &a, &b),
            "subpop");
    }
  } else if (f.kind == "domain") {
    const std::vector<int64_t> ca = parse_class_list(f.classes_a);
    const std::vector<int64_t> cb = parse_class_list(f.classes_b);
    check(shiftscope_gen_domain(set.get(), ca.data(), ca.size(), cb.data(), cb.size(), &a, &b),
          "domain");
  } else {
    check(shiftscope_gen_dirichlet(set.get(), f.concentration, f.seed, &a, &b), "dirichlet");
  }
  const Embedding ref(a);
  const Embedding cand(b);
  save(ref.get(), f.reference_out);
  save(cand.get(), f.candidate_out);
  return kExitNoShift;
}

// ---- ablate ---------------------------------------------------------------

struct AblateFlags {
  std::string input;
  InputOptions input_options;
  MetricFlags metric;
  std::vector<size_t> sample_sizes;
  std::vector<double> concentrations;
  std::optional<size_t> reps;
  std::optional<size_t> samples;
  std::optional<double> alpha;
  uint64_t seed = 0;
  size_t threads = 0;
  std::string out;
};

int run_ablate(const AblateFlags& f) {
  const Embedding set = load(f.input, f.input_options);
  shiftscope_ablation_options o;
  shiftscope_ablation_options_init(&o);
  o.metric = metric_options(f.metric);
  if (!f.sample_sizes.empty()) {
    o.sample_sizes = f.sample_sizes.data();
    o.sample_sizes_count = f.sample_sizes.size();
  }
  if (!f.concentrations.empty()) {
    o.concentrations = f.concentrations.data();
    o.concentrations_count = f.concentrations.size();
  }
  if (f.reps) o.reps = *f.reps;
  if (f.samples) o.samples_per_run = *f.samples;
  if (f.alpha) o.alpha = *f.alpha;
  o.seed = f.seed;
  o.threads = f.threads;
  char* raw = nullptr;
  check(shiftscope_ablate(set.get(), &o, &raw), "ablate");
  const CString csv(raw);
  emit(csv.get(), f.out);
  return kExitNoShift;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distribution shift detection between embedding sets"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "shiftscope 1.0.0");

  DetectFlags detect;
  CLI::App* cmd_detect = app.add_subcommand("detect", "Test whether candidate is shifted from reference");
  cmd_detect->add_option("reference", detect.reference, "Reference embeddings (npy, embv1, csv)")
      ->required();
  cmd_detect->add_option("candidate", detect.candidate, "Candidate embeddings")->required();
  cmd_detect->add_option("--test", detect.test, "subsample or perturbation")
      ->check(CLI::IsMember({"subsample", "perturbation"}));
  add_metric_options(cmd_detect, detect.metric);
  add_input_options(cmd_detect, detect.input);
  cmd_detect->add_option("--subsample-size", detect.subsample_size, "Rows per subsample (default 1000)");
  cmd_detect->add_option("--samples", detect.samples, "Distance samples per run (default 15)");
  cmd_detect->add_option("--runs", detect.runs, "Independent runs (default 20)");
  cmd_detect->add_option("--alpha", detect.alpha, "Significance level (default 0.05)");
  cmd_detect->add_option("--grid", detect.grid, "Comma-separated noise levels")->delimiter(',');
  cmd_detect->add_option("--criterion-k", detect.criterion_k, "kNN recall neighbors (default 10)");
  cmd_detect->add_option("--threshold", detect.threshold, "kNN recall threshold (default 0.80)");
  cmd_detect->add_option("--samples-per-level", detect.samples_per_level,
                         "Noise draws per level (default 3)");
  cmd_detect->add_option("--aggregator", detect.aggregator, "median or mean of the D* draws")
      ->check(CLI::IsMember({"median", "mean"}));
  cmd_detect->add_flag("--full-curve", detect.full_curve, "Evaluate every grid level");
  cmd_detect->add_option("--seed", detect.seed, "Random seed")->envname("SHIFTSCOPE_SEED");
  cmd_detect->add_option("--threads", detect.threads, "Worker threads (0 = all cores)");
  cmd_detect->add_option("--out", detect.out, "Report path (default stdout)");
  cmd_detect->add_option("--format", detect.format, "json, table or csv")
      ->check(CLI::IsMember({"json", "table", "csv"}));
  cmd_detect->add_option("--export-diagrams", detect.export_diagrams,
                         "Write persistence diagrams to PREFIX.{reference,candidate}.csv");

  GenFlags gen;
  CLI::App* cmd_gen = app.add_subcommand("gen", "Generate synthetic sets and shifted pairs");
  cmd_gen->add_option("kind", gen.kind, "clusters, subpop, domain or dirichlet")
      ->required()
      ->check(CLI::IsMember({"clusters", "subpop", "domain", "dirichlet"}));
  cmd_gen->add_option("--input", gen.input, "Labeled input for pair kinds");
  add_input_options(cmd_gen, gen.input_options);
  cmd_gen->add_option("--classes", gen.classes, "Number of clusters");
  cmd_gen->add_option("--per-class", gen.per_class, "Points per cluster");
  cmd_gen->add_option("--dim", gen.dim, "Dimension");
  cmd_gen->add_option("--sep", gen.sep, "Cluster center spread");
  cmd_gen->add_option("--fraction", gen.fraction, "Keep fraction for random label halves");
  cmd_gen->add_option("--fractions-a", gen.fractions_a, "Per-class keep fractions, reference")
      ->delimiter(',');
  cmd_gen->add_option("--fractions-b", gen.fractions_b, "Per-class keep fractions, candidate")
      ->delimiter(',');
  cmd_gen->add_option("--classes-a", gen.classes_a, "Reference classes, e.g. 0-4");
  cmd_gen->add_option("--classes-b", gen.classes_b, "Candidate classes, e.g. 5-9");
  cmd_gen->add_option("--concentration", gen.concentration, "Dirichlet concentration");
  cmd_gen->add_option("--seed", gen.seed, "Random seed")->envname("SHIFTSCOPE_SEED");
  cmd_gen->add_option("--out", gen.out, "Output path for clusters");
  cmd_gen->add_option("--reference-out", gen.reference_out, "Reference output for pair kinds");
  cmd_gen->add_option("--candidate-out", gen.candidate_out, "Candidate output for pair kinds");

  AblateFlags ablate;
  CLI::App* cmd_ablate = app.add_subcommand("ablate", "Label shift sweep over sample sizes");
  cmd_ablate->add_option("input", ablate.input, "Labeled embeddings")->required();
  add_input_options(cmd_ablate, ablate.input_options);
  add_metric_options(cmd_ablate, ablate.metric);
  cmd_ablate->add_option("--sample-sizes", ablate.sample_sizes, "Default 25,50,100")->delimiter(',');
  cmd_ablate->add_option("--concentrations", ablate.concentrations,
                         "Dirichlet concentrations, inf for no shift")
      ->delimiter(',');
  cmd_ablate->add_option("--reps", ablate.reps, "Repetitions per cell (default 100)");
  cmd_ablate->add_option("--samples", ablate.samples, "Distance samples per run (default 15)");
  cmd_ablate->add_option("--alpha", ablate.alpha, "Significance level (default 0.05)");
  cmd_ablate->add_option("--seed", ablate.seed, "Random seed")->envname("SHIFTSCOPE_SEED");
  cmd_ablate->add_option("--threads", ablate.threads, "Worker threads (0 = all cores)");
  cmd_ablate->add_option("--out", ablate.out, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (cmd_detect->parsed()) return run_detect(detect);
    if (cmd_gen->parsed()) return run_gen(gen);
    return run_ablate(ablate);
  } catch (const Failure& e) {
    std::cerr << "shiftscope: " << e.message << '\n';
    return exit_code_for(e.status);
  } catch (const std::exception& e) {
    std::cerr << "shiftscope: " << e.what() << '\n';
    return kExitError;
  }
}
