// Exercises the shared library through its C header only.
#include <cmath>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "files.hpp"
#include "shiftscope/shiftscope.h"

namespace {

struct EmbeddingFree {
  void operator()(shiftscope_embedding* e) const { shiftscope_embedding_free(e); }
};
struct ReportFree {
  void operator()(shiftscope_report* r) const { shiftscope_report_free(r); }
};
using Embedding = std::unique_ptr<shiftscope_embedding, EmbeddingFree>;
using Report = std::unique_ptr<shiftscope_report, ReportFree>;

std::string take(char* s) {
  std::string out = s ? s : "";
  shiftscope_string_free(s);
  return out;
}

Embedding clusters(std::size_t per_class, std::uint64_t seed) {
  shiftscope_embedding* raw = nullptr;
  EXPECT_EQ(shiftscope_gen_clusters(10, per_class, 16, 6.0, seed, &raw), SHIFTSCOPE_OK);
  shiftscope_embedding* unit = nullptr;
  size_t zero = 0;
  EXPECT_EQ(shiftscope_embedding_normalize(raw, &unit, &zero), SHIFTSCOPE_OK);
  shiftscope_embedding_free(raw);
  return Embedding(unit);
}

}  // namespace

TEST(CApi, VersionAndStatusNames) {
  EXPECT_EQ(shiftscope_api_version(), SHIFTSCOPE_API_VERSION);
  EXPECT_STREQ(shiftscope_status_name(SHIFTSCOPE_OK), "OK");
  EXPECT_NE(std::strlen(shiftscope_status_name(SHIFTSCOPE_SAMPLE_TOO_LARGE)), 0u);
  EXPECT_NE(std::strlen(shiftscope_status_name(12345)), 0u);
}

TEST(CApi, OptionDefaults) {
  shiftscope_subsample_options s;
  shiftscope_subsample_options_init(&s);
  EXPECT_EQ(s.metric.metric, SHIFTSCOPE_METRIC_LOCAL_ENERGY);
  EXPECT_EQ(s.metric.k, 5u);
  EXPECT_EQ(s.subsample_size, 1000u);
  EXPECT_EQ(s.samples_per_run, 15u);
  EXPECT_EQ(s.runs, 20u);
  EXPECT_EQ(s.alpha, 0.05);
  shiftscope_perturb_options p;
  shiftscope_perturb_options_init(&p);
  EXPECT_EQ(p.grid, nullptr);
  EXPECT_EQ(p.criterion_k, 10u);
  EXPECT_EQ(p.threshold, 0.80);
  EXPECT_EQ(p.samples_per_level, 3u);

  shiftscope_metric m;
  EXPECT_EQ(shiftscope_parse_metric("swp", &m), SHIFTSCOPE_OK);
  EXPECT_EQ(m, SHIFTSCOPE_METRIC_SWP);
  EXPECT_EQ(shiftscope_parse_metric("hamming", &m), SHIFTSCOPE_CONFIG_ERROR);
  EXPECT_NE(std::string(shiftscope_last_error()).find("hamming"), std::string::npos);
}

TEST(CApi, NullArgumentsAreRejected) {
  shiftscope_embedding* out = nullptr;
  EXPECT_EQ(shiftscope_embedding_load(nullptr, nullptr, &out), SHIFTSCOPE_INVALID_ARGUMENT);
  EXPECT_EQ(shiftscope_gen_clusters(2, 2, 2, 1.0, 0, nullptr), SHIFTSCOPE_INVALID_ARGUMENT);
  EXPECT_EQ(shiftscope_report_decision(nullptr), -1);
  EXPECT_EQ(shiftscope_embedding_rows(nullptr), 0u);
  shiftscope_embedding_free(nullptr);
  shiftscope_report_free(nullptr);
  shiftscope_string_free(nullptr);
}

TEST(CApi, ArrayRoundTripThroughFiles) {
  const std::vector<double> data{1, 2, 3, 4, 5, 6};
  const std::vector<int64_t> labels{0, 1, 1};
  shiftscope_embedding* raw = nullptr;
  ASSERT_EQ(shiftscope_embedding_from_array(data.data(), 3, 2, labels.data(), &raw), SHIFTSCOPE_OK);
  Embedding set(raw);
  EXPECT_EQ(shiftscope_embedding_rows(set.get()), 3u);
  EXPECT_EQ(shiftscope_embedding_dim(set.get()), 2u);
  EXPECT_EQ(shiftscope_embedding_has_labels(set.get()), 1);

  testfs::TempDir dir;
  const std::string path = (dir / "s.embv1").string();
  ASSERT_EQ(shiftscope_embedding_save(set.get(), path.c_str()), SHIFTSCOPE_OK);
  shiftscope_embedding* back = nullptr;
  ASSERT_EQ(shiftscope_embedding_load(path.c_str(), nullptr, &back), SHIFTSCOPE_OK);
  Embedding loaded(back);
  EXPECT_EQ(std::memcmp(shiftscope_embedding_data(loaded.get()), data.data(), 6 * sizeof(double)), 0);
  EXPECT_EQ(shiftscope_embedding_labels(loaded.get())[2], 1);

  // NPY keeps only the matrix; labels come back through attach_labels.
  const std::string npy = (dir / "s.npy").string();
  ASSERT_EQ(shiftscope_embedding_save(set.get(), npy.c_str()), SHIFTSCOPE_OK);
  ASSERT_EQ(shiftscope_embedding_load(npy.c_str(), nullptr, &back), SHIFTSCOPE_OK);
  Embedding from_npy(back);
  EXPECT_EQ(shiftscope_embedding_has_labels(from_npy.get()), 0);
  EXPECT_EQ(shiftscope_embedding_labels(from_npy.get()), nullptr);
  testfs::write_bytes(dir / "l.npy", testfs::npy_vector("<i8", labels));
  EXPECT_EQ(shiftscope_embedding_attach_labels(from_npy.get(), (dir / "l.npy").c_str()),
            SHIFTSCOPE_OK);
  EXPECT_EQ(shiftscope_embedding_labels(from_npy.get())[1], 1);
  testfs::write_bytes(dir / "short.npy", testfs::npy_vector("<i8", std::vector<int64_t>{0, 1}));
  EXPECT_NE(shiftscope_embedding_attach_labels(from_npy.get(), (dir / "short.npy").c_str()),
            SHIFTSCOPE_OK);
}

TEST(CApi, LoadErrorsCarryStatusAndMessage) {
  testfs::TempDir dir;
  shiftscope_embedding* out = nullptr;
  const std::string missing = (dir / "none.npy").string();
  EXPECT_EQ(shiftscope_embedding_load(missing.c_str(), nullptr, &out), SHIFTSCOPE_IO_ERROR);
  EXPECT_EQ(out, nullptr);
  EXPECT_NE(std::string(shiftscope_last_error()).find("none.npy"), std::string::npos);

  const std::vector<int32_t> ints{1, 2, 3, 4};
  testfs::write_bytes(dir / "i.npy", testfs::npy_matrix("<i4", ints, 2, 2));
  EXPECT_EQ(shiftscope_embedding_load((dir / "i.npy").c_str(), nullptr, &out),
            SHIFTSCOPE_UNSUPPORTED_ARRAY);
  testfs::write_bytes(dir / "bad.csv", "a,b\n1,x\n");
  EXPECT_EQ(shiftscope_embedding_load((dir / "bad.csv").c_str(), nullptr, &out),
            SHIFTSCOPE_PARSE_ERROR);
  testfs::write_bytes(dir / "x.bin", "xx");
  EXPECT_EQ(shiftscope_embedding_load((dir / "x.bin").c_str(), nullptr, &out),
            SHIFTSCOPE_FORMAT_ERROR);
}

TEST(CApi, GeneratorsAndErrors) {
  Embedding set = clusters(20, 1);
  EXPECT_EQ(shiftscope_embedding_rows(set.get()), 200u);

  shiftscope_embedding* a = nullptr;
  shiftscope_embedding* b = nullptr;
  const int64_t lo[] = {0, 1, 2, 3, 4};
  const int64_t hi[] = {5, 6, 7, 8, 9};
  ASSERT_EQ(shiftscope_gen_domain(set.get(), lo, 5, hi, 5, &a, &b), SHIFTSCOPE_OK);
  Embedding ref(a), cand(b);
  EXPECT_EQ(shiftscope_embedding_rows(ref.get()), 100u);
  for (size_t i = 0; i < 100; ++i) EXPECT_GE(shiftscope_embedding_labels(cand.get())[i], 5);

  EXPECT_EQ(shiftscope_gen_domain(set.get(), lo, 5, lo, 5, &a, &b), SHIFTSCOPE_INVALID_SPLIT);
  ASSERT_EQ(shiftscope_gen_subpop(set.get(), 0.1, 3, &a, &b), SHIFTSCOPE_OK);
  Embedding sa(a), sb(b);
  // Halves of 10 per class; one group keeps 1 of 10.
  EXPECT_EQ(shiftscope_embedding_rows(sa.get()), 55u);
  ASSERT_EQ(shiftscope_gen_dirichlet(set.get(), 1.0, 3, &a, &b), SHIFTSCOPE_OK);
  Embedding da(a), db(b);
  EXPECT_EQ(shiftscope_embedding_rows(da.get()), 100u);
  EXPECT_LE(shiftscope_embedding_rows(db.get()), 100u);

  const std::vector<double> data{0, 0, 1, 1};
  shiftscope_embedding* raw = nullptr;
  ASSERT_EQ(shiftscope_embedding_from_array(data.data(), 2, 2, nullptr, &raw), SHIFTSCOPE_OK);
  Embedding unlabeled(raw);
  EXPECT_EQ(shiftscope_gen_subpop(unlabeled.get(), 0.1, 0, &a, &b), SHIFTSCOPE_LABELS_REQUIRED);
}

TEST(CApi, MetricsAndDiagrams) {
  Embedding x = clusters(10, 2);
  Embedding y = clusters(10, 3);
  shiftscope_metric_options m;
  shiftscope_metric_options_init(&m);
  m.metric = SHIFTSCOPE_METRIC_ENERGY;
  double self = -1.0;
  double cross = -1.0;
  ASSERT_EQ(shiftscope_metric_distance(x.get(), x.get(), &m, 0, &self), SHIFTSCOPE_OK);
  ASSERT_EQ(shiftscope_metric_distance(x.get(), y.get(), &m, 0, &cross), SHIFTSCOPE_OK);
  EXPECT_NEAR(self, 0.0, 1e-12);
  EXPECT_GT(cross, 0.0);

  m.metric = SHIFTSCOPE_METRIC_LOCAL_ENERGY;
  m.k = 1000;
  EXPECT_EQ(shiftscope_metric_distance(x.get(), y.get(), &m, 0, &cross), SHIFTSCOPE_K_TOO_LARGE);

  double recall = 0.0;
  ASSERT_EQ(shiftscope_knn_recall(x.get(), x.get(), 10, &recall), SHIFTSCOPE_OK);
  EXPECT_EQ(recall, 1.0);
  Embedding small = clusters(5, 3);
  EXPECT_EQ(shiftscope_knn_recall(x.get(), small.get(), 10, &recall),
            SHIFTSCOPE_INDEX_PAIRING_ERROR);

  shiftscope_metric_options_init(&m);
  char* csv = nullptr;
  ASSERT_EQ(shiftscope_diagrams_csv(x.get(), &m, 0, &csv), SHIFTSCOPE_OK);
  const std::string diagrams = take(csv);
  EXPECT_TRUE(diagrams.starts_with("dimension,birth,death\n"));
  EXPECT_NE(diagrams.find("\n0,0,INF\n"), std::string::npos);
}

TEST(CApi, SubsampleDetection) {
  Embedding set = clusters(20, 4);
  shiftscope_subsample_options o;
  shiftscope_subsample_options_init(&o);
  o.metric.metric = SHIFTSCOPE_METRIC_ENERGY;
  o.subsample_size = 40;
  o.samples_per_run = 6;
  o.runs = 5;
  o.seed = 9;

  shiftscope_report* raw = nullptr;
  ASSERT_EQ(shiftscope_detect_subsample(set.get(), set.get(), &o, &raw), SHIFTSCOPE_OK);
  Report same(raw);
  EXPECT_EQ(shiftscope_report_decision(same.get()), 0);

  shiftscope_embedding* a = nullptr;
  shiftscope_embedding* b = nullptr;
  const int64_t lo[] = {0, 1, 2, 3, 4};
  const int64_t hi[] = {5, 6, 7, 8, 9};
  ASSERT_EQ(shiftscope_gen_domain(set.get(), lo, 5, hi, 5, &a, &b), SHIFTSCOPE_OK);
  Embedding ref(a), cand(b);
  ASSERT_EQ(shiftscope_detect_subsample(ref.get(), cand.get(), &o, &raw), SHIFTSCOPE_OK);
  Report shifted(raw);
  EXPECT_EQ(shiftscope_report_decision(shifted.get()), 1);

  char* text = nullptr;
  ASSERT_EQ(shiftscope_report_render(shifted.get(), SHIFTSCOPE_FORMAT_JSON, &text), SHIFTSCOPE_OK);
  EXPECT_NE(take(text).find("\"decision\": \"yes\""), std::string::npos);
  ASSERT_EQ(shiftscope_report_render(shifted.get(), SHIFTSCOPE_FORMAT_TABLE, &text), SHIFTSCOPE_OK);
  EXPECT_NE(take(text).find("Yes"), std::string::npos);

  o.subsample_size = 60;
  raw = nullptr;
  EXPECT_EQ(shiftscope_detect_subsample(ref.get(), cand.get(), &o, &raw),
            SHIFTSCOPE_SAMPLE_TOO_LARGE);
  EXPECT_EQ(raw, nullptr);
  o.subsample_size = 40;
  o.alpha = 1.5;
  EXPECT_EQ(shiftscope_detect_subsample(ref.get(), cand.get(), &o, &raw), SHIFTSCOPE_CONFIG_ERROR);
}

TEST(CApi, PerturbationDetection) {
  Embedding set = clusters(20, 5);
  shiftscope_perturb_options o;
  shiftscope_perturb_options_init(&o);
  o.metric.metric = SHIFTSCOPE_METRIC_ENERGY;
  const double grid[] = {0.5, 1.0};
  o.grid = grid;
  o.grid_size = 2;
  o.threshold = 1.0;
  shiftscope_report* raw = nullptr;
  ASSERT_EQ(shiftscope_detect_perturbation(set.get(), set.get(), &o, &raw), SHIFTSCOPE_OK);
  Report r(raw);
  ASSERT_EQ(shiftscope_report_warning_count(r.get()), 1u);
  EXPECT_NE(shiftscope_report_warning(r.get(), 0), nullptr);
  EXPECT_EQ(shiftscope_report_warning(r.get(), 1), nullptr);

  const double bad[] = {0.5, 0.1};
  o.grid = bad;
  EXPECT_EQ(shiftscope_detect_perturbation(set.get(), set.get(), &o, &raw), SHIFTSCOPE_CONFIG_ERROR);
}

TEST(CApi, Ablation) {
  shiftscope_embedding* raw = nullptr;
  ASSERT_EQ(shiftscope_gen_clusters(10, 100, 16, 6.0, 1, &raw), SHIFTSCOPE_OK);
  Embedding set(raw);
  shiftscope_ablation_options o;
  shiftscope_ablation_options_init(&o);
  o.metric.metric = SHIFTSCOPE_METRIC_ENERGY;
  const size_t sizes[] = {10};
  const double conc[] = {INFINITY, 0.5};
  o.sample_sizes = sizes;
  o.sample_sizes_count = 1;
  o.concentrations = conc;
  o.concentrations_count = 2;
  o.reps = 3;
  o.samples_per_run = 4;
  char* csv = nullptr;
  ASSERT_EQ(shiftscope_ablate(set.get(), &o, &csv), SHIFTSCOPE_OK);
  const std::string text = take(csv);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  EXPECT_NE(text.find("\n10,inf,"), std::string::npos);
}
