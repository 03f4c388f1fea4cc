#include "shiftscope/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "shiftscope/error.hpp"

namespace shiftscope::report {

namespace {

using nlohmann::ordered_json;

ordered_json metric_json(const MetricConfig& m) {
  ordered_json j;
  j["name"] = to_string(m.kind);
  j["k"] = m.k;
  j["local_variant"] = m.variant == distances::LocalEnergyVariant::kCrossLocal ? "cross" : "all";
  j["max_dim"] = m.rips.max_dimension;
  if (m.rips.max_edge_length) {
    j["max_edge_length"] = *m.rips.max_edge_length;
  } else {
    j["max_edge_length"] = "auto";
  }
  j["h1_point_cap"] = m.rips.h1_point_cap;
  j["slices"] = m.slices;
  return j;
}

ordered_json seed_json(const RngSeed& s) { return ordered_json{{"seed", s.seed}, {"stream", s.stream}}; }

// JSON has no infinity; an infinite t statistic is written as a string.
ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

ordered_json to_json(const ShiftReport& r) {
  ordered_json j;
  j["test"] = "subsample";
  j["metric"] = to_string(r.config.metric.kind);
  j["decision"] = to_string(r.decision);
  j["fit_score"] = r.fit.score;
  j["yes_count"] = r.fit.yes;
  j["no_count"] = r.fit.no;
  j["p5_p"] = r.p5_p;
  j["p95_p"] = r.p95_p;
  j["d_xx_p5"] = r.d_xx_p5;
  j["d_xx_p95"] = r.d_xx_p95;
  j["d_xy_p5"] = r.d_xy_p5;
  j["d_xy_p95"] = r.d_xy_p95;
  j["elapsed_seconds"] = r.elapsed_seconds;
  j["mean_run_elapsed_seconds"] = r.mean_run_seconds;
  ordered_json runs = ordered_json::array();
  for (const RunResult& run : r.runs) {
    ordered_json o;
    o["decision"] = to_string(run.decision);
    o["p_value"] = run.test.p;
    o["t"] = number(run.test.t);
    o["df"] = number(run.test.df);
    o["mean_d_xx"] = run.test.mean_a;
    o["mean_d_xy"] = run.test.mean_b;
    o["d_xx"] = run.samples.d_xx;
    o["d_xy"] = run.samples.d_xy;
    o["elapsed_seconds"] = run.elapsed_seconds;
    runs.push_back(std::move(o));
  }
  j["runs"] = std::move(runs);
  ordered_json c;
  c["metric"] = metric_json(r.config.metric);
  c["subsample_size"] = r.config.subsample_size;
  c["samples_per_run"] = r.config.samples_per_run;
  c["runs"] = r.config.runs;
  c["alpha"] = r.config.alpha;
  c["seed"] = seed_json(r.config.seed);
  j["config"] = std::move(c);
  return j;
}

ordered_json to_json(const PerturbationReport& r) {
  ordered_json j;
  j["test"] = "perturbation";
  j["metric"] = to_string(r.metric.kind);
  j["decision"] = to_string(r.decision);
  j["p_star_level"] = r.p_star_level ? ordered_json(*r.p_star_level) : ordered_json(nullptr);
  j["p_star_index"] = r.p_star_index ? ordered_json(*r.p_star_index) : ordered_json(nullptr);
  ordered_json curve = ordered_json::array();
  for (const CriterionLevel& c : r.criteria_curve) {
    curve.push_back({{"level", c.level}, {"median", c.median}, {"values", c.values}});
  }
  j["criteria_curve"] = std::move(curve);
  j["d_star"] = r.d_star;
  j["d_star_samples"] = r.d_star_samples;
  j["d_xy"] = r.d_xy;
  j["elapsed_seconds"] = r.elapsed_seconds;
  j["warnings"] = r.warnings;
  ordered_json c;
  c["metric"] = metric_json(r.metric);
  c["grid"] = r.config.grid;
  c["criterion"] = "knn-recall";
  c["criterion_k"] = r.config.criterion_k;
  c["threshold"] = r.config.threshold;
  c["samples_per_level"] = r.config.samples_per_level;
  c["aggregator"] = to_string(r.config.aggregator);
  c["full_curve"] = r.config.full_curve;
  c["seed"] = seed_json(r.config.seed);
  j["config"] = std::move(c);
  return j;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string table(const std::vector<std::string>& header, const std::vector<std::string>& row) {
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::size_t w = std::max(header[i].size(), row[i].size()) + 2;
    out << header[i] << std::string(w - header[i].size(), ' ');
  }
  out << '\n';
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::size_t w = std::max(header[i].size(), row[i].size()) + 2;
    out << row[i] << std::string(w - row[i].size(), ' ');
  }
  out << '\n';
  return out.str();
}

std::string csv(const std::vector<std::string>& header, const std::vector<std::string>& row) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += '\n';
  for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
  out += '\n';
  return out;
}

std::string capitalized(Decision d) { return d == Decision::kYes ? "Yes" : "No"; }

}  // namespace

Format parse_format(std::string_view name) {
  if (name == "json") return Format::kJson;
  if (name == "table") return Format::kTable;
  if (name == "csv") return Format::kCsv;
  throw Error(ErrorCode::kConfig, "unknown format '" + std::string(name) + "'");
}

std::string render(const ShiftReport& r, Format format) {
  if (format == Format::kJson) return to_json(r).dump(2) + "\n";
  if (format == Format::kCsv) {
    return csv({"test", "metric", "decision", "fit_score", "yes_count", "no_count", "p5_p", "p95_p",
                "d_xx_p5", "d_xx_p95", "d_xy_p5", "d_xy_p95", "mean_run_elapsed_seconds",
                "elapsed_seconds"},
               {"subsample", to_string(r.config.metric.kind), to_string(r.decision),
                fixed(r.fit.score, 4), std::to_string(r.fit.yes), std::to_string(r.fit.no),
                fixed(r.p5_p, 6), fixed(r.p95_p, 6), fixed(r.d_xx_p5, 6), fixed(r.d_xx_p95, 6),
                fixed(r.d_xy_p5, 6), fixed(r.d_xy_p95, 6), fixed(r.mean_run_seconds, 3),
                fixed(r.elapsed_seconds, 3)});
  }
  return table({"Test", "Metric", "Metric Ranges D_xx : D_xy", "P-Val Range", "Fit Score",
                "Time/run (s)", "Shift Decision"},
               {"S", to_string(r.config.metric.kind),
                "[" + fixed(r.d_xx_p5) + " " + fixed(r.d_xx_p95) + "] : [" + fixed(r.d_xy_p5) +
                    " " + fixed(r.d_xy_p95) + "]",
                "[" + fixed(r.p5_p, 2) + " " + fixed(r.p95_p, 2) + "]",
                fixed(r.fit.score, 2) + " (" + std::to_string(r.fit.yes) + ":" +
                    std::to_string(r.fit.no) + ")",
                fixed(r.mean_run_seconds, 2), capitalized(r.decision)});
}

std::string render(const PerturbationReport& r, Format format) {
  if (format == Format::kJson) return to_json(r).dump(2) + "\n";
  const std::string level = r.p_star_level ? fixed(*r.p_star_level, 4) : "none";
  if (format == Format::kCsv) {
    return csv({"test", "metric", "decision", "p_star_level", "d_star", "d_xy", "elapsed_seconds"},
               {"perturbation", to_string(r.metric.kind), to_string(r.decision), level,
                fixed(r.d_star, 6), fixed(r.d_xy, 6), fixed(r.elapsed_seconds, 3)});
  }
  return table({"Test", "Metric", "Metric Ranges D* : D_XY", "p*", "Time (s)", "Shift Decision"},
               {"P", to_string(r.metric.kind),
                "[" + fixed(r.d_star) + "] : [" + fixed(r.d_xy) + "]", level,
                fixed(r.elapsed_seconds, 2), capitalized(r.decision)});
}

}  // namespace shiftscope::report
