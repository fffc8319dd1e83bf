/*
 * Copyright 2026 The LOOD Toolkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "lood/cli/commands.h"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "lood/cli/json_io.h"
#include "lood/dataset.h"
#include "lood/error.h"
#include "lood/leakage.h"
#include "lood/metrics.h"
#include "lood/random.h"

namespace lood::cli {

namespace {

// Root-seed streams per component.
enum Stream : std::uint64_t {
  kOptimizerStream = 1,
  kMiaStream = 2,
  kCorrelateStream = 3,
  kGroupStream = 4,
};

struct Context {
  std::string name;
  Config config;
  std::uint64_t seed = 0;
  std::filesystem::path dir;
  std::vector<std::string> outputs;

  void Write(const std::string& file, const std::string& text) {
    WriteTextFile((dir / file).string(), text);
    outputs.push_back(file);
  }
  void WriteJson(const Json& body) { Write(name + ".json", DumpJson(body)); }
  void WriteCsv(const std::string& file, const std::vector<std::string>& header,
                const std::vector<std::vector<double>>& rows) {
    Write(file, FormatCsv(header, rows));
  }
};

using Handler = std::function<std::string(Context&)>;

std::string Fmt(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.6g", value);
  return buffer;
}

Matrix RowsToMatrix(const std::vector<std::vector<double>>& rows,
                    const std::string& key) {
  if (rows.empty()) return Matrix(0, 0);
  const std::size_t d = rows.front().size();
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d) {
      Fail(ErrorCode::kConfigError, "rows of '" + key + "' differ in length");
    }
    for (std::size_t j = 0; j < d; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

Vector ToVector(const std::vector<double>& values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v(i) = values[i];
  return v;
}

ToyGeneratorSpec ToySpecFromConfig(const Config& config,
                                   std::uint64_t root_seed) {
  ToyGeneratorSpec spec;
  spec.kind = config.GetString("toy.kind", spec.kind);
  spec.n = static_cast<int>(config.GetInt("toy.n", spec.n));
  spec.x_std = config.GetDouble("toy.x_std", spec.x_std);
  spec.noise_variance =
      config.GetDouble("data.noise_variance", spec.noise_variance);
  spec.seed = config.GetSeed("toy.seed", root_seed);
  if (spec.n < 1) Fail(ErrorCode::kConfigError, "toy.n must be >= 1");
  if (spec.kind != "sine") {
    Fail(ErrorCode::kConfigError, "unknown toy.kind '" + spec.kind + "'");
  }
  return spec;
}

Matrix QueriesFromConfig(const Config& config, const LeaveOneOutPair& pair) {
  const Json* points = config.Find("queries.points");
  if (points == nullptr ||
      (points->is_string() && points->get<std::string>() == "at-differing")) {
    return pair.differing_features;
  }
  if (points->is_string()) {
    Fail(ErrorCode::kConfigError,
         "queries.points must be \"at-differing\" or a list of rows");
  }
  Matrix q = RowsToMatrix(config.GetRows("queries.points"), "queries.points");
  if (q.cols() != pair.differing_features.cols()) {
    Fail(ErrorCode::kConfigError, "queries.points has the wrong dimension");
  }
  return q;
}

Json ReportJson(const LoodReport& report) {
  Json j;
  j["kl"] = report.kl;
  j["mean_distance"] = report.mean_distance;
  j["variance_ratio"] =
      report.variance_ratio ? Json(*report.variance_ratio) : Json(nullptr);
  j["query_count"] = report.query_count;
  j["variance_floored"] = report.variance_floored;
  return j;
}

Json PairJson(const KernelSpec& spec, const LeaveOneOutPair& pair) {
  Json j;
  j["kernel"] = KernelName(spec);
  j["n"] = pair.base.size();
  j["dim"] = pair.differing_features.cols();
  j["group_size"] = pair.group_size();
  j["noise_variance"] = pair.base.noise_variance;
  j["differing_features"] = ToJson(pair.differing_features);
  j["differing_labels"] = ToJson(pair.differing_labels);
  return j;
}

std::vector<double> Flatten(const Matrix& m) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  }
  return out;
}

std::vector<double> Linspace(double lo, double hi, int steps) {
  std::vector<double> xs;
  if (steps == 1) return {lo};
  for (int i = 0; i < steps; ++i) {
    xs.push_back(lo + (hi - lo) * i / (steps - 1));
  }
  return xs;
}

Json TraceJson(const OptTrace& trace) {
  Json j;
  j["converged"] = trace.converged;
  j["stop_reason"] = trace.stop_reason;
  j["iterations"] = static_cast<int>(trace.iterates.size()) - 1;
  j["final_query"] = ToJson(trace.final_query);
  j["final_value"] = trace.final_value;
  j["final_grad_norm"] =
      trace.iterates.empty() ? 0.0 : trace.iterates.back().grad_norm;
  return j;
}

std::vector<std::vector<double>> TraceRows(const OptTrace& trace) {
  std::vector<std::vector<double>> rows;
  for (const Iterate& it : trace.iterates) {
    std::vector<double> row = {static_cast<double>(it.iteration), it.value,
                               it.grad_norm};
    const auto q = Flatten(it.query);
    row.insert(row.end(), q.begin(), q.end());
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::string> TraceHeader(const Matrix& query) {
  std::vector<std::string> header = {"iteration", "value", "grad_norm"};
  for (Eigen::Index i = 0; i < query.rows(); ++i) {
    for (Eigen::Index j = 0; j < query.cols(); ++j) {
      header.push_back("q" + std::to_string(i) + "_" + std::to_string(j));
    }
  }
  return header;
}

// ---- subcommands ----

std::string RunScore(Context& ctx) {
  const KernelSpec spec = KernelFromConfig(ctx.config);
  const LeaveOneOutPair pair = PairFromConfig(ctx.config, ctx.seed);
  const Matrix queries = QueriesFromConfig(ctx.config, pair);
  const auto [post_d, post_dp] = LooPairPosteriors(spec, pair, queries);
  const LoodReport report = ReportFromPosteriors(post_d, post_dp);
  Json j = PairJson(spec, pair);
  j["queries"] = ToJson(queries);
  j["report"] = ReportJson(report);
  j["reverse_kl"] = ReverseKlLood(post_d, post_dp);
  j["mean_d"] = ToJson(post_d.mean);
  j["mean_dp"] = ToJson(post_dp.mean);
  j["covariance_d"] = ToJson(post_d.covariance);
  j["covariance_dp"] = ToJson(post_dp.covariance);
  ctx.WriteJson(j);
  return "kl=" + Fmt(report.kl) + " mean_distance=" + Fmt(report.mean_distance);
}

std::string RunOptimizeQuery(Context& ctx) {
  const KernelSpec spec = KernelFromConfig(ctx.config);
  const LeaveOneOutPair pair = PairFromConfig(ctx.config, ctx.seed);
  const OptConfig opt = OptConfigFromConfig(ctx.config, spec, ctx.seed);
  const std::string objective_name =
      ctx.config.GetString("optimizer.objective", "kl");
  Objective objective;
  if (objective_name == "kl") {
    objective = Objective::kKl;
  } else if (objective_name == "mean-distance") {
    objective = Objective::kMeanDistance;
  } else {
    Fail(ErrorCode::kConfigError,
         "optimizer.objective must be kl or mean-distance");
  }
  const int q = static_cast<int>(ctx.config.GetInt("optimizer.query_count", 1));
  const OptTrace trace = OptimizeQuery(spec, pair, objective, q, opt);
  Json j = PairJson(spec, pair);
  j["objective"] = objective_name;
  j["query_count"] = q;
  j["trace"] = TraceJson(trace);
  j["report"] = ReportJson(ComputeLoodReport(spec, pair, trace.final_query));
  j["report_at_differing"] =
      ReportJson(ComputeLoodReport(spec, pair, pair.differing_features));
  ctx.WriteJson(j);
  ctx.WriteCsv("trace.csv", TraceHeader(trace.final_query), TraceRows(trace));
  return std::string(trace.converged ? "converged" : "not converged") + " (" +
         trace.stop_reason + ") value=" + Fmt(trace.final_value);
}

std::string RunScanPerturbation(Context& ctx) {
  const KernelSpec spec = KernelFromConfig(ctx.config);
  const LeaveOneOutPair pair = PairFromConfig(ctx.config, ctx.seed);
  std::vector<double> dir = ctx.config.GetDoubles("scan.direction");
  if (dir.empty()) dir.assign(pair.differing_features.cols(), 1.0);
  const auto xs = Linspace(ctx.config.GetDouble("scan.x_min", -2.0),
                           ctx.config.GetDouble("scan.x_max", 2.0),
                           static_cast<int>(ctx.config.GetInt("scan.steps", 81)));
  const auto points = PerturbationScan(spec, pair, ToVector(dir), xs);
  std::vector<double> kls;
  std::vector<std::vector<double>> rows;
  for (const ScanPoint& p : points) {
    kls.push_back(p.kl);
    rows.push_back({p.x, p.kl, p.mean_distance});
  }
  const std::size_t best = ArgMax(kls);
  Json j = PairJson(spec, pair);
  j["direction"] = ToJson(ToVector(dir));
  j["argmax_x"] = points[best].x;
  j["max_kl"] = points[best].kl;
  ctx.WriteJson(j);
  ctx.WriteCsv("scan.csv", {"x", "kl", "mean_distance"}, rows);
  return "argmax x=" + Fmt(points[best].x) + " kl=" + Fmt(points[best].kl);
}

std::string RunVerifyStationarity(Context& ctx) {
  const KernelSpec spec = KernelFromConfig(ctx.config);
  const LeaveOneOutPair pair = PairFromConfig(ctx.config, ctx.seed);
  const double tol = ctx.config.GetDouble("stationarity.tol", 1e-5);
  // Central differences with step 1e-4 carry O(1e-4) truncation error.
  const double fd_tol = ctx.config.GetDouble("stationarity.fd_tol", 1e-3);
  const StationarityReport r = VerifyStationarity(spec, pair, tol, fd_tol);
  Json j = PairJson(spec, pair);
  j["passed"] = r.passed;
  j["tol"] = tol;
  j["fd_tol"] = fd_tol;
  j["analytic_norm"] = r.analytic_norm;
  j["fd_norm"] = r.fd_norm;
  j["tangential"] = r.tangential;
  j["regularity_passed"] = r.regularity.passed;
  j["max_diag_deviation"] = r.regularity.max_diag_deviation;
  j["max_self_grad_norm"] = r.regularity.max_self_grad_norm;
  j["note"] = r.note;
  ctx.WriteJson(j);
  return std::string(r.passed ? "pass" : "fail") +
         " analytic=" + Fmt(r.analytic_norm) + " fd=" + Fmt(r.fd_norm);
}

std::string RunFindNonstationaryS(Context& ctx) {
  const KernelSpec spec = KernelFromConfig(ctx.config);
  const LeaveOneOutPair pair = PairFromConfig(ctx.config, ctx.seed);
  const std::string label = ctx.config.GetString("nonstationary.label", "sine");
  if (label != "sine") {
    Fail(ErrorCode::kConfigError, "nonstationary.label must be sine");
  }
  const LabelFn label_fn = [](const Vector& s) { return std::sin(s(0)); };
  const OptConfig opt = OptConfigFromConfig(ctx.config, spec, ctx.seed);
  const NonstationaryResult r =
      FindNonstationaryS(spec, pair.base, label_fn, opt);
  Json j;
  j["kernel"] = KernelName(spec);
  j["n"] = pair.base.size();
  j["s_star"] = ToJson(r.s_star);
  j["grad_norm"] = r.grad_norm;
  Json restarts = Json::array();
  for (const OptTrace& t : r.traces) restarts.push_back(TraceJson(t));
  j["restarts"] = restarts;
  ctx.WriteJson(j);
  return "s_star=" + ToJson(r.s_star).dump() + " grad_norm=" + Fmt(r.grad_norm);
}

std::string RunHessianCheck(Context& ctx) {
  const KernelSpec spec = KernelFromConfig(ctx.config);
  const LeaveOneOutPair pair = PairFromConfig(ctx.config, ctx.seed);
  const HessianReport r = HessianCheck(spec, pair);
  Json j = PairJson(spec, pair);
  j["hessian"] = ToJson(r.hessian);
  j["eigenvalues"] = ToJson(r.eigenvalues);
  j["max_eigenvalue"] = r.max_eigenvalue;
  j["negative_definite"] = r.negative_definite;
  ctx.WriteJson(j);
  return "max_eigenvalue=" + Fmt(r.max_eigenvalue) +
         (r.negative_definite ? " (negative definite)" : " (not negative definite)");
}

std::string RunMiaAuc(Context& ctx) {
  const KernelSpec spec = KernelFromConfig(ctx.config);
  const LeaveOneOutPair pair = PairFromConfig(ctx.config, ctx.seed);
  const int n = static_cast<int>(ctx.config.GetInt("mia.n_samples", 5000));
  const auto [post_d, post_dp] =
      LooPairPosteriors(spec, pair, pair.differing_features);
  const MiaResult r =
      MiaAuc(post_d, post_dp, n, DeriveSeed(ctx.seed, kMiaStream));
  Json j = PairJson(spec, pair);
  j["auc"] = r.auc;
  j["n_samples"] = r.n_samples;
  j["kl"] = KlLood(post_d, post_dp);
  ctx.WriteJson(j);
  return "auc=" + Fmt(r.auc);
}

std::string RunCorrelate(Context& ctx) {
  const KernelSpec spec = KernelFromConfig(ctx.config);
  const LeaveOneOutPair pair = PairFromConfig(ctx.config, ctx.seed);
  Matrix features;
  Vector labels;
  if (ctx.config.Has("correlate.candidates_path")) {
    const Dataset c = LoadDataset(
        ctx.config.GetString("correlate.candidates_path", ""), 1.0);
    features = c.features;
    labels = c.labels;
  } else {
    features = RowsToMatrix(ctx.config.GetRows("correlate.features"),
                            "correlate.features");
    labels = ToVector(ctx.config.GetDoubles("correlate.labels"));
  }
  if (features.rows() == 0 || labels.size() != features.rows()) {
    Fail(ErrorCode::kConfigError,
         "correlate needs candidate features with one label each");
  }
  const int n = static_cast<int>(ctx.config.GetInt("correlate.n_samples", 5000));
  const CorrelationReport r = LoodAucCorrelation(
      spec, pair.base, features, labels, n,
      DeriveSeed(ctx.seed, kCorrelateStream));
  std::vector<std::vector<double>> rows;
  for (const CorrelationRow& row : r.rows) {
    rows.push_back({static_cast<double>(row.index), row.kl, row.log_kl, row.auc});
  }
  Json j;
  j["kernel"] = KernelName(spec);
  j["n"] = pair.base.size();
  j["candidates"] = features.rows();
  j["n_samples"] = n;
  j["pearson"] = r.pearson ? Json(*r.pearson) : Json(nullptr);
  j["spearman"] = r.spearman ? Json(*r.spearman) : Json(nullptr);
  j["top_k"] = r.top_k;
  j["top_k_overlap"] = r.top_k_overlap;
  ctx.WriteJson(j);
  ctx.WriteCsv("correlation.csv", {"index", "kl", "log_kl", "auc"}, rows);
  return "spearman=" + (r.spearman ? Fmt(*r.spearman) : std::string("n/a")) +
         " pearson=" + (r.pearson ? Fmt(*r.pearson) : std::string("n/a"));
}

std::string RunLowrankBound(Context& ctx) {
  const KernelSpec spec = KernelFromConfig(ctx.config);
  const LeaveOneOutPair pair = PairFromConfig(ctx.config, ctx.seed);
  Matrix grid;
  if (ctx.config.Has("lowrank.grid")) {
    grid = RowsToMatrix(ctx.config.GetRows("lowrank.grid"), "lowrank.grid");
  } else if (ctx.config.Has("lowrank.grid_steps")) {
    if (pair.differing_features.cols() != 1) {
      Fail(ErrorCode::kConfigError, "lowrank.grid_steps needs d = 1");
    }
    const auto xs =
        Linspace(ctx.config.GetDouble("lowrank.grid_min", -5.0),
                 ctx.config.GetDouble("lowrank.grid_max", 5.0),
                 static_cast<int>(ctx.config.GetInt("lowrank.grid_steps", 1001)));
    grid = Eigen::Map<const Vector>(xs.data(), xs.size());
  } else {
    grid = QueriesFromConfig(ctx.config, pair);
  }
  const LowRankReport r = LowRankAnalysis(spec, pair, grid);
  Json j = PairJson(spec, pair);
  j["alpha_min"] = r.alpha_min;
  j["h_alpha_min"] = r.h_alpha_min;
  j["zeta"] = r.zeta;
  j["a_n"] = r.a_n;
  j["b"] = r.b;
  j["bound"] = r.bound;
  j["observed_max_lood"] = r.observed_max_lood;
  j["observed_argmax"] = r.observed_argmax;
  j["holds"] = r.observed_max_lood <= r.bound;
  ctx.WriteJson(j);
  return "observed=" + Fmt(r.observed_max_lood) + " bound=" + Fmt(r.bound);
}

std::string RunActivationScan(Context& ctx) {
  const Config& c = ctx.config;
  NngpFcSpec tmpl;
  tmpl.activation = ParseActivation(c.GetString("scan.activation", "relu"));
  tmpl.bias_variance = c.GetDouble(
      "scan.bias_variance", tmpl.activation == Activation::kRelu ? 0.0 : 0.2);
  tmpl.normalize_inputs = c.GetBool("scan.normalize_inputs", false);
  const Json* wv = c.Find("scan.weight_variance");
  std::optional<EdgeOfChaos> eoc;
  if (wv == nullptr || (wv->is_string() && wv->get<std::string>() == "eoc")) {
    eoc = FindEdgeOfChaos(tmpl.activation, tmpl.bias_variance);
    tmpl.weight_variance = eoc->weight_variance;
  } else {
    tmpl.weight_variance = c.RequireDouble("scan.weight_variance");
  }
  std::vector<int> depths;
  for (double d : c.GetDoubles("scan.depths")) depths.push_back(static_cast<int>(d));
  if (depths.empty()) depths = {4, 8, 16, 32, 64};
  Vector x = ToVector(c.GetDoubles("scan.x"));
  Vector xp = ToVector(c.GetDoubles("scan.xp"));
  if (x.size() == 0 && xp.size() == 0) {
    // Equal-norm orthogonal pair on the fixed-point sphere of layer 0.
    const double q_star = eoc ? eoc->fixed_point : 1.0;
    const double r = std::sqrt(2.0 * std::max(q_star - tmpl.bias_variance, 0.0) /
                               tmpl.weight_variance);
    x = Vector::Zero(2);
    xp = Vector::Zero(2);
    x(0) = r;
    xp(1) = r;
  }
  ActivationScanOptions options;
  options.limit_tol = c.GetDouble("scan.limit_tol", options.limit_tol);
  const ActivationScanResult r = ActivationScan(tmpl, depths, x, xp, options);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < r.depths.size(); ++i) {
    rows.push_back({static_cast<double>(r.depths[i]), r.kernel_values[i],
                    r.distances[i]});
  }
  Json j;
  j["activation"] = ActivationName(r.activation);
  j["weight_variance"] = tmpl.weight_variance;
  j["bias_variance"] = tmpl.bias_variance;
  j["x"] = ToJson(x);
  j["xp"] = ToJson(xp);
  j["alpha"] = r.alpha;
  j["rate_hypothesis"] = r.rate_hypothesis;
  j["fitted_slope"] = r.fitted_slope;
  j["degenerate"] = r.degenerate;
  j["limit_depth"] = r.limit_depth;
  ctx.WriteJson(j);
  ctx.WriteCsv("activation_scan.csv", {"depth", "kernel", "distance"}, rows);
  return ActivationName(r.activation) + " slope=" + Fmt(r.fitted_slope) +
         " alpha=" + Fmt(r.alpha);
}

std::string RunGroupReconstruct(Context& ctx) {
  const KernelSpec spec = KernelFromConfig(ctx.config);
  const LeaveOneOutPair pair = PairFromConfig(ctx.config, ctx.seed);
  OptConfig opt = OptConfigFromConfig(ctx.config, spec, ctx.seed);
  if (!ctx.config.Has("optimizer.seed")) {
    opt.seed = DeriveSeed(ctx.seed, kGroupStream);
  }
  const int runs = static_cast<int>(ctx.config.GetInt("group.runs", 30));
  const ReconstructionTable t = GroupReconstructionStudy(
      spec, pair.base, pair.differing_features, pair.differing_labels, runs, opt);
  Json members = Json::array();
  int best = 0;
  for (const MemberRecovery& m : t.members) {
    Json row;
    row["index"] = m.index;
    row["kl_at_member"] = m.kl_at_member;
    row["recovered"] = m.recovered;
    row["frequency"] = m.frequency;
    members.push_back(row);
    if (m.recovered > t.members[best].recovered) best = m.index;
  }
  std::vector<std::vector<double>> rows;
  for (const RunOutcome& o : t.outcomes) {
    std::vector<double> row = {static_cast<double>(o.run),
                               o.converged ? 1.0 : 0.0,
                               static_cast<double>(o.nearest_member), o.distance};
    for (Eigen::Index i = 0; i < o.final_query.size(); ++i) {
      row.push_back(o.final_query(i));
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::string> header = {"run", "converged", "nearest_member",
                                     "distance"};
  for (Eigen::Index i = 0; i < pair.differing_features.cols(); ++i) {
    header.push_back("q" + std::to_string(i));
  }
  Json j = PairJson(spec, pair);
  j["runs"] = t.runs;
  j["non_converged"] = t.non_converged;
  j["members"] = members;
  ctx.WriteJson(j);
  ctx.WriteCsv("runs.csv", header, rows);
  return "most recovered member=" + std::to_string(best) +
         " non_converged=" + std::to_string(t.non_converged);
}

std::string RunGenToy(Context& ctx) {
  const ToyGeneratorSpec spec = ToySpecFromConfig(ctx.config, ctx.seed);
  const Dataset data = GenerateToy(spec);
  ctx.Write("dataset.csv", FormatDataset(data));
  Json j;
  j["kind"] = spec.kind;
  j["n"] = spec.n;
  j["x_std"] = spec.x_std;
  j["seed"] = spec.seed;
  ctx.WriteJson(j);
  return "wrote " + std::to_string(spec.n) + " rows";
}

const std::map<std::string, Handler>& Handlers() {
  static const std::map<std::string, Handler> handlers = {
      {"score", RunScore},
      {"optimize-query", RunOptimizeQuery},
      {"scan-perturbation", RunScanPerturbation},
      {"verify-stationarity", RunVerifyStationarity},
      {"find-nonstationary-s", RunFindNonstationaryS},
      {"hessian-check", RunHessianCheck},
      {"mia-auc", RunMiaAuc},
      {"correlate", RunCorrelate},
      {"lowrank-bound", RunLowrankBound},
      {"activation-scan", RunActivationScan},
      {"group-reconstruct", RunGroupReconstruct},
      {"gen-toy", RunGenToy},
  };
  return handlers;
}

int ExitCodeFor(ErrorCode code) {
  switch (CategoryOf(code)) {
    case ErrorCategory::kConfig: return kExitConfig;
    case ErrorCategory::kIo: return kExitIo;
    case ErrorCategory::kNumerical: return kExitNumerical;
  }
  return kExitNumerical;
}

std::string_view CategoryName(ErrorCode code) {
  switch (CategoryOf(code)) {
    case ErrorCategory::kConfig: return "config";
    case ErrorCategory::kIo: return "io";
    case ErrorCategory::kNumerical: return "numerical";
  }
  return "numerical";
}

int ReportError(std::ostream& err, const std::string& subcommand,
                std::string_view code, std::string_view category,
                const std::string& message, int exit_code) {
  Json j;
  j["error"]["code"] = code;
  j["error"]["category"] = category;
  j["error"]["subcommand"] = subcommand;
  j["error"]["message"] = message;
  j["error"]["exit_code"] = exit_code;
  err << j.dump() << "\n";
  return exit_code;
}

}  // namespace

const std::vector<std::string>& SubcommandNames() {
  static const std::vector<std::string> names = {
      "score",          "optimize-query",    "scan-perturbation",
      "verify-stationarity", "find-nonstationary-s", "hessian-check",
      "mia-auc",        "correlate",         "lowrank-bound",
      "activation-scan", "group-reconstruct", "gen-toy"};
  return names;
}

std::string UsageText() {
  std::string text =
      "usage: lood <subcommand> [--config FILE] [--set KEY=VALUE]... "
      "[--output-dir DIR] [--seed N]\n\nsubcommands:\n";
  for (const std::string& name : SubcommandNames()) text += "  " + name + "\n";
  return text;
}

KernelSpec KernelFromConfig(const Config& config) {
  const std::string type = config.GetString("kernel.type", "rbf");
  KernelSpec spec;
  if (type == "rbf") {
    spec = RbfSpec{config.GetDouble("kernel.length", 1.0)};
  } else if (type == "linear") {
    spec = LinearSpec{config.GetDouble("kernel.scale", 1.0)};
  } else if (type == "nngp") {
    NngpFcSpec nngp;
    nngp.depth = static_cast<int>(config.GetInt("kernel.depth", nngp.depth));
    nngp.activation = ParseActivation(
        config.GetString("kernel.activation", ActivationName(nngp.activation)));
    nngp.weight_variance =
        config.GetDouble("kernel.weight_variance", nngp.weight_variance);
    nngp.bias_variance =
        config.GetDouble("kernel.bias_variance", nngp.bias_variance);
    nngp.normalize_inputs =
        config.GetBool("kernel.normalize_inputs", nngp.normalize_inputs);
    nngp.force_quadrature =
        config.GetBool("kernel.force_quadrature", nngp.force_quadrature);
    spec = nngp;
  } else if (type == "exp-correlation") {
    spec = ExpCorrelation(config.GetDouble("kernel.temperature", 1.0));
  } else if (type == "poly-correlation") {
    spec = PolyCorrelation(static_cast<int>(config.GetInt("kernel.degree", 2)),
                           config.GetDouble("kernel.shift", 1.0));
  } else {
    Fail(ErrorCode::kConfigError, "unknown kernel.type '" + type + "'");
  }
  ValidateKernel(spec);
  return spec;
}

LeaveOneOutPair PairFromConfig(const Config& config, std::uint64_t root_seed) {
  const double noise = config.GetDouble("data.noise_variance", 0.01);
  const std::string source = config.GetString(
      "data.source", config.Has("data.path") ? "file" : "none");
  Dataset data;
  if (source == "file") {
    data = LoadDataset(config.GetString("data.path", ""), noise);
  } else if (source == "toy") {
    data = GenerateToy(ToySpecFromConfig(config, root_seed));
    data.noise_variance = noise;
  } else if (source != "none") {
    Fail(ErrorCode::kConfigError, "data.source must be file, toy or none");
  }

  LeaveOneOutPair pair;
  if (config.Has("differing.indices")) {
    if (data.size() == 0) {
      Fail(ErrorCode::kConfigError, "differing.indices needs a dataset");
    }
    std::vector<bool> moved(data.size(), false);
    std::vector<Eigen::Index> picked;
    for (double v : config.GetDoubles("differing.indices")) {
      const auto idx = static_cast<Eigen::Index>(v);
      if (v != std::floor(v) || idx < 0 || idx >= data.size() || moved[idx]) {
        Fail(ErrorCode::kConfigError,
             "differing.indices entry " + FormatDouble(v) +
                 " is out of range or repeated");
      }
      moved[idx] = true;
      picked.push_back(idx);
    }
    pair.differing_features.resize(picked.size(), data.dim());
    pair.differing_labels.resize(picked.size());
    for (std::size_t i = 0; i < picked.size(); ++i) {
      pair.differing_features.row(i) = data.features.row(picked[i]);
      pair.differing_labels(i) = data.labels(picked[i]);
    }
    Dataset rest;
    rest.noise_variance = noise;
    rest.features.resize(data.size() - picked.size(), data.dim());
    rest.labels.resize(rest.features.rows());
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      if (moved[i]) continue;
      rest.features.row(r) = data.features.row(i);
      rest.labels(r++) = data.labels(i);
    }
    pair.base = rest;
  } else {
    pair.differing_features = RowsToMatrix(
        config.GetRows("differing.features"), "differing.features");
    pair.differing_labels = ToVector(config.GetDoubles("differing.labels"));
    if (pair.differing_features.rows() == 0) {
      Fail(ErrorCode::kConfigError,
           "set differing.indices or differing.features");
    }
    if (pair.differing_labels.size() != pair.differing_features.rows()) {
      Fail(ErrorCode::kConfigError,
           "differing.labels needs one label per differing row");
    }
    if (data.size() == 0) {
      data.features.resize(0, pair.differing_features.cols());
      data.labels.resize(0);
    } else if (data.dim() != pair.differing_features.cols()) {
      Fail(ErrorCode::kConfigError,
           "differing.features dimension does not match the dataset");
    }
    data.noise_variance = noise;
    pair.base = data;
  }
  ValidatePair(pair);
  return pair;
}

OptConfig OptConfigFromConfig(const Config& config, const KernelSpec& spec,
                              std::uint64_t root_seed) {
  OptConfig opt;
  opt.max_iters =
      static_cast<int>(config.GetInt("optimizer.max_iters", opt.max_iters));
  opt.learning_rate = config.OptionalDouble("optimizer.learning_rate");
  opt.grad_tol = config.GetDouble("optimizer.grad_tol", opt.grad_tol);
  bool sphere = std::holds_alternative<CorrelationSpec>(spec);
  if (const auto* nngp = std::get_if<NngpFcSpec>(&spec)) {
    sphere = nngp->normalize_inputs;
  }
  opt.project_to_sphere = config.GetBool("optimizer.project_to_sphere", sphere);
  opt.seed = config.GetSeed("optimizer.seed",
                            DeriveSeed(root_seed, kOptimizerStream));
  opt.restarts = static_cast<int>(config.GetInt("optimizer.restarts", 1));

  const std::string init = config.GetString("optimizer.init", "uniform");
  if (init == "uniform") {
    opt.init = InitSpec::UniformBox(config.GetDouble("optimizer.init_lo", -1.0),
                                    config.GetDouble("optimizer.init_hi", 1.0));
  } else if (init == "given" || init == "gaussian") {
    const Matrix point = RowsToMatrix(config.GetRows("optimizer.init_point"),
                                      "optimizer.init_point");
    if (point.size() == 0) {
      Fail(ErrorCode::kConfigError, "optimizer.init_point is required");
    }
    opt.init = init == "given"
                   ? InitSpec::Given(point)
                   : InitSpec::GaussianAround(
                         point, config.GetDouble("optimizer.init_std", 1.0));
  } else {
    Fail(ErrorCode::kConfigError,
         "optimizer.init must be uniform, given or gaussian");
  }
  const auto lo = config.OptionalDouble("optimizer.box_lo");
  const auto hi = config.OptionalDouble("optimizer.box_hi");
  if (lo.has_value() != hi.has_value()) {
    Fail(ErrorCode::kConfigError, "set both optimizer.box_lo and box_hi");
  }
  if (lo) opt.box = std::make_pair(*lo, *hi);
  ValidateOptConfig(opt);
  return opt;
}

int RunSubcommand(const std::vector<std::string>& args, std::ostream& out,
                  std::ostream& err) {
  if (args.empty() || args[0] == "-h" || args[0] == "--help") {
    (args.empty() ? err : out) << UsageText();
    return args.empty() ? kExitConfig : kExitOk;
  }
  const std::string name = args[0];
  const auto handler = Handlers().find(name);
  if (handler == Handlers().end()) {
    err << "unknown subcommand '" << name << "'\n" << UsageText();
    return kExitConfig;
  }

  CLI::App app("lood " + name, "lood " + name);
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "experiment config file");
  app.add_option("--set", overrides, "KEY=VALUE override (repeatable)")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  app.add_option("--output-dir", output_dir, "directory for reports");
  app.add_option("--seed", seed, "root seed");
  try {
    std::vector<std::string> rest(args.rbegin(), args.rend() - 1);
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help() << UsageText();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return ReportError(err, name, "ConfigError", "config", e.what(),
                       kExitConfig);
  }

  try {
    Context ctx;
    ctx.name = name;
    if (!config_path.empty()) ctx.config = Config::Load(config_path);
    for (const std::string& o : overrides) ctx.config.Override(o);
    if (seed) ctx.config.Set("seed", Json(*seed));
    if (!output_dir.empty()) ctx.config.Set("output_dir", Json(output_dir));
    ctx.seed = ctx.config.GetSeed("seed", 0);
    ctx.dir = ctx.config.GetString("output_dir", "lood_out");
    std::error_code ec;
    std::filesystem::create_directories(ctx.dir, ec);
    if (ec) {
      Fail(ErrorCode::kIoError, "cannot create output directory '" +
                                    ctx.dir.string() + "': " + ec.message());
    }

    const std::string summary = handler->second(ctx);

    char hash[19];
    std::snprintf(hash, sizeof(hash), "%016" PRIx64, ctx.config.Hash());
    Json manifest;
    manifest["toolkit"] = "lood";
    manifest["version"] = kToolkitVersion;
    manifest["subcommand"] = name;
    manifest["seed"] = ctx.seed;
    manifest["config_hash"] = std::string(hash);
    Json config_json = Json::object();
    for (const auto& [key, value] : ctx.config.values()) config_json[key] = value;
    manifest["config"] = config_json;
    manifest["outputs"] = ctx.outputs;
    ctx.Write("manifest.json", DumpJson(manifest));

    out << name << ": " << summary << "\n";
    return kExitOk;
  } catch (const LoodError& e) {
    return ReportError(err, name, ErrorCodeName(e.code()),
                       CategoryName(e.code()), e.what(), ExitCodeFor(e.code()));
  } catch (const Json::exception& e) {
    return ReportError(err, name, "ConfigError", "config", e.what(),
                       kExitConfig);
  } catch (const std::exception& e) {
    return ReportError(err, name, "InternalError", "numerical", e.what(),
                       kExitNumerical);
  }
}

}  // namespace lood::cli
