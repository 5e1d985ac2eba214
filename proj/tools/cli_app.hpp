#pragma once

// The qacor command-line application. `run` is kept separate from main() so
// tests can drive it in-process.
//
// Exit codes: 0 success, 1 selftest failure, 2 invalid input, 3 numerical
// failure, 4 logarithm did not converge.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qacor.hpp"
#include "qacor/selftest.hpp"

namespace qacor::cli {

enum ExitCode : int {
  kOk = 0,
  kSelftestFailed = 1,
  kValidation = 2,
  kNumerical = 3,
  kNoConvergence = 4,
};

struct RunConfig {
  double alpha = 1.0;
  double beta = 0.0;
  std::vector<double> p_values{-1.0, 0.0, 1.0, 2.0};
  int samples = 201;
  double t_min = -0.5;
  double t_max = 1.5;
  LogConfig log;
  std::string format;        // csv | json; empty selects the command's default
  std::string input_format;  // csv | json; empty infers from the file extension
  std::string output;        // empty writes to stdout

  MetricParams metric() const { return {alpha, beta}; }

  void validate() const {
    if (!(alpha > 0.0)) throw Error(Errc::InvalidMetricParams, "--alpha must be > 0");
    if (samples < 2) throw Error(Errc::OutOfDomain, "--samples must be >= 2");
    if (!(t_min < t_max)) throw Error(Errc::OutOfDomain, "--t-min must be < --t-max");
    if (log.max_iters < 1) throw Error(Errc::OutOfDomain, "--max-iters must be >= 1");
    if (!(log.horizontality_tol > 0.0))
      throw Error(Errc::OutOfDomain, "--tol-horizontality must be > 0");
    for (const auto* f : {&format, &input_format}) {
      if (!f->empty() && *f != "csv" && *f != "json")
        throw Error(Errc::OutOfDomain, "format must be csv or json, got '" + *f + "'");
    }
  }

  nlohmann::json to_json() const {
    return {{"alpha", alpha},
            {"beta", beta},
            {"p_values", p_values},
            {"samples", samples},
            {"t_min", t_min},
            {"t_max", t_max},
            {"max_iters", log.max_iters},
            {"tol_horizontality", log.horizontality_tol},
            {"roundtrip_tol", log.roundtrip_tol},
            {"fd_step", log.fd_step},
            {"format", format},
            {"input_format", input_format},
            {"output", output}};
  }

  // Keys mirror the long flag names with '-' replaced by '_'.
  void merge_file(const std::string& path) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(io::read_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::ParseError, path + ": " + e.what());
    }
    try {
      if (j.contains("alpha")) alpha = j.at("alpha").get<double>();
      if (j.contains("beta")) beta = j.at("beta").get<double>();
      if (j.contains("p_values")) p_values = j.at("p_values").get<std::vector<double>>();
      if (j.contains("samples")) samples = j.at("samples").get<int>();
      if (j.contains("t_min")) t_min = j.at("t_min").get<double>();
      if (j.contains("t_max")) t_max = j.at("t_max").get<double>();
      if (j.contains("max_iters")) log.max_iters = j.at("max_iters").get<int>();
      if (j.contains("tol_horizontality"))
        log.horizontality_tol = j.at("tol_horizontality").get<double>();
      if (j.contains("roundtrip_tol")) log.roundtrip_tol = j.at("roundtrip_tol").get<double>();
      if (j.contains("fd_step")) log.fd_step = j.at("fd_step").get<double>();
      if (j.contains("format")) format = j.at("format").get<std::string>();
      if (j.contains("input_format")) input_format = j.at("input_format").get<std::string>();
      if (j.contains("output")) output = j.at("output").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::ParseError, path + ": " + e.what());
    }
  }
};

namespace detail {

inline io::MatrixFormat input_format_for(const RunConfig& cfg, const std::string& path) {
  if (cfg.input_format == "json") return io::MatrixFormat::Json;
  if (cfg.input_format == "csv") return io::MatrixFormat::Csv;
  const bool json_ext = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  return json_ext ? io::MatrixFormat::Json : io::MatrixFormat::Csv;
}

inline Matrix read_one(const RunConfig& cfg, const std::string& path) {
  const auto ms = io::read_matrix_file(path, input_format_for(cfg, path));
  if (ms.size() != 1) {
    throw Error(Errc::ParseError,
                path + ": expected exactly one matrix, found " + std::to_string(ms.size()));
  }
  return ms.front();
}

// Re-tags validation failures with the operand they came from.
template <typename T>
T as(const Matrix& m, const std::string& what) {
  try {
    return T(m);
  } catch (const Error& e) {
    throw Error(e.code(), what + ": " + e.detail());
  }
}

inline void check_same_dim(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw Error(Errc::DimensionMismatch, "operands are " + qacor::detail::dims(a) + " and " +
                                             qacor::detail::dims(b));
  }
}

class Output {
 public:
  Output(const RunConfig& cfg, std::ostream& out) : cfg_(cfg), out_(out) {}

  void write(const std::string& text) const {
    if (cfg_.output.empty()) {
      out_ << text;
      out_.flush();
      return;
    }
    std::ofstream f(cfg_.output, std::ios::binary);
    if (!f) throw Error(Errc::ParseError, "cannot write '" + cfg_.output + "'");
    f << text;
  }

 private:
  const RunConfig& cfg_;
  std::ostream& out_;
};

inline std::string p_label(double p) { return "E(" + io::format_double(p) + ")xQA"; }

}  // namespace detail

inline int cmd_exp(const RunConfig& cfg, const std::string& c_path, const std::string& x_path,
                   std::ostream& out) {
  const Matrix cm = detail::read_one(cfg, c_path);
  const Matrix xm = detail::read_one(cfg, x_path);
  detail::check_same_dim(cm, xm);
  const auto c = detail::as<CorrMatrix>(cm, "base point");
  const auto x = detail::as<HollowSym>(xm, "tangent vector");
  const CorrMatrix result = qa_exp(c, x);

  const detail::Output sink(cfg, out);
  if (cfg.format == "csv") {
    sink.write(io::to_csv(result.mat()));
  } else {
    nlohmann::json j{{"command", "exp"}, {"config", cfg.to_json()}, {"result", io::to_json(result.mat())}};
    sink.write(j.dump(2) + "\n");
  }
  return kOk;
}

// Shared by `log` and `dist`; the report is written even without convergence.
inline int cmd_log_dist(const RunConfig& cfg, const std::string& command, const std::string& c1_path,
                        const std::string& c2_path, std::ostream& out, std::ostream& err) {
  const Matrix m1 = detail::read_one(cfg, c1_path);
  const Matrix m2 = detail::read_one(cfg, c2_path);
  detail::check_same_dim(m1, m2);
  const auto c1 = detail::as<CorrMatrix>(m1, "first point");
  const auto c2 = detail::as<CorrMatrix>(m2, "second point");
  const MetricParams params = cfg.metric();
  params.validate(c1.dim());

  const LogReport rep = qa_log_report(c1, c2, cfg.log);
  const double distance = qa_norm(c1, rep.log, params);

  const detail::Output sink(cfg, out);
  if (cfg.format == "csv") {
    sink.write(command == "dist" ? io::format_double(distance) + "\n" : io::to_csv(rep.log.mat()));
  } else {
    nlohmann::json j{{"command", command},
                     {"config", cfg.to_json()},
                     {"log", io::to_json(rep.log.mat())},
                     {"distance", distance},
                     {"converged", rep.converged},
                     {"iterations", rep.iterations},
                     {"restarts", rep.restarts},
                     {"horizontality_residual", rep.residual},
                     {"roundtrip_error", rep.roundtrip_error},
                     {"fiber_scale", std::vector<double>(rep.log_scale.data(),
                                                         rep.log_scale.data() + rep.log_scale.size())}};
    sink.write(j.dump(2) + "\n");
  }
  if (!rep.converged) {
    err << "error: logarithm did not converge after " << rep.iterations
        << " iterations (horizontality residual " << rep.residual << "); best iterate reported\n";
    return kNoConvergence;
  }
  return kOk;
}

struct CurveRow {
  double t;
  std::string kind;
  CurveSample stats;
};

inline int cmd_interpolate(const RunConfig& cfg, const std::string& s1_path,
                           const std::string& s2_path, std::ostream& out, std::ostream& err) {
  const Matrix m1 = detail::read_one(cfg, s1_path);
  const Matrix m2 = detail::read_one(cfg, s2_path);
  detail::check_same_dim(m1, m2);
  const auto s1 = detail::as<SpdMatrix>(m1, "first point");
  const auto s2 = detail::as<SpdMatrix>(m2, "second point");
  const std::vector<double> ts = linspace(cfg.t_min, cfg.t_max, cfg.samples);

  std::vector<CurveRow> rows;
  int status = kOk;
  auto emit = [&](const std::string& kind, auto&& curve) {
    int omitted = 0;
    std::string first_reason;
    for (double t : ts) {
      try {
        rows.push_back({t, kind, sample_statistics(t, curve(t))});
      } catch (const Error& e) {
        if (omitted++ == 0) first_reason = e.what();
      }
    }
    if (omitted > 0) {
      err << "warning: " << kind << ": omitted " << omitted << " of " << ts.size()
          << " rows (" << first_reason << ")\n";
    }
  };

  for (ComparisonKind k :
       {ComparisonKind::Euclidean, ComparisonKind::LogEuclidean, ComparisonKind::AffineInvariant}) {
    const ComparisonGeodesic g(s1, s2, k);
    emit(to_string(k), g);
  }
  for (double p : cfg.p_values) {
    try {
      const ProductGeodesic g(s1, s2, p, cfg.log);
      emit(detail::p_label(p), g);
    } catch (const NoConvergence& e) {
      err << "warning: " << detail::p_label(p) << ": omitted all rows (" << e.what() << ")\n";
      status = kNoConvergence;
    }
  }

  auto opt_str = [](const std::optional<double>& v) {
    return v ? io::format_double(*v) : std::string();
  };
  const detail::Output sink(cfg, out);
  if (cfg.format == "json") {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
      nlohmann::json row{{"t", r.t}, {"kind", r.kind}, {"det", r.stats.det}, {"trace", r.stats.trace}};
      row["rho"] = r.stats.rho ? nlohmann::json(*r.stats.rho) : nlohmann::json();
      if (r.stats.axes) {
        row["axis1_len"] = r.stats.axes->major;
        row["axis2_len"] = r.stats.axes->minor;
        row["axis_angle"] = r.stats.axes->angle;
      }
      arr.push_back(std::move(row));
    }
    nlohmann::json j{{"command", "interpolate"}, {"config", cfg.to_json()}, {"rows", arr}};
    sink.write(j.dump(2) + "\n");
  } else {
    std::string text = "t,kind,rho,det,trace,axis1_len,axis2_len,axis_angle\n";
    for (const auto& r : rows) {
      const auto& a = r.stats.axes;
      text += io::format_double(r.t) + "," + r.kind + "," + opt_str(r.stats.rho) + "," +
              io::format_double(r.stats.det) + "," + io::format_double(r.stats.trace) + "," +
              opt_str(a ? std::optional(a->major) : std::nullopt) + "," +
              opt_str(a ? std::optional(a->minor) : std::nullopt) + "," +
              opt_str(a ? std::optional(a->angle) : std::nullopt) + "\n";
    }
    sink.write(text);
  }
  return status;
}

inline int cmd_selftest(const selftest::Options& opt, std::ostream& out) {
  const auto results = selftest::run(opt);
  bool all = true;
  double total = 0.0;
  for (const auto& r : results) {
    all = all && r.passed;
    total += r.seconds;
    out << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << io::format_double(
                                                                   std::round(r.seconds * 1000) / 1000)
        << " s): " << r.detail << "\n";
  }
  out << (all ? "all suites passed" : "some suites FAILED") << " in "
      << io::format_double(std::round(total * 1000) / 1000) << " s\n";
  return all ? kOk : kSelftestFailed;
}

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quotient-affine geometry on full-rank correlation matrices"};
  app.require_subcommand(1);

  RunConfig flags;
  std::string config_path;
  std::string log_gradient = "analytic";
  app.add_option("--config", config_path, "JSON file with default settings");
  auto* o_alpha = app.add_option("--alpha", flags.alpha, "metric parameter alpha > 0");
  auto* o_beta = app.add_option("--beta", flags.beta, "metric parameter beta > -alpha/n");
  auto* o_p = app.add_option("--p", flags.p_values, "power-Euclidean exponent (repeatable)")
                  ->allow_extra_args(false);
  auto* o_samples = app.add_option("--samples", flags.samples, "number of curve samples");
  auto* o_tmin = app.add_option("--t-min", flags.t_min, "first curve parameter");
  auto* o_tmax = app.add_option("--t-max", flags.t_max, "last curve parameter");
  auto* o_iters = app.add_option("--max-iters", flags.log.max_iters, "optimizer iteration cap");
  auto* o_tol = app.add_option("--tol-horizontality", flags.log.horizontality_tol,
                               "horizontality certificate tolerance");
  auto* o_format = app.add_option("--format", flags.format, "output format")
                       ->check(CLI::IsMember({"csv", "json"}));
  auto* o_output = app.add_option("--output", flags.output, "output path (default stdout)");
  auto* o_input = app.add_option("--input-format", flags.input_format, "matrix file format")
                      ->check(CLI::IsMember({"csv", "json"}));
  auto* o_grad = app.add_option("--gradient", log_gradient, "fiber gradient: analytic or fd")
                     ->check(CLI::IsMember({"analytic", "fd"}));

  std::string a_path, b_path;
  auto* exp_cmd = app.add_subcommand("exp", "exponential map Exp_C(X)");
  exp_cmd->add_option("base", a_path, "correlation matrix file")->required();
  exp_cmd->add_option("tangent", b_path, "hollow symmetric matrix file")->required();
  auto* log_cmd = app.add_subcommand("log", "logarithm Log_{C1}(C2) with convergence report");
  log_cmd->add_option("from", a_path, "correlation matrix file")->required();
  log_cmd->add_option("to", b_path, "correlation matrix file")->required();
  auto* dist_cmd = app.add_subcommand("dist", "quotient-affine distance");
  dist_cmd->add_option("from", a_path, "correlation matrix file")->required();
  dist_cmd->add_option("to", b_path, "correlation matrix file")->required();
  auto* interp_cmd = app.add_subcommand("interpolate", "curve statistics along SPD geodesics");
  interp_cmd->add_option("from", a_path, "SPD matrix file")->required();
  interp_cmd->add_option("to", b_path, "SPD matrix file")->required();
  auto* self_cmd = app.add_subcommand("selftest", "run the invariant suites");
  selftest::Options st;
  std::string inject;
  self_cmd->add_option("--seed", st.seed, "random seed");
  self_cmd->add_option("--inject-failure", inject, "perturb the named suite (harness check)");
  for (auto* sc : {exp_cmd, log_cmd, dist_cmd, interp_cmd, self_cmd}) sc->fallthrough();

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg.merge_file(config_path);
    if (o_alpha->count()) cfg.alpha = flags.alpha;
    if (o_beta->count()) cfg.beta = flags.beta;
    if (o_p->count()) cfg.p_values = flags.p_values;
    if (o_samples->count()) cfg.samples = flags.samples;
    if (o_tmin->count()) cfg.t_min = flags.t_min;
    if (o_tmax->count()) cfg.t_max = flags.t_max;
    if (o_iters->count()) cfg.log.max_iters = flags.log.max_iters;
    if (o_tol->count()) cfg.log.horizontality_tol = flags.log.horizontality_tol;
    if (o_format->count()) cfg.format = flags.format;
    if (o_output->count()) cfg.output = flags.output;
    if (o_input->count()) cfg.input_format = flags.input_format;
    if (o_grad->count()) {
      cfg.log.gradient = log_gradient == "fd" ? GradientMode::FiniteDifference : GradientMode::Analytic;
    }
    cfg.validate();

    if (*exp_cmd) {
      if (cfg.format.empty()) cfg.format = "json";
      return cmd_exp(cfg, a_path, b_path, out);
    }
    if (*log_cmd || *dist_cmd) {
      if (cfg.format.empty()) cfg.format = "json";
      return cmd_log_dist(cfg, *log_cmd ? "log" : "dist", a_path, b_path, out, err);
    }
    if (*interp_cmd) {
      if (cfg.format.empty()) cfg.format = "csv";
      return cmd_interpolate(cfg, a_path, b_path, out, err);
    }
    if (!inject.empty()) st.inject_failure = inject;
    return cmd_selftest(st, out);
  } catch (const NoConvergence& e) {
    err << "error: " << e.what() << "\n";
    return kNoConvergence;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_validation_error(e.code()) ? kValidation : kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
}

}  // namespace qacor::cli
