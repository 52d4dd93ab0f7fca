#pragma once

// clusterlab command line: simulate | analyze | calculus | verify | demo.
//
// Exit status: 0 all checks passed, 1 some check failed, 2 bad usage or
// invalid input. Diagnostics go to the error stream.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clusterlab/clusterlab.hpp"

namespace clusterlab::cli {

namespace fs = std::filesystem;

enum class Format { json, csv, both };

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;

/// Parsed --config file. Every section is optional; sections a command
/// needs but the file lacks raise ConfigError.
struct RunConfig {
  std::optional<ProcessSpec> spec;
  EstimationConfig estimation;
  std::uint64_t simulate_length = 10000;
  bool simulate_summary = false;
  std::optional<std::string> calculus_input;
  std::optional<std::string> verify_input;
  std::optional<std::string> output_dir;
  std::optional<Format> format;
  fs::path base_dir;
};

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string output;
  std::string format;
};

namespace detail {

inline Format parse_format(const std::string& s, const std::string& where) {
  if (s == "json") return Format::json;
  if (s == "csv") return Format::csv;
  if (s == "both") return Format::both;
  clusterlab::detail::field_error(where, "expected json, csv or both");
}

inline json read_json_file(const fs::path& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, what + " '" + path.string() + "' cannot be opened");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, what + " '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

inline fs::path resolve(const RunConfig& rc, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || rc.base_dir.empty() ? path : rc.base_dir / path;
}

inline RunConfig parse_run_config(const json& j, fs::path base_dir) {
  if (!j.is_object()) clusterlab::detail::field_error("", "run config must be a JSON object");
  static const char* known[] = {"spec", "estimation", "simulate", "calculus_input", "verify_input", "output_dir", "format"};
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) clusterlab::detail::field_error(key, "unknown field");
  }
  RunConfig rc;
  rc.base_dir = std::move(base_dir);
  if (j.contains("spec")) rc.spec = spec_from_json(j.at("spec"), "spec");
  if (j.contains("estimation")) rc.estimation = estimation_from_json(j.at("estimation"), "estimation");
  if (j.contains("simulate")) {
    const json& s = j.at("simulate");
    if (!s.is_object()) clusterlab::detail::field_error("simulate", "expected an object");
    for (const auto& [key, value] : s.items()) {
      if (key != "length" && key != "summary") clusterlab::detail::field_error("simulate." + key, "unknown field");
    }
    if (s.contains("length")) rc.simulate_length = clusterlab::detail::uint_field(s, "length", "simulate");
    if (s.contains("summary")) {
      if (!s.at("summary").is_boolean()) clusterlab::detail::field_error("simulate.summary", "expected a boolean");
      rc.simulate_summary = s.at("summary").get<bool>();
    }
    if (rc.simulate_length < 1) clusterlab::detail::field_error("simulate.length", "must be >= 1");
  }
  auto opt_string = [&](const char* key, std::optional<std::string>& out) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_string()) clusterlab::detail::field_error(key, "expected a string");
    out = j.at(key).get<std::string>();
  };
  opt_string("calculus_input", rc.calculus_input);
  opt_string("verify_input", rc.verify_input);
  opt_string("output_dir", rc.output_dir);
  if (j.contains("format")) {
    if (!j.at("format").is_string()) clusterlab::detail::field_error("format", "expected a string");
    rc.format = parse_format(j.at("format").get<std::string>(), "format");
  }
  for (const auto& in : {rc.calculus_input, rc.verify_input}) {
    if (in && !fs::exists(resolve(rc, *in))) {
      clusterlab::detail::field_error(in == rc.calculus_input ? "calculus_input" : "verify_input",
                                      "file '" + *in + "' does not exist");
    }
  }
  return rc;
}

/// Where results go: a directory, or the output stream when none is set.
class Sink {
 public:
  Sink(std::optional<fs::path> dir, Format format, std::ostream& out)
      : dir_(std::move(dir)), format_(format), out_(out) {
    if (dir_) {
      std::error_code ec;
      fs::create_directories(*dir_, ec);
      if (ec || !fs::is_directory(*dir_)) {
        throw Error(ErrorCode::ConfigError, "output directory '" + dir_->string() + "' is not writable");
      }
    }
  }

  [[nodiscard]] bool want_json() const { return format_ != Format::csv; }
  [[nodiscard]] bool want_csv() const { return format_ != Format::json; }
  [[nodiscard]] bool to_directory() const { return dir_.has_value(); }

  void write(const std::string& name, const std::string& content) {
    if (!dir_) {
      out_ << content;
      return;
    }
    const fs::path path = *dir_ / name;
    std::ofstream f(path, std::ios::binary);
    f << content;
    if (!f) throw Error(ErrorCode::ConfigError, "cannot write '" + path.string() + "'");
  }

  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

 private:
  std::optional<fs::path> dir_;
  Format format_;
  std::ostream& out_;
};

inline std::string demo_table(const DemoResult& r) {
  std::size_t w_ex = 7;
  std::size_t w_check = 5;
  for (const auto& row : r.rows) {
    w_ex = std::max(w_ex, row.example.size());
    w_check = std::max(w_check, row.check.identity_name.size());
  }
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(w_ex)) << "example" << "  " << std::setw(static_cast<int>(w_check))
     << "check" << "  " << std::setw(24) << "residual" << "  " << std::setw(24) << "tolerance" << "  result\n";
  for (const auto& row : r.rows) {
    os << std::setw(static_cast<int>(w_ex)) << row.example << "  " << std::setw(static_cast<int>(w_check))
       << row.check.identity_name << "  " << std::setw(24) << format_double(row.check.residual) << "  "
       << std::setw(24) << format_double(row.check.tolerance) << "  " << (row.check.passed ? "PASS" : "FAIL") << "\n";
  }
  std::size_t failed = 0;
  for (const auto& row : r.rows) failed += row.check.passed ? 0 : 1;
  os << r.rows.size() - failed << "/" << r.rows.size() << " checks passed\n";
  return os.str();
}

inline json demo_json(const DemoResult& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json c = to_json(row.check);
    c["example"] = row.example;
    rows.push_back(std::move(c));
  }
  return {{"rows", rows}, {"operations", r.operations}, {"all_passed", r.all_passed()}};
}

inline std::string demo_csv(const DemoResult& r) {
  std::vector<CheckResult> checks;
  for (const auto& row : r.rows) {
    CheckResult c = row.check;
    c.context = row.example + (c.context.empty() ? "" : "; " + c.context);
    checks.push_back(std::move(c));
  }
  return checks_to_csv(checks);
}

inline json path_summary(const BinaryPath& p) {
  std::uint64_t runs = 0;
  std::uint64_t longest = 0;
  std::uint64_t len = 0;
  for (std::size_t t = 0; t <= p.length(); ++t) {
    if (t < p.length() && p.bits[t]) {
      ++len;
    } else if (len > 0) {
      ++runs;
      longest = std::max(longest, len);
      len = 0;
    }
  }
  const double ones = static_cast<double>(p.ones());
  return {{"model", to_json(p.model)},
          {"length", p.length()},
          {"ones", p.ones()},
          {"rate", ones / static_cast<double>(p.length())},
          {"stationary_rate", marginal_exceedance_rate(p.model)},
          {"runs", runs},
          {"mean_run_length", runs > 0 ? ones / static_cast<double>(runs) : 0.0},
          {"longest_run", longest}};
}

inline unsigned threads_from_env() {
  const char* env = std::getenv("CLUSTERLAB_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const unsigned long v = std::strtoul(env, &end, 10);
  if (*end != '\0') throw Error(ErrorCode::ConfigError, "CLUSTERLAB_THREADS must be a non-negative integer");
  return static_cast<unsigned>(v);
}

}  // namespace detail

/// Runs one command line. Returns the process exit status.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"clusterlab: cluster size laws of stationary binary processes"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  std::uint64_t seed_value = 0;
  unsigned threads_value = 0;
  app.add_option("--config", g.config, "run config (JSON)");
  auto* seed_opt = app.add_option("--seed", seed_value, "master seed");
  auto* threads_opt = app.add_option("--threads", threads_value, "worker threads (0: all cores)");
  app.add_option("--output", g.output, "output directory");
  app.add_option("--format", g.format, "json, csv or both")->check(CLI::IsMember({"json", "csv", "both"}));

  auto* simulate = app.add_subcommand("simulate", "simulate an indicator path from the config's spec");
  auto* analyze = app.add_subcommand("analyze", "estimate cluster laws and cross-check them");
  auto* calculus = app.add_subcommand("calculus", "exact report for a side-count pmf");
  std::string pmf_path;
  calculus->add_option("--pmf", pmf_path, "pmf JSON file");
  auto* verify = app.add_subcommand("verify", "invariance sweep on a window law");
  std::string law_path;
  std::size_t max_set_size = 2;
  double sigma = 4.0;
  verify->add_option("--law", law_path, "window law JSON file");
  verify->add_option("--max-set-size", max_set_size, "largest index set")->check(CLI::PositiveNumber);
  verify->add_option("--sigma", sigma, "tolerance in standard errors for empirical laws")->check(CLI::PositiveNumber);
  auto* demo = app.add_subcommand("demo", "run both worked examples end to end");
  std::uint64_t demo_samples = 1'000'000;
  demo->add_option("--samples", demo_samples, "conditional samples per estimate")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  if (*seed_opt) g.seed = seed_value;
  if (*threads_opt) g.threads = threads_value;

  try {
    RunConfig rc;
    if (!g.config.empty()) {
      const fs::path cfg_path(g.config);
      rc = detail::parse_run_config(detail::read_json_file(cfg_path, "config"), cfg_path.parent_path());
    }
    const unsigned threads = g.threads ? *g.threads : detail::threads_from_env();
    rc.estimation.threads = threads;
    if (g.seed) rc.estimation.master_seed = *g.seed;

    std::optional<fs::path> out_dir;
    if (!g.output.empty()) {
      out_dir = fs::path(g.output);
    } else if (rc.output_dir) {
      out_dir = detail::resolve(rc, *rc.output_dir);
    }
    const Format format = !g.format.empty() ? detail::parse_format(g.format, "--format")
                                            : rc.format.value_or(Format::json);
    auto need_spec = [&]() -> ProcessSpec {
      if (!rc.spec) throw Error(ErrorCode::ConfigError, "field 'spec': missing (pass --config with a spec section)");
      ProcessSpec s = *rc.spec;
      if (g.seed) s.seed = *g.seed;
      return s;
    };

    if (*simulate) {
      const ProcessSpec spec = need_spec();
      const BinaryPath path = simulate_path(spec, rc.simulate_length, spec.seed);
      detail::Sink sink(out_dir, format, out);
      if (rc.simulate_summary) {
        sink.write_json("summary.json", detail::path_summary(path));
      } else {
        sink.write("path.txt", path.to_text() + "\n");
      }
      return kExitOk;
    }

    if (*analyze) {
      const ProcessSpec spec = need_spec();
      const ConditionalSample sample = collect_conditional_samples(spec, rc.estimation);
      const ClusterReport rep = cross_check_from(sample, rc.estimation.tolerance_sigma);
      detail::Sink sink(out_dir, format, out);
      if (sink.want_json()) {
        json j = to_json(rep);
        j["spec"] = to_json(spec);
        j["estimation"] = to_json(rc.estimation);
        sink.write_json("report.json", j);
      }
      if (sink.want_csv()) {
        if (sink.to_directory()) {
          sink.write("side_pmf.csv", pmf_to_csv(rep.pmf_side, rep.side_stderr));
          sink.write("inspected_pmf.csv", pmf_to_csv(rep.pmf_inspected, rep.inspected_stderr));
          sink.write("typical_pmf.csv", pmf_to_csv(*rep.pmf_typical, rep.typical_stderr));
        }
        sink.write("checks.csv", checks_to_csv(rep.checks));
      }
      return rep.all_passed() ? kExitOk : kExitCheckFailed;
    }

    if (*calculus) {
      std::string in = pmf_path;
      if (in.empty() && rc.calculus_input) in = detail::resolve(rc, *rc.calculus_input).string();
      if (in.empty()) throw Error(ErrorCode::ConfigError, "calculus needs --pmf or calculus_input");
      const ExtendedPmf side = pmf_from_json(detail::read_json_file(in, "pmf"));
      const ClusterReport rep = moments_report(side);
      detail::Sink sink(out_dir, format, out);
      if (sink.want_json()) sink.write_json("report.json", to_json(rep));
      if (sink.want_csv()) {
        if (sink.to_directory()) {
          sink.write("side_pmf.csv", pmf_to_csv(rep.pmf_side, {}));
          sink.write("inspected_pmf.csv", pmf_to_csv(rep.pmf_inspected, {}));
          if (rep.pmf_typical) sink.write("typical_pmf.csv", pmf_to_csv(*rep.pmf_typical, {}));
        }
        sink.write("checks.csv", checks_to_csv(rep.checks));
      }
      return rep.all_passed() ? kExitOk : kExitCheckFailed;
    }

    if (*verify) {
      std::string in = law_path;
      if (in.empty() && rc.verify_input) in = detail::resolve(rc, *rc.verify_input).string();
      if (in.empty()) throw Error(ErrorCode::ConfigError, "verify needs --law or verify_input");
      const WindowLaw law = window_law_from_json(detail::read_json_file(in, "law"));
      const auto checks = sweep_invariance(law, max_set_size, {1e-12, sigma});
      bool ok = true;
      for (const auto& c : checks) ok = ok && c.passed;
      // The sweep is always written as CSV; json and both add verify.json.
      detail::Sink sink(out_dir, format, out);
      sink.write("verify.csv", checks_to_csv(checks));
      if (sink.want_json() && sink.to_directory()) {
        json arr = json::array();
        for (const auto& c : checks) arr.push_back(to_json(c));
        sink.write_json("verify.json", {{"checks", arr}, {"all_passed", ok}});
      }
      return ok ? kExitOk : kExitCheckFailed;
    }

    // demo
    DemoOptions opt;
    opt.seed = g.seed.value_or(42);
    opt.threads = threads;
    opt.samples = demo_samples;
    DemoResult r = run_demo(opt);
    r.operations.insert("run");
    out << detail::demo_table(r);
    if (out_dir) {
      detail::Sink sink(out_dir, format, out);
      if (sink.want_json()) sink.write_json("demo.json", detail::demo_json(r));
      if (sink.want_csv()) sink.write("demo.csv", detail::demo_csv(r));
    }
    return r.all_passed() ? kExitOk : kExitCheckFailed;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

}  // namespace clusterlab::cli
