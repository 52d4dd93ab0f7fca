#pragma once

// JSON and CSV encodings of the core types.
//
//   ExtendedPmf  {"offset": 0, "probs": [...], "infinity_mass": 0}
//   WindowLaw    {"u": 1, "v": 1, "entries": {"010": 1.0}, "source": "exact"}
//                source may also be {"type": "empirical", "samples": m,
//                "effective_samples": m_eff}
//   ProcessSpec  {"model": "urn", "g": 1, "y": 1, "r_balls": 1, "seed": 7}
//
// Infinite reals are written as the string "inf". Numbers use the shortest
// representation that round-trips.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <system_error>

#include <json.hpp>

#include "clusterlab/core_types.hpp"
#include "clusterlab/estimation.hpp"

namespace clusterlab {

using json = nlohmann::json;

/// Shortest round-trip decimal form; "inf" / "-inf" / "nan" otherwise.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline json real_to_json(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

namespace detail {

[[noreturn]] inline void field_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ConfigError, "field '" + path + "': " + what);
}

inline const json& require_field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) field_error(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) field_error(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

inline std::string join_path(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline double as_real(const json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string() && v.get<std::string>() == "inf") return kInfinity;
  field_error(path, "expected a number");
}

inline std::int64_t as_int(const json& v, const std::string& path) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 9.0e15) return static_cast<std::int64_t>(d);
  }
  field_error(path, "expected an integer");
}

inline std::uint64_t as_uint(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  const std::int64_t i = as_int(v, path);
  if (i < 0) field_error(path, "expected a non-negative integer");
  return static_cast<std::uint64_t>(i);
}

inline double real_field(const json& j, const std::string& key, const std::string& path) {
  return as_real(require_field(j, key, path), join_path(path, key));
}
inline std::int64_t int_field(const json& j, const std::string& key, const std::string& path) {
  return as_int(require_field(j, key, path), join_path(path, key));
}
inline std::uint64_t uint_field(const json& j, const std::string& key, const std::string& path) {
  return as_uint(require_field(j, key, path), join_path(path, key));
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline json to_json(const ExtendedPmf& p) {
  json probs = json::array();
  for (double x : p.probs) probs.push_back(x);
  return {{"offset", p.offset}, {"probs", probs}, {"infinity_mass", p.infinity_mass}};
}

/// Parses and validates (see validate_pmf).
inline ExtendedPmf pmf_from_json(const json& j, const std::string& path = "") {
  ExtendedPmf p;
  p.offset = static_cast<int>(detail::int_field(j, "offset", path));
  const json& probs = detail::require_field(j, "probs", path);
  if (!probs.is_array()) detail::field_error(detail::join_path(path, "probs"), "expected an array");
  for (std::size_t i = 0; i < probs.size(); ++i) {
    p.probs.push_back(detail::as_real(probs[i], detail::join_path(path, "probs[" + std::to_string(i) + "]")));
  }
  p.infinity_mass = j.contains("infinity_mass") ? detail::real_field(j, "infinity_mass", path) : 0.0;
  return validate_pmf(std::move(p));
}

inline json to_json(const WindowLaw& law) {
  json entries = json::object();
  for (const auto& [pattern, prob] : law.entries) entries[pattern_to_bits(pattern, law.width())] = prob;
  json source;
  if (law.is_exact()) {
    source = "exact";
  } else {
    source = {{"type", "empirical"},
              {"samples", law.source.samples},
              {"effective_samples", law.source.effective_samples}};
  }
  return {{"u", law.u}, {"v", law.v}, {"entries", entries}, {"source", source}};
}

inline WindowLaw window_law_from_json(const json& j, const std::string& path = "") {
  WindowLaw law;
  law.u = static_cast<int>(detail::int_field(j, "u", path));
  law.v = static_cast<int>(detail::int_field(j, "v", path));
  if (law.u < 0 || law.v < 0) detail::field_error(path, "u and v must be >= 0");
  const json& entries = detail::require_field(j, "entries", path);
  if (!entries.is_object()) detail::field_error(detail::join_path(path, "entries"), "expected an object");
  for (const auto& [bits, prob] : entries.items()) {
    const std::string where = detail::join_path(path, "entries." + bits);
    if (bits.size() != static_cast<std::size_t>(law.width())) {
      detail::field_error(where, "pattern length must be u+v+1 = " + std::to_string(law.width()));
    }
    law.entries[bits_to_pattern(bits)] += detail::as_real(prob, where);
  }
  if (j.contains("source")) {
    const json& src = j.at("source");
    if (src.is_string() && src.get<std::string>() == "exact") {
      law.source = LawSource::exact();
    } else if (src.is_object()) {
      const std::string sp = detail::join_path(path, "source");
      const std::uint64_t m = detail::uint_field(src, "samples", sp);
      const double m_eff = src.contains("effective_samples") ? detail::real_field(src, "effective_samples", sp)
                                                             : static_cast<double>(m);
      law.source = LawSource::empirical(m, m_eff);
    } else {
      detail::field_error(detail::join_path(path, "source"), "expected \"exact\" or an empirical object");
    }
  }
  return validate_window_law(std::move(law));
}

inline json to_json(const ProcessSpec& spec) {
  json j = {{"model", spec.model_name()}, {"seed", spec.seed}};
  if (const auto* mm = std::get_if<MovingMaximaParams>(&spec.params)) {
    j["r"] = mm->r;
    j["q"] = mm->q;
  } else if (const auto* urn = std::get_if<UrnParams>(&spec.params)) {
    j["g"] = urn->green;
    j["y"] = urn->yellow;
    j["r_balls"] = urn->red;
  } else {
    const auto& mk = std::get<MarkovParams>(spec.params);
    j["p01"] = mk.p01;
    j["p11"] = mk.p11;
  }
  return j;
}

inline ProcessSpec spec_from_json(const json& j, const std::string& path = "spec") {
  const json& model = detail::require_field(j, "model", path);
  if (!model.is_string()) detail::field_error(detail::join_path(path, "model"), "expected a string");
  const std::string name = model.get<std::string>();
  ProcessSpec spec;
  spec.seed = j.contains("seed") ? detail::uint_field(j, "seed", path) : 0;
  if (name == "moving_maxima") {
    spec.params = MovingMaximaParams{static_cast<int>(detail::int_field(j, "r", path)), detail::real_field(j, "q", path)};
  } else if (name == "urn") {
    spec.params = UrnParams{detail::uint_field(j, "g", path), detail::uint_field(j, "y", path),
                            detail::uint_field(j, "r_balls", path)};
  } else if (name == "markov_binary") {
    spec.params = MarkovParams{detail::real_field(j, "p01", path), detail::real_field(j, "p11", path)};
  } else {
    detail::field_error(detail::join_path(path, "model"),
                        "unknown model '" + name + "' (expected moving_maxima, urn or markov_binary)");
  }
  try {
    validate_spec(spec);
  } catch (const Error& e) {
    detail::field_error(path, e.what());
  }
  return spec;
}

inline json to_json(const EstimationConfig& cfg) {
  return {{"window_u", cfg.window_u},
          {"window_v", cfg.window_v},
          {"cluster_window", cfg.cluster_window},
          {"run_gap", cfg.run_gap},
          {"n_conditional_samples", cfg.n_conditional_samples},
          {"master_seed", cfg.master_seed},
          {"tolerance_sigma", cfg.tolerance_sigma}};
}

/// Missing fields keep their defaults.
inline EstimationConfig estimation_from_json(const json& j, const std::string& path = "estimation") {
  if (!j.is_object()) detail::field_error(path, "expected an object");
  EstimationConfig cfg;
  auto opt_int = [&](const char* key, int& out) {
    if (j.contains(key)) out = static_cast<int>(detail::int_field(j, key, path));
  };
  opt_int("window_u", cfg.window_u);
  opt_int("window_v", cfg.window_v);
  opt_int("cluster_window", cfg.cluster_window);
  opt_int("run_gap", cfg.run_gap);
  if (j.contains("n_conditional_samples")) cfg.n_conditional_samples = detail::uint_field(j, "n_conditional_samples", path);
  if (j.contains("master_seed")) cfg.master_seed = detail::uint_field(j, "master_seed", path);
  if (j.contains("tolerance_sigma")) cfg.tolerance_sigma = detail::real_field(j, "tolerance_sigma", path);
  for (const auto& [key, value] : j.items()) {
    static const char* known[] = {"window_u", "window_v", "cluster_window", "run_gap",
                                  "n_conditional_samples", "master_seed", "tolerance_sigma"};
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) detail::field_error(detail::join_path(path, key), "unknown field");
  }
  try {
    validate_config(cfg);
  } catch (const Error& e) {
    detail::field_error(path, e.what());
  }
  return cfg;
}

inline json to_json(const CheckResult& c) {
  return {{"identity_name", c.identity_name},
          {"residual", real_to_json(c.residual)},
          {"tolerance", real_to_json(c.tolerance)},
          {"passed", c.passed},
          {"context", c.context}};
}

inline json to_json(const ClusterReport& r) {
  json j;
  j["theta"] = r.theta ? real_to_json(*r.theta) : json(nullptr);
  j["e_typical"] = r.e_typical ? real_to_json(*r.e_typical) : json(nullptr);
  j["e_typical_second"] = r.e_typical_second ? real_to_json(*r.e_typical_second) : json(nullptr);
  j["e_inspected"] = real_to_json(r.e_inspected);
  j["e_side"] = real_to_json(r.e_side);
  j["pmf_side"] = to_json(r.pmf_side);
  j["pmf_inspected"] = to_json(r.pmf_inspected);
  j["pmf_typical"] = r.pmf_typical ? to_json(*r.pmf_typical) : json(nullptr);
  j["censored_fraction"] = r.censored_fraction;
  json res = json::object();
  for (const auto& [k, v] : r.residuals) res[k] = real_to_json(v);
  j["residuals"] = res;
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  j["checks"] = checks;
  if (r.samples > 0) {
    j["samples"] = r.samples;
    j["effective_samples"] = r.effective_samples;
  }
  j["notes"] = r.notes;
  j["all_passed"] = r.all_passed();
  return j;
}

/// identity_name,context,residual,tolerance,passed
inline std::string checks_to_csv(const std::vector<CheckResult>& checks) {
  auto quote = [](const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  };
  std::string out = "identity_name,context,residual,tolerance,passed\n";
  for (const auto& c : checks) {
    out += c.identity_name + "," + quote(c.context) + "," + format_double(c.residual) + "," +
           format_double(c.tolerance) + "," + (c.passed ? "true" : "false") + "\n";
  }
  return out;
}

/// k,prob,stderr
inline std::string pmf_to_csv(const ExtendedPmf& p, const std::vector<double>& stderrs) {
  std::string out = "k,prob,stderr\n";
  for (std::size_t i = 0; i < p.probs.size(); ++i) {
    const double se = i < stderrs.size() ? stderrs[i] : 0.0;
    out += std::to_string(p.offset + static_cast<long long>(i)) + "," + format_double(p.probs[i]) + "," +
           format_double(se) + "\n";
  }
  out += "inf," + format_double(p.infinity_mass) + ",0\n";
  return out;
}

}  // namespace clusterlab
