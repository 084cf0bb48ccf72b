#pragma once

// Command-line front end: argument parsing into a RunConfig and the run
// driver behind each subcommand. Kept as a header so the tests can drive it
// in-process.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ergolab/ergolab.hpp"

namespace ergolab::cli {

using json = nlohmann::ordered_json;

enum class Subcommand { Sieve, Expsum, Average, SpectralCheck, Maximal, Report };

inline std::string to_string(Subcommand s) {
  switch (s) {
  case Subcommand::Sieve: return "sieve";
  case Subcommand::Expsum: return "expsum";
  case Subcommand::Average: return "average";
  case Subcommand::SpectralCheck: return "spectral-check";
  case Subcommand::Maximal: return "maximal";
  case Subcommand::Report: return "report";
  }
  return "?";
}

enum ExitCode : int { ok = 0, usage = 1, violation = 2, io_failure = 3 };

struct usage_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown by parse_args for --help; what() is the help text.
struct help_request : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tolerances in force; every report lists them.
inline constexpr double dual_path_tolerance = 1e-9;
inline constexpr double transform_tolerance = 1e-12;
inline constexpr double phase_path_tolerance = 1e-10;

struct RunConfig {
  Subcommand subcommand = Subcommand::Sieve;
  WeightKind weight = WeightKind::Mobius;
  std::string poly_p = "0,1";
  std::string poly_q = "0,1";
  std::uint64_t period = 64;   // J
  std::uint64_t limit = 1000;  // N, N_max, or sieve limit
  std::vector<std::uint64_t> n_list;
  double rho = 2.0;
  std::uint64_t grid = 4096;
  std::string grid_mode = "rational";
  std::uint64_t seed = 0;
  std::string out;             // empty: standard output
  unsigned workers = 0;        // 0: ERGO_LAB_THREADS or 1
  bool timing = false;

  // sieve
  bool sums = false;
  bool check_identity = false;
  // expsum
  std::string theta;           // "a/q" or a decimal in [0, 2 pi)
  std::uint64_t start = 0;
  std::uint64_t span = 0;
  // average and maximal
  std::string system = "cyclic:64";
  std::string f_spec = "pm1";
  std::string g_spec = "pm1";
  std::size_t starts = 8;
  // spectral-check
  std::size_t trials = 3;
  bool corrupt_d = false;
  // maximal
  std::string mode = "band";
  std::size_t bands = 4;
  std::size_t first = 0;
  double p_exp = 2.0;
  double q_exp = 2.0;
  // report
  std::vector<std::string> inputs;
};

namespace detail {

inline std::string number(double v) {
  if (!std::isfinite(v)) {
    return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return {buf, res.ptr};
}

inline std::string join(const std::vector<std::uint64_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    s += (i ? "," : "") + std::to_string(v[i]);
  }
  return s;
}

inline std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    s += (i ? "," : "") + v[i];
  }
  return s;
}

inline void write_json(std::ostream& os, const json& j, int depth) {
  const std::string pad(2 * static_cast<std::size_t>(depth), ' ');
  const std::string inner(2 * static_cast<std::size_t>(depth + 1), ' ');
  switch (j.type()) {
  case json::value_t::object: {
    if (j.empty()) {
      os << "{}";
      return;
    }
    os << "{\n";
    bool first = true;
    for (const auto& [k, v] : j.items()) {
      os << (first ? "" : ",\n") << inner << json(k).dump() << ": ";
      write_json(os, v, depth + 1);
      first = false;
    }
    os << "\n" << pad << "}";
    return;
  }
  case json::value_t::array: {
    const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
    if (j.empty() || flat) {
      os << "[";
      for (std::size_t i = 0; i < j.size(); ++i) {
        os << (i ? ", " : "");
        write_json(os, j[i], depth + 1);
      }
      os << "]";
      return;
    }
    os << "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      os << (i ? ",\n" : "") << inner;
      write_json(os, j[i], depth + 1);
    }
    os << "\n" << pad << "]";
    return;
  }
  case json::value_t::number_float: {
    const double v = j.get<double>();
    os << (std::isfinite(v) ? number(v) : "null");
    return;
  }
  default:
    os << j.dump();
  }
}

} // namespace detail

// JSON text with every float printed to 17 significant digits.
inline std::string to_json_text(const json& j) {
  std::ostringstream os;
  detail::write_json(os, j, 0);
  os << "\n";
  return os.str();
}

// Effective configuration as ordered key/value pairs. Output path, worker
// count and the timing switch are left out: they do not change results.
inline std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c) {
  std::vector<std::pair<std::string, std::string>> e;
  e.emplace_back("subcommand", to_string(c.subcommand));
  const auto weight = std::string(to_string(c.weight));
  switch (c.subcommand) {
  case Subcommand::Sieve:
    e.emplace_back("weight", weight);
    e.emplace_back("limit", std::to_string(c.limit));
    e.emplace_back("sums", c.sums ? "true" : "false");
    e.emplace_back("check-identity", c.check_identity ? "true" : "false");
    break;
  case Subcommand::Expsum:
    e.emplace_back("weight", weight);
    e.emplace_back("poly", c.poly_p);
    e.emplace_back("limit", std::to_string(c.limit));
    e.emplace_back("grid", std::to_string(c.grid));
    e.emplace_back("grid-mode", c.grid_mode);
    e.emplace_back("theta", c.theta);
    e.emplace_back("n-list", detail::join(c.n_list));
    e.emplace_back("start", std::to_string(c.start));
    e.emplace_back("span", std::to_string(c.span));
    break;
  case Subcommand::Average:
    e.emplace_back("weight", weight);
    e.emplace_back("poly-p", c.poly_p);
    e.emplace_back("poly-q", c.poly_q);
    e.emplace_back("system", c.system);
    e.emplace_back("f", c.f_spec);
    e.emplace_back("g", c.g_spec);
    e.emplace_back("rho", detail::number(c.rho));
    e.emplace_back("limit", std::to_string(c.limit));
    e.emplace_back("starts", std::to_string(c.starts));
    e.emplace_back("seed", std::to_string(c.seed));
    break;
  case Subcommand::SpectralCheck:
    e.emplace_back("weight", weight);
    e.emplace_back("poly-p", c.poly_p);
    e.emplace_back("poly-q", c.poly_q);
    e.emplace_back("j", std::to_string(c.period));
    e.emplace_back("n", std::to_string(c.limit));
    e.emplace_back("seed", std::to_string(c.seed));
    e.emplace_back("trials", std::to_string(c.trials));
    if (c.corrupt_d) {
      e.emplace_back("corrupt-d", "true");
    }
    break;
  case Subcommand::Maximal:
    e.emplace_back("mode", c.mode);
    e.emplace_back("weight", weight);
    e.emplace_back("poly-p", c.poly_p);
    e.emplace_back("poly-q", c.poly_q);
    e.emplace_back("j", std::to_string(c.period));
    e.emplace_back("f", c.f_spec);
    e.emplace_back("g", c.g_spec);
    e.emplace_back("seed", std::to_string(c.seed));
    e.emplace_back("rho", detail::number(c.rho));
    e.emplace_back("bands", std::to_string(c.bands));
    e.emplace_back("first", std::to_string(c.first));
    e.emplace_back("limit", std::to_string(c.limit));
    e.emplace_back("p", detail::number(c.p_exp));
    e.emplace_back("q", detail::number(c.q_exp));
    break;
  case Subcommand::Report:
    e.emplace_back("inputs", detail::join(c.inputs));
    break;
  }
  return e;
}

namespace detail {

inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw usage_error("--config: cannot read " + path);
  }
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty() || line[0] == '#') {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw usage_error("--config: line " + std::to_string(lineno) + " of " + path + " is not key=value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

inline bool has_flag(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

} // namespace detail

// Parses arguments (without the program name). Throws usage_error naming
// the offending flag, or help_request.
inline RunConfig parse_args(std::vector<std::string> args) {
  // Config file entries become flags unless the command line sets them.
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      continue;
    }
    std::vector<std::string> extra;
    for (const auto& [key, value] : detail::read_config_file(path)) {
      if (key.empty() || detail::has_flag(args, key)) {
        continue;
      }
      if (value == "true") {
        extra.push_back("--" + key);
      } else if (value != "false") {
        extra.push_back("--" + key);
        extra.push_back(value);
      }
    }
    args.insert(args.end(), extra.begin(), extra.end());
    break;
  }

  RunConfig c;
  CLI::App app{"ergolab: weighted polynomial averages on finite cyclic models", "ergolab"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "key=value file; command-line flags take precedence");
  app.add_option("--workers", c.workers, "worker threads (ERGO_LAB_THREADS overrides)");
  app.add_flag("--timing", c.timing, "embed wall-clock time in the report");

  std::string weight_name = "mobius";
  const auto add_weight = [&](CLI::App* s) {
    s->add_option("--weight", weight_name, "mobius or liouville")
        ->transform(CLI::IsMember({"mobius", "liouville"}, CLI::ignore_case));
  };
  const auto add_polys = [&](CLI::App* s, bool with_q) {
    s->add_option("--poly-p,--poly", c.poly_p, "P as comma-separated coefficients, constant first");
    if (with_q) {
      s->add_option("--poly-q", c.poly_q, "Q as comma-separated coefficients, constant first");
    }
  };
  const auto add_common = [&](CLI::App* s) {
    s->add_option("--out", c.out, "output file (default: standard output)");
    s->add_option("--seed", c.seed, "generator seed");
  };

  auto* sieve_cmd = app.add_subcommand("sieve", "tabulate a weight");
  add_weight(sieve_cmd);
  add_common(sieve_cmd);
  sieve_cmd->add_option("--limit", c.limit, "largest n")->check(CLI::PositiveNumber);
  sieve_cmd->add_flag("--sums", c.sums, "add the running sums column");
  sieve_cmd->add_flag("--check-identity", c.check_identity, "verify lambda(n) = sum_{d^2 | n} mu(n/d^2)");

  auto* expsum_cmd = app.add_subcommand("expsum", "weighted polynomial exponential sums");
  add_weight(expsum_cmd);
  add_polys(expsum_cmd, false);
  add_common(expsum_cmd);
  expsum_cmd->add_option("--limit", c.limit, "N")->check(CLI::PositiveNumber);
  expsum_cmd->add_option("--grid", c.grid, "grid size Q")->check(CLI::PositiveNumber);
  expsum_cmd->add_option("--grid-mode", c.grid_mode, "rational or uniform")
      ->check(CLI::IsMember({"rational", "uniform"}));
  auto* theta_opt = expsum_cmd->add_option("--theta", c.theta, "frequency: a/q or radians");
  auto* nlist_opt =
      expsum_cmd->add_option("--n-list", c.n_list, "decay profile lengths")->delimiter(',');
  auto* start_opt = expsum_cmd->add_option("--start", c.start, "short interval start N");
  auto* span_opt = expsum_cmd->add_option("--span", c.span, "short interval length M");
  nlist_opt->excludes(theta_opt)->excludes(start_opt)->excludes(span_opt);
  start_opt->needs(span_opt);
  span_opt->needs(start_opt);

  auto* average_cmd = app.add_subcommand("average", "convergence traces of bilinear averages");
  add_weight(average_cmd);
  add_polys(average_cmd, true);
  add_common(average_cmd);
  average_cmd->add_option("--system", c.system, "cyclic:J or rotation:p/q");
  average_cmd->add_option("--f", c.f_spec, "observable f");
  average_cmd->add_option("--g", c.g_spec, "observable g");
  average_cmd->add_option("--rho", c.rho, "ladder ratio");
  average_cmd->add_option("--limit", c.limit, "largest N")->check(CLI::PositiveNumber);
  average_cmd->add_option("--starts", c.starts, "number of start points")->check(CLI::PositiveNumber);

  auto* spectral_cmd = app.add_subcommand("spectral-check", "dual-path check of the spectral identities");
  add_weight(spectral_cmd);
  add_polys(spectral_cmd, true);
  add_common(spectral_cmd);
  spectral_cmd->add_option("--j", c.period, "period J")->check(CLI::PositiveNumber);
  spectral_cmd->add_option("--n", c.limit, "N")->check(CLI::PositiveNumber);
  spectral_cmd->add_option("--trials", c.trials, "random signal pairs")->check(CLI::PositiveNumber);
  spectral_cmd->add_flag("--corrupt-d", c.corrupt_d, "perturb one D entry (fault injection)")
      ->group("");

  auto* maximal_cmd = app.add_subcommand("maximal", "maximal, oscillation and weak-type statistics");
  add_weight(maximal_cmd);
  add_polys(maximal_cmd, true);
  add_common(maximal_cmd);
  maximal_cmd->add_option("--mode", c.mode, "band, global, weaktype or oscillation")
      ->check(CLI::IsMember({"band", "global", "weaktype", "oscillation"}));
  maximal_cmd->add_option("--j", c.period, "period J")->check(CLI::PositiveNumber);
  maximal_cmd->add_option("--f", c.f_spec, "signal phi");
  maximal_cmd->add_option("--g", c.g_spec, "signal psi");
  maximal_cmd->add_option("--rho", c.rho, "ladder ratio");
  maximal_cmd->add_option("--bands", c.bands, "number of bands K")->check(CLI::PositiveNumber);
  maximal_cmd->add_option("--first", c.first, "ladder index of N_1");
  maximal_cmd->add_option("--limit", c.limit, "N_max for global and weaktype")->check(CLI::PositiveNumber);
  maximal_cmd->add_option("--p", c.p_exp, "weak-type exponent p");
  maximal_cmd->add_option("--q", c.q_exp, "weak-type exponent q");

  auto* report_cmd = app.add_subcommand("report", "aggregate earlier outputs into one JSON summary");
  report_cmd->add_option("--inputs", c.inputs, "CSV or JSON files")->required();
  report_cmd->add_option("--out", c.out, "output file (default: standard output)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw help_request(app.help());
  } catch (const CLI::ParseError& e) {
    throw usage_error(e.what());
  }

  const auto* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  static const std::map<std::string, Subcommand> names{
      {"sieve", Subcommand::Sieve},     {"expsum", Subcommand::Expsum},   {"average", Subcommand::Average},
      {"spectral-check", Subcommand::SpectralCheck}, {"maximal", Subcommand::Maximal},
      {"report", Subcommand::Report}};
  c.subcommand = names.at(name);
  c.weight = weight_name == "liouville" ? WeightKind::Liouville : WeightKind::Mobius;

  if (!(c.rho > 1.0) || !std::isfinite(c.rho)) {
    throw usage_error("--rho: rho must exceed 1");
  }
  for (const auto& [flag, text] : {std::pair<std::string, std::string>{"--poly-p", c.poly_p}, {"--poly-q", c.poly_q}}) {
    try {
      (void)IntPolynomial::parse(text);
    } catch (const std::exception& e) {
      throw usage_error(flag + ": " + e.what());
    }
  }
  if (c.subcommand == Subcommand::Expsum && !c.n_list.empty()) {
    if (!std::is_sorted(c.n_list.begin(), c.n_list.end()) || c.n_list.front() == 0) {
      throw usage_error("--n-list: lengths must be positive and increasing");
    }
  }
  if (c.subcommand == Subcommand::Expsum && c.start > 0 && c.span == 0) {
    throw usage_error("--span: short interval length must be positive");
  }
  return c;
}

inline RunConfig parse_args(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) {
    args.emplace_back(argv[i]);
  }
  return parse_args(std::move(args));
}

namespace detail {

struct Report {
  std::string text;
  int code = ExitCode::ok;
};

inline json header(const RunConfig& c, double seconds) {
  json h;
  h["tool"] = "ergolab";
  h["version"] = ergolab::version;
  json cfg = json::object();
  for (const auto& [k, v] : config_entries(c)) {
    cfg[k] = v;
  }
  h["config"] = cfg;
  h["tolerances"] = {{"dual_path", dual_path_tolerance},
                     {"transform", transform_tolerance},
                     {"phase_paths", phase_path_tolerance},
                     {"grid_tie", grid_tie_tolerance}};
  if (c.timing) {
    h["wall_clock_seconds"] = seconds;
  }
  return h;
}

inline std::string csv_header(const RunConfig& c, double seconds) {
  std::string s = "# ergolab " + std::string(ergolab::version) + "\n# config:";
  for (const auto& [k, v] : config_entries(c)) {
    s += " " + k + "=" + v;
  }
  s += "\n# tolerances: dual_path=" + number(dual_path_tolerance) +
       " transform=" + number(transform_tolerance) + " phase_paths=" + number(phase_path_tolerance) +
       " grid_tie=" + number(grid_tie_tolerance) + "\n";
  if (c.timing) {
    s += "# wall_clock_seconds: " + number(seconds) + "\n";
  }
  return s;
}

// Signal spec on Z_J: const:c, delta:a, pm1, unit, uniform, or
// trig:m:c[,m:c...] (real coefficients). Seeded specs use stream `stream`.
inline PeriodicSignal make_signal(const std::string& spec, std::uint64_t period, std::uint64_t seed,
                                  std::uint32_t stream) {
  const CounterRng rng(seed, stream);
  std::vector<cplx> v(period);
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  try {
    if (kind == "const") {
      return PeriodicSignal::constant(period, std::stod(arg));
    }
    if (kind == "delta") {
      return PeriodicSignal::delta(period, std::stoull(arg));
    }
    if (kind == "pm1") {
      for (std::uint64_t j = 0; j < period; ++j) {
        v[j] = rng.sign(j);
      }
      return PeriodicSignal(std::move(v));
    }
    if (kind == "unit") {
      for (std::uint64_t j = 0; j < period; ++j) {
        v[j] = std::polar(1.0, two_pi * rng.uniform(j));
      }
      return PeriodicSignal(std::move(v));
    }
    if (kind == "uniform") {
      for (std::uint64_t j = 0; j < period; ++j) {
        v[j] = {2.0 * rng.uniform(2 * j) - 1.0, 2.0 * rng.uniform(2 * j + 1) - 1.0};
      }
      return PeriodicSignal(std::move(v));
    }
    if (kind == "trig") {
      std::stringstream ss(arg);
      std::string term;
      while (std::getline(ss, term, ',')) {
        const auto sep = term.find(':');
        const long long m = std::stoll(term.substr(0, sep));
        const double coef = sep == std::string::npos ? 1.0 : std::stod(term.substr(sep + 1));
        const auto mm = static_cast<std::uint64_t>(((m % static_cast<long long>(period)) +
                                                    static_cast<long long>(period)) %
                                                   static_cast<long long>(period));
        for (std::uint64_t j = 0; j < period; ++j) {
          v[j] += coef * FourierPlan::root_of_unity((mm * j) % period, period);
        }
      }
      return PeriodicSignal(std::move(v));
    }
  } catch (const std::invalid_argument&) {
  } catch (const std::out_of_range&) {
  }
  throw config_error("unrecognized signal spec '" + spec + "'");
}

inline DynamicalSystem make_system(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  try {
    if (kind == "cyclic") {
      return CyclicShift{std::stoull(arg)};
    }
    if (kind == "rotation") {
      const auto slash = arg.find('/');
      if (slash != std::string::npos) {
        return RationalRotation{std::stoull(arg.substr(0, slash)), std::stoull(arg.substr(slash + 1))};
      }
    }
  } catch (const std::exception&) {
  }
  throw config_error("unrecognized system spec '" + spec + "' (cyclic:J or rotation:p/q)");
}

inline json complex_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}, {"abs", std::abs(z)}}; }

inline Report run_sieve(const RunConfig& c, double& seconds_out) {
  const auto start = std::chrono::steady_clock::now();
  const auto table = sieve(c.weight, c.limit);
  std::optional<IdentityCheck> identity;
  if (c.check_identity) {
    const auto other = sieve(c.weight == WeightKind::Mobius ? WeightKind::Liouville : WeightKind::Mobius, c.limit);
    const auto& mu = c.weight == WeightKind::Mobius ? table : other;
    const auto& lambda = c.weight == WeightKind::Mobius ? other : table;
    identity = check_lambda_mu_identity(mu, lambda, c.limit);
  }
  seconds_out = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Report r;
  std::string body;
  if (identity) {
    body += identity->holds ? "# identity: holds\n"
                            : "# identity: fails at n=" + std::to_string(identity->first_counterexample.value_or(0)) + "\n";
    if (!identity->holds) {
      r.code = ExitCode::violation;
    }
  }
  body += c.sums ? "n,value,sum\n" : "n,value\n";
  std::int64_t sum = 0;
  const auto values = table.values();
  for (std::uint64_t n = 1; n <= c.limit; ++n) {
    body += std::to_string(n);
    body += ',';
    body += std::to_string(values[n]);
    if (c.sums) {
      sum += values[n];
      body += ',';
      body += std::to_string(sum);
    }
    body += '\n';
  }
  r.text = csv_header(c, seconds_out) + body;
  return r;
}

// theta spec: "a/q" (exact) or radians.
struct ThetaSpec {
  double radians = 0.0;
  std::optional<std::pair<std::uint64_t, std::uint64_t>> rational;
};

inline ThetaSpec parse_theta(const std::string& s) {
  ThetaSpec t;
  if (s.empty()) {
    return t;
  }
  try {
    if (const auto slash = s.find('/'); slash != std::string::npos) {
      const std::uint64_t a = std::stoull(s.substr(0, slash));
      const std::uint64_t q = std::stoull(s.substr(slash + 1));
      if (q == 0) {
        throw config_error("theta denominator must be positive");
      }
      t.rational = {{a % q, q}};
      t.radians = two_pi * static_cast<double>(a % q) / static_cast<double>(q);
      return t;
    }
    t.radians = std::stod(s);
    return t;
  } catch (const std::invalid_argument&) {
  } catch (const std::out_of_range&) {
  }
  throw config_error("unrecognized theta '" + s + "'");
}

inline bool is_power_of_two(std::uint64_t q) { return q != 0 && (q & (q - 1)) == 0; }

inline Report run_expsum(const RunConfig& c, double& seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto p = IntPolynomial::parse(c.poly_p);
  const std::uint64_t top = !c.n_list.empty() ? c.n_list.back() : (c.span > 0 ? c.start + c.span : c.limit);
  const auto table = sieve(c.weight, top);
  const auto grid = c.grid_mode == "uniform" ? FrequencyGrid::uniform(c.grid) : FrequencyGrid::rational(c.grid);
  Report r;
  json out;
  json violations = json::array();

  if (!c.n_list.empty()) {
    const auto prof = decay_profile(table, p, grid, c.n_list);
    json rows = json::array();
    for (const auto& row : prof.rows) {
      rows.push_back({{"n", row.n}, {"max_abs", row.max_abs}, {"theta_star", row.theta_star}});
    }
    out["mode"] = "profile";
    out["rows"] = rows;
    if (prof.fit) {
      out["fit"] = {{"exponent", prof.fit->exponent},
                    {"exponent_stderr", prof.fit->exponent_stderr},
                    {"constant", prof.fit->constant},
                    {"points", prof.fit->points}};
    } else {
      out["fit"] = nullptr;
    }
  } else if (c.span > 0) {
    const auto theta = parse_theta(c.theta);
    const auto s = theta.rational ? short_interval_sum_rational(table, theta.rational->first, theta.rational->second,
                                                                c.start, c.span)
                                  : short_interval_sum(table, theta.radians, c.start, c.span);
    out["mode"] = "short";
    out["theta"] = theta.radians;
    out["value"] = complex_json(s.value);
    out["zhan_range"] = s.zhan_range;
  } else if (!c.theta.empty()) {
    const auto theta = parse_theta(c.theta);
    const cplx floating = weighted_poly_sum(table, p, theta.radians, c.limit);
    out["mode"] = "point";
    out["theta"] = theta.radians;
    if (theta.rational) {
      const auto [a, q] = *theta.rational;
      const cplx exact = weighted_poly_sum_rational(table, p, a, q, c.limit);
      out["value"] = complex_json(exact);
      out["floating_value"] = complex_json(floating);
      const double gap = std::abs(exact - floating);
      out["phase_path_gap"] = gap;
      if ((is_power_of_two(q) || p.degree() == 1) && gap > phase_path_tolerance) {
        violations.push_back({{"check", "rational_vs_floating"}, {"error", gap}, {"tolerance", phase_path_tolerance}});
      }
    } else {
      out["value"] = complex_json(floating);
    }
  } else {
    const auto values = grid_values(table, p, grid, c.limit);
    const auto best = max_over_grid(table, p, grid, c.limit);
    const cplx direct = grid.mode() == FrequencyGrid::Mode::Rational
                            ? weighted_poly_sum_rational(table, p, best.index, grid.size(), c.limit)
                            : weighted_poly_sum(table, p, best.theta, c.limit);
    const double gap = std::abs(direct - best.value);
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string body = csv_header(c, seconds);
    body += "# max: index=" + std::to_string(best.index) + " theta=" + number(best.theta) +
            " abs=" + number(best.modulus) + "\n";
    if (gap > dual_path_tolerance) {
      body += "# violation: grid maximum " + number(best.modulus) + " vs direct " + number(std::abs(direct)) + "\n";
      r.code = ExitCode::violation;
    }
    body += "index,theta,re,im,abs\n";
    for (std::uint64_t i = 0; i < values.size(); ++i) {
      body += std::to_string(i) + "," + number(grid.theta(i)) + "," + number(values[i].real()) + "," +
              number(values[i].imag()) + "," + number(std::abs(values[i])) + "\n";
    }
    r.text = body;
    return r;
  }
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json doc = header(c, seconds);
  doc["result"] = out;
  doc["violations"] = violations;
  doc["status"] = violations.empty() ? "ok" : "violation";
  r.code = violations.empty() ? ExitCode::ok : ExitCode::violation;
  r.text = to_json_text(doc);
  return r;
}

inline Observable make_observable(const std::string& spec, const DynamicalSystem& system, std::uint64_t seed,
                                  std::uint32_t stream) {
  const std::uint64_t states = state_count(system);
  if (spec.rfind("trig:", 0) == 0 && std::holds_alternative<RationalRotation>(system) &&
      states > ObservableEvaluator::tabulate_limit) {
    TrigPolynomial t;
    std::stringstream ss(spec.substr(5));
    std::string term;
    while (std::getline(ss, term, ',')) {
      const auto sep = term.find(':');
      t.modes.emplace_back(std::stoll(term.substr(0, sep)),
                           sep == std::string::npos ? 1.0 : std::stod(term.substr(sep + 1)));
    }
    return t;
  }
  return make_signal(spec, states, seed, stream);
}

inline Report run_average(const RunConfig& c, double& seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto system = make_system(c.system);
  validate(system);
  const auto p = IntPolynomial::parse(c.poly_p);
  const auto q = IntPolynomial::parse(c.poly_q);
  const auto table = sieve(c.weight, c.limit);
  const auto f = make_observable(c.f_spec, system, c.seed, 1);
  const auto g = make_observable(c.g_spec, system, c.seed, 2);
  const std::uint64_t states = state_count(system);
  const double bound = ObservableEvaluator(f, states).sup_norm() * ObservableEvaluator(g, states).sup_norm();
  const auto starts = sample_starts(system, c.starts, c.seed);
  std::vector<AverageTrace> traces(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    traces[i] = convergence_trace(system, f, g, p, q, table, c.rho, starts[i], c.limit);
  });
  Report r;
  std::string notes;
  for (const auto& tr : traces) {
    for (const auto& row : tr.rows) {
      if (std::abs(row.value) > bound * (1.0 + 1e-12)) {
        notes += "# violation: |A_N| > sup f sup g at start=" + std::to_string(tr.start) +
                 " N=" + std::to_string(row.n) + " abs=" + number(std::abs(row.value)) + "\n";
        r.code = ExitCode::violation;
      }
    }
    const auto& last = tr.rows.back();
    const cplx scratch = bilinear_average(system, f, g, p, q, table, last.n, tr.start);
    if (std::abs(scratch - last.value) > dual_path_tolerance) {
      notes += "# violation: incremental " + number(std::abs(last.value)) + " vs recomputed " +
               number(std::abs(scratch)) + " at start=" + std::to_string(tr.start) + "\n";
      r.code = ExitCode::violation;
    }
  }
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string body = csv_header(c, seconds) + notes + "start,n,re,im,abs\n";
  for (const auto& tr : traces) {
    for (const auto& row : tr.rows) {
      body += std::to_string(tr.start) + "," + std::to_string(row.n) + "," + number(row.value.real()) + "," +
              number(row.value.imag()) + "," + number(std::abs(row.value)) + "\n";
    }
  }
  r.text = body;
  return r;
}

// Entries (k, s) of the slice table checked against F(L_N): all of them for
// J <= 64, otherwise (0, 0) plus 255 seeded draws.
inline std::vector<std::pair<std::uint64_t, std::uint64_t>> kernel_sample(std::uint64_t period, std::uint64_t seed) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> pts;
  if (period <= 64) {
    for (std::uint64_t k = 0; k < period; ++k) {
      for (std::uint64_t s = 0; s < period; ++s) {
        pts.emplace_back(k, s);
      }
    }
    return pts;
  }
  const CounterRng rng(seed, 0x4B);
  pts.emplace_back(0, 0);
  for (std::uint32_t i = 0; i < 255; ++i) {
    pts.emplace_back(rng.below(2 * i, period), rng.below(2 * i + 1, period));
  }
  return pts;
}

inline Report run_spectral_check(const RunConfig& c, double& seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto p = IntPolynomial::parse(c.poly_p);
  const auto q = IntPolynomial::parse(c.poly_q);
  const auto table = sieve(c.weight, c.limit);
  auto d = d_coefficients(table, p, q, c.limit, c.period);
  if (c.corrupt_d) {
    d.slice_ref(0, 0) += 0.25;
  }
  json violations = json::array();
  const auto flag = [&](const std::string& check, json where, double error) {
    if (!(error <= dual_path_tolerance)) {
      json v = {{"check", check}, {"error", error}, {"tolerance", dual_path_tolerance}};
      v["where"] = std::move(where);
      violations.push_back(v);
    }
  };

  const auto kernels = build_kernels(table, p, q, c.limit, c.period);
  double kernel_error = 0.0;
  for (const auto& [k, s] : kernel_sample(c.period, c.seed)) {
    const double e = std::abs(d.slice(k, s) - kernels.l_n.transform(k, s));
    if (e > kernel_error) {
      kernel_error = e;
    }
    flag("kernel", {{"k", k}, {"s", s}, {"d", complex_json(d.slice(k, s))}}, e);
  }

  double conv_error = 0.0;
  double square5_error = 0.0;
  double parseval_error = 0.0;
  double roundtrip_error = 0.0;
  json trials = json::array();
  for (std::size_t t = 0; t < c.trials; ++t) {
    const auto f = make_signal("uniform", c.period, c.seed, static_cast<std::uint32_t>(2 * t + 1));
    const auto g = make_signal("uniform", c.period, c.seed, static_cast<std::uint32_t>(2 * t + 2));
    const auto fs = dft(f);
    const auto gs = dft(g);
    const auto spectral = spectral_average_all(fs, gs, d);
    const auto direct = direct_average_all(table, p, q, f, g, c.limit);
    double conv = 0.0;
    std::uint64_t worst_j = 0;
    for (std::uint64_t j = 0; j < c.period; ++j) {
      const double e = std::abs(spectral[j] - direct[j]) / std::max(1.0, std::abs(direct[j]));
      if (e > conv) {
        conv = e;
        worst_j = j;
      }
    }
    flag("convolution", {{"trial", t}, {"j", worst_j}, {"spectral", complex_json(spectral[worst_j])},
                         {"direct", complex_json(direct[worst_j])}},
         conv);
    const double ms_direct = direct_mean_square(direct);
    const double ms_spectral = l2_norm_of_average(fs, gs, d);
    const double sq = std::abs(ms_spectral - ms_direct) / std::max(1.0, ms_direct);
    flag("square5", {{"trial", t}, {"spectral", ms_spectral}, {"direct", ms_direct}}, sq);
    const double energy = f.norm(2.0) * f.norm(2.0);
    const double pe = std::abs(energy - fs.energy()) / std::max(1.0, energy);
    const auto back = idft(fs);
    double rt = 0.0;
    for (std::uint64_t j = 0; j < c.period; ++j) {
      rt = std::max(rt, std::abs(back[j] - f[j]));
    }
    rt /= std::max(1.0, f.sup_norm());
    if (pe > transform_tolerance || rt > transform_tolerance) {
      violations.push_back({{"check", "parseval_roundtrip"}, {"where", {{"trial", t}}},
                            {"error", std::max(pe, rt)}, {"tolerance", transform_tolerance}});
    }
    conv_error = std::max(conv_error, conv);
    square5_error = std::max(square5_error, sq);
    parseval_error = std::max(parseval_error, pe);
    roundtrip_error = std::max(roundtrip_error, rt);
    trials.push_back({{"trial", t},
                      {"max_conv_error", conv},
                      {"square5_error", sq},
                      {"mean_square", ms_direct},
                      {"parseval_error", pe},
                      {"roundtrip_error", rt}});
  }
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json doc = header(c, seconds);
  doc["max_conv_error"] = conv_error;
  doc["max_square5_error"] = square5_error;
  doc["max_kernel_error"] = kernel_error;
  doc["parseval_error"] = parseval_error;
  doc["roundtrip_error"] = roundtrip_error;
  doc["max_d_modulus"] = d.max_modulus();
  doc["trials"] = trials;
  doc["violations"] = violations;
  doc["status"] = violations.empty() ? "ok" : "violation";
  Report r;
  r.code = violations.empty() ? ExitCode::ok : ExitCode::violation;
  r.text = to_json_text(doc);
  return r;
}

inline json signal_json(const PeriodicSignal& s) {
  json values = json::array();
  for (const auto& v : s.values()) {
    values.push_back(v.real());
  }
  return {{"l2", s.norm(2.0)}, {"sup", s.sup_norm()}, {"values", values}};
}

inline Report run_maximal(const RunConfig& c, double& seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto p = IntPolynomial::parse(c.poly_p);
  const auto q = IntPolynomial::parse(c.poly_q);
  const auto phi = make_signal(c.f_spec, c.period, c.seed, 1);
  const auto psi = make_signal(c.g_spec, c.period, c.seed, 2);
  json out;
  json violations = json::array();
  out["mode"] = c.mode;
  if (c.mode == "band" || c.mode == "oscillation") {
    // The ladder only needs to reach the last band endpoint.
    LacunaryLadder probe(c.rho, std::numeric_limits<std::uint32_t>::max());
    probe.with_bands(c.first, c.bands);
    const std::uint64_t top = probe.bands().back();
    LacunaryLadder ladder(c.rho, top);
    ladder.with_bands(c.first, c.bands);
    const auto table = sieve(c.weight, top);
    json endpoints = json::array();
    for (const auto e : ladder.bands()) {
      endpoints.push_back(e);
    }
    out["endpoints"] = endpoints;
    const auto maxima = band_maximals(phi, psi, p, q, table, ladder, c.bands);
    if (c.mode == "band") {
      json bands = json::array();
      for (std::size_t k = 0; k < maxima.size(); ++k) {
        json b = signal_json(maxima[k]);
        b["k"] = k + 1;
        bands.push_back(b);
      }
      out["bands"] = bands;
    } else {
      const auto rep = oscillation_sum(phi, psi, p, q, table, ladder, c.bands);
      out["phi_l4"] = rep.phi_l4;
      out["psi_l4"] = rep.psi_l4;
      json rows = json::array();
      for (const auto& row : rep.rows) {
        rows.push_back({{"bands", row.bands},
                        {"band_norm", row.band_norm},
                        {"cumulative", row.cumulative},
                        {"comparison", row.comparison},
                        {"ratio", row.ratio}});
      }
      out["rows"] = rows;
    }
    // Band 1 at j = 0 recomputed from scratch.
    const auto members = ladder.band_members(1);
    const cplx base = direct_average(table, p, q, phi, psi, members.front(), 0);
    double scratch = 0.0;
    for (const auto n : members) {
      scratch = std::max(scratch, std::abs(direct_average(table, p, q, phi, psi, n, 0) - base));
    }
    const double gap = std::abs(scratch - maxima.front()[0].real());
    if (gap > dual_path_tolerance) {
      violations.push_back({{"check", "band_maximal_recompute"},
                            {"error", gap},
                            {"tolerance", dual_path_tolerance}});
    }
  } else {
    const auto table = sieve(c.weight, c.limit);
    if (c.mode == "global") {
      out["maximal"] = signal_json(global_maximal(phi, psi, p, q, table, c.limit));
    } else {
      const auto grid = default_lambda_grid(phi, psi);
      const auto rep = weak_type_statistic(phi, psi, p, q, table, c.limit, grid, c.p_exp, c.q_exp);
      out["statistic"] = rep.statistic;
      out["lambda_star"] = rep.lambda_star;
      out["p"] = rep.p;
      out["q"] = rep.q;
      out["norm_product"] = rep.norm_product;
      out["ratio"] = rep.ratio;
    }
  }
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json doc = header(c, seconds);
  doc["result"] = out;
  doc["violations"] = violations;
  doc["status"] = violations.empty() ? "ok" : "violation";
  Report r;
  r.code = violations.empty() ? ExitCode::ok : ExitCode::violation;
  r.text = to_json_text(doc);
  return r;
}

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Report run_report(const RunConfig& c, double& seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  json inputs = json::array();
  bool any_violation = false;
  for (const auto& path : c.inputs) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw io_error("cannot read " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    json entry;
    entry["path"] = path;
    const auto parsed = json::parse(text, nullptr, false);
    if (!parsed.is_discarded() && parsed.is_object()) {
      entry["kind"] = "json";
      entry["content"] = parsed;
      any_violation = any_violation || parsed.value("status", "ok") == "violation";
    } else {
      entry["kind"] = "csv";
      json comments = json::array();
      std::size_t rows = 0;
      std::string columns;
      std::stringstream ss(text);
      std::string line;
      while (std::getline(ss, line)) {
        if (line.rfind("# ", 0) == 0) {
          comments.push_back(line.substr(2));
          any_violation = any_violation || line.rfind("# violation", 0) == 0;
        } else if (columns.empty()) {
          columns = line;
        } else if (!line.empty()) {
          ++rows;
        }
      }
      entry["header"] = comments;
      entry["columns"] = columns;
      entry["rows"] = rows;
    }
    inputs.push_back(entry);
  }
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json doc = header(c, seconds);
  doc["inputs"] = inputs;
  doc["status"] = any_violation ? "violation" : "ok";
  return {to_json_text(doc), ExitCode::ok};
}

} // namespace detail

// Runs one configured command. Output goes to c.out, or to `out` when no
// path is set; diagnostics go to `err`.
inline int run(const RunConfig& c, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  if (c.workers > 0) {
    set_worker_count(c.workers);
  }
  detail::Report r;
  double seconds = 0.0;
  try {
    switch (c.subcommand) {
    case Subcommand::Sieve: r = detail::run_sieve(c, seconds); break;
    case Subcommand::Expsum: r = detail::run_expsum(c, seconds); break;
    case Subcommand::Average: r = detail::run_average(c, seconds); break;
    case Subcommand::SpectralCheck: r = detail::run_spectral_check(c, seconds); break;
    case Subcommand::Maximal: r = detail::run_maximal(c, seconds); break;
    case Subcommand::Report: r = detail::run_report(c, seconds); break;
    }
  } catch (const detail::io_error& e) {
    err << "ergolab: " << e.what() << "\n";
    return ExitCode::io_failure;
  } catch (const std::exception& e) {
    err << "ergolab " << to_string(c.subcommand) << ": " << e.what() << "\n";
    return ExitCode::usage;
  }
  if (c.out.empty()) {
    out << r.text;
    out.flush();
    if (!out) {
      err << "ergolab: write to standard output failed\n";
      return ExitCode::io_failure;
    }
  } else {
    std::ofstream file(c.out, std::ios::binary | std::ios::trunc);
    file << r.text;
    file.close();
    if (!file) {
      err << "ergolab: cannot write " << c.out << "\n";
      return ExitCode::io_failure;
    }
  }
  if (r.code == ExitCode::violation) {
    err << "ergolab " << to_string(c.subcommand) << ": invariant violation, see report\n";
  }
  return r.code;
}

} // namespace ergolab::cli
