#include "modamp/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "modamp/errors.hpp"
#include "modamp/experiments.hpp"

namespace modamp::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const std::vector<ParameterDoc>& parameter_docs() {
  static const std::vector<ParameterDoc> docs = {
      {"n_left", "8", "sites in the left module (even, >= 4)"},
      {"n_right", "8", "sites in the right module (even, >= 4)"},
      {"j", "1", "bulk coupling J (energy unit)"},
      {"j_prime", "0.5", "impurity coupling J' in units of J"},
      {"j_i", "0.75", "quench bond J_I in units of J"},
      {"delta", "0", "anisotropy, -1 <= delta <= 1"},
      {"t_max", "40", "end of the time window, hbar/J"},
      {"samples", "801", "uniform samples on [0, t_max]"},
      {"j_prime_grid", "0.10:1.50:0.05", "J' values for optimize and amplify"},
      {"j_i_grid", "0.10:2.00:0.05", "J_I values for optimize and amplify"},
      {"temperatures", "0,log:0.001:1000:25", "k_B T values in units of J"},
      {"lambda", "0.1", "disorder half-width"},
      {"realizations", "50", "disorder realizations"},
      {"seed", "1", "disorder seed (u64)"},
      {"disorder_mode", "per-bond", "per-bond or per-chain"},
      {"krylov_tol", "1e-10", "propagator error budget"},
      {"krylov_m_start", "20", "initial Krylov dimension"},
      {"krylov_m_cap", "60", "largest Krylov dimension"},
      {"krylov_m_step", "10", "Krylov growth step"},
      {"eigen_tol", "1e-10", "Lanczos residual tolerance"},
      {"dense_threshold", "2000", "dense eigensolver at or below this sector size"},
      {"dense_cap", "6000", "largest sector for full spectra"},
      {"dense_propagation_max", "200", "propagate densely at or below this sector size"},
      {"thermal_max_sites", "14", "largest chain for thermal runs"},
      {"max_failure_fraction", "0.05", "abort sweeps above this failure fraction"},
      {"perturbative_candidates", "true", "amplify also tries J_I near the weak-coupling resonance"},
      {"verify_ground_sector", "false", "check module ground states are half filled"},
      {"workers", "0", "worker threads, 0 for the OpenMP default"},
      {"out", ".", "output directory"},
  };
  return docs;
}

Parameters default_parameters() {
  Parameters p;
  for (const auto& d : parameter_docs()) p[d.key] = d.default_value;
  return p;
}

const std::vector<std::string>& experiments() {
  static const std::vector<std::string> names = {"gap",     "static",       "trace",    "peak",    "optimize",
                                                 "amplify", "perturbative", "spectral", "thermal", "disorder"};
  return names;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool known_key(const std::string& key) {
  const auto& d = parameter_docs();
  return std::any_of(d.begin(), d.end(), [&](const ParameterDoc& x) { return x.key == key; });
}

void check_key(const std::string& key, const std::string& where) {
  if (!known_key(key)) throw DomainError("unknown parameter '" + key + "' in " + where);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
    throw DomainError("parameter " + key + ": expected a number, got '" + text + "'");
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw DomainError("parameter " + key + ": expected an integer, got '" + text + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw DomainError("parameter " + key + ": expected an unsigned integer, got '" + text + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

Parameters parse_ini(const std::string& text, const std::string& experiment) {
  Parameters common, specific;
  std::string section = "common";
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw DomainError("config line " + std::to_string(lineno) + ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section != "common" && std::find(experiments().begin(), experiments().end(), section) == experiments().end())
        throw DomainError("config line " + std::to_string(lineno) + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw DomainError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    check_key(key, "config line " + std::to_string(lineno));
    const std::string value = trim(t.substr(eq + 1));
    if (section == "common")
      common[key] = value;
    else if (section == experiment)
      specific[key] = value;
  }
  for (auto& [k, v] : specific) common[k] = v;
  return common;
}

Parameters parse_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DomainError(std::string("config JSON: ") + e.what());
  }
  const json& block = doc.contains("parameters") ? doc.at("parameters") : doc;
  if (!block.is_object()) throw DomainError("config JSON: expected an object of parameters");
  Parameters p;
  for (const auto& [key, value] : block.items()) {
    check_key(key, "config JSON");
    p[key] = value.is_string() ? value.get<std::string>() : value.dump();
  }
  return p;
}

// Typed views of the resolved parameters.
class Context {
 public:
  explicit Context(Parameters p) : p_(std::move(p)) {}

  const Parameters& parameters() const { return p_; }
  const std::string& text(const std::string& key) const { return p_.at(key); }
  double num(const std::string& key) const { return parse_double(key, text(key)); }
  long long integer(const std::string& key) const { return parse_int(key, text(key)); }
  std::uint64_t u64(const std::string& key) const { return parse_u64(key, text(key)); }
  std::vector<double> grid(const std::string& key) const {
    try {
      return parse_grid(text(key));
    } catch (const DomainError& e) {
      throw DomainError("parameter " + key + ": " + e.what());
    }
  }
  bool flag(const std::string& key) const {
    const std::string& v = text(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw DomainError("parameter " + key + ": expected true or false, got '" + v + "'");
  }
  int small_int(const std::string& key) const {
    const long long v = integer(key);
    if (v < 0 || v > 1'000'000'000) throw DomainError("parameter " + key + " out of range");
    return static_cast<int>(v);
  }

  NumericOptions options() const {
    NumericOptions o;
    o.krylov.tol = num("krylov_tol");
    o.krylov.m_start = small_int("krylov_m_start");
    o.krylov.m_cap = small_int("krylov_m_cap");
    o.krylov.m_step = small_int("krylov_m_step");
    o.eigen.tol = num("eigen_tol");
    o.eigen.dense_threshold = static_cast<std::size_t>(small_int("dense_threshold"));
    o.dense_cap = static_cast<std::size_t>(small_int("dense_cap"));
    o.dense_propagation_max = static_cast<std::size_t>(small_int("dense_propagation_max"));
    o.thermal_max_sites = small_int("thermal_max_sites");
    o.max_failure_fraction = num("max_failure_fraction");
    o.verify_ground_sector = flag("verify_ground_sector");
    o.workers = small_int("workers");
    if (!(o.krylov.tol > 0.0)) throw DomainError("krylov_tol must be positive");
    if (o.krylov.m_start < 2 || o.krylov.m_cap < o.krylov.m_start || o.krylov.m_step < 1)
      throw DomainError("Krylov sizes need 2 <= m_start <= m_cap and m_step >= 1");
    if (!(o.eigen.tol > 0.0)) throw DomainError("eigen_tol must be positive");
    if (!(o.max_failure_fraction >= 0.0 && o.max_failure_fraction <= 1.0))
      throw DomainError("max_failure_fraction must lie in [0, 1]");
    return o;
  }

  Window window() const {
    Window w;
    w.t_max = num("t_max");
    const long long s = integer("samples");
    if (s < 2) throw DomainError("samples must be at least 2");
    w.samples = static_cast<std::size_t>(s);
    return w;
  }

  int n_left() const { return small_int("n_left"); }
  int n_right() const { return small_int("n_right"); }

  ModuleSpec module(int n) const {
    ModuleSpec m = make_module(n, num("j_prime"), num("delta"), num("j"));
    m.validate();
    return m;
  }

  ChainSpec chain() const {
    ChainSpec c;
    c.left = module(n_left());
    c.right = module(n_right());
    c.j_i = num("j_i");
    c.validate();
    return c;
  }

  int n_half() const {
    if (n_left() != n_right()) throw DomainError("this experiment needs n_left == n_right");
    return n_left();
  }

 private:
  Parameters p_;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& header) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    write(header);
  }
  void row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(fmt(v));
    write(cells);
  }
  void write(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
  std::ofstream out_;
};

struct Output {
  fs::path dir;
  std::string experiment;
  json results = json::object();
  json files = json::array();
  json columns = json::object();

  Csv csv(const std::string& stem, const std::vector<std::string>& header, const std::vector<std::string>& units) {
    const std::string name = stem + ".csv";
    files.push_back(name);
    json cols = json::object();
    for (std::size_t i = 0; i < header.size(); ++i) cols[header[i]] = i < units.size() ? units[i] : "";
    columns[name] = cols;
    return Csv(dir / name, header);
  }
};

json peak_json(const PeakResult& p) {
  return {{"t_opt", p.t_opt}, {"e_max", p.e_max}, {"refined", p.refined}, {"window_truncated", p.window_truncated}};
}

json gap_json(const GapResult& g) {
  return {{"e0", g.e0},
          {"e1", g.e1},
          {"gap", g.delta},
          {"ground_sector_n_up", g.sector_of_ground},
          {"gap_sector_n_up", g.sector_of_gap},
          {"sector_gap", g.sector_delta},
          {"degenerate", g.degenerate}};
}

void write_trace_csv(Output& o, const std::string& stem, const TraceSeries& tr) {
  Csv csv = o.csv(stem, {"t", "E", "p_s", "p_x", "p_y", "p_z"}, {"hbar/J", "ebit", "", "", "", ""});
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    const BellMix& b = tr.bell[k];
    csv.row({tr.times[k], tr.e[k], b.p_s, b.p_x, b.p_y, b.p_z});
  }
}

json trace_diagnostics(const TraceSeries& tr) {
  return {{"dense_propagation", tr.dense_propagation},
          {"max_bell_residual", tr.max_bell_residual},
          {"max_pxy_gap", tr.max_pxy_gap},
          {"krylov_bases", tr.stats.bases},
          {"matvecs", tr.stats.matvecs},
          {"error_estimate", tr.stats.error_estimate}};
}

void run_gap(const Context& c, Output& o) {
  const NumericOptions opt = c.options();
  Csv csv = o.csv("gap", {"module", "n_sites", "e0", "e1", "gap", "ground_n_up", "gap_n_up", "sector_gap"},
                  {"", "", "J", "J", "J", "", "", "J"});
  const std::pair<const char*, int> modules[] = {{"left", c.n_left()}, {"right", c.n_right()}};
  for (const auto& [name, n] : modules) {
    const GapResult g = energy_gap(c.module(n), {}, opt.eigen);
    csv.write({name, std::to_string(n), fmt(g.e0), fmt(g.e1), fmt(g.delta), std::to_string(g.sector_of_ground),
               std::to_string(g.sector_of_gap), fmt(g.sector_delta)});
    o.results[name] = gap_json(g);
  }
}

void run_static(const Context& c, Output& o) {
  const NumericOptions opt = c.options();
  Csv csv = o.csv("static", {"module", "n_sites", "E", "C", "p_s", "p_x", "p_y", "p_z"},
                  {"", "", "ebit", "", "", "", "", ""});
  const std::pair<const char*, int> modules[] = {{"left", c.n_left()}, {"right", c.n_right()}};
  for (const auto& [name, n] : modules) {
    const BellMix b = static_end_bell(c.module(n), opt);
    const EntanglementValue v = entanglement_E(b);
    csv.write({name, std::to_string(n), fmt(v.e), fmt(v.c), fmt(b.p_s), fmt(b.p_x), fmt(b.p_y), fmt(b.p_z)});
    o.results[name] = {{"E", v.e}, {"C", v.c}, {"p_s", b.p_s}};
  }
}

void run_trace(const Context& c, Output& o) {
  const TraceSeries tr = entanglement_trace(c.chain(), c.window().grid(), c.options());
  write_trace_csv(o, "trace", tr);
  o.results = trace_diagnostics(tr);
  o.results["peak"] = peak_json(find_peak(tr));
}

void run_peak(const Context& c, Output& o) {
  const TraceSeries tr = entanglement_trace(c.chain(), c.window().grid(), c.options());
  const PeakResult p = find_peak(tr);
  Csv csv = o.csv("peak", {"t_opt", "e_max", "refined", "window_truncated"}, {"hbar/J", "ebit", "", ""});
  csv.row({p.t_opt, p.e_max, p.refined ? 1.0 : 0.0, p.window_truncated ? 1.0 : 0.0});
  o.results = peak_json(p);
  o.results["diagnostics"] = trace_diagnostics(tr);
}

void run_optimize(const Context& c, Output& o) {
  const auto jp = c.grid("j_prime_grid"), ji = c.grid("j_i_grid");
  const OptimizationResult r = optimize_couplings(c.n_half(), c.num("delta"), jp, ji, c.window(), c.options());
  Csv csv = o.csv("surface", {"j_prime", "j_i", "e_max", "t_opt", "refined", "window_truncated", "ok"},
                  {"J", "J", "ebit", "hbar/J", "", "", ""});
  for (const SurfacePoint& pt : r.surface)
    csv.row({pt.j_prime, pt.j_i, pt.ok ? pt.peak.e_max : std::nan(""), pt.ok ? pt.peak.t_opt : std::nan(""),
             pt.peak.refined ? 1.0 : 0.0, pt.peak.window_truncated ? 1.0 : 0.0, pt.ok ? 1.0 : 0.0});
  o.results = {{"j_prime", r.j_prime}, {"j_i", r.j_i}, {"e_max", r.peak.e_max}, {"t_opt", r.peak.t_opt},
               {"refined", r.peak.refined}, {"window_truncated", r.peak.window_truncated},
               {"failures", r.failures}, {"grid_points", r.surface.size()}};
}

void run_amplify(const Context& c, Output& o) {
  const auto jp = c.grid("j_prime_grid"), ji = c.grid("j_i_grid");
  const AmplificationScan s = amplification_scan(c.n_half(), c.num("delta"), jp, ji, c.window(), c.options(),
                                                c.flag("perturbative_candidates"));
  Csv best = o.csv("amplify",
                   {"j_prime", "e_static", "e_max", "j_i_best", "t_opt", "e_max_grid", "e_max_perturbative",
                    "j_i_perturbative", "t_opt_perturbative"},
                   {"J", "ebit", "ebit", "J", "hbar/J", "ebit", "ebit", "J", "hbar/J"});
  Csv by = o.csv("amplify_by_j_i", {"j_prime", "j_i", "e_max", "t_opt"}, {"J", "J", "ebit", "hbar/J"});
  bool amplified = true;
  for (const AmplificationRecord& r : s.records) {
    best.row({r.j_prime, r.e_static, r.e_max, r.j_i_best, r.t_opt, r.e_max_grid, r.e_max_perturbative,
              r.j_i_perturbative, r.t_opt_perturbative});
    for (std::size_t b = 0; b < s.j_i_grid.size(); ++b)
      by.row({r.j_prime, s.j_i_grid[b], r.e_max_by_j_i[b], r.t_opt_by_j_i[b]});
    amplified = amplified && r.e_max >= r.e_static;
  }
  o.results = {{"amplified_everywhere", amplified}, {"failures", s.failures}};
}

void run_perturbative(const Context& c, Output& o) {
  const NumericOptions opt = c.options();
  const PerturbativePrediction p = perturbative_prediction(c.module(c.n_left()), c.module(c.n_right()), opt);
  ChainSpec chain = c.chain();
  chain.j_i = p.j_i_star;
  const auto grid = linspace(0.0, 1.1 * p.t_opt_pred, c.window().samples);
  const TraceSeries tr = entanglement_trace(chain, grid, opt);
  Csv csv = o.csv("perturbative", {"t", "E_pred", "E_sim", "p_pred"}, {"hbar/J", "ebit", "ebit", ""});
  double worst = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double pred = p.entanglement(grid[k]);
    worst = std::max(worst, std::abs(pred - tr.e[k]));
    csv.row({grid[k], pred, tr.e[k], p.singlet_weight(grid[k])});
  }
  o.results = {{"gap_left", p.gap_left.delta},     {"gap_right", p.gap_right.delta}, {"j_eff_left", p.j_eff_left},
               {"j_eff_right", p.j_eff_right},     {"j_i_star", p.j_i_star},         {"t_opt_pred", p.t_opt_pred},
               {"max_deviation", worst},           {"simulated_peak", peak_json(find_peak(tr))}};
}

void run_spectral(const Context& c, Output& o) {
  const NumericOptions opt = c.options();
  const ChainSpec chain = c.chain();
  const SpectralDecomposition d = spectral_decomposition(chain, opt);
  Csv comp = o.csv("spectral", {"index", "excitation", "weight"}, {"", "J", ""});
  for (const SpectralComponent& s : d.components) comp.row({static_cast<double>(s.index), s.excitation, s.weight});

  const auto grid = c.window().grid();
  const auto spec_e = spectral_trace(d, grid);
  // The comparison must not reuse the eigenbasis.
  NumericOptions krylov_only = opt;
  krylov_only.dense_propagation_max = 0;
  const TraceSeries tr = entanglement_trace(chain, grid, krylov_only);
  Csv rec = o.csv("spectral_trace", {"t", "E_spectral", "E_propagated"}, {"hbar/J", "ebit", "ebit"});
  double worst = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    rec.row({grid[k], spec_e[k], tr.e[k]});
    worst = std::max(worst, std::abs(spec_e[k] - tr.e[k]));
  }
  const PeakResult peak = find_peak(tr);
  json r = {{"omega", d.omega},
            {"top_first", d.top_first},
            {"top_second", d.top_second},
            {"weight_sum", d.weight_sum},
            {"reconstruction_max_deviation", worst},
            {"peak", peak_json(peak)}};
  if (d.omega > 0.0) {
    const InterferenceReport ic = interference_check(d, peak);
    r["t_phase"] = ic.t_phase;
    r["offset"] = ic.offset;
    r["top2_weight_sum"] = ic.top2_weight_sum;
  }
  o.results = r;
}

void run_thermal(const Context& c, Output& o) {
  const auto temps = c.grid("temperatures");
  const auto pts = thermal_curve(c.chain(), temps, c.window(), c.options());
  Csv csv = o.csv("thermal", {"temperature", "e_max", "t_peak"}, {"J", "ebit", "hbar/J"});
  json arr = json::array();
  for (const ThermalPoint& p : pts) {
    csv.row({p.temperature, p.e_max, p.t_peak});
    arr.push_back({{"temperature", p.temperature}, {"e_max", p.e_max}, {"t_peak", p.t_peak}});
  }
  o.results = {{"points", arr}};
}

void run_disorder(const Context& c, Output& o) {
  const long long n = c.integer("realizations");
  if (n < 1) throw DomainError("realizations must be at least 1");
  const DisorderStats s = disorder_ensemble(c.chain(), c.num("lambda"), static_cast<std::size_t>(n), c.u64("seed"),
                                            c.window(), parse_disorder_mode(c.text("disorder_mode")), c.options());
  Csv csv = o.csv("disorder", {"realization", "e_max", "t_peak", "e_at_clean_topt", "ok"},
                  {"", "ebit", "hbar/J", "ebit", ""});
  for (std::size_t r = 0; r < s.realizations.size(); ++r) {
    const RealizationResult& x = s.realizations[r];
    csv.row({static_cast<double>(r), x.e_max, x.t_peak, x.e_at_clean_topt, x.ok ? 1.0 : 0.0});
  }
  o.results = {{"lambda", s.lambda},
               {"n_realizations", s.n_realizations},
               {"mode", to_string(s.mode)},
               {"clean_t_opt", s.clean_t_opt},
               {"clean_e_max", s.clean_e_max},
               {"clean_e_at_topt", s.clean_e_at_topt},
               {"clean_t_peak", s.clean_t_peak},
               {"mean_e_max", s.mean_e_max},
               {"se_e_max", s.se_e_max},
               {"mean_e_at_clean_topt", s.mean_e_at_clean_topt},
               {"se_e_at_clean_topt", s.se_e_at_clean_topt},
               {"mean_t_peak", s.mean_t_peak},
               {"se_t_peak", s.se_t_peak},
               {"failures", s.failures}};
}

json provenance(const Context& c) {
  const NumericOptions o = c.options();
  json p = {{"seed", c.text("seed")},
            {"window", {{"t_max", c.num("t_max")}, {"samples", c.integer("samples")}}},
            {"j_prime_grid", c.text("j_prime_grid")},
            {"j_i_grid", c.text("j_i_grid")},
            {"temperatures", c.text("temperatures")},
            {"tolerances",
             {{"krylov_tol", o.krylov.tol},
              {"krylov_m", {o.krylov.m_start, o.krylov.m_cap, o.krylov.m_step}},
              {"eigen_tol", o.eigen.tol}}},
            {"workers", omp_get_max_threads()}};
  return p;
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) throw DomainError("empty grid");
  for (const std::string& item : split(text, ',')) {
    if (item.empty()) throw DomainError("empty grid item in '" + text + "'");
    const auto parts = split(item, ':');
    if (parts.size() == 1) {
      out.push_back(parse_double("grid", parts[0]));
    } else if (parts.size() == 3) {
      const auto g = arange_inclusive(parse_double("grid", parts[0]), parse_double("grid", parts[1]),
                                      parse_double("grid", parts[2]));
      out.insert(out.end(), g.begin(), g.end());
    } else if (parts.size() == 4 && parts[0] == "log") {
      const double a = parse_double("grid", parts[1]), b = parse_double("grid", parts[2]);
      const long long n = parse_int("grid", parts[3]);
      if (!(a > 0.0 && b > 0.0) || n < 1) throw DomainError("log grid needs positive ends and count >= 1");
      std::vector<double> seg;
      for (double x : linspace(std::log10(a), std::log10(b), static_cast<std::size_t>(n))) seg.push_back(std::pow(10.0, x));
      seg.front() = a;
      if (n > 1) seg.back() = b;
      out.insert(out.end(), seg.begin(), seg.end());
    } else {
      throw DomainError("malformed grid item '" + item + "'");
    }
  }
  return out;
}

Parameters parse_config_text(const std::string& text, const std::string& experiment) {
  const std::string t = trim(text);
  if (!t.empty() && t.front() == '{') return parse_json(t);
  return parse_ini(text, experiment);
}

Parameters load_config(const fs::path& path, const std::string& experiment) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), experiment);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entanglement amplification in quenched modular XXZ chains", "modamp"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path;
  Parameters flags;
  int n_half = 0;
  std::vector<CLI::App*> subs;
  for (const std::string& name : experiments()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "INI or JSON config file");
    sub->add_option("--n-half", n_half, "set n_left and n_right together");
    for (const ParameterDoc& d : parameter_docs()) {
      std::string flag = "--" + d.key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      const std::string key = d.key;
      sub->add_option_function<std::string>(
             flag, [&flags, key](const std::string& v) { flags[key] = v; }, d.help + " [" + d.default_value + "]")
          ->type_name("VALUE");
    }
    subs.push_back(sub);
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return 0;
    if (e.get_exit_code() != static_cast<int>(CLI::ExitCodes::Success) && app.get_subcommands().empty())
      err << app.help();
    return 2;
  }

  const std::string experiment = app.get_subcommands().front()->get_name();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Parameters p = default_parameters();
    if (!config_path.empty())
      for (auto& [k, v] : load_config(config_path, experiment)) p[k] = v;
    if (n_half != 0) p["n_left"] = p["n_right"] = std::to_string(n_half);
    for (auto& [k, v] : flags) p[k] = v;
    const Context ctx(p);

    const NumericOptions opt = ctx.options();
    if (opt.workers > 0) omp_set_num_threads(opt.workers);

    Output o;
    o.dir = ctx.text("out");
    o.experiment = experiment;
    fs::create_directories(o.dir);

    if (experiment == "gap") run_gap(ctx, o);
    else if (experiment == "static") run_static(ctx, o);
    else if (experiment == "trace") run_trace(ctx, o);
    else if (experiment == "peak") run_peak(ctx, o);
    else if (experiment == "optimize") run_optimize(ctx, o);
    else if (experiment == "amplify") run_amplify(ctx, o);
    else if (experiment == "perturbative") run_perturbative(ctx, o);
    else if (experiment == "spectral") run_spectral(ctx, o);
    else if (experiment == "thermal") run_thermal(ctx, o);
    else run_disorder(ctx, o);

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json summary = {{"experiment", experiment},
                    {"version", kVersion},
                    {"parameters", p},
                    {"provenance", provenance(ctx)},
                    {"results", o.results},
                    {"outputs", o.files},
                    {"columns", o.columns},
                    {"wall_time_s", wall}};
    const fs::path summary_path = o.dir / (experiment + ".json");
    std::ofstream js(summary_path, std::ios::binary);
    if (!js) throw std::runtime_error("cannot write " + summary_path.string());
    js << summary.dump(2) << '\n';
    out << summary.dump(2) << '\n';
    return 0;
  } catch (const DomainError& e) {
    err << "modamp " << experiment << ": invalid parameters: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "modamp " << experiment << ": " << e.what() << '\n';
    return 1;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace modamp::cli
