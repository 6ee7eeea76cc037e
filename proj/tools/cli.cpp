#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "hardy/atoms.hpp"
#include "hardy/harmonic.hpp"
#include "hardy/maximal.hpp"
#include "hardy/potentials.hpp"
#include "hardy/semigroup.hpp"

namespace hardy::cli {

namespace fs = std::filesystem;
using io::Reader;

ExperimentConfig::ExperimentConfig() {
  fk.paths = 10000;
  fk.steps = 256;
  fk.adaptive = true;
  fk.max_step = 4.0;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"kato-check",         "omega-profile", "oscillation",
                                              "kernel-bounds",      "perturbation-check",
                                              "decompose",          "growth",        "approx-identity"};
  return names;
}

json default_params(const std::string& experiment, int dim) {
  auto axis_point = [dim](double x1) {
    json p = json::array();
    for (int i = 0; i < dim; ++i) p.push_back(i == 0 ? x1 : 0.0);
    return p;
  };
  if (experiment == "kato-check") return json::object();
  if (experiment == "omega-profile") return {{"from", axis_point(2.0)}, {"to", axis_point(36.0)}, {"points", 18}};
  if (experiment == "oscillation") return {{"n", {4, 5, 6}}, {"tau", 4.0}, {"steps_per_n2", 64}};
  if (experiment == "kernel-bounds") {
    return {{"t", 0.5}, {"pairs", 20}, {"sample_center", axis_point(6.0)}, {"sample_radius", 3.0}, {"w_value", 1.0}};
  }
  if (experiment == "perturbation-check") {
    return {{"u1", "zero"}, {"u2", "const:1"}, {"t", 0.5}, {"x", axis_point(0.0)}, {"y", axis_point(0.3)},
            {"tolerance", 1e-6}};
  }
  if (experiment == "decompose") {
    return {{"atom", nullptr}, {"n", 4},           {"tau", 4.0},           {"zeta", 0.0},
            {"omega", "holder:0.2,2"}, {"method", "telescope"}, {"holder_exponent", 0.0}, {"samples", 100000}};
  }
  if (experiment == "growth") {
    return {{"n", {4, 8, 16, 32, 64}}, {"tau", 4.0},           {"mu_stub", 1.1},
            {"mu_source", "stub"},     {"zeta", 0.0},          {"steps_per_n2", 64},
            {"reflection_samples", 10000}};
  }
  if (experiment == "approx-identity") {
    return {{"t", {0.1, 0.01, 0.001}}, {"resolution", 24}, {"potential", "zero"}, {"box_radius", 1.5}};
  }
  throw std::invalid_argument("config field 'experiment': unknown experiment '" + experiment + "'");
}

json to_json(const ExperimentConfig& cfg) {
  return {{"experiment", cfg.experiment},
          {"dim", cfg.dim},
          {"fk", io::to_json(cfg.fk)},
          {"quadrature", io::to_json(cfg.quadrature)},
          {"k_max", cfg.k_max},
          {"horizon", cfg.horizon},
          {"out", cfg.out},
          {"params", cfg.params}};
}

ExperimentConfig config_from(const json& j, ExperimentConfig base) {
  const Reader r(j, "");
  r.only({"experiment", "dim", "fk", "quadrature", "k_max", "horizon", "out", "params"});
  base.experiment = r.string("experiment", base.experiment);
  base.dim = static_cast<int>(r.integer("dim", base.dim));
  if (r.has("fk")) base.fk = io::fk_config_from(r.at("fk"), base.fk);
  if (r.has("quadrature")) base.quadrature = io::quadrature_from(r.at("quadrature"), base.quadrature);
  base.k_max = static_cast<int>(r.integer("k_max", base.k_max));
  base.horizon = r.number("horizon", base.horizon);
  base.out = r.string("out", base.out);
  if (r.has("params")) {
    if (!j.at("params").is_object()) r.fail("params", "expected an object");
    for (auto it = j.at("params").begin(); it != j.at("params").end(); ++it) base.params[it.key()] = it.value();
  }
  return base;
}

ExperimentConfig normalize(ExperimentConfig cfg) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), cfg.experiment) == names.end()) {
    throw std::invalid_argument("config field 'experiment': unknown experiment '" + cfg.experiment + "'");
  }
  if (cfg.dim < 1 || cfg.dim > kMaxDim) throw std::invalid_argument("config field 'dim': must be in [1, 8]");
  try {
    cfg.fk.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("config field 'fk': ") + e.what());
  }
  if (cfg.k_max < 2) throw std::invalid_argument("config field 'k_max': must be >= 2");
  if (!(cfg.horizon > 0.0)) throw std::invalid_argument("config field 'horizon': must be positive");

  json full = default_params(cfg.experiment, cfg.dim);
  for (auto it = cfg.params.begin(); it != cfg.params.end(); ++it) {
    const std::string field = "params." + it.key();
    if (!full.contains(it.key())) throw std::invalid_argument("config field '" + field + "': unknown field");
    const auto& def = full.at(it.key());
    const auto& v = it.value();
    bool ok = true;
    if (def.is_number_integer()) {
      ok = v.is_number_integer();
    } else if (def.is_number()) {
      ok = v.is_number();
    } else if (def.is_array()) {
      ok = v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); });
    } else if (def.is_string()) {
      ok = v.is_string() || v.is_object();
    }
    if (!ok) throw std::invalid_argument("config field '" + field + "': expected " + std::string(def.type_name()));
    full[it.key()] = v;
  }
  cfg.params = full;
  return cfg;
}

std::string git_blob_sha1(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) + std::string(1, '\0') + content;
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), md, &len, EVP_sha1(), nullptr) != 1) {
    throw std::runtime_error("SHA-1 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

std::string config_hash(const ExperimentConfig& cfg) { return git_blob_sha1(to_json(cfg).dump()); }

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

class Csv {
public:
  explicit Csv(const std::vector<std::string>& header) { line(header); }
  void line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) s_ << (i ? "," : "") << cells[i];
    s_ << '\n';
  }
  std::string str() const { return s_.str(); }

private:
  std::ostringstream s_;
};

std::vector<std::string> coord_names(const std::string& prefix, int dim) {
  std::vector<std::string> out;
  for (int i = 1; i <= dim; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

void append(std::vector<std::string>& cells, const Point& p) {
  for (int i = 0; i < p.dim(); ++i) cells.push_back(num(p[i]));
}

struct Outcome {
  std::string csv;
  json summary = json::object();
  json rows = json::array();
  bool passed = true;
};

Point point_param(const Reader& p, const std::string& key, int dim) {
  const Point x = io::point_from(p, key);
  if (x.dim() != dim) p.fail(key, "expected " + std::to_string(dim) + " coordinates");
  return x;
}

std::vector<double> split_numbers(const std::string& s, const std::string& field) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument("config field '" + field + "': cannot parse '" + item + "' as a number");
    }
  }
  if (out.empty()) throw std::invalid_argument("config field '" + field + "': empty list");
  return out;
}

/// "zero", "const:b", "example[:k]", "box:c_1,...,c_d,r,w" or a potential object.
Potential potential_param(const json& v, const std::string& field, int dim, int k_max) {
  if (v.is_object()) {
    auto u = io::potential_from(Reader(v, field));
    if (u.dim() != dim) throw std::invalid_argument("config field '" + field + "': dimension differs from dim");
    return u;
  }
  const std::string s = v.get<std::string>();
  const auto colon = s.find(':');
  const std::string kind = s.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : s.substr(colon + 1);
  if (kind == "zero") return zero_potential(dim);
  if (kind == "const") {
    const auto b = split_numbers(rest, field);
    if (b.size() != 1 || b[0] < 0.0) throw std::invalid_argument("config field '" + field + "': const needs one value >= 0");
    return constant_potential(dim, b[0]);
  }
  if (kind == "example") {
    const int k = rest.empty() ? k_max : static_cast<int>(split_numbers(rest, field).at(0));
    if (k < 2) throw std::invalid_argument("config field '" + field + "': example needs k_max >= 2");
    return example_potential(k, dim).potential;
  }
  if (kind == "box") {
    const auto a = split_numbers(rest, field);
    if (static_cast<int>(a.size()) != dim + 2) {
      throw std::invalid_argument("config field '" + field + "': box needs " + std::to_string(dim) + " center coordinates, radius, weight");
    }
    Point c(dim);
    for (int i = 0; i < dim; ++i) c[i] = a[i];
    if (!(a[dim] > 0.0) || a[dim + 1] < 0.0) throw std::invalid_argument("config field '" + field + "': box radius must be positive and weight nonnegative");
    return box_potential(Cube(c, a[dim]), a[dim + 1]);
  }
  throw std::invalid_argument("config field '" + field + "': unknown potential '" + s + "'");
}

std::vector<int> int_list(const Reader& p, const std::string& key, int lo) {
  std::vector<int> out;
  for (double v : p.numbers(key)) {
    if (v != std::floor(v) || v < lo) p.fail(key, "expected integers >= " + std::to_string(lo));
    out.push_back(static_cast<int>(v));
  }
  if (out.empty()) p.fail(key, "empty list");
  return out;
}

double positive(const Reader& p, const std::string& key) {
  const double v = p.number(key);
  if (!(v > 0.0)) p.fail(key, "must be positive");
  return v;
}

Outcome kato_check(const ExperimentConfig& cfg, const Reader&) {
  const auto ex = example_potential(cfg.k_max, cfg.dim);
  const auto rep = kato_sup_estimate(ex.potential, {}, ex.tail_majorant, cfg.fk.exec);
  std::vector<std::string> head{"label"};
  for (auto& c : coord_names("x", cfg.dim)) head.push_back(c);
  head.push_back("kato");
  Csv csv(head);
  for (const auto& probe : rep.probes) {
    std::vector<std::string> cells{probe.label};
    append(cells, probe.x);
    cells.push_back(num(probe.value));
    csv.line(cells);
  }
  Outcome o;
  o.csv = csv.str();
  o.summary = {{"sup", rep.sup}, {"argmax", rep.probes.at(rep.argmax).label},
               {"tail_majorant", rep.tail_majorant}, {"finite", rep.finite}};
  o.passed = rep.finite;
  return o;
}

Outcome omega_profile(const ExperimentConfig& cfg, const Reader& p) {
  const Point from = point_param(p, "from", cfg.dim);
  const Point to = point_param(p, "to", cfg.dim);
  const long points = p.integer("points");
  if (points < 2) p.fail("points", "must be >= 2");
  const auto v = example_potential(cfg.k_max, cfg.dim).potential;
  std::vector<std::string> head{"s"};
  for (auto& c : coord_names("x", cfg.dim)) head.push_back(c);
  for (const char* c : {"omega", "stderr", "tail_bound", "clamped"}) head.push_back(c);
  Csv csv(head);
  Outcome o;
  double lowest = 1.0;
  for (long i = 0; i < points; ++i) {
    const double s = static_cast<double>(i) / (points - 1);
    const Point x = from + (to - from) * s;
    const auto e = omega(v, x, cfg.horizon, cfg.fk, example_truncation_tail(cfg.k_max, x));
    lowest = std::min(lowest, e.value);
    std::vector<std::string> cells{num(s)};
    append(cells, x);
    for (double c : {e.value, e.std_error, e.tail_bound}) cells.push_back(num(c));
    cells.push_back(e.clamped ? "1" : "0");
    csv.line(cells);
  }
  o.csv = csv.str();
  o.summary = {{"min_omega", lowest}};
  return o;
}

Outcome oscillation(const ExperimentConfig& cfg, const Reader& p) {
  const auto ns = int_list(p, "n", 2);
  const double tau = positive(p, "tau");
  const long per_n2 = p.integer("steps_per_n2");
  if (per_n2 < 0) p.fail("steps_per_n2", "must be >= 0");
  const auto v = example_potential(cfg.k_max, cfg.dim).potential;
  OscillationOptions opt;
  opt.horizon = cfg.horizon;
  opt.example_k_max = cfg.k_max;
  Csv csv({"n", "tau", "inf_D", "inf_D_stderr", "sup_C", "sup_C_stderr", "gap", "stderr", "tail_bound",
           "significant", "conclusive", "mu", "mu_stderr"});
  Outcome o;
  bool all = true;
  for (int n : ns) {
    FKConfig fk = cfg.fk;
    if (per_n2 > 0) fk.steps = static_cast<int>(per_n2 * n * n);
    const auto row = oscillation_experiment(v, {n}, tau, fk, opt).at(0);
    all = all && row.conclusive;
    csv.line({std::to_string(n), num(tau), num(row.inf_d), num(row.inf_d_std_error), num(row.sup_c),
              num(row.sup_c_std_error), num(row.gap), num(row.gap_std_error), num(row.tail_bound),
              row.significant ? "1" : "0", row.conclusive ? "1" : "0", num(row.mu), num(row.mu_std_error)});
    o.rows.push_back({{"n", n}, {"gap", row.gap}, {"stderr", row.gap_std_error}, {"tail_bound", row.tail_bound},
                      {"conclusive", row.conclusive}, {"mu", row.mu}, {"depression_c", row.depression_c},
                      {"depression_d", row.depression_d}});
  }
  o.csv = csv.str();
  o.summary = {{"all_conclusive", all}};
  o.passed = all;
  return o;
}

Outcome kernel_bounds(const ExperimentConfig& cfg, const Reader& p) {
  const double t = positive(p, "t");
  const long pairs = p.integer("pairs");
  if (pairs < 1) p.fail("pairs", "must be >= 1");
  const Point center = point_param(p, "sample_center", cfg.dim);
  const double radius = positive(p, "sample_radius");
  const double w = p.number("w_value");
  if (w < 0.0) p.fail("w_value", "must be nonnegative");
  const Cube box(center, radius);
  const auto v = example_potential(cfg.k_max, cfg.dim).potential;
  const auto vw = v + box_potential(box, w);
  std::mt19937_64 rng(cfg.fk.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::string> head{"pair"};
  for (auto& c : coord_names("x", cfg.dim)) head.push_back(c);
  for (auto& c : coord_names("y", cfg.dim)) head.push_back(c);
  for (const char* c : {"k_VW", "k_VW_stderr", "k_V", "k_V_stderr", "free", "ordered"}) head.push_back(c);
  Csv csv(head);
  Outcome o;
  for (long i = 0; i < pairs; ++i) {
    Point x(cfg.dim), y(cfg.dim);
    for (int a = 0; a < cfg.dim; ++a) x[a] = center[a] + radius * u(rng);
    for (int a = 0; a < cfg.dim; ++a) y[a] = center[a] + radius * u(rng);
    FKConfig fk = cfg.fk;
    fk.stream = cfg.fk.stream + static_cast<std::uint64_t>(i);
    const auto k = fk_kernel_coupled({vw, v}, t, x, y, fk);
    const double free = free_kernel(t, x, y);
    const bool ordered = k[0].value <= k[1].value && k[1].value <= free;
    o.passed = o.passed && ordered;
    std::vector<std::string> cells{std::to_string(i)};
    append(cells, x);
    append(cells, y);
    for (double c : {k[0].value, k[0].std_error, k[1].value, k[1].std_error, free}) cells.push_back(num(c));
    cells.push_back(ordered ? "1" : "0");
    csv.line(cells);
  }
  o.csv = csv.str();
  o.summary = {{"all_ordered", o.passed}, {"t", t}};
  return o;
}

Outcome perturbation_check(const ExperimentConfig& cfg, const Reader& p) {
  const auto u1 = potential_param(p.raw().at("u1"), "params.u1", cfg.dim, cfg.k_max);
  const auto u2 = potential_param(p.raw().at("u2"), "params.u2", cfg.dim, cfg.k_max);
  const double t = positive(p, "t");
  const Point x = point_param(p, "x", cfg.dim);
  const Point y = point_param(p, "y", cfg.dim);
  const double tol = p.number("tolerance");
  const auto r = perturbation_residual(u1, u2, t, x, y, cfg.fk, cfg.quadrature);
  Outcome o;
  o.passed = r.residual <= std::max(tol, 3.0 * r.sigma);
  Csv csv({"t", "lhs", "lhs_stderr", "rhs", "rhs_stderr", "residual", "sigma", "pass"});
  csv.line({num(t), num(r.lhs), num(r.lhs_std_error), num(r.rhs), num(r.rhs_std_error), num(r.residual),
            num(r.sigma), o.passed ? "1" : "0"});
  o.csv = csv.str();
  o.summary = {{"residual", r.residual}, {"sigma", r.sigma}, {"pass", o.passed}};
  return o;
}

Outcome decompose(const ExperimentConfig& cfg, const Reader& p) {
  const int dim = cfg.dim;
  const std::string omega_spec = p.string("omega");
  const bool example = p.raw().at("atom").is_null();
  Atom atom;
  Point omega_center(dim);
  double omega_scale = 2.0 * std::sqrt(static_cast<double>(dim));
  int n = 0;
  if (example) {
    n = static_cast<int>(p.integer("n"));
    if (n < 2) p.fail("n", "must be >= 2");
    omega_center = example_center(n, dim);
  } else {
    atom = io::atom_from(Reader(p.raw().at("atom"), "params.atom"));
    if (atom.support.dim() != dim) p.fail("atom", "dimension differs from dim");
    omega_center = atom.support.center;
    omega_scale = atom.host.diameter();
  }

  std::unique_ptr<OmegaField> field;
  if (omega_spec == "unit") {
    field = std::make_unique<ExactOmega>(unit_omega());
  } else if (omega_spec.rfind("holder:", 0) == 0) {
    const auto a = split_numbers(omega_spec.substr(7), "params.omega");
    if (a.size() != 2) p.fail("omega", "holder needs eps,lambda");
    try {
      field = std::make_unique<ExactOmega>(holder_stub_omega(omega_center, omega_scale, a[0], a[1]));
    } catch (const std::invalid_argument& e) {
      p.fail("omega", e.what());
    }
  } else if (omega_spec == "potential") {
    field = std::make_unique<MemoOmega>(example_potential(cfg.k_max, dim).potential, cfg.horizon, cfg.fk, cfg.k_max);
  } else {
    p.fail("omega", "expected 'unit', 'holder:eps,lambda' or 'potential'");
  }

  CubeFamily family;
  json built = nullptr;
  if (example) {
    const auto ex = build_example_atom(n, positive(p, "tau"), p.number("zeta"), *field, dim);
    atom = ex.atom;
    family = even_unit_family(Cube(atom.host.center, 3.0));
    built = {{"n", n}, {"mu", ex.mu}, {"mu_stderr", ex.mu_std_error}, {"zeta", ex.zeta},
             {"delta_hat", ex.delta_hat}, {"kappa", ex.kappa}};
  } else {
    family.cubes = {atom.host};
    family.bbox = atom.host;
  }
  const auto report = validate(atom, family, *field);
  Outcome o;
  o.summary = {{"atom", io::to_json(atom)},
               {"example", built},
               {"validation",
                {{"size_ok", report.size_ok}, {"support_ok", report.support_ok}, {"cancel_ok", report.cancel_ok},
                 {"sup_norm", report.sup_norm}, {"size_bound", report.size_bound},
                 {"cancellation", report.cancellation}, {"cancellation_stderr", report.cancellation_std_error}}}};
  std::vector<std::string> head{"j", "lambda", "kind"};
  for (auto& c : coord_names("c", dim)) head.push_back(c);
  for (const char* c : {"radius", "sup_norm", "integral"}) head.push_back(c);
  Csv csv(head);
  if (!report.support_ok) {
    o.passed = false;
    o.summary["decomposition"] = nullptr;
    o.summary["note"] = "support is not inside the double dilate of the host; no decomposition";
    o.csv = csv.str();
    return o;
  }

  const std::string method = p.string("method");
  AtomicDecomposition dec;
  if (method == "split") {
    dec = split_omega_q_atom(atom, atom.host, family.theta);
  } else if (method == "telescope") {
    const auto res = telescope(atom, atom.host, field.get(), p.number("holder_exponent"), family.theta);
    dec = res.decomposition;
    json chain = json::array();
    for (const auto& g : res.chain) chain.push_back(io::to_json(g));
    o.summary["telescope"] = {{"N", res.N}, {"t", res.t}, {"chain", chain}, {"collapsed", res.collapsed}};
  } else {
    p.fail("method", "expected 'split' or 'telescope'");
  }

  IndicatorCombination diff = dec.combined(dim);
  diff.add(-1.0, atom.f);
  const double exact_error = diff.sup_norm();
  const long samples = p.integer("samples");
  if (samples < 0) p.fail("samples", "must be >= 0");
  const Cube box = dilate(atom.host, 2, family.theta);
  std::mt19937_64 rng(cfg.fk.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double sampled_error = 0.0;
  for (long s = 0; s < samples; ++s) {
    Point x(dim);
    for (int i = 0; i < dim; ++i) x[i] = box.center[i] + box.radius * u(rng);
    sampled_error = std::max(sampled_error, std::abs(dec(x) - atom.f(x)));
  }
  std::size_t j = 0;
  for (const auto& e : dec.entries) {
    std::vector<std::string> cells{std::to_string(j++), num(e.lambda), to_string(e.atom.kind)};
    append(cells, e.atom.support.center);
    for (double c : {e.atom.support.radius, e.atom.f.sup_norm(), e.atom.f.integral()}) cells.push_back(num(c));
    csv.line(cells);
  }
  o.csv = csv.str();
  o.summary["decomposition"] = io::to_json(dec);
  o.summary["reconstruction_error"] = exact_error;
  o.summary["sampled_reconstruction_error"] = sampled_error;
  o.passed = exact_error <= 1e-12 * std::max(1.0, atom.f.sup_norm());
  return o;
}

Outcome growth(const ExperimentConfig& cfg, const Reader& p) {
  const auto ns = int_list(p, "n", 2);
  GrowthOptions opt;
  opt.tau = positive(p, "tau");
  opt.zeta = p.number("zeta");
  opt.exec = cfg.fk.exec;
  const std::string source = p.string("mu_source");
  const double stub = p.number("mu_stub");
  const long per_n2 = p.integer("steps_per_n2");
  const long refl = p.integer("reflection_samples");
  if (refl < 0) p.fail("reflection_samples", "must be >= 0");
  std::function<MuValue(int)> mu_of_n;
  if (source == "stub") {
    if (!(stub > 0.0)) p.fail("mu_stub", "must be positive");
    mu_of_n = [stub](int) { return MuValue{stub, 0.0}; };
  } else if (source == "potential") {
    const auto v = example_potential(cfg.k_max, cfg.dim).potential;
    mu_of_n = [&, v](int n) {
      FKConfig fk = cfg.fk;
      if (per_n2 > 0) fk.steps = static_cast<int>(per_n2 * n * n);
      const MemoOmega w(v, cfg.horizon, fk, cfg.k_max);
      const auto ex = build_example_atom(n, opt.tau, 0.0, w, cfg.dim);
      return MuValue{ex.mu, ex.mu_std_error};
    };
  } else {
    p.fail("mu_source", "expected 'stub' or 'potential'");
  }
  const auto res = growth_experiment(ns, mu_of_n, opt, cfg.dim);
  Csv csv({"n", "L_n", "alpha_fit", "beta_fit", "ci_low", "ci_high", "mu", "mu_stderr", "mu_uncertain", "nodes",
           "time_points", "time_delta", "space_delta"});
  Outcome o;
  for (const auto& r : res.rows) {
    csv.line({std::to_string(r.n), num(r.L), num(res.fit.alpha), num(res.fit.beta), num(res.fit.ci_low),
              num(res.fit.ci_high), num(r.mu), num(r.mu_std_error), r.mu_uncertain ? "1" : "0",
              std::to_string(r.nodes), std::to_string(r.time_points), num(r.time_delta), num(r.space_delta)});
  }
  std::size_t violations = 0;
  for (int n : ns) {
    if (refl > 0) violations += reflection_check(n, opt.tau, static_cast<std::size_t>(refl), cfg.fk.seed + n).violations;
  }
  o.csv = csv.str();
  o.summary = {{"alpha", res.fit.alpha}, {"alpha_stderr", res.fit.alpha_std_error},
               {"ci_low", res.fit.ci_low}, {"ci_high", res.fit.ci_high}, {"increasing", res.increasing},
               {"growth_detected", res.growth_detected}, {"reflection_samples_per_n", refl},
               {"reflection_violations", violations}};
  o.passed = violations == 0;
  return o;
}

Outcome approx_identity(const ExperimentConfig& cfg, const Reader& p) {
  const auto times = p.numbers("t");
  for (double t : times) {
    if (!(t > 0.0)) p.fail("t", "times must be positive");
  }
  const long res = p.integer("resolution");
  if (res < 2) p.fail("resolution", "must be >= 2");
  const double r = p.number("box_radius");
  if (!(r > 1.0)) p.fail("box_radius", "must exceed 1");
  const auto u = potential_param(p.raw().at("potential"), "params.potential", cfg.dim, cfg.k_max);
  Point lo(cfg.dim), hi(cfg.dim);
  for (int i = 0; i < cfg.dim; ++i) {
    lo[i] = -r;
    hi[i] = r;
  }
  GridFunction f(CellGrid::uniform(lo, hi, static_cast<int>(res)));
  const Cube q(Point(cfg.dim), 1.0);
  for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = q.contains(f.grid.cell_center(i)) ? 1.0 : 0.0;
  Csv csv({"t", "sup_error", "sup_error_near_jumps", "interior_cells", "jump_cells", "max_stderr", "method"});
  Outcome o;
  for (double t : times) {
    const auto rep = approx_identity_error(u, f, t, cfg.fk);
    const char* method = rep.method == Method::closed_form ? "closed_form" : "monte_carlo";
    csv.line({num(t), num(rep.sup_error), num(rep.sup_error_near_jumps), std::to_string(rep.interior_cells),
              std::to_string(rep.jump_cells), num(rep.max_std_error), method});
    o.rows.push_back({{"t", t}, {"sup_error", rep.sup_error}});
  }
  o.csv = csv.str();
  return o;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
}

}  // namespace

RunResult run(const ExperimentConfig& cfg, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const Reader params(cfg.params, "params");
  Outcome o;
  const std::string& e = cfg.experiment;
  if (e == "kato-check") {
    o = kato_check(cfg, params);
  } else if (e == "omega-profile") {
    o = omega_profile(cfg, params);
  } else if (e == "oscillation") {
    o = oscillation(cfg, params);
  } else if (e == "kernel-bounds") {
    o = kernel_bounds(cfg, params);
  } else if (e == "perturbation-check") {
    o = perturbation_check(cfg, params);
  } else if (e == "decompose") {
    o = decompose(cfg, params);
  } else if (e == "growth") {
    o = growth(cfg, params);
  } else if (e == "approx-identity") {
    o = approx_identity(cfg, params);
  } else {
    throw std::invalid_argument("config field 'experiment': unknown experiment '" + e + "'");
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const fs::path dir = cfg.out.empty() ? fs::path(".") : fs::path(cfg.out);
  fs::create_directories(dir);
  const std::string hash = config_hash(cfg);
  const json result = {{"experiment", e}, {"config_hash", hash}, {"passed", o.passed}, {"summary", o.summary},
                       {"rows", o.rows}};
  const std::string result_text = result.dump(2) + "\n";
  const std::string csv_name = e + ".csv";
  const std::string json_name = e + ".json";
  write_file(dir / csv_name, o.csv);
  write_file(dir / json_name, result_text);
  const json manifest = {{"experiment", e},
                         {"config", to_json(cfg)},
                         {"config_hash", hash},
                         {"outputs",
                          {{{"file", csv_name}, {"sha1", git_blob_sha1(o.csv)}},
                           {{"file", json_name}, {"sha1", git_blob_sha1(result_text)}}}},
                         {"wall_time_seconds", wall}};
  const std::string manifest_name = e + ".manifest.json";
  write_file(dir / manifest_name, manifest.dump(2) + "\n");

  log << e << ": " << (o.passed ? "ok" : "check failed") << ", config " << hash.substr(0, 12) << ", " << wall
      << " s, wrote " << (dir / csv_name).string() << "\n";
  RunResult rr;
  rr.files = {(dir / csv_name).string(), (dir / json_name).string(), (dir / manifest_name).string()};
  rr.wall_seconds = wall;
  rr.passed = o.passed;
  return rr;
}

namespace {

enum class FlagKind { numbers, number, integer, text, json_file };

struct ParamFlag {
  const char* flag;
  const char* key;
  FlagKind kind;
  const char* help;
};

std::vector<ParamFlag> param_flags(const std::string& e) {
  using K = FlagKind;
  if (e == "omega-profile") {
    return {{"--from", "from", K::numbers, "start point, comma separated"},
            {"--to", "to", K::numbers, "end point, comma separated"},
            {"--points", "points", K::integer, "number of points on the segment"}};
  }
  if (e == "oscillation") {
    return {{"--n", "n", K::numbers, "list of n"},
            {"--tau", "tau", K::number, "separation of D_n from C_n in units of 1/n"},
            {"--steps-per-n2", "steps_per_n2", K::integer, "base steps per unit time divided by n^2 (0: use --steps)"}};
  }
  if (e == "kernel-bounds") {
    return {{"--t", "t", K::number, "time"},
            {"--pairs", "pairs", K::integer, "number of random point pairs"},
            {"--sample-center", "sample_center", K::numbers, "center of the sampling box (also the W box)"},
            {"--sample-radius", "sample_radius", K::number, "radius of the sampling box"},
            {"--w-value", "w_value", K::number, "value of W on the box"}};
  }
  if (e == "perturbation-check") {
    return {{"--u1", "u1", K::text, "potential: zero | const:b | example[:k] | box:c..,r,w"},
            {"--u2", "u2", K::text, "potential added to u1"},
            {"--t", "t", K::number, "time"},
            {"--x", "x", K::numbers, "first point"},
            {"--y", "y", K::numbers, "second point"},
            {"--tolerance", "tolerance", K::number, "absolute residual tolerance"}};
  }
  if (e == "decompose") {
    return {{"--atom", "atom", K::json_file, "atom JSON file (default: the example atom)"},
            {"--n", "n", K::integer, "example atom index"},
            {"--tau", "tau", K::number, "example atom separation"},
            {"--zeta", "zeta", K::number, "example atom scale (0: automatic)"},
            {"--omega", "omega", K::text, "unit | holder:eps,lambda | potential"},
            {"--method", "method", K::text, "split | telescope"},
            {"--holder-exponent", "holder_exponent", K::number, "exponent for the t_0 ratio report"},
            {"--samples", "samples", K::integer, "random points for the reconstruction check"}};
  }
  if (e == "growth") {
    return {{"--n", "n", K::numbers, "list of n"},
            {"--tau", "tau", K::number, "separation of D_n"},
            {"--mu-stub", "mu_stub", K::number, "fixed mu_n"},
            {"--mu-source", "mu_source", K::text, "stub | potential"},
            {"--zeta", "zeta", K::number, "atom scale (0: automatic)"},
            {"--steps-per-n2", "steps_per_n2", K::integer, "steps for the potential-backed mu"},
            {"--reflection-samples", "reflection_samples", K::integer, "samples per n for the A_1 >= 0 check"}};
  }
  if (e == "approx-identity") {
    return {{"--t", "t", K::numbers, "list of times"},
            {"--resolution", "resolution", K::integer, "cells per axis"},
            {"--potential", "potential", K::text, "potential: zero | const:b | example[:k] | box:..."},
            {"--box-radius", "box_radius", K::number, "half width of the grid box"}};
  }
  return {};
}

json read_json_file(const std::string& path, const std::string& field) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("config field '" + field + "': cannot open '" + path + "'");
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config field '" + field + "': invalid JSON in '" + path + "': " + e.what());
  }
}

}  // namespace

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"hardylab: numerical experiments on heat semigroups of Schroedinger operators"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int dim = 3, k_max = 12;
  long paths = 0, steps = 0, node_paths = 0;
  std::uint64_t seed = 0;
  double horizon = 0.0;
  bool serial = false;
  std::map<std::string, std::string> raw;
  std::map<std::string, CLI::Option*> opts;

  for (const auto& name : experiment_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file");
    opts[name + "/out"] = sub->add_option("--out", out_dir, "output directory (default $HARDYLAB_OUT or .)");
    opts[name + "/dim"] = sub->add_option("--dim", dim, "dimension");
    opts[name + "/paths"] = sub->add_option("--paths", paths, "Monte-Carlo paths");
    opts[name + "/steps"] = sub->add_option("--steps", steps, "time steps per unit time");
    opts[name + "/seed"] = sub->add_option("--seed", seed, "random seed");
    opts[name + "/kmax"] = sub->add_option("--kmax", k_max, "truncation of the example potential");
    opts[name + "/horizon"] = sub->add_option("--horizon", horizon, "time horizon T for omega");
    opts[name + "/node-paths"] = sub->add_option("--node-paths", node_paths, "bridges per quadrature node");
    sub->add_flag("--serial", serial, "run the serial reference kernels");
    for (const auto& pf : param_flags(name)) {
      opts[name + "/" + pf.key] = sub->add_option(pf.flag, raw[name + "/" + pf.key], pf.help);
    }
  }

  if (argc > 1 && argv[1][0] != '-') {
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), std::string(argv[1])) == names.end()) {
      err << "hardylab: unknown experiment '" << argv[1] << "'; expected one of";
      for (const auto& n : names) err << " " << n;
      err << "\n";
      return 2;
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    ExperimentConfig cfg;
    cfg.experiment = name;
    if (!config_path.empty()) {
      const json j = read_json_file(config_path, "--config");
      if (j.is_object() && j.contains("experiment") && j.at("experiment") != name) {
        throw std::invalid_argument("config field 'experiment': file is for '" +
                                    j.at("experiment").get<std::string>() + "', not '" + name + "'");
      }
      cfg = config_from(j, cfg);
    }
    auto given = [&](const std::string& key) { return opts.at(name + "/" + key)->count() > 0; };
    if (given("out")) cfg.out = out_dir;
    if (given("dim")) cfg.dim = dim;
    if (given("paths")) {
      if (paths < 1) throw std::invalid_argument("config field 'fk.paths': must be a positive integer");
      cfg.fk.paths = static_cast<std::size_t>(paths);
    }
    if (given("steps")) {
      if (steps < 1) throw std::invalid_argument("config field 'fk.steps': must be a positive integer");
      cfg.fk.steps = static_cast<int>(steps);
    }
    if (given("seed")) cfg.fk.seed = seed;
    if (given("kmax")) cfg.k_max = k_max;
    if (given("horizon")) cfg.horizon = horizon;
    if (given("node-paths")) {
      if (node_paths < 1) throw std::invalid_argument("config field 'quadrature.node_paths': must be a positive integer");
      cfg.quadrature.node_paths = static_cast<std::size_t>(node_paths);
    }
    if (serial) cfg.fk.exec = Exec::serial;
    for (const auto& pf : param_flags(name)) {
      if (!given(pf.key)) continue;
      const std::string& v = raw.at(name + "/" + pf.key);
      const std::string field = std::string("params.") + pf.key;
      switch (pf.kind) {
        case FlagKind::numbers: cfg.params[pf.key] = split_numbers(v, field); break;
        case FlagKind::number: cfg.params[pf.key] = split_numbers(v, field).at(0); break;
        case FlagKind::integer: {
          const double d = split_numbers(v, field).at(0);
          if (d != std::floor(d)) throw std::invalid_argument("config field '" + field + "': expected an integer");
          cfg.params[pf.key] = static_cast<long>(d);
          break;
        }
        case FlagKind::text: cfg.params[pf.key] = v; break;
        case FlagKind::json_file: cfg.params[pf.key] = read_json_file(v, field); break;
      }
    }
    if (cfg.out.empty()) {
      const char* env = std::getenv("HARDYLAB_OUT");
      cfg.out = env && *env ? env : ".";
    }
    cfg = normalize(cfg);
    const auto rr = run(cfg, out);
    return rr.passed ? 0 : 3;
  } catch (const std::invalid_argument& e) {
    err << "hardylab: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "hardylab: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace hardy::cli
