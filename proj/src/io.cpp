#include "hardy/io.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hardy::io {

Reader::Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
  if (!j_.is_object()) {
    throw std::invalid_argument("config field '" + (path_.empty() ? std::string("<root>") : path_) +
                                "': expected an object");
  }
}

std::string Reader::field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

void Reader::fail(const std::string& key, const std::string& what) const {
  throw std::invalid_argument("config field '" + field(key) + "': " + what);
}

bool Reader::has(const std::string& key) const { return j_.contains(key); }

Reader Reader::at(const std::string& key) const {
  if (!has(key)) fail(key, "missing");
  if (!j_.at(key).is_object()) fail(key, "expected an object");
  return Reader(j_.at(key), field(key));
}

double Reader::number(const std::string& key) const {
  if (!has(key)) fail(key, "missing");
  const auto& v = j_.at(key);
  if (!v.is_number()) fail(key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(key, "expected a finite number");
  return x;
}

double Reader::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

long Reader::integer(const std::string& key) const {
  if (!has(key)) fail(key, "missing");
  const auto& v = j_.at(key);
  if (!v.is_number_integer()) fail(key, "expected an integer");
  return v.get<long>();
}

long Reader::integer(const std::string& key, long fallback) const {
  return has(key) ? integer(key) : fallback;
}

bool Reader::boolean(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto& v = j_.at(key);
  if (!v.is_boolean()) fail(key, "expected true or false");
  return v.get<bool>();
}

std::string Reader::string(const std::string& key) const {
  if (!has(key)) fail(key, "missing");
  const auto& v = j_.at(key);
  if (!v.is_string()) fail(key, "expected a string");
  return v.get<std::string>();
}

std::string Reader::string(const std::string& key, const std::string& fallback) const {
  return has(key) ? string(key) : fallback;
}

std::vector<double> Reader::numbers(const std::string& key) const {
  if (!has(key)) fail(key, "missing");
  const auto& v = j_.at(key);
  if (!v.is_array()) fail(key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) fail(key, "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

void Reader::only(std::initializer_list<const char*> allowed) const {
  for (auto it = j_.begin(); it != j_.end(); ++it) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; });
    if (!ok) fail(it.key(), "unknown field");
  }
}

json to_json(const Point& p) {
  json a = json::array();
  for (int i = 0; i < p.dim(); ++i) a.push_back(p[i]);
  return a;
}

Point point_from(const Reader& r, const std::string& key) {
  const auto v = r.numbers(key);
  if (v.empty() || v.size() > static_cast<std::size_t>(kMaxDim)) {
    r.fail(key, "expected 1 to " + std::to_string(kMaxDim) + " coordinates");
  }
  Point p(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) p[static_cast<int>(i)] = v[i];
  return p;
}

json to_json(const Cube& q) { return {{"center", to_json(q.center)}, {"radius", q.radius}}; }

Cube cube_from(const Reader& r) {
  r.only({"center", "radius"});
  const double radius = r.number("radius");
  if (!(radius > 0.0)) r.fail("radius", "must be positive");
  return Cube(point_from(r, "center"), radius);
}

namespace {

template <class F>
void each_object(const Reader& r, const std::string& key, F&& f) {
  if (!r.has(key)) r.fail(key, "missing");
  const auto& arr = r.raw().at(key);
  if (!arr.is_array()) r.fail(key, "expected an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    f(Reader(arr[i], r.field(key) + "[" + std::to_string(i) + "]"));
  }
}

}  // namespace

json to_json(const CubeFamily& f) {
  json cubes = json::array();
  for (const auto& q : f.cubes) cubes.push_back(to_json(q));
  return {{"theta", f.theta}, {"scale_constant", f.scale_constant}, {"bbox", to_json(f.bbox)},
          {"cubes", cubes}};
}

CubeFamily family_from(const Reader& r) {
  r.only({"theta", "scale_constant", "bbox", "cubes"});
  CubeFamily f;
  f.theta = r.number("theta", 0.125);
  if (!(f.theta > 0.0)) r.fail("theta", "must be positive");
  f.scale_constant = r.number("scale_constant", 1.0);
  f.bbox = cube_from(r.at("bbox"));
  each_object(r, "cubes", [&](const Reader& c) {
    f.cubes.push_back(cube_from(c));
    if (f.cubes.back().dim() != f.bbox.dim()) c.fail("center", "dimension differs from bbox");
  });
  return f;
}

json to_json(const Potential& v) {
  json terms = json::array();
  for (const auto& t : v.terms()) {
    terms.push_back({{"weight", t.weight}, {"center", to_json(t.cube.center)}, {"radius", t.cube.radius}});
  }
  return {{"dim", v.dim()}, {"background", v.background()}, {"terms", terms}};
}

Potential potential_from(const Reader& r) {
  r.only({"dim", "background", "terms"});
  const double b = r.number("background", 0.0);
  if (b < 0.0) r.fail("background", "must be nonnegative");
  std::vector<std::pair<double, Cube>> terms;
  if (r.has("terms")) {
    each_object(r, "terms", [&](const Reader& t) {
      t.only({"weight", "center", "radius"});
      const double w = t.number("weight");
      if (w < 0.0) t.fail("weight", "must be nonnegative");
      const double radius = t.number("radius");
      if (!(radius > 0.0)) t.fail("radius", "must be positive");
      terms.emplace_back(w, Cube(point_from(t, "center"), radius));
    });
  }
  int dim = 0;
  if (r.has("dim")) {
    dim = static_cast<int>(r.integer("dim"));
    if (dim < 1 || dim > kMaxDim) r.fail("dim", "must be in [1, " + std::to_string(kMaxDim) + "]");
  } else if (!terms.empty()) {
    dim = terms.front().second.dim();
  } else {
    r.fail("dim", "missing (required when there are no terms)");
  }
  Potential v(dim, b);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].second.dim() != dim) {
      r.fail("terms[" + std::to_string(i) + "].center", "dimension differs from dim");
    }
    v.add_term(terms[i].first, terms[i].second);
  }
  return v;
}

json to_json(const FKConfig& cfg) {
  return {{"paths", cfg.paths},
          {"steps", cfg.steps},
          {"seed", cfg.seed},
          {"stream", cfg.stream},
          {"adaptive", cfg.adaptive},
          {"guard_sigmas", cfg.guard_sigmas},
          {"max_step", cfg.max_step},
          {"reverse_time", cfg.reverse_time},
          {"exec", cfg.exec == Exec::parallel ? "parallel" : "serial"}};
}

FKConfig fk_config_from(const Reader& r, FKConfig base) {
  r.only({"paths", "steps", "seed", "stream", "adaptive", "guard_sigmas", "max_step", "reverse_time", "exec"});
  auto positive = [&](const char* key, long fallback) {
    const long v = r.integer(key, fallback);
    if (v < 1) r.fail(key, "must be a positive integer");
    return v;
  };
  auto unsigned_of = [&](const char* key, std::uint64_t fallback) -> std::uint64_t {
    if (!r.has(key)) return fallback;
    const auto& v = r.raw().at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      r.fail(key, "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  };
  base.paths = static_cast<std::size_t>(positive("paths", static_cast<long>(base.paths)));
  base.steps = static_cast<int>(positive("steps", base.steps));
  base.seed = unsigned_of("seed", base.seed);
  base.stream = unsigned_of("stream", base.stream);
  base.adaptive = r.boolean("adaptive", base.adaptive);
  base.guard_sigmas = r.number("guard_sigmas", base.guard_sigmas);
  base.max_step = r.number("max_step", base.max_step);
  base.reverse_time = r.boolean("reverse_time", base.reverse_time);
  const auto exec = r.string("exec", base.exec == Exec::parallel ? "parallel" : "serial");
  if (exec == "parallel") {
    base.exec = Exec::parallel;
  } else if (exec == "serial") {
    base.exec = Exec::serial;
  } else {
    r.fail("exec", "expected 'parallel' or 'serial'");
  }
  try {
    base.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("config field '" + r.path() + "': " + e.what());
  }
  return base;
}

json to_json(const PerturbationQuadrature& q) {
  return {{"s_nodes", q.s_nodes}, {"z_nodes", q.z_nodes}, {"hermite_nodes", q.hermite_nodes},
          {"node_paths", q.node_paths}};
}

PerturbationQuadrature quadrature_from(const Reader& r, PerturbationQuadrature base) {
  r.only({"s_nodes", "z_nodes", "hermite_nodes", "node_paths"});
  auto positive = [&](const char* key, long fallback) {
    const long v = r.integer(key, fallback);
    if (v < 1) r.fail(key, "must be a positive integer");
    return v;
  };
  base.s_nodes = static_cast<int>(positive("s_nodes", base.s_nodes));
  base.z_nodes = static_cast<int>(positive("z_nodes", base.z_nodes));
  base.hermite_nodes = static_cast<int>(positive("hermite_nodes", base.hermite_nodes));
  base.node_paths = static_cast<std::size_t>(positive("node_paths", static_cast<long>(base.node_paths)));
  return base;
}

json to_json(const IndicatorCombination& f) {
  json terms = json::array();
  for (const auto& t : f.terms()) {
    terms.push_back({{"coef", t.coef}, {"center", to_json(t.cube.center)}, {"radius", t.cube.radius}});
  }
  return terms;
}

IndicatorCombination combination_from(const Reader& r, int dim) {
  IndicatorCombination f(dim);
  each_object(r, "terms", [&](const Reader& t) {
    t.only({"coef", "center", "radius"});
    const double radius = t.number("radius");
    if (!(radius > 0.0)) t.fail("radius", "must be positive");
    const Cube q(point_from(t, "center"), radius);
    if (q.dim() != dim) t.fail("center", "dimension differs from the support cube");
    f.add(t.number("coef"), q);
  });
  return f;
}

json to_json(const Atom& a) {
  return {{"kind", to_string(a.kind)}, {"support", to_json(a.support)}, {"host", to_json(a.host)},
          {"terms", to_json(a.f)}};
}

Atom atom_from(const Reader& r) {
  r.only({"kind", "support", "host", "terms"});
  Atom a;
  try {
    a.kind = atom_kind_from_string(r.string("kind"));
  } catch (const std::invalid_argument& e) {
    r.fail("kind", e.what());
  }
  a.support = cube_from(r.at("support"));
  a.host = r.has("host") ? cube_from(r.at("host")) : a.support;
  a.f = combination_from(r, a.support.dim());
  return a;
}

json to_json(const AtomicDecomposition& d) {
  json entries = json::array();
  for (const auto& e : d.entries) entries.push_back({{"lambda", e.lambda}, {"atom", to_json(e.atom)}});
  return {{"entries", entries}, {"total", d.total()}};
}

AtomicDecomposition decomposition_from(const Reader& r) {
  r.only({"entries", "total"});
  AtomicDecomposition d;
  each_object(r, "entries", [&](const Reader& e) {
    e.only({"lambda", "atom"});
    d.entries.push_back({e.number("lambda"), atom_from(e.at("atom"))});
  });
  return d;
}

}  // namespace hardy::io
