#pragma once

#include <initializer_list>
#include <string>

#include <json.hpp>

#include "hardy/atoms.hpp"
#include "hardy/geometry.hpp"
#include "hardy/potentials.hpp"
#include "hardy/semigroup.hpp"

namespace hardy::io {

using nlohmann::json;

/// Field access that reports the dotted path of a missing or mistyped field in
/// a std::invalid_argument.
class Reader {
public:
  Reader(const json& j, std::string path);

  bool has(const std::string& key) const;
  Reader at(const std::string& key) const;
  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }
  std::string field(const std::string& key) const;

  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  long integer(const std::string& key) const;
  long integer(const std::string& key, long fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::string string(const std::string& key) const;
  std::string string(const std::string& key, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& key) const;

  /// Throws on any key outside `allowed`.
  void only(std::initializer_list<const char*> allowed) const;
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

private:
  const json& j_;
  std::string path_;
};

json to_json(const Point& p);
Point point_from(const Reader& r, const std::string& key);

json to_json(const Cube& q);
Cube cube_from(const Reader& r);

json to_json(const CubeFamily& f);
CubeFamily family_from(const Reader& r);

/// {dim, background, terms: [{weight, center, radius}]}.
json to_json(const Potential& v);
Potential potential_from(const Reader& r);

json to_json(const FKConfig& cfg);
/// Missing keys keep the values of `base`.
FKConfig fk_config_from(const Reader& r, FKConfig base = {});

json to_json(const PerturbationQuadrature& q);
PerturbationQuadrature quadrature_from(const Reader& r, PerturbationQuadrature base = {});

json to_json(const IndicatorCombination& f);
IndicatorCombination combination_from(const Reader& r, int dim);

/// {kind, support, host, terms}.
json to_json(const Atom& a);
Atom atom_from(const Reader& r);

json to_json(const AtomicDecomposition& d);
AtomicDecomposition decomposition_from(const Reader& r);

}  // namespace hardy::io
