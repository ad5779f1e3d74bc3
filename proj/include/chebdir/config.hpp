#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <complex>
#include <functional>
#include <istream>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "chebdir/errors.hpp"
#include "chebdir/index_order.hpp"
#include "chebdir/sets.hpp"

namespace chebdir {

/// section -> key -> raw value
using ConfigSections = std::map<std::string, std::map<std::string, std::string>>;

inline ConfigSections read_ini(std::istream& is) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(fmt::format("config line {}: {}", e.line(), e.message()));
  }
  ConfigSections out;
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) throw ConfigError(fmt::format("config: key '{}' outside of any [section]", section));
    out[section];
    for (const auto& [key, value] : body) out[section][key] = value.get_value<std::string>();
  }
  return out;
}

inline ConfigSections load_ini(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return read_ini(in);
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (s.empty() || ec != std::errc{} || ptr != last) throw ConfigError(fmt::format("{}: '{}' is not a number", what, s));
  return v;
}

inline long long parse_int(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) throw ConfigError(fmt::format("{}: '{}' is not an integer", what, s));
  return v;
}

inline bool parse_bool(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw ConfigError(fmt::format("{}: '{}' is not a boolean", what, s));
}

/// Accepts "a", "bi", "a+bi", "a-bi", "i", "-i" with decimal or exponent notation.
inline cplx parse_complex(std::string_view text, std::string_view what = "complex") {
  std::string s;
  for (char c : text)
    if (c != ' ' && c != '\t') s += c;
  if (s.empty()) throw ConfigError(fmt::format("{}: empty value", what));
  if (s.back() != 'i' && s.back() != 'j') return {parse_double(s, what), 0.0};
  s.pop_back();
  std::size_t split_at = std::string::npos;
  for (std::size_t k = s.size(); k-- > 1;)
    if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
      split_at = k;
      break;
    }
  auto imag_of = [&](const std::string& t) {
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    return parse_double(t, what);
  };
  if (split_at == std::string::npos) return {0.0, imag_of(s)};
  return {parse_double(s.substr(0, split_at), what), imag_of(s.substr(split_at))};
}

inline std::vector<double> parse_doubles(std::string_view text, std::string_view what, char sep = ':') {
  std::vector<double> out;
  for (const auto& part : split(text, sep)) out.push_back(parse_double(part, what));
  return out;
}

inline std::vector<cplx> parse_complexes(std::string_view text, std::string_view what, char sep = ':') {
  std::vector<cplx> out;
  for (const auto& part : split(text, sep)) out.push_back(parse_complex(part, what));
  return out;
}

/// "(3,2)" or "3:2".
inline MultiIndex parse_multiindex(std::string_view text) {
  std::string s = trim(text);
  char sep = ':';
  if (!s.empty() && s.front() == '(') {
    if (s.back() != ')') throw ConfigError("multi-index: missing ')' in '" + s + "'");
    s = s.substr(1, s.size() - 2);
    sep = ',';
  }
  std::vector<int> e;
  for (const auto& part : split(s, sep)) {
    const auto v = parse_int(part, "multi-index");
    if (v < 0) throw ConfigError("multi-index exponents must be >= 0");
    e.push_back(static_cast<int>(v));
  }
  return MultiIndex(std::move(e));
}

inline std::vector<MultiIndex> parse_multiindex_list(std::string_view text) {
  std::vector<MultiIndex> out;
  for (const auto& part : split(text, ';'))
    if (!part.empty()) out.push_back(parse_multiindex(part));
  return out;
}

/// "k=v,k=v"
inline std::map<std::string, std::string> parse_params(std::string_view text) {
  std::map<std::string, std::string> out;
  if (trim(text).empty()) return out;
  for (const auto& item : split(text, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("params: expected key=value, got '" + item + "'");
    out[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
  }
  return out;
}

/// Builds a set model from its name and parameters; lists use ':' (radii=1:2, centers=0.3:0.2i).
inline SetModel make_model(const std::string& name, const std::map<std::string, std::string>& params) {
  std::set<std::string> allowed;
  auto get = [&](const std::string& key) -> const std::string* {
    allowed.insert(key);
    const auto it = params.find(key);
    return it == params.end() ? nullptr : &it->second;
  };
  auto need = [&](const std::string& key) -> const std::string& {
    const auto* v = get(key);
    if (!v) throw ConfigError(fmt::format("model {}: missing parameter '{}'", name, key));
    return *v;
  };
  SetModel model;
  try {
    if (name == "product_discs") {
      ProductDiscs m;
      m.radii = parse_doubles(need("radii"), "radii");
      if (const auto* c = get("centers"))
        m.centers = parse_complexes(*c, "centers");
      else
        m.centers.assign(m.radii.size(), 0.0);
      model = m;
    } else if (name == "torus") {
      model = Torus{parse_doubles(need("radii"), "radii")};
    } else if (name == "ellipsoid") {
      model = Ellipsoid{parse_double(need("A"), "A"), parse_double(need("r"), "r")};
    } else if (name == "zaharjuta") {
      model = ZaharjutaPluripolar{};
    } else if (name == "interval") {
      Interval m;
      if (const auto* a = get("a")) m.a = parse_double(*a, "a");
      if (const auto* b = get("b")) m.b = parse_double(*b, "b");
      model = m;
    } else {
      throw ConfigError("unknown model '" + name + "' (product_discs, torus, ellipsoid, zaharjuta, interval)");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  for (const auto& [key, value] : params)
    if (!allowed.count(key)) throw ConfigError(fmt::format("model {}: unknown parameter '{}'", name, key));
  return model;
}

inline std::function<double(const Eigen::RowVectorXcd&)> make_weight(const std::string& spec) {
  const std::string s = trim(spec);
  if (s.empty() || s == "none") return {};
  const auto colon = s.find(':');
  const std::string kind = s.substr(0, colon);
  const double p = colon == std::string::npos ? 1.0 : parse_double(s.substr(colon + 1), "weight");
  if (kind == "const") {
    if (!(p > 0.0)) throw ConfigError("weight const:c needs c > 0");
    return [p](const Eigen::RowVectorXcd&) { return p; };
  }
  if (kind == "gauss") {
    if (!(p >= 0.0)) throw ConfigError("weight gauss:s needs s >= 0");
    return [p](const Eigen::RowVectorXcd& z) { return std::exp(-p * z.squaredNorm()); };
  }
  throw ConfigError("unknown weight '" + s + "' (none, const:<c>, gauss:<s>)");
}

/// Evaluation grids: "box:lo:hi:count" (complex square for d = 1, real cube
/// otherwise) or "points:z11;z12|z21;z22|..." (points separated by '|').
inline Eigen::MatrixXcd parse_grid(const std::string& spec, std::size_t d) {
  const std::string s = trim(spec);
  if (s.rfind("box:", 0) == 0) {
    const auto parts = split(s.substr(4), ':');
    if (parts.size() != 3) throw ConfigError("grid box:lo:hi:count expects three fields");
    const double lo = parse_double(parts[0], "grid"), hi = parse_double(parts[1], "grid");
    const auto count = parse_int(parts[2], "grid");
    if (count < 1 || !(hi >= lo)) throw ConfigError("grid box needs count >= 1 and hi >= lo");
    std::vector<double> ticks;
    for (long long i = 0; i < count; ++i) ticks.push_back(count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    std::vector<std::vector<cplx>> factors;
    if (d == 1) {
      std::vector<cplx> f;
      for (double x : ticks)
        for (double y : ticks) f.emplace_back(x, y);
      factors.push_back(std::move(f));
    } else {
      for (std::size_t c = 0; c < d; ++c) factors.emplace_back(ticks.begin(), ticks.end());
    }
    return detail::product_grid(factors);
  }
  if (s.rfind("points:", 0) == 0) {
    const auto pts = split(s.substr(7), '|');
    Eigen::MatrixXcd m(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto coords = parse_complexes(pts[i], "grid point", ';');
      if (coords.size() != d) throw ConfigError(fmt::format("grid point {} has {} coordinates, expected {}", i, coords.size(), d));
      for (std::size_t c = 0; c < d; ++c) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = coords[c];
    }
    return m;
  }
  throw ConfigError("unknown grid '" + s + "' (box:lo:hi:count or points:...)");
}

}  // namespace chebdir
