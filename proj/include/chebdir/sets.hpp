#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <fmt/format.h>

#include "chebdir/errors.hpp"

namespace chebdir {

using cplx = std::complex<double>;

/// Finite discretization of a compact set in C^d. Row i of `points` is z_i.
struct PointCloud {
  Eigen::MatrixXcd points;
  std::vector<double> weights;
  double mesh = 1.0;
  bool circled = false;
  // Coordinates known to vanish identically on the set (exploited by the solver).
  std::vector<bool> zero_coords;
  std::string generator;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(points.cols()); }
  std::size_t size() const noexcept { return static_cast<std::size_t>(points.rows()); }
  bool weighted() const {
    for (double w : weights)
      if (w != 1.0) return true;
    return false;
  }

  void validate() const {
    if (points.rows() == 0 || points.cols() == 0) throw std::invalid_argument("PointCloud: empty");
    if (weights.size() != size()) throw std::invalid_argument("PointCloud: weights/points length mismatch");
    bool any_positive = false;
    for (double w : weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("PointCloud: weights must be finite and >= 0");
      any_positive = any_positive || w > 0.0;
    }
    if (!any_positive) throw std::invalid_argument("PointCloud: at least one weight must be positive");
    if (!(mesh > 0.0)) throw std::invalid_argument("PointCloud: mesh must be > 0");
    if (!zero_coords.empty() && zero_coords.size() != dim())
      throw std::invalid_argument("PointCloud: zero_coords length mismatch");
  }

  bool coordinate_vanishes(std::size_t k) const { return !zero_coords.empty() && zero_coords[k]; }
};

inline PointCloud make_cloud(Eigen::MatrixXcd points, double mesh = 1.0, bool circled = false, std::string generator = {}) {
  PointCloud k;
  k.weights.assign(static_cast<std::size_t>(points.rows()), 1.0);
  k.points = std::move(points);
  k.mesh = mesh;
  k.circled = circled;
  k.generator = std::move(generator);
  k.validate();
  return k;
}

/// Returns a copy of `k` carrying weights w(z_i).
inline PointCloud with_weight(PointCloud k, const std::function<double(const Eigen::RowVectorXcd&)>& w) {
  for (std::size_t i = 0; i < k.size(); ++i) k.weights[i] = w(k.points.row(static_cast<Eigen::Index>(i)));
  k.validate();
  return k;
}

// ---------------------------------------------------------------------------
// Set models

struct ProductDiscs {
  std::vector<cplx> centers;
  std::vector<double> radii;
};
struct Torus {
  std::vector<double> radii;
};
/// E(A, r) = {|z1|^2/r^2 + |z2|^2/A^2 <= 1} in C^2.
struct Ellipsoid {
  double A = 1.0;
  double r = 1.0;
};
/// {(z1, 0) : |z1| <= 1} in C^2; pluripolar.
struct ZaharjutaPluripolar {};
/// Real segment [a, b] in C.
struct Interval {
  double a = -1.0;
  double b = 1.0;
};
struct AffineImage;

using SetModel = std::variant<ProductDiscs, Torus, Ellipsoid, ZaharjutaPluripolar, Interval, std::shared_ptr<const AffineImage>>;

/// z -> matrix * z + shift applied to a base model.
struct AffineImage {
  SetModel base;
  Eigen::MatrixXcd matrix;
  Eigen::VectorXcd shift;
};

inline SetModel affine_image(SetModel base, Eigen::MatrixXcd matrix, Eigen::VectorXcd shift) {
  return std::make_shared<const AffineImage>(AffineImage{std::move(base), std::move(matrix), std::move(shift)});
}

struct GenerateOptions {
  std::size_t max_points = 4'000'000;
};

namespace detail {

inline std::size_t angular_count(double h) {
  if (!(h > 0.0)) throw std::invalid_argument("generate: mesh must be > 0");
  return static_cast<std::size_t>(std::max(3.0, std::ceil(2.0 * std::numbers::pi / h - 1e-9)));
}

inline void check_cap(std::size_t count, const GenerateOptions& opt) {
  if (count > opt.max_points)
    throw std::length_error(fmt::format("generate: {} points exceed the cap of {}", count, opt.max_points));
}

inline std::vector<cplx> unit_circle(std::size_t m) {
  std::vector<cplx> w(m);
  for (std::size_t k = 0; k < m; ++k) w[k] = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m));
  return w;
}

inline Eigen::MatrixXcd product_grid(const std::vector<std::vector<cplx>>& factors) {
  std::size_t total = 1;
  for (const auto& f : factors) total *= f.size();
  const auto d = static_cast<Eigen::Index>(factors.size());
  Eigen::MatrixXcd pts(static_cast<Eigen::Index>(total), d);
  for (std::size_t row = 0; row < total; ++row) {
    std::size_t rem = row;
    // Last coordinate varies fastest.
    for (Eigen::Index k = d; k-- > 0;) {
      const auto& f = factors[static_cast<std::size_t>(k)];
      pts(static_cast<Eigen::Index>(row), k) = f[rem % f.size()];
      rem /= f.size();
    }
  }
  return pts;
}

inline std::string describe(const SetModel& model);

}  // namespace detail

/// Discretizes a set model with angular resolution h (radians per step on each circle factor).
inline PointCloud generate(const SetModel& model, double h, const GenerateOptions& opt = {}) {
  using detail::angular_count;
  PointCloud k;
  const std::size_t m = angular_count(h);
  std::visit(
      [&](const auto& mdl) {
        using T = std::decay_t<decltype(mdl)>;
        if constexpr (std::is_same_v<T, ProductDiscs> || std::is_same_v<T, Torus>) {
          std::vector<double> radii = mdl.radii;
          std::vector<cplx> centers(radii.size(), 0.0);
          if constexpr (std::is_same_v<T, ProductDiscs>) {
            if (mdl.centers.size() != radii.size()) throw std::invalid_argument("product_discs: centers/radii mismatch");
            centers = mdl.centers;
          }
          if (radii.empty()) throw std::invalid_argument("set model needs at least one radius");
          std::size_t total = 1;
          for (std::size_t i = 0; i < radii.size(); ++i) {
            if (!(radii[i] > 0.0)) throw std::invalid_argument("set model radii must be > 0");
            total *= m;
            detail::check_cap(total, opt);
          }
          const auto circle = detail::unit_circle(m);
          std::vector<std::vector<cplx>> factors;
          for (std::size_t i = 0; i < radii.size(); ++i) {
            std::vector<cplx> f(m);
            for (std::size_t j = 0; j < m; ++j) f[j] = centers[i] + radii[i] * circle[j];
            factors.push_back(std::move(f));
          }
          k.points = detail::product_grid(factors);
          k.circled = std::all_of(centers.begin(), centers.end(), [](cplx c) { return c == 0.0; });
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          if (!(mdl.A > 0.0 && mdl.r > 0.0)) throw std::invalid_argument("ellipsoid: A and r must be > 0");
          const auto circle = detail::unit_circle(m);
          const auto lat = static_cast<std::size_t>(std::ceil(0.5 * std::numbers::pi / h - 1e-9));
          // psi = 0 and psi = pi/2 collapse one circle to a point.
          const std::size_t total = 2 * m + (lat > 1 ? (lat - 1) * m * m : 0);
          detail::check_cap(total, opt);
          k.points.resize(static_cast<Eigen::Index>(total), 2);
          Eigen::Index row = 0;
          for (std::size_t l = 0; l <= lat; ++l) {
            const double psi = 0.5 * std::numbers::pi * static_cast<double>(l) / static_cast<double>(lat);
            const double c = (l == lat) ? 0.0 : std::cos(psi);
            const double s = (l == 0) ? 0.0 : std::sin(psi);
            if (l == 0 || l == lat) {
              for (std::size_t j = 0; j < m; ++j) {
                k.points(row, 0) = mdl.r * c * circle[j];
                k.points(row, 1) = mdl.A * s * circle[j];
                ++row;
              }
            } else {
              for (std::size_t j1 = 0; j1 < m; ++j1)
                for (std::size_t j2 = 0; j2 < m; ++j2) {
                  k.points(row, 0) = mdl.r * c * circle[j1];
                  k.points(row, 1) = mdl.A * s * circle[j2];
                  ++row;
                }
            }
          }
          k.circled = true;
        } else if constexpr (std::is_same_v<T, ZaharjutaPluripolar>) {
          const auto circle = detail::unit_circle(m);
          k.points = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(m), 2);
          for (std::size_t j = 0; j < m; ++j) k.points(static_cast<Eigen::Index>(j), 0) = circle[j];
          k.circled = true;
          k.zero_coords = {false, true};
        } else if constexpr (std::is_same_v<T, Interval>) {
          if (!(mdl.b > mdl.a)) throw std::invalid_argument("interval: need a < b");
          // Chebyshev-Lobatto nodes: uniform in the angle of x = cos(psi).
          const auto steps = static_cast<std::size_t>(std::max(1.0, std::round(std::numbers::pi / h)));
          detail::check_cap(steps + 1, opt);
          k.points.resize(static_cast<Eigen::Index>(steps + 1), 1);
          const double mid = 0.5 * (mdl.a + mdl.b), half = 0.5 * (mdl.b - mdl.a);
          for (std::size_t j = 0; j <= steps; ++j) {
            double x = std::cos(std::numbers::pi * static_cast<double>(j) / static_cast<double>(steps));
            if (2 * j == steps) x = 0.0;
            k.points(static_cast<Eigen::Index>(j), 0) = mid - half * x;
          }
          k.circled = false;
        } else {
          const AffineImage& aff = *mdl;
          PointCloud base = generate(aff.base, h, opt);
          const auto d = static_cast<Eigen::Index>(base.dim());
          if (aff.matrix.rows() != d || aff.matrix.cols() != d || aff.shift.size() != d)
            throw std::invalid_argument("affine_image: matrix/shift dimension mismatch");
          if (std::abs(aff.matrix.determinant()) < 1e-14) throw std::invalid_argument("affine_image: matrix must be invertible");
          k.points = (base.points * aff.matrix.transpose()).rowwise() + aff.shift.transpose();
          k.circled = base.circled && aff.shift.isZero(0.0);
        }
      },
      model);
  k.weights.assign(k.size(), 1.0);
  k.mesh = h;
  k.generator = detail::describe(model);
  k.validate();
  return k;
}

/// Image of K under z -> e^{-eps} z.
inline PointCloud scale(const PointCloud& k, double eps) {
  if (!(eps >= 0.0)) throw std::invalid_argument("scale: eps must be >= 0");
  PointCloud out = k;
  if (eps == 0.0) return out;
  out.points *= std::exp(-eps);
  return out;
}

/// S = K \ {|z1| < eta} and L = phi(S) with phi(z) = (z2/z1, ..., zd/z1).
struct SliceProjection {
  PointCloud S;
  /// Points in C^{d-1}; weights hold v = |z1|^{1/|theta'|}.
  PointCloud L;
  /// source[i] is the row of K that produced S row i (and L row i).
  std::vector<std::size_t> source;
};

inline SliceProjection slice_and_project(const PointCloud& k, double eta, double tail_mass) {
  if (k.dim() < 2) throw std::invalid_argument("slice_and_project: needs dim >= 2");
  if (!(eta > 0.0)) throw std::invalid_argument("slice_and_project: eta must be > 0");
  if (!(tail_mass > 0.0 && tail_mass <= 1.0)) throw std::invalid_argument("slice_and_project: |theta'| must lie in (0,1]");
  SliceProjection out;
  for (std::size_t i = 0; i < k.size(); ++i)
    if (std::abs(k.points(static_cast<Eigen::Index>(i), 0)) >= eta) out.source.push_back(i);
  if (out.source.empty()) throw std::invalid_argument("slice_and_project: S is empty (no point with |z1| >= eta)");
  const auto n = static_cast<Eigen::Index>(out.source.size());
  const auto d = static_cast<Eigen::Index>(k.dim());
  out.S = k;
  out.S.points.resize(n, d);
  out.S.weights.resize(out.source.size());
  out.L.points.resize(n, d - 1);
  out.L.weights.resize(out.source.size());
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto src = static_cast<Eigen::Index>(out.source[static_cast<std::size_t>(r)]);
    out.S.points.row(r) = k.points.row(src);
    out.S.weights[static_cast<std::size_t>(r)] = k.weights[static_cast<std::size_t>(src)];
    const cplx z1 = k.points(src, 0);
    for (Eigen::Index c = 1; c < d; ++c) out.L.points(r, c - 1) = k.points(src, c) / z1;
    out.L.weights[static_cast<std::size_t>(r)] = std::pow(std::abs(z1), 1.0 / tail_mass);
  }
  if (!k.zero_coords.empty()) out.L.zero_coords.assign(k.zero_coords.begin() + 1, k.zero_coords.end());
  out.S.generator = k.generator + " \\ {|z1|<eta}";
  out.L.mesh = k.mesh;
  out.L.circled = false;
  out.L.generator = "phi(" + out.S.generator + ")";
  out.S.validate();
  out.L.validate();
  return out;
}

/// (z1, z') -> (z1, z' - z1 d'/c).
inline PointCloud shear(const PointCloud& k, cplx c, const Eigen::VectorXcd& d_prime) {
  if (c == 0.0) throw std::invalid_argument("shear: c must be nonzero");
  if (static_cast<std::size_t>(d_prime.size()) + 1 != k.dim()) throw std::invalid_argument("shear: d' must have dim d-1");
  PointCloud out = k;
  for (Eigen::Index j = 0; j < d_prime.size(); ++j) out.points.col(j + 1) -= k.points.col(0) * (d_prime(j) / c);
  out.zero_coords.clear();
  out.generator = "shear(" + k.generator + ")";
  return out;
}

// ---------------------------------------------------------------------------
// Point-cloud text format:
//   #dim=<d> mesh=<h> circled=<0|1>
//   re1 im1 ... re_d im_d weight

inline void write_cloud(std::ostream& os, const PointCloud& k) {
  os << fmt::format("#dim={} mesh={:.17g} circled={}\n", k.dim(), k.mesh, k.circled ? 1 : 0);
  for (std::size_t i = 0; i < k.size(); ++i) {
    std::string line;
    for (std::size_t c = 0; c < k.dim(); ++c) {
      const cplx z = k.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
      line += fmt::format("{:.17g} {:.17g} ", z.real(), z.imag());
    }
    line += fmt::format("{:.17g}\n", k.weights[i]);
    os << line;
  }
}

inline PointCloud read_cloud(std::istream& is) {
  std::string header;
  if (!std::getline(is, header) || header.rfind("#dim=", 0) != 0) throw ConfigError("point cloud: missing '#dim=' header");
  std::size_t d = 0;
  double mesh = 0.0;
  int circled = 0;
  {
    std::istringstream hs(header.substr(1));
    std::string tok;
    while (hs >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) throw ConfigError("point cloud: malformed header token '" + tok + "'");
      const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
      try {
        if (key == "dim") d = std::stoul(val);
        else if (key == "mesh") mesh = std::stod(val);
        else if (key == "circled") circled = std::stoi(val);
        else throw ConfigError("point cloud: unknown header key '" + key + "'");
      } catch (const std::logic_error&) {
        throw ConfigError("point cloud: bad header value '" + tok + "'");
      }
    }
  }
  if (d == 0) throw ConfigError("point cloud: dim must be >= 1");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::vector<double> vals;
    double v;
    while (ls >> v) vals.push_back(v);
    if (!ls.eof() || vals.size() != 2 * d + 1)
      throw ConfigError(fmt::format("point cloud: expected {} numbers per line, got '{}'", 2 * d + 1, line));
    rows.push_back(std::move(vals));
  }
  PointCloud k;
  k.points.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  k.weights.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < d; ++c)
      k.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = cplx(rows[i][2 * c], rows[i][2 * c + 1]);
    k.weights[i] = rows[i][2 * d];
  }
  k.mesh = mesh;
  k.circled = circled != 0;
  k.generator = "file";
  try {
    k.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("point cloud: ") + e.what());
  }
  return k;
}

inline void save_cloud(const std::string& path, const PointCloud& k) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_cloud(os, k);
}

inline PointCloud load_cloud(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  return read_cloud(is);
}

namespace detail {

inline std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt::format("{:g}", v[i]);
  return s;
}

inline std::string describe(const SetModel& model) {
  return std::visit(
      [](const auto& mdl) -> std::string {
        using T = std::decay_t<decltype(mdl)>;
        if constexpr (std::is_same_v<T, ProductDiscs>) {
          std::string c;
          for (std::size_t i = 0; i < mdl.centers.size(); ++i)
            c += (i ? "," : "") + fmt::format("{:g}{:+g}i", mdl.centers[i].real(), mdl.centers[i].imag());
          return "product_discs(a=" + c + ";r=" + join_doubles(mdl.radii) + ")";
        } else if constexpr (std::is_same_v<T, Torus>) {
          return "torus(" + join_doubles(mdl.radii) + ")";
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          return fmt::format("ellipsoid(A={:g},r={:g})", mdl.A, mdl.r);
        } else if constexpr (std::is_same_v<T, ZaharjutaPluripolar>) {
          return "zaharjuta_pluripolar";
        } else if constexpr (std::is_same_v<T, Interval>) {
          return fmt::format("interval({:g},{:g})", mdl.a, mdl.b);
        } else {
          return "affine_image(" + describe(mdl->base) + ")";
        }
      },
      model);
}

}  // namespace detail

}  // namespace chebdir
