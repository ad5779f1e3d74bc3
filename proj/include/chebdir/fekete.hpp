#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "chebdir/index_order.hpp"
#include "chebdir/minimax.hpp"
#include "chebdir/parallel.hpp"
#include "chebdir/sets.hpp"

namespace chebdir {

namespace detail {

// Rows are points, columns the monomials of `basis`.
inline Eigen::MatrixXcd monomial_matrix(const Eigen::MatrixXcd& pts, const std::vector<MultiIndex>& basis) {
  const Eigen::Index N = pts.rows();
  const Eigen::Index d = pts.cols();
  int top = 0;
  for (const auto& b : basis) top = std::max(top, b.degree());
  // powers[c](i, e) = z_{i,c}^e
  std::vector<Eigen::MatrixXcd> powers(static_cast<std::size_t>(d), Eigen::MatrixXcd(N, top + 1));
  for (Eigen::Index c = 0; c < d; ++c) {
    auto& p = powers[static_cast<std::size_t>(c)];
    p.col(0).setOnes();
    for (int e = 1; e <= top; ++e) p.col(e) = p.col(e - 1).cwiseProduct(pts.col(c));
  }
  Eigen::MatrixXcd m(N, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) {
    auto col = m.col(static_cast<Eigen::Index>(j));
    col.setOnes();
    for (Eigen::Index c = 0; c < d; ++c)
      if (basis[j][static_cast<std::size_t>(c)] > 0) col = col.cwiseProduct(powers[static_cast<std::size_t>(c)].col(basis[j][static_cast<std::size_t>(c)]));
  }
  return m;
}

// Lowest index wins ties.
inline Eigen::Index argmax_abs(const Eigen::MatrixXcd& a, Eigen::Index col, Eigen::Index first_row) {
  constexpr Eigen::Index kChunk = 8192;
  const Eigen::Index rows = a.rows() - first_row;
  const auto chunks = static_cast<std::size_t>((rows + kChunk - 1) / kChunk);
  struct Best {
    Eigen::Index row = -1;
    double value = -1.0;
  };
  const auto best = parallel_map<Best>(chunks, [&](std::size_t c) {
    Best b;
    const Eigen::Index lo = first_row + static_cast<Eigen::Index>(c) * kChunk;
    const Eigen::Index hi = std::min(a.rows(), lo + kChunk);
    for (Eigen::Index r = lo; r < hi; ++r) {
      const double v = std::abs(a(r, col));
      if (v > b.value) b = {r, v};
    }
    return b;
  });
  Best out;
  for (const auto& b : best)
    if (b.value > out.value) out = b;
  return out.row;
}

}  // namespace detail

/// log |det[e_i(zeta_j)]| over the ordered basis of P_n; -inf when singular.
inline double log_vdm(const Eigen::MatrixXcd& points, int n) {
  const auto basis = enumerate_upto(n, static_cast<std::size_t>(points.cols()));
  if (static_cast<std::size_t>(points.rows()) != basis.dim_n)
    throw std::invalid_argument(fmt::format("log_vdm: need exactly d_n = {} points, got {}", basis.dim_n, points.rows()));
  Eigen::MatrixXcd m = detail::monomial_matrix(points, basis.indices);
  double log_scale = 0.0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double s = m.row(r).cwiseAbs().maxCoeff();
    if (s == 0.0) return -std::numeric_limits<double>::infinity();
    m.row(r) /= s;
    log_scale += std::log(s);
  }
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(m);
  if (lu.rank() < m.rows()) return -std::numeric_limits<double>::infinity();
  double sum = log_scale;
  for (Eigen::Index i = 0; i < m.rows(); ++i) sum += std::log(std::abs(lu.matrixLU()(i, i)));
  return sum;
}

struct FeketeResult {
  std::vector<std::size_t> indices;  // rows of the candidate cloud
  Eigen::MatrixXcd points;
  double log_vn = 0.0;
  int exchanges = 0;
};

/// Greedy selection by row-pivoted elimination on the monomial matrix followed by
/// up to `exchange_rounds` best single-point swaps.
inline FeketeResult greedy_fekete(const PointCloud& k, int n, int exchange_rounds = 0) {
  k.validate();
  if (n < 0) throw std::invalid_argument("greedy_fekete: n must be >= 0");
  if (exchange_rounds < 0) throw std::invalid_argument("greedy_fekete: exchange_rounds must be >= 0");
  const auto basis = enumerate_upto(n, k.dim());
  const auto dn = static_cast<Eigen::Index>(basis.dim_n);
  const auto N = static_cast<Eigen::Index>(k.size());
  if (N < dn) throw std::invalid_argument(fmt::format("greedy_fekete: {} candidates but d_n = {}", N, dn));

  Eigen::MatrixXcd a = detail::monomial_matrix(k.points, basis.indices);
  double log_scale = 0.0;
  for (Eigen::Index j = 0; j < dn; ++j) {
    const double s = a.col(j).cwiseAbs().maxCoeff();
    if (s > 0.0) {
      a.col(j) /= s;
      log_scale += std::log(s);
    }
  }
  const Eigen::MatrixXcd scaled = a;

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(N));
  for (Eigen::Index i = 0; i < N; ++i) perm[static_cast<std::size_t>(i)] = i;
  FeketeResult res;
  double log_det = log_scale;
  for (Eigen::Index c = 0; c < dn; ++c) {
    const Eigen::Index p = detail::argmax_abs(a, c, c);
    const double piv = std::abs(a(p, c));
    if (piv == 0.0) {
      log_det = -std::numeric_limits<double>::infinity();
      for (Eigen::Index r = c; r < dn; ++r) res.indices.push_back(static_cast<std::size_t>(perm[static_cast<std::size_t>(r)]));
      break;
    }
    if (p != c) {
      a.row(p).swap(a.row(c));
      std::swap(perm[static_cast<std::size_t>(p)], perm[static_cast<std::size_t>(c)]);
    }
    res.indices.push_back(static_cast<std::size_t>(perm[static_cast<std::size_t>(c)]));
    log_det += std::log(piv);
    const Eigen::Index rest = N - c - 1;
    if (rest > 0 && c + 1 < dn) {
      a.col(c).tail(rest) /= a(c, c);
      a.bottomRightCorner(rest, dn - c - 1).noalias() -= a.col(c).tail(rest) * a.row(c).tail(dn - c - 1);
    }
  }

  if (std::isfinite(log_det) && exchange_rounds > 0) {
    // W = A V_S^{-1}: replacing selected point s by candidate c scales |det| by |W(c,s)|.
    Eigen::MatrixXcd vs(dn, dn);
    for (Eigen::Index s = 0; s < dn; ++s) vs.row(s) = scaled.row(static_cast<Eigen::Index>(res.indices[static_cast<std::size_t>(s)]));
    Eigen::MatrixXcd w = vs.transpose().partialPivLu().solve(scaled.transpose()).transpose();
    for (int round = 0; round < exchange_rounds; ++round) {
      Eigen::Index bc = -1, bs = -1;
      double bv = 1.0 + 1e-10;
      for (Eigen::Index s = 0; s < dn; ++s)
        for (Eigen::Index c = 0; c < N; ++c) {
          const double v = std::abs(w(c, s));
          if (v > bv) {
            bv = v;
            bc = c;
            bs = s;
          }
        }
      if (bc < 0) break;
      const Eigen::VectorXcd col = w.col(bs);
      Eigen::RowVectorXcd row = w.row(bc);
      row(bs) -= 1.0;
      w.noalias() -= col * (row / col(bc));
      res.indices[static_cast<std::size_t>(bs)] = static_cast<std::size_t>(bc);
      log_det += std::log(bv);
      ++res.exchanges;
    }
  }

  res.log_vn = log_det;
  res.points.resize(dn, static_cast<Eigen::Index>(k.dim()));
  for (Eigen::Index s = 0; s < dn; ++s) res.points.row(s) = k.points.row(static_cast<Eigen::Index>(res.indices[static_cast<std::size_t>(s)]));
  return res;
}

struct DeltaEstimate {
  int n = 0;
  double log_vn = 0.0;
  std::uint64_t l_n = 0;
  double delta = 0.0;
};

/// V_n^{1/l_n} from the greedy Fekete estimate.
inline DeltaEstimate delta_fekete(const PointCloud& k, int n, int exchange_rounds = 0) {
  if (n < 1) throw std::invalid_argument("delta_fekete: n must be >= 1");
  DeltaEstimate e;
  e.n = n;
  e.l_n = enumerate_upto(n, k.dim()).l_n;
  e.log_vn = greedy_fekete(k, n, exchange_rounds).log_vn;
  e.delta = std::exp(e.log_vn / static_cast<double>(e.l_n));
  return e;
}

/// Interior midpoint nodes of the simplex: q nodes for d = 2, centroids of the
/// q^2 subtriangles for d = 3, the single vertex for d = 1.
inline std::vector<Direction> simplex_nodes(std::size_t d, int q) {
  if (q < 1) throw std::invalid_argument("simplex_nodes: need at least one node");
  std::vector<Direction> nodes;
  if (d == 1) {
    nodes.emplace_back(std::vector<double>{1.0});
  } else if (d == 2) {
    for (int i = 0; i < q; ++i) {
      const double t = (i + 0.5) / q;
      nodes.emplace_back(std::vector<double>{t, 1.0 - t});
    }
  } else if (d == 3) {
    auto push = [&](double x, double y) { nodes.emplace_back(std::vector<double>{x, y, std::max(0.0, 1.0 - x - y)}); };
    for (int i = 0; i < q; ++i)
      for (int j = 0; i + j < q; ++j) {
        push((i + 1.0 / 3.0) / q, (j + 1.0 / 3.0) / q);
        if (i + j + 2 <= q) push((i + 2.0 / 3.0) / q, (j + 2.0 / 3.0) / q);
      }
  } else {
    throw std::invalid_argument("simplex_nodes: only d <= 3 is supported");
  }
  return nodes;
}

struct ZaharjutaResult {
  bool ok = false;
  double delta = 0.0;
  double mean_log_tau = 0.0;
  std::vector<Direction> nodes;
  std::vector<MultiIndex> alphas;
  std::vector<double> taus;
  std::vector<std::size_t> failed_nodes;
  std::string failure;
};

/// exp of the mean of log tau(K, alpha) over interior nodes, alpha on the
/// direction sequence at |alpha| = degree_for_tau.
inline ZaharjutaResult delta_zaharjuta(const PointCloud& k, int nodes, int degree_for_tau = 20, const MinimaxOptions& opt = {}) {
  if (degree_for_tau < 1) throw std::invalid_argument("delta_zaharjuta: degree_for_tau must be >= 1");
  ZaharjutaResult res;
  res.nodes = simplex_nodes(k.dim(), nodes);
  for (const auto& th : res.nodes) res.alphas.push_back(direction_sequence(th, degree_for_tau).back());
  res.taus = parallel_map<double>(res.nodes.size(), [&](std::size_t i) { return tau(k, res.alphas[i], opt); });
  double sum = 0.0;
  for (std::size_t i = 0; i < res.taus.size(); ++i) {
    if (res.taus[i] <= 0.0) {
      res.failed_nodes.push_back(i);
      continue;
    }
    sum += std::log(res.taus[i]);
  }
  if (!res.failed_nodes.empty()) {
    std::string names;
    for (std::size_t i : res.failed_nodes) {
      if (!names.empty()) names += ", ";
      std::string th;
      for (double c : res.nodes[i].coords()) th += fmt::format("{}{:.4g}", th.empty() ? "" : ",", c);
      names += fmt::format("theta=({}) alpha={}", th, res.alphas[i].to_string());
    }
    res.failure = fmt::format("tau = 0 at {} of {} nodes: {}", res.failed_nodes.size(), res.nodes.size(), names);
    res.mean_log_tau = -std::numeric_limits<double>::infinity();
    return res;
  }
  res.ok = true;
  res.mean_log_tau = sum / static_cast<double>(res.taus.size());
  res.delta = std::exp(res.mean_log_tau);
  return res;
}

}  // namespace chebdir
