#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace chebdir {

/// Exponent vector of a monomial z^alpha in d variables.
class MultiIndex {
public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> exponents) : exponents_(std::move(exponents)) { validate(); }
  MultiIndex(std::initializer_list<int> exponents) : exponents_(exponents) { validate(); }

  static MultiIndex zero(std::size_t dim) { return MultiIndex(std::vector<int>(dim, 0)); }

  std::size_t dim() const noexcept { return exponents_.size(); }
  int degree() const noexcept { return std::accumulate(exponents_.begin(), exponents_.end(), 0); }
  int operator[](std::size_t i) const { return exponents_[i]; }
  const std::vector<int>& exponents() const noexcept { return exponents_; }

  /// Tail index (alpha_2, ..., alpha_d).
  MultiIndex tail() const {
    if (exponents_.size() < 2) throw std::invalid_argument("MultiIndex::tail needs dim >= 2");
    return MultiIndex(std::vector<int>(exponents_.begin() + 1, exponents_.end()));
  }

  bool operator==(const MultiIndex&) const = default;

  std::string to_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < exponents_.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(exponents_[i]);
    }
    return s + ")";
  }

private:
  void validate() const {
    if (exponents_.empty()) throw std::invalid_argument("MultiIndex needs dim >= 1");
    for (int e : exponents_)
      if (e < 0) throw std::invalid_argument("MultiIndex exponents must be nonnegative");
  }

  std::vector<int> exponents_;
};

inline std::ostream& operator<<(std::ostream& os, const MultiIndex& a) { return os << a.to_string(); }

/// Graded order with z_1 the smallest variable: lower degree first, then the
/// index with the larger exponent at the highest-index differing variable wins.
inline std::strong_ordering compare(const MultiIndex& a, const MultiIndex& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("compare: dimension mismatch");
  if (auto c = a.degree() <=> b.degree(); c != 0) return c;
  for (std::size_t i = a.dim(); i-- > 0;) {
    if (auto c = a[i] <=> b[i]; c != 0) return c;
  }
  return std::strong_ordering::equal;
}

inline bool precedes(const MultiIndex& a, const MultiIndex& b) { return compare(a, b) < 0; }

struct MonomialOrderLess {
  bool operator()(const MultiIndex& a, const MultiIndex& b) const { return precedes(a, b); }
};

/// Point of the standard simplex in R^d.
class Direction {
public:
  explicit Direction(std::vector<double> coords) : coords_(std::move(coords)) {
    if (coords_.empty()) throw std::invalid_argument("Direction needs dim >= 1");
    double sum = 0.0;
    for (double c : coords_) {
      if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("Direction coordinates must lie in [0,1]");
      sum += c;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("Direction coordinates must sum to 1");
  }
  Direction(std::initializer_list<double> coords) : Direction(std::vector<double>(coords)) {}

  std::size_t dim() const noexcept { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  const std::vector<double>& coords() const noexcept { return coords_; }

  bool on_boundary() const noexcept {
    return std::any_of(coords_.begin(), coords_.end(), [](double c) { return c == 0.0 || c == 1.0; });
  }

  /// |theta'| = theta_2 + ... + theta_d.
  double tail_mass() const noexcept { return std::accumulate(coords_.begin() + 1, coords_.end(), 0.0); }

private:
  std::vector<double> coords_;
};

/// Ordered monomial basis of P_n together with d_n and l_n.
struct MonomialBasis {
  std::vector<MultiIndex> indices;
  std::size_t dim_n = 0;
  std::uint64_t l_n = 0;
};

namespace detail {

inline std::size_t checked_binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  // C(n, k) built incrementally; each partial product is itself a binomial.
  std::size_t result = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    const std::size_t num = n - k + i;
    const std::size_t g = std::gcd(result, i);
    const std::size_t r = result / g;
    const std::size_t den = i / g;
    if (r > std::numeric_limits<std::size_t>::max() / num) throw std::overflow_error("d_n overflows size_t");
    result = r * num / den;
  }
  return result;
}

inline void append_degree(std::vector<MultiIndex>& out, std::size_t dim, int degree) {
  std::vector<int> e(dim, 0);
  // Recursive fill of compositions of `degree` into `dim` parts.
  auto fill = [&](auto&& self, std::size_t pos, int remaining) -> void {
    if (pos + 1 == dim) {
      e[pos] = remaining;
      out.emplace_back(e);
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      e[pos] = k;
      self(self, pos + 1, remaining - k);
    }
  };
  fill(fill, 0, degree);
}

}  // namespace detail

/// All multi-indices of degree <= n in d variables, sorted by the monomial order.
inline MonomialBasis enumerate_upto(int n, std::size_t d) {
  if (n < 0) throw std::invalid_argument("enumerate_upto: n must be >= 0");
  if (d < 1) throw std::invalid_argument("enumerate_upto: d must be >= 1");
  MonomialBasis basis;
  basis.dim_n = detail::checked_binomial(static_cast<std::size_t>(n) + d, d);
  basis.indices.reserve(basis.dim_n);
  for (int k = 0; k <= n; ++k) {
    const auto first = basis.indices.size();
    detail::append_degree(basis.indices, d, k);
    std::sort(basis.indices.begin() + static_cast<std::ptrdiff_t>(first), basis.indices.end(), MonomialOrderLess{});
  }
  for (const auto& a : basis.indices) basis.l_n += static_cast<std::uint64_t>(a.degree());
  return basis;
}

/// Multi-indices alpha(1..j_max) with |alpha(j)| = j, obtained by largest-remainder
/// rounding of j*theta (ties go to the lowest coordinate index).
inline std::vector<MultiIndex> direction_sequence(const Direction& theta, int j_max) {
  if (j_max < 1) throw std::invalid_argument("direction_sequence: j_max must be >= 1");
  const std::size_t d = theta.dim();
  std::vector<MultiIndex> seq;
  seq.reserve(static_cast<std::size_t>(j_max));
  std::vector<int> e(d);
  std::vector<double> frac(d);
  std::vector<std::size_t> order(d);
  for (int j = 1; j <= j_max; ++j) {
    int assigned = 0;
    for (std::size_t i = 0; i < d; ++i) {
      const double x = j * theta[i];
      const double f = std::floor(x);
      e[i] = static_cast<int>(f);
      frac[i] = x - f;
      assigned += e[i];
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    // Sum of the floors can exceed j only through rounding of j*theta; clamp.
    for (int r = j - assigned, k = 0; r > 0; --r, ++k) ++e[order[static_cast<std::size_t>(k) % d]];
    for (int excess = assigned - j; excess > 0;) {
      for (std::size_t i = d; i-- > 0 && excess > 0;)
        if (e[i] > 0) {
          --e[i];
          --excess;
        }
    }
    seq.emplace_back(e);
  }
  return seq;
}

/// Multi-indices beta preceding alpha; with `homogeneous_only` restricted to |beta| = |alpha|.
inline std::vector<MultiIndex> basis_below(const MultiIndex& alpha, bool homogeneous_only) {
  std::vector<MultiIndex> out;
  if (homogeneous_only) {
    detail::append_degree(out, alpha.dim(), alpha.degree());
    std::sort(out.begin(), out.end(), MonomialOrderLess{});
  } else {
    out = enumerate_upto(alpha.degree(), alpha.dim()).indices;
  }
  std::erase_if(out, [&](const MultiIndex& b) { return !precedes(b, alpha); });
  return out;
}

/// Position of alpha in the ordered enumeration of P_{|alpha|} (0-based).
inline std::size_t position_of(const MultiIndex& alpha) { return basis_below(alpha, false).size(); }

}  // namespace chebdir
