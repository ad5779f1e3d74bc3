#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "chebdir/index_order.hpp"

namespace chebdir {

inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.15g}", x);
}

struct SweepRow {
  int j = 0;
  MultiIndex alpha;
  double norm = std::numeric_limits<double>::quiet_NaN();
  double tau = std::numeric_limits<double>::quiet_NaN();
  double rel_gap = std::numeric_limits<double>::quiet_NaN();
  int sides = 0;
  double tau_half_mesh = std::numeric_limits<double>::quiet_NaN();
  double window_max = std::numeric_limits<double>::quiet_NaN();
  double window_min = std::numeric_limits<double>::quiet_NaN();
  bool degenerate = false;
  bool failed = false;
  bool mesh_flag = false;
  std::string error;
};

/// Windowed limsup/liminf surrogates over a tau sequence.
struct ConvergenceReport {
  std::vector<SweepRow> rows;
  int window = 8;
  double conv_tol = 1e-2;
  double limsup = std::numeric_limits<double>::quiet_NaN();
  double liminf = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::quiet_NaN();
  std::string verdict = "not-converged";
};

/// Fills the trailing-window columns and the verdict from the rows.
inline void finalize(ConvergenceReport& rep) {
  const auto W = static_cast<std::size_t>(std::max(1, rep.window));
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    double hi = -std::numeric_limits<double>::infinity(), lo = std::numeric_limits<double>::infinity();
    for (std::size_t k = i + 1 > W ? i + 1 - W : 0; k <= i; ++k) {
      if (rep.rows[k].failed) continue;
      hi = std::max(hi, rep.rows[k].tau);
      lo = std::min(lo, rep.rows[k].tau);
    }
    rep.rows[i].window_max = std::isfinite(hi) ? hi : std::numeric_limits<double>::quiet_NaN();
    rep.rows[i].window_min = std::isfinite(lo) ? lo : std::numeric_limits<double>::quiet_NaN();
  }
  rep.verdict = "not-converged";
  if (rep.rows.empty()) return;
  rep.limsup = rep.rows.back().window_max;
  rep.liminf = rep.rows.back().window_min;
  bool all_degenerate = true;
  bool any = false;
  for (std::size_t k = rep.rows.size() > W ? rep.rows.size() - W : 0; k < rep.rows.size(); ++k) {
    if (rep.rows[k].failed) continue;
    any = true;
    all_degenerate = all_degenerate && rep.rows[k].degenerate;
  }
  if (!any) return;
  if (all_degenerate) {
    rep.verdict = "degenerate";
    rep.gap = 0.0;
    return;
  }
  rep.gap = rep.limsup > 0.0 ? (rep.limsup - rep.liminf) / rep.limsup : 0.0;
  rep.verdict = rep.gap <= rep.conv_tol ? "converged" : "not-converged";
}

inline void write_sweep_csv(std::ostream& os, const ConvergenceReport& rep) {
  os << "j;alpha;tau;rel_gap;tau_half_mesh;window_max;window_min\n";
  for (const auto& r : rep.rows)
    os << fmt::format("{};{};{};{};{};{};{}\n", r.j, r.alpha.to_string(), format_number(r.tau), format_number(r.rel_gap),
                      format_number(r.tau_half_mesh), format_number(r.window_max), format_number(r.window_min));
}

/// Per-solve detail rows.
inline void write_solves_csv(std::ostream& os, const ConvergenceReport& rep) {
  os << "alpha;norm;tau;rel_gap;m_final\n";
  for (const auto& r : rep.rows)
    os << fmt::format("{};{};{};{};{}\n", r.alpha.to_string(), format_number(r.norm), format_number(r.tau), format_number(r.rel_gap), r.sides);
}

/// Line plot of tau against j with the final window's max/min as horizontal bands.
/// Returns false (and writes nothing) for a report without plottable rows.
inline bool write_sweep_svg(std::ostream& os, const ConvergenceReport& rep, const std::string& title = "tau sweep") {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rep.rows)
    if (!r.failed && std::isfinite(r.tau)) pts.emplace_back(r.j, r.tau);
  if (pts.empty()) return false;
  constexpr double W = 640, H = 400, L = 60, R = 20, T = 40, B = 50;
  double x0 = pts.front().first, x1 = pts.back().first;
  double y0 = pts.front().second, y1 = y0;
  for (const auto& [x, y] : pts) {
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  for (double b : {rep.limsup, rep.liminf})
    if (std::isfinite(b)) {
      y0 = std::min(y0, b);
      y1 = std::max(y1, b);
    }
  if (x1 <= x0) x1 = x0 + 1;
  const double pad = y1 > y0 ? 0.05 * (y1 - y0) : std::max(0.05, 0.05 * std::abs(y0));
  y0 -= pad;
  y1 += pad;
  auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto sy = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  os << fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\">\n", W, H, W, H);
  os << fmt::format("<rect x=\"0\" y=\"0\" width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\"/>\n", W, H);
  os << fmt::format("<text x=\"{:.1f}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n", W / 2, title);
  os << fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"black\"/>\n", L, H - B, W - R);
  os << fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{0:.1f}\" y2=\"{2:.1f}\" stroke=\"black\"/>\n", L, H - B, T);
  os << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">j</text>\n", (L + W - R) / 2, H - 12);
  os << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n", sx(x0), H - B + 16, format_number(x0));
  os << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n", sx(x1), H - B + 16, format_number(x1));
  os << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{:.4g}</text>\n", L - 6, sy(y0) + 4, y0);
  os << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{:.4g}</text>\n", L - 6, sy(y1) + 4, y1);
  std::string poly;
  for (const auto& [x, y] : pts) poly += fmt::format("{}{:.2f},{:.2f}", poly.empty() ? "" : " ", sx(x), sy(y));
  os << "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"" << poly << "\"/>\n";
  const char* names[] = {"window-max", "window-min"};
  const double bands[] = {rep.limsup, rep.liminf};
  for (int b = 0; b < 2; ++b)
    if (std::isfinite(bands[b]))
      os << fmt::format("<line class=\"{}\" x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#c0392b\" stroke-dasharray=\"6 4\"/>\n",
                        names[b], L, sy(bands[b]), W - R, sy(bands[b]));
  os << "</svg>\n";
  return true;
}

/// Generic result table for identity checks.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

inline void write_table_csv(std::ostream& os, const Table& t) {
  std::string line;
  for (const auto& c : t.columns) line += (line.empty() ? "" : ";") + c;
  os << line << '\n';
  for (const auto& r : t.rows) {
    line.clear();
    for (std::size_t i = 0; i < r.size(); ++i) line += (i ? ";" : "") + r[i];
    os << line << '\n';
  }
}

}  // namespace chebdir
