#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cappen/common.hpp"
#include "cappen/solver.hpp"

namespace cappen {

inline constexpr const char* kSweepCsvHeader =
    "t,area,lateral_area,mf,residual,grad_norm,kappa,components,min_radius,iters";

inline std::string sweep_csv(const std::vector<SweepRecord>& recs) {
  std::string out(kSweepCsvHeader);
  out += '\n';
  for (const auto& r : recs) {
    out += fmt_g(r.t) + ',' + fmt_g(r.area) + ',' + fmt_g(r.lateral) + ',' + fmt_g(r.mf) + ',' +
           fmt_g(r.residual) + ',' + fmt_g(r.grad_norm) + ',' + fmt_g(r.kappa) + ',' +
           strf("%d", r.components) + ',' + fmt_g(r.min_radius) + ',' + strf("%d", r.iters) +
           '\n';
  }
  return out;
}

// Binary mode keeps LF endings on every platform.
inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(strf("cannot write '%s'", path.string().c_str()));
  out << content;
  if (!out) throw Error(strf("short write to '%s'", path.string().c_str()));
}

// Minimal static line plot; only emitted when plots are enabled.
inline std::string svg_line_plot(const std::string& title, const std::string& xlabel,
                                 const std::string& ylabel, const std::vector<double>& x,
                                 const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("svg_line_plot: need matched series");
  const double W = 640, H = 480, L = 70, R = 20, T = 40, B = 50;
  double x0 = x.front(), x1 = x.front(), y0 = y.front(), y1 = y.front();
  for (size_t i = 0; i < x.size(); ++i) {
    x0 = std::min(x0, x[i]);
    x1 = std::max(x1, x[i]);
    y0 = std::min(y0, y[i]);
    y1 = std::max(y1, y[i]);
  }
  if (x1 - x0 < 1e-300) x1 = x0 + 1.0;
  const double pad = 0.05 * std::max(y1 - y0, 1e-12);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double v) { return L + (v - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (v - y0) / (y1 - y0) * (H - T - B); };
  std::string s = strf(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
      "viewBox=\"0 0 %g %g\">\n",
      W, H, W, H);
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += strf("<text x=\"%g\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">%s</text>\n", W / 2,
            title.c_str());
  s += strf("<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", L, H - B, W - R,
            H - B);
  s += strf("<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", L, T, L, H - B);
  s += strf("<text x=\"%g\" y=\"%g\" font-size=\"12\" text-anchor=\"middle\">%s</text>\n", W / 2,
            H - 12.0, xlabel.c_str());
  s += strf("<text x=\"16\" y=\"%g\" font-size=\"12\" text-anchor=\"middle\" "
            "transform=\"rotate(-90 16 %g)\">%s</text>\n",
            H / 2, H / 2, ylabel.c_str());
  s += strf("<text x=\"%g\" y=\"%g\" font-size=\"10\">%s</text>\n", L - 4.0, H - B + 14.0,
            fmt_g(x0, 4).c_str());
  s += strf("<text x=\"%g\" y=\"%g\" font-size=\"10\" text-anchor=\"end\">%s</text>\n", W - R,
            H - B + 14.0, fmt_g(x1, 4).c_str());
  s += strf("<text x=\"%g\" y=\"%g\" font-size=\"10\" text-anchor=\"end\">%s</text>\n", L - 6.0,
            H - B, fmt_g(y0, 4).c_str());
  s += strf("<text x=\"%g\" y=\"%g\" font-size=\"10\" text-anchor=\"end\">%s</text>\n", L - 6.0,
            T + 10.0, fmt_g(y1, 4).c_str());
  s += "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\" points=\"";
  for (size_t i = 0; i < x.size(); ++i) s += strf("%s%.3f,%.3f", i ? " " : "", px(x[i]), py(y[i]));
  s += "\"/>\n</svg>\n";
  return s;
}

}  // namespace cappen
