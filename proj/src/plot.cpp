#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "heavybo/error.hpp"
#include "heavybo/harness.hpp"

namespace heavybo {

namespace {

constexpr double kWidth = 760.0;
constexpr double kHeight = 500.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 170.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 60.0;

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += ch;
    }
  }
  return out;
}

void open_svg(std::ostringstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  if (!title.empty()) {
    os << "<text x=\"" << px(kWidth / 2) << "\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">"
       << escape(title) << "</text>\n";
  }
}

std::string render_error_vs_p(const std::vector<AggregateCell>& table, const PlotOptions& options) {
  std::map<std::pair<double, double>, std::vector<const AggregateCell*>> series;
  double p_min = table.front().cell.p;
  double p_max = p_min;
  double y_max = options.eta.value_or(0.0);
  for (const auto& c : table) {
    series[{c.cell.gamma, c.cell.beta}].push_back(&c);
    p_min = std::min(p_min, static_cast<double>(c.cell.p));
    p_max = std::max(p_max, static_cast<double>(c.cell.p));
    y_max = std::max(y_max, c.mean_test_error + c.ci95_halfwidth.value_or(0.0));
  }
  std::set<double> betas;
  for (const auto& [key, cells] : series) betas.insert(key.second);
  y_max = y_max > 0.0 ? 1.1 * y_max : 1.0;
  if (p_max == p_min) {
    p_min -= 1.0;
    p_max += 1.0;
  }
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto sx = [&](double p) { return kLeft + (p - p_min) / (p_max - p_min) * plot_w; };
  auto sy = [&](double e) { return kTop + plot_h - e / y_max * plot_h; };

  std::ostringstream os;
  open_svg(os, options.title.empty() ? "Test error vs dimension" : options.title);
  os << "<g class=\"axes\" stroke=\"black\">\n"
     << "<line x1=\"" << px(kLeft) << "\" y1=\"" << px(kTop + plot_h) << "\" x2=\"" << px(kLeft + plot_w)
     << "\" y2=\"" << px(kTop + plot_h) << "\"/>\n"
     << "<line x1=\"" << px(kLeft) << "\" y1=\"" << px(kTop) << "\" x2=\"" << px(kLeft) << "\" y2=\""
     << px(kTop + plot_h) << "\"/>\n</g>\n";
  for (int i = 0; i <= 5; ++i) {
    const double e = y_max * i / 5.0;
    const double p = p_min + (p_max - p_min) * i / 5.0;
    os << "<text x=\"" << px(kLeft - 8) << "\" y=\"" << px(sy(e) + 4) << "\" text-anchor=\"end\">"
       << num(e, 3) << "</text>\n"
       << "<text x=\"" << px(sx(p)) << "\" y=\"" << px(kTop + plot_h + 18) << "\" text-anchor=\"middle\">"
       << num(p, 5) << "</text>\n";
  }
  os << "<text x=\"" << px(kLeft + plot_w / 2) << "\" y=\"" << px(kHeight - 15)
     << "\" text-anchor=\"middle\">dimension p</text>\n"
     << "<text x=\"20\" y=\"" << px(kTop + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
     << px(kTop + plot_h / 2) << ")\">mean test error</text>\n";
  if (options.eta) {
    os << "<line class=\"noise-level\" x1=\"" << px(kLeft) << "\" y1=\"" << px(sy(*options.eta)) << "\" x2=\""
       << px(kLeft + plot_w) << "\" y2=\"" << px(sy(*options.eta))
       << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
  }

  std::size_t index = 0;
  for (auto& [key, cells] : series) {
    std::sort(cells.begin(), cells.end(), [](auto* a, auto* b) { return a->cell.p < b->cell.p; });
    const char* color = kPalette[index % kPalette.size()];
    os << "<polyline class=\"series\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto* c : cells) os << px(sx(c->cell.p)) << ',' << px(sy(c->mean_test_error)) << ' ';
    os << "\"/>\n";
    for (const auto* c : cells) {
      const double x = sx(c->cell.p);
      os << "<circle cx=\"" << px(x) << "\" cy=\"" << px(sy(c->mean_test_error)) << "\" r=\"3\" fill=\""
         << color << "\"/>\n";
      if (c->ci95_halfwidth) {
        os << "<line class=\"errorbar\" x1=\"" << px(x) << "\" y1=\""
           << px(sy(c->mean_test_error - *c->ci95_halfwidth)) << "\" x2=\"" << px(x) << "\" y2=\""
           << px(sy(c->mean_test_error + *c->ci95_halfwidth)) << "\" stroke=\"" << color << "\"/>\n";
      }
    }
    std::string label = "gamma=" + num(key.first);
    if (betas.size() > 1) label += " beta=" + num(key.second);
    const double ly = kTop + 20.0 * static_cast<double>(index);
    os << "<line x1=\"" << px(kWidth - kRight + 15) << "\" y1=\"" << px(ly) << "\" x2=\""
       << px(kWidth - kRight + 40) << "\" y2=\"" << px(ly) << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n"
       << "<text x=\"" << px(kWidth - kRight + 46) << "\" y=\"" << px(ly + 4) << "\">" << label << "</text>\n";
    ++index;
  }
  os << "</svg>\n";
  return os.str();
}

struct Axis {
  const char* name;
  double (*get)(const CellKey&);
};

const std::array<Axis, 3> kAxes = {{
    {"p", [](const CellKey& c) { return static_cast<double>(c.p); }},
    {"gamma", [](const CellKey& c) { return c.gamma; }},
    {"beta", [](const CellKey& c) { return c.beta; }},
}};

std::string color_for(double t) {
  // Viridis sampled at five stops, linearly interpolated.
  constexpr std::array<std::array<double, 3>, 5> stops = {{
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const auto i = std::min<std::size_t>(3, static_cast<std::size_t>(t));
  const double f = t - static_cast<double>(i);
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                static_cast<int>(std::lround(stops[i][0] + f * (stops[i + 1][0] - stops[i][0]))),
                static_cast<int>(std::lround(stops[i][1] + f * (stops[i + 1][1] - stops[i][1]))),
                static_cast<int>(std::lround(stops[i][2] + f * (stops[i + 1][2] - stops[i][2]))));
  return buf;
}

std::string render_heatmap(const std::vector<AggregateCell>& table, const PlotOptions& options) {
  std::vector<std::size_t> varying;
  for (std::size_t a = 0; a < kAxes.size(); ++a) {
    std::set<double> values;
    for (const auto& c : table) values.insert(kAxes[a].get(c.cell));
    if (values.size() > 1) varying.push_back(a);
  }
  if (varying.size() > 2) throw DataError("heatmap needs at most two varying axes");
  while (varying.size() < 2) {
    for (std::size_t a = 0; a < kAxes.size() && varying.size() < 2; ++a) {
      if (std::find(varying.begin(), varying.end(), a) == varying.end()) varying.push_back(a);
    }
    std::sort(varying.begin(), varying.end());
  }
  const Axis& ax = kAxes[varying[0]];
  const Axis& ay = kAxes[varying[1]];
  std::set<double> xs;
  std::set<double> ys;
  double lo = table.front().mean_test_error;
  double hi = lo;
  for (const auto& c : table) {
    xs.insert(ax.get(c.cell));
    ys.insert(ay.get(c.cell));
    lo = std::min(lo, c.mean_test_error);
    hi = std::max(hi, c.mean_test_error);
  }
  const std::vector<double> xv(xs.begin(), xs.end());
  const std::vector<double> yv(ys.begin(), ys.end());
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const double cw = plot_w / static_cast<double>(xv.size());
  const double ch = plot_h / static_cast<double>(yv.size());

  std::ostringstream os;
  open_svg(os, options.title.empty() ? "Mean test error" : options.title);
  for (const auto& c : table) {
    const auto ix = static_cast<double>(std::lower_bound(xv.begin(), xv.end(), ax.get(c.cell)) - xv.begin());
    // Row 0 at the bottom.
    const auto iy = static_cast<double>(std::lower_bound(yv.begin(), yv.end(), ay.get(c.cell)) - yv.begin());
    const double x = kLeft + ix * cw;
    const double y = kTop + plot_h - (iy + 1.0) * ch;
    const double t = hi > lo ? (c.mean_test_error - lo) / (hi - lo) : 0.5;
    os << "<rect class=\"cell\" x=\"" << px(x) << "\" y=\"" << px(y) << "\" width=\"" << px(cw)
       << "\" height=\"" << px(ch) << "\" fill=\"" << color_for(t) << "\" stroke=\"white\"/>\n"
       << "<text x=\"" << px(x + cw / 2) << "\" y=\"" << px(y + ch / 2 + 4) << "\" text-anchor=\"middle\" fill=\""
       << (t > 0.6 ? "black" : "white") << "\">" << num(c.mean_test_error, 3) << "</text>\n";
  }
  for (std::size_t i = 0; i < xv.size(); ++i) {
    os << "<text x=\"" << px(kLeft + (static_cast<double>(i) + 0.5) * cw) << "\" y=\""
       << px(kTop + plot_h + 18) << "\" text-anchor=\"middle\">" << num(xv[i]) << "</text>\n";
  }
  for (std::size_t i = 0; i < yv.size(); ++i) {
    os << "<text x=\"" << px(kLeft - 8) << "\" y=\""
       << px(kTop + plot_h - (static_cast<double>(i) + 0.5) * ch + 4) << "\" text-anchor=\"end\">" << num(yv[i])
       << "</text>\n";
  }
  os << "<text x=\"" << px(kLeft + plot_w / 2) << "\" y=\"" << px(kHeight - 15) << "\" text-anchor=\"middle\">"
     << ax.name << "</text>\n"
     << "<text x=\"20\" y=\"" << px(kTop + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
     << px(kTop + plot_h / 2) << ")\">" << ay.name << "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double t = i / 4.0;
    const double y = kTop + plot_h - t * plot_h / 2.0 - 20.0;
    os << "<rect x=\"" << px(kWidth - kRight + 20) << "\" y=\"" << px(y) << "\" width=\"20\" height=\"20\" fill=\""
       << color_for(t) << "\"/>\n"
       << "<text x=\"" << px(kWidth - kRight + 46) << "\" y=\"" << px(y + 14) << "\">" << num(lo + t * (hi - lo), 3)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace

PlotKind parse_plot_kind(const std::string& text) {
  if (text == "error-vs-p") return PlotKind::kErrorVsP;
  if (text == "heatmap") return PlotKind::kHeatmap;
  throw ConfigError("unknown plot kind '" + text + "' (error-vs-p | heatmap)");
}

std::string render_svg(const std::vector<AggregateCell>& table, PlotKind kind, const PlotOptions& options) {
  if (table.empty()) throw DataError("cannot plot an empty table");
  return kind == PlotKind::kErrorVsP ? render_error_vs_p(table, options) : render_heatmap(table, options);
}

void emit_plot(const std::vector<AggregateCell>& table, PlotKind kind, const std::filesystem::path& path,
               const PlotOptions& options) {
  const std::string svg = render_svg(table, kind, options);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << svg;
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace heavybo
