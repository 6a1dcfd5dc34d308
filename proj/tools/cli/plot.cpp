#include "cli/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

namespace psichain::cli {

namespace {

constexpr double kWidth = 640, kHeight = 440, kLeft = 70, kRight = 170, kTop = 40, kBottom = 60;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else if (c == '"') out += "&quot;";
    else out += c;
  }
  return out;
}

struct Axis {
  double lo = 0, hi = 1;
  bool log = false;
  double map(double v) const {
    const double t = log ? std::log10(v) : v;
    return (t - lo) / (hi - lo);
  }
};

Axis make_axis(const std::vector<double>& vals, bool log) {
  Axis a;
  a.log = log;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : vals) {
    if (!std::isfinite(v) || (log && v <= 0)) continue;
    const double t = log ? std::log10(v) : v;
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  if (!std::isfinite(lo)) {
    lo = 0;
    hi = 1;
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  a.lo = lo - pad;
  a.hi = hi + pad;
  return a;
}

bool plottable(const Axis& ax, const Axis& ay, double x, double y) {
  return std::isfinite(x) && std::isfinite(y) && (!ax.log || x > 0) && (!ay.log || y > 0);
}

}  // namespace

std::string render_svg(const Figure& fig) {
  std::vector<double> xs, ys;
  for (const auto& s : fig.series) {
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.y.begin(), s.y.end());
  }
  const Axis ax = make_axis(xs, fig.log_x), ay = make_axis(ys, fig.log_y);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + ax.map(v) * pw; };
  auto py = [&](double v) { return kTop + (1.0 - ay.map(v)) * ph; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
         "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
         escape(fig.title) + "</text>\n";
  out += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double f = i / 4.0;
    const double vx = ax.lo + f * (ax.hi - ax.lo), vy = ay.lo + f * (ay.hi - ay.lo);
    const double tx = kLeft + f * pw, ty = kTop + (1.0 - f) * ph;
    out += "<line x1=\"" + num(tx) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" + num(tx) + "\" y2=\"" + num(kTop + ph + 5) +
           "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num(tx) + "\" y=\"" + num(kTop + ph + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" +
           label_num(ax.log ? std::pow(10.0, vx) : vx) + "</text>\n";
    out += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(ty) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(ty) +
           "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(ty + 3) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" +
           label_num(ay.log ? std::pow(10.0, vy) : vy) + "</text>\n";
  }
  out += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 15) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + escape(fig.x_label) +
         (fig.log_x ? " (log)" : "") + "</text>\n";
  out += "<text x=\"16\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 16 " + num(kTop + ph / 2) + ")\">" + escape(fig.y_label) + (fig.log_y ? " (log)" : "") +
         "</text>\n";
  for (std::size_t k = 0; k < fig.series.size(); ++k) {
    const auto& s = fig.series[k];
    const char* color = kColors[k % std::size(kColors)];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!plottable(ax, ay, s.x[i], s.y[i])) continue;
      pts += (pts.empty() ? "" : " ") + num(px(s.x[i])) + "," + num(py(s.y[i]));
      out += "<circle cx=\"" + num(px(s.x[i])) + "\" cy=\"" + num(py(s.y[i])) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
    if (!pts.empty())
      out += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
    const double ly = kTop + 12 + 16 * static_cast<double>(k);
    out += "<rect x=\"" + num(kWidth - kRight + 12) + "\" y=\"" + num(ly - 8) + "\" width=\"10\" height=\"10\" fill=\"" +
           color + "\"/>\n";
    out += "<text x=\"" + num(kWidth - kRight + 26) + "\" y=\"" + num(ly + 1) +
           "\" font-family=\"sans-serif\" font-size=\"10\">" + escape(s.label) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

namespace {

std::size_t column(const Table& t, const std::string& name) {
  const auto it = std::find(t.columns.begin(), t.columns.end(), name);
  if (it == t.columns.end()) throw std::runtime_error("table " + t.name + " lacks column '" + name + "'");
  return static_cast<std::size_t>(it - t.columns.begin());
}

double value(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw std::runtime_error("non-numeric cell '" + s + "'");
  }
}

std::string slug(std::string s) {
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
  return s;
}

// Groups rows by `keys`, then splits each group into series by `series_key`.
void grouped(const Table& t, const std::vector<std::string>& keys, const std::string& series_key,
             const std::string& x_col, const std::vector<std::string>& y_cols, const std::string& stem,
             const std::string& x_label, const std::string& y_label,
             std::vector<std::pair<std::string, Figure>>& out) {
  std::vector<std::size_t> kc;
  for (const auto& k : keys) kc.push_back(column(t, k));
  const std::size_t sc = series_key.empty() ? 0 : column(t, series_key);
  const std::size_t xc = column(t, x_col);
  std::vector<std::size_t> yc;
  for (const auto& y : y_cols) yc.push_back(column(t, y));

  std::vector<std::string> order;
  std::map<std::string, Figure> figs;
  for (const auto& row : t.rows) {
    std::string key;
    for (std::size_t c : kc) key += (key.empty() ? "" : ", ") + row[c];
    if (!figs.count(key)) {
      order.push_back(key);
      Figure f;
      f.title = stem + (key.empty() ? "" : ": " + key);
      f.x_label = x_label;
      f.y_label = y_label;
      figs[key] = f;
    }
    auto& fig = figs[key];
    for (std::size_t j = 0; j < yc.size(); ++j) {
      const std::string label = (series_key.empty() ? "" : series_key + "=" + row[sc] + " ") + y_cols[j];
      auto it = std::find_if(fig.series.begin(), fig.series.end(), [&](const Series& s) { return s.label == label; });
      if (it == fig.series.end()) {
        fig.series.push_back(Series{label, {}, {}});
        it = fig.series.end() - 1;
      }
      it->x.push_back(value(row[xc]));
      it->y.push_back(value(row[yc[j]]));
    }
  }
  if (order.empty()) {
    Figure f;
    f.title = stem;
    f.x_label = x_label;
    f.y_label = y_label;
    out.emplace_back(slug(stem), f);
    return;
  }
  for (const auto& key : order) out.emplace_back(slug(stem + (key.empty() ? "" : "_" + key)), figs[key]);
}

}  // namespace

std::vector<std::pair<std::string, Figure>> figures_for(const LoadedReport& r) {
  std::vector<std::pair<std::string, Figure>> out;
  for (const auto& t : r.tables) {
    if (t.name == "concentration") {
      const auto x = r.summary.at("config").contains("params") &&
                             r.summary.at("config")["params"].contains("N_over_n")
                         ? "n"
                         : "N";
      grouped(t, {"ensemble", "class"}, x == std::string("N") ? "n" : "", x,
              {"empirical", "bound_A", "bound_psi2"}, "concentration", x, "sup deviation", out);
    } else if (t.name == "diameters") {
      grouped(t, {"ensemble", "class", "n"}, "N", "m", {"median_Dm"}, "diameters", "m", "median D_m", out);
    } else if (t.name == "sphere_process") {
      grouped(t, {"n"}, "ensemble", "N", {"mean_deviation", "rate_sqrt"}, "sphere_process", "N", "deviation", out);
    } else if (t.name == "shrinking" && std::find(t.columns.begin(), t.columns.end(), "body") != t.columns.end()) {
      grouped(t, {"ensemble", "body", "n"}, "", "k", {"mean_diameter"}, "shrinking", "k", "diameter", out);
    } else if (t.name == "lowmstar") {
      grouped(t, {"ensemble", "body", "n"}, "", "N", {"mean_diameter", "r_star"}, "lowmstar", "N", "diameter", out);
    } else if (t.name == "profile") {
      grouped(t, {"ensemble", "class", "n", "N"}, "trial", "m", {"empirical"}, "profile", "m", "D_m", out);
    } else if (t.name == "opnorm") {
      grouped(t, {"ensemble", "body", "n"}, "p", "N", {"mean", "reference"}, "opnorm", "N", "operator norm", out);
    } else if (t.name == "complexity") {
      grouped(t, {"ensemble", "class"}, "", "n", {"width", "gamma2_upper"}, "complexity", "n", "gamma2", out);
    } else if (t.name == "unconditional") {
      grouped(t, {}, "", "n", {"value"}, "unconditional", "n", "entropy integral", out);
    }
  }
  if (out.empty()) throw std::runtime_error("report has no plottable table");
  return out;
}

std::vector<std::filesystem::path> plot_report(const std::filesystem::path& summary, const std::filesystem::path& dir) {
  const auto rep = load_report(summary);
  const auto figs = figures_for(rep);
  std::filesystem::create_directories(dir);
  std::string stem = summary.stem().string();
  if (stem.ends_with("_summary")) stem.resize(stem.size() - 8);
  std::vector<std::filesystem::path> written;
  for (const auto& [name, fig] : figs) {
    const auto path = dir / (stem + "_" + name + ".svg");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << render_svg(fig);
    written.push_back(path);
  }
  return written;
}

}  // namespace psichain::cli
