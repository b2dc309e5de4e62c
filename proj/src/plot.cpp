#include "longctl/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include "longctl/controller.hpp"

namespace longctl {

namespace {

constexpr int kWidth = 860;
constexpr int kPanelHeight = 220;
constexpr int kMarginLeft = 60;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 30;
constexpr int kMarginBottom = 35;

struct Series {
  std::string label;
  std::string color;
  // (t, value) pairs; gaps (absent samples) split the polyline
  std::vector<std::vector<std::pair<double, double>>> runs;
};

Series make_series(const Trajectory& traj, const std::string& label,
                   const std::string& color,
                   const std::function<std::optional<double>(const TrajectoryRecord&)>& get) {
  Series s{label, color, {}};
  std::vector<std::pair<double, double>> run;
  for (const auto& r : traj.records) {
    if (auto v = get(r)) {
      run.emplace_back(r.t, *v);
    } else if (!run.empty()) {
      s.runs.push_back(std::move(run));
      run.clear();
    }
  }
  if (!run.empty()) s.runs.push_back(std::move(run));
  return s;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

void render_panel(std::ostringstream& out, const std::vector<Series>& series,
                  const std::string& y_label, double t_min, double t_max,
                  int y_offset, bool last_panel) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    for (const auto& run : s.runs) {
      for (const auto& [t, v] : run) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-9) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  const int plot_w = kWidth - kMarginLeft - kMarginRight;
  const int plot_h = kPanelHeight - kMarginTop - kMarginBottom;
  auto px = [&](double t) {
    return kMarginLeft + plot_w * (t - t_min) / (t_max - t_min);
  };
  auto py = [&](double v) {
    return y_offset + kMarginTop + plot_h * (hi - v) / (hi - lo);
  };

  out << "<rect x='" << kMarginLeft << "' y='" << y_offset + kMarginTop
      << "' width='" << plot_w << "' height='" << plot_h
      << "' fill='none' stroke='#888'/>\n";

  // horizontal grid + y labels
  for (int i = 0; i <= 4; ++i) {
    const double v = lo + (hi - lo) * i / 4.0;
    const double y = py(v);
    out << "<line x1='" << kMarginLeft << "' y1='" << y << "' x2='"
        << kMarginLeft + plot_w << "' y2='" << y
        << "' stroke='#ddd' stroke-width='0.5'/>\n";
    out << "<text x='" << kMarginLeft - 6 << "' y='" << y + 4
        << "' font-size='11' text-anchor='end'>" << fmt(v) << "</text>\n";
  }
  // x ticks
  for (int i = 0; i <= 5; ++i) {
    const double t = t_min + (t_max - t_min) * i / 5.0;
    const double x = px(t);
    out << "<line x1='" << x << "' y1='" << y_offset + kMarginTop + plot_h
        << "' x2='" << x << "' y2='" << y_offset + kMarginTop + plot_h + 4
        << "' stroke='#888'/>\n";
    if (last_panel) {
      out << "<text x='" << x << "' y='" << y_offset + kMarginTop + plot_h + 18
          << "' font-size='11' text-anchor='middle'>" << fmt(t) << "</text>\n";
    }
  }
  out << "<text x='" << 14 << "' y='"
      << y_offset + kMarginTop + plot_h / 2
      << "' font-size='12' text-anchor='middle' transform='rotate(-90 14 "
      << y_offset + kMarginTop + plot_h / 2 << ")'>" << y_label << "</text>\n";

  int legend_x = kMarginLeft + 10;
  for (const auto& s : series) {
    for (const auto& run : s.runs) {
      out << "<polyline fill='none' stroke='" << s.color
          << "' stroke-width='1.3' points='";
      for (const auto& [t, v] : run) {
        out << fmt(px(t)) << ',' << fmt(py(v)) << ' ';
      }
      out << "'/>\n";
    }
    out << "<text x='" << legend_x << "' y='" << y_offset + kMarginTop - 6
        << "' font-size='11' fill='" << s.color << "'>" << s.label << "</text>\n";
    legend_x += static_cast<int>(s.label.size()) * 7 + 24;
  }
}

}  // namespace

std::string render_svg(const Trajectory& traj, const ControllerParams& params,
                       const std::string& title) {
  const double t_min = traj.records.empty() ? 0.0 : traj.records.front().t;
  const double t_max = traj.records.empty() ? 1.0 : traj.records.back().t;

  auto opt = [](double v) { return std::optional<double>(v); };

  std::vector<Series> distance = {
      make_series(traj, "h", "#c0392b",
                  [](const TrajectoryRecord& r) { return r.h; }),
      make_series(traj, "h_des", "#27ae60",
                  [&](const TrajectoryRecord& r) -> std::optional<double> {
                    if (!r.v_P) return std::nullopt;
                    return desired_distance(*r.v_P, params);
                  }),
  };
  std::vector<Series> speed = {
      make_series(traj, "v_H", "#c0392b",
                  [&](const TrajectoryRecord& r) { return opt(r.v_H); }),
      make_series(traj, "v_des", "#27ae60",
                  [&](const TrajectoryRecord& r) { return opt(r.v_des); }),
      make_series(traj, "v_P", "#2980b9",
                  [](const TrajectoryRecord& r) { return r.v_P; }),
  };
  std::vector<Series> accel = {
      make_series(traj, "a_H", "#c0392b",
                  [&](const TrajectoryRecord& r) { return opt(r.a_H); }),
      make_series(traj, "u", "#2980b9",
                  [&](const TrajectoryRecord& r) { return opt(r.u); }),
      make_series(traj, "a_des", "#27ae60",
                  [&](const TrajectoryRecord& r) { return opt(r.a_des); }),
  };

  std::ostringstream out;
  const int height = 3 * kPanelHeight + 20;
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth
      << "' height='" << height << "' font-family='sans-serif'>\n";
  out << "<text x='" << kWidth / 2
      << "' y='16' font-size='14' text-anchor='middle'>" << title << "</text>\n";
  render_panel(out, distance, "distance [m]", t_min, t_max, 10, false);
  render_panel(out, speed, "speed [m/s]", t_min, t_max, 10 + kPanelHeight, false);
  render_panel(out, accel, "acceleration [m/s^2]", t_min, t_max,
               10 + 2 * kPanelHeight, true);
  out << "<text x='" << kWidth / 2 << "' y='" << height - 4
      << "' font-size='12' text-anchor='middle'>t [s]</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace longctl
