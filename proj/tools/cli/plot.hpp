#pragma once

#include "cli/report.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace psichain::cli {

struct Series {
  std::string label;
  std::vector<double> x, y;
};

struct Figure {
  std::string title;
  std::string x_label, y_label;
  bool log_x = true, log_y = true;
  std::vector<Series> series;
};

// Deterministic SVG; an empty figure renders axes only.
std::string render_svg(const Figure& fig);

// Figures for every plottable table of a report. Throws when a known table
// lacks a required column or when nothing in the report is plottable.
std::vector<std::pair<std::string, Figure>> figures_for(const LoadedReport& r);

// Loads <summary>, renders its figures into `dir`, returns the written paths.
std::vector<std::filesystem::path> plot_report(const std::filesystem::path& summary, const std::filesystem::path& dir);

}  // namespace psichain::cli
