#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "groktopo/ph.hpp"
#include "groktopo/report.hpp"

namespace groktopo::plot {

/// One polyline; a non-empty band draws a shaded [lo, hi] envelope under it.
struct Curve {
    std::string label;
    std::string kind;  // CSS class suffix: "train", "test", "metric"
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> lo;
    std::vector<double> hi;
    int color = 0;
    bool dashed = false;
    bool right_axis = false;
};

struct Figure {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::string y2_label;  // empty: no right axis
    std::optional<std::pair<double, double>> y_range;
    std::optional<std::pair<double, double>> y2_range;
    std::vector<Curve> curves;
};

std::string render(const Figure& figure);

/// Persistence-diagram scatter with the diagonal. Finite bars are circles
/// (class "h0" / "h1") carrying a <title> with the exact (birth, death); the
/// essential H0 class is drawn as a triangle on the top edge.
std::string diagram_svg(const PersistenceDiagram& diagram, const std::string& title);

/// Mean and sample SD over seeds at each step.
struct Band {
    std::vector<double> x;
    std::vector<double> mean;
    std::vector<double> lo;
    std::vector<double> hi;
};
Band seed_band(const std::vector<std::vector<double>>& per_seed, const std::vector<double>& x);

/// accuracy_<group>.svg: train and test accuracy per p_frac (mean ± 1 SD);
/// <metric>_<layer>_<group>.svg: the metric per p_frac with its seed band and
/// test accuracy on the right axis. Returns the files written.
std::vector<std::filesystem::path> plot_runs(const std::vector<RunData>& runs, const std::filesystem::path& out_dir);

/// Renders a diagram CSV to <out_dir>/<stem>.svg.
std::filesystem::path plot_diagram(const std::filesystem::path& diagram_csv, const std::filesystem::path& out_dir);

}  // namespace groktopo::plot
