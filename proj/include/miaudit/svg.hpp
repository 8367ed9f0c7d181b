#pragma once

#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace miaudit::svg {

struct Series {
    std::string label;
    std::string color;
    std::vector<std::pair<double, double>> points;
    bool markers = false;
    bool dashed = false;
};

/// Self-contained SVG line/scatter plot with axes, ticks, and a legend.
class Plot {
  public:
    Plot(std::string title, std::string x_label, std::string y_label,
         int width = 640, int height = 440);

    void add_series(Series series);
    void add_vline(double x, const std::string& color,
                   const std::string& label = "");
    /// Replaces numeric y ticks with named categories at integer positions.
    void set_y_categories(std::vector<std::string> names);
    void set_x_limits(double lo, double hi);
    void set_y_limits(double lo, double hi);

    std::string render() const;

  private:
    std::string title_, x_label_, y_label_;
    int width_, height_;
    std::vector<Series> series_;
    std::vector<std::tuple<double, std::string, std::string>> vlines_;
    std::vector<std::string> y_categories_;
    bool has_x_limits_ = false, has_y_limits_ = false;
    double x_lo_ = 0, x_hi_ = 1, y_lo_ = 0, y_hi_ = 1;
};

}  // namespace miaudit::svg
