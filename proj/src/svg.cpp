#include "miaudit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <tuple>

#include "miaudit/common.hpp"

namespace miaudit::svg {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_text(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace

Plot::Plot(std::string title, std::string x_label, std::string y_label,
           int width, int height)
    : title_(std::move(title)),
      x_label_(std::move(x_label)),
      y_label_(std::move(y_label)),
      width_(width),
      height_(height) {}

void Plot::add_series(Series series) { series_.push_back(std::move(series)); }

void Plot::add_vline(double x, const std::string& color,
                     const std::string& label) {
    vlines_.emplace_back(x, color, label);
}

void Plot::set_y_categories(std::vector<std::string> names) {
    y_categories_ = std::move(names);
    set_y_limits(-0.5, static_cast<double>(y_categories_.size()) - 0.5);
}

void Plot::set_x_limits(double lo, double hi) {
    has_x_limits_ = true;
    x_lo_ = lo;
    x_hi_ = hi;
}

void Plot::set_y_limits(double lo, double hi) {
    has_y_limits_ = true;
    y_lo_ = lo;
    y_hi_ = hi;
}

std::string Plot::render() const {
    double x_lo = x_lo_, x_hi = x_hi_, y_lo = y_lo_, y_hi = y_hi_;
    if (!has_x_limits_ || !has_y_limits_) {
        bool any = false;
        double min_x = 0, max_x = 1, min_y = 0, max_y = 1;
        for (const Series& s : series_) {
            for (const auto& [x, y] : s.points) {
                if (!any) {
                    min_x = max_x = x;
                    min_y = max_y = y;
                    any = true;
                } else {
                    min_x = std::min(min_x, x);
                    max_x = std::max(max_x, x);
                    min_y = std::min(min_y, y);
                    max_y = std::max(max_y, y);
                }
            }
        }
        if (!has_x_limits_) {
            double pad = (max_x - min_x) * 0.05;
            if (pad == 0) pad = 0.5;
            x_lo = min_x - pad;
            x_hi = max_x + pad;
        }
        if (!has_y_limits_) {
            double pad = (max_y - min_y) * 0.08;
            if (pad == 0) pad = 0.5;
            y_lo = min_y - pad;
            y_hi = max_y + pad;
        }
    }

    const double ml = 64, mr = 18, mt = 42, mb = 52;
    const double pw = width_ - ml - mr, ph = height_ - mt - mb;
    auto sx = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * pw; };
    auto sy = [&](double y) {
        return mt + ph - (y - y_lo) / (y_hi - y_lo) * ph;
    };

    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<!-- " + schema_line("plot") + " -->\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           std::to_string(width_) + "\" height=\"" + std::to_string(height_) +
           "\" font-family=\"sans-serif\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + num(width_ / 2.0) +
           "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
           escape(title_) + "</text>\n";

    // frame
    out += "<rect x=\"" + num(ml) + "\" y=\"" + num(mt) + "\" width=\"" +
           num(pw) + "\" height=\"" + num(ph) +
           "\" fill=\"none\" stroke=\"#444\"/>\n";

    // x ticks
    for (int i = 0; i <= 5; ++i) {
        double v = x_lo + (x_hi - x_lo) * i / 5.0;
        double px = sx(v);
        out += "<line x1=\"" + num(px) + "\" y1=\"" + num(mt + ph) +
               "\" x2=\"" + num(px) + "\" y2=\"" + num(mt + ph + 5) +
               "\" stroke=\"#444\"/>\n";
        out += "<text x=\"" + num(px) + "\" y=\"" + num(mt + ph + 18) +
               "\" text-anchor=\"middle\" font-size=\"11\">" + tick_text(v) +
               "</text>\n";
    }
    // y ticks
    if (y_categories_.empty()) {
        for (int i = 0; i <= 5; ++i) {
            double v = y_lo + (y_hi - y_lo) * i / 5.0;
            double py = sy(v);
            out += "<line x1=\"" + num(ml - 5) + "\" y1=\"" + num(py) +
                   "\" x2=\"" + num(ml) + "\" y2=\"" + num(py) +
                   "\" stroke=\"#444\"/>\n";
            out += "<text x=\"" + num(ml - 8) + "\" y=\"" + num(py + 4) +
                   "\" text-anchor=\"end\" font-size=\"11\">" + tick_text(v) +
                   "</text>\n";
        }
    } else {
        for (std::size_t i = 0; i < y_categories_.size(); ++i) {
            double py = sy(static_cast<double>(i));
            out += "<text x=\"" + num(ml - 8) + "\" y=\"" + num(py + 4) +
                   "\" text-anchor=\"end\" font-size=\"11\">" +
                   escape(y_categories_[i]) + "</text>\n";
        }
    }
    out += "<text x=\"" + num(ml + pw / 2) + "\" y=\"" +
           num(height_ - 12.0) + "\" text-anchor=\"middle\" font-size=\"12\">" +
           escape(x_label_) + "</text>\n";
    out += "<text x=\"16\" y=\"" + num(mt + ph / 2) +
           "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 "
           "16 " +
           num(mt + ph / 2) + ")\">" + escape(y_label_) + "</text>\n";

    for (const auto& [x, color, label] : vlines_) {
        out += "<line x1=\"" + num(sx(x)) + "\" y1=\"" + num(mt) + "\" x2=\"" +
               num(sx(x)) + "\" y2=\"" + num(mt + ph) + "\" stroke=\"" + color +
               "\" stroke-dasharray=\"4 3\"/>\n";
        if (!label.empty())
            out += "<text x=\"" + num(sx(x) + 4) + "\" y=\"" + num(mt + 14) +
                   "\" font-size=\"11\" fill=\"" + color + "\">" +
                   escape(label) + "</text>\n";
    }

    for (const Series& s : series_) {
        if (s.points.size() > 1) {
            std::string path;
            for (const auto& [x, y] : s.points) {
                path += path.empty() ? "M" : " L";
                path += num(sx(x)) + " " + num(sy(y));
            }
            out += "<path d=\"" + path + "\" fill=\"none\" stroke=\"" + s.color +
                   "\" stroke-width=\"1.8\"" +
                   (s.dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
        }
        if (s.markers || s.points.size() == 1)
            for (const auto& [x, y] : s.points)
                out += "<circle cx=\"" + num(sx(x)) + "\" cy=\"" + num(sy(y)) +
                       "\" r=\"3\" fill=\"" + s.color + "\"/>\n";
    }

    // legend
    double ly = mt + 10;
    for (const Series& s : series_) {
        if (s.label.empty()) continue;
        out += "<line x1=\"" + num(ml + 10) + "\" y1=\"" + num(ly) +
               "\" x2=\"" + num(ml + 34) + "\" y2=\"" + num(ly) +
               "\" stroke=\"" + s.color + "\" stroke-width=\"2\"" +
               (s.dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
        out += "<text x=\"" + num(ml + 40) + "\" y=\"" + num(ly + 4) +
               "\" font-size=\"11\">" + escape(s.label) + "</text>\n";
        ly += 16;
    }

    out += "</svg>\n";
    return out;
}

}  // namespace miaudit::svg
