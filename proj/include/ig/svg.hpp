#pragma once

#include <string>
#include <vector>

#include "ig/geometry.hpp"

namespace ig {

// Minimal SVG 1.1 writer with a y-up data coordinate system.
class SvgCanvas {
public:
    SvgCanvas(double x_min, double y_min, double x_max, double y_max, int width_px = 720);

    void rect(double x, double y, double w, double h, const std::string& fill);
    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double width = 1.0);
    void polyline(const std::vector<Cpx>& pts, const std::string& stroke, double width = 1.0);
    void circle(double x, double y, double r_px, const std::string& fill);
    void text(double x, double y, const std::string& s, int size_px = 12);

    std::string str() const;
    void save(const std::string& path) const;

    static std::string hsv(double h, double s, double v);

private:
    double tx(double x) const;
    double ty(double y) const;

    double x0_, y0_, x1_, y1_;
    int w_, h_;
    std::string body_;
};

} // namespace ig
