#include "ig/svg.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace ig {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

} // namespace

SvgCanvas::SvgCanvas(double x_min, double y_min, double x_max, double y_max, int width_px)
    : x0_(x_min), y0_(y_min), x1_(x_max), y1_(y_max), w_(width_px) {
    double aspect = (y1_ - y0_) / (x1_ - x0_);
    h_ = static_cast<int>(std::lround(w_ * aspect));
}

double SvgCanvas::tx(double x) const { return (x - x0_) / (x1_ - x0_) * w_; }
double SvgCanvas::ty(double y) const { return (y1_ - y) / (y1_ - y0_) * h_; }

void SvgCanvas::rect(double x, double y, double w, double h, const std::string& fill) {
    body_ += "<rect x=\"" + fmt(tx(x)) + "\" y=\"" + fmt(ty(y + h)) + "\" width=\"" +
             fmt(w / (x1_ - x0_) * w_) + "\" height=\"" + fmt(h / (y1_ - y0_) * h_) +
             "\" fill=\"" + fill + "\"/>\n";
}

void SvgCanvas::line(double x1, double y1, double x2, double y2, const std::string& stroke,
                     double width) {
    body_ += "<line x1=\"" + fmt(tx(x1)) + "\" y1=\"" + fmt(ty(y1)) + "\" x2=\"" + fmt(tx(x2)) +
             "\" y2=\"" + fmt(ty(y2)) + "\" stroke=\"" + stroke + "\" stroke-width=\"" +
             fmt(width) + "\"/>\n";
}

void SvgCanvas::polyline(const std::vector<Cpx>& pts, const std::string& stroke, double width) {
    if (pts.size() < 2)
        return;
    body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + fmt(width) +
             "\" points=\"";
    for (const Cpx& p : pts)
        body_ += fmt(tx(std::real(p))) + "," + fmt(ty(std::imag(p))) + " ";
    body_ += "\"/>\n";
}

void SvgCanvas::circle(double x, double y, double r_px, const std::string& fill) {
    body_ += "<circle cx=\"" + fmt(tx(x)) + "\" cy=\"" + fmt(ty(y)) + "\" r=\"" + fmt(r_px) +
             "\" fill=\"" + fill + "\"/>\n";
}

void SvgCanvas::text(double x, double y, const std::string& s, int size_px) {
    body_ += "<text x=\"" + fmt(tx(x)) + "\" y=\"" + fmt(ty(y)) + "\" font-size=\"" +
             std::to_string(size_px) + "\" font-family=\"sans-serif\">" + s + "</text>\n";
}

std::string SvgCanvas::str() const {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
           "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           std::to_string(w_) + "\" height=\"" + std::to_string(h_) + "\" viewBox=\"0 0 " +
           std::to_string(w_) + " " + std::to_string(h_) + "\">\n" + body_ + "</svg>\n";
}

void SvgCanvas::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open " + path);
    out << str();
}

std::string SvgCanvas::hsv(double h, double s, double v) {
    h = std::fmod(std::fmod(h, 360.0) + 360.0, 360.0);
    double c = v * s;
    double x = c * (1.0 - std::fabs(std::fmod(h / 60.0, 2.0) - 1.0));
    double m = v - c;
    double r = 0, g = 0, b = 0;
    if (h < 60) { r = c; g = x; }
    else if (h < 120) { r = x; g = c; }
    else if (h < 180) { g = c; b = x; }
    else if (h < 240) { g = x; b = c; }
    else if (h < 300) { r = x; b = c; }
    else { r = c; b = x; }
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>((r + m) * 255),
                  static_cast<int>((g + m) * 255), static_cast<int>((b + m) * 255));
    return buf;
}

} // namespace ig
