#pragma once

#include <complex>
#include <string>
#include <vector>

namespace ig {

using Cpx = std::complex<double>;

// A traced curve: positions plus the capacity (or arclength) parameter.
struct Polyline {
    std::vector<double> t;
    std::vector<Cpx> pts;

    std::size_t size() const { return pts.size(); }
    bool empty() const { return pts.empty(); }
};

enum class CloudSource { LightCone, Fan, Trace };

struct PointCloud {
    std::vector<Cpx> pts;
    CloudSource source = CloudSource::Trace;
    std::string meta;

    void add(Cpx p) { pts.push_back(p); }
    void append(const std::vector<Cpx>& other) { pts.insert(pts.end(), other.begin(), other.end()); }
};

} // namespace ig
