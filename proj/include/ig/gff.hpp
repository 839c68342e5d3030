#pragma once

#include <cstdint>
#include <vector>

#include "ig/geometry.hpp"

namespace ig {

// Rectangle grid: nodes (i,j), 0 <= i <= nx, 0 <= j <= ny, at
// (x0 + i*spacing, y0 + j*spacing).  Interior nodes are 1..nx-1 x 1..ny-1.
struct GridGeometry {
    int nx = 0;
    int ny = 0;
    double x0 = 0.0;
    double y0 = 0.0;
    double spacing = 0.0;

    double x_max() const { return x0 + nx * spacing; }
    double y_max() const { return y0 + ny * spacing; }
    std::size_t node_index(int i, int j) const {
        return static_cast<std::size_t>(j) * (nx + 1) + i;
    }
};

struct BoundarySegment {
    double from;
    double to;
    double value;
};

// Piecewise-constant Dirichlet data on the four rectangle edges.  Bottom and
// top segments are parameterized by x, left and right by y.  Segments must
// cover each edge.
struct BoundarySpec {
    std::vector<BoundarySegment> bottom, top, left, right;

    static BoundarySpec constant(double v);

    // Half-plane style data for flow-line tracing: `values[k]` applies on
    // (breaks[k-1], breaks[k]) of the bottom edge (the simulated real line),
    // using the coupling's height convention.  Headings of e^{i h/chi} are
    // measured from east while coupling heights are measured relative to a
    // north-going curve, so every stored value is the coupling value plus
    // chi*pi/2; the far edges continue the outermost values with the chi *
    // winding correction for the rectangle corners.
    static BoundarySpec real_line_flow(const std::vector<double>& breaks,
                                       const std::vector<double>& coupling_values, double chi);

    double bottom_value(double x) const;
};

// Sampled discrete Gaussian free field: harmonic extension of the boundary
// data plus a zero-boundary sample drawn exactly in the discrete sine
// eigenbasis of the 5-point Dirichlet Laplacian (graph normalization,
// coefficient variance fluctuation_scale / eigenvalue).
class GffField {
public:
    GffField(GridGeometry geom, std::vector<double> values, std::vector<double> harmonic,
             double fluctuation_scale, std::uint64_t seed);

    const GridGeometry& geometry() const { return geom_; }
    double fluctuation_scale() const { return scale_; }
    std::uint64_t seed() const { return seed_; }

    double node(int i, int j) const { return values_[geom_.node_index(i, j)]; }
    double harmonic_node(int i, int j) const { return harmonic_[geom_.node_index(i, j)]; }
    const std::vector<double>& values() const { return values_; }

    // Piecewise-linear interpolation on the NE-diagonal triangulation.
    double evaluate(double x, double y) const;
    double evaluate(Cpx p) const { return evaluate(std::real(p), std::imag(p)); }

    bool contains(double x, double y, double margin = 0.0) const;

    // max |graph Laplacian| of a node field over interior nodes
    double laplacian_residual(bool harmonic_part) const;

private:
    GridGeometry geom_;
    std::vector<double> values_;
    std::vector<double> harmonic_;
    double scale_;
    std::uint64_t seed_;
};

GffField sample_gff(const GridGeometry& geom, const BoundarySpec& boundary,
                    double fluctuation_scale, std::uint64_t seed);

struct CalibrationResult {
    double fluctuation_scale;
    double achieved_qv_rate; // empirical QV per unit capacity at the returned scale
    int bisection_steps;
};

// Empirical bridge between the discrete field normalization and the coupling:
// finds the fluctuation scale at which zero-angle flow lines traced from the
// boundary of a flat-data field have driving quadratic variation kappa per
// unit half-plane capacity (driving recovered with the inverse zipper).
CalibrationResult calibrate_fluctuation_scale(double kappa, int grid, int replicas,
                                              std::uint64_t seed);

} // namespace ig
