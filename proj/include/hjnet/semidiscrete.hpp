#pragma once

#include <string>
#include <vector>

#include "hjnet/action.hpp"

namespace hjnet {

// Running minimum with integrated cost: out[k] = min_{r<=k} (psi[r] +
// trapezoid integral of cost over [r,k]), computed by the forward recurrence.
std::vector<double> running_min(const std::vector<double>& psi, const std::vector<double>& cost, double dt);

// Boundary and initial data feeding the single-arc fields: values on every
// node of the initial slice plus one time series per vertex.
struct BoundaryTrace {
    std::vector<double> initial;               // per node, at the first slice
    std::vector<std::vector<double>> vertex;   // [vertex][k]
};

BoundaryTrace restrict_to_trace(const Field& field);
void validate_trace(const BoundaryTrace& trace, const SpaceTimeGrid& grid);

// Field of the maximal subsolution on one oriented arc, below the initial
// trace and the far-endpoint series. Index 0 of a slice is the oriented
// start, so start_line() is the time series the vertex operators consume.
struct ArcField {
    OrientedArc oa;
    int cells = 0;
    std::vector<std::vector<double>> values;  // [k][local oriented node]
    std::vector<double> start_line() const;
};

ArcField arc_max_subsolution(const Conjugator& conj, const SpaceTimeGrid& grid, const BoundaryTrace& trace,
                             OrientedArc oa, const SolveOptions& opts = {});

// pointwise min of the incident arc start lines at a vertex
std::vector<double> vertex_min_line(const Conjugator& conj, const SpaceTimeGrid& grid,
                                    const BoundaryTrace& trace, int vertex, const SolveOptions& opts = {});

struct FixedPointReport {
    double max_residual = 0.0;
    std::vector<double> per_vertex;
    std::string to_string() const;
};

// Residual of the vertex fixed-point equation u(x,.) = running_min(vertex
// line of u, limiter at x), with the trace taken from u itself.
FixedPointReport fixed_point_residual(const Conjugator& conj, const FluxLimiter& limiter,
                                      const SpaceTimeGrid& grid, const Field& u,
                                      const SolveOptions& opts = {});

struct OrderingReport {
    double sub_defect = 0.0;      // how far w is from being a subsolution
    double sup_defect = 0.0;      // how far v is from being a supersolution
    double worst_violation = 0.0; // max over nodes/slices of w - v
    bool classified = false;      // both defects within tolerance
    bool ordered = false;         // w <= v + tolerance everywhere
};

OrderingReport ordering_check(const Conjugator& conj, const FluxLimiter& limiter, const SpaceTimeGrid& grid,
                              const Field& w, const Field& v, double tol, const SolveOptions& opts = {});

}  // namespace hjnet
