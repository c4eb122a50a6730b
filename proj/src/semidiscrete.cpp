#include "hjnet/semidiscrete.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bellman_impl.hpp"
#include "hjnet/common.hpp"

namespace hjnet {

std::vector<double> running_min(const std::vector<double>& psi, const std::vector<double>& cost, double dt) {
    if (psi.size() != cost.size()) throw Error("running_min needs series of equal length");
    if (psi.empty()) return {};
    if (dt <= 0) throw Error("running_min needs dt > 0");
    std::vector<double> out(psi.size());
    out[0] = psi[0];
    for (std::size_t k = 0; k + 1 < psi.size(); ++k) {
        double integral = dt * (cost[k] + cost[k + 1]) / 2;
        out[k + 1] = std::min(psi[k + 1], out[k] + integral);
    }
    return out;
}

BoundaryTrace restrict_to_trace(const Field& field) {
    BoundaryTrace tr;
    tr.initial = field.slices.front();
    int nv = field.grid->network().num_vertices();
    tr.vertex.assign(nv, std::vector<double>(field.num_slices()));
    for (int v = 0; v < nv; ++v)
        for (int k = 0; k < field.num_slices(); ++k) tr.vertex[v][k] = field.slices[k][v];
    return tr;
}

void validate_trace(const BoundaryTrace& trace, const SpaceTimeGrid& grid) {
    if (static_cast<int>(trace.initial.size()) != grid.num_nodes())
        throw Error("trace initial slice does not match the grid");
    if (static_cast<int>(trace.vertex.size()) != grid.network().num_vertices())
        throw Error("trace needs one series per vertex");
    for (int v = 0; v < static_cast<int>(trace.vertex.size()); ++v) {
        if (static_cast<int>(trace.vertex[v].size()) != grid.num_steps() + 1)
            throw Error("vertex series length does not match the grid");
        for (double x : trace.vertex[v])
            if (!std::isfinite(x)) throw Error("trace contains a non-finite value");
        if (std::abs(trace.vertex[v][0] - trace.initial[v]) > 1e-12 * (1 + std::abs(trace.initial[v])))
            throw Error("vertex series disagrees with the initial slice at k=0");
    }
}

std::vector<double> ArcField::start_line() const {
    std::vector<double> line(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) line[k] = values[k][0];
    return line;
}

ArcField arc_max_subsolution(const Conjugator& conj, const SpaceTimeGrid& grid, const BoundaryTrace& trace,
                             OrientedArc oa, const SolveOptions& opts) {
    const Network& net = grid.network();
    const HamiltonianFamily& fam = conj.family();
    const bool interp = opts.step == StepKind::interpolated;
    const int arc = oa.arc;
    const int cells = grid.cells(arc);
    const double ds = grid.ds(arc);
    const double dt = grid.dt();
    const int reach = grid.reach_cells(arc);
    const int cols = 2 * reach + 1;
    const int far_vertex = net.end_vertex(oa);
    const int K = grid.num_steps();

    auto fwd_index = [&](int i) { return oa.reversed ? cells - i : i; };

    ArcField out;
    out.oa = oa;
    out.cells = cells;
    out.values.assign(K + 1, std::vector<double>(cells + 1));
    for (int i = 0; i <= cells; ++i)
        out.values[0][i] = trace.initial[grid.node_at(arc, fwd_index(i))];

    std::vector<double> ltab(static_cast<std::size_t>(cells + 1) * cols, kInf);
    bool tab_ready = false;
    const bool time_dep = fam.time_dependent();
    for (int k = 1; k <= K; ++k) {
        double tmid = grid.time(k - 1) + dt / 2;
        if (!tab_ready || time_dep) {
            for (int i = 0; i <= cells; ++i)
                for (int d = -reach; d <= reach; ++d) {
                    int j = i - d;
                    if (j < 0 || j > cells) continue;
                    ltab[i * cols + (d + reach)] = conj.conjugate(oa, i * ds, d * ds / dt, tmid).value;
                }
            tab_ready = true;
        }
        detail::ArcSlab sl{arc, cells, ds, dt, reach, grid.kappa(), ltab.data()};
        auto H = [&](double s, double mu) { return fam.eval(oa, s, tmid, mu); };
        auto Hs = [&](double s, double mu) { return fam.slope(oa, s, tmid, mu); };
        const double* in = out.values[k - 1].data();
        for (int i = 0; i <= cells; ++i) {
            double best = kInf;
            Foot foot;
            detail::relax_arrival(sl, in, i, interp, H, Hs, best, foot);
            out.values[k][i] = best;
        }
        // boundary injection at the oriented far endpoint after each slice
        out.values[k][cells] = std::min(out.values[k][cells], trace.vertex[far_vertex][k]);
    }
    return out;
}

std::vector<double> vertex_min_line(const Conjugator& conj, const SpaceTimeGrid& grid,
                                    const BoundaryTrace& trace, int vertex, const SolveOptions& opts) {
    const Network& net = grid.network();
    const auto& inc = net.incidence(vertex);
    if (inc.empty()) throw Error("vertex '" + net.vertex_id(vertex) + "' has empty incidence");
    std::vector<double> line(grid.num_steps() + 1, kInf);
    for (OrientedArc oa : inc) {
        ArcField f = arc_max_subsolution(conj, grid, trace, oa, opts);
        std::vector<double> l = f.start_line();
        for (std::size_t k = 0; k < line.size(); ++k) line[k] = std::min(line[k], l[k]);
    }
    return line;
}

std::string FixedPointReport::to_string() const {
    std::ostringstream os;
    os << "max_residual=" << max_residual;
    return os.str();
}

FixedPointReport fixed_point_residual(const Conjugator& conj, const FluxLimiter& limiter,
                                      const SpaceTimeGrid& grid, const Field& u, const SolveOptions& opts) {
    const Network& net = grid.network();
    BoundaryTrace trace = restrict_to_trace(u);
    FixedPointReport rep;
    rep.per_vertex.assign(net.num_vertices(), 0.0);
    int K = grid.num_steps();
    for (int v = 0; v < net.num_vertices(); ++v) {
        std::vector<double> line = vertex_min_line(conj, grid, trace, v, opts);
        std::vector<double> cost(K + 1);
        for (int k = 0; k <= K; ++k) cost[k] = limiter.value(v, grid.time(k));
        std::vector<double> g = running_min(line, cost, grid.dt());
        double worst = 0.0;
        for (int k = 0; k <= K; ++k) worst = std::max(worst, std::abs(u.slices[k][v] - g[k]));
        rep.per_vertex[v] = worst;
        rep.max_residual = std::max(rep.max_residual, worst);
    }
    return rep;
}

namespace {

// signed defects of the fixed-point equation: positive sub_defect means the
// field exceeds its own vertex envelope somewhere
std::pair<double, double> signed_defects(const Conjugator& conj, const FluxLimiter& limiter,
                                         const SpaceTimeGrid& grid, const Field& u,
                                         const SolveOptions& opts) {
    const Network& net = grid.network();
    BoundaryTrace trace = restrict_to_trace(u);
    int K = grid.num_steps();
    double sub = 0.0, sup = 0.0;
    for (int v = 0; v < net.num_vertices(); ++v) {
        std::vector<double> line = vertex_min_line(conj, grid, trace, v, opts);
        std::vector<double> cost(K + 1);
        for (int k = 0; k <= K; ++k) cost[k] = limiter.value(v, grid.time(k));
        std::vector<double> g = running_min(line, cost, grid.dt());
        for (int k = 0; k <= K; ++k) {
            sub = std::max(sub, u.slices[k][v] - g[k]);
            sup = std::max(sup, g[k] - u.slices[k][v]);
        }
    }
    return {sub, sup};
}

}  // namespace

OrderingReport ordering_check(const Conjugator& conj, const FluxLimiter& limiter, const SpaceTimeGrid& grid,
                              const Field& w, const Field& v, double tol, const SolveOptions& opts) {
    OrderingReport rep;
    auto [w_sub, w_sup] = signed_defects(conj, limiter, grid, w, opts);
    auto [v_sub, v_sup] = signed_defects(conj, limiter, grid, v, opts);
    rep.sub_defect = w_sub;
    rep.sup_defect = v_sup;
    rep.classified = w_sub <= tol && v_sup <= tol;
    double worst = -kInf;
    for (int k = 0; k < w.num_slices(); ++k)
        for (int n = 0; n < grid.num_nodes(); ++n) worst = std::max(worst, w.slices[k][n] - v.slices[k][n]);
    rep.worst_violation = worst;
    rep.ordered = worst <= tol;
    return rep;
}

}  // namespace hjnet
