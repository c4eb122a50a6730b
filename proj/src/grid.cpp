#include "hjnet/grid.hpp"

#include <algorithm>
#include <cmath>

#include "hjnet/common.hpp"

namespace hjnet {

SpaceTimeGrid::SpaceTimeGrid(const Network* net, double t_start, double t_end, double ds_target, double dt,
                             double kappa)
    : net_(net), t_start_(t_start), t_end_(t_end), kappa_(kappa) {
    if (t_end <= t_start) throw Error("grid needs t_end > t_start");
    if (ds_target <= 0 || dt <= 0 || kappa <= 0) throw Error("grid parameters must be positive");
    double span = t_end - t_start;
    num_steps_ = std::max(1, static_cast<int>(std::llround(span / dt)));
    dt_ = span / num_steps_;

    int na = net->num_arcs();
    cells_.resize(na);
    ds_.resize(na);
    interior_base_.resize(na);
    int next = net->num_vertices();
    for (int a = 0; a < na; ++a) {
        double len = net->arc(a).length;
        int n = std::max(1, static_cast<int>(std::ceil(len / ds_target - 1e-12)));
        if (net->arc(a).loop()) n = std::max(n, 2);  // keeps staying and looping distinct
        cells_[a] = n;
        ds_[a] = len / n;
        interior_base_[a] = next;
        next += n - 1;
        if (ds_[a] > kappa_ * dt_ * (1 + 1e-12))
            throw Error("grid infeasible: arc '" + net->arc(a).id + "' has ds=" + format_double(ds_[a]) +
                        " > kappa*dt=" + format_double(kappa_ * dt_));
    }
    num_nodes_ = next;
}

double SpaceTimeGrid::max_ds() const {
    double m = 0;
    for (double d : ds_) m = std::max(m, d);
    return m;
}

int SpaceTimeGrid::reach_cells(int arc) const {
    int r = static_cast<int>(std::floor(kappa_ * dt_ / ds_[arc] + 1e-9));
    return std::max(1, std::min(r, cells_[arc]));
}

int SpaceTimeGrid::node_at(int arc, int i) const {
    if (i == 0) return net_->start_vertex({arc, false});
    if (i == cells_[arc]) return net_->end_vertex({arc, false});
    return interior_base_[arc] + i - 1;
}

NetPoint SpaceTimeGrid::node_point(int node) const {
    if (node_is_vertex(node)) return net_->vertex_point(node);
    for (int a = 0; a < net_->num_arcs(); ++a) {
        int lo = interior_base_[a];
        int hi = lo + cells_[a] - 1;
        if (node >= lo && node < hi) {
            int i = node - lo + 1;
            NetPoint p;
            p.arc = a;
            p.offset = i * ds_[a];
            return p;
        }
    }
    throw Error("node id out of range");
}

int SpaceTimeGrid::time_index(double t, double tol) const {
    double k = (t - t_start_) / dt_;
    int ki = static_cast<int>(std::llround(k));
    if (ki < 0 || ki > num_steps_ || std::abs(k - ki) > tol / dt_ + 1e-9)
        throw Error("time " + format_double(t) + " is not on the grid");
    return ki;
}

int SpaceTimeGrid::nearest_node(const NetPoint& p) const {
    if (p.at_vertex()) return p.vertex;
    int i = static_cast<int>(std::llround(p.offset / ds_[p.arc]));
    i = std::clamp(i, 0, cells_[p.arc]);
    return node_at(p.arc, i);
}

double SpaceTimeGrid::interp(const std::vector<double>& slice, int arc, double offset) const {
    double x = offset / ds_[arc];
    int cell = std::clamp(static_cast<int>(std::floor(x)), 0, cells_[arc] - 1);
    double theta = x - cell;
    double a = slice[node_at(arc, cell)];
    double b = slice[node_at(arc, cell + 1)];
    if (!is_finite_value(a) || !is_finite_value(b)) {
        if (theta <= 1e-12) return a;
        if (theta >= 1 - 1e-12) return b;
        return kInf;
    }
    return (1 - theta) * a + theta * b;
}

}  // namespace hjnet
