#pragma once

#include <vector>

#include "hjnet/network.hpp"

namespace hjnet {

// Space-time lattice over the network: per-arc equispaced nodes whose
// endpoint nodes are shared vertex samples, and a uniform time step over
// [t_start, t_end]. Feasibility requires ds <= kappa*dt on every arc so a
// one-step move to the nearest neighbor always exists.
class SpaceTimeGrid {
public:
    SpaceTimeGrid(const Network* net, double t_start, double t_end, double ds_target, double dt,
                  double kappa);

    const Network& network() const { return *net_; }
    int num_nodes() const { return num_nodes_; }
    int num_steps() const { return num_steps_; }
    double dt() const { return dt_; }
    double kappa() const { return kappa_; }
    double t_start() const { return t_start_; }
    double t_end() const { return t_end_; }
    double time(int k) const { return t_start_ + k * dt_; }

    int cells(int arc) const { return cells_[arc]; }
    double ds(int arc) const { return ds_[arc]; }
    double max_ds() const;
    int reach_cells(int arc) const;  // max cells a single step may cross

    // global node id of the i-th sample on an arc; i=0 is the head vertex,
    // i=cells the tail vertex
    int node_at(int arc, int i) const;
    bool node_is_vertex(int node) const { return node < net_->num_vertices(); }
    int node_vertex(int node) const { return node_is_vertex(node) ? node : -1; }
    NetPoint node_point(int node) const;

    // closest grid time / node to a continuous query
    int time_index(double t, double tol = 1e-9) const;
    int nearest_node(const NetPoint& p) const;

    // piecewise-linear interpolation of a slice along an arc
    double interp(const std::vector<double>& slice, int arc, double offset) const;

private:
    const Network* net_;
    double t_start_, t_end_, dt_, kappa_;
    int num_steps_;
    int num_nodes_;
    std::vector<int> cells_;
    std::vector<double> ds_;
    std::vector<int> interior_base_;  // first interior node id per arc
};

}  // namespace hjnet
