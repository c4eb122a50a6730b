#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hjnet {

using Point = std::vector<double>;  // embedding coordinates, dimension N

// Oriented curve of positive length, parameterized by arc length on
// [0, length]. head_vertex is the vertex at offset 0, tail_vertex the one at
// offset length; a loop has both equal. Geometry is optional metadata: the
// solver mathematics only uses (arc, offset).
struct Arc {
    std::string id;
    std::string head_vertex;  // vertex at offset 0
    std::string tail_vertex;  // vertex at offset length
    double length = 0.0;
    std::function<Point(double)> geometry;  // unit-speed, may be empty
    bool loop() const { return head_vertex == tail_vertex; }
};

// Reference to an arc traversed in a given direction. Reversed orientation
// swaps the roles of the endpoints: offset s corresponds to length - s on the
// stored arc.
struct OrientedArc {
    int arc = -1;
    bool reversed = false;
    bool operator==(const OrientedArc&) const = default;
};

// Point of the network in forward arc coordinates. Offsets at an endpoint are
// canonicalized to the vertex, so the two parameterizations of a vertex
// compare equal.
struct NetPoint {
    int arc = -1;
    double offset = 0.0;
    int vertex = -1;  // >= 0 iff the point sits on a vertex

    bool at_vertex() const { return vertex >= 0; }
    bool operator==(const NetPoint& o) const {
        if (at_vertex() || o.at_vertex()) return vertex == o.vertex;
        return arc == o.arc && offset == o.offset;
    }
};

struct ValidationIssue {
    std::string condition;  // e.g. "arc-length", "connectivity", "unit-speed"
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool valid() const { return issues.empty(); }
    std::string to_string() const;
};

struct PathSegment {
    int arc = -1;
    double from = 0.0;  // forward-coordinate offsets
    double to = 0.0;
};

class Network {
public:
    Network() = default;
    Network(std::vector<std::string> vertex_ids, std::vector<Point> vertex_coords, std::vector<Arc> arcs);

    static Network from_json(const std::string& json_text);
    static Network from_json_file(const std::string& path);

    int num_vertices() const { return static_cast<int>(vertex_ids_.size()); }
    int num_arcs() const { return static_cast<int>(arcs_.size()); }
    const Arc& arc(int i) const { return arcs_[i]; }
    const std::string& vertex_id(int i) const { return vertex_ids_[i]; }
    const Point& vertex_coords(int i) const { return vertex_coords_[i]; }
    int vertex_index(const std::string& id) const;
    int arc_index(const std::string& id) const;
    double min_arc_length() const;

    // Oriented arcs starting at the vertex; loops appear with both
    // orientations.
    const std::vector<OrientedArc>& incidence(int vertex) const { return incidence_[vertex]; }

    // Endpoint vertex indices of an arc seen through an orientation.
    int start_vertex(OrientedArc oa) const;
    int end_vertex(OrientedArc oa) const;
    double oriented_offset(OrientedArc oa, double s) const;

    NetPoint make_point(int arc, double offset) const;
    NetPoint make_point(const std::string& arc_id, double offset) const;
    NetPoint vertex_point(int vertex) const;
    Point coords(const NetPoint& p) const;  // requires geometry or vertex coords

    ValidationReport validate(int geometry_samples = 17) const;

    // Geodesic metric of the network. Throws Error on disconnected queries.
    double distance(const NetPoint& a, const NetPoint& b) const;
    std::vector<PathSegment> shortest_path(const NetPoint& a, const NetPoint& b) const;
    double vertex_distance(int va, int vb) const;

private:
    std::vector<std::string> vertex_ids_;
    std::vector<Point> vertex_coords_;
    std::vector<Arc> arcs_;
    std::vector<std::vector<OrientedArc>> incidence_;
    // all-pairs vertex distances plus (pred vertex, pred arc) for paths,
    // filled on construction
    std::vector<std::vector<double>> vdist_;
    std::vector<std::vector<int>> pred_vertex_;
    std::vector<std::vector<int>> pred_arc_;

    void build_indices();
    void run_dijkstra();
};

}  // namespace hjnet
