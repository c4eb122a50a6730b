#include "hjnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "hjnet/common.hpp"

namespace hjnet {

namespace {

double euclid(const Point& a, const Point& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
        double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

// Unit-speed reparametrization of a polyline.
std::function<Point(double)> polyline_geometry(std::vector<Point> pts, double* out_length) {
    std::vector<double> cum(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i) cum[i] = cum[i - 1] + euclid(pts[i - 1], pts[i]);
    double total = cum.back();
    if (out_length) *out_length = total;
    return [pts = std::move(pts), cum = std::move(cum)](double s) {
        auto it = std::upper_bound(cum.begin(), cum.end(), s);
        std::size_t hi = std::min<std::size_t>(it - cum.begin(), cum.size() - 1);
        if (hi == 0) return pts.front();
        std::size_t lo = hi - 1;
        double seg = cum[hi] - cum[lo];
        double w = seg > 0 ? (s - cum[lo]) / seg : 0.0;
        w = std::clamp(w, 0.0, 1.0);
        Point out(pts[lo].size());
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = (1 - w) * pts[lo][k] + w * pts[hi][k];
        return out;
    };
}

std::function<Point(double)> segment_geometry(Point a, Point b, double length) {
    return [a = std::move(a), b = std::move(b), length](double s) {
        double w = length > 0 ? std::clamp(s / length, 0.0, 1.0) : 0.0;
        Point out(a.size());
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = (1 - w) * a[k] + w * b[k];
        return out;
    };
}

}  // namespace

std::string ValidationReport::to_string() const {
    if (valid()) return "valid";
    std::ostringstream os;
    for (const auto& i : issues) os << i.condition << ": " << i.detail << "\n";
    return os.str();
}

Network::Network(std::vector<std::string> vertex_ids, std::vector<Point> vertex_coords, std::vector<Arc> arcs)
    : vertex_ids_(std::move(vertex_ids)), vertex_coords_(std::move(vertex_coords)), arcs_(std::move(arcs)) {
    build_indices();
    run_dijkstra();
}

void Network::build_indices() {
    // Sort by id so file ordering does not leak into outputs.
    std::vector<std::size_t> vorder(vertex_ids_.size());
    for (std::size_t i = 0; i < vorder.size(); ++i) vorder[i] = i;
    std::sort(vorder.begin(), vorder.end(),
              [&](std::size_t a, std::size_t b) { return vertex_ids_[a] < vertex_ids_[b]; });
    std::vector<std::string> vids;
    std::vector<Point> vcoords;
    for (std::size_t i : vorder) {
        vids.push_back(vertex_ids_[i]);
        vcoords.push_back(i < vertex_coords_.size() ? vertex_coords_[i] : Point{});
    }
    vertex_ids_ = std::move(vids);
    vertex_coords_ = std::move(vcoords);
    std::sort(arcs_.begin(), arcs_.end(), [](const Arc& a, const Arc& b) { return a.id < b.id; });

    incidence_.assign(vertex_ids_.size(), {});
    for (int ai = 0; ai < num_arcs(); ++ai) {
        int h = vertex_index(arcs_[ai].head_vertex);
        int t = vertex_index(arcs_[ai].tail_vertex);
        if (h < 0 || t < 0) throw Error("arc '" + arcs_[ai].id + "' references unknown vertex");
        incidence_[h].push_back({ai, false});
        incidence_[t].push_back({ai, true});
    }
}

void Network::run_dijkstra() {
    int nv = num_vertices();
    vdist_.assign(nv, std::vector<double>(nv, kInf));
    pred_vertex_.assign(nv, std::vector<int>(nv, -1));
    pred_arc_.assign(nv, std::vector<int>(nv, -1));
    for (int src = 0; src < nv; ++src) {
        auto& dist = vdist_[src];
        dist[src] = 0.0;
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        pq.push({0.0, src});
        while (!pq.empty()) {
            auto [d, v] = pq.top();
            pq.pop();
            if (d > dist[v]) continue;
            for (OrientedArc oa : incidence_[v]) {
                int w = end_vertex(oa);
                double nd = d + arcs_[oa.arc].length;
                if (nd < dist[w]) {
                    dist[w] = nd;
                    pred_vertex_[src][w] = v;
                    pred_arc_[src][w] = oa.arc;
                    pq.push({nd, w});
                }
            }
        }
    }
}

int Network::vertex_index(const std::string& id) const {
    auto it = std::lower_bound(vertex_ids_.begin(), vertex_ids_.end(), id);
    if (it == vertex_ids_.end() || *it != id) return -1;
    return static_cast<int>(it - vertex_ids_.begin());
}

int Network::arc_index(const std::string& id) const {
    for (int i = 0; i < num_arcs(); ++i)
        if (arcs_[i].id == id) return i;
    return -1;
}

double Network::min_arc_length() const {
    double m = kInf;
    for (const Arc& a : arcs_) m = std::min(m, a.length);
    return m;
}

int Network::start_vertex(OrientedArc oa) const {
    const Arc& a = arcs_[oa.arc];
    return vertex_index(oa.reversed ? a.tail_vertex : a.head_vertex);
}

int Network::end_vertex(OrientedArc oa) const {
    const Arc& a = arcs_[oa.arc];
    return vertex_index(oa.reversed ? a.head_vertex : a.tail_vertex);
}

double Network::oriented_offset(OrientedArc oa, double s) const {
    return oa.reversed ? arcs_[oa.arc].length - s : s;
}

NetPoint Network::make_point(int arc, double offset) const {
    if (arc < 0 || arc >= num_arcs()) throw Error("arc index out of range");
    const Arc& a = arcs_[arc];
    double snap = 1e-9 * std::max(1.0, a.length);
    NetPoint p;
    p.arc = arc;
    p.offset = std::clamp(offset, 0.0, a.length);
    if (p.offset <= snap) {
        p.offset = 0.0;
        p.vertex = vertex_index(a.head_vertex);
    } else if (p.offset >= a.length - snap) {
        p.offset = a.length;
        p.vertex = vertex_index(a.tail_vertex);
    }
    return p;
}

NetPoint Network::make_point(const std::string& arc_id, double offset) const {
    int ai = arc_index(arc_id);
    if (ai < 0) throw Error("unknown arc '" + arc_id + "'");
    return make_point(ai, offset);
}

NetPoint Network::vertex_point(int vertex) const {
    for (int ai = 0; ai < num_arcs(); ++ai) {
        if (vertex_index(arcs_[ai].head_vertex) == vertex) return {ai, 0.0, vertex};
        if (vertex_index(arcs_[ai].tail_vertex) == vertex) return {ai, arcs_[ai].length, vertex};
    }
    throw Error("vertex has no incident arc");
}

Point Network::coords(const NetPoint& p) const {
    if (p.at_vertex()) return vertex_coords_[p.vertex];
    const Arc& a = arcs_[p.arc];
    if (!a.geometry) throw Error("arc '" + a.id + "' carries no geometry");
    return a.geometry(p.offset);
}

ValidationReport Network::validate(int geometry_samples) const {
    ValidationReport rep;
    if (arcs_.empty()) {
        rep.issues.push_back({"arc-length", "network has no arcs"});
        return rep;
    }
    for (const Arc& a : arcs_) {
        if (!(a.length > 0.0))
            rep.issues.push_back({"arc-length", "arc '" + a.id + "' has non-positive length"});
    }
    for (int v = 0; v < num_vertices(); ++v) {
        if (incidence_[v].empty())
            rep.issues.push_back({"local-finiteness", "vertex '" + vertex_ids_[v] + "' has no incident arc"});
    }
    // connectivity over the incidence structure
    if (num_vertices() > 0) {
        std::vector<char> seen(num_vertices(), 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (OrientedArc oa : incidence_[v]) {
                int w = end_vertex(oa);
                if (w >= 0 && !seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
            }
        }
        for (int v = 0; v < num_vertices(); ++v)
            if (!seen[v])
                rep.issues.push_back({"connectivity", "vertex '" + vertex_ids_[v] + "' unreachable from '" +
                                                          vertex_ids_[0] + "'"});
    }
    // unit-speed sampling and endpoint consistency
    for (const Arc& a : arcs_) {
        if (!a.geometry || !(a.length > 0.0)) continue;
        double tol = 1e-7 * std::max(1.0, a.length);
        int hv = vertex_index(a.head_vertex);
        int tv = vertex_index(a.tail_vertex);
        if (hv >= 0 && !vertex_coords_[hv].empty() && euclid(a.geometry(0.0), vertex_coords_[hv]) > 1e-7)
            rep.issues.push_back({"endpoint", "arc '" + a.id + "' start does not match vertex coordinates"});
        if (tv >= 0 && !vertex_coords_[tv].empty() && euclid(a.geometry(a.length), vertex_coords_[tv]) > 1e-7)
            rep.issues.push_back({"endpoint", "arc '" + a.id + "' end does not match vertex coordinates"});
        bool flagged = false;
        for (int i = 0; i < geometry_samples && !flagged; ++i) {
            for (int j = i + 1; j < geometry_samples && !flagged; ++j) {
                double si = a.length * i / (geometry_samples - 1);
                double sj = a.length * j / (geometry_samples - 1);
                if (euclid(a.geometry(si), a.geometry(sj)) > std::abs(si - sj) + tol) {
                    rep.issues.push_back({"unit-speed", "arc '" + a.id + "' violates the unit-speed bound"});
                    flagged = true;
                }
            }
        }
    }
    return rep;
}

double Network::vertex_distance(int va, int vb) const {
    double d = vdist_[va][vb];
    if (!is_finite_value(d)) throw Error("vertices are not connected");
    return d;
}

double Network::distance(const NetPoint& a, const NetPoint& b) const {
    if (a == b) return 0.0;
    double best = kInf;
    if (a.arc == b.arc) best = std::abs(a.offset - b.offset);
    const Arc& aa = arcs_[a.arc];
    const Arc& ab = arcs_[b.arc];
    std::array<std::pair<int, double>, 2> ends_a = {
        std::pair{vertex_index(aa.head_vertex), a.offset},
        std::pair{vertex_index(aa.tail_vertex), aa.length - a.offset}};
    std::array<std::pair<int, double>, 2> ends_b = {
        std::pair{vertex_index(ab.head_vertex), b.offset},
        std::pair{vertex_index(ab.tail_vertex), ab.length - b.offset}};
    for (auto [va, da] : ends_a)
        for (auto [vb, db] : ends_b)
            if (va >= 0 && vb >= 0) best = std::min(best, da + vdist_[va][vb] + db);
    if (!is_finite_value(best)) throw Error("points are not connected");
    return best;
}

std::vector<PathSegment> Network::shortest_path(const NetPoint& a, const NetPoint& b) const {
    std::vector<PathSegment> path;
    if (a == b) return path;
    const Arc& aa = arcs_[a.arc];
    const Arc& ab = arcs_[b.arc];
    // endpoint candidates: (vertex, distance along the arc, target offset)
    struct End {
        int vertex;
        double leg;
        double offset;
    };
    std::array<End, 2> ends_a = {End{vertex_index(aa.head_vertex), a.offset, 0.0},
                                 End{vertex_index(aa.tail_vertex), aa.length - a.offset, aa.length}};
    std::array<End, 2> ends_b = {End{vertex_index(ab.head_vertex), b.offset, 0.0},
                                 End{vertex_index(ab.tail_vertex), ab.length - b.offset, ab.length}};
    double best = a.arc == b.arc ? std::abs(a.offset - b.offset) : kInf;
    const End* pick_a = nullptr;
    const End* pick_b = nullptr;
    for (const End& ea : ends_a)
        for (const End& eb : ends_b)
            if (ea.vertex >= 0 && eb.vertex >= 0 && ea.leg + vdist_[ea.vertex][eb.vertex] + eb.leg < best) {
                best = ea.leg + vdist_[ea.vertex][eb.vertex] + eb.leg;
                pick_a = &ea;
                pick_b = &eb;
            }
    if (!is_finite_value(best)) throw Error("points are not connected");
    if (!pick_a) {
        path.push_back({a.arc, a.offset, b.offset});
        return path;
    }
    if (pick_a->offset != a.offset) path.push_back({a.arc, a.offset, pick_a->offset});
    // vertex chain, reconstructed backwards from the predecessor tables
    std::vector<std::pair<int, int>> chain;  // (arc, arriving vertex)
    for (int v = pick_b->vertex; v != pick_a->vertex;) {
        int pv = pred_vertex_[pick_a->vertex][v];
        int pa = pred_arc_[pick_a->vertex][v];
        chain.push_back({pa, v});
        v = pv;
    }
    std::reverse(chain.begin(), chain.end());
    int at = pick_a->vertex;
    for (auto [arc, to_vertex] : chain) {
        const Arc& ac = arcs_[arc];
        bool forward = vertex_index(ac.head_vertex) == at;
        if (forward)
            path.push_back({arc, 0.0, ac.length});
        else
            path.push_back({arc, ac.length, 0.0});
        at = to_vertex;
    }
    if (pick_b->offset != b.offset) path.push_back({b.arc, pick_b->offset, b.offset});
    return path;
}

Network Network::from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    std::vector<std::string> vids;
    std::vector<Point> vcoords;
    for (const auto& v : j.at("vertices")) {
        vids.push_back(v.at("id").get<std::string>());
        Point c;
        if (v.contains("coords"))
            for (const auto& x : v["coords"]) c.push_back(x.get<double>());
        vcoords.push_back(c);
    }
    auto coords_of = [&](const std::string& id) -> Point {
        for (std::size_t i = 0; i < vids.size(); ++i)
            if (vids[i] == id) return vcoords[i];
        return {};
    };
    std::vector<Arc> arcs;
    for (const auto& a : j.at("arcs")) {
        Arc arc;
        arc.id = a.at("id").get<std::string>();
        arc.head_vertex = a.at("head").get<std::string>();
        arc.tail_vertex = a.at("tail").get<std::string>();
        if (a.contains("length")) arc.length = a["length"].get<double>();
        if (a.contains("geometry")) {
            const auto& g = a["geometry"];
            if (g.is_array()) {
                std::vector<Point> pts;
                for (const auto& p : g) {
                    Point q;
                    for (const auto& x : p) q.push_back(x.get<double>());
                    pts.push_back(q);
                }
                double plen = 0.0;
                arc.geometry = polyline_geometry(std::move(pts), &plen);
                if (arc.length == 0.0) arc.length = plen;
            } else if (g.is_string() && g.get<std::string>() == "segment") {
                Point pa = coords_of(arc.head_vertex), pb = coords_of(arc.tail_vertex);
                if (arc.length == 0.0) arc.length = euclid(pa, pb);
                arc.geometry = segment_geometry(pa, pb, arc.length);
            }
        } else {
            Point pa = coords_of(arc.head_vertex), pb = coords_of(arc.tail_vertex);
            if (!pa.empty() && !pb.empty()) {
                if (arc.length == 0.0) arc.length = euclid(pa, pb);
                arc.geometry = segment_geometry(pa, pb, arc.length);
            }
        }
        arcs.push_back(std::move(arc));
    }
    return Network(std::move(vids), std::move(vcoords), std::move(arcs));
}

Network Network::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open network file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

}  // namespace hjnet
