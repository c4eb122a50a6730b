#include "hjnet/limiter.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hjnet/common.hpp"

namespace hjnet {

std::string to_string(LimiterProvenance p) {
    switch (p) {
        case LimiterProvenance::user: return "user";
        case LimiterProvenance::maximal: return "maximal";
        case LimiterProvenance::clamped: return "clamped";
    }
    return "?";
}

FluxLimiter::FluxLimiter(const Network* net, double horizon, std::function<double(int, double)> value,
                         LimiterProvenance provenance, double bound, double lipschitz, double lipschitz_eps)
    : net_(net),
      horizon_(horizon),
      value_(std::move(value)),
      provenance_(provenance),
      bound_(bound),
      lipschitz_(lipschitz),
      lipschitz_eps_(lipschitz_eps) {}

FluxLimiter FluxLimiter::maximal(const Conjugator& conj) {
    const Network* net = &conj.family().network();
    double T = conj.family().horizon();
    for (int v = 0; v < net->num_vertices(); ++v)
        if (net->incidence(v).empty()) throw Error("vertex '" + net->vertex_id(v) + "' has empty incidence");
    auto value = [net, &family = conj.family(), conj_ptr = &conj](int vertex, double t) {
        double best = kInf;
        for (OrientedArc oa : net->incidence(vertex)) best = std::min(best, conj_ptr->conjugate(oa, 0.0, 0.0, t).value);
        return best;
    };
    // sampled FL1 bound; FL2 constants transfer from the conjugate side
    double bound = 0.0;
    const int n = 129;
    for (int v = 0; v < net->num_vertices(); ++v)
        for (int j = 0; j < n; ++j) bound = std::max(bound, std::abs(value(v, T * j / (n - 1))));
    return FluxLimiter(net, T, value, LimiterProvenance::maximal, bound * 1.01 + 1e-12, conj.beta_hat(),
                       conj.eps_hat());
}

FluxLimiter FluxLimiter::constant(const Network* net, double horizon, double v) {
    return FluxLimiter(
        net, horizon, [v](int, double) { return v; }, LimiterProvenance::user, std::abs(v) + 1e-12, 1e-12,
        horizon);
}

FluxLimiter FluxLimiter::from_values(const Network* net, double horizon,
                                     std::vector<std::function<double(double)>> per_vertex) {
    if (static_cast<int>(per_vertex.size()) != net->num_vertices())
        throw Error("limiter needs one callable per vertex");
    double bound = 0.0, lip = 0.0;
    const int n = 129;
    double dt = horizon / (n - 1);
    for (int v = 0; v < net->num_vertices(); ++v) {
        double prev = 0.0;
        for (int j = 0; j < n; ++j) {
            double val = per_vertex[v](horizon * j / (n - 1));
            bound = std::max(bound, std::abs(val));
            if (j > 0) lip = std::max(lip, std::abs(val - prev) / dt);
            prev = val;
        }
    }
    auto value = [fns = std::move(per_vertex)](int vertex, double t) { return fns[vertex](t); };
    return FluxLimiter(net, horizon, value, LimiterProvenance::user, bound * 1.01 + 1e-12, lip * 1.1 + 1e-12,
                       horizon);
}

FluxLimiter FluxLimiter::clamp(const FluxLimiter& user, const FluxLimiter& maximal) {
    if (user.net_ != maximal.net_) throw Error("clamp needs limiters over the same network");
    if (user.horizon_ != maximal.horizon_) throw Error("clamp needs limiters over the same horizon");
    auto uv = user.value_;
    auto mv = maximal.value_;
    auto value = [uv, mv](int vertex, double t) { return std::min(uv(vertex, t), mv(vertex, t)); };
    return FluxLimiter(user.net_, user.horizon_, value, LimiterProvenance::clamped,
                       std::max(user.bound_, maximal.bound_), std::max(user.lipschitz_, maximal.lipschitz_),
                       std::min(user.lipschitz_eps_, maximal.lipschitz_eps_));
}

ValidationReport FluxLimiter::validate(const Conjugator* conj, int samples) const {
    ValidationReport rep;
    const int n = samples;
    double dt = horizon_ / (n - 1);
    for (int v = 0; v < net_->num_vertices(); ++v) {
        double worst_bound = 0.0, worst_lip = 0.0, worst_below = 0.0;
        double prev = 0.0;
        for (int j = 0; j < n; ++j) {
            double t = horizon_ * j / (n - 1);
            double c = value_(v, t);
            worst_bound = std::max(worst_bound, std::abs(c) - bound_);
            if (j > 0 && dt < lipschitz_eps_) {
                worst_lip = std::max(worst_lip, std::abs(c - prev) - lipschitz_ * dt - 1e-9 * (1 + std::abs(c)));
            }
            if (conj && provenance_ != LimiterProvenance::user) {
                double maximal = kInf;
                for (OrientedArc oa : net_->incidence(v))
                    maximal = std::min(maximal, conj->conjugate(oa, 0.0, 0.0, t).value);
                worst_below = std::max(worst_below, c - maximal - conj->gap_tol() - 1e-9 * (1 + std::abs(c)));
            }
            prev = c;
        }
        const std::string& id = net_->vertex_id(v);
        if (worst_bound > 0)
            rep.issues.push_back({"limiter-bound", "vertex '" + id + "' exceeds its declared bound by " +
                                                       format_double(worst_bound)});
        if (worst_lip > 0)
            rep.issues.push_back({"limiter-lipschitz", "vertex '" + id + "' violates the one-sided bound by " +
                                                           format_double(worst_lip)});
        if (worst_below > 0)
            rep.issues.push_back({"limiter-below-maximal", "vertex '" + id + "' exceeds the maximal limiter by " +
                                                               format_double(worst_below)});
    }
    return rep;
}

std::string ZenoReport::to_string() const {
    std::ostringstream os;
    for (const auto& v : vertices) {
        os << v.vertex << ": margin " << v.strict_margin;
        if (v.certificate_found)
            os << ", certificate delta=" << v.delta << " eps=" << v.eps;
        else
            os << ", no certificate found";
        os << "\n";
    }
    return os.str();
}

ZenoReport zeno_criteria(const Conjugator& conj, const FluxLimiter& limiter, int depth) {
    const Network& net = limiter.network();
    double T = limiter.horizon();
    double min_len = net.min_arc_length();
    ZenoReport rep;

    const int nt = 129;   // time samples for margins and certificates
    const int ns = 17;    // offset samples inside [0, delta_max]
    double delta_max = min_len / 2;

    for (int v = 0; v < net.num_vertices(); ++v) {
        ZenoVertexReport vr;
        vr.vertex = net.vertex_id(v);
        const auto& inc = net.incidence(v);

        // table of min over incident arcs of L(s,0,r), with prefix minima in s
        std::vector<double> table(ns * nt, kInf);
        for (OrientedArc oa : inc)
            for (int i = 0; i < ns; ++i) {
                double s = delta_max * i / (ns - 1);
                for (int j = 0; j < nt; ++j) {
                    double r = T * j / (nt - 1);
                    double L = conj.conjugate(oa, s, 0.0, r).value;
                    table[i * nt + j] = std::min(table[i * nt + j], L);
                }
            }
        for (int i = 1; i < ns; ++i)
            for (int j = 0; j < nt; ++j)
                table[i * nt + j] = std::min(table[i * nt + j], table[(i - 1) * nt + j]);

        double margin = kInf;
        for (int j = 0; j < nt; ++j) {
            double t = T * j / (nt - 1);
            margin = std::min(margin, table[0 * nt + j] - limiter.value(v, t));
        }
        vr.strict_margin = margin;

        // largest certified box on the geometric grid, scanned by area
        struct Box {
            double delta, eps;
        };
        std::vector<Box> boxes;
        for (int kd = 1; kd <= depth; ++kd)
            for (int ke = 1; ke <= depth; ++ke)
                boxes.push_back({min_len * std::pow(2.0, -kd), T * std::pow(2.0, -ke)});
        std::sort(boxes.begin(), boxes.end(), [](const Box& a, const Box& b) {
            return a.delta * a.eps > b.delta * b.eps;
        });
        for (const Box& box : boxes) {
            double delta = std::min(box.delta, delta_max);
            int di = std::min(ns - 1, static_cast<int>(std::floor(delta / delta_max * (ns - 1))));
            bool ok = true;
            for (int j = 0; j < nt && ok; ++j) {
                double t = T * j / (nt - 1);
                int jlo = std::max(0, static_cast<int>(std::floor((t - box.eps) / T * (nt - 1))));
                int jhi = std::min(nt - 1, static_cast<int>(std::ceil((t + box.eps) / T * (nt - 1))));
                double m = kInf;
                for (int jj = jlo; jj <= jhi; ++jj) m = std::min(m, table[di * nt + jj]);
                if (limiter.value(v, t) > m + 1e-12) ok = false;
            }
            if (ok) {
                vr.certificate_found = true;
                vr.delta = delta;
                vr.eps = box.eps;
                break;
            }
        }
        rep.vertices.push_back(std::move(vr));
    }
    return rep;
}

}  // namespace hjnet
