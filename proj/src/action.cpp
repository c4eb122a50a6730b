#include "hjnet/action.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bellman_impl.hpp"
#include "hjnet/common.hpp"

namespace hjnet {

Lagrangian::Lagrangian(const Conjugator* conj, const FluxLimiter* limiter)
    : conj_(conj), limiter_(limiter) {
    if (&conj->family().network() != &limiter->network())
        throw Error("conjugator and limiter must share a network");
}

double Lagrangian::arc_value(int arc, double s, double lam, double t) const {
    return conj_->conjugate({arc, false}, s, lam, t).value;
}

double Lagrangian::vertex_value(int vertex, double speed, double t) const {
    return speed * speed / 2 + limiter_->value(vertex, t);
}

double Lagrangian::value(const NetPoint& p, double lam, double t) const {
    if (p.at_vertex()) return vertex_value(p.vertex, lam, t);
    return arc_value(p.arc, p.offset, lam, t);
}

double Field::probe(int arc, double offset, double t) const {
    double rel = (t - grid->time(k_begin)) / grid->dt();
    int k = std::clamp(static_cast<int>(std::floor(rel)), 0, num_slices() - 2);
    double w = std::clamp(rel - k, 0.0, 1.0);
    double a = grid->interp(slices[k], arc, offset);
    double b = grid->interp(slices[k + 1], arc, offset);
    return (1 - w) * a + w * b;
}

namespace {

// Per-sweep cache of the node-feet Lagrangian tables. Tables live on the
// (arc, arrival node, hop) lattice; they are refilled per slice only when the
// family is time-dependent.
struct SweepTables {
    const Lagrangian* lag;
    const SpaceTimeGrid* grid;
    bool time_dependent;
    double cached_tmid = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::vector<double>> ltabs;  // per arc

    SweepTables(const Lagrangian* l, const SpaceTimeGrid* g)
        : lag(l), grid(g), time_dependent(l->conjugator().family().time_dependent()) {
        ltabs.resize(g->network().num_arcs());
    }

    void fill(double tmid) {
        if (!ltabs.empty() && !ltabs[0].empty() && (!time_dependent || tmid == cached_tmid)) return;
        cached_tmid = tmid;
        const Network& net = grid->network();
        parallel_for(net.num_arcs(), [&](std::size_t a) {
            int arc = static_cast<int>(a);
            int cells = grid->cells(arc);
            int reach = grid->reach_cells(arc);
            double ds = grid->ds(arc);
            double dt = grid->dt();
            int cols = 2 * reach + 1;
            auto& tab = ltabs[arc];
            tab.assign(static_cast<std::size_t>(cells + 1) * cols, kInf);
            for (int i = 0; i <= cells; ++i)
                for (int d = -reach; d <= reach; ++d) {
                    int j = i - d;
                    if (j < 0 || j > cells) continue;
                    double lam = d * ds / dt;
                    tab[i * cols + (d + reach)] = lag->arc_value(arc, i * ds, lam, tmid);
                }
        });
    }

    detail::ArcSlab slab(int arc) const {
        return {arc,
                grid->cells(arc),
                grid->ds(arc),
                grid->dt(),
                grid->reach_cells(arc),
                grid->kappa(),
                ltabs[arc].data()};
    }
};

}  // namespace

void bellman_sweep(const Lagrangian& lag, const SpaceTimeGrid& grid, Field& field, int steps,
                   const SolveOptions& opts) {
    const Network& net = grid.network();
    const HamiltonianFamily& fam = lag.conjugator().family();
    const bool interp = opts.step == StepKind::interpolated;
    SweepTables tables(&lag, &grid);

    for (int step = 0; step < steps; ++step) {
        int rel = field.num_slices() - 1;
        double tmid = grid.time(field.k_begin + rel) + grid.dt() / 2;
        tables.fill(tmid);

        const std::vector<double>& in = field.slices.back();
        std::vector<double> out(grid.num_nodes(), kInf);
        std::vector<Foot> feet(opts.record_feet ? grid.num_nodes() : 0);

        // local copies of the previous slice per arc, endpoints included
        std::vector<std::vector<double>> arc_in(net.num_arcs());
        for (int a = 0; a < net.num_arcs(); ++a) {
            arc_in[a].resize(grid.cells(a) + 1);
            for (int j = 0; j <= grid.cells(a); ++j) arc_in[a][j] = in[grid.node_at(a, j)];
        }

        // interior arrivals, arc by arc
        parallel_for(net.num_arcs(), [&](std::size_t ai) {
            int arc = static_cast<int>(ai);
            detail::ArcSlab sl = tables.slab(arc);
            auto H = [&](double s, double mu) { return fam.eval({arc, false}, s, tmid, mu); };
            auto Hs = [&](double s, double mu) { return fam.slope({arc, false}, s, tmid, mu); };
            for (int i = 1; i < grid.cells(arc); ++i) {
                double best = kInf;
                Foot foot;
                detail::relax_arrival(sl, arc_in[arc].data(), i, interp, H, Hs, best, foot);
                int node = grid.node_at(arc, i);
                out[node] = best;
                if (opts.record_feet) feet[node] = foot;
            }
        });

        // vertex arrivals: stay first, then incident arcs in incidence order
        parallel_for(net.num_vertices(), [&](std::size_t vi) {
            int v = static_cast<int>(vi);
            double best = kInf;
            Foot foot;
            if (in[v] < kInfGuard) {
                best = in[v] + grid.dt() * lag.vertex_value(v, 0.0, tmid);
                foot = {Foot::stay_vertex, -1, 0.0};
            }
            for (OrientedArc oa : net.incidence(v)) {
                detail::ArcSlab sl = tables.slab(oa.arc);
                auto H = [&](double s, double mu) { return fam.eval({oa.arc, false}, s, tmid, mu); };
                auto Hs = [&](double s, double mu) { return fam.slope({oa.arc, false}, s, tmid, mu); };
                int i = oa.reversed ? grid.cells(oa.arc) : 0;
                detail::relax_arrival(sl, arc_in[oa.arc].data(), i, interp, H, Hs, best, foot);
            }
            out[v] = best;
            if (opts.record_feet) feet[v] = foot;
        });

        field.slices.push_back(std::move(out));
        field.feet.push_back(std::move(feet));
    }
}

namespace {

// Candidate search for one arbitrary arrival point, used by curve extraction
// where arrivals may sit between nodes. Direct Lagrangian evaluations; same
// candidate family as the sweep.
std::pair<double, Foot> relax_point(const Lagrangian& lag, const SpaceTimeGrid& grid,
                                    const std::vector<double>& in, const NetPoint& p, double tmid,
                                    bool interp) {
    const Network& net = grid.network();
    const HamiltonianFamily& fam = lag.conjugator().family();
    double best = kInf;
    Foot foot;
    auto relax_on_arc = [&](int arc, double s_arr) {
        double ds = grid.ds(arc);
        double dt = grid.dt();
        double reach_len = grid.reach_cells(arc) * ds;
        int jlo = std::max(0, static_cast<int>(std::ceil((s_arr - reach_len) / ds - 1e-12)));
        int jhi = std::min(grid.cells(arc), static_cast<int>(std::floor((s_arr + reach_len) / ds + 1e-12)));
        for (int j = jlo; j <= jhi; ++j) {
            double vin = in[grid.node_at(arc, j)];
            if (vin >= kInfGuard) continue;
            double lam = (s_arr - j * ds) / dt;
            double cand = vin + dt * lag.arc_value(arc, s_arr, lam, tmid);
            if (cand < best) {
                best = cand;
                foot = {Foot::on_arc, arc, j * ds};
            }
        }
        if (!interp) return;
        for (int c = jlo; c < jhi; ++c) {
            double va = in[grid.node_at(arc, c)], vb = in[grid.node_at(arc, c + 1)];
            if (va >= kInfGuard || vb >= kInfGuard) continue;
            double g = (vb - va) / ds;
            double lam = fam.slope({arc, false}, s_arr, tmid, g);
            if (!(std::abs(lam) <= grid.kappa())) continue;
            double y = s_arr - lam * dt;
            if (y <= c * ds + 1e-12 * ds || y >= (c + 1) * ds - 1e-12 * ds) continue;
            double theta = (y - c * ds) / ds;
            double cand = (1 - theta) * va + theta * vb +
                          dt * (lam * g - fam.eval({arc, false}, s_arr, tmid, g));
            if (cand < best) {
                best = cand;
                foot = {Foot::on_arc, arc, y};
            }
        }
    };
    if (p.at_vertex()) {
        if (in[p.vertex] < kInfGuard) {
            best = in[p.vertex] + grid.dt() * lag.vertex_value(p.vertex, 0.0, tmid);
            foot = {Foot::stay_vertex, -1, 0.0};
        }
        for (OrientedArc oa : net.incidence(p.vertex))
            relax_on_arc(oa.arc, oa.reversed ? net.arc(oa.arc).length : 0.0);
    } else {
        relax_on_arc(p.arc, p.offset);
    }
    return {best, foot};
}

NetPoint foot_point(const Network& net, const Foot& foot, const NetPoint& at) {
    if (foot.kind == Foot::stay_vertex || foot.kind == Foot::source || foot.kind == Foot::none) return at;
    return net.make_point(foot.arc, foot.y);
}

}  // namespace

DiscreteCurve extract_curve(const Lagrangian& lag, const SpaceTimeGrid& grid, const Field& field,
                            const NetPoint& end, int rel_k_end) {
    const Network& net = grid.network();
    DiscreteCurve curve;
    curve.dt = grid.dt();
    curve.kappa = grid.kappa();
    std::vector<CurveSample> rev;
    NetPoint at = end;
    for (int k = rel_k_end; k > 0; --k) {
        rev.push_back({at, grid.time(field.k_begin + k)});
        Foot foot;
        int node = grid.nearest_node(at);
        bool on_node = field.grid->node_point(node) == at;
        if (on_node && !field.feet[k].empty()) {
            foot = field.feet[k][node];
            if (foot.kind == Foot::none || foot.kind == Foot::source) break;
        } else {
            double tmid = grid.time(field.k_begin + k - 1) + grid.dt() / 2;
            foot = relax_point(lag, grid, field.slices[k - 1], at, tmid, true).second;
            if (foot.kind == Foot::none) break;
        }
        at = foot_point(net, foot, at);
    }
    rev.push_back({at, grid.time(field.k_begin)});
    curve.samples.assign(rev.rbegin(), rev.rend());
    return curve;
}

AdmissibilityReport admissibility_report(const DiscreteCurve& curve) {
    AdmissibilityReport rep;
    const auto& s = curve.samples;
    int last_vertex_idx = -1;
    double shortest = kInf;
    for (int i = 0; i < static_cast<int>(s.size()); ++i) {
        if (!s[i].point.at_vertex()) continue;
        ++rep.vertex_visits;
        if (last_vertex_idx >= 0 && i - last_vertex_idx > 1 &&
            s[last_vertex_idx].point.vertex == s[i].point.vertex) {
            ++rep.excursions;
            shortest = std::min(shortest, (i - last_vertex_idx) * curve.dt);
        }
        last_vertex_idx = i;
    }
    rep.shortest_excursion = rep.excursions > 0 ? shortest : 0.0;
    int n = static_cast<int>(s.size());
    rep.zeno_suspect = rep.excursions > std::max(3, n / 10);
    return rep;
}

std::string AdmissibilityReport::to_string() const {
    std::ostringstream os;
    os << "excursions=" << excursions << " shortest=" << shortest_excursion
       << " vertex_visits=" << vertex_visits << (zeno_suspect ? " ZENO-SUSPECT" : "");
    return os.str();
}

namespace {

// offset of a curve sample inside a given arc chart
double offset_in_arc(const Network& net, const NetPoint& p, int arc, double other_offset) {
    if (!p.at_vertex()) {
        if (p.arc != arc) throw Error("curve samples do not share an arc");
        return p.offset;
    }
    const Arc& a = net.arc(arc);
    bool is_head = net.vertex_index(a.head_vertex) == p.vertex;
    bool is_tail = net.vertex_index(a.tail_vertex) == p.vertex;
    if (!is_head && !is_tail) throw Error("vertex sample is not an endpoint of the step arc");
    if (is_head && is_tail)  // loop: pick the endpoint closer to the partner sample
        return std::abs(other_offset - 0.0) <= std::abs(other_offset - a.length) ? 0.0 : a.length;
    return is_head ? 0.0 : a.length;
}

int common_arc(const Network& net, const NetPoint& a, const NetPoint& b) {
    auto arcs_of = [&](const NetPoint& p) {
        std::vector<int> out;
        if (!p.at_vertex()) {
            out.push_back(p.arc);
        } else {
            for (OrientedArc oa : net.incidence(p.vertex))
                if (out.empty() || out.back() != oa.arc) out.push_back(oa.arc);
        }
        return out;
    };
    for (int x : arcs_of(a))
        for (int y : arcs_of(b))
            if (x == y) return x;
    throw Error("curve step does not stay within one arc");
}

}  // namespace

double discrete_action(const Lagrangian& lag, const DiscreteCurve& curve) {
    if (curve.samples.size() < 2) return 0.0;
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < curve.samples.size(); ++k) {
        const NetPoint& from = curve.samples[k].point;
        const NetPoint& to = curve.samples[k + 1].point;
        double tmid = curve.samples[k].t + curve.dt / 2;
        if (from.at_vertex() && to.at_vertex() && from.vertex == to.vertex) {
            total += curve.dt * lag.vertex_value(from.vertex, 0.0, tmid);
            continue;
        }
        int arc = common_arc(lag.network(), from, to);
        double s_to = offset_in_arc(lag.network(), to, arc, from.at_vertex() ? 0.0 : from.offset);
        double s_from = offset_in_arc(lag.network(), from, arc, s_to);
        double lam = (s_to - s_from) / curve.dt;
        if (curve.kappa > 0 && std::abs(lam) > curve.kappa * (1 + 1e-9))
            throw Error("curve step exceeds the speed cap");
        total += curve.dt * lag.arc_value(arc, s_to, lam, tmid);
    }
    return total;
}

ActionResult minimal_action(const Lagrangian& lag, const SpaceTimeGrid& grid, const NetPoint& x1, double t1,
                            const NetPoint& x2, double t2, const SolveOptions& opts) {
    ActionResult res;
    int k1 = grid.time_index(t1);
    int k2 = grid.time_index(t2);
    if (k2 < k1) throw Error("minimal_action needs t2 >= t1");
    int n1 = grid.nearest_node(x1);
    int n2 = grid.nearest_node(x2);
    if (k1 == k2) {
        res.reachable = n1 == n2;
        res.value = res.reachable ? 0.0 : kInf;
        if (res.reachable) res.curve.samples.push_back({grid.node_point(n1), grid.time(k1)});
        res.curve.dt = grid.dt();
        res.curve.kappa = grid.kappa();
        return res;
    }

    Field field;
    field.grid = &grid;
    field.k_begin = k1;
    field.slices.push_back(std::vector<double>(grid.num_nodes(), kInf));
    field.slices[0][n1] = 0.0;
    std::vector<Foot> source_feet(grid.num_nodes());
    source_feet[n1] = {Foot::source, -1, 0.0};
    field.feet.push_back(std::move(source_feet));

    bellman_sweep(lag, grid, field, k2 - k1, opts);

    double v = field.slices.back()[n2];
    if (v >= kInfGuard) {
        res.reachable = false;
        res.value = kInf;
        return res;
    }
    res.reachable = true;
    res.value = v;
    res.curve = extract_curve(lag, grid, field, grid.node_point(n2), k2 - k1);
    res.admissibility = admissibility_report(res.curve);
    return res;
}

SpeedLedger lipschitz_ledger(const Conjugator& conj, const FluxLimiter& limiter, double ratio_bound) {
    SpeedLedger led;
    const double T = conj.family().horizon();
    const double c_bound = limiter.bound();
    // Overall Lagrangian envelopes combine the conjugate envelopes of the
    // family with the quadratic vertex chart. Diverging conjugates collapse
    // to the sentinel; the lower branch stays usable through the vertex term.
    auto arc_lo = [&](double r) {
        try {
            return conj.lower_conjugate(r);
        } catch (const Error&) {
            return kInf;
        }
    };
    auto arc_hi = [&](double r) {
        try {
            return conj.upper_conjugate(r);
        } catch (const Error&) {
            return kInf;
        }
    };
    auto env_hi = [&](double r) { return std::max(arc_hi(r), r * r / 2 + c_bound); };

    // affine minorant min(arc_lo, quadratic) >= r - A, split branchwise since
    // the min of the two convex branches need not be convex
    {
        // linear continuation below r=0 keeps the objective concave
        ConcaveMax a_arc = maximize_concave([&](double r) { return r - arc_lo(std::max(r, 0.0)); }, 1.0,
                                            4.0, 1e-9, 1e7);
        double a_quad = 0.5 + c_bound;  // sup of r - (r^2/2 - c_bound)
        led.affine_shift = std::max(a_arc.value, a_quad);
    }
    if (led.affine_shift >= kInfGuard) {
        led.found = false;
        led.reason = "no affine minorant of slope 1 below the lower envelope";
        return led;
    }
    led.speed_budget = led.affine_shift + env_hi(ratio_bound);
    if (led.speed_budget >= kInfGuard) {
        led.found = false;
        led.reason = "speed budget diverged: upper envelope conjugate is unbounded at the ratio bound";
        return led;
    }
    double alpha_bar = conj.alpha_hat();
    double beta_bar = std::max(conj.beta_hat(), limiter.lipschitz());
    double eps_bar = std::min(conj.eps_hat(), limiter.lipschitz_eps());
    led.time_shift_cost = 2 * (alpha_bar * led.speed_budget + beta_bar) * T;

    const Network& net = conj.family().network();
    auto subgradients = [&](double q_lo, double q_hi, int n) {
        // momenta realized as argmax over a sample of charts and speeds
        std::vector<double> ps;
        for (int ai = 0; ai < net.num_arcs(); ++ai) {
            double len = net.arc(ai).length;
            for (int is = 0; is < 3; ++is)
                for (int it = 0; it < 3; ++it)
                    for (int iq = 0; iq < n; ++iq) {
                        double q = q_lo + (q_hi - q_lo) * iq / std::max(1, n - 1);
                        for (double sign : {-1.0, 1.0}) {
                            auto c = conj.conjugate({ai, false}, len * is / 2, sign * q, T * it / 2);
                            ps.push_back(std::abs(c.argmax));
                        }
                    }
        }
        for (int iq = 0; iq < n; ++iq)  // vertex chart: subgradient is the speed itself
            ps.push_back(q_lo + (q_hi - q_lo) * iq / std::max(1, n - 1));
        return ps;
    };

    // conjugate of the lower envelope: conjugation turns the min into a max
    // of conjugates, and the arc branch biconjugates back to the declared
    // upper growth envelope
    auto slow_conjugate = [&](double p) {
        return std::max(conj.family().upper_growth(p), p * p / 2 + c_bound);
    };

    double M4 = 4 * led.speed_budget;
    double xi = 0.0;
    try {
        for (double p : subgradients(0.0, M4, 9)) xi = std::max(xi, slow_conjugate(p));
    } catch (const Error&) {
        led.found = false;
        led.reason = "subgradient sweep diverged below speed 4M";
        return led;
    }
    led.slow_conjugate_sup = xi;

    auto upsilon = [&](double kappa) {
        double u = kInf;
        for (double p : subgradients(kappa * (1 + 1e-9), 2 * kappa, 7))
            u = std::min(u, envelope_conjugate(env_hi, p));
        return u;
    };

    double need = led.time_shift_cost + xi;
    double kappa_min = 4 * led.speed_budget * T / eps_bar;
    double lo = std::max(1.0, kappa_min * (1 + 1e-6));
    double hi = lo;
    bool ok = false;
    try {
        for (int j = 0; j < 24; ++j) {
            double u = upsilon(hi);
            led.upsilon_table.push_back({hi, u});
            if (u >= need) {
                ok = true;
                break;
            }
            lo = hi;
            hi *= 2;
        }
        if (ok && hi > lo) {  // tighten on the monotone predicate
            for (int it = 0; it < 12; ++it) {
                double mid = (lo + hi) / 2;
                if (mid <= kappa_min) break;
                double u = upsilon(mid);
                led.upsilon_table.push_back({mid, u});
                if (u >= need)
                    hi = mid;
                else
                    lo = mid;
            }
        }
    } catch (const Error&) {
        led.found = false;
        led.reason = "conjugate sweep diverged during the speed search";
        return led;
    }
    if (!ok) {
        led.found = false;
        led.reason = "no speed cap in range satisfies the reparametrization budget";
        return led;
    }
    led.found = true;
    led.kappa_star = hi;
    std::sort(led.upsilon_table.begin(), led.upsilon_table.end());
    return led;
}

ModulusProbe modulus_probe(const Lagrangian& lag, const SpaceTimeGrid& grid, const std::vector<Quad>& quads,
                           const SolveOptions& opts) {
    ModulusProbe probe;
    const Network& net = grid.network();
    std::vector<double> values(quads.size());
    for (std::size_t i = 0; i < quads.size(); ++i) {
        ActionResult r = minimal_action(lag, grid, quads[i].x1, quads[i].t1, quads[i].x2, quads[i].t2, opts);
        values[i] = r.reachable ? r.value : kInf;
    }
    for (std::size_t i = 0; i < quads.size(); ++i)
        for (std::size_t j = i + 1; j < quads.size(); ++j) {
            if (values[i] >= kInfGuard || values[j] >= kInfGuard) continue;
            double den = net.distance(quads[i].x1, quads[j].x1) + net.distance(quads[i].x2, quads[j].x2) +
                         std::abs(quads[i].t1 - quads[j].t1) + std::abs(quads[i].t2 - quads[j].t2);
            if (den < 1e-12) continue;
            probe.max_quotient = std::max(probe.max_quotient, std::abs(values[i] - values[j]) / den);
            ++probe.pairs;
        }
    return probe;
}

}  // namespace hjnet
