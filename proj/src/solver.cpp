#include "hjnet/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "hjnet/common.hpp"

namespace hjnet {

ValidationReport validate_datum(const Network& net, const InitialDatum& datum, int samples, unsigned seed) {
    ValidationReport rep;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> arc_pick(0, net.num_arcs() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        int a1 = arc_pick(rng), a2 = arc_pick(rng);
        NetPoint p = net.make_point(a1, unit(rng) * net.arc(a1).length);
        NetPoint q = net.make_point(a2, unit(rng) * net.arc(a2).length);
        double d = net.distance(p, q);
        double gap = std::abs(datum.value(p) - datum.value(q));
        double allowed = datum.kind == InitialDatum::ModulusKind::lipschitz
                             ? datum.lipschitz_constant * d
                             : (datum.modulus ? datum.modulus(d) : kInf);
        worst = std::max(worst, gap - allowed);
    }
    if (worst > 1e-9)
        rep.issues.push_back({"datum-modulus", "sampled increment exceeds the declared modulus by " +
                                                   format_double(worst)});
    return rep;
}

Solution solve(const Conjugator& conj, const FluxLimiter& limiter, const InitialDatum& datum,
               const SpaceTimeGrid& grid, const SolveOptions& opts) {
    Solution sol;
    sol.limiter = limiter;
    if (limiter.provenance() == LimiterProvenance::user) {
        // clamp-then-solve when the user limiter pokes above the maximal one
        FluxLimiter maximal = FluxLimiter::maximal(conj);
        bool above = false;
        const int n = 2 * grid.num_steps() + 1;
        for (int v = 0; v < grid.network().num_vertices() && !above; ++v)
            for (int j = 0; j < n && !above; ++j) {
                double t = grid.t_start() + (grid.t_end() - grid.t_start()) * j / (n - 1);
                if (limiter.value(v, t) > maximal.value(v, t) + conj.gap_tol()) above = true;
            }
        if (above) {
            sol.limiter = FluxLimiter::clamp(limiter, maximal);
            sol.clamped = true;
        }
    }

    Lagrangian lag(&conj, &sol.limiter);
    Field& field = sol.field;
    field.grid = &grid;
    field.k_begin = 0;
    std::vector<double> init(grid.num_nodes());
    for (int n = 0; n < grid.num_nodes(); ++n) init[n] = datum.value(grid.node_point(n));
    field.slices.push_back(std::move(init));
    std::vector<Foot> feet(grid.num_nodes());
    for (auto& f : feet) f = {Foot::source, -1, 0.0};
    field.feet.push_back(std::move(feet));

    bellman_sweep(lag, grid, field, grid.num_steps(), opts);

    for (const auto& slice : field.slices)
        for (double v : slice)
            if (!is_finite_value(v) || !std::isfinite(v)) throw Error("solve produced a non-finite value");
    return sol;
}

std::vector<double> hopf_lax_oracle(const Conjugator& conj, const FluxLimiter& limiter,
                                    const InitialDatum& datum, double t, const std::vector<NetPoint>& points,
                                    double sample_ds) {
    const Network& net = conj.family().network();
    // domain guard: quadratic kind with zero potential and zero vertex costs
    for (int a = 0; a < net.num_arcs(); ++a) {
        double len = net.arc(a).length;
        for (double s : {0.0, len / 2, len}) {
            if (std::abs(conj.family().eval({a, false}, s, t / 2, 0.0)) > 1e-12 ||
                std::abs(conj.family().eval({a, false}, s, t / 2, 1.0) - 0.5) > 1e-12)
                throw Error("hopf_lax_oracle needs the quadratic kind with zero potential");
        }
    }
    for (int v = 0; v < net.num_vertices(); ++v)
        if (std::abs(limiter.value(v, t / 2)) > 1e-12)
            throw Error("hopf_lax_oracle needs the maximal (zero) limiter");
    if (t <= 0) throw Error("hopf_lax_oracle needs t > 0");

    if (sample_ds <= 0) sample_ds = net.min_arc_length() / 64;
    // start points sampled densely on every arc
    std::vector<NetPoint> starts;
    std::vector<double> start_values;
    for (int a = 0; a < net.num_arcs(); ++a) {
        int n = std::max(1, static_cast<int>(std::ceil(net.arc(a).length / sample_ds)));
        for (int i = 0; i <= n; ++i) {
            NetPoint p = net.make_point(a, net.arc(a).length * i / n);
            starts.push_back(p);
            start_values.push_back(datum.value(p));
        }
    }
    double lo = *std::min_element(start_values.begin(), start_values.end());
    std::vector<double> out;
    out.reserve(points.size());
    for (const NetPoint& x : points) {
        double here = datum.value(x);
        // optimal starts stay within the radius where d^2/(2t) can still win
        double radius = std::sqrt(std::max(0.0, 2 * t * (here - lo))) + sample_ds;
        double best = here;  // staying is free in this regime
        for (std::size_t i = 0; i < starts.size(); ++i) {
            double d = net.distance(starts[i], x);
            if (d > radius) continue;
            best = std::min(best, start_values[i] + d * d / (2 * t));
        }
        out.push_back(best);
    }
    return out;
}

std::string VerifyReport::to_string() const {
    std::ostringstream os;
    os << "fixed_point_residual=" << fixed_point_residual << " worst_curve_slack=" << worst_curve_slack
       << " optimal_equality_gap=" << optimal_equality_gap << " space_time_quotient=" << space_time_quotient
       << " curves_checked=" << curves_checked;
    return os.str();
}

VerifyReport verify_solution(const Conjugator& conj, const Solution& sol, const SpaceTimeGrid& grid,
                             int random_curves, unsigned seed) {
    VerifyReport rep;
    const Network& net = grid.network();
    Lagrangian lag(&conj, &sol.limiter);
    const Field& u = sol.field;
    const int K = grid.num_steps();

    rep.fixed_point_residual = fixed_point_residual(conj, sol.limiter, grid, u).max_residual;

    // stay-curves through every node catch any cell-level violation
    double worst = -kInf;
    for (int n = 0; n < grid.num_nodes(); ++n) {
        NetPoint p = grid.node_point(n);
        for (int k = 0; k + 1 <= K; ++k) {
            double cost = grid.dt() * lag.value(p, 0.0, grid.time(k) + grid.dt() / 2);
            worst = std::max(worst, u.slices[k + 1][n] - u.slices[k][n] - cost);
            ++rep.curves_checked;
        }
    }
    // random in-arc node curves
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> arc_pick(0, net.num_arcs() - 1);
    for (int c = 0; c < random_curves; ++c) {
        int arc = arc_pick(rng);
        int cells = grid.cells(arc);
        if (cells < 3) continue;
        int reach = grid.reach_cells(arc);
        std::uniform_int_distribution<int> node_pick(1, cells - 1);
        std::uniform_int_distribution<int> len_pick(1, std::max(2, K / 2));
        std::uniform_int_distribution<int> hop(-reach, reach);
        int k1 = std::uniform_int_distribution<int>(0, K - 1)(rng);
        int k2 = std::min(K, k1 + len_pick(rng));
        int i = node_pick(rng);
        DiscreteCurve curve;
        curve.dt = grid.dt();
        curve.kappa = grid.kappa();
        double action = 0.0;
        int i_at = i;
        curve.samples.push_back({net.make_point(arc, i_at * grid.ds(arc)), grid.time(k1)});
        for (int k = k1; k < k2; ++k) {
            int j = std::clamp(i_at + hop(rng), 1, cells - 1);
            double lam = (j - i_at) * grid.ds(arc) / grid.dt();
            action += grid.dt() * lag.arc_value(arc, j * grid.ds(arc), lam, grid.time(k) + grid.dt() / 2);
            i_at = j;
            curve.samples.push_back({net.make_point(arc, i_at * grid.ds(arc)), grid.time(k + 1)});
        }
        int n1 = grid.node_at(arc, static_cast<int>(std::llround(curve.samples.front().point.offset / grid.ds(arc))));
        int n2 = grid.node_at(arc, i_at);
        worst = std::max(worst, u.slices[k2][n2] - u.slices[k1][n1] - action);
        ++rep.curves_checked;
    }
    rep.worst_curve_slack = worst;

    // equality along extracted optimal curves from a spread of endpoints
    double gap = 0.0;
    for (int n = 0; n < grid.num_nodes(); n += std::max(1, grid.num_nodes() / 12)) {
        NetPoint end = grid.node_point(n);
        DiscreteCurve curve = extract_curve(lag, grid, u, end, K);
        double action = discrete_action(lag, curve);
        const NetPoint& start = curve.samples.front().point;
        double u_start = start.at_vertex() ? u.slices[0][start.vertex]
                                           : grid.interp(u.slices[0], start.arc, start.offset);
        gap = std::max(gap, std::abs(u.slices[K][n] - u_start - action));
    }
    rep.optimal_equality_gap = gap;

    // empirical space-time modulus over nearby sample pairs
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double quot = 0.0;
    for (int i = 0; i < 200; ++i) {
        int arc = arc_pick(rng);
        double len = net.arc(arc).length;
        double s = unit(rng) * len;
        double h = (unit(rng) + 0.1) * grid.ds(arc);
        double s2 = std::clamp(s + h, 0.0, len);
        int k = std::uniform_int_distribution<int>(1, K - 1)(rng);
        double t = grid.time(k);
        double t2 = std::min(grid.t_end(), t + grid.dt());
        double du = std::abs(u.probe(arc, s2, t2) - u.probe(arc, s, t));
        double den = std::abs(s2 - s) + (t2 - t);
        if (den > 1e-12) quot = std::max(quot, du / den);
    }
    rep.space_time_quotient = quot;
    return rep;
}

SensitivityResult flux_limiter_sensitivity(const Conjugator& conj, const InitialDatum& datum,
                                           const SpaceTimeGrid& grid, const std::vector<FluxLimiter>& limiters,
                                           const std::vector<NetPoint>& probes, double probe_time,
                                           const SolveOptions& opts) {
    SensitivityResult res;
    std::vector<Solution> sols;
    sols.reserve(limiters.size());
    for (std::size_t i = 0; i < limiters.size(); ++i) {
        sols.push_back(solve(conj, limiters[i], datum, grid, opts));
        for (std::size_t p = 0; p < probes.size(); ++p)
            res.table.push_back({static_cast<int>(i), static_cast<int>(p),
                                 sols.back().probe(probes[p], probe_time)});
    }
    // pointwise-smaller limiter must give a pointwise-smaller field
    const int n = grid.num_steps() + 1;
    for (std::size_t i = 0; i < limiters.size(); ++i)
        for (std::size_t j = 0; j < limiters.size(); ++j) {
            if (i == j) continue;
            bool le = true;
            for (int v = 0; v < grid.network().num_vertices() && le; ++v)
                for (int k = 0; k < n && le; ++k)
                    if (limiters[i].value(v, grid.time(k)) > limiters[j].value(v, grid.time(k)) + 1e-12)
                        le = false;
            if (!le) continue;
            for (int k = 0; k < n; ++k)
                for (int nd = 0; nd < grid.num_nodes(); ++nd)
                    if (sols[i].field.slices[k][nd] > sols[j].field.slices[k][nd] + 1e-12) {
                        ++res.monotonicity_violations;
                        k = n;
                        break;
                    }
        }
    return res;
}

}  // namespace hjnet
