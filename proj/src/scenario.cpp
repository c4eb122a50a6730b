#include "hjnet/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "hjnet/common.hpp"

namespace hjnet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

HamiltonianSpec parse_ham(const json& j) {
    HamiltonianSpec h;
    if (j.contains("kind")) h.kind = j["kind"].get<std::string>();
    if (j.contains("potential")) h.potential = j["potential"].get<std::string>();
    if (j.contains("exponent")) h.exponent = j["exponent"].get<double>();
    if (j.contains("scale")) h.scale = j["scale"].get<double>();
    return h;
}

LimiterSpec parse_limiter(const json& j) {
    LimiterSpec l;
    if (j.is_string()) {
        if (j.get<std::string>() != "maximal") throw Error("unknown flux_limiter '" + j.get<std::string>() + "'");
        l.mode = LimiterSpec::Mode::maximal;
        return l;
    }
    if (j.contains("clamp")) {
        l = parse_limiter(j["clamp"]);
        l.mode = LimiterSpec::Mode::clamp;
        return l;
    }
    l.mode = LimiterSpec::Mode::expressions;
    if (j.contains("default")) l.fallback = j["default"].get<std::string>();
    if (j.contains("values"))
        for (auto& [k, v] : j["values"].items())
            l.per_vertex[k] = v.is_number() ? format_double(v.get<double>()) : v.get<std::string>();
    return l;
}

}  // namespace

Scenario Scenario::load_file(const std::string& path) {
    return load_text(slurp(path), fs::path(path).parent_path().string());
}

Scenario Scenario::load_text(const std::string& json_text, const std::string& base_dir) {
    json j = json::parse(json_text);
    if (j.contains("scenario")) j = j["scenario"];  // manifest round-trip
    Scenario sc;
    if (j.contains("name")) sc.name = j["name"].get<std::string>();
    if (j.contains("experiment")) sc.experiment = j["experiment"].get<std::string>();
    if (j.contains("horizon")) sc.horizon = j["horizon"].get<double>();

    if (j.contains("network_file")) {
        fs::path p = j["network_file"].get<std::string>();
        if (p.is_relative()) p = fs::path(base_dir) / p;
        json net_json = json::parse(slurp(p.string()));
        sc.net = Network::from_json(net_json.dump());
        j["network"] = net_json;  // resolve for the manifest
        j.erase("network_file");
    } else if (j.contains("network")) {
        sc.net = Network::from_json(j["network"].dump());
    } else {
        throw Error("scenario needs a network or network_file");
    }

    if (j.contains("grid")) {
        const json& g = j["grid"];
        if (g.contains("ds")) sc.ds = g["ds"].get<double>();
        if (g.contains("dt")) sc.dt = g["dt"].get<double>();
        if (g.contains("kappa") && !g["kappa"].is_string()) sc.kappa = g["kappa"].get<double>();
    }
    if (j.contains("step")) sc.step = j["step"].get<std::string>();

    if (j.contains("hamiltonian")) {
        const json& h = j["hamiltonian"];
        if (h.contains("default")) sc.default_hamiltonian = parse_ham(h["default"]);
        if (h.contains("per_arc"))
            for (auto& [k, v] : h["per_arc"].items()) sc.per_arc_hamiltonian[k] = parse_ham(v);
        if (!h.contains("default") && !h.contains("per_arc")) sc.default_hamiltonian = parse_ham(h);
    }
    if (j.contains("flux_limiter")) sc.limiter = parse_limiter(j["flux_limiter"]);
    if (j.contains("initial_datum")) {
        const json& d = j["initial_datum"];
        if (d.is_string()) {
            sc.datum.fallback = d.get<std::string>();
        } else {
            if (d.contains("default")) sc.datum.fallback = d["default"].get<std::string>();
            if (d.contains("per_arc"))
                for (auto& [k, v] : d["per_arc"].items()) sc.datum.per_arc[k] = v.get<std::string>();
            if (d.contains("vertices"))
                for (auto& [k, v] : d["vertices"].items()) sc.datum.vertex_values[k] = v.get<double>();
            if (d.contains("lipschitz")) sc.datum.lipschitz = d["lipschitz"].get<double>();
        }
    }
    if (j.contains("probes"))
        for (const auto& p : j["probes"])
            sc.probes.push_back({p.at("arc").get<std::string>(), p.at("s").get<double>(), p.at("t").get<double>()});
    if (j.contains("phi")) {
        const json& p = j["phi"];
        PhiSpec ph;
        ph.arc1 = p.at("x1").at("arc").get<std::string>();
        ph.s1 = p.at("x1").at("s").get<double>();
        ph.t1 = p.at("t1").get<double>();
        ph.arc2 = p.at("x2").at("arc").get<std::string>();
        ph.s2 = p.at("x2").at("s").get<double>();
        ph.t2 = p.at("t2").get<double>();
        sc.phi = ph;
    }
    if (j.contains("convergence")) {
        const json& c = j["convergence"];
        if (c.contains("levels")) sc.convergence_levels = c["levels"].get<int>();
        if (c.contains("oracle")) sc.convergence_oracle = c["oracle"].get<std::string>();
    }
    if (j.contains("sensitivity")) {
        for (const auto& l : j["sensitivity"].at("limiters")) sc.sensitivity_limiters.push_back(parse_limiter(l));
    }
    if (j.contains("ledger") && j["ledger"].contains("ratio_bound"))
        sc.ledger_ratio_bound = j["ledger"]["ratio_bound"].get<double>();

    sc.source_json = j.dump(2);
    return sc;
}

namespace {

// Everything a run needs, with stable ownership order.
struct RunContext {
    Scenario sc;
    std::unique_ptr<HamiltonianFamily> family;
    std::unique_ptr<Conjugator> conj;
    FluxLimiter limiter;
    InitialDatum datum;
    std::unique_ptr<SpaceTimeGrid> grid;
    SolveOptions opts;
    double kappa_used = 0.0;
    bool kappa_from_ledger = false;
};

ArcHamiltonian build_arc_ham(const HamiltonianSpec& spec, double arc_length, double horizon) {
    Expr potential = Expr::parse(spec.potential, {"s", "t"});
    return make_builtin(builtin_kind_from_string(spec.kind), potential, spec.exponent, spec.scale, arc_length,
                        horizon);
}

FluxLimiter build_limiter(const LimiterSpec& spec, const Network& net, double horizon, const Conjugator& conj) {
    if (spec.mode == LimiterSpec::Mode::maximal) return FluxLimiter::maximal(conj);
    std::vector<std::function<double(double)>> fns;
    for (int v = 0; v < net.num_vertices(); ++v) {
        auto it = spec.per_vertex.find(net.vertex_id(v));
        std::string src = it != spec.per_vertex.end() ? it->second : spec.fallback;
        Expr e = Expr::parse(src, {"t"});
        fns.push_back([e](double t) { return e.eval({t}); });
    }
    FluxLimiter user = FluxLimiter::from_values(&net, horizon, std::move(fns));
    if (spec.mode == LimiterSpec::Mode::clamp) return FluxLimiter::clamp(user, FluxLimiter::maximal(conj));
    return user;
}

InitialDatum build_datum(const DatumSpec& spec, const Network& net) {
    std::vector<Expr> per_arc(net.num_arcs());
    for (int a = 0; a < net.num_arcs(); ++a) {
        auto it = spec.per_arc.find(net.arc(a).id);
        per_arc[a] = Expr::parse(it != spec.per_arc.end() ? it->second : spec.fallback, {"s"});
    }
    std::vector<std::pair<int, double>> overrides;
    for (const auto& [vid, val] : spec.vertex_values) {
        int v = net.vertex_index(vid);
        if (v < 0) throw Error("initial_datum mentions unknown vertex '" + vid + "'");
        overrides.push_back({v, val});
    }
    InitialDatum datum;
    datum.value = [&net, per_arc, overrides](const NetPoint& p) {
        if (p.at_vertex())
            for (const auto& [v, val] : overrides)
                if (v == p.vertex) return val;
        return per_arc[p.arc].eval({p.offset});
    };
    if (spec.lipschitz) {
        datum.kind = InitialDatum::ModulusKind::lipschitz;
        datum.lipschitz_constant = *spec.lipschitz;
    } else {
        // estimated Lipschitz constant from per-arc sampling
        double lip = 0.0;
        for (int a = 0; a < net.num_arcs(); ++a) {
            double len = net.arc(a).length;
            double prev = per_arc[a].eval({0.0});
            const int n = 65;
            for (int i = 1; i < n; ++i) {
                double v = per_arc[a].eval({len * i / (n - 1)});
                lip = std::max(lip, std::abs(v - prev) / (len / (n - 1)));
                prev = v;
            }
        }
        datum.kind = InitialDatum::ModulusKind::lipschitz;
        datum.lipschitz_constant = lip * 1.2 + 1e-9;
    }
    return datum;
}

RunContext build_context(Scenario sc, const RunOverrides& ov) {
    RunContext ctx;
    ctx.sc = std::move(sc);
    Scenario& s = ctx.sc;
    if (ov.ds) s.ds = *ov.ds;
    if (ov.dt) s.dt = *ov.dt;
    if (ov.kappa) s.kappa = *ov.kappa;
    if (ov.levels) s.convergence_levels = *ov.levels;

    ValidationReport net_rep = s.net.validate();
    if (!net_rep.valid()) throw Error("network validation failed:\n" + net_rep.to_string());

    ctx.family = std::make_unique<HamiltonianFamily>(&s.net, s.horizon);
    for (int a = 0; a < s.net.num_arcs(); ++a) {
        auto it = s.per_arc_hamiltonian.find(s.net.arc(a).id);
        const HamiltonianSpec& spec = it != s.per_arc_hamiltonian.end() ? it->second : s.default_hamiltonian;
        ctx.family->set_arc(a, build_arc_ham(spec, s.net.arc(a).length, s.horizon));
    }
    AssumptionReport arep = ctx.family->validate_assumptions({17, 6.0});
    if (!arep.valid()) throw Error("hamiltonian assumptions failed:\n" + arep.to_string());

    ctx.conj = std::make_unique<Conjugator>(ctx.family.get());
    ctx.limiter = build_limiter(s.limiter, s.net, s.horizon, *ctx.conj);
    ValidationReport lrep = ctx.limiter.validate(ctx.conj.get(), 65);
    if (!lrep.valid()) throw Error("flux limiter validation failed:\n" + lrep.to_string());

    ctx.datum = build_datum(s.datum, s.net);

    ctx.kappa_used = s.kappa;
    if (ctx.kappa_used <= 0) {
        SpeedLedger led = lipschitz_ledger(*ctx.conj, ctx.limiter, s.ledger_ratio_bound);
        if (!led.found)
            throw Error("no speed cap found by the ledger (" + led.reason + "); set grid.kappa explicitly");
        ctx.kappa_used = led.kappa_star;
        ctx.kappa_from_ledger = true;
    }
    ctx.grid = std::make_unique<SpaceTimeGrid>(&s.net, 0.0, s.horizon, s.ds, s.dt, ctx.kappa_used);
    ctx.opts.step = s.step == "node_hop" ? StepKind::node_hop : StepKind::interpolated;
    return ctx;
}

struct CsvWriter {
    std::ofstream out;
    CsvWriter(const fs::path& p, const std::string& header) : out(p) {
        if (!out) throw Error("cannot open '" + p.string() + "'");
        out << header << '\n';
    }
    void row(std::initializer_list<std::string> cells) {
        bool first = true;
        for (const auto& c : cells) {
            if (!first) out << ',';
            out << c;
            first = false;
        }
        out << '\n';
    }
};

std::string fd(double v) { return format_double(v); }

void write_field_csv(const RunContext& ctx, const Field& field, const fs::path& dir) {
    const Network& net = ctx.sc.net;
    const SpaceTimeGrid& grid = *ctx.grid;
    CsvWriter u(dir / "u.csv", "arc,offset,t,u");
    for (int a = 0; a < net.num_arcs(); ++a)
        for (int i = 0; i <= grid.cells(a); ++i)
            for (int k = 0; k <= grid.num_steps(); ++k)
                u.row({net.arc(a).id, fd(i * grid.ds(a)), fd(grid.time(k)),
                       fd(field.slices[k][grid.node_at(a, i)])});
    // plot data with embedding coordinates when the geometry is present
    bool has_geom = true;
    std::size_t dim = 0;
    for (int a = 0; a < net.num_arcs(); ++a) {
        if (!net.arc(a).geometry) {
            has_geom = false;
            break;
        }
        dim = std::max(dim, net.arc(a).geometry(0.0).size());
    }
    if (has_geom && dim > 0) {
        std::string header;
        for (std::size_t d = 0; d < dim; ++d) header += "x" + std::to_string(d) + ",";
        CsvWriter plot(dir / "plot.csv", header + "t,u");
        for (int a = 0; a < net.num_arcs(); ++a)
            for (int i = 0; i <= grid.cells(a); ++i) {
                Point pt = net.arc(a).geometry(i * grid.ds(a));
                pt.resize(dim, 0.0);
                for (int k = 0; k <= grid.num_steps(); ++k) {
                    std::string row;
                    for (double c : pt) row += fd(c) + ",";
                    plot.out << row << fd(grid.time(k)) << ',' << fd(field.slices[k][grid.node_at(a, i)])
                             << '\n';
                }
            }
    }
}

void write_curve_csv(const Network& net, const DiscreteCurve& curve, const fs::path& path) {
    CsvWriter w(path, "t,arc,offset");
    for (const auto& s : curve.samples)
        w.row({fd(s.t), s.point.arc >= 0 ? net.arc(s.point.arc).id : "", fd(s.point.offset)});
}

double oracle_value(const RunContext& ctx, const NetPoint& p, double t) {
    const Scenario& s = ctx.sc;
    if (s.convergence_oracle == "constant") return ctx.datum.value(p);
    if (s.convergence_oracle == "hopf_lax") {
        if (t <= 0) return ctx.datum.value(p);
        return hopf_lax_oracle(*ctx.conj, ctx.limiter, ctx.datum, t, {p})[0];
    }
    if (s.convergence_oracle == "vertex_wait") {
        // single waiting vertex with constant negative cost, zero datum
        int wv = -1;
        double rate = 0.0;
        for (int v = 0; v < s.net.num_vertices(); ++v) {
            double c = ctx.limiter.value(v, 0.0);
            if (c < -1e-12) {
                if (wv >= 0) throw Error("vertex_wait oracle needs exactly one waiting vertex");
                wv = v;
                rate = -c;
            }
        }
        if (wv < 0) throw Error("vertex_wait oracle needs a vertex with negative cost");
        if (t <= 0) return ctx.datum.value(p);
        double d = s.net.distance(p, s.net.vertex_point(wv));
        double best = 0.0;
        const int n = 4096;
        for (int i = 1; i <= n; ++i) {
            double tau = t * i / n;
            best = std::min(best, -rate * (t - tau) + d * d / (2 * tau));
        }
        return best;
    }
    throw Error("no oracle available for '" + s.convergence_oracle + "'");
}

int run_context(RunContext& ctx, const fs::path& dir, const RunOverrides& ov) {
    const Scenario& s = ctx.sc;
    const SpaceTimeGrid& grid = *ctx.grid;
    auto t_begin = std::chrono::steady_clock::now();

    CsvWriter summary(dir / "summary.csv", "check,value,tolerance,pass");
    auto srow = [&](const std::string& name, double value, double tol, bool pass) {
        summary.row({name, fd(value), fd(tol), pass ? "1" : "0"});
    };

    std::vector<NetPoint> probe_points;
    std::vector<double> probe_times;
    for (const auto& p : s.probes) {
        probe_points.push_back(s.net.make_point(p.arc, p.s));
        probe_times.push_back(p.t);
    }
    if (probe_points.empty()) {
        for (int a = 0; a < s.net.num_arcs(); ++a) {
            probe_points.push_back(s.net.make_point(a, s.net.arc(a).length / 2));
            probe_times.push_back(s.horizon);
        }
    }

    bool clamped = false;
    std::string provenance = to_string(ctx.limiter.provenance());

    if (s.experiment == "solve" || s.experiment == "verify" || s.experiment == "sensitivity") {
        Solution sol = solve(*ctx.conj, ctx.limiter, ctx.datum, grid, ctx.opts);
        clamped = sol.clamped;
        provenance = to_string(sol.provenance());
        write_field_csv(ctx, sol.field, dir);
        CsvWriter probes(dir / "probes.csv", "arc,offset,t,u");
        for (std::size_t i = 0; i < probe_points.size(); ++i)
            probes.row({s.net.arc(probe_points[i].arc).id, fd(probe_points[i].offset), fd(probe_times[i]),
                        fd(sol.probe(probe_points[i], probe_times[i]))});

        double res_tol = 5 * (grid.max_ds() + grid.dt());
        FixedPointReport fp = fixed_point_residual(*ctx.conj, sol.limiter, grid, sol.field, ctx.opts);
        srow("fixed_point_residual", fp.max_residual, res_tol, fp.max_residual <= res_tol);

        if (s.experiment == "verify") {
            VerifyReport rep = verify_solution(*ctx.conj, sol, grid, 100, ov.seed.value_or(7));
            srow("curve_slack", rep.worst_curve_slack, 1e-9, rep.worst_curve_slack <= 1e-9);
            srow("optimal_equality_gap", rep.optimal_equality_gap, res_tol, rep.optimal_equality_gap <= res_tol);
            srow("space_time_quotient", rep.space_time_quotient, kInf, true);
            Lagrangian lag(ctx.conj.get(), &sol.limiter);
            DiscreteCurve curve =
                extract_curve(lag, grid, sol.field, grid.node_point(0), grid.num_steps());
            write_curve_csv(s.net, curve, dir / "curve.csv");
            AdmissibilityReport ad = admissibility_report(curve);
            srow("curve_excursions", ad.excursions, kInf, !ad.zeno_suspect);
        }
        if (s.experiment == "sensitivity") {
            std::vector<FluxLimiter> limiters;
            for (const auto& lspec : s.sensitivity_limiters)
                limiters.push_back(build_limiter(lspec, s.net, s.horizon, *ctx.conj));
            if (limiters.empty()) throw Error("sensitivity experiment needs sensitivity.limiters");
            SensitivityResult sens = flux_limiter_sensitivity(*ctx.conj, ctx.datum, grid, limiters,
                                                              probe_points, s.horizon, ctx.opts);
            CsvWriter sw(dir / "sensitivity.csv", "limiter,probe,value");
            for (const auto& r : sens.table)
                sw.row({std::to_string(r.limiter_index), std::to_string(r.probe_index), fd(r.value)});
            srow("limiter_monotonicity_violations", sens.monotonicity_violations, 0, sens.monotonicity_violations == 0);
        }
    } else if (s.experiment == "phi") {
        if (!s.phi) throw Error("phi experiment needs a phi section");
        Lagrangian lag(ctx.conj.get(), &ctx.limiter);
        NetPoint x1 = s.net.make_point(s.phi->arc1, s.phi->s1);
        NetPoint x2 = s.net.make_point(s.phi->arc2, s.phi->s2);
        ActionResult r = minimal_action(lag, grid, x1, s.phi->t1, x2, s.phi->t2, ctx.opts);
        CsvWriter w(dir / "phi.csv", "reachable,value,excursions");
        w.row({r.reachable ? "1" : "0", fd(r.value), std::to_string(r.admissibility.excursions)});
        if (r.reachable) write_curve_csv(s.net, r.curve, dir / "curve.csv");
        srow("phi_reachable", r.reachable ? 1 : 0, kInf, true);
        srow("phi_zeno_suspect", r.admissibility.zeno_suspect ? 1 : 0, 0, !r.admissibility.zeno_suspect);
    } else if (s.experiment == "convergence") {
        CsvWriter w(dir / "convergence.csv", "level,ds,dt,max_error,ratio");
        double prev = 0.0;
        for (int lvl = 0; lvl < s.convergence_levels; ++lvl) {
            double f = std::pow(2.0, lvl);
            SpaceTimeGrid g(&s.net, 0.0, s.horizon, s.ds / f, s.dt / f, ctx.kappa_used);
            Solution sol = solve(*ctx.conj, ctx.limiter, ctx.datum, g, ctx.opts);
            double err = 0.0;
            for (std::size_t i = 0; i < probe_points.size(); ++i) {
                double o = oracle_value(ctx, probe_points[i], probe_times[i]);
                err = std::max(err, std::abs(sol.probe(probe_points[i], probe_times[i]) - o));
            }
            w.row({std::to_string(lvl), fd(s.ds / f), fd(s.dt / f), fd(err),
                   lvl > 0 ? fd(prev / std::max(err, 1e-300)) : "nan"});
            prev = err;
        }
        srow("convergence_levels", s.convergence_levels, kInf, true);
    } else if (s.experiment == "ledger") {
        SpeedLedger led = lipschitz_ledger(*ctx.conj, ctx.limiter, s.ledger_ratio_bound);
        CsvWriter w(dir / "ledger.csv", "name,value");
        w.row({"found", led.found ? "1" : "0"});
        w.row({"affine_shift", fd(led.affine_shift)});
        w.row({"speed_budget", fd(led.speed_budget)});
        w.row({"time_shift_cost", fd(led.time_shift_cost)});
        w.row({"slow_conjugate_sup", fd(led.slow_conjugate_sup)});
        w.row({"kappa_star", fd(led.kappa_star)});
        for (const auto& [k, u] : led.upsilon_table) w.row({"upsilon(" + fd(k) + ")", fd(u)});
        srow("ledger_found", led.found ? 1 : 0, kInf, led.found);
        if (!led.found && !ov.quiet) std::cerr << "ledger: " << led.reason << "\n";
    } else {
        throw Error("unknown experiment '" + s.experiment + "'");
    }

    auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                                         t_begin)
                       .count();
    json manifest;
    manifest["scenario"] = json::parse(s.source_json);
    manifest["input_hash"] = format_double(static_cast<double>(fnv1a(s.source_json)));
    manifest["grid"] = {{"ds", s.ds}, {"dt", s.dt}, {"kappa", ctx.kappa_used},
                        {"kappa_from_ledger", ctx.kappa_from_ledger}, {"steps", grid.num_steps()},
                        {"nodes", grid.num_nodes()}};
    manifest["limiter_provenance"] = provenance;
    manifest["clamped"] = clamped;
    manifest["network_scope"] = "finite";
    manifest["wall_ms"] = wall_ms;
    std::ofstream mf(dir / "manifest.json");
    mf << manifest.dump(2) << "\n";
    return 0;
}

}  // namespace

int run_scenario(const std::string& scenario_path, const std::string& out_dir, const RunOverrides& ov) {
    try {
        Scenario sc = Scenario::load_file(scenario_path);
        fs::path dir(out_dir);
        fs::create_directories(dir);
        RunContext ctx = build_context(std::move(sc), ov);
        int rc = run_context(ctx, dir, ov);
        if (!ov.quiet) std::cout << "wrote artifacts to " << dir.string() << "\n";
        return rc;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace hjnet
