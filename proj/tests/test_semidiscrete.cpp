#include <doctest.h>

#include <cmath>
#include <random>

#include "hjnet/common.hpp"
#include "hjnet/semidiscrete.hpp"
#include "hjnet/solver.hpp"
#include "test_support.hpp"

using namespace hjnet;

namespace {

struct Setup {
    Network net;
    std::unique_ptr<HamiltonianFamily> fam;
    std::unique_ptr<Conjugator> conj;
    FluxLimiter limiter;

    Setup(Network n, double horizon = 1.0, double limiter_value = 0.0,
          std::map<std::string, double> per_vertex = {})
        : net(std::move(n)) {
        fam = std::make_unique<HamiltonianFamily>(&net, horizon);
        Expr pot = Expr::parse("0", {"s", "t"});
        for (int a = 0; a < net.num_arcs(); ++a)
            fam->set_arc(a, make_builtin(BuiltinKind::quadratic_minus_potential, pot, 2.0, 1.0,
                                         net.arc(a).length, horizon));
        conj = std::make_unique<Conjugator>(fam.get());
        std::vector<std::function<double(double)>> fns;
        for (int v = 0; v < net.num_vertices(); ++v) {
            double c = limiter_value;
            auto it = per_vertex.find(net.vertex_id(v));
            if (it != per_vertex.end()) c = it->second;
            fns.push_back([c](double) { return c; });
        }
        limiter = FluxLimiter::from_values(&net, horizon, std::move(fns));
    }
};

// O(K^2) reference with the same left-to-right integral accumulation
std::vector<double> brute_running_min(const std::vector<double>& psi, const std::vector<double>& cost,
                                      double dt) {
    std::vector<double> out(psi.size());
    for (std::size_t k = 0; k < psi.size(); ++k) {
        double best = kInf;
        for (std::size_t r = 0; r <= k; ++r) {
            double acc = psi[r];
            for (std::size_t i = r; i < k; ++i) acc = acc + dt * (cost[i] + cost[i + 1]) / 2;
            best = std::min(best, acc);
        }
        out[k] = best;
    }
    return out;
}

}  // namespace

TEST_CASE("running min examples") {
    double dt = 0.125;
    int K = 16;
    std::vector<double> t(K + 1);
    for (int k = 0; k <= K; ++k) t[k] = k * dt;

    SUBCASE("nondecreasing input pins to the start") {
        std::vector<double> zero(K + 1, 0.0);
        std::vector<double> g = running_min(t, zero, dt);
        for (double v : g) CHECK(v == 0.0);
    }
    SUBCASE("constant input integrates the cost") {
        std::vector<double> psi(K + 1, 5.0), cost(K + 1, -1.0);
        std::vector<double> g = running_min(psi, cost, dt);
        for (int k = 0; k <= K; ++k) CHECK(g[k] == doctest::Approx(5.0 - t[k]).epsilon(1e-12));
    }
    SUBCASE("hinge input against a positive cost") {
        // psi = max(0, 1-t) on [0,2], cost 0.2
        double dt2 = 1.0 / 64;
        int K2 = 128;
        std::vector<double> psi(K2 + 1), cost(K2 + 1, 0.2);
        for (int k = 0; k <= K2; ++k) psi[k] = std::max(0.0, 1.0 - k * dt2);
        std::vector<double> g = running_min(psi, cost, dt2);
        CHECK(g[static_cast<int>(0.5 / dt2)] == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(g[static_cast<int>(1.5 / dt2)] == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(g[K2] == doctest::Approx(0.0).epsilon(1e-9));
        std::vector<double> brute = brute_running_min(psi, cost, dt2);
        for (int k = 0; k <= K2; ++k) CHECK(g[k] == brute[k]);
    }
    SUBCASE("output never exceeds the input and matches at zero") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::vector<double> psi(K + 1), cost(K + 1);
        for (int k = 0; k <= K; ++k) {
            psi[k] = u(rng);
            cost[k] = u(rng);
        }
        std::vector<double> g = running_min(psi, cost, dt);
        CHECK(g[0] == psi[0]);
        for (int k = 0; k <= K; ++k) CHECK(g[k] <= psi[k]);
    }
    SUBCASE("length mismatch throws") {
        CHECK_THROWS(running_min({0.0, 1.0}, {0.0}, dt));
    }
}

TEST_CASE("zero trace gives a zero arc field") {
    Setup su(testsup::segment_network());
    SpaceTimeGrid grid(&su.net, 0.0, 1.0, 1.0 / 16, 1.0 / 16, 4.0);
    BoundaryTrace tr;
    tr.initial.assign(grid.num_nodes(), 0.0);
    tr.vertex.assign(su.net.num_vertices(), std::vector<double>(grid.num_steps() + 1, 0.0));
    validate_trace(tr, grid);
    ArcField f = arc_max_subsolution(*su.conj, grid, tr, {0, false});
    for (const auto& slice : f.values)
        for (double v : slice) CHECK(std::abs(v) <= 1e-10);
}

TEST_CASE("boundary series flowing in from the far endpoint") {
    Setup su(testsup::segment_network());
    SpaceTimeGrid grid(&su.net, 0.0, 1.0, 1.0 / 32, 1.0 / 32, 4.0);
    BoundaryTrace tr;
    tr.initial.assign(grid.num_nodes(), 0.0);
    tr.vertex.assign(su.net.num_vertices(), std::vector<double>(grid.num_steps() + 1, 0.0));
    int far = su.net.vertex_index("B");
    for (int k = 0; k <= grid.num_steps(); ++k) tr.vertex[far][k] = -grid.time(k);
    ArcField f = arc_max_subsolution(*su.conj, grid, tr, {0, false});
    std::vector<double> line = f.start_line();
    for (double t : {0.5, 0.75, 1.0}) {
        int k = grid.time_index(t);
        double oracle = std::min(
            0.0, testsup::dense_min([&](double tau) { return -(t - tau) + 1.0 / (2 * tau); },
                                    1e-4, t, 100000));
        CHECK(std::abs(line[k] - oracle) <= 0.05);
    }
}

TEST_CASE("interval field matches the clipped closed form") {
    Setup su(testsup::segment_network());
    SpaceTimeGrid grid(&su.net, 0.0, 1.0, 1.0 / 32, 1.0 / 32, 4.0);
    BoundaryTrace tr;
    tr.initial.resize(grid.num_nodes());
    for (int n = 0; n < grid.num_nodes(); ++n) tr.initial[n] = grid.node_point(n).offset;
    // the far series never wins
    tr.vertex.assign(su.net.num_vertices(), std::vector<double>(grid.num_steps() + 1, 10.0));
    tr.vertex[su.net.vertex_index("A")][0] = tr.initial[su.net.vertex_index("A")];
    tr.vertex[su.net.vertex_index("B")][0] = tr.initial[su.net.vertex_index("B")];
    for (int k = 1; k <= grid.num_steps(); ++k) tr.vertex[su.net.vertex_index("A")][k] = 10.0;
    ArcField f = arc_max_subsolution(*su.conj, grid, tr, {0, false});
    double worst = 0;
    for (int k = 1; k <= grid.num_steps(); ++k) {
        double t = grid.time(k);
        for (int i = 0; i <= f.cells; ++i) {
            double s = i * grid.ds(0);
            double oracle =
                testsup::dense_min([&](double y) { return y + (s - y) * (s - y) / (2 * t); }, 0.0, 1.0, 20000);
            worst = std::max(worst, std::abs(f.values[k][i] - oracle));
        }
    }
    CHECK(worst <= 0.05);
}

TEST_CASE("vertex line is the min over incident arcs") {
    Setup su(testsup::star_network());
    SpaceTimeGrid grid(&su.net, 0.0, 1.0, 1.0 / 16, 1.0 / 16, 4.0);
    BoundaryTrace tr;
    tr.initial.assign(grid.num_nodes(), 0.0);
    tr.vertex.assign(su.net.num_vertices(), std::vector<double>(grid.num_steps() + 1, 0.0));
    int leaf = su.net.vertex_index("A");
    for (int k = 0; k <= grid.num_steps(); ++k) tr.vertex[leaf][k] = -2.0 * grid.time(k);
    int center = su.net.vertex_index("O");
    std::vector<double> line = vertex_min_line(*su.conj, grid, tr, center);
    std::vector<double> manual(grid.num_steps() + 1, kInf);
    for (OrientedArc oa : su.net.incidence(center)) {
        ArcField f = arc_max_subsolution(*su.conj, grid, tr, oa);
        std::vector<double> l = f.start_line();
        for (std::size_t k = 0; k < manual.size(); ++k) manual[k] = std::min(manual[k], l[k]);
    }
    for (std::size_t k = 0; k < manual.size(); ++k) CHECK(line[k] == manual[k]);
    CHECK(line[0] == tr.initial[center]);
}

TEST_CASE("vertex operators commute with constants and stay monotone") {
    Setup su(testsup::star_network());
    SpaceTimeGrid grid(&su.net, 0.0, 1.0, 1.0 / 16, 1.0 / 16, 4.0);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    BoundaryTrace tr;
    tr.initial.resize(grid.num_nodes());
    for (double& v : tr.initial) v = u(rng);
    tr.vertex.assign(su.net.num_vertices(), {});
    for (int v = 0; v < su.net.num_vertices(); ++v) {
        tr.vertex[v].resize(grid.num_steps() + 1);
        tr.vertex[v][0] = tr.initial[v];
        for (int k = 1; k <= grid.num_steps(); ++k) tr.vertex[v][k] = tr.vertex[v][k - 1] + 0.1 * u(rng);
    }
    int center = su.net.vertex_index("O");
    std::vector<double> base = vertex_min_line(*su.conj, grid, tr, center);

    SUBCASE("constant shift") {
        BoundaryTrace shifted = tr;
        const double a = 0.7;
        for (double& v : shifted.initial) v += a;
        for (auto& series : shifted.vertex)
            for (double& v : series) v += a;
        std::vector<double> line = vertex_min_line(*su.conj, grid, shifted, center);
        for (std::size_t k = 0; k < line.size(); ++k)
            CHECK(line[k] == doctest::Approx(base[k] + a).epsilon(1e-12));
    }
    SUBCASE("monotone in the trace") {
        BoundaryTrace raised = tr;
        for (double& v : raised.initial) v += 0.3;
        for (auto& series : raised.vertex)
            for (double& v : series) v += 0.5;
        std::vector<double> line = vertex_min_line(*su.conj, grid, raised, center);
        for (std::size_t k = 0; k < line.size(); ++k) CHECK(line[k] >= base[k]);
    }
}

TEST_CASE("fixed point residual") {
    SUBCASE("zero field is an exact fixed point") {
        Setup su(testsup::star_network());
        SpaceTimeGrid grid(&su.net, 0.0, 1.0, 1.0 / 16, 1.0 / 16, 4.0);
        FluxLimiter maximal = FluxLimiter::maximal(*su.conj);
        Field u;
        u.grid = &grid;
        u.slices.assign(grid.num_steps() + 1, std::vector<double>(grid.num_nodes(), 0.0));
        FixedPointReport rep = fixed_point_residual(*su.conj, maximal, grid, u);
        CHECK(rep.max_residual <= 1e-9);
    }
    SUBCASE("solver output is a near fixed point that improves under refinement") {
        Setup su(testsup::star_network(), 1.0, 0.0, {{"O", -1.0}});
        InitialDatum zero;
        zero.value = [](const NetPoint&) { return 0.0; };
        double prev = kInf;
        for (double h : {1.0 / 16, 1.0 / 32}) {
            SpaceTimeGrid grid(&su.net, 0.0, 1.0, h, h, 8.0);
            Solution sol = solve(*su.conj, su.limiter, zero, grid);
            FixedPointReport rep = fixed_point_residual(*su.conj, sol.limiter, grid, sol.field);
            CHECK(rep.max_residual <= 10 * h);
            CHECK(rep.max_residual <= prev);
            prev = rep.max_residual;
        }
    }
    SUBCASE("a poked field shows the poke") {
        Setup su(testsup::star_network());
        SpaceTimeGrid grid(&su.net, 0.0, 1.0, 1.0 / 16, 1.0 / 16, 4.0);
        FluxLimiter maximal = FluxLimiter::maximal(*su.conj);
        Field u;
        u.grid = &grid;
        u.slices.assign(grid.num_steps() + 1, std::vector<double>(grid.num_nodes(), 0.0));
        u.slices[grid.num_steps() / 2][su.net.vertex_index("O")] += 1.0;
        FixedPointReport rep = fixed_point_residual(*su.conj, maximal, grid, u);
        CHECK(rep.max_residual >= 1.0 - 2 * grid.dt());
    }
}

TEST_CASE("ordering of classified fields") {
    Setup su(testsup::star_network());
    SpaceTimeGrid grid(&su.net, 0.0, 1.0, 1.0 / 16, 1.0 / 16, 8.0);
    FluxLimiter maximal = FluxLimiter::maximal(*su.conj);
    InitialDatum datum;
    datum.value = [](const NetPoint& p) { return 0.25 * p.offset; };
    Solution w = solve(*su.conj, maximal, datum, grid);
    double tol = 10 * (grid.max_ds() + grid.dt());

    SUBCASE("a field versus itself") {
        OrderingReport rep = ordering_check(*su.conj, maximal, grid, w.field, w.field, tol);
        CHECK(rep.classified);
        CHECK(rep.ordered);
        CHECK(rep.worst_violation <= 1e-12);
    }
    SUBCASE("shifted datum keeps the order, exactly") {
        InitialDatum up;
        up.value = [](const NetPoint& p) { return 0.25 * p.offset + 1.0; };
        Solution v = solve(*su.conj, maximal, up, grid);
        OrderingReport rep = ordering_check(*su.conj, maximal, grid, w.field, v.field, tol);
        CHECK(rep.classified);
        CHECK(rep.ordered);
        for (int k = 0; k <= grid.num_steps(); ++k)
            for (int n = 0; n < grid.num_nodes(); ++n)
                CHECK(v.field.slices[k][n] == doctest::Approx(w.field.slices[k][n] + 1.0).epsilon(1e-12));
    }
    SUBCASE("lower vertex costs keep the solve below") {
        Setup low(testsup::star_network(), 1.0, -0.5);
        SpaceTimeGrid grid_low(&low.net, 0.0, 1.0, 1.0 / 16, 1.0 / 16, 8.0);
        InitialDatum datum2;
        datum2.value = [](const NetPoint& p) { return 0.25 * p.offset; };
        Solution wl = solve(*low.conj, low.limiter, datum2, grid_low);
        for (int k = 0; k <= grid.num_steps(); ++k)
            for (int n = 0; n < grid.num_nodes(); ++n)
                CHECK(wl.field.slices[k][n] <= w.field.slices[k][n] + 1e-12);
    }
}

TEST_CASE("grid curves never beat the solved field") {
    Setup su(testsup::star_network(), 1.0, 0.0, {{"O", -1.0}});
    SpaceTimeGrid grid(&su.net, 0.0, 1.0, 1.0 / 16, 1.0 / 16, 8.0);
    InitialDatum zero;
    zero.value = [](const NetPoint&) { return 0.0; };
    Solution sol = solve(*su.conj, su.limiter, zero, grid);
    Lagrangian lag(su.conj.get(), &sol.limiter);
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> arc_pick(0, su.net.num_arcs() - 1);
    int violations = 0;
    for (int c = 0; c < 100; ++c) {
        int arc = arc_pick(rng);
        int cells = grid.cells(arc);
        int reach = grid.reach_cells(arc);
        std::uniform_int_distribution<int> start(1, cells - 1);
        std::uniform_int_distribution<int> hop(-reach, reach);
        int k1 = std::uniform_int_distribution<int>(0, grid.num_steps() - 2)(rng);
        int k2 = std::uniform_int_distribution<int>(k1 + 1, grid.num_steps())(rng);
        int i = start(rng);
        double action = 0;
        int i0 = i;
        for (int k = k1; k < k2; ++k) {
            int j = std::clamp(i + hop(rng), 1, cells - 1);
            action += grid.dt() *
                      lag.arc_value(arc, j * grid.ds(arc), (j - i) * grid.ds(arc) / grid.dt(),
                                    grid.time(k) + grid.dt() / 2);
            i = j;
        }
        double lhs = sol.field.slices[k2][grid.node_at(arc, i)] - sol.field.slices[k1][grid.node_at(arc, i0)];
        if (lhs > action + 1e-9) ++violations;
    }
    CHECK(violations == 0);
}
