#include <doctest.h>

#include <cmath>

#include "hjnet/common.hpp"
#include "hjnet/legendre.hpp"
#include "test_support.hpp"

using namespace hjnet;

namespace {

HamiltonianFamily make_family(const Network& net, BuiltinKind kind, const std::string& potential,
                              double horizon = 1.0, double scale = 1.0, double p = 2.0) {
    HamiltonianFamily fam(&net, horizon);
    Expr pot = Expr::parse(potential, {"s", "t"});
    for (int a = 0; a < net.num_arcs(); ++a)
        fam.set_arc(a, make_builtin(kind, pot, p, scale, net.arc(a).length, horizon));
    return fam;
}

}  // namespace

TEST_CASE("quadratic conjugates in closed form") {
    Network net = testsup::segment_network();
    HamiltonianFamily fam = make_family(net, BuiltinKind::quadratic_minus_potential, "0.3");
    Conjugator conj(&fam);
    ConjugateResult r = conj.conjugate({0, false}, 0.5, 1.0, 0.5);
    CHECK(r.value == doctest::Approx(0.8).epsilon(1e-9));
    CHECK(r.argmax == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(r.gap <= 1e-9);
    ConjugateResult r0 = conj.conjugate({0, false}, 0.5, 0.0, 0.5);
    CHECK(r0.value == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(std::abs(r0.argmax) <= 1e-4);
}

TEST_CASE("cosh conjugate against the frozen value and a dense grid") {
    Network net = testsup::segment_network();
    HamiltonianFamily fam = make_family(net, BuiltinKind::exponential, "0");
    Conjugator conj(&fam);
    ConjugateResult r = conj.conjugate({0, false}, 0.5, 1.0, 0.5);
    // stationary point asinh(1); value asinh(1) - sqrt(2) + 1
    const double expected = 0.46716002464644786;
    CHECK(r.value == doctest::Approx(expected).epsilon(1e-9));
    CHECK(r.argmax == doctest::Approx(0.8813735870195430).epsilon(1e-4));
    // independent dense-grid maximization
    double dense = testsup::dense_max([](double mu) { return mu - (std::cosh(mu) - 1); }, -10.0, 10.0, 2000000);
    CHECK(r.value == doctest::Approx(dense).epsilon(1e-8));
}

TEST_CASE("reversed conjugate is pure routing") {
    Network net = testsup::segment_network();
    // even Hamiltonian: reversal only moves the state
    HamiltonianFamily fam = make_family(net, BuiltinKind::quadratic_minus_potential, "0.5*s");
    Conjugator conj(&fam);
    double len = net.arc(0).length;
    SUBCASE("even in momentum") {
        ConjugateResult a = conj.conjugate_reversed({0, false}, 0.25, 1.0, 0.3);
        ConjugateResult b = conj.conjugate({0, false}, len - 0.25, 1.0, 0.3);
        CHECK(a.value == b.value);  // identical routed computation
    }
    SUBCASE("value shift equals the potential difference") {
        double shift = conj.conjugate_reversed({0, false}, 0.25, 0.7, 0.3).value -
                       conj.conjugate({0, false}, 0.25, 0.7, 0.3).value;
        CHECK(shift == doctest::Approx(0.5 * (len - 0.25) - 0.5 * 0.25).epsilon(1e-9));
    }
    SUBCASE("double reversal is the identity") {
        ConjugateResult once = conj.conjugate({0, true}, 0.25, 0.7, 0.3);
        ConjugateResult twice = conj.conjugate_reversed({0, true}, 0.25, 0.7, 0.3);
        ConjugateResult fwd = conj.conjugate({0, false}, 0.25, 0.7, 0.3);
        CHECK(twice.value == fwd.value);
        CHECK(twice.argmax == fwd.argmax);
        CHECK(once.value == conj.conjugate_reversed({0, false}, 0.25, 0.7, 0.3).value);
    }
}

TEST_CASE("momentum selection tables") {
    Network net = testsup::segment_network();
    std::vector<double> times = {0.0, 0.25, 0.5, 0.75, 1.0};
    SUBCASE("quadratic stays at zero") {
        HamiltonianFamily fam = make_family(net, BuiltinKind::quadratic_minus_potential, "0");
        Conjugator conj(&fam);
        for (const auto& row : conj.min_momentum_selection({0, false}, times)) {
            CHECK(std::abs(row.momentum) <= 1e-4);
            CHECK(row.h_value == doctest::Approx(-conj.conjugate({0, false}, 0, 0, row.t).value).epsilon(1e-8));
        }
    }
    SUBCASE("tilted quadratic follows the tilt") {
        HamiltonianFamily fam(&net, 1.0);
        ArcHamiltonian h;
        h.value = [](double, double t, double mu) { return mu * mu / 2 - t * mu; };
        h.slope = [](double, double t, double mu) { return mu - t; };
        h.lower = [](double r) { return r * r / 2 - r; };
        h.upper = [](double r) { return r * r / 2 + r; };
        h.alpha = 2.0;
        h.beta = 2.0;
        h.eps = 1.0;
        fam.set_all(h);
        Conjugator conj(&fam);
        for (const auto& row : conj.min_momentum_selection({0, false}, times))
            CHECK(row.momentum == doctest::Approx(row.t).epsilon(1e-4));
    }
    SUBCASE("cosh stays at zero") {
        HamiltonianFamily fam = make_family(net, BuiltinKind::exponential, "0");
        Conjugator conj(&fam);
        for (const auto& row : conj.min_momentum_selection({0, false}, times))
            CHECK(std::abs(row.momentum) <= 1e-4);
    }
}

TEST_CASE("fenchel involution recovers the hamiltonian") {
    Network net = testsup::segment_network();
    for (auto kind : {BuiltinKind::quadratic_minus_potential, BuiltinKind::exponential}) {
        HamiltonianFamily fam = make_family(net, kind, "0.2*s + 0.1*cos(t)");
        Conjugator conj(&fam);
        double worst = 0;
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j)
                for (int k = 0; k < 5; ++k) {
                    double s = i / 4.0, t = j / 4.0, mu = -2.0 + k;
                    auto g = [&](double lam) { return mu * lam - conj.conjugate({0, false}, s, lam, t).value; };
                    ConcaveMax res = maximize_concave(g, mu, 2 + 2 * std::abs(mu), 1e-9);
                    worst = std::max(worst, std::abs(res.value - fam.eval({0, false}, s, t, mu)));
                }
        CHECK(worst <= 1e-7);
    }
}

TEST_CASE("young-fenchel holds with certified slack") {
    Network net = testsup::segment_network();
    HamiltonianFamily fam = make_family(net, BuiltinKind::exponential, "0.1*s");
    Conjugator conj(&fam);
    for (double lam : {-2.0, -0.5, 0.0, 1.0, 2.0})
        for (double mu : {-3.0, -1.0, 0.0, 0.5, 2.0}) {
            ConjugateResult r = conj.conjugate({0, false}, 0.5, lam, 0.5);
            CHECK(lam * mu <= r.value + fam.eval({0, false}, 0.5, 0.5, mu) + r.gap + 1e-12);
        }
}

TEST_CASE("validation passes for a time-dependent quadratic") {
    Network net = testsup::segment_network();
    HamiltonianFamily fam = make_family(net, BuiltinKind::quadratic_minus_potential, "0.3 + 0.1*sin(t)");
    Conjugator conj(&fam);
    ConjugacyReport rep = conj.validate(7, 3.0);
    CHECK(rep.valid());
    CHECK(rep.envelope_slack >= -1e-9);
}

TEST_CASE("bracket cap flags envelope misdeclaration") {
    Network net = testsup::segment_network();
    HamiltonianFamily fam(&net, 1.0);
    ArcHamiltonian h;
    h.value = [](double, double, double mu) { return std::sqrt(1 + mu * mu) - 1; };
    h.slope = [](double, double, double mu) { return mu / std::sqrt(1 + mu * mu); };
    h.lower = [](double r) { return r / 2 - 1; };
    h.upper = [](double r) { return r + 1; };
    h.alpha = 0;
    h.beta = 0;
    h.eps = 1.0;
    fam.set_all(h);
    Conjugator conj(&fam);
    // slope of H never exceeds 1, so the conjugate diverges at lam = 2
    CHECK_THROWS_AS(conj.conjugate({0, false}, 0.5, 2.0, 0.5), Error);
}
