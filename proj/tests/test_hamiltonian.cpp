#include <doctest.h>

#include <cmath>

#include "hjnet/hamiltonian.hpp"
#include "test_support.hpp"

using namespace hjnet;

namespace {

HamiltonianFamily quadratic_family(const Network& net, const std::string& potential, double horizon = 1.0) {
    HamiltonianFamily fam(&net, horizon);
    Expr pot = Expr::parse(potential, {"s", "t"});
    for (int a = 0; a < net.num_arcs(); ++a)
        fam.set_arc(a, make_builtin(BuiltinKind::quadratic_minus_potential, pot, 2.0, 1.0,
                                    net.arc(a).length, horizon));
    return fam;
}

}  // namespace

TEST_CASE("quadratic evaluations") {
    Network net = testsup::segment_network();
    HamiltonianFamily fam = quadratic_family(net, "0");
    CHECK(fam.eval({0, false}, 0.5, 0.5, 2.0) == doctest::Approx(2.0));

    HamiltonianFamily fam2 = quadratic_family(net, "0.3");
    CHECK(fam2.eval({0, false}, 0.5, 0.5, 0.0) == doctest::Approx(-0.3));
}

TEST_CASE("reversal identity routes state and momentum") {
    Network net = testsup::segment_network();
    HamiltonianFamily fam = quadratic_family(net, "s");
    // reversed arc at s=0.25, mu=1: forward chart sees (0.75, -1)
    CHECK(fam.eval({0, true}, 0.25, 0.5, 1.0) == doctest::Approx(-0.25));
    // the reversed chart is exactly the routed forward chart
    double len = net.arc(0).length;
    for (double mu : {-2.0, -0.5, 0.0, 1.0, 3.0}) {
        CHECK(fam.eval({0, true}, 0.3, 0.2, mu) == fam.eval({0, false}, len - 0.3, 0.2, -mu));
        // applying the routing twice lands back on the forward values
        CHECK(fam.eval({0, true}, len - 0.3, 0.2, -mu) ==
              doctest::Approx(fam.eval({0, false}, 0.3, 0.2, mu)).epsilon(1e-14));
    }
}

TEST_CASE("even part identity for the quadratic kind") {
    Network net = testsup::segment_network();
    HamiltonianFamily fam = quadratic_family(net, "0.2*s + 0.1*t");
    for (double mu : {0.25, 1.0, 2.5}) {
        double sum = fam.eval({0, false}, 0.4, 0.3, mu) + fam.eval({0, false}, 0.4, 0.3, -mu);
        double expected = mu * mu - 2 * (0.2 * 0.4 + 0.1 * 0.3);
        CHECK(sum == doctest::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("smooth bounded potential passes all assumptions") {
    Network net = testsup::star_network();
    HamiltonianFamily fam = quadratic_family(net, "0.3*sin(s) + 0.2*cos(t)");
    AssumptionReport rep = fam.validate_assumptions({17, 6.0});
    CHECK(rep.valid());
}

TEST_CASE("misdeclared upper envelope is located") {
    Network net = testsup::segment_network();
    ArcHamiltonian h;
    h.value = [](double, double, double mu) { return std::cosh(mu) - 1; };
    h.slope = [](double, double, double mu) { return std::sinh(mu); };
    h.lower = [](double r) { return std::cosh(r) - 1; };
    h.upper = [](double r) { return r * r; };  // too small once cosh takes off
    h.alpha = 0;
    h.beta = 0;
    h.eps = 1.0;
    h.time_dependent = false;
    HamiltonianFamily fam(&net, 1.0);
    fam.set_all(h);
    AssumptionReport rep = fam.validate_assumptions({17, 8.0});
    REQUIRE_FALSE(rep.valid());
    bool found = false;
    for (const auto& i : rep.issues) found = found || i.condition == "growth-upper";
    CHECK(found);
}

TEST_CASE("potential jump in time trips the declared bound") {
    Network net = testsup::segment_network();
    ArcHamiltonian h;
    // steep ramp in t around 0.5 with a deliberately small declared pair
    auto ramp = [](double t) { return std::max(0.0, std::min(1.0, (t - 0.5) * 1e4)); };
    h.value = [ramp](double, double t, double mu) { return mu * mu / 2 - ramp(t); };
    h.slope = [](double, double, double mu) { return mu; };
    h.lower = [](double r) { return r * r / 2 - 1.0; };
    h.upper = [](double r) { return r * r / 2; };
    h.alpha = 0;
    h.beta = 1.0;
    h.eps = 1.0;
    h.time_dependent = true;
    HamiltonianFamily fam(&net, 1.0);
    fam.set_all(h);
    AssumptionReport rep = fam.validate_assumptions({33, 4.0});
    REQUIRE_FALSE(rep.valid());
    bool found = false;
    for (const auto& i : rep.issues) found = found || i.condition == "time-lipschitz";
    CHECK(found);
}

TEST_CASE("domain errors") {
    Network net = testsup::segment_network();
    HamiltonianFamily fam = quadratic_family(net, "0");
    CHECK_THROWS(fam.eval({0, false}, 1.5, 0.5, 0.0));
    CHECK_THROWS(fam.eval({0, false}, 0.5, 2.5, 0.0));
}

TEST_CASE("builtin kinds evaluate their closed forms") {
    Network net = testsup::segment_network();
    HamiltonianFamily fam(&net, 1.0);
    Expr zero = Expr::parse("0", {"s", "t"});
    fam.set_arc(0, make_builtin(BuiltinKind::power_p, zero, 3.0, 2.0, 1.0, 1.0));
    CHECK(fam.eval({0, false}, 0.5, 0.5, 2.0) == doctest::Approx(2.0 * 8.0 / 3.0));
    fam.set_arc(0, make_builtin(BuiltinKind::exponential, zero, 2.0, 1.0, 1.0, 1.0));
    CHECK(fam.eval({0, false}, 0.5, 0.5, 1.0) == doctest::Approx(std::cosh(1.0) - 1));
    CHECK(fam.validate_assumptions({9, 4.0}).valid());
}
