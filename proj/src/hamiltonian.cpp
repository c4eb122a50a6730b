#include "hjnet/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hjnet/common.hpp"

namespace hjnet {

BuiltinKind builtin_kind_from_string(const std::string& name) {
    if (name == "quadratic_minus_potential" || name == "quadratic") return BuiltinKind::quadratic_minus_potential;
    if (name == "power_p" || name == "power") return BuiltinKind::power_p;
    if (name == "exponential" || name == "cosh") return BuiltinKind::exponential;
    throw Error("unknown hamiltonian kind '" + name + "'");
}

namespace {

struct PotentialBounds {
    double lo = 0.0, hi = 0.0, time_slope = 0.0;
    bool time_dependent = false;
};

PotentialBounds scan_potential(const Expr& potential, double arc_length, double horizon) {
    PotentialBounds b;
    if (potential.empty()) return b;
    b.time_dependent = potential.depends_on("t");
    if (potential.constant()) {
        double v = potential.eval({0.0, 0.0});
        b.lo = b.hi = v;
        return b;
    }
    const int n = 33;
    b.lo = kInf;
    b.hi = -kInf;
    for (int i = 0; i < n; ++i) {
        double s = arc_length * i / (n - 1);
        double prev = 0.0;
        for (int j = 0; j < n; ++j) {
            double t = horizon * j / (n - 1);
            double v = potential.eval({s, t});
            b.lo = std::min(b.lo, v);
            b.hi = std::max(b.hi, v);
            if (j > 0) {
                double q = std::abs(v - prev) / (horizon / (n - 1));
                b.time_slope = std::max(b.time_slope, q);
            }
            prev = v;
        }
    }
    double pad = 0.05 * (b.hi - b.lo) + 1e-12;
    b.lo -= pad;
    b.hi += pad;
    b.time_slope = 1.1 * b.time_slope + 1e-12;
    return b;
}

}  // namespace

ArcHamiltonian make_builtin(BuiltinKind kind, const Expr& potential, double exponent, double scale,
                            double arc_length, double horizon) {
    if (scale <= 0.0) throw Error("hamiltonian scale must be positive");
    PotentialBounds pb = scan_potential(potential, arc_length, horizon);
    ArcHamiltonian h;
    h.time_dependent = pb.time_dependent;
    h.alpha = 0.0;
    h.beta = pb.time_slope;
    h.eps = horizon;
    auto pot = [potential](double s, double t) {
        if (potential.empty()) return 0.0;
        double args[2] = {s, t};
        return potential.eval(args);
    };
    switch (kind) {
        case BuiltinKind::quadratic_minus_potential:
            h.value = [pot, scale](double s, double t, double mu) { return scale * mu * mu / 2 - pot(s, t); };
            h.slope = [scale](double, double, double mu) { return scale * mu; };
            h.lower = [scale, hi = pb.hi](double r) { return scale * r * r / 2 - hi; };
            h.upper = [scale, lo = pb.lo](double r) { return scale * r * r / 2 - lo; };
            break;
        case BuiltinKind::power_p: {
            if (exponent <= 1.0) throw Error("power kind needs exponent > 1");
            double p = exponent;
            h.value = [pot, scale, p](double s, double t, double mu) {
                return scale * std::pow(std::abs(mu), p) / p - pot(s, t);
            };
            h.slope = [scale, p](double, double, double mu) {
                return scale * (mu >= 0 ? 1.0 : -1.0) * std::pow(std::abs(mu), p - 1);
            };
            h.lower = [scale, p, hi = pb.hi](double r) { return scale * std::pow(r, p) / p - hi; };
            h.upper = [scale, p, lo = pb.lo](double r) { return scale * std::pow(r, p) / p - lo; };
            break;
        }
        case BuiltinKind::exponential:
            h.value = [pot, scale](double s, double t, double mu) { return scale * (std::cosh(mu) - 1) - pot(s, t); };
            h.slope = [scale](double, double, double mu) { return scale * std::sinh(mu); };
            h.lower = [scale, hi = pb.hi](double r) { return scale * (std::cosh(r) - 1) - hi; };
            h.upper = [scale, lo = pb.lo](double r) { return scale * (std::cosh(r) - 1) - lo; };
            break;
    }
    return h;
}

HamiltonianFamily::HamiltonianFamily(const Network* net, double horizon) : net_(net), horizon_(horizon) {
    if (horizon <= 0.0) throw Error("horizon must be positive");
    arcs_.resize(net->num_arcs());
}

void HamiltonianFamily::set_arc(int arc, ArcHamiltonian h) {
    if (arc < 0 || arc >= static_cast<int>(arcs_.size())) throw Error("arc index out of range");
    if (!h.value) throw Error("hamiltonian evaluator missing");
    if (!h.slope) {
        auto value = h.value;
        h.slope = [value](double s, double t, double mu) {
            const double d = 1e-6;
            return (value(s, t, mu + d) - value(s, t, mu - d)) / (2 * d);
        };
    }
    if (!h.lower || !h.upper) throw Error("hamiltonian growth envelopes must be declared");
    arcs_[arc] = std::move(h);
}

void HamiltonianFamily::set_all(const ArcHamiltonian& h) {
    for (int i = 0; i < static_cast<int>(arcs_.size()); ++i) set_arc(i, h);
}

const ArcHamiltonian& HamiltonianFamily::at(int arc) const {
    if (arc < 0 || arc >= static_cast<int>(arcs_.size()) || !arcs_[arc].value)
        throw Error("no hamiltonian registered for arc index " + std::to_string(arc));
    return arcs_[arc];
}

void HamiltonianFamily::check_domain(int arc, double s, double t) const {
    double len = net_->arc(arc).length;
    double tol = 1e-9 * std::max(1.0, len);
    if (s < -tol || s > len + tol)
        throw Error("offset " + std::to_string(s) + " outside arc of length " + std::to_string(len));
    if (t < -1e-12 || t > horizon_ + 1e-9 * std::max(1.0, horizon_))
        throw Error("time " + std::to_string(t) + " outside horizon " + std::to_string(horizon_));
}

double HamiltonianFamily::eval(OrientedArc oa, double s, double t, double mu) const {
    check_domain(oa.arc, s, t);
    const ArcHamiltonian& h = at(oa.arc);
    if (oa.reversed) return h.value(net_->arc(oa.arc).length - s, t, -mu);
    return h.value(s, t, mu);
}

double HamiltonianFamily::slope(OrientedArc oa, double s, double t, double mu) const {
    const ArcHamiltonian& h = at(oa.arc);
    if (oa.reversed) return -h.slope(net_->arc(oa.arc).length - s, t, -mu);
    return h.slope(s, t, mu);
}

double HamiltonianFamily::lower_growth(double r) const {
    double v = kInf;
    for (const auto& h : arcs_)
        if (h.lower) v = std::min(v, h.lower(r));
    return v;
}

double HamiltonianFamily::upper_growth(double r) const {
    double v = -kInf;
    for (const auto& h : arcs_)
        if (h.upper) v = std::max(v, h.upper(r));
    return v;
}

double HamiltonianFamily::alpha() const {
    double v = 0.0;
    for (const auto& h : arcs_) v = std::max(v, h.alpha);
    return v;
}

double HamiltonianFamily::beta() const {
    double v = 0.0;
    for (const auto& h : arcs_) v = std::max(v, h.beta);
    return v;
}

double HamiltonianFamily::eps() const {
    double v = horizon_;
    for (const auto& h : arcs_)
        if (h.eps > 0) v = std::min(v, h.eps);
    return v;
}

bool HamiltonianFamily::time_dependent() const {
    for (const auto& h : arcs_)
        if (h.time_dependent) return true;
    return false;
}

std::string AssumptionReport::to_string() const {
    if (valid()) return "valid";
    std::ostringstream os;
    for (const auto& i : issues) os << i.condition << ": " << i.detail << " (margin " << i.margin << ")\n";
    return os.str();
}

AssumptionReport HamiltonianFamily::validate_assumptions(const AssumptionLattice& lattice) const {
    AssumptionReport rep;
    const int n = lattice.points;
    const double mur = lattice.momentum_range;
    for (int ai = 0; ai < static_cast<int>(arcs_.size()); ++ai) {
        const ArcHamiltonian& h = at(ai);
        double len = net_->arc(ai).length;
        const std::string& id = net_->arc(ai).id;
        double worst_convex = 0.0, worst_lower = 0.0, worst_upper = 0.0, worst_h4 = 0.0;
        double worst_h4_at = 0.0;
        bool finite_ok = true;
        double prev_tv = 0.0;
        for (int i = 0; i < n; ++i) {
            double s = len * i / (n - 1);
            for (int k = 0; k < n; ++k) {
                double mu = -mur + 2 * mur * k / (n - 1);
                for (int j = 0; j < n; ++j) {
                    double t = horizon_ * j / (n - 1);
                    double v = h.value(s, t, mu);
                    if (!std::isfinite(v)) finite_ok = false;
                    double scale_tol = 1e-9 * (1 + std::abs(v));
                    worst_lower = std::max(worst_lower, h.lower(std::abs(mu)) - v);
                    worst_upper = std::max(worst_upper, v - h.upper(std::abs(mu)));
                    if (j > 0) {
                        // one-sided time quotient against the declared pair
                        double dt = horizon_ / (n - 1);
                        if (dt < h.eps) {
                            double diff = prev_tv - v;  // H(s,t-dt,mu) - H(s,t,mu)
                            double bound = (h.alpha * v / (1 + std::abs(mu)) + h.beta) * dt;
                            double diff2 = v - prev_tv;
                            double bound2 = (h.alpha * prev_tv / (1 + std::abs(mu)) + h.beta) * dt;
                            double excess = std::max(diff - bound, diff2 - bound2) - scale_tol;
                            rep.worst_time_quotient = std::max(rep.worst_time_quotient,
                                                               std::max(diff, diff2) / dt);
                            if (excess > worst_h4) {
                                worst_h4 = excess;
                                worst_h4_at = t;
                            }
                        }
                    }
                    prev_tv = v;
                }
                if (k > 0 && k + 1 < n) {
                    double t = horizon_ / 2;
                    double mu_a = -mur + 2 * mur * (k - 1) / (n - 1);
                    double mu_b = -mur + 2 * mur * (k + 1) / (n - 1);
                    double mid = h.value(s, t, (mu_a + mu_b) / 2);
                    double avg = (h.value(s, t, mu_a) + h.value(s, t, mu_b)) / 2;
                    worst_convex = std::max(worst_convex, mid - avg - 1e-9 * (1 + std::abs(avg)));
                }
            }
        }
        if (!finite_ok) rep.issues.push_back({"finite", "arc '" + id + "' produced a non-finite value", 0.0});
        if (worst_convex > 0)
            rep.issues.push_back({"convexity", "arc '" + id + "' fails the midpoint inequality", worst_convex});
        if (worst_lower > 1e-9)
            rep.issues.push_back({"growth-lower", "arc '" + id + "' drops below its lower envelope", worst_lower});
        if (worst_upper > 1e-9)
            rep.issues.push_back({"growth-upper", "arc '" + id + "' exceeds its upper envelope", worst_upper});
        if (worst_h4 > 0)
            rep.issues.push_back({"time-lipschitz",
                                  "arc '" + id + "' violates the declared time bound near t=" +
                                      std::to_string(worst_h4_at),
                                  worst_h4});
    }
    // sampled continuity modulus over neighbor cells, reported as-is
    for (int ai = 0; ai < static_cast<int>(arcs_.size()); ++ai) {
        const ArcHamiltonian& h = at(ai);
        double len = net_->arc(ai).length;
        double prev = h.value(0, 0, 0);
        for (int i = 1; i < n; ++i) {
            double v = h.value(len * i / (n - 1), horizon_ * i / (n - 1), -mur + 2 * mur * i / (n - 1));
            rep.continuity_modulus = std::max(rep.continuity_modulus, std::abs(v - prev));
            prev = v;
        }
    }
    return rep;
}

}  // namespace hjnet
