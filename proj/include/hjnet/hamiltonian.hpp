#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hjnet/expr.hpp"
#include "hjnet/network.hpp"

namespace hjnet {

// Nondecreasing growth envelope, evaluated on |momentum| or |speed|.
using Envelope = std::function<double(double)>;

enum class BuiltinKind { quadratic_minus_potential, power_p, exponential };

BuiltinKind builtin_kind_from_string(const std::string& name);

// Per-arc Hamiltonian in the forward chart of the arc plus the data the rest
// of the pipeline needs from it: the momentum derivative and growth/time
// regularity metadata.
struct ArcHamiltonian {
    std::function<double(double s, double t, double mu)> value;
    std::function<double(double s, double t, double mu)> slope;  // d/dmu
    Envelope lower;  // lower <= H(s,t,mu) <= upper for |mu| = r
    Envelope upper;
    double alpha = 0.0;  // time-Lipschitz pair: H(s,t1,mu) - H(s,t2,mu)
    double beta = 0.0;   //   <= (alpha*H(s,t2,mu)/(1+|mu|) + beta)|t2-t1|
    double eps = 0.0;    // valid for |t2-t1| < eps
    bool time_dependent = true;
};

ArcHamiltonian make_builtin(BuiltinKind kind, const Expr& potential, double exponent, double scale,
                            double arc_length, double horizon);

struct AssumptionIssue {
    std::string condition;  // "convexity", "growth-lower", "growth-upper", "time-lipschitz", "finite"
    std::string detail;
    double margin = 0.0;  // worst violation size
};

struct AssumptionReport {
    std::vector<AssumptionIssue> issues;
    double continuity_modulus = 0.0;  // sampled modulus over neighbor lattice cells
    double worst_time_quotient = 0.0;
    bool valid() const { return issues.empty(); }
    std::string to_string() const;
};

struct AssumptionLattice {
    int points = 33;
    double momentum_range = 8.0;
};

// Collection of per-arc Hamiltonians over a fixed horizon. Reversed-arc
// queries are routed through the compatibility identity
// H~(s,t,mu) = H(len-s,t,-mu), so double reversal is the identity exactly.
class HamiltonianFamily {
public:
    HamiltonianFamily(const Network* net, double horizon);

    void set_arc(int arc, ArcHamiltonian h);
    void set_all(const ArcHamiltonian& h);
    const Network& network() const { return *net_; }
    double horizon() const { return horizon_; }

    double eval(OrientedArc oa, double s, double t, double mu) const;
    double slope(OrientedArc oa, double s, double t, double mu) const;

    // family-wide envelopes (pointwise min/max over arcs)
    double lower_growth(double r) const;
    double upper_growth(double r) const;
    double alpha() const;
    double beta() const;
    double eps() const;
    bool time_dependent() const;

    AssumptionReport validate_assumptions(const AssumptionLattice& lattice = {}) const;

private:
    const Network* net_;
    double horizon_;
    std::vector<ArcHamiltonian> arcs_;

    const ArcHamiltonian& at(int arc) const;
    void check_domain(int arc, double s, double t) const;
};

}  // namespace hjnet
