#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hjnet/hamiltonian.hpp"
#include "hjnet/network.hpp"

namespace hjnet {

// One-dimensional concave maximization with a certified optimality gap. The
// bracket expands geometrically until the maximum is interior, which the
// superlinear growth envelopes guarantee to happen below the hard cap.
struct ConcaveMax {
    double arg = 0.0;
    double value = 0.0;
    double gap = 0.0;  // upper bound on (true max - value)
};

ConcaveMax maximize_concave(const std::function<double(double)>& g, double guess, double seed_radius,
                            double tol, double radius_cap = 1e8);

struct ConjugateResult {
    double value = 0.0;
    double argmax = 0.0;  // momentum achieving the max within gap
    double gap = 0.0;
};

struct MomentumSelection {
    double t = 0.0;
    double momentum = 0.0;  // minimizer of mu -> H(0,t,mu)
    double h_value = 0.0;   // equals -L(0,0,t) within the certified gap
};

struct ConjugacyIssue {
    std::string condition;
    double margin = 0.0;
};

struct ConjugacyReport {
    std::vector<ConjugacyIssue> issues;
    double envelope_slack = 0.0;  // headroom between L and its declared bounds
    bool valid() const { return issues.empty(); }
};

// Numerical Legendre transform L(s,lam,t) = max_mu { lam*mu - H(s,t,mu) } of a
// Hamiltonian family. Reversed-orientation queries are normalized to the
// forward chart before optimizing, so reversal identities hold exactly.
class Conjugator {
public:
    explicit Conjugator(const HamiltonianFamily* family, double gap_tol = 1e-10);

    const HamiltonianFamily& family() const { return *family_; }
    double gap_tol() const { return gap_tol_; }

    ConjugateResult conjugate(OrientedArc oa, double s, double lam, double t) const;
    // Routing through the reversal identity; no re-optimization.
    ConjugateResult conjugate_reversed(OrientedArc oa, double s, double lam, double t) const;

    // conjugates of the family envelopes: lower_conjugate = (upper growth)^*,
    // upper_conjugate = (lower growth)^*; they bound L from below and above
    double lower_conjugate(double r) const;
    double upper_conjugate(double r) const;
    // time-Lipschitz pair transferred to the Lagrangian side
    double alpha_hat() const;
    double beta_hat() const;
    double eps_hat() const;

    std::vector<MomentumSelection> min_momentum_selection(OrientedArc oa, const std::vector<double>& times) const;

    ConjugacyReport validate(int lattice_points = 9, double speed_range = 4.0) const;
    void dump_table(const std::string& csv_path, const std::vector<double>& offsets,
                    const std::vector<double>& speeds, const std::vector<double>& times) const;

private:
    const HamiltonianFamily* family_;
    double gap_tol_;
};

// Convex conjugate of a growth envelope at |r|, by the same certified search.
double envelope_conjugate(const Envelope& env, double r, double radius_cap = 1e8);

}  // namespace hjnet
