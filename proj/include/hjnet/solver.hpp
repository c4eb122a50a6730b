#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hjnet/action.hpp"
#include "hjnet/semidiscrete.hpp"

namespace hjnet {

struct InitialDatum {
    std::function<double(const NetPoint&)> value;
    enum class ModulusKind { lipschitz, uniform } kind = ModulusKind::lipschitz;
    double lipschitz_constant = 1.0;
    std::function<double(double)> modulus;  // used for the uniform kind
};

// Sampled check of the declared modulus of continuity on random point pairs.
ValidationReport validate_datum(const Network& net, const InitialDatum& datum, int samples = 200,
                                unsigned seed = 1);

struct Solution {
    Field field;
    FluxLimiter limiter;          // the limiter actually used
    bool clamped = false;         // a super-maximal user limiter was clamped first
    LimiterProvenance provenance() const { return limiter.provenance(); }
    double probe(const NetPoint& p, double t) const { return field.probe(p.arc, p.offset, t); }
};

// Forward value iteration for the whole network with the datum as the
// initial slice. User limiters exceeding the maximal one anywhere are
// clamped first.
Solution solve(const Conjugator& conj, const FluxLimiter& limiter, const InitialDatum& datum,
               const SpaceTimeGrid& grid, const SolveOptions& opts = {});

// Closed-form reference for the quadratic kind with zero potential and the
// maximal (zero) limiter: min over sampled start points of datum + d^2/(2t).
// Throws when called outside that regime.
std::vector<double> hopf_lax_oracle(const Conjugator& conj, const FluxLimiter& limiter,
                                    const InitialDatum& datum, double t, const std::vector<NetPoint>& points,
                                    double sample_ds = 0.0);

struct VerifyReport {
    double fixed_point_residual = 0.0;
    double worst_curve_slack = 0.0;    // positive = a curve beat the field (violation)
    double optimal_equality_gap = 0.0; // |field increment - action| along extracted curves
    double space_time_quotient = 0.0;  // empirical modulus in (x,t), report only
    int curves_checked = 0;
    std::string to_string() const;
};

VerifyReport verify_solution(const Conjugator& conj, const Solution& sol, const SpaceTimeGrid& grid,
                             int random_curves = 100, unsigned seed = 7);

struct SensitivityRow {
    int limiter_index = 0;
    int probe_index = 0;
    double value = 0.0;
};

struct SensitivityResult {
    std::vector<SensitivityRow> table;
    int monotonicity_violations = 0;  // pairs with c_i <= c_j but u_i > u_j somewhere
};

SensitivityResult flux_limiter_sensitivity(const Conjugator& conj, const InitialDatum& datum,
                                           const SpaceTimeGrid& grid, const std::vector<FluxLimiter>& limiters,
                                           const std::vector<NetPoint>& probes, double probe_time,
                                           const SolveOptions& opts = {});

}  // namespace hjnet
