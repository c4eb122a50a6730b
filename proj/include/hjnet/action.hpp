#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hjnet/grid.hpp"
#include "hjnet/legendre.hpp"
#include "hjnet/limiter.hpp"

namespace hjnet {

// Lagrangian over the whole network: arc charts come from the conjugate of
// the Hamiltonian family, vertices charge speed^2/2 plus the flux limiter.
class Lagrangian {
public:
    Lagrangian(const Conjugator* conj, const FluxLimiter* limiter);

    double arc_value(int arc, double s, double lam, double t) const;
    double vertex_value(int vertex, double speed, double t) const;
    double value(const NetPoint& p, double lam, double t) const;

    const Conjugator& conjugator() const { return *conj_; }
    const FluxLimiter& limiter() const { return *limiter_; }
    const Network& network() const { return conj_->family().network(); }
    double horizon() const { return conj_->family().horizon(); }

private:
    const Conjugator* conj_;
    const FluxLimiter* limiter_;
};

// Default steps minimize over continuous feet (piecewise-linear value
// interpolation plus the per-cell stationary foot); node_hop restricts feet
// to grid nodes, which makes the sweep an exact min-plus recursion over node
// paths.
enum class StepKind { interpolated, node_hop };

struct SolveOptions {
    StepKind step = StepKind::interpolated;
    bool record_feet = true;
};

// Backpointer of one Bellman update.
struct Foot {
    enum Kind : std::int8_t { none, source, stay_vertex, on_arc } kind = none;
    int arc = -1;
    double y = 0.0;  // forward-coordinate foot offset
};

// Value samples over a slab of grid slices, plus the feet that produced them.
struct Field {
    const SpaceTimeGrid* grid = nullptr;
    int k_begin = 0;  // absolute slice index of slices[0]
    std::vector<std::vector<double>> slices;
    std::vector<std::vector<Foot>> feet;

    int num_slices() const { return static_cast<int>(slices.size()); }
    double value(int node, int rel_k) const { return slices[rel_k][node]; }
    // bilinear probe in (offset, t)
    double probe(int arc, double offset, double t) const;
};

// Runs the forward value iteration from the already-initialized slice 0 of
// `field` through `steps` further slices.
void bellman_sweep(const Lagrangian& lag, const SpaceTimeGrid& grid, Field& field, int steps,
                   const SolveOptions& opts = {});

struct CurveSample {
    NetPoint point;
    double t = 0.0;
};

struct DiscreteCurve {
    std::vector<CurveSample> samples;  // one per grid time, increasing t
    double dt = 0.0;
    double kappa = 0.0;
};

struct AdmissibilityReport {
    int excursions = 0;  // vertex-to-same-vertex intervals spent off all vertices
    double shortest_excursion = 0.0;
    int vertex_visits = 0;
    bool zeno_suspect = false;
    std::string to_string() const;
};

AdmissibilityReport admissibility_report(const DiscreteCurve& curve);

// Action of a grid curve: midpoint-in-time, arrival-point-in-space
// quadrature; same-vertex steps charge the vertex Lagrangian.
double discrete_action(const Lagrangian& lag, const DiscreteCurve& curve);

struct ActionResult {
    bool reachable = false;
    double value = 0.0;
    DiscreteCurve curve;
    AdmissibilityReport admissibility;
};

ActionResult minimal_action(const Lagrangian& lag, const SpaceTimeGrid& grid, const NetPoint& x1, double t1,
                            const NetPoint& x2, double t2, const SolveOptions& opts = {});

// Backtracks an optimal curve of a solved field down to its slice 0.
DiscreteCurve extract_curve(const Lagrangian& lag, const SpaceTimeGrid& grid, const Field& field,
                            const NetPoint& end, int rel_k_end);

// Speed-cap ledger: numeric estimates of the constants controlling Lipschitz
// reparametrization of near-minimizers, and the smallest speed cap passing
// both tests.
struct SpeedLedger {
    bool found = false;
    std::string reason;  // set when not found
    double affine_shift = 0.0;  // A with lower_envelope(r) >= r - A
    double speed_budget = 0.0;  // M
    double time_shift_cost = 0.0;  // Lambda
    double slow_conjugate_sup = 0.0;  // Xi
    double kappa_star = 0.0;
    std::vector<std::pair<double, double>> upsilon_table;  // (kappa, Upsilon)
};

SpeedLedger lipschitz_ledger(const Conjugator& conj, const FluxLimiter& limiter, double ratio_bound);

struct Quad {
    NetPoint x1;
    double t1 = 0.0;
    NetPoint x2;
    double t2 = 0.0;
};

struct ModulusProbe {
    double max_quotient = 0.0;
    int pairs = 0;
};

// Empirical Lipschitz quotient of the minimal action over sampled quadruple
// pairs; diagnostic only.
ModulusProbe modulus_probe(const Lagrangian& lag, const SpaceTimeGrid& grid, const std::vector<Quad>& quads,
                           const SolveOptions& opts = {});

}  // namespace hjnet
