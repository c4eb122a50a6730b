#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hjnet/legendre.hpp"
#include "hjnet/network.hpp"

namespace hjnet {

enum class LimiterProvenance { user, maximal, clamped };

std::string to_string(LimiterProvenance p);

// Per-vertex time-dependent cost bounding how fast values may decrease while
// sitting on a vertex. The maximal one is min over incident oriented arcs of
// L(0,0,t); user limiters above it are meant to be clamped before solving.
class FluxLimiter {
public:
    FluxLimiter() = default;
    FluxLimiter(const Network* net, double horizon, std::function<double(int, double)> value,
                LimiterProvenance provenance, double bound, double lipschitz, double lipschitz_eps);

    static FluxLimiter maximal(const Conjugator& conj);
    static FluxLimiter constant(const Network* net, double horizon, double value);
    // one callable per vertex index
    static FluxLimiter from_values(const Network* net, double horizon,
                                   std::vector<std::function<double(double)>> per_vertex);
    static FluxLimiter clamp(const FluxLimiter& user, const FluxLimiter& maximal);

    double value(int vertex, double t) const { return value_(vertex, t); }
    LimiterProvenance provenance() const { return provenance_; }
    double horizon() const { return horizon_; }
    double bound() const { return bound_; }
    double lipschitz() const { return lipschitz_; }
    double lipschitz_eps() const { return lipschitz_eps_; }
    const Network& network() const { return *net_; }

    // FL validation: bound, one-sided Lipschitz quotients, and (for derived
    // limiters) the below-maximal inequality.
    ValidationReport validate(const Conjugator* conj = nullptr, int samples = 129) const;

private:
    const Network* net_ = nullptr;
    double horizon_ = 0.0;
    std::function<double(int, double)> value_;
    LimiterProvenance provenance_ = LimiterProvenance::user;
    double bound_ = 0.0;
    double lipschitz_ = 0.0;
    double lipschitz_eps_ = 0.0;
};

struct ZenoVertexReport {
    std::string vertex;
    double strict_margin = 0.0;  // min_t (maximal(t) - c(t))
    bool certificate_found = false;
    double delta = 0.0;  // certified excursion-radius box
    double eps = 0.0;
};

struct ZenoReport {
    std::vector<ZenoVertexReport> vertices;
    std::string to_string() const;
};

// Evaluates the strict-gap margin and searches the geometric (delta, eps)
// grid for a box certifying that vertex costs stay below every nearby arc
// Lagrangian at zero speed.
ZenoReport zeno_criteria(const Conjugator& conj, const FluxLimiter& limiter, int depth = 10);

}  // namespace hjnet
