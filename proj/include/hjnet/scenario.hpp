#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hjnet/expr.hpp"
#include "hjnet/solver.hpp"

namespace hjnet {

struct HamiltonianSpec {
    std::string kind = "quadratic_minus_potential";
    std::string potential = "0";
    double exponent = 2.0;
    double scale = 1.0;
};

struct LimiterSpec {
    enum class Mode { maximal, expressions, clamp } mode = Mode::maximal;
    std::map<std::string, std::string> per_vertex;  // vertex id -> expression in t
    std::string fallback = "0";
};

struct DatumSpec {
    std::string fallback = "0";                     // expression in s
    std::map<std::string, std::string> per_arc;     // arc id -> expression in s
    std::map<std::string, double> vertex_values;    // pointwise overrides
    std::optional<double> lipschitz;
};

struct ProbeSpec {
    std::string arc;
    double s = 0.0;
    double t = 0.0;
};

struct PhiSpec {
    std::string arc1;
    double s1 = 0.0, t1 = 0.0;
    std::string arc2;
    double s2 = 0.0, t2 = 0.0;
};

struct Scenario {
    std::string name = "scenario";
    std::string experiment = "solve";  // solve|phi|convergence|sensitivity|verify|ledger
    double horizon = 1.0;
    double ds = 0.1, dt = 0.1;
    double kappa = 0.0;  // 0 = auto via the speed ledger
    std::string step = "interpolated";
    Network net;
    HamiltonianSpec default_hamiltonian;
    std::map<std::string, HamiltonianSpec> per_arc_hamiltonian;
    LimiterSpec limiter;
    DatumSpec datum;
    std::vector<ProbeSpec> probes;
    std::optional<PhiSpec> phi;
    int convergence_levels = 3;
    std::string convergence_oracle = "hopf_lax";  // hopf_lax|vertex_wait|constant
    std::vector<LimiterSpec> sensitivity_limiters;
    double ledger_ratio_bound = 1.0;
    std::string source_json;  // resolved scenario, for the manifest

    static Scenario load_file(const std::string& path);
    static Scenario load_text(const std::string& json_text, const std::string& base_dir);
};

struct RunOverrides {
    std::optional<double> ds, dt, kappa;
    std::optional<int> levels;
    std::optional<unsigned> seed;
    bool quiet = false;
};

// Executes a scenario, writing CSV artifacts and a manifest into out_dir.
// Returns a process exit status (0 on success, 2 on validation failure).
int run_scenario(const std::string& scenario_path, const std::string& out_dir, const RunOverrides& ov = {});

}  // namespace hjnet
