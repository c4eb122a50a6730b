#pragma once

// Internal single-arc relaxation shared by the network-wide sweep and the
// single-arc value fields. Works in forward arc coordinates on local node
// arrays of size cells+1.

#include <algorithm>
#include <cmath>

#include "hjnet/action.hpp"
#include "hjnet/common.hpp"

namespace hjnet::detail {

struct ArcSlab {
    int arc = -1;
    int cells = 0;
    double ds = 0.0;
    double dt = 0.0;
    int reach = 1;
    double kappa = 0.0;
    const double* ltab = nullptr;  // (cells+1) x (2*reach+1); [i][i-j+reach] = L(s_i, (i-j)*ds/dt)
};

inline int ltab_cols(const ArcSlab& sl) { return 2 * sl.reach + 1; }

// Relaxes the arrival at local node i against the previous slice `in`.
// H(s,mu) and Hs(s,mu) evaluate the Hamiltonian and its momentum derivative
// at the mid-step time; they are only used when `interp` is set.
template <class HFn, class HSFn>
inline void relax_arrival(const ArcSlab& sl, const double* in, int i, bool interp, HFn&& H, HSFn&& Hs,
                          double& best, Foot& foot) {
    const int jlo = std::max(0, i - sl.reach);
    const int jhi = std::min(sl.cells, i + sl.reach);
    const double si = i * sl.ds;
    const int cols = ltab_cols(sl);
    for (int j = jlo; j <= jhi; ++j) {
        double vin = in[j];
        if (vin >= kInfGuard) continue;
        double cand = vin + sl.dt * sl.ltab[i * cols + (i - j + sl.reach)];
        if (cand < best) {
            best = cand;
            foot = {Foot::on_arc, sl.arc, j * sl.ds};
        }
    }
    if (!interp) return;
    for (int c = jlo; c < jhi; ++c) {
        double va = in[c], vb = in[c + 1];
        if (va >= kInfGuard || vb >= kInfGuard) continue;
        double g = (vb - va) / sl.ds;
        double lam = Hs(si, g);
        if (!(std::abs(lam) <= sl.kappa)) continue;
        double y = si - lam * sl.dt;
        double ylo = c * sl.ds, yhi = (c + 1) * sl.ds;
        double edge = 1e-12 * sl.ds;
        if (y <= ylo + edge || y >= yhi - edge) continue;
        double theta = (y - ylo) / sl.ds;
        double vhat = (1 - theta) * va + theta * vb;
        // Fenchel pairing: L(lam) = lam*g - H(g) exactly at lam = dH/dmu(g)
        double cand = vhat + sl.dt * (lam * g - H(si, g));
        if (cand < best) {
            best = cand;
            foot = {Foot::on_arc, sl.arc, y};
        }
    }
}

}  // namespace hjnet::detail
