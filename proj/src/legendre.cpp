#include "hjnet/legendre.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "hjnet/common.hpp"

namespace hjnet {

namespace {
constexpr double kGolden = 0.6180339887498949;
}

ConcaveMax maximize_concave(const std::function<double(double)>& g, double guess, double seed_radius,
                            double tol, double radius_cap) {
    // best point seen anywhere, so exact lattice hits survive the refinement
    double best_x = guess;
    double best_v = -kInf;
    auto eval = [&](double x) {
        double v = g(x);
        if (v > best_v) {
            best_v = v;
            best_x = x;
        }
        return v;
    };

    double r = std::max(seed_radius, 1e-6);
    double center = guess;
    double a = 0, b = 0;
    // expand until a coarse scan puts the best point strictly inside
    for (;;) {
        a = center - r;
        b = center + r;
        constexpr int scan = 9;
        int best_i = 0;
        double scan_best = -kInf;
        for (int i = 0; i < scan; ++i) {
            double x = a + (b - a) * i / (scan - 1);
            double v = eval(x);
            if (v > scan_best) {
                scan_best = v;
                best_i = i;
            }
        }
        if (best_i != 0 && best_i != scan - 1) {
            double step = (b - a) / (scan - 1);
            double m = a + step * best_i;
            a = m - step;
            b = m + step;
            break;
        }
        center = a + (b - a) * best_i / (scan - 1);
        r *= 4;
        if (r > radius_cap)
            throw Error("bracket expansion exceeded its cap; growth envelopes look misdeclared");
    }

    double x1 = b - kGolden * (b - a);
    double x2 = a + kGolden * (b - a);
    double f1 = eval(x1), f2 = eval(x2);
    double fa = eval(a), fb = eval(b);
    ConcaveMax out;
    for (int it = 0; it < 300; ++it) {
        double m, fm;
        if (f1 >= f2) {
            m = x1;
            fm = f1;
        } else {
            m = x2;
            fm = f2;
        }
        // secant-extension bound: concavity caps the max by the tent over
        // (a,m,b)
        double upper = fm;
        if (m > a && b > m) {
            double s_left = (fm - fa) / (m - a);
            double s_right = (fb - fm) / (b - m);
            if (s_left > 0) upper = std::max(upper, fm + s_left * (b - m));
            if (s_right < 0) upper = std::max(upper, fm - s_right * (m - a));
        }
        out.arg = best_x;
        out.value = best_v;
        out.gap = std::max(0.0, upper - best_v);
        if (out.gap <= tol * std::max(1.0, std::abs(best_v))) return out;
        if (f1 >= f2) {
            b = x2;
            fb = f2;
            x2 = x1;
            f2 = f1;
            x1 = b - kGolden * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            fa = f1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (b - a);
            f2 = eval(x2);
        }
    }
    return out;
}

double envelope_conjugate(const Envelope& env, double r, double radius_cap) {
    double x = std::abs(r);
    // even extension keeps the objective concave on the whole line
    auto g = [&](double m) { return x * m - env(std::abs(m)); };
    ConcaveMax res = maximize_concave(g, 1.0, 2.0 + 2.0 * x, 1e-10, radius_cap);
    return res.value;
}

Conjugator::Conjugator(const HamiltonianFamily* family, double gap_tol)
    : family_(family), gap_tol_(gap_tol) {}

ConjugateResult Conjugator::conjugate(OrientedArc oa, double s, double lam, double t) const {
    if (oa.reversed) {
        double len = family_->network().arc(oa.arc).length;
        ConjugateResult fwd = conjugate({oa.arc, false}, len - s, -lam, t);
        fwd.argmax = -fwd.argmax;
        return fwd;
    }
    auto g = [&](double mu) { return lam * mu - family_->eval(oa, s, t, mu); };
    ConcaveMax res = maximize_concave(g, lam, 2.0 + 2.0 * std::abs(lam), gap_tol_);
    return {res.value, res.arg, res.gap};
}

ConjugateResult Conjugator::conjugate_reversed(OrientedArc oa, double s, double lam, double t) const {
    return conjugate({oa.arc, !oa.reversed}, s, lam, t);
}

double Conjugator::lower_conjugate(double r) const {
    return envelope_conjugate([this](double m) { return family_->upper_growth(m); }, r);
}

double Conjugator::upper_conjugate(double r) const {
    return envelope_conjugate([this](double m) { return family_->lower_growth(m); }, r);
}

double Conjugator::alpha_hat() const { return family_->alpha(); }

double Conjugator::beta_hat() const {
    return family_->alpha() * std::abs(lower_conjugate(0.0)) + family_->beta();
}

double Conjugator::eps_hat() const { return family_->eps(); }

std::vector<MomentumSelection> Conjugator::min_momentum_selection(OrientedArc oa,
                                                                  const std::vector<double>& times) const {
    std::vector<MomentumSelection> table;
    table.reserve(times.size());
    for (double t : times) {
        auto g = [&](double mu) { return -family_->eval(oa, 0.0, t, mu); };
        ConcaveMax res = maximize_concave(g, 0.0, 2.0, gap_tol_);
        table.push_back({t, res.arg, -res.value});
    }
    return table;
}

ConjugacyReport Conjugator::validate(int lattice_points, double speed_range) const {
    ConjugacyReport rep;
    const int n = lattice_points;
    double worst_lower = 0, worst_upper = 0, worst_convex = 0, worst_young = 0, worst_time = 0;
    double slack = kInf;
    double T = family_->horizon();
    double dt_step = T / (n - 1);
    double a_hat = alpha_hat(), b_hat = beta_hat(), e_hat = eps_hat();
    for (int ai = 0; ai < family_->network().num_arcs(); ++ai) {
        OrientedArc oa{ai, false};
        double len = family_->network().arc(ai).length;
        for (int i = 0; i < n; ++i) {
            double s = len * i / (n - 1);
            for (int k = 0; k < n; ++k) {
                double lam = -speed_range + 2 * speed_range * k / (n - 1);
                double prev = 0.0;
                for (int j = 0; j < n; ++j) {
                    double t = T * j / (n - 1);
                    ConjugateResult c = conjugate(oa, s, lam, t);
                    double tol = 1e-8 * (1 + std::abs(c.value)) + c.gap;
                    worst_lower = std::max(worst_lower, lower_conjugate(lam) - c.value - tol);
                    worst_upper = std::max(worst_upper, c.value - upper_conjugate(lam) - tol);
                    slack = std::min(slack, std::min(c.value - lower_conjugate(lam), upper_conjugate(lam) - c.value));
                    // Young-Fenchel with certified slack at a probe momentum
                    double mu = lam / 2;
                    double young = lam * mu - c.value - family_->eval(oa, s, t, mu) - c.gap;
                    worst_young = std::max(worst_young, young);
                    if (j > 0 && dt_step < e_hat) {
                        double bound = (a_hat * std::abs(lam) + b_hat) * dt_step + tol;
                        worst_time = std::max(worst_time, std::abs(c.value - prev) - bound);
                    }
                    prev = c.value;
                }
                if (k > 0 && k + 1 < n) {
                    double lam_a = -speed_range + 2 * speed_range * (k - 1) / (n - 1);
                    double lam_b = -speed_range + 2 * speed_range * (k + 1) / (n - 1);
                    double mid = conjugate(oa, s, (lam_a + lam_b) / 2, T / 2).value;
                    double avg = (conjugate(oa, s, lam_a, T / 2).value + conjugate(oa, s, lam_b, T / 2).value) / 2;
                    worst_convex = std::max(worst_convex, mid - avg - 1e-8 * (1 + std::abs(avg)));
                }
            }
        }
    }
    if (worst_lower > 0) rep.issues.push_back({"conjugate-lower-envelope", worst_lower});
    if (worst_upper > 0) rep.issues.push_back({"conjugate-upper-envelope", worst_upper});
    if (worst_convex > 0) rep.issues.push_back({"conjugate-convexity", worst_convex});
    if (worst_young > 0) rep.issues.push_back({"young-fenchel", worst_young});
    if (worst_time > 0) rep.issues.push_back({"conjugate-time-lipschitz", worst_time});
    rep.envelope_slack = slack;
    return rep;
}

void Conjugator::dump_table(const std::string& csv_path, const std::vector<double>& offsets,
                            const std::vector<double>& speeds, const std::vector<double>& times) const {
    std::ofstream out(csv_path);
    if (!out) throw Error("cannot open '" + csv_path + "'");
    out << "arc,s,lambda,t,L,argmax,gap\n";
    for (int ai = 0; ai < family_->network().num_arcs(); ++ai)
        for (double s : offsets)
            for (double lam : speeds)
                for (double t : times) {
                    if (s > family_->network().arc(ai).length) continue;
                    ConjugateResult c = conjugate({ai, false}, s, lam, t);
                    out << family_->network().arc(ai).id << ',' << format_double(s) << ',' << format_double(lam)
                        << ',' << format_double(t) << ',' << format_double(c.value) << ','
                        << format_double(c.argmax) << ',' << format_double(c.gap) << '\n';
                }
}

}  // namespace hjnet
