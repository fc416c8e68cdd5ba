#pragma once

#include "g2lab/chart.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace g2lab::flow {

/// Parameters of the reduced Hamiltonian
///   H = 2 t ((k+lt)^2 - (p+qt)^2)^{1/2} - 2 eps z^{1/2},
/// eps in {+1,-1} being the branch of the square root of z. The quartic level
/// sets in the (t, z) plane have eps z^{1/2} = t^2 - H/2 for the Iwasawa
/// parameters (0,0,0,1).
struct FlowParams {
    double p = 0, q = 0, k = 0, l = 1;
    int eps = +1;

    double window_value(double t) const {
        double a = k + l * t, b = p + q * t;
        return a * a - b * b;
    }

    double r(double t) const {
        double w = window_value(t);
        if (w < 0.0) throw DomainError("outside the positivity window (k+lt)^2 > (p+qt)^2");
        return std::sqrt(w);
    }

    double r_prime(double t) const {
        double a = k + l * t, b = p + q * t;
        double rr = r(t);
        if (rr == 0.0) throw DomainError("window boundary: r'(t) undefined");
        return (l * a - q * b) / rr;
    }
};

struct FlowState {
    double tau = 0, t = 0, z = 0;
};

inline double hamiltonian(const FlowParams& par, double t, double z) {
    if (z < 0.0) throw DomainError("z must be nonnegative");
    return 2.0 * t * par.r(t) - 2.0 * par.eps * std::sqrt(z);
}

/// Canonical right-hand side (dt/dtau, dz/dtau) = (-dH/dz, dH/dt).
/// At the corner r(t) = 0 with t (l(k+lt) - q(p+qt)) = 0 the limit of dz/dtau
/// is zero (the (0,0,0,1) family started at t = 0); elsewhere on the window
/// boundary the flow is singular.
inline std::pair<double, double> hamilton_rhs(const FlowParams& par, double t, double z) {
    if (z <= 0.0) throw DomainError("flow degenerates as z -> 0");
    double dt = par.eps / std::sqrt(z);
    double rr = par.r(t);
    double dz;
    if (rr == 0.0) {
        double num = t * (par.l * (par.k + par.l * t) - par.q * (par.p + par.q * t));
        if (num != 0.0) throw DomainError("window boundary: dH/dt singular");
        dz = 0.0;
    } else {
        dz = 2.0 * rr + 2.0 * t * par.r_prime(t);
    }
    return {dt, dz};
}

enum class FlowStatus { Completed, Degenerate, WindowBoundary };

struct Trajectory {
    std::vector<FlowState> states;
    FlowStatus status = FlowStatus::Completed;
    int direction = +1;     // initial sign of the Hamiltonian time
    int branch_switches = 0;
};

/// Classical fixed-step RK4 on the Hamiltonian system. `direction` scales the
/// vector field by +-1; 0 picks the sign that makes t increase from the start
/// state (the parametrisation used by the quartic examples). On degeneration
/// (z below z_min) the trajectory truncates, or, with allow_branch_switch,
/// hops across the turning point onto the opposite sqrt branch.
inline Trajectory integrate(FlowParams par, FlowState s0, double step, double tau_max,
                            int direction = 0, double z_min = 1e-9,
                            bool allow_branch_switch = false) {
    if (step <= 0.0) throw ConstructionError("step must be positive");
    if (s0.z <= z_min) throw DomainError("initial state is degenerate");
    Trajectory out;
    if (direction == 0) {
        direction = par.eps >= 0 ? +1 : -1; // dt/dtau = eps/sqrt(z)
    }
    out.direction = direction;
    FlowState s = s0;
    out.states.push_back(s);
    int dir = direction;
    struct Degeneration {};
    auto f = [&](double t, double z) {
        if (z <= z_min) throw Degeneration{};
        auto [dt, dz] = hamilton_rhs(par, t, z);
        return std::pair<double, double>{dir * dt, dir * dz};
    };
    long nsteps = static_cast<long>(std::ceil(tau_max / step - 1e-12));
    for (long n = 0; n < nsteps; ++n) {
        double h = step;
        double t = s.t, z = s.z;
        try {
            auto [k1t, k1z] = f(t, z);
            auto [k2t, k2z] = f(t + 0.5 * h * k1t, z + 0.5 * h * k1z);
            auto [k3t, k3z] = f(t + 0.5 * h * k2t, z + 0.5 * h * k2z);
            auto [k4t, k4z] = f(t + h * k3t, z + h * k3z);
            double tn = t + h / 6.0 * (k1t + 2 * k2t + 2 * k3t + k4t);
            double zn = z + h / 6.0 * (k1z + 2 * k2z + 2 * k3z + k4z);
            if (zn <= z_min) throw Degeneration{};
            s = {s.tau + step, tn, zn};
            out.states.push_back(s);
        } catch (const Degeneration&) {
            if (!allow_branch_switch) {
                out.status = FlowStatus::Degenerate;
                return out;
            }
            // Hop across the turning point onto the flipped sqrt branch,
            // staying exactly on the level set: solve
            // 2 t1 r(t1) = H + 2 sqrt(z) for t1 past the corner by Newton.
            double H = hamiltonian(par, t, z);
            double w = std::sqrt(z);
            double t_dir = dir * par.eps > 0 ? +1.0 : -1.0;
            double t1 = t + t_dir * std::max(w, 1e-6);
            bool converged = false;
            for (int it = 0; it < 60; ++it) {
                // old eps still in force here; the flipped branch has -eps
                double g = 2.0 * t1 * par.r(t1) + 2.0 * par.eps * w - H;
                double dg = 2.0 * par.r(t1) + 2.0 * t1 * par.r_prime(t1);
                double tnext = t1 - g / dg;
                if (std::abs(tnext - t1) < 1e-14 * (1.0 + std::abs(t1))) {
                    t1 = tnext;
                    converged = true;
                    break;
                }
                t1 = tnext;
            }
            if (!converged || (t1 - t) * t_dir <= 0.0) {
                out.status = FlowStatus::Degenerate;
                return out;
            }
            // crossing the corner reverses the Hamiltonian time orientation;
            // keep the geometric direction of travel
            par.eps = -par.eps;
            dir = -dir;
            ++out.branch_switches;
            s = {s.tau + step, t1, z};
            out.states.push_back(s);
        } catch (const DomainError&) {
            out.status = FlowStatus::WindowBoundary;
            return out;
        }
    }
    return out;
}

/// Closed-form quartic level set z = (t^2 - H/2)^2 of the Iwasawa family.
inline double quartic_level(double Hc, double t) {
    double w = t * t - 0.5 * Hc;
    return w * w;
}

namespace detail {

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double whole, double tol,
                               int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}

} // namespace detail

/// Adaptive-Simpson quadrature to (roughly) the requested relative accuracy.
inline double quadrature(const std::function<double(double)>& f, double a, double b,
                         double rel_tol = 1e-12) {
    if (a == b) return 0.0;
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
    double scale = std::max({std::abs(whole), std::abs(b - a), 1e-30});
    return detail::adaptive_simpson(f, a, b, fa, fm, fb, whole, rel_tol * scale, 48);
}

/// tau(t0 -> t1) = int t ((k+lt)^2 - (p+qt)^2)^{1/2} dt, the arclength-type
/// parameter of the Kaehler scheme.
inline double tau_of_t(const FlowParams& par, double t0, double t1) {
    if (t0 == t1) return 0.0;
    return quadrature([&par](double t) { return t * par.r(t); }, t0, t1, 1e-11);
}

/// Invert a monotone tau(t) map on [t_lo, t_hi] by bisection polished with
/// Newton; |tau(t) - tau| <= 1e-12 * scale at the root.
inline double invert_monotone(const std::function<double(double)>& tau_fn,
                              const std::function<double(double)>& dtau_fn, double tau,
                              double t_lo, double t_hi) {
    double flo = tau_fn(t_lo) - tau, fhi = tau_fn(t_hi) - tau;
    if (flo == 0.0) return t_lo;
    if (fhi == 0.0) return t_hi;
    if (flo * fhi > 0.0) throw DomainError("tau outside the range of the monotone window");
    double lo = t_lo, hi = t_hi;
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        double ft = tau_fn(t) - tau;
        if (std::abs(ft) <= 1e-12 * (1.0 + std::abs(tau))) return t;
        if ((ft > 0) == (fhi > 0))
            hi = t;
        else
            lo = t;
        double dt = dtau_fn(t);
        double tn = dt != 0.0 ? t - ft / dt : 0.5 * (lo + hi);
        t = (tn > lo && tn < hi) ? tn : 0.5 * (lo + hi);
    }
    return t;
}

inline double invert_tau(const FlowParams& par, double t_lo, double t_hi, double tau) {
    return invert_monotone([&](double t) { return tau_of_t(par, t_lo, t); },
                           [&](double t) { return t * par.r(t); }, tau, t_lo, t_hi);
}

} // namespace g2lab::flow
