#pragma once

#include "g2lab/metric.hpp"

#include <optional>

namespace g2lab {

/// Flat hyperkahler data on the 4-chart (lambda, mu, ell, m): the symplectic
/// triple, metric, preferred complex structure, and optionally an
/// anti-self-dual 2-form omega0 of the opposite orientation.
struct HyperkahlerData {
    Chart M;
    Form omega1, omega2, omega3;
    MetricTensor g0;
    AlmostComplexStructure J1;
    std::optional<Form> omega0;
    int epsilon = 0; // 1 iff omega0 present

    Form Omega_sq() const { // Omega ^ conj(Omega) = omega2^2 + omega3^2 (real 4-form)
        return wedge(omega2, omega2) + wedge(omega3, omega3);
    }
};

inline Chart flat_m4_chart() { return make_chart({"lambda", "mu", "ell", "m"}); }

namespace detail {

inline AlmostComplexStructure constant_acs(const Chart& c,
                                           const std::vector<std::tuple<int, int, double>>& entries) {
    const int d = c->dim();
    std::vector<std::vector<ScalarField>> J(d, std::vector<ScalarField>(d, constant(c, 0.0)));
    for (auto& [i, j, v] : entries) J[i][j] = constant(c, v);
    return {c, std::move(J)};
}

} // namespace detail

/// Canonical coordinates z1 = lambda + i mu, z2 = ell + i m:
/// omega1 = dlambda^dmu + dell^dm, Omega = dz1^dz2.
inline HyperkahlerData flat_hk_c2() {
    auto c = flat_m4_chart();
    HyperkahlerData hk;
    hk.M = c;
    hk.omega1 = const_form(c, 2, {{{0, 1}, 1.0}, {{2, 3}, 1.0}});
    hk.omega2 = const_form(c, 2, {{{0, 2}, 1.0}, {{1, 3}, -1.0}});
    hk.omega3 = const_form(c, 2, {{{0, 3}, 1.0}, {{1, 2}, 1.0}});
    hk.g0 = MetricTensor::identity(c);
    hk.J1 = detail::constant_acs(c, {{1, 0, 1.0}, {0, 1, -1.0}, {3, 2, 1.0}, {2, 3, -1.0}});
    hk.omega0 = const_form(c, 2, {{{0, 1}, 1.0}, {{2, 3}, -1.0}});
    hk.epsilon = 1;
    return hk;
}

/// The same flat hyperkahler metric with the triple rotated so that the
/// literal connection forms of the T^2-bundle example
/// (eta = dv - lambda dell + mu dm, xi = du - mu dell - lambda dm) satisfy
/// d(eta_N) = -omega2 and d(xi_P) = omega1. A rotation of the 2-sphere of
/// complex structures: (omega1, omega2, omega3) <- (-omega3, omega2, omega1).
inline HyperkahlerData flat_hk_glps() {
    auto c = flat_m4_chart();
    HyperkahlerData hk;
    hk.M = c;
    hk.omega1 = const_form(c, 2, {{{0, 3}, -1.0}, {{1, 2}, -1.0}});
    hk.omega2 = const_form(c, 2, {{{0, 2}, 1.0}, {{1, 3}, -1.0}});
    hk.omega3 = const_form(c, 2, {{{0, 1}, 1.0}, {{2, 3}, 1.0}});
    hk.g0 = MetricTensor::identity(c);
    hk.J1 = detail::constant_acs(c, {{3, 0, -1.0}, {2, 1, -1.0}, {1, 2, 1.0}, {0, 3, 1.0}});
    hk.omega0 = const_form(c, 2, {{{0, 1}, 1.0}, {{2, 3}, -1.0}});
    hk.epsilon = 1;
    return hk;
}

/// Residual of the hyperkahler compatibility relations at a point:
/// omega_i ^ omega_i all equal, omega_i ^ omega_j = 0 (i != j),
/// d omega_i = 0, omega0 ^ omega0 = -1/2 Omega ^ conj(Omega), omega0 ^ omega1 = 0,
/// and h(J1 ., .) = omega1(., .).
inline double hk_invariant_residual(const HyperkahlerData& hk, const Point& p) {
    EvalCache cache;
    double r = 0.0;
    const Form* w[3] = {&hk.omega1, &hk.omega2, &hk.omega3};
    Mask full = mask::full(4);
    double sq[3];
    for (int i = 0; i < 3; ++i) sq[i] = wedge(*w[i], *w[i]).value_at(p, &cache)[full];
    for (int i = 0; i < 3; ++i) {
        r = std::max(r, std::abs(sq[i] - sq[0]));
        for (int j = i + 1; j < 3; ++j)
            r = std::max(r, max_abs(wedge(*w[i], *w[j]).value_at(p, &cache)));
        r = std::max(r, exterior_d(*w[i]).max_abs_at(p, &cache));
    }
    if (hk.omega0) {
        auto w00 = wedge(*hk.omega0, *hk.omega0).value_at(p, &cache)[full];
        auto OO = hk.Omega_sq().value_at(p, &cache)[full];
        r = std::max(r, std::abs(w00 + 0.5 * hk.epsilon * OO));
        r = std::max(r, max_abs(wedge(*hk.omega0, hk.omega1).value_at(p, &cache)));
    }
    // compatibility of J1 with (g0, omega1)
    for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) {
            double hj = 0.0;
            for (int m = 0; m < 4; ++m)
                hj += hk.J1.entry(m, j).value(p, &cache) * hk.g0.entry(m, k).value(p, &cache);
            Mask mm = (Mask{1} << std::min(j, k)) | (Mask{1} << std::max(j, k));
            double sjk = j == k ? 0.0 : hk.omega1.coeff(mm).value(p, &cache) * (j < k ? 1.0 : -1.0);
            r = std::max(r, std::abs(hj - sjk));
        }
    return r;
}

} // namespace g2lab
