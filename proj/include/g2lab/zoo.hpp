#pragma once

#include "g2lab/ma.hpp"

#include <string>

namespace g2lab::zoo {

using ma::d_M;
using ma::extend_J1;
using ma::m_coords_mask;

/// Parameters of a constant solution omega_tilde = (p+qt) omega0 + (k+lt) omega1
/// on a t-interval (a, b) with a > 0. The positivity constraint
/// k + lt > |p + qt| is affine in t, so checking both endpoints is exact.
struct ConstantParams {
    double p = 0, q = 0, k = 0, l = 1;
    double a = 0.5, b = 2.0;

    bool positive_on_interval() const {
        auto ok = [&](double t) { return k + l * t > std::abs(p + q * t); };
        return a > 0.0 && ok(a) && ok(b);
    }

    double u_at(double t) const {
        double x = k + l * t, y = p + q * t;
        return t * (x * x - y * y);
    }
};

/// Seven-dimensional torsion-free G2 structure data on the chart
/// (t, u, v, lambda, mu, ell, m). The forms are those of the bundle
/// construction; reductions and verification read everything from here.
struct G2Bundle {
    Chart Y;
    Form phi, star_phi;
    MetricTensor k;
    VectorField V; // d/dv
    HyperkahlerData hk;
    Form omega_tilde; // on Y
    Form xi, eta, xi_P, eta_N;
    ScalarField u_profile;
    SampleBox box;
    std::string family;
};

inline Chart y7_chart(double t_lo, double t_hi) {
    return make_chart({"t", "u", "v", "lambda", "mu", "ell", "m"},
                      {Interval{t_lo, t_hi}, {}, {}, {}, {}, {}, {}});
}

struct AssembleOptions {
    int n_check_samples = 10;
    std::uint64_t seed = 7;
    double tol_primitives = 1e-10;
    double tol_evolution = 1e-8;
    std::pair<double, double> base_range{-1.0, 1.0};
};

/// Theorem-1 assembly: from a hyperkahler base, a family omega_tilde(t), a
/// profile u, and primitive connection forms with d(eta_N) = -omega2 and
/// d(xi_P) = (d^c_M u) ^ dt + omega_tilde', build
///   phi  = sigma ^ eta + t Psi+,      sigma = omega_tilde + dt ^ xi,
///   *phi = Psi- ^ eta + t^2/2 sigma^2,
///   k    = t g(t) + (t/u) xi (x) xi + t u dt (x) dt + t^-2 eta (x) eta,
/// with Psi+ = omega2 ^ xi + u omega3 ^ dt, Psi- = omega3 ^ xi - u omega2 ^ dt.
/// The structure equations and the compatibility pair are verified at seeded
/// sample points before the bundle is returned.
inline G2Bundle assemble_g2(const HyperkahlerData& hk, const Form& omega_tilde_P,
                            const ScalarField& u_P, const Form& xi_P_in, const Form& eta_N_in,
                            double t_lo, double t_hi, const std::string& family_name,
                            const AssembleOptions& opt = {}) {
    Chart Y = y7_chart(t_lo, t_hi);
    G2Bundle B;
    B.Y = Y;
    B.hk = hk;
    B.family = family_name;

    Form w1 = extend_to(hk.omega1, Y), w2 = extend_to(hk.omega2, Y), w3 = extend_to(hk.omega3, Y);
    Form wt = extend_to(omega_tilde_P, Y);
    ScalarField u = extend_to(u_P, Y);
    Form xi_P = extend_to(xi_P_in, Y), eta_N = extend_to(eta_N_in, Y);
    Form dt = d_coord(Y, "t");
    Form xi = d_coord(Y, "u") + xi_P;
    Form eta = d_coord(Y, "v") + eta_N;
    ScalarField t = coordinate(Y, "t");

    B.omega_tilde = wt;
    B.u_profile = u;
    B.xi = xi;
    B.eta = eta;
    B.xi_P = xi_P;
    B.eta_N = eta_N;

    Form Psi_plus = wedge(w2, xi) + u * wedge(w3, dt);
    Form Psi_minus = wedge(w3, xi) - u * wedge(w2, dt);
    Form sigma = wt + wedge(dt, xi);
    B.phi = wedge(sigma, eta) + t * Psi_plus;
    B.star_phi = wedge(Psi_minus, eta) + (0.5 * t * t) * wedge(sigma, sigma);

    // metric: t g(t) on the base block, with g(t)(X,Y) = omega_tilde(X, J1 Y)
    auto J1Y = extend_J1(hk.J1, Y);
    MetricTensor k = MetricTensor::zero(Y);
    {
        const int D = Y->dim();
        std::vector<std::vector<ScalarField>> wtm(D, std::vector<ScalarField>(D, constant(Y, 0.0)));
        for (auto& [m, f] : wt.coeffs()) {
            auto idx = mask::indices(m);
            wtm[idx[0]][idx[1]] = f;
            wtm[idx[1]][idx[0]] = -f;
        }
        for (int a = 0; a < D; ++a)
            for (int b = a; b < D; ++b) {
                ScalarField gab = constant(Y, 0.0);
                for (int c = 0; c < D; ++c) gab = gab + wtm[a][c] * J1Y.entry(c, b);
                if (!gab.is_zero()) k.set(a, b, t * gab);
            }
    }
    k.add_outer(xi, t / u);
    k.set(0, 0, k.entry(0, 0) + t * u); // dt (x) dt block
    k.add_outer(eta, pow(t, -2.0));
    B.k = k;
    B.V = VectorField::basis(Y, Y->index_of("v"));

    B.box = SampleBox{{{t_lo, t_hi},
                       {opt.base_range.first, opt.base_range.second},
                       {opt.base_range.first, opt.base_range.second},
                       {opt.base_range.first, opt.base_range.second},
                       {opt.base_range.first, opt.base_range.second},
                       {opt.base_range.first, opt.base_range.second},
                       {opt.base_range.first, opt.base_range.second}},
                      1e-3};

    // construction-time verification of the structure equations
    Xorshift rng(opt.seed);
    Form d_eta_res = exterior_d(eta_N) + w2;
    Form omega_tilde_prime = partial_form(wt, 0);
    Form d_xi_res = exterior_d(xi_P) - wedge(d_c(u, J1Y), dt) - omega_tilde_prime;
    Form eq13 = partial_form(omega_tilde_prime, 0) + d_M(d_c(u, J1Y));
    Form eq14 = t * wedge(wt, wt) - (0.5 * u) * (wedge(w2, w2) + wedge(w3, w3));
    for (int i = 0; i < opt.n_check_samples; ++i) {
        Point p = B.box.sample(rng);
        EvalCache cache;
        if (d_eta_res.max_abs_at(p, &cache) > opt.tol_primitives)
            throw ConstructionError("primitive check failed: d(eta_N) != -omega2");
        if (d_xi_res.max_abs_at(p, &cache) > opt.tol_primitives)
            throw ConstructionError("primitive check failed: d(xi_P) != d^c_M u ^ dt + omega_tilde'");
        if (eq13.max_abs_at(p, &cache) > opt.tol_evolution)
            throw ConstructionError("evolution equation residual too large");
        if (eq14.max_abs_at(p, &cache) > opt.tol_evolution)
            throw ConstructionError("compatibility equation residual too large");
        if (u.value(p, &cache) <= 0.0) throw ConstructionError("profile u must be positive");
        B.k.require_spd(p);
    }
    return B;
}

// ---------------------------------------------------------------------------
// Families
// ---------------------------------------------------------------------------

/// omega_tilde(t) and u(t) of a constant solution, as fields on the given
/// product chart.
struct ConstantSolution {
    Form omega_tilde;
    ScalarField u;
    bool product_case; // q = l = 0: Calabi-Yau x R, flagged
};

inline ConstantSolution constant_solution(const ConstantParams& par, const HyperkahlerData& hk,
                                          const Chart& P) {
    if (!par.positive_on_interval())
        throw ConstructionError("positivity k+lt > |p+qt| fails on the interval");
    if ((par.p != 0.0 || par.q != 0.0) && !hk.omega0)
        throw ConstructionError("nonzero (p,q) needs an omega0 of opposite orientation");
    ScalarField t = coordinate(P, "t");
    ScalarField A = par.k + par.l * t;
    ScalarField Bf = par.p + par.q * t;
    Form wt = A * extend_to(hk.omega1, P);
    if (hk.omega0 && (par.p != 0.0 || par.q != 0.0)) wt = wt + Bf * extend_to(*hk.omega0, P);
    ScalarField u = t * (A * A - Bf * Bf);
    return {wt, u, par.q == 0.0 && par.l == 0.0};
}

/// Canonical linear primitives on the flat base:
/// eta_N = -lambda dell + mu dm   (d eta_N = -omega2 for the standard triple),
/// xi_P = (q+l) lambda dmu + (l-q) ell dm  (d xi_P = q omega0 + l omega1).
inline Form standard_eta_N(const Chart& c) {
    Form f(c, 1);
    f.add(Mask{1} << c->index_of("ell"), -coordinate(c, "lambda"));
    f.add(Mask{1} << c->index_of("m"), coordinate(c, "mu"));
    return f;
}

inline Form standard_xi_P(const Chart& c, double q, double l) {
    Form f(c, 1);
    f.add(Mask{1} << c->index_of("mu"), (q + l) * coordinate(c, "lambda"));
    f.add(Mask{1} << c->index_of("m"), (l - q) * coordinate(c, "ell"));
    return f;
}

/// Example 1 primitives in the glps frame:
/// xi = du - mu dell - lambda dm, eta = dv - lambda dell + mu dm.
inline Form glps_xi_P(const Chart& c) {
    Form f(c, 1);
    f.add(Mask{1} << c->index_of("ell"), -coordinate(c, "mu"));
    f.add(Mask{1} << c->index_of("m"), -coordinate(c, "lambda"));
    return f;
}

inline G2Bundle glps_bundle(double t_lo = 0.5, double t_hi = 2.0) {
    auto hk = flat_hk_glps();
    auto P = ma::p5_chart(t_lo, t_hi);
    auto sol = constant_solution({0, 0, 0, 1, t_lo, t_hi}, hk, P);
    return assemble_g2(hk, sol.omega_tilde, sol.u, extend_to(glps_xi_P(hk.M), P),
                       standard_eta_N(hk.M), t_lo, t_hi, "glps");
}

inline G2Bundle constant_bundle(const ConstantParams& par) {
    auto hk = flat_hk_c2();
    auto P = ma::p5_chart(par.a, par.b);
    auto sol = constant_solution(par, hk, P);
    return assemble_g2(hk, sol.omega_tilde, sol.u, extend_to(standard_xi_P(hk.M, par.q, par.l), P),
                       standard_eta_N(hk.M), par.a, par.b,
                       "constant:" + std::to_string(par.p) + "," + std::to_string(par.q) + "," +
                           std::to_string(par.k) + "," + std::to_string(par.l));
}

/// Example 3: separable Monge-Ampere solution G = t^3/3 + sin(lambda) 2Ai(t),
/// assembled through the same Theorem-1 pipeline. With c = 1 this is the
/// paper's Airy metric; f = 1 + Ai(t) sin(lambda) must stay positive.
inline G2Bundle airy_bundle(double c = 1.0, double t_lo = 0.5, double t_hi = 2.0) {
    auto K = std::make_shared<const AirySolution>(c, 2.0 * kAiryAi0, 2.0 * kAiryAiPrime0,
                                                  std::max(6.0, 1.5 * t_hi));
    auto prob = ma::separable_solution(c, "sin(lambda)", K, t_lo, t_hi);
    AssembleOptions opt;
    opt.base_range = {-3.2, 3.2};
    auto B = assemble_g2(prob.hk, prob.omega_tilde, prob.u, prob.xi_P,
                         standard_eta_N(prob.hk.M), t_lo, t_hi,
                         c == 1.0 ? "airy:1" : "airy:" + std::to_string(c), opt);
    return B;
}

/// The Kaehler structure on N = R+_t x P induced by the (0,0,0,1) solution:
/// sigma = t omega1 + dt ^ xi, h = t g0 + t^-3 xi (x) xi + t^3 dt (x) dt,
/// with J alpha = J1 alpha on base forms and J dt = t^-3 xi.
struct GibbonsKahler {
    Chart N;
    Form sigma;
    MetricTensor h;
    AlmostComplexStructure J;
    Form xi;
    ScalarField t_field;
    SampleBox box;
};

inline Chart n6_chart(double t_lo, double t_hi) {
    return make_chart({"t", "u", "lambda", "mu", "ell", "m"},
                      {Interval{t_lo, t_hi}, {}, {}, {}, {}, {}});
}

inline GibbonsKahler gibbons_quotient_kahler(const HyperkahlerData& hk, const Form& xi_P_M,
                                             double t_lo, double t_hi) {
    GibbonsKahler G;
    G.N = n6_chart(t_lo, t_hi);
    ScalarField t = coordinate(G.N, "t");
    Form dt = d_coord(G.N, "t");
    G.xi = d_coord(G.N, "u") + extend_to(xi_P_M, G.N);
    G.sigma = t * extend_to(hk.omega1, G.N) + wedge(dt, G.xi);
    MetricTensor h = MetricTensor::zero(G.N);
    for (int a = 0; a < 4; ++a)
        for (int b = a; b < 4; ++b) {
            int i = G.N->index_of(hk.M->name(a)), j = G.N->index_of(hk.M->name(b));
            auto e = extend_to(hk.g0.entry(a, b), G.N);
            if (!e.is_zero()) h.set(i, j, t * e);
        }
    h.add_outer(G.xi, pow(t, -3.0));
    h.set(0, 0, h.entry(0, 0) + t * t * t);
    G.h = h;
    G.J = acs_from_pair(h, G.sigma);
    G.t_field = t;
    G.box = SampleBox{{{t_lo, t_hi}, {-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}}, 1e-3};
    return G;
}

} // namespace g2lab::zoo
