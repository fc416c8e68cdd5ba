#pragma once

#include "g2lab/airy.hpp"
#include "g2lab/hyperkahler.hpp"
#include "g2lab/rng.hpp"

namespace g2lab::ma {

/// The (t, M)-chart P of the evolution ansatz: coordinates (t, lambda, mu,
/// ell, m) with t in the given open interval.
inline Chart p5_chart(double t_lo, double t_hi) {
    return make_chart({"t", "lambda", "mu", "ell", "m"},
                      {Interval{t_lo, t_hi}, {}, {}, {}, {}});
}

inline Mask m_coords_mask(const Chart& P) {
    Mask m = 0;
    for (int i = 0; i < P->dim(); ++i)
        if (P->name(i) != "t" && P->name(i) != "u" && P->name(i) != "v") m |= Mask{1} << i;
    return m;
}

/// J1 of the base extended by zero to a product chart (kills dt, du, dv).
inline AlmostComplexStructure extend_J1(const AlmostComplexStructure& J1, const Chart& big) {
    const Chart& M = J1.chart();
    const int D = big->dim();
    std::vector<std::vector<ScalarField>> J(D, std::vector<ScalarField>(D, constant(big, 0.0)));
    for (int i = 0; i < M->dim(); ++i)
        for (int j = 0; j < M->dim(); ++j) {
            int I = big->index_of(M->name(i)), Jj = big->index_of(M->name(j));
            J[I][Jj] = extend_to(J1.entry(i, j), big);
        }
    return {big, std::move(J)};
}

/// Fibrewise differential d_M: exterior derivative along base coordinates only.
inline Form d_M(const Form& a) { return exterior_d(a, m_coords_mask(a.chart())); }

inline Form d_c_M(const ScalarField& f, const AlmostComplexStructure& J_ext) {
    return d_c(f, J_ext); // J kills non-base directions, so this is J d_M f
}

/// Complex Monge-Ampere operator on the flat base:
/// (omega1 - 1/2 dd^c f)^2 = M(f) omega1^2. Fields may live on M or on P.
inline ScalarField ma_operator(const ScalarField& f, const HyperkahlerData& hk) {
    const Chart& c = f.chart();
    auto J = c->same_names(*hk.M) ? hk.J1 : extend_J1(hk.J1, c);
    Form w1 = c->same_names(*hk.M) ? hk.omega1 : extend_to(hk.omega1, c);
    Form wt = w1 - 0.5 * exterior_d(d_c(f, J), m_coords_mask(c));
    Mask full = m_coords_mask(c);
    return wedge(wt, wt).coeff(full) / wedge(w1, w1).coeff(full);
}

/// Foliation shortcut M(f) = 1 + 1/2 Delta f, valid when dd^c f ^ dd^c f = 0.
/// Delta here is the Laplacian of the flat base metric with the sign that
/// matches the paper's reduction G'' + t (G_ll + G_mm) = 2t, i.e.
/// Delta f = -sum_i d_i d_i f over base coordinates.
inline ScalarField ma_foliation_value(const ScalarField& f, const HyperkahlerData& hk) {
    const Chart& c = f.chart();
    ScalarField lap = constant(c, 0.0);
    Mask mm = m_coords_mask(c);
    for (int i = 0; i < c->dim(); ++i)
        if (mm & (Mask{1} << i)) lap = lap + partial(partial(f, i), i);
    (void)hk;
    return 1.0 - 0.5 * lap;
}

/// Evolution data on (t-interval) x M driven by a potential G:
/// omega_tilde = omega1 - 1/2 d_M d^c_M G, 2u = G''.
struct MAProblem {
    HyperkahlerData hk;
    Chart P;
    ScalarField G;
    Form omega_tilde;
    ScalarField u;
    Form xi_P; // = -1/2 d^c_M(G')
    AlmostComplexStructure J_ext;
};

inline MAProblem make_ma_problem(const HyperkahlerData& hk, const Chart& P, ScalarField G) {
    MAProblem prob;
    prob.hk = hk;
    prob.P = P;
    prob.J_ext = extend_J1(hk.J1, P);
    prob.G = G;
    int t_idx = P->index_of("t");
    Form w1 = extend_to(hk.omega1, P);
    prob.omega_tilde = w1 - 0.5 * d_M(d_c(G, prob.J_ext));
    prob.u = 0.5 * partial(partial(G, t_idx), t_idx);
    prob.xi_P = -0.5 * d_c(partial(G, t_idx), prob.J_ext);
    return prob;
}

/// Residual of 2t M(G) = G'' as a field on P; vanishes exactly when the
/// ansatz satisfies the coupled evolution system.
inline ScalarField pde_residual(const MAProblem& prob) {
    Mask full = m_coords_mask(prob.P);
    Form w1 = extend_to(prob.hk.omega1, prob.P);
    ScalarField M = wedge(prob.omega_tilde, prob.omega_tilde).coeff(full) /
                    wedge(w1, w1).coeff(full);
    ScalarField t = coordinate(prob.P, "t");
    return 2.0 * t * M - 2.0 * prob.u;
}

/// A small fixed catalogue of Helmholtz factors H(lambda, mu); products are
/// allowed, e.g. "sin(lambda)*cos(mu)".
inline ScalarField parse_helmholtz_factor(const Chart& c, const std::string& spec) {
    auto single = [&](const std::string& s) -> ScalarField {
        if (s == "1" || s == "const") return constant(c, 1.0);
        if (s == "sin(lambda)") return sin(coordinate(c, "lambda"));
        if (s == "cos(lambda)") return cos(coordinate(c, "lambda"));
        if (s == "sin(mu)") return sin(coordinate(c, "mu"));
        if (s == "cos(mu)") return cos(coordinate(c, "mu"));
        throw ConstructionError("unsupported H factor: " + s);
    };
    auto star = spec.find('*');
    if (star == std::string::npos) return single(spec);
    return single(spec.substr(0, star)) * parse_helmholtz_factor(c, spec.substr(star + 1));
}

/// Residual of the Helmholtz equation H_ll + H_mm + c H = 0 at a point.
inline double helmholtz_residual(const ScalarField& H, double c, const Point& p) {
    const Chart& ch = H.chart();
    int il = ch->index_of("lambda"), im = ch->index_of("mu");
    Jet j = H.eval(p, 2);
    return std::abs(j.hess(il, il) + j.hess(im, im) + c * j.v);
}

/// Separable solution G = t^3/3 + H(lambda,mu) K(t) of 2t M(G) = G'' with
/// K'' = c t K. Verifies the Helmholtz equation for H and a nonempty
/// positivity window for omega_tilde before returning.
inline MAProblem separable_solution(double c, const std::string& H_spec,
                                    std::shared_ptr<const AirySolution> K, double t_lo,
                                    double t_hi, std::uint64_t seed = 99) {
    if (K->c() != c) throw ConstructionError("Airy factor solves K'' = c' t K with c' != c");
    auto hk = flat_hk_c2();
    auto P = p5_chart(t_lo, t_hi);
    auto H = parse_helmholtz_factor(P, H_spec);
    auto t = coordinate(P, "t");
    ScalarField G = t * t * t / 3.0 + H * compose(t, K);

    Xorshift rng(seed);
    SampleBox box{{{t_lo, t_hi}, {-3.2, 3.2}, {-3.2, 3.2}, {-1, 1}, {-1, 1}}, 1e-3};
    for (int i = 0; i < 24; ++i) {
        Point p = box.sample(rng);
        if (helmholtz_residual(H, c, p) > 1e-12)
            throw ConstructionError("H does not satisfy the Helmholtz equation for this c");
    }
    auto prob = make_ma_problem(hk, P, G);
    // positivity of omega_tilde as a (1,1)-form: the induced symmetric form
    // g(t)(X, Y) = omega_tilde(X, J1 Y) must be positive definite
    for (int i = 0; i < 24; ++i) {
        Point p = box.sample(rng);
        EvalCache cache;
        Eigen::Matrix4d g;
        auto wt = prob.omega_tilde.value_at(p, &cache);
        const Chart& P5 = prob.P;
        int base[4] = {P5->index_of("lambda"), P5->index_of("mu"), P5->index_of("ell"),
                       P5->index_of("m")};
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                double s = 0.0;
                for (int cidx = 0; cidx < 4; ++cidx) {
                    double Jcb = prob.J_ext.entry(base[cidx], base[b]).value(p, &cache);
                    if (Jcb == 0.0) continue;
                    int x = base[a], y = base[cidx];
                    if (x == y) continue;
                    Mask mmask = (Mask{1} << std::min(x, y)) | (Mask{1} << std::max(x, y));
                    double w = wt.count(mmask) ? wt[mmask] : 0.0;
                    s += (x < y ? w : -w) * Jcb;
                }
                g(a, b) = s;
            }
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(0.5 * (g + g.transpose()));
        if (es.eigenvalues().minCoeff() <= 0.0)
            throw ConstructionError("positivity window empty: omega_tilde not positive");
    }
    return prob;
}

} // namespace g2lab::ma
