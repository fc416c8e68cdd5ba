#pragma once

#include "g2lab/curvature.hpp"
#include "g2lab/zoo.hpp"

namespace g2lab::quotient {

/// The minimal payload of a torsion-free G2 structure with Killing field;
/// both assembled bundles and reconstructed structures reduce through it.
struct G2Core {
    Chart Y;
    Form phi, star_phi;
    MetricTensor k;
    VectorField V;
    SampleBox box;
};

inline G2Core core_of(const zoo::G2Bundle& B) {
    return {B.Y, B.phi, B.star_phi, B.k, B.V, B.box};
}

/// SU(3) structure on the 6-dimensional orbit space: the compatible pair
/// (sigma, psi+) plus everything derived from it.
struct SU3Structure {
    Chart N;
    Form sigma, psi_plus, psi_minus;
    ScalarField t_field;
    MetricTensor h;
    AlmostComplexStructure J;
    VectorField U; // Hamiltonian field of -t: i_U sigma = -dt
    SampleBox box;
};

namespace detail {

inline ScalarField metric_on_pair(const MetricTensor& g, const VectorField& v,
                                  const VectorField& w) {
    ScalarField r = constant(g.chart(), 0.0);
    for (int i = 0; i < g.dim(); ++i)
        for (int j = 0; j < g.dim(); ++j) r = r + g.entry(i, j) * v.comp(i) * w.comp(j);
    return r;
}

/// <a, a>_g at a point from numeric coefficients and the metric value.
inline double form_value_norm(const FormValue& a, const Eigen::MatrixXd& ginv) {
    double s = 0.0;
    for (auto& [I, vi] : a)
        for (auto& [L, vl] : a) {
            auto Ii = mask::indices(I), Li = mask::indices(L);
            const int k = static_cast<int>(Ii.size());
            Eigen::MatrixXd m(k, k);
            for (int r = 0; r < k; ++r)
                for (int c = 0; c < k; ++c) m(r, c) = ginv(Ii[r], Li[c]);
            s += vi * vl * m.determinant();
        }
    return std::sqrt(std::max(0.0, s));
}

} // namespace detail

struct ReduceOptions {
    int n_check_samples = 6;
    std::uint64_t seed = 17;
    double tol_killing = 1e-9;
    double tol_basic = 1e-9;
};

/// The first reduction: from (Y, phi, V) to the SU(3) structure on N.
///   t = k(V,V)^{-1/2},  eta = k(., t^2 V),  sigma = i_V phi,
///   Psi- = -i_V(*phi),  Psi+ = t^{-1}(phi - sigma ^ eta),
///   psi+- = t^{-1/2} Psi+-,  h = t^{-1}(k - t^{-2} eta (x) eta).
/// Everything is basic, so it descends to the chart without the fibre
/// coordinate; basicness is verified at seeded sample points.
inline SU3Structure reduce(const G2Core& B, const std::string& fibre = "v",
                           const ReduceOptions& opt = {}) {
    const Chart& Y = B.Y;
    const int iv = Y->index_of(fibre);

    ScalarField kVV = detail::metric_on_pair(B.k, B.V, B.V);
    ScalarField t = pow(kVV, -0.5);
    Form eta = (t * t) * musical_flat(B.V, B.k);
    Form sigma = interior(B.V, B.phi);
    Form Psi_minus = -interior(B.V, B.star_phi);
    Form Psi_plus = (1.0 / t) * (B.phi - wedge(sigma, eta));
    Form psi_plus = pow(t, -0.5) * Psi_plus;
    Form psi_minus = pow(t, -0.5) * Psi_minus;

    MetricTensor check_k = B.k; // k - t^-2 eta (x) eta, fibre block must vanish
    check_k.add_outer(eta, -pow(t, -2.0));

    // verification: V is Killing for phi, and the reduced data is basic
    Xorshift rng(opt.seed);
    Form lv_phi = lie_derivative(B.V, B.phi);
    for (int s = 0; s < opt.n_check_samples; ++s) {
        Point p = B.box.sample(rng);
        EvalCache cache;
        if (lv_phi.max_abs_at(p, &cache) > opt.tol_killing)
            throw ConstructionError("V does not preserve phi");
        if (kVV.value(p, &cache) <= 0.0) throw ConstructionError("V vanishes at a sample point");
        for (int i = 0; i < Y->dim(); ++i)
            if (std::abs(check_k.entry(iv, i).value(p, &cache)) > opt.tol_basic)
                throw ConstructionError("reduced metric is not basic");
        for (auto& [m, f] : sigma.coeffs())
            if ((m & (Mask{1} << iv)) && std::abs(f.value(p, &cache)) > opt.tol_basic)
                throw ConstructionError("sigma has a fibre component");
        for (auto& [m, f] : psi_plus.coeffs())
            if ((m & (Mask{1} << iv)) && std::abs(f.value(p, &cache)) > opt.tol_basic)
                throw ConstructionError("psi+ has a fibre component");
    }

    // descend to the 6-chart
    std::vector<std::string> names;
    std::vector<Interval> box_iv;
    SampleBox sbox;
    sbox.margin = B.box.margin;
    for (int i = 0; i < Y->dim(); ++i) {
        if (i == iv) continue;
        names.push_back(Y->name(i));
        box_iv.push_back(Y->interval(i));
        sbox.ranges.push_back(B.box.ranges[i]);
    }
    Chart N = make_chart(names, box_iv, Y->orientation());
    std::vector<std::pair<std::string, double>> fills{{fibre, 0.0}};

    SU3Structure S;
    S.N = N;
    S.box = sbox;
    S.sigma = slice_to(sigma, N, fills);
    S.psi_plus = slice_to(psi_plus, N, fills);
    S.psi_minus = slice_to(psi_minus, N, fills);
    S.t_field = slice_to(t, N, fills);

    MetricTensor h = MetricTensor::zero(N);
    ScalarField tN = S.t_field;
    for (int i = 0; i < N->dim(); ++i)
        for (int j = i; j < N->dim(); ++j) {
            int yi = Y->index_of(N->name(i)), yj = Y->index_of(N->name(j));
            auto entry = slice_to(check_k.entry(yi, yj), N, fills);
            if (!entry.is_zero()) h.set(i, j, entry / tN);
        }
    S.h = h;
    S.J = acs_from_pair(h, S.sigma);

    // Hamiltonian field of -t: sigma(U, .) = -dt, i.e. U = Sigma^{-1} dt
    {
        const int d = N->dim();
        std::vector<std::vector<ScalarField>> sig(d, std::vector<ScalarField>(d, constant(N, 0.0)));
        for (auto& [m, f] : S.sigma.coeffs()) {
            auto idx = mask::indices(m);
            sig[idx[0]][idx[1]] = f;
            sig[idx[1]][idx[0]] = -f;
        }
        auto group = std::make_shared<g2lab::detail::InverseMatrixGroup>(N, sig);
        Form dtN = d_of_function(S.t_field);
        std::vector<ScalarField> comps(d, constant(N, 0.0));
        for (int i = 0; i < d; ++i) {
            ScalarField c = constant(N, 0.0);
            for (auto& [m, f] : dtN.coeffs()) {
                int j = std::countr_zero(m);
                c = c + group_element(group, i * d + j) * f;
            }
            comps[i] = c;
        }
        S.U = VectorField(N, comps);
    }
    return S;
}

/// Residuals of the integrability criterion
///   d psi+ = -1/2 (d^c log t) ^ psi-,  d psi- = +1/2 (d^c log t) ^ psi+;
/// both vanish iff J is integrable.
struct IntegrabilityResidual {
    ScalarField n1_sq, n2_sq;

    double at(const Point& p, EvalCache* cache = nullptr) const {
        EvalCache local;
        EvalCache* c = cache ? cache : &local;
        double a = std::sqrt(std::max(0.0, n1_sq.value(p, c)));
        double b = std::sqrt(std::max(0.0, n2_sq.value(p, c)));
        return std::max(a, b);
    }
};

inline IntegrabilityResidual integrability_residual(const SU3Structure& s) {
    Form dct = d_c(log(s.t_field), s.J);
    Form r1 = exterior_d(s.psi_plus) + 0.5 * wedge(dct, s.psi_minus);
    Form r2 = exterior_d(s.psi_minus) - 0.5 * wedge(dct, s.psi_plus);
    return {form_norm_sq(r1, s.h), form_norm_sq(r2, s.h)};
}

/// || Ric(J., .) - kappa ||_g at a point, for a claimed Ricci form kappa of a
/// Kaehler metric g.
inline double ricci_form_residual(const MetricTensor& g, const AlmostComplexStructure& J,
                                  const Form& kappa, const Point& p) {
    EvalCache cache;
    const int d = g.dim();
    auto cur = curvature_at(g, p, &cache);
    Eigen::MatrixXd Jv(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) Jv(i, j) = J.entry(i, j).value(p, &cache);
    FormValue diff = kappa.value_at(p, &cache);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            double rho = 0.0;
            for (int m = 0; m < d; ++m) rho += Jv(m, i) * cur.ricci(m, j);
            Mask mm = (Mask{1} << i) | (Mask{1} << j);
            diff[mm] = (diff.count(mm) ? diff[mm] : 0.0) - rho;
        }
    Eigen::MatrixXd gv = g.value_at(p, &cache);
    return detail::form_value_norm(diff, gv.inverse());
}

/// Ricci-form identity of the first reduction: kappa = 1/2 dd^c log t.
inline double ricci_form_residual(const SU3Structure& s, const Point& p) {
    Form kappa = 0.5 * exterior_d(d_c(log(s.t_field), s.J));
    return ricci_form_residual(s.h, s.J, kappa, p);
}

/// Ricci-form identity of the second reduction: kappa = -1/2 d d^c log u on
/// the 4-dimensional Kaehler quotient.
inline double base_ricci_form_residual(const MetricTensor& g4, const AlmostComplexStructure& J4,
                                       const ScalarField& u4, const Point& p) {
    Form kappa = -0.5 * exterior_d(d_c(log(u4), J4));
    return ricci_form_residual(g4, J4, kappa, p);
}

struct ReconstructOptions {
    int n_check_samples = 6;
    std::uint64_t seed = 23;
    double tol_deta = 1e-10;
    double tol_integrability = 1e-8;
    int v_position = 2;
};

/// Proposition-3 inverse: from an SU(3) structure satisfying the criterion
/// and a connection form with d eta_N = -t^{1/2} i_U psi+, rebuild the
/// torsion-free G2 structure
///   phi = sigma ^ eta + t^{3/2} psi+,
///   *phi = t^{1/2} psi- ^ eta + 1/2 t^2 sigma ^ sigma,
///   k = t h + t^{-2} eta (x) eta.
inline G2Core reconstruct_g2(const SU3Structure& s, const Form& eta_N,
                             const ReconstructOptions& opt = {}) {
    // preconditions
    Xorshift rng(opt.seed);
    Form deta_res = exterior_d(eta_N) +
                    pow(s.t_field, 0.5) * interior(s.U, s.psi_plus);
    auto integ = integrability_residual(s);
    for (int i = 0; i < opt.n_check_samples; ++i) {
        Point p = s.box.sample(rng);
        EvalCache cache;
        if (deta_res.max_abs_at(p, &cache) > opt.tol_deta)
            throw ConstructionError("d eta_N != -t^{1/2} i_U psi+");
        if (integ.at(p, &cache) > opt.tol_integrability)
            throw ConstructionError("SU(3) structure is not integrable");
    }

    std::vector<std::string> names;
    std::vector<Interval> box_iv;
    SampleBox sbox;
    sbox.margin = s.box.margin;
    for (int i = 0; i <= s.N->dim(); ++i) {
        if (i == opt.v_position) {
            names.push_back("v");
            box_iv.push_back({});
            sbox.ranges.push_back({-1.0, 1.0});
        }
        if (i < s.N->dim()) {
            names.push_back(s.N->name(i));
            box_iv.push_back(s.N->interval(i));
            sbox.ranges.push_back(s.box.ranges[i]);
        }
    }
    Chart Y = make_chart(names, box_iv, s.N->orientation());

    ScalarField t = extend_to(s.t_field, Y);
    Form sigma = extend_to(s.sigma, Y);
    Form psi_p = extend_to(s.psi_plus, Y);
    Form psi_m = extend_to(s.psi_minus, Y);
    Form eta = d_coord(Y, "v") + extend_to(eta_N, Y);

    G2Core B;
    B.Y = Y;
    B.box = sbox;
    B.phi = wedge(sigma, eta) + pow(t, 1.5) * psi_p;
    B.star_phi = pow(t, 0.5) * wedge(psi_m, eta) + (0.5 * t * t) * wedge(sigma, sigma);
    MetricTensor k = MetricTensor::zero(Y);
    for (int i = 0; i < s.N->dim(); ++i)
        for (int j = i; j < s.N->dim(); ++j) {
            int yi = Y->index_of(s.N->name(i)), yj = Y->index_of(s.N->name(j));
            auto e = extend_to(s.h.entry(i, j), Y);
            if (!e.is_zero()) k.set(yi, yj, t * e);
        }
    k.add_outer(eta, pow(t, -2.0));
    B.k = k;
    B.V = VectorField::basis(Y, Y->index_of("v"));
    return B;
}

} // namespace g2lab::quotient
