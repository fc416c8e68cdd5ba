#pragma once

#include "g2lab/form.hpp"

#include <Eigen/Dense>

namespace g2lab {

namespace detail {

/// Determinant of a small jet-valued matrix, division-free: cofactor
/// expansion with memoisation over column subsets. Safe on singular minors,
/// where elimination-based pivots would degenerate.
inline Jet jet_det(const std::vector<std::vector<Jet>>& A) {
    const int n = static_cast<int>(A.size());
    if (n == 0) throw ConstructionError("jet_det of empty matrix");
    const int dim = A[0][0].dim, order = A[0][0].order;
    // D[S] = det of the submatrix on rows (n-|S| .. n-1) and column set S
    std::vector<Jet> D(std::size_t{1} << n);
    D[0] = Jet::constant(dim, order, 1.0);
    for (Mask S = 1; S < (Mask{1} << n); ++S) {
        const int row = n - std::popcount(S);
        Jet acc(dim, order);
        int j = 0;
        for (Mask rest = S; rest; rest &= rest - 1, ++j) {
            int c = std::countr_zero(rest);
            Jet term = A[row][c] * D[S & ~(Mask{1} << c)];
            acc = (j % 2 == 0) ? acc + term : acc - term;
        }
        D[S] = acc;
    }
    return D[(Mask{1} << n) - 1];
}

/// Gauss-Jordan inverse + determinant for jet matrices.
inline void jet_invert(std::vector<std::vector<Jet>> A, std::vector<std::vector<Jet>>& inv,
                       Jet& det) {
    const int n = static_cast<int>(A.size());
    const int dim = A[0][0].dim, order = A[0][0].order;
    inv.assign(n, std::vector<Jet>(n, Jet::constant(dim, order, 0.0)));
    for (int i = 0; i < n; ++i) inv[i][i] = Jet::constant(dim, order, 1.0);
    det = Jet::constant(dim, order, 1.0);
    int sign = 1;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(A[r][c].v) > std::abs(A[piv][c].v)) piv = r;
        if (A[piv][c].v == 0.0) throw SingularMetric("singular matrix in jet inversion");
        if (piv != c) {
            std::swap(A[piv], A[c]);
            std::swap(inv[piv], inv[c]);
            sign = -sign;
        }
        det = det * A[c][c];
        Jet ip = jet_recip(A[c][c]);
        for (int cc = 0; cc < n; ++cc) {
            A[c][cc] = A[c][cc] * ip;
            inv[c][cc] = inv[c][cc] * ip;
        }
        for (int r = 0; r < n; ++r) {
            if (r == c || A[r][c].v == 0.0) continue;
            Jet f = A[r][c];
            for (int cc = 0; cc < n; ++cc) {
                A[r][cc] = A[r][cc] - f * A[c][cc];
                inv[r][cc] = inv[r][cc] - f * inv[c][cc];
            }
        }
    }
    if (sign < 0) det = -det;
}

/// Inverse entries and determinant of a symmetric field matrix, computed in
/// one pass and cached per point. Layout: n*n inverse entries, then det.
class InverseMatrixGroup final : public GroupNode {
public:
    InverseMatrixGroup(Chart chart, std::vector<std::vector<ScalarField>> m)
        : GroupNode(std::move(chart)), m_(std::move(m)) {}

    int n() const { return static_cast<int>(m_.size()); }

protected:
    void compute(std::span<const double> p, int order, EvalCache& cache,
                 std::vector<Jet>& out) const override {
        const int nn = n();
        std::vector<std::vector<Jet>> A(nn, std::vector<Jet>(nn));
        for (int i = 0; i < nn; ++i)
            for (int j = 0; j < nn; ++j) A[i][j] = m_[i][j].node()->eval(p, order, cache);
        std::vector<std::vector<Jet>> inv;
        Jet det;
        jet_invert(std::move(A), inv, det);
        out.reserve(nn * nn + 1);
        for (int i = 0; i < nn; ++i)
            for (int j = 0; j < nn; ++j) out.push_back(inv[i][j]);
        out.push_back(det);
    }

private:
    std::vector<std::vector<ScalarField>> m_;
};

} // namespace detail

/// Symmetric metric tensor field. Positive definiteness is a sampled check,
/// not a construction invariant, so degenerate inputs surface as errors at
/// evaluation points.
class MetricTensor {
public:
    MetricTensor() = default;
    MetricTensor(Chart chart, std::vector<std::vector<ScalarField>> g)
        : chart_(std::move(chart)), g_(std::move(g)) {
        const int d = chart_->dim();
        if (static_cast<int>(g_.size()) != d) throw ConstructionError("metric size mismatch");
        for (auto& row : g_)
            if (static_cast<int>(row.size()) != d) throw ConstructionError("metric row mismatch");
        inv_group_ = std::make_shared<detail::InverseMatrixGroup>(chart_, g_);
    }

    static MetricTensor zero(const Chart& chart) {
        const int d = chart->dim();
        std::vector<std::vector<ScalarField>> g(d, std::vector<ScalarField>(d, constant(chart, 0.0)));
        return {chart, std::move(g)};
    }

    static MetricTensor identity(const Chart& chart) {
        auto m = zero(chart);
        for (int i = 0; i < chart->dim(); ++i) m.g_[i][i] = constant(chart, 1.0);
        m.inv_group_ = std::make_shared<detail::InverseMatrixGroup>(chart, m.g_);
        return m;
    }

    const Chart& chart() const { return chart_; }
    int dim() const { return chart_->dim(); }
    const ScalarField& entry(int i, int j) const { return g_.at(i).at(j); }

    void set(int i, int j, const ScalarField& f) {
        g_[i][j] = f;
        g_[j][i] = f;
        inv_group_ = std::make_shared<detail::InverseMatrixGroup>(chart_, g_);
    }

    /// Symmetric rank-one update g += c * a (x) a for a 1-form a.
    void add_outer(const Form& a, const ScalarField& c) {
        const int d = dim();
        std::vector<ScalarField> comp(d, constant(chart_, 0.0));
        for (auto& [m, f] : a.coeffs()) comp[std::countr_zero(m)] = f;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) g_[i][j] = g_[i][j] + c * comp[i] * comp[j];
        inv_group_ = std::make_shared<detail::InverseMatrixGroup>(chart_, g_);
    }

    ScalarField inv_field(int i, int j) const { return group_element(inv_group_, i * dim() + j); }
    ScalarField det_field() const { return group_element(inv_group_, dim() * dim()); }
    ScalarField sqrt_det_field() const { return sqrt(det_field()); }

    GroupPtr inverse_group() const { return inv_group_; }

    Eigen::MatrixXd value_at(std::span<const double> p, EvalCache* cache = nullptr) const {
        EvalCache local;
        EvalCache* c = cache ? cache : &local;
        Eigen::MatrixXd m(dim(), dim());
        for (int i = 0; i < dim(); ++i)
            for (int j = 0; j < dim(); ++j) m(i, j) = g_[i][j].value(p, c);
        return m;
    }

    double min_eigenvalue_at(std::span<const double> p, EvalCache* cache = nullptr) const {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(value_at(p, cache));
        return es.eigenvalues().minCoeff();
    }

    void require_spd(std::span<const double> p, double min_eig = 1e-10) const {
        if (min_eigenvalue_at(p) <= min_eig)
            throw SingularMetric("metric not positive definite at a sampled point");
    }

    MetricTensor scaled(const ScalarField& c) const {
        auto g = g_;
        for (auto& row : g)
            for (auto& e : row) e = c * e;
        return {chart_, std::move(g)};
    }

private:
    Chart chart_;
    std::vector<std::vector<ScalarField>> g_;
    GroupPtr inv_group_;
};

namespace detail {

/// All Hodge-dual coefficients of a form in one cached batch.
class HodgeGroup final : public GroupNode {
public:
    HodgeGroup(Form a, MetricTensor g, int orientation)
        : GroupNode(a.chart()), a_(std::move(a)), g_(std::move(g)), orient_(orientation) {
        out_masks_ = mask::all_of_degree(chart()->dim(), chart()->dim() - a_.degree());
    }

    const std::vector<Mask>& out_masks() const { return out_masks_; }

protected:
    void compute(std::span<const double> p, int order, EvalCache& cache,
                 std::vector<Jet>& out) const override {
        const int d = chart()->dim();
        const int k = a_.degree();
        auto invdata = g_.inverse_group()->eval(p, order, cache);
        auto ginv = [&](int i, int j) -> const Jet& { return (*invdata)[i * d + j]; };
        const Jet& det = (*invdata)[d * d];
        if (det.v <= 0.0) throw SingularMetric("non-positive metric determinant in Hodge star");
        Jet sqrt_det = jet_sqrt(det);

        std::vector<std::pair<Mask, Jet>> avals;
        avals.reserve(a_.coeffs().size());
        for (auto& [m, f] : a_.coeffs()) avals.emplace_back(m, f.node()->eval(p, order, cache));

        out.assign(out_masks_.size(), Jet::constant(d == 0 ? 1 : d, order, 0.0));
        auto in_masks = mask::all_of_degree(d, k);
        for (Mask I : in_masks) {
            // raised coefficient a^I = sum_L det(ginv[I, L]) a_L
            Jet aI = Jet::constant(d, order, 0.0);
            auto Ii = mask::indices(I);
            for (auto& [L, aL] : avals) {
                auto Li = mask::indices(L);
                Jet minor = k == 0 ? Jet::constant(d, order, 1.0) : Jet();
                if (k > 0) {
                    std::vector<std::vector<Jet>> M(k, std::vector<Jet>(k));
                    for (int r = 0; r < k; ++r)
                        for (int c = 0; c < k; ++c) M[r][c] = ginv(Ii[r], Li[c]);
                    minor = jet_det(std::move(M));
                }
                aI = aI + minor * aL;
            }
            if (aI.v == 0.0) {
                bool all_zero = true;
                for (int i = 0; i < d && all_zero; ++i)
                    if (aI.g[i] != 0.0) all_zero = false;
                if (all_zero && order == 0) continue;
            }
            Mask J = mask::full(d) & ~I;
            int sign = orient_ * mask::merge_sign(I, J);
            Jet term = sqrt_det * aI;
            int slot = static_cast<int>(std::lower_bound(out_masks_.begin(), out_masks_.end(), J) -
                                        out_masks_.begin());
            out[slot] = out[slot] + (sign > 0 ? term : -term);
        }
    }

private:
    Form a_;
    MetricTensor g_;
    int orient_;
    std::vector<Mask> out_masks_;
};

/// Pointwise pairing <a, b>_g on k-forms, one cached scalar.
class FormInnerGroup final : public GroupNode {
public:
    FormInnerGroup(Form a, Form b, MetricTensor g)
        : GroupNode(a.chart()), a_(std::move(a)), b_(std::move(b)), g_(std::move(g)) {}

protected:
    void compute(std::span<const double> p, int order, EvalCache& cache,
                 std::vector<Jet>& out) const override {
        const int d = chart()->dim();
        const int k = a_.degree();
        auto invdata = g_.inverse_group()->eval(p, order, cache);
        auto ginv = [&](int i, int j) -> const Jet& { return (*invdata)[i * d + j]; };
        Jet total = Jet::constant(d, order, 0.0);
        for (auto& [I, fa] : a_.coeffs()) {
            Jet ja = fa.node()->eval(p, order, cache);
            auto Ii = mask::indices(I);
            for (auto& [L, fb] : b_.coeffs()) {
                Jet jb = fb.node()->eval(p, order, cache);
                auto Li = mask::indices(L);
                Jet minor = k == 0 ? Jet::constant(d, order, 1.0) : Jet();
                if (k > 0) {
                    std::vector<std::vector<Jet>> M(k, std::vector<Jet>(k));
                    for (int r = 0; r < k; ++r)
                        for (int c = 0; c < k; ++c) M[r][c] = ginv(Ii[r], Li[c]);
                    minor = jet_det(std::move(M));
                }
                total = total + minor * (ja * jb);
            }
        }
        out.push_back(total);
    }

private:
    Form a_, b_;
    MetricTensor g_;
};

} // namespace detail

/// Hodge star computed through the metric inverse and Levi-Civita symbol with
/// sqrt(det g), pointwise. Orientation defaults to the chart's.
inline Form hodge_star(const Form& a, const MetricTensor& g, int orientation = 0) {
    require_same_chart(a.chart(), g.chart());
    if (orientation == 0) orientation = a.chart()->orientation();
    auto group = std::make_shared<detail::HodgeGroup>(a, g, orientation);
    Form r(a.chart(), a.chart()->dim() - a.degree());
    const auto& masks = group->out_masks();
    for (std::size_t s = 0; s < masks.size(); ++s)
        r.add(masks[s], group_element(group, static_cast<int>(s)));
    return r;
}

/// Metric-induced squared norm ||a||_g^2 as a field.
inline ScalarField form_norm_sq(const Form& a, const MetricTensor& g) {
    require_same_chart(a.chart(), g.chart());
    auto group = std::make_shared<detail::FormInnerGroup>(a, a, g);
    return group_element(group, 0);
}

inline ScalarField form_inner(const Form& a, const Form& b, const MetricTensor& g) {
    require_same_chart(a.chart(), g.chart());
    if (a.degree() != b.degree()) throw ConstructionError("inner product of unequal degrees");
    auto group = std::make_shared<detail::FormInnerGroup>(a, b, g);
    return group_element(group, 0);
}

/// Riemannian volume form sqrt(det g) e^{1...n} times the chart orientation.
inline Form volume_form(const MetricTensor& g, int orientation = 0) {
    if (orientation == 0) orientation = g.chart()->orientation();
    Form r(g.chart(), g.chart()->dim());
    r.add(mask::full(g.chart()->dim()),
          orientation > 0 ? g.sqrt_det_field() : -g.sqrt_det_field());
    return r;
}

/// Metric dual of a vector field: (flat v)_i = g_{ij} v^j.
inline Form musical_flat(const VectorField& v, const MetricTensor& g) {
    Form r(g.chart(), 1);
    for (int i = 0; i < g.dim(); ++i) {
        ScalarField c = constant(g.chart(), 0.0);
        for (int j = 0; j < g.dim(); ++j) c = c + g.entry(i, j) * v.comp(j);
        r.add(Mask{1} << i, c);
    }
    return r;
}

/// Metric dual of a 1-form: (sharp a)^i = g^{ij} a_j.
inline VectorField musical_sharp(const Form& a, const MetricTensor& g) {
    if (a.degree() != 1) throw ConstructionError("sharp of non-1-form");
    const int d = g.dim();
    std::vector<ScalarField> comps(d, constant(g.chart(), 0.0));
    for (auto& [m, f] : a.coeffs()) {
        int j = std::countr_zero(m);
        for (int i = 0; i < d; ++i) comps[i] = comps[i] + g.inv_field(i, j) * f;
    }
    return {g.chart(), std::move(comps)};
}

/// Endomorphism J with h(J ., .) = sigma(., .), as an almost complex structure.
/// From h(J d_j, d_k) = sigma_{jk}: J^i_j = h^{ik} sigma_{jk}.
inline AlmostComplexStructure acs_from_pair(const MetricTensor& h, const Form& sigma) {
    require_same_chart(h.chart(), sigma.chart());
    if (sigma.degree() != 2) throw ConstructionError("sigma must be a 2-form");
    const int d = h.dim();
    std::vector<std::vector<ScalarField>> sig(d, std::vector<ScalarField>(d, constant(h.chart(), 0.0)));
    for (auto& [m, f] : sigma.coeffs()) {
        auto idx = mask::indices(m);
        sig[idx[0]][idx[1]] = f;
        sig[idx[1]][idx[0]] = -f;
    }
    std::vector<std::vector<ScalarField>> J(d, std::vector<ScalarField>(d, constant(h.chart(), 0.0)));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            ScalarField c = constant(h.chart(), 0.0);
            for (int k = 0; k < d; ++k) c = c + h.inv_field(i, k) * sig[j][k];
            J[i][j] = c;
        }
    return {h.chart(), std::move(J)};
}

} // namespace g2lab
