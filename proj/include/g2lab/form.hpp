#pragma once

#include "g2lab/field.hpp"
#include "g2lab/multiindex.hpp"

#include <map>
#include <string>
#include <vector>

namespace g2lab {

/// Numeric coefficients of a form at one point, keyed by increasing multi-index.
using FormValue = std::map<Mask, double>;

inline double max_abs(const FormValue& v) {
    double m = 0.0;
    for (auto& [_, x] : v) m = std::max(m, std::abs(x));
    return m;
}

inline FormValue form_value_diff(const FormValue& a, const FormValue& b) {
    FormValue d = a;
    for (auto& [m, x] : b) d[m] -= x;
    return d;
}

/// Contravariant vector field: one component field per chart coordinate.
class VectorField {
public:
    VectorField() = default;
    VectorField(Chart chart, std::vector<ScalarField> comps)
        : chart_(std::move(chart)), comps_(std::move(comps)) {
        if (static_cast<int>(comps_.size()) != chart_->dim())
            throw ConstructionError("vector field component count != chart dimension");
    }

    /// Coordinate vector field d/dx^i.
    static VectorField basis(const Chart& chart, int i) {
        std::vector<ScalarField> c(chart->dim());
        for (int j = 0; j < chart->dim(); ++j)
            c[j] = constant(chart, j == i ? 1.0 : 0.0);
        return {chart, std::move(c)};
    }

    const Chart& chart() const { return chart_; }
    const ScalarField& comp(int i) const { return comps_.at(i); }

private:
    Chart chart_;
    std::vector<ScalarField> comps_;
};

/// Degree-k antisymmetric tensor field in coordinate coframe representation.
/// Sparse: only nonzero increasing multi-indices are stored.
class Form {
public:
    Form() = default;
    Form(Chart chart, int degree) : chart_(std::move(chart)), degree_(degree) {
        if (degree_ < 0 || degree_ > chart_->dim())
            throw ConstructionError("form degree out of range");
    }

    const Chart& chart() const { return chart_; }
    int degree() const { return degree_; }
    const std::map<Mask, ScalarField>& coeffs() const { return coeffs_; }
    bool empty() const { return coeffs_.empty(); }

    void set(Mask m, ScalarField f) {
        if (mask::degree(m) != degree_) throw ConstructionError("multi-index degree mismatch");
        if (f.is_zero()) {
            coeffs_.erase(m);
            return;
        }
        require_same_chart(chart_, f.chart());
        coeffs_[m] = std::move(f);
    }

    void add(Mask m, const ScalarField& f) {
        auto it = coeffs_.find(m);
        if (it == coeffs_.end())
            set(m, f);
        else
            set(m, it->second + f);
    }

    ScalarField coeff(Mask m) const {
        auto it = coeffs_.find(m);
        return it == coeffs_.end() ? constant(chart_, 0.0) : it->second;
    }

    FormValue value_at(std::span<const double> p, EvalCache* cache = nullptr) const {
        FormValue out;
        for (auto& [m, f] : coeffs_) out[m] = f.value(p, cache);
        return out;
    }

    double max_abs_at(std::span<const double> p, EvalCache* cache = nullptr) const {
        double r = 0.0;
        for (auto& [m, f] : coeffs_) r = std::max(r, std::abs(f.value(p, cache)));
        return r;
    }

private:
    Chart chart_;
    int degree_ = 0;
    std::map<Mask, ScalarField> coeffs_;
};

// ---------------------------------------------------------------------------
// Construction helpers
// ---------------------------------------------------------------------------

inline Form zero_form(const Chart& chart, int degree) { return Form(chart, degree); }

/// Coordinate 1-form dx^i.
inline Form d_coord(const Chart& chart, int i) {
    Form f(chart, 1);
    f.set(Mask{1} << i, constant(chart, 1.0));
    return f;
}

inline Form d_coord(const Chart& chart, const std::string& name) {
    return d_coord(chart, chart->index_of(name));
}

/// Constant-coefficient form from (index sequence, value) pairs. Index
/// sequences need not be sorted; the permutation sign is absorbed.
inline Form const_form(const Chart& chart, int degree,
                       const std::vector<std::pair<std::vector<int>, double>>& terms) {
    Form f(chart, degree);
    for (auto& [idx, val] : terms) {
        Mask m = 0;
        int sign = 1;
        for (std::size_t a = 0; a < idx.size(); ++a) {
            Mask bit = Mask{1} << idx[a];
            if (m & bit) throw ConstructionError("repeated index in form term");
            m |= bit;
            for (std::size_t b = a + 1; b < idx.size(); ++b)
                if (idx[a] > idx[b]) sign = -sign;
        }
        f.add(m, constant(chart, sign * val));
    }
    return f;
}

// ---------------------------------------------------------------------------
// Algebra
// ---------------------------------------------------------------------------

inline Form operator+(const Form& a, const Form& b) {
    require_same_chart(a.chart(), b.chart());
    if (a.degree() != b.degree()) throw ConstructionError("adding forms of different degree");
    Form r = a;
    for (auto& [m, f] : b.coeffs()) r.add(m, f);
    return r;
}

inline Form operator-(const Form& a) {
    Form r(a.chart(), a.degree());
    for (auto& [m, f] : a.coeffs()) r.set(m, -f);
    return r;
}

inline Form operator-(const Form& a, const Form& b) { return a + (-b); }

inline Form operator*(const ScalarField& s, const Form& a) {
    Form r(a.chart(), a.degree());
    for (auto& [m, f] : a.coeffs()) r.set(m, s * f);
    return r;
}

inline Form operator*(double s, const Form& a) {
    Form r(a.chart(), a.degree());
    for (auto& [m, f] : a.coeffs()) r.set(m, f * s);
    return r;
}

inline Form wedge(const Form& a, const Form& b) {
    require_same_chart(a.chart(), b.chart());
    if (a.degree() + b.degree() > a.chart()->dim())
        throw ConstructionError("wedge degree exceeds chart dimension");
    Form r(a.chart(), a.degree() + b.degree());
    for (auto& [ma, fa] : a.coeffs())
        for (auto& [mb, fb] : b.coeffs()) {
            if (!mask::disjoint(ma, mb)) continue;
            int s = mask::merge_sign(ma, mb);
            r.add(ma | mb, s > 0 ? fa * fb : -(fa * fb));
        }
    return r;
}

inline Form wedge(const Form& a, const Form& b, const Form& c) { return wedge(wedge(a, b), c); }

/// Exterior derivative along a subset of coordinates (all by default).
/// Restricting to a factor's coordinates gives the fibrewise differential d_M.
/// d of a top-degree form is identically zero and is returned as an empty
/// top-degree form.
inline Form exterior_d(const Form& a, Mask along = ~Mask{0}) {
    const int dim = a.chart()->dim();
    if (a.degree() == dim) return Form(a.chart(), dim);
    Form r(a.chart(), a.degree() + 1);
    for (auto& [m, f] : a.coeffs()) {
        if (f.constant_value()) continue;
        for (int i = 0; i < dim; ++i) {
            if (!(along & (Mask{1} << i))) continue;
            if (m & (Mask{1} << i)) continue;
            int s = mask::insert_sign(i, m);
            ScalarField df = partial(f, i);
            r.add(m | (Mask{1} << i), s > 0 ? df : -df);
        }
    }
    return r;
}

inline Form interior(const VectorField& v, const Form& a) {
    require_same_chart(v.chart(), a.chart());
    if (a.degree() == 0) throw ConstructionError("interior product with a 0-form");
    Form r(a.chart(), a.degree() - 1);
    for (auto& [m, f] : a.coeffs()) {
        for (int i : mask::indices(m)) {
            int s = (mask::rank_in(i, m) % 2) ? -1 : +1;
            ScalarField term = v.comp(i) * f;
            r.add(m & ~(Mask{1} << i), s > 0 ? term : -term);
        }
    }
    return r;
}

inline Form d_of_function(const ScalarField& f) {
    Form g(f.chart(), 1);
    for (int i = 0; i < f.chart()->dim(); ++i) g.add(Mask{1} << i, partial(f, i));
    return g;
}

/// Cartan formula L_v = d(i_v .) + i_v(d .); never computed by flowing.
inline Form lie_derivative(const VectorField& v, const Form& a) {
    if (a.degree() == 0) throw ConstructionError("use fields directly for functions");
    Form r = a.degree() < a.chart()->dim() ? interior(v, exterior_d(a)) : Form(a.chart(), a.degree());
    return r + exterior_d(interior(v, a));
}

// ---------------------------------------------------------------------------
// Chart transport
// ---------------------------------------------------------------------------

inline Form extend_to(const Form& a, const Chart& big) {
    if (a.chart()->same_names(*big)) return a;
    auto inj = detail::name_injection(a.chart(), big);
    Form r(big, a.degree());
    for (auto& [m, f] : a.coeffs()) {
        Mask big_m = 0;
        for (int i : mask::indices(m)) big_m |= Mask{1} << inj[i];
        // name_injection preserves relative order only if names appear in the
        // same relative order in both charts; track the permutation sign.
        auto idx = mask::indices(m);
        int sign = 1;
        for (std::size_t x = 0; x < idx.size(); ++x)
            for (std::size_t y = x + 1; y < idx.size(); ++y)
                if (inj[idx[x]] > inj[idx[y]]) sign = -sign;
        ScalarField ef = extend_to(f, big);
        r.add(big_m, sign > 0 ? ef : -ef);
    }
    return r;
}

/// Restrict a form to a sub-chart: components along dropped coordinates are
/// discarded (caller asserts basicness separately), remaining coefficients are
/// sliced with the given fills.
inline Form slice_to(const Form& a, const Chart& sub,
                     const std::vector<std::pair<std::string, double>>& fills) {
    if (a.chart()->same_names(*sub)) return a;
    auto inj = detail::name_injection(sub, a.chart()); // sub index -> big index
    std::vector<int> big_to_sub(a.chart()->dim(), -1);
    for (int i = 0; i < sub->dim(); ++i) big_to_sub[inj[i]] = i;
    Form r(sub, a.degree());
    for (auto& [m, f] : a.coeffs()) {
        Mask sm = 0;
        bool keep = true;
        auto idx = mask::indices(m);
        for (int i : idx) {
            if (big_to_sub[i] < 0) {
                keep = false;
                break;
            }
            sm |= Mask{1} << big_to_sub[i];
        }
        if (!keep) continue;
        int sign = 1;
        for (std::size_t x = 0; x < idx.size(); ++x)
            for (std::size_t y = x + 1; y < idx.size(); ++y)
                if (big_to_sub[idx[x]] > big_to_sub[idx[y]]) sign = -sign;
        ScalarField sf = slice_to(f, sub, fills);
        r.add(sm, sign > 0 ? sf : -sf);
    }
    return r;
}

/// Coefficient-wise partial derivative (e.g. the t-derivative of a family of
/// forms on a product chart).
inline Form partial_form(const Form& a, int i) {
    Form r(a.chart(), a.degree());
    for (auto& [m, f] : a.coeffs()) r.add(m, partial(f, i));
    return r;
}

inline Form partial_form(const Form& a, const std::string& name) {
    return partial_form(a, a.chart()->index_of(name));
}

// ---------------------------------------------------------------------------
// Almost complex structures
// ---------------------------------------------------------------------------

/// Endomorphism field J with J^2 = -Id; stored as columns J(d/dx^j) = J^i_j d/dx^i.
class AlmostComplexStructure {
public:
    AlmostComplexStructure() = default;
    AlmostComplexStructure(Chart chart, std::vector<std::vector<ScalarField>> mat)
        : chart_(std::move(chart)), mat_(std::move(mat)) {}

    const Chart& chart() const { return chart_; }
    const ScalarField& entry(int i, int j) const { return mat_.at(i).at(j); }

    VectorField apply(const VectorField& v) const {
        const int d = chart_->dim();
        std::vector<ScalarField> out(d, constant(chart_, 0.0));
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) out[i] = out[i] + mat_[i][j] * v.comp(j);
        return {chart_, std::move(out)};
    }

    /// Action on 1-forms: (J gamma)(X) = -gamma(J X).
    Form apply(const Form& gamma) const {
        if (gamma.degree() != 1) throw ConstructionError("J acts on 1-forms here");
        const int d = chart_->dim();
        Form r(chart_, 1);
        for (int i = 0; i < d; ++i) {
            ScalarField c = constant(chart_, 0.0);
            for (auto& [m, g] : gamma.coeffs()) {
                int mi = std::countr_zero(m);
                c = c - g * mat_[mi][i];
            }
            r.add(Mask{1} << i, c);
        }
        return r;
    }

    /// J^2 + Id residual, max over entries at a point.
    double involution_residual(std::span<const double> p, EvalCache* cache = nullptr) const {
        const int d = chart_->dim();
        std::vector<std::vector<double>> J(d, std::vector<double>(d));
        EvalCache local;
        EvalCache* c = cache ? cache : &local;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) J[i][j] = mat_[i][j].value(p, c);
        double r = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double s = (i == j) ? 1.0 : 0.0; // (J^2 + Id)_{ij}
                for (int k = 0; k < d; ++k) s += J[i][k] * J[k][j];
                r = std::max(r, std::abs(s));
            }
        return r;
    }

    /// Nijenhuis tensor N^k_{ij} at a point; zero iff integrable.
    double nijenhuis_max(std::span<const double> p, EvalCache* cache = nullptr) const {
        const int d = chart_->dim();
        EvalCache local;
        EvalCache* c = cache ? cache : &local;
        // J and dJ from order-1 jets
        std::vector<std::vector<Jet>> J(d, std::vector<Jet>(d));
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) J[i][j] = mat_[i][j].eval(p, 1, c);
        double r = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j)
                for (int k = 0; k < d; ++k) {
                    double n = 0.0;
                    for (int m = 0; m < d; ++m) {
                        n += J[m][i].v * J[k][j].g[m] - J[m][j].v * J[k][i].g[m];
                        n -= J[k][m].v * (J[m][j].g[i] - J[m][i].g[j]);
                    }
                    r = std::max(r, std::abs(n));
                }
        return r;
    }

private:
    Chart chart_;
    std::vector<std::vector<ScalarField>> mat_;
};

/// Twisted differential d^c f = J df, i.e. (d^c f)(X) = -df(J X).
inline Form d_c(const ScalarField& f, const AlmostComplexStructure& J) {
    require_same_chart(f.chart(), J.chart());
    return J.apply(d_of_function(f));
}

} // namespace g2lab
