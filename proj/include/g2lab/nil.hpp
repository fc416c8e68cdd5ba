#pragma once

#include "g2lab/chart.hpp"
#include "g2lab/multiindex.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace g2lab::nil {

/// Invariant form on a 6-dimensional Lie algebra: constant real coefficients
/// over increasing multi-indices of the coframe e^1..e^6 (indices 0..5 here).
struct InvariantForm {
    int degree = 0;
    std::map<Mask, double> c;

    InvariantForm() = default;
    explicit InvariantForm(int deg) : degree(deg) {}

    static InvariantForm basis(const std::vector<int>& idx, double value = 1.0) {
        InvariantForm f(static_cast<int>(idx.size()));
        Mask m = 0;
        int sign = 1;
        for (std::size_t a = 0; a < idx.size(); ++a) {
            if (m & (Mask{1} << idx[a])) throw ConstructionError("repeated coframe index");
            m |= Mask{1} << idx[a];
            for (std::size_t b = a + 1; b < idx.size(); ++b)
                if (idx[a] > idx[b]) sign = -sign;
        }
        f.c[m] = sign * value;
        return f;
    }

    void add(Mask m, double v) {
        if (v == 0.0) return;
        auto it = c.find(m);
        if (it == c.end()) {
            c[m] = v;
        } else {
            it->second += v;
            if (it->second == 0.0) c.erase(it);
        }
    }

    double get(Mask m) const {
        auto it = c.find(m);
        return it == c.end() ? 0.0 : it->second;
    }

    double max_abs() const {
        double r = 0.0;
        for (auto& [_, v] : c) r = std::max(r, std::abs(v));
        return r;
    }

    bool is_zero() const { return c.empty(); }
};

inline InvariantForm operator+(const InvariantForm& a, const InvariantForm& b) {
    if (a.degree != b.degree) throw ConstructionError("invariant form degree mismatch");
    InvariantForm r = a;
    for (auto& [m, v] : b.c) r.add(m, v);
    return r;
}

inline InvariantForm operator*(double s, const InvariantForm& a) {
    InvariantForm r(a.degree);
    for (auto& [m, v] : a.c)
        if (s * v != 0.0) r.c[m] = s * v;
    return r;
}

inline InvariantForm operator-(const InvariantForm& a) { return -1.0 * a; }
inline InvariantForm operator-(const InvariantForm& a, const InvariantForm& b) {
    return a + (-1.0 * b);
}

inline InvariantForm wedge(const InvariantForm& a, const InvariantForm& b) {
    InvariantForm r(a.degree + b.degree);
    for (auto& [ma, va] : a.c)
        for (auto& [mb, vb] : b.c) {
            if (!mask::disjoint(ma, mb)) continue;
            r.add(ma | mb, mask::merge_sign(ma, mb) * va * vb);
        }
    return r;
}

/// Six-dimensional nilpotent Lie algebra, described through the
/// Chevalley-Eilenberg differential on generators: d e^i given as invariant
/// 2-forms (the convention that reproduces de^5 = e^13 + e^42 literally).
class NilLieAlgebra {
public:
    NilLieAlgebra(std::string name, std::array<InvariantForm, 6> d_gen)
        : name_(std::move(name)), d_gen_(std::move(d_gen)) {
        for (auto& f : d_gen_)
            if (f.degree != 2 && !f.is_zero()) throw ConstructionError("d of a generator must be a 2-form");
        // Jacobi identity == d o d = 0 on generators
        for (int i = 0; i < 6; ++i)
            if (d(d_gen_[i]).max_abs() != 0.0)
                throw ConstructionError("structure constants violate the Jacobi identity");
        if (!nilpotent()) throw ConstructionError("algebra is not nilpotent");
    }

    const std::string& name() const { return name_; }
    const InvariantForm& d_generator(int i) const { return d_gen_.at(i); }

    /// Structure constants: [e_i, e_j] = sum_k c^k_{ij} e_k with
    /// c^k_{ij} = -de^k(e_i, e_j).
    double structure_constant(int k, int i, int j) const {
        if (i == j) return 0.0;
        Mask m = (Mask{1} << i) | (Mask{1} << j);
        double v = d_gen_[k].get(m);
        return i < j ? -v : v;
    }

    /// Chevalley-Eilenberg differential extended by the Leibniz rule.
    InvariantForm d(const InvariantForm& a) const {
        InvariantForm r(a.degree + 1);
        for (auto& [m, v] : a.c) {
            auto idx = mask::indices(m);
            for (std::size_t p = 0; p < idx.size(); ++p) {
                Mask rest = m & ~(Mask{1} << idx[p]);
                InvariantForm restf(static_cast<int>(idx.size()) - 1);
                restf.c[rest] = 1.0;
                double sgn = (p % 2 == 0) ? 1.0 : -1.0;
                // e^I = (-1)^p e^{ip} ^ e^{I \ ip}; rank within the increasing
                // list is p itself.
                InvariantForm term = wedge(d_gen_[idx[p]], restf);
                for (auto& [tm, tv] : term.c) r.add(tm, sgn * v * tv);
            }
        }
        return r;
    }

    /// Indices of closed generators (ker d on 1-forms).
    std::vector<int> kernel_indices() const {
        std::vector<int> out;
        for (int i = 0; i < 6; ++i)
            if (d_gen_[i].is_zero()) out.push_back(i);
        return out;
    }

    /// Algebraic Nijenhuis tensor of a constant endomorphism, exact:
    /// N(e_i,e_j) = [Je_i,Je_j] - J[Je_i,e_j] - J[e_i,Je_j] + J^2 [e_i,e_j].
    double nijenhuis_max(const Eigen::MatrixXd& J) const {
        double r = 0.0;
        auto bracket = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
            Eigen::VectorXd out = Eigen::VectorXd::Zero(6);
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 6; ++j) {
                    if (x(i) == 0.0 || y(j) == 0.0) continue;
                    for (int k = 0; k < 6; ++k)
                        out(k) += structure_constant(k, i, j) * x(i) * y(j);
                }
            return out;
        };
        for (int i = 0; i < 6; ++i)
            for (int j = i + 1; j < 6; ++j) {
                Eigen::VectorXd ei = Eigen::VectorXd::Zero(6), ej = Eigen::VectorXd::Zero(6);
                ei(i) = 1;
                ej(j) = 1;
                Eigen::VectorXd n = bracket(J * ei, J * ej) - J * bracket(J * ei, ej) -
                                    J * bracket(ei, J * ej) + J * (J * bracket(ei, ej));
                r = std::max(r, n.cwiseAbs().maxCoeff());
            }
        return r;
    }

private:
    bool nilpotent() const {
        // lower central series on the span of generators
        Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(6, 6);
        for (int depth = 0; depth < 8; ++depth) {
            std::vector<Eigen::VectorXd> next;
            for (int i = 0; i < 6; ++i)
                for (int col = 0; col < basis.cols(); ++col) {
                    Eigen::VectorXd v = Eigen::VectorXd::Zero(6);
                    for (int k = 0; k < 6; ++k)
                        for (int j = 0; j < 6; ++j)
                            v(k) += structure_constant(k, i, j) * basis(j, col);
                    if (v.cwiseAbs().maxCoeff() > 1e-12) next.push_back(v);
                }
            if (next.empty()) return true;
            Eigen::MatrixXd m(6, static_cast<int>(next.size()));
            for (std::size_t c = 0; c < next.size(); ++c) m.col(static_cast<int>(c)) = next[c];
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
            qr.setThreshold(1e-10);
            int rank = static_cast<int>(qr.rank());
            Eigen::MatrixXd q = qr.householderQ();
            basis = q.leftCols(rank);
        }
        return false;
    }

    std::string name_;
    std::array<InvariantForm, 6> d_gen_;
};

/// The paper's T^4 cases plus the Iwasawa convention of Example 2.
inline NilLieAlgebra builtin_algebra(const std::string& name) {
    auto zero2 = InvariantForm(2);
    auto e = [](int i, int j) { return InvariantForm::basis({i - 1, j - 1}); };
    if (name == "abelian")
        return {"abelian", {zero2, zero2, zero2, zero2, zero2, zero2}};
    if (name == "iwasawa")
        // de5 = e13 + e42, de6 = e14 + e23
        return {"iwasawa",
                {zero2, zero2, zero2, zero2, e(1, 3) + e(4, 2), e(1, 4) + e(2, 3)}};
    if (name == "case2a")
        // d xi = e24, d eta = e14 + e23
        return {"case2a", {zero2, zero2, zero2, zero2, e(2, 4), e(1, 4) + e(2, 3)}};
    if (name == "case2b")
        return {"case2b", {zero2, zero2, zero2, zero2, e(2, 4), e(1, 4)}};
    if (name == "case3")
        // d xi~ = e14, d eta~ = e23
        return {"case3", {zero2, zero2, zero2, zero2, e(1, 4), e(2, 3)}};
    throw ConstructionError("unknown algebra: " + name);
}

inline std::vector<std::string> builtin_algebra_names() {
    return {"iwasawa", "case2a", "case2b", "case3", "abelian"};
}

// ---------------------------------------------------------------------------
// Stable 3-forms
// ---------------------------------------------------------------------------

/// K^j_i defined by (i_{e_i} phi) ^ phi = K^j_i (i_{e_j} vol) in Lambda^5,
/// vol = e^123456. Then lambda = tr(K^2)/6; lambda < 0 iff the stabiliser is
/// SL(3,C) and J = K / sqrt(-lambda) is the induced almost complex structure.
inline Eigen::MatrixXd stable_k_matrix(const InvariantForm& phi, int orientation = +1) {
    if (phi.degree != 3) throw ConstructionError("stable invariant needs a 3-form");
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(6, 6);
    for (int i = 0; i < 6; ++i) {
        // i_{e_i} phi
        InvariantForm iphi(2);
        for (auto& [m, v] : phi.c) {
            if (!(m & (Mask{1} << i))) continue;
            double sgn = (mask::rank_in(i, m) % 2) ? -1.0 : 1.0;
            iphi.add(m & ~(Mask{1} << i), sgn * v);
        }
        InvariantForm top = wedge(iphi, phi); // 5-form
        for (auto& [m, v] : top.c) {
            // m misses exactly one index j; i_{e_j} vol = (-1)^j e^{full\j}
            int j = std::countr_zero(~m & mask::full(6));
            double sgn = (j % 2) ? -1.0 : 1.0;
            K(j, i) += orientation * v / sgn;
        }
    }
    return K;
}

inline double stable_invariant(const InvariantForm& phi) {
    Eigen::MatrixXd K = stable_k_matrix(phi);
    return (K * K).trace() / 6.0;
}

/// Almost complex structure of a stable 3-form with lambda < 0, and the
/// companion phi^- making phi + i phi^- of type (3,0):
/// phi^-(X,Y,Z) = -phi(JX,Y,Z).
struct StableACS {
    Eigen::MatrixXd J;
    InvariantForm phi_minus;
    double lambda;
};

inline StableACS acs_from_stable(const InvariantForm& phi, int orientation = +1) {
    Eigen::MatrixXd K = stable_k_matrix(phi, orientation);
    double lambda = (K * K).trace() / 6.0;
    if (lambda >= 0.0)
        throw ConstructionError("stable invariant is non-negative: no SL(3,C) structure");
    Eigen::MatrixXd J = K / std::sqrt(-lambda);
    InvariantForm pm(3);
    // one-slot action (equal on all slots for forms of type (3,0)+(0,3)),
    // antisymmetrised for numerical hygiene
    auto dense = [&](int a, int b, int c) {
        std::array<int, 3> idx{a, b, c};
        int sign = 1;
        for (int x = 0; x < 3; ++x)
            for (int y = x + 1; y < 3; ++y) {
                if (idx[x] == idx[y]) return std::pair<Mask, int>{0, 0};
                if (idx[x] > idx[y]) {
                    std::swap(idx[x], idx[y]);
                    sign = -sign;
                }
            }
        Mask m = (Mask{1} << idx[0]) | (Mask{1} << idx[1]) | (Mask{1} << idx[2]);
        return std::pair<Mask, int>{m, sign};
    };
    for (int a = 0; a < 6; ++a)
        for (int b = a + 1; b < 6; ++b)
            for (int c = b + 1; c < 6; ++c) {
                double v = 0.0;
                for (int m = 0; m < 6; ++m) {
                    if (J(m, a) != 0.0) {
                        auto [mk, sg] = dense(m, b, c);
                        if (sg) v += J(m, a) * sg * phi.get(mk);
                    }
                }
                Mask m3 = (Mask{1} << a) | (Mask{1} << b) | (Mask{1} << c);
                pm.add(m3, -v);
            }
    return {J, pm, lambda};
}

// ---------------------------------------------------------------------------
// Half-flat checks and the Example 2 families
// ---------------------------------------------------------------------------

struct HalfFlatResult {
    double d_phi_plus;
    double d_rho_sq;
    bool half_flat;
};

/// dphi+ = 0 and d(rho^rho) = 0, evaluated exactly on constant forms.
inline HalfFlatResult half_flat_check(const NilLieAlgebra& alg, const InvariantForm& rho,
                                      const InvariantForm& phi_plus, double tol = 0.0) {
    double a = alg.d(phi_plus).max_abs();
    double b = alg.d(wedge(rho, rho)).max_abs();
    return {a, b, a <= tol && b <= tol};
}

/// One branch of the quartic families on the Iwasawa algebra:
/// rho   = rho_base * z^{1/2} (e12+e34) + rho_fib * z^{-1/2} e56
/// phi+  = phi0+ + t d(e56)
/// phi-  = phi0- + phi_minus_sign * t (e5^de5 + e6^de6).
struct Example2Branch {
    double Hc;
    int rho_base_sign;
    int rho_fib_sign;
    int phi_minus_sign;
    InvariantForm phi0_plus;
    InvariantForm phi0_minus;
};

inline Example2Branch example2_branch(double Hc) {
    auto e = [](std::vector<int> idx) {
        for (auto& i : idx) --i;
        return InvariantForm::basis(idx);
    };
    auto alg = builtin_algebra("iwasawa");
    InvariantForm e5 = e({5}), e6 = e({6});
    InvariantForm de5 = alg.d_generator(4), de6 = alg.d_generator(5);
    if (Hc == 2.0) {
        // phi+ + i phi- = i ((e5+ie6) + t (e5-ie6)) ^ d(e5+ie6), plus sign in phi-
        InvariantForm p0 = -(wedge(e5, de6) + wedge(e6, de5));
        InvariantForm m0 = wedge(e5, de5) - wedge(e6, de6);
        return {2.0, +1, +1, +1, p0, m0};
    }
    if (Hc == -2.0) {
        InvariantForm p0 = -(wedge(e5, de6) + wedge(e6, de5));
        InvariantForm m0 = wedge(e5, de5) - wedge(e6, de6);
        return {-2.0, +1, +1, -1, p0, m0};
    }
    if (Hc == 0.0) {
        return {0.0, -1, +1, -1, InvariantForm(3), InvariantForm(3)};
    }
    throw ConstructionError("example2_branch supports Hc in {2, 0, -2}");
}

inline InvariantForm example2_rho(const Example2Branch& br, double z) {
    if (z <= 0.0) throw DomainError("degenerate z <= 0 in the quartic family");
    auto e = [](std::vector<int> idx) {
        for (auto& i : idx) --i;
        return InvariantForm::basis(idx);
    };
    InvariantForm base = e({1, 2}) + e({3, 4});
    return br.rho_base_sign * std::sqrt(z) * base +
           br.rho_fib_sign / std::sqrt(z) * e({5, 6});
}

inline InvariantForm example2_phi_plus(const NilLieAlgebra& alg, const Example2Branch& br,
                                       double t) {
    auto e56 = InvariantForm::basis({4, 5});
    return br.phi0_plus + t * alg.d(e56);
}

inline InvariantForm example2_phi_minus(const NilLieAlgebra& alg, const Example2Branch& br,
                                        double t) {
    auto e5 = InvariantForm::basis({4}), e6 = InvariantForm::basis({5});
    InvariantForm tpart = wedge(e5, alg.d_generator(4)) + wedge(e6, alg.d_generator(5));
    return br.phi0_minus + (br.phi_minus_sign * t) * tpart;
}

/// J(ker d) = ker d for the structure of a closed stable 3-form: the rows of
/// J belonging to closed generators must vanish on the non-closed columns.
inline bool lemma_kerd_check(const NilLieAlgebra& alg, const InvariantForm& phi_plus,
                             double tol = 1e-10) {
    double scale = std::max(phi_plus.max_abs(), 1.0);
    if (alg.d(phi_plus).max_abs() > 1e-9 * scale)
        throw ConstructionError("lemma_kerd_check requires a closed 3-form");
    auto acs = acs_from_stable(phi_plus);
    auto ker = alg.kernel_indices();
    std::vector<bool> in_ker(6, false);
    for (int i : ker) in_ker[i] = true;
    double jscale = acs.J.cwiseAbs().maxCoeff();
    for (int a : ker)
        for (int j = 0; j < 6; ++j)
            if (!in_ker[j] && std::abs(acs.J(a, j)) > tol * jscale) return false;
    return true;
}

} // namespace g2lab::nil
