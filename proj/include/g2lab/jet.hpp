#pragma once

#include "g2lab/chart.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

namespace g2lab {

namespace detail {

inline constexpr int kN2 = 28; // packed symmetric pairs, dim <= 7
inline constexpr int kN3 = 84; // packed symmetric triples, dim <= 7

constexpr int sym2_index(int i, int j) {
    if (i > j) std::swap(i, j);
    return i * kMaxDim - i * (i - 1) / 2 + (j - i);
}

struct Sym3Table {
    std::array<std::array<std::array<std::int8_t, kMaxDim>, kMaxDim>, kMaxDim> idx{};
    constexpr Sym3Table() {
        int n = 0;
        for (int i = 0; i < kMaxDim; ++i)
            for (int j = i; j < kMaxDim; ++j)
                for (int k = j; k < kMaxDim; ++k) {
                    // store under every permutation of (i,j,k)
                    int p[3] = {i, j, k};
                    int q[6][3] = {{p[0], p[1], p[2]}, {p[0], p[2], p[1]}, {p[1], p[0], p[2]},
                                   {p[1], p[2], p[0]}, {p[2], p[0], p[1]}, {p[2], p[1], p[0]}};
                    for (auto& t : q) idx[t[0]][t[1]][t[2]] = static_cast<std::int8_t>(n);
                    ++n;
                }
    }
};

inline constexpr Sym3Table kSym3{};

constexpr int sym3_index(int i, int j, int k) { return kSym3.idx[i][j][k]; }

} // namespace detail

/// Truncated Taylor polynomial of a scalar function at a point: value plus
/// symmetric derivative tensors up to the requested order (<= 3).
/// Arithmetic on Jets implements exact product/quotient/chain rules, which is
/// how every derivative in the library is obtained.
struct Jet {
    int dim = 0;
    int order = 0;
    double v = 0.0;
    std::array<double, kMaxDim> g{};
    std::array<double, detail::kN2> h{};
    std::array<double, detail::kN3> t{};

    Jet() = default;
    Jet(int dim_, int order_) : dim(dim_), order(order_) {}

    static Jet constant(int dim, int order, double value) {
        Jet j(dim, order);
        j.v = value;
        return j;
    }

    static Jet coordinate(int dim, int order, int i, double value) {
        Jet j(dim, order);
        j.v = value;
        if (order >= 1) j.g[i] = 1.0;
        return j;
    }

    double grad(int i) const { return g[i]; }
    double hess(int i, int j) const { return h[detail::sym2_index(i, j)]; }
    double third(int i, int j, int k) const { return t[detail::sym3_index(i, j, k)]; }

    double& hess_ref(int i, int j) { return h[detail::sym2_index(i, j)]; }
    double& third_ref(int i, int j, int k) { return t[detail::sym3_index(i, j, k)]; }
};

namespace detail {

inline void check_pair(const Jet& a, const Jet& b) {
    if (a.dim != b.dim) throw ChartMismatch("jet dimension mismatch");
}

} // namespace detail

inline Jet operator-(const Jet& a) {
    Jet r = a;
    r.v = -r.v;
    for (auto& x : r.g) x = -x;
    for (auto& x : r.h) x = -x;
    for (auto& x : r.t) x = -x;
    return r;
}

inline Jet operator+(const Jet& a, const Jet& b) {
    detail::check_pair(a, b);
    Jet r = a;
    r.order = std::min(a.order, b.order);
    r.v += b.v;
    for (int i = 0; i < detail::kN2; ++i) r.h[i] += b.h[i];
    for (int i = 0; i < kMaxDim; ++i) r.g[i] += b.g[i];
    for (int i = 0; i < detail::kN3; ++i) r.t[i] += b.t[i];
    return r;
}

inline Jet operator-(const Jet& a, const Jet& b) { return a + (-b); }

inline Jet operator*(const Jet& a, double s) {
    Jet r = a;
    r.v *= s;
    for (auto& x : r.g) x *= s;
    for (auto& x : r.h) x *= s;
    for (auto& x : r.t) x *= s;
    return r;
}
inline Jet operator*(double s, const Jet& a) { return a * s; }

inline Jet operator+(const Jet& a, double s) {
    Jet r = a;
    r.v += s;
    return r;
}
inline Jet operator+(double s, const Jet& a) { return a + s; }
inline Jet operator-(const Jet& a, double s) { return a + (-s); }
inline Jet operator-(double s, const Jet& a) { return (-a) + s; }

/// Product rule through order 3.
inline Jet operator*(const Jet& a, const Jet& b) {
    detail::check_pair(a, b);
    Jet r(a.dim, std::min(a.order, b.order));
    const int d = r.dim;
    r.v = a.v * b.v;
    if (r.order >= 1)
        for (int i = 0; i < d; ++i) r.g[i] = a.g[i] * b.v + a.v * b.g[i];
    if (r.order >= 2)
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j)
                r.hess_ref(i, j) = a.hess(i, j) * b.v + a.g[i] * b.g[j] + a.g[j] * b.g[i] +
                                   a.v * b.hess(i, j);
    if (r.order >= 3)
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j)
                for (int k = j; k < d; ++k)
                    r.third_ref(i, j, k) =
                        a.third(i, j, k) * b.v + a.v * b.third(i, j, k) +
                        a.hess(i, j) * b.g[k] + a.hess(i, k) * b.g[j] + a.hess(j, k) * b.g[i] +
                        b.hess(i, j) * a.g[k] + b.hess(i, k) * a.g[j] + b.hess(j, k) * a.g[i];
    return r;
}

/// Univariate chain rule: r = f(a) given f and its derivatives at a.v.
inline Jet compose(const Jet& a, const std::array<double, 4>& f) {
    Jet r(a.dim, a.order);
    const int d = a.dim;
    r.v = f[0];
    if (r.order >= 1)
        for (int i = 0; i < d; ++i) r.g[i] = f[1] * a.g[i];
    if (r.order >= 2)
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j)
                r.hess_ref(i, j) = f[2] * a.g[i] * a.g[j] + f[1] * a.hess(i, j);
    if (r.order >= 3)
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j)
                for (int k = j; k < d; ++k)
                    r.third_ref(i, j, k) = f[3] * a.g[i] * a.g[j] * a.g[k] +
                                           f[2] * (a.hess(i, j) * a.g[k] + a.hess(i, k) * a.g[j] +
                                                   a.hess(j, k) * a.g[i]) +
                                           f[1] * a.third(i, j, k);
    return r;
}

inline Jet jet_recip(const Jet& a) {
    const double x = a.v;
    if (std::abs(x) <= 1e-12) throw DomainError("division by (near-)zero field value");
    const double ix = 1.0 / x;
    return compose(a, {ix, -ix * ix, 2.0 * ix * ix * ix, -6.0 * ix * ix * ix * ix});
}

inline Jet operator/(const Jet& a, const Jet& b) { return a * jet_recip(b); }
inline Jet operator/(const Jet& a, double s) { return a * (1.0 / s); }
inline Jet operator/(double s, const Jet& a) { return jet_recip(a) * s; }

inline Jet jet_sqrt(const Jet& a) {
    const double x = a.v;
    if (x <= 0.0) throw DomainError("sqrt of non-positive field value");
    const double s = std::sqrt(x);
    return compose(a, {s, 0.5 / s, -0.25 / (s * x), 0.375 / (s * x * x)});
}

inline Jet jet_log(const Jet& a) {
    const double x = a.v;
    if (x <= 0.0) throw DomainError("log of non-positive field value");
    const double ix = 1.0 / x;
    return compose(a, {std::log(x), ix, -ix * ix, 2.0 * ix * ix * ix});
}

inline Jet jet_exp(const Jet& a) {
    const double e = std::exp(a.v);
    return compose(a, {e, e, e, e});
}

inline Jet jet_sin(const Jet& a) {
    const double s = std::sin(a.v), c = std::cos(a.v);
    return compose(a, {s, c, -s, -c});
}

inline Jet jet_cos(const Jet& a) {
    const double s = std::sin(a.v), c = std::cos(a.v);
    return compose(a, {c, -s, -c, s});
}

/// Real power, x > 0.
inline Jet jet_pow(const Jet& a, double p) {
    const double x = a.v;
    if (x <= 0.0) throw DomainError("pow of non-positive field value");
    const double f = std::pow(x, p);
    return compose(a, {f, p * f / x, p * (p - 1.0) * f / (x * x),
                       p * (p - 1.0) * (p - 2.0) * f / (x * x * x)});
}

/// sign(x) |x|^p, smooth away from 0. Used for the odd roots that appear in
/// the metric-from-3-form normalisation, where the argument may be negative.
inline Jet jet_signed_pow(const Jet& a, double p) {
    const double x = a.v;
    if (x == 0.0) throw DomainError("signed_pow at zero");
    const double sgn = x > 0.0 ? 1.0 : -1.0;
    const double ax = std::abs(x);
    const double f = std::pow(ax, p);
    // d/dx sgn(x)|x|^p = p |x|^{p-1}
    return compose(a, {sgn * f, p * f / ax, sgn * p * (p - 1.0) * f / (ax * ax),
                       p * (p - 1.0) * (p - 2.0) * f / (ax * ax * ax)});
}

} // namespace g2lab
