#pragma once

#include "g2lab/metric.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace g2lab {

/// Pointwise curvature of a metric: Christoffel symbols, Riemann tensor in
/// the convention R^i_{jkl} = d_k G^i_{lj} - d_l G^i_{kj} + G G - G G (round
/// spheres get positive scalar curvature), Ricci R_{jl} = R^i_{jil}.
struct CurvatureData {
    int dim = 0;
    // gamma[i][j][k] = Gamma^i_{jk}
    std::vector<std::vector<std::vector<double>>> gamma;
    // riem[i][j][k][l] = R^i_{jkl}
    std::vector<std::vector<std::vector<std::vector<double>>>> riem;
    Eigen::MatrixXd ricci;
    double scalar = 0.0;
    Eigen::MatrixXd g;      // metric value
    Eigen::MatrixXd g_inv;

    double lowered(int i, int j, int k, int l) const {
        double s = 0.0;
        for (int m = 0; m < dim; ++m) s += g(i, m) * riem[m][j][k][l];
        return s;
    }
};

namespace detail {

struct MetricJets {
    int d = 0;
    Eigen::MatrixXd g;
    // dg[k](i,j) = d_k g_ij ; ddg[k][l](i,j) = d_k d_l g_ij
    std::vector<Eigen::MatrixXd> dg;
    std::vector<std::vector<Eigen::MatrixXd>> ddg;
};

inline MetricJets metric_jets(const MetricTensor& g, std::span<const double> p, int order,
                              EvalCache* cache) {
    EvalCache local;
    EvalCache* c = cache ? cache : &local;
    MetricJets mj;
    const int d = g.dim();
    mj.d = d;
    mj.g.resize(d, d);
    if (order >= 1) mj.dg.assign(d, Eigen::MatrixXd::Zero(d, d));
    if (order >= 2) mj.ddg.assign(d, std::vector<Eigen::MatrixXd>(d, Eigen::MatrixXd::Zero(d, d)));
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            Jet jij = g.entry(i, j).eval(p, order, c);
            mj.g(i, j) = mj.g(j, i) = jij.v;
            if (order >= 1)
                for (int k = 0; k < d; ++k) mj.dg[k](i, j) = mj.dg[k](j, i) = jij.g[k];
            if (order >= 2)
                for (int k = 0; k < d; ++k)
                    for (int l = k; l < d; ++l) {
                        double v = jij.hess(k, l);
                        mj.ddg[k][l](i, j) = mj.ddg[k][l](j, i) = v;
                        mj.ddg[l][k](i, j) = mj.ddg[l][k](j, i) = v;
                    }
        }
    return mj;
}

} // namespace detail

/// Gamma^i_{jk} = 1/2 g^{il} (d_j g_{lk} + d_k g_{lj} - d_l g_{jk}).
inline std::vector<std::vector<std::vector<double>>>
christoffel(const MetricTensor& g, std::span<const double> p, EvalCache* cache = nullptr) {
    auto mj = detail::metric_jets(g, p, 1, cache);
    const int d = mj.d;
    Eigen::MatrixXd ginv = mj.g.inverse();
    std::vector gamma(d, std::vector(d, std::vector<double>(d, 0.0)));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = j; k < d; ++k) {
                double s = 0.0;
                for (int l = 0; l < d; ++l)
                    s += ginv(i, l) * (mj.dg[j](l, k) + mj.dg[k](l, j) - mj.dg[l](j, k));
                gamma[i][j][k] = gamma[i][k][j] = 0.5 * s;
            }
    return gamma;
}

inline CurvatureData curvature_at(const MetricTensor& g, std::span<const double> p,
                                  EvalCache* cache = nullptr) {
    auto mj = detail::metric_jets(g, p, 2, cache);
    const int d = mj.d;
    CurvatureData out;
    out.dim = d;
    out.g = mj.g;
    out.g_inv = mj.g.inverse();
    const Eigen::MatrixXd& ginv = out.g_inv;

    // d ginv = -ginv dg ginv
    std::vector<Eigen::MatrixXd> dginv(d);
    for (int k = 0; k < d; ++k) dginv[k] = -ginv * mj.dg[k] * ginv;

    out.gamma.assign(d, std::vector(d, std::vector<double>(d, 0.0)));
    // dgamma[m][i][j][k] = d_m Gamma^i_{jk}
    std::vector dgamma(d, std::vector(d, std::vector(d, std::vector<double>(d, 0.0))));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = j; k < d; ++k) {
                double s = 0.0;
                for (int l = 0; l < d; ++l)
                    s += ginv(i, l) * (mj.dg[j](l, k) + mj.dg[k](l, j) - mj.dg[l](j, k));
                out.gamma[i][j][k] = out.gamma[i][k][j] = 0.5 * s;
                for (int m = 0; m < d; ++m) {
                    double t = 0.0;
                    for (int l = 0; l < d; ++l) {
                        t += dginv[m](i, l) * (mj.dg[j](l, k) + mj.dg[k](l, j) - mj.dg[l](j, k));
                        t += ginv(i, l) *
                             (mj.ddg[m][j](l, k) + mj.ddg[m][k](l, j) - mj.ddg[m][l](j, k));
                    }
                    dgamma[m][i][j][k] = dgamma[m][i][k][j] = 0.5 * t;
                }
            }

    out.riem.assign(d, std::vector(d, std::vector(d, std::vector<double>(d, 0.0))));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    double r = dgamma[k][i][l][j] - dgamma[l][i][k][j];
                    for (int m = 0; m < d; ++m)
                        r += out.gamma[i][k][m] * out.gamma[m][l][j] -
                             out.gamma[i][l][m] * out.gamma[m][k][j];
                    out.riem[i][j][k][l] = r;
                }

    out.ricci = Eigen::MatrixXd::Zero(d, d);
    for (int j = 0; j < d; ++j)
        for (int l = 0; l < d; ++l) {
            double s = 0.0;
            for (int i = 0; i < d; ++i) s += out.riem[i][j][i][l];
            out.ricci(j, l) = s;
        }
    out.scalar = (ginv * out.ricci).trace();
    return out;
}

inline Eigen::MatrixXd ricci_at(const MetricTensor& g, std::span<const double> p,
                                EvalCache* cache = nullptr) {
    return curvature_at(g, p, cache).ricci;
}

/// Covariant-derivative residual of the metric, max |nabla_k g_ij|; a
/// consistency check on the Christoffel symbols.
inline double metric_compat_residual(const MetricTensor& g, std::span<const double> p,
                                     EvalCache* cache = nullptr) {
    auto mj = detail::metric_jets(g, p, 1, cache);
    auto gamma = christoffel(g, p, cache);
    const int d = mj.d;
    double r = 0.0;
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double s = mj.dg[k](i, j);
                for (int m = 0; m < d; ++m)
                    s -= gamma[m][k][i] * mj.g(m, j) + gamma[m][k][j] * mj.g(i, m);
                r = std::max(r, std::abs(s));
            }
    return r;
}

/// First Bianchi identity residual max |R^i_{[jkl]}|.
inline double bianchi_residual(const CurvatureData& c) {
    double r = 0.0;
    for (int i = 0; i < c.dim; ++i)
        for (int j = 0; j < c.dim; ++j)
            for (int k = 0; k < c.dim; ++k)
                for (int l = 0; l < c.dim; ++l)
                    r = std::max(r, std::abs(c.riem[i][j][k][l] + c.riem[i][k][l][j] +
                                             c.riem[i][l][j][k]));
    return r;
}

/// Pair-symmetry residual max |R_{ijkl} - R_{klij}| of the lowered tensor.
inline double pair_symmetry_residual(const CurvatureData& c) {
    double r = 0.0;
    for (int i = 0; i < c.dim; ++i)
        for (int j = 0; j < c.dim; ++j)
            for (int k = 0; k < c.dim; ++k)
                for (int l = 0; l < c.dim; ++l)
                    r = std::max(r, std::abs(c.lowered(i, j, k, l) - c.lowered(k, l, i, j)));
    return r;
}

inline int numeric_rank(const Eigen::MatrixXd& m, double rel_threshold) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > rel_threshold * sv(0)) ++rank;
    return rank;
}

/// Holonomy rank probes: rank_A of the dim x (dim * pairs) matrix R^i_{j[kl]}
/// with rows labelled by i, and rank_B of the pairs x pairs matrix
/// R^{[ij]}_{[kl]}. For a metric with holonomy exactly G2 these are (7, 14).
inline std::pair<int, int> curvature_ranks(const MetricTensor& g, std::span<const double> p,
                                           double svd_threshold = 1e-8,
                                           EvalCache* cache = nullptr) {
    auto c = curvature_at(g, p, cache);
    const int d = c.dim;
    const int pairs = d * (d - 1) / 2;
    std::vector<std::pair<int, int>> plist;
    for (int k = 0; k < d; ++k)
        for (int l = k + 1; l < d; ++l) plist.emplace_back(k, l);

    Eigen::MatrixXd A(d, d * pairs);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int q = 0; q < pairs; ++q)
                A(i, j * pairs + q) = c.riem[i][j][plist[q].first][plist[q].second];

    // R^{ij}_{kl} = g^{jm} R^i_{mkl}
    Eigen::MatrixXd B(pairs, pairs);
    for (int a = 0; a < pairs; ++a)
        for (int q = 0; q < pairs; ++q) {
            auto [i, j] = plist[a];
            auto [k, l] = plist[q];
            double s = 0.0;
            for (int m = 0; m < d; ++m) s += c.g_inv(j, m) * c.riem[i][m][k][l];
            B(a, q) = s;
        }
    return {numeric_rank(A, svd_threshold), numeric_rank(B, svd_threshold)};
}

/// The metric determined by an admissible 3-form on a 7-chart:
/// B_ij vol_coord = (i_i phi) ^ (i_j phi) ^ phi, then
/// g = 6^{-2/9} (det B)^{-1/9} B, the constants fixed so the standard flat
/// 3-form maps to the identity metric. Works for either orientation class
/// since the odd root preserves sign.
inline MetricTensor metric_from_phi(const Form& phi) {
    const Chart& chart = phi.chart();
    const int d = chart->dim();
    if (d != 7 || phi.degree() != 3) throw ConstructionError("metric_from_phi needs a 3-form on a 7-chart");
    std::vector<Form> iphi;
    iphi.reserve(d);
    for (int i = 0; i < d; ++i) iphi.push_back(interior(VectorField::basis(chart, i), phi));
    std::vector<std::vector<ScalarField>> B(d, std::vector<ScalarField>(d, constant(chart, 0.0)));
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            Form top = wedge(wedge(iphi[i], iphi[j]), phi);
            B[i][j] = B[j][i] = top.coeff(mask::full(d));
        }
    for (int i = 0; i < d; ++i)
        if (B[i][i].is_zero())
            throw ConstructionError("non-admissible 3-form: degenerate bilinear form");
    auto bgroup = std::make_shared<detail::InverseMatrixGroup>(chart, B);
    ScalarField detB = group_element(bgroup, d * d);
    ScalarField scale = std::pow(6.0, -2.0 / 9.0) * signed_pow(detB, -1.0 / 9.0);
    std::vector<std::vector<ScalarField>> g(d, std::vector<ScalarField>(d));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g[i][j] = scale * B[i][j];
    return {chart, std::move(g)};
}

} // namespace g2lab
