#pragma once

#include "g2lab/field.hpp"

#include <vector>

namespace g2lab {

/// Classical initial values of the Airy function at 0:
/// Ai(0) = 3^{-2/3}/Gamma(2/3), Ai'(0) = -3^{-1/3}/Gamma(1/3).
inline constexpr double kAiryAi0 = 0.35502805388781723926;
inline constexpr double kAiryAiPrime0 = -0.25881940379280679840;

/// Solution of K'' = c t K from initial data (K(0), K'(0)), evaluated by its
/// Maclaurin series (entire; (m+2)(m+1) a_{m+2} = c a_{m-1}, a_2 = 0).
/// Derivatives past the second close through the ODE: K''' = c (K + t K').
/// Plugs into the field algebra as a Univariate.
class AirySolution final : public Univariate {
public:
    AirySolution(double c, double K0, double K1, double radius = 6.0) : c_(c) {
        coef_ = {K0, K1, 0.0};
        const double scale = std::max({std::abs(K0), std::abs(K1), 1.0});
        // every third coefficient is exactly zero (a_2 = 0 propagates), so the
        // tail test must look at three consecutive terms
        auto small = [&](std::size_t n) {
            return std::abs(coef_[n]) * std::pow(radius, static_cast<double>(n)) < 1e-22 * scale;
        };
        for (int m = 1; m + 2 < 240; ++m) {
            coef_.push_back(c_ * coef_[m - 1] / ((m + 2.0) * (m + 1.0)));
            std::size_t n = coef_.size() - 1;
            if (n > 12 && small(n) && small(n - 1) && small(n - 2)) break;
        }
    }

    double c() const { return c_; }

    std::array<double, 4> eval(double x) const override {
        double K = 0.0, K1 = 0.0;
        for (std::size_t n = coef_.size(); n-- > 1;) {
            K = K * x + coef_[n];
            K1 = K1 * x + coef_[n] * static_cast<double>(n);
        }
        K = K * x + coef_[0];
        double K2 = c_ * x * K;
        double K3 = c_ * (K + x * K1);
        return {K, K1, K2, K3};
    }

private:
    double c_;
    std::vector<double> coef_;
};

/// (K, K', K'') at t for the solution of K'' = c t K with the given data.
inline std::array<double, 3> airy_eval(double c, double K0, double K1, double t) {
    AirySolution sol(c, K0, K1, std::max(1.5 * std::abs(t), 6.0));
    auto v = sol.eval(t);
    return {v[0], v[1], v[2]};
}

} // namespace g2lab
