#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "weakdelay/errors.hpp"

namespace weakdelay {

/// Evaluate sum coeffs[k] x^(n-k) (highest power first) and its derivative.
inline std::pair<double, double> evaluate_polynomial(std::span<const double> coeffs, double x) {
    double p = 0.0, dp = 0.0;
    for (double c : coeffs) {
        dp = dp * x + p;
        p = p * x + c;
    }
    return {p, dp};
}

/// Real roots of a polynomial given highest power first. Leading
/// coefficients that are negligible against the largest one are dropped, so
/// a quartic with a = b = c = 0 degrades to a linear solve. Roots come from
/// the eigenvalues of the companion matrix and are polished by Newton steps.
inline std::vector<double> real_polynomial_roots(std::span<const double> coeffs_in, double imag_tol = 1e-8) {
    std::vector<double> coeffs(coeffs_in.begin(), coeffs_in.end());
    double scale = 0.0;
    for (double c : coeffs) {
        if (!std::isfinite(c)) throw DomainError("polynomial coefficient is not finite");
        scale = std::max(scale, std::abs(c));
    }
    if (scale == 0.0) throw DegenerateError("all polynomial coefficients are zero");
    for (double& c : coeffs) c /= scale;

    std::size_t lead = 0;
    while (lead < coeffs.size() && std::abs(coeffs[lead]) <= 1e-14) ++lead;
    coeffs.erase(coeffs.begin(), coeffs.begin() + static_cast<std::ptrdiff_t>(lead));
    const std::size_t degree = coeffs.size() - 1;
    if (degree == 0) return {};
    if (degree == 1) return {-coeffs[1] / coeffs[0]};

    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(degree), static_cast<Eigen::Index>(degree));
    for (std::size_t k = 0; k < degree; ++k) {
        companion(0, static_cast<Eigen::Index>(k)) = -coeffs[k + 1] / coeffs[0];
    }
    for (std::size_t k = 1; k < degree; ++k) {
        companion(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k - 1)) = 1.0;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    if (solver.info() != Eigen::Success) throw ModelError("companion-matrix eigenvalue solve failed");

    std::vector<double> roots;
    for (const std::complex<double>& z : solver.eigenvalues()) {
        if (std::abs(z.imag()) > imag_tol * (1.0 + std::abs(z))) continue;
        double x = z.real();
        for (int it = 0; it < 4; ++it) {
            const auto [p, dp] = evaluate_polynomial(coeffs, x);
            if (dp == 0.0) break;
            const double next = x - p / dp;
            if (!std::isfinite(next)) break;
            if (std::abs(next - x) > 1e-6 * (1.0 + std::abs(x))) break; // not converging locally
            x = next;
        }
        roots.push_back(x);
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

} // namespace weakdelay
