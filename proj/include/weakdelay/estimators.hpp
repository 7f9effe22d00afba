#pragma once

// Maximum-likelihood estimators of the coupling g (here the delay tau, in
// seconds) from a two-port postselected record, from the exact likelihood
// equation down to the closed-form first-order and balanced/unbalanced
// approximations.
//
// Moment convention: unbarred moments are sub-normalized, sum_j sum_bins Q_j
// = 1 with Q_j = counts_j / total over both ports.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "weakdelay/constants.hpp"
#include "weakdelay/errors.hpp"
#include "weakdelay/measurement_model.hpp"
#include "weakdelay/polarization.hpp"
#include "weakdelay/polynomial.hpp"
#include "weakdelay/spectrum.hpp"

namespace weakdelay {

enum class Method { Exact, Quartic, FirstOrder, JwmSimplified, StrubiReference, WvaFirstOrder, WvaMeanShift };

inline constexpr std::array<Method, 7> kAllMethods = {Method::Exact,           Method::Quartic,
                                                       Method::FirstOrder,      Method::JwmSimplified,
                                                       Method::StrubiReference, Method::WvaFirstOrder,
                                                       Method::WvaMeanShift};

inline constexpr std::string_view method_name(Method m) {
    switch (m) {
    case Method::Exact: return "exact";
    case Method::Quartic: return "quartic";
    case Method::FirstOrder: return "first-order";
    case Method::JwmSimplified: return "jwm";
    case Method::StrubiReference: return "strubi";
    case Method::WvaFirstOrder: return "wva";
    case Method::WvaMeanShift: return "wva-mean-shift";
    }
    return "unknown";
}

inline std::optional<Method> method_from_name(std::string_view name) {
    for (Method m : kAllMethods) {
        if (method_name(m) == name) return m;
    }
    return std::nullopt;
}

struct Diagnostics {
    std::optional<double> likelihood_residual; // score at the estimate
    std::optional<double> bracket_width_s;
    int iterations = 0;
    std::optional<std::pair<double, double>> port_probabilities;
    std::vector<std::pair<std::string, double>> moments_used;
    std::vector<std::string> warnings;
};

struct EstimationResult {
    double tau_hat_s = 0.0;
    Method method = Method::FirstOrder;
    Diagnostics diagnostics;
};

/// Sign applied to the balanced-port formula (P_f1<w>_2 - P_f2<w>_1)/dw^2.
/// Expanding the postselected distributions to first order at phi = pi/2
/// gives P_f1<w>_2 - P_f2<w>_1 = -tau Var(w), and simulator round trips
/// confirm the negative orientation.
inline constexpr double kJwmSignConstant = -1.0;

namespace detail {

struct PreparedRecord {
    std::vector<double> omega;
    std::array<std::vector<double>, 2> q;
    double omega_max = 0.0;
};

inline PreparedRecord prepare(const MeasurementRecord& record) {
    PreparedRecord p;
    p.omega = record.port1().angular_frequencies();
    const double total = record.total_events();
    for (int j = 0; j < 2; ++j) {
        const auto& w = record.port(j + 1).weights();
        p.q[j].resize(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) p.q[j][i] = w[i] / total;
    }
    p.omega_max = *std::max_element(p.omega.begin(), p.omega.end());
    return p;
}

inline const PortWeakValue& port_wv(const PortWeakValues& wv, int j) { return j == 0 ? wv.port1 : wv.port2; }

inline double log_likelihood(double g, const PreparedRecord& r, const PortWeakValues& wv) {
    double total = 0.0;
    for (int j = 0; j < 2; ++j) {
        const auto& aw = port_wv(wv, j);
        for (std::size_t i = 0; i < r.omega.size(); ++i) {
            const double q = r.q[j][i];
            if (q == 0.0) continue;
            const double z = zeta(r.omega[i], g, aw.at(i));
            if (z <= 0.0) return -std::numeric_limits<double>::infinity();
            total += q * std::log(z);
        }
    }
    return total;
}

/// d L / d g of the exact trigonometric likelihood.
inline double exact_score(double g, const PreparedRecord& r, const PortWeakValues& wv) {
    double total = 0.0;
    for (int j = 0; j < 2; ++j) {
        const auto& aw = port_wv(wv, j);
        for (std::size_t i = 0; i < r.omega.size(); ++i) {
            const double q = r.q[j][i];
            if (q == 0.0) continue;
            const Complex a = aw.at(i);
            const double x = 2.0 * g * r.omega[i];
            const double s2 = std::sin(x), c2 = std::cos(x);
            const double a2 = std::norm(a);
            const double z = 0.5 * (1.0 + c2) + 0.5 * (1.0 - c2) * a2 + s2 * a.imag();
            if (!(z > 0.0)) return std::numeric_limits<double>::quiet_NaN();
            total += q * r.omega[i] * (s2 * (a2 - 1.0) + 2.0 * c2 * a.imag()) / z;
        }
    }
    return total;
}

/// Weak-regime likelihood equation (second-order expansion of the score in
/// g*omega). Throws ModelError when a contributing denominator is <= 0.
inline double weak_regime_residual(double g, const PreparedRecord& r, const PortWeakValues& wv) {
    double total = 0.0;
    for (int j = 0; j < 2; ++j) {
        const auto& aw = port_wv(wv, j);
        for (std::size_t i = 0; i < r.omega.size(); ++i) {
            const double q = r.q[j][i];
            if (q == 0.0) continue;
            const Complex a = aw.at(i);
            const double p = r.omega[i];
            const double a2m1 = std::norm(a) - 1.0;
            const double im = a.imag();
            const double num = -2.0 * im * p * p * p * g * g + a2m1 * p * p * g + im * p;
            const double den = a2m1 * p * p * g * g + 2.0 * im * g * p + 1.0;
            if (!(den > 0.0)) throw ModelError("weak-regime likelihood denominator <= 0: outside validity region");
            total += q * num / den;
        }
    }
    return total;
}

} // namespace detail

/// g-dependent part of the log-likelihood, sum_j sum_bins Q_j log zeta_j.
/// The omitted terms Q_j log(|<f_j|i>|^2 P0) do not depend on g. Returns -inf
/// when a bin with counts has zero model probability.
inline double log_likelihood(double g, const MeasurementRecord& record, const PortWeakValues& wv) {
    wv.port1.check_bins(record.size());
    wv.port2.check_bins(record.size());
    return detail::log_likelihood(g, detail::prepare(record), wv);
}

enum class ScoreForm {
    Exact,       // derivative of the exact trigonometric log-likelihood
    WeakRegime,  // rational second-order form valid for g*omega << 1
};

inline double likelihood_equation_residual(double g, const MeasurementRecord& record, const PortWeakValues& wv,
                                           ScoreForm form = ScoreForm::WeakRegime) {
    wv.port1.check_bins(record.size());
    wv.port2.check_bins(record.size());
    const auto r = detail::prepare(record);
    if (form == ScoreForm::Exact) {
        const double s = detail::exact_score(g, r, wv);
        if (std::isnan(s)) throw ModelError("zero model probability at a bin with counts");
        return s;
    }
    return detail::weak_regime_residual(g, r, wv);
}

/// Warning text when |g| omega_max or |A_w| |g| omega_max is not small.
inline std::optional<std::string> weak_regime_warning(double g, const MeasurementRecord& record, const PortWeakValues& wv,
                                                      double threshold = 0.1) {
    const auto omega = record.port1().angular_frequencies();
    const double wmax = *std::max_element(omega.begin(), omega.end());
    double amax = 0.0;
    for (std::size_t i = 0; i < record.size(); ++i) {
        amax = std::max({amax, std::abs(wv.port1.at(i)), std::abs(wv.port2.at(i))});
    }
    const double x = std::abs(g) * wmax * std::max(1.0, amax);
    if (x > threshold) {
        return "outside weak regime: |A_w| g omega_max = " + std::to_string(x);
    }
    return std::nullopt;
}

struct SolveOptions {
    std::optional<std::pair<double, double>> bracket; // default: +-(pi/4)/omega_max
    double tol_s = 1e-30;
    ScoreForm form = ScoreForm::Exact;
    int scan_points = 2048;
    int max_expansions = 3;
};

namespace detail {

inline double residual(double g, const PreparedRecord& r, const PortWeakValues& wv, ScoreForm form) {
    if (form == ScoreForm::Exact) return exact_score(g, r, wv);
    try {
        return weak_regime_residual(g, r, wv);
    } catch (const ModelError&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

/// Coarse scan of the exact score on a uniform grid using a phase-rotation
/// recurrence. Non-finite entries mark grid points at or next to a zero of
/// the model probability.
inline std::vector<double> scan_exact_score(const PreparedRecord& r, const PortWeakValues& wv, double lo, double step,
                                            int n) {
    std::vector<double> score(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < 2; ++j) {
        const auto& aw = port_wv(wv, j);
        for (std::size_t i = 0; i < r.omega.size(); ++i) {
            const double q = r.q[j][i];
            if (q == 0.0) continue;
            const Complex a = aw.at(i);
            const double a2 = std::norm(a);
            const double w = r.omega[i];
            Complex z = std::polar(1.0, 2.0 * lo * w);
            const Complex rot = std::polar(1.0, 2.0 * step * w);
            for (int k = 0; k < n; ++k) {
                if ((k & 255) == 255) z = std::polar(1.0, 2.0 * (lo + k * step) * w);
                const double c2 = z.real(), s2 = z.imag();
                const double zeta_v = 0.5 * (1.0 + c2) + 0.5 * (1.0 - c2) * a2 + s2 * a.imag();
                double& acc = score[static_cast<std::size_t>(k)];
                if (zeta_v > 1e-300) {
                    acc += q * w * (s2 * (a2 - 1.0) + 2.0 * c2 * a.imag()) / zeta_v;
                } else {
                    acc = std::numeric_limits<double>::quiet_NaN();
                }
                z *= rot;
            }
        }
    }
    return score;
}

struct Root {
    double g;
    double width;
    double score;
    int iterations;
};

/// Bisection on [lo, hi] where residual(lo) > 0 > residual(hi).
inline Root bisect(const PreparedRecord& r, const PortWeakValues& wv, ScoreForm form, double lo, double hi, double tol) {
    double f_lo = residual(lo, r, wv, form);
    int it = 0;
    double f_mid = f_lo;
    while (true) {
        const double width = hi - lo;
        const double mid = lo + 0.5 * width;
        if (width <= tol + 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi)) ||
            mid <= lo || mid >= hi || it > 400) {
            break;
        }
        f_mid = residual(mid, r, wv, form);
        ++it;
        if (f_mid == 0.0) return {mid, 0.0, 0.0, it};
        if (std::isnan(f_mid)) break;
        if ((f_mid > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    const double g = lo + 0.5 * (hi - lo);
    return {g, hi - lo, residual(g, r, wv, form), it};
}

} // namespace detail

/// Root of the likelihood equation that maximizes the likelihood inside the
/// bracket. The bracket is scanned for +/- sign changes of the residual
/// (likelihood maxima), each is refined by bisection to tol, and the root
/// with the largest exact log-likelihood wins. Supports frequency-dependent
/// weak values.
inline EstimationResult solve_exact(const MeasurementRecord& record, const PortWeakValues& wv,
                                    const SolveOptions& opts = {}) {
    wv.port1.check_bins(record.size());
    wv.port2.check_bins(record.size());
    if (opts.scan_points < 3) throw DomainError("scan_points must be at least 3");
    const auto r = detail::prepare(record);
    auto [lo, hi] = opts.bracket.value_or(std::pair{-(kPi / 4.0) / r.omega_max, (kPi / 4.0) / r.omega_max});
    if (!(hi > lo)) throw DomainError("bracket must satisfy lo < hi");

    for (int expansion = 0; expansion <= opts.max_expansions; ++expansion) {
        const int n = opts.scan_points;
        const double step = (hi - lo) / (n - 1);
        std::vector<double> s;
        if (opts.form == ScoreForm::Exact) {
            s = detail::scan_exact_score(r, wv, lo, step, n);
        } else {
            s.resize(static_cast<std::size_t>(n));
            for (int k = 0; k < n; ++k) s[static_cast<std::size_t>(k)] = detail::residual(lo + k * step, r, wv, opts.form);
        }

        std::optional<detail::Root> best;
        double best_ll = -std::numeric_limits<double>::infinity();
        int total_iterations = 0;
        for (int k = 0; k + 1 < n; ++k) {
            const double a = s[static_cast<std::size_t>(k)];
            const double b = s[static_cast<std::size_t>(k + 1)];
            if (!(a > 0.0) || !(b <= 0.0)) continue;
            const double g_lo = lo + k * step;
            const double g_hi = lo + (k + 1) * step;
            // Recheck with direct evaluation; the recurrence is only a locator.
            const double fa = detail::residual(g_lo, r, wv, opts.form);
            const double fb = detail::residual(g_hi, r, wv, opts.form);
            if (!(fa > 0.0) || !(fb <= 0.0)) continue;
            const auto root = fb == 0.0 ? detail::Root{g_hi, 0.0, 0.0, 0} : detail::bisect(r, wv, opts.form, g_lo, g_hi, opts.tol_s);
            total_iterations += root.iterations;
            const double ll = detail::log_likelihood(root.g, r, wv);
            if (ll > best_ll || !best) {
                best = root;
                best_ll = ll;
            }
        }
        if (best) {
            EstimationResult out;
            out.tau_hat_s = best->g;
            out.method = Method::Exact;
            out.diagnostics.likelihood_residual = best->score;
            out.diagnostics.bracket_width_s = best->width;
            out.diagnostics.iterations = total_iterations;
            const auto m1 = moments(record.port1(), record.total_events());
            const auto m2 = moments(record.port2(), record.total_events());
            out.diagnostics.port_probabilities = std::pair{m1.p0(), m2.p0()};
            out.diagnostics.moments_used = {{"log_likelihood", best_ll}};
            if (auto w = weak_regime_warning(best->g, record, wv)) out.diagnostics.warnings.push_back(*w);
            return out;
        }
        if (expansion == opts.max_expansions) {
            throw BracketError("no likelihood maximum (residual sign change) inside the bracket",
                               detail::residual(lo, r, wv, opts.form), detail::residual(hi, r, wv, opts.form));
        }
        const double mid = 0.5 * (lo + hi);
        const double half = 5.0 * (hi - lo);
        lo = mid - half;
        hi = mid + half;
    }
    throw BracketError("unreachable", 0.0, 0.0);
}

struct QuarticCoefficients {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0, e = 0.0;
};

enum class DTermForm {
    Corrected,  // (|A|^2 - 1) - 2 (Im A)^2, consistent with the first-order solution
    AsPrinted,  // (|A|^2 - 1) - 2 Im A
};

/// Coefficients of A g^4 + B g^3 + C g^2 + D g + E = 0 obtained from the
/// weak-regime likelihood equation with 1/den ~ 1 - (den - 1).
inline QuarticCoefficients quartic_coefficients(const MeasurementRecord& record, const PortWeakValues& wv,
                                                DTermForm d_form = DTermForm::Corrected) {
    if (!wv.is_constant()) throw DomainError("quartic form requires frequency-independent weak values");
    const auto r = detail::prepare(record);
    QuarticCoefficients k;
    for (int j = 0; j < 2; ++j) {
        const Complex a = detail::port_wv(wv, j).constant();
        const double a2m1 = std::norm(a) - 1.0;
        const double im = a.imag();
        double s1 = 0, s2 = 0, s3 = 0, s4 = 0, s5 = 0;
        for (std::size_t i = 0; i < r.omega.size(); ++i) {
            const double q = r.q[j][i];
            if (q == 0.0) continue;
            const double p = r.omega[i];
            const double p2 = p * p;
            s1 += q * p;
            s2 += q * p2;
            s3 += q * p2 * p;
            s4 += q * p2 * p2;
            s5 += q * p2 * p2 * p;
        }
        k.a += s5 * 2.0 * a2m1 * im;
        k.b += s4 * (4.0 * im * im - a2m1 * a2m1);
        k.c += s3 * im * (1.0 - 3.0 * std::norm(a));
        k.d += s2 * (d_form == DTermForm::Corrected ? a2m1 - 2.0 * im * im : a2m1 - 2.0 * im);
        k.e += s1 * im;
    }
    if (k.a == 0.0 && k.b == 0.0 && k.c == 0.0 && k.d == 0.0 && k.e == 0.0) {
        throw DegenerateError("quartic coefficients are all zero");
    }
    return k;
}

/// Real root of the quartic nearest `hint`. The variable is rescaled by
/// omega_scale so the coefficients are O(1) before the eigenvalue solve.
inline EstimationResult solve_quartic(const QuarticCoefficients& k, double hint, double omega_scale = 0.0) {
    for (double v : {k.a, k.b, k.c, k.d, k.e}) {
        if (!std::isfinite(v)) throw DomainError("quartic coefficient is not finite");
    }
    if (omega_scale <= 0.0) {
        // Natural scale: ratio of successive coefficient magnitudes.
        omega_scale = (k.d != 0.0 && k.c != 0.0) ? std::abs(k.c / k.d) : 1.0;
        if (!(omega_scale > 0.0) || !std::isfinite(omega_scale)) omega_scale = 1.0;
    }
    const double s = omega_scale;
    const std::array<double, 5> scaled = {k.a / (s * s * s * s), k.b / (s * s * s), k.c / (s * s), k.d / s, k.e};
    std::vector<double> roots;
    if (scaled[0] == 0.0 && scaled[1] == 0.0 && scaled[2] == 0.0 && scaled[3] == 0.0) {
        throw DegenerateError("quartic degenerates to a nonzero constant");
    }
    roots = real_polynomial_roots(scaled);
    if (roots.empty()) {
        throw ModelError("quartic has no real roots (a=" + std::to_string(k.a) + ", b=" + std::to_string(k.b) +
                         ", c=" + std::to_string(k.c) + ", d=" + std::to_string(k.d) + ", e=" + std::to_string(k.e) +
                         ")");
    }
    const double hint_x = hint * s;
    double best = roots.front();
    for (double x : roots) {
        if (std::abs(x - hint_x) < std::abs(best - hint_x)) best = x;
    }
    EstimationResult out;
    out.tau_hat_s = best / s;
    out.method = Method::Quartic;
    out.diagnostics.moments_used = {{"A", k.a}, {"B", k.b}, {"C", k.c}, {"D", k.d}, {"E", k.e}};
    out.diagnostics.iterations = static_cast<int>(roots.size());
    return out;
}

/// Quartic estimate with the first-order root -E/D as the selection hint.
inline EstimationResult estimate_quartic(const MeasurementRecord& record, const PortWeakValues& wv) {
    const auto k = quartic_coefficients(record, wv);
    if (k.d == 0.0) throw DegenerateError("quartic D coefficient is zero");
    const auto pooled = pooled_statistics(record);
    auto out = solve_quartic(k, -k.e / k.d, pooled.mean);
    const auto m1 = moments(record.port1(), record.total_events());
    const auto m2 = moments(record.port2(), record.total_events());
    out.diagnostics.port_probabilities = std::pair{m1.p0(), m2.p0()};
    return out;
}

/// First-order solution -E/D for arbitrary (possibly frequency-dependent)
/// weak values: sum Q_j w Im A_j / sum Q_j w^2 [2 (Im A_j)^2 - |A_j|^2 + 1].
inline EstimationResult first_order_general(const MeasurementRecord& record, const PortWeakValues& wv) {
    wv.port1.check_bins(record.size());
    wv.port2.check_bins(record.size());
    const auto r = detail::prepare(record);
    double num = 0.0, den = 0.0;
    for (int j = 0; j < 2; ++j) {
        const auto& aw = detail::port_wv(wv, j);
        for (std::size_t i = 0; i < r.omega.size(); ++i) {
            const double q = r.q[j][i];
            if (q == 0.0) continue;
            const Complex a = aw.at(i);
            const double p = r.omega[i];
            num += q * p * a.imag();
            den += q * p * p * (2.0 * a.imag() * a.imag() - std::norm(a) + 1.0);
        }
    }
    if (den == 0.0) throw DegenerateError("first-order denominator is zero");
    EstimationResult out;
    out.tau_hat_s = num / den;
    out.method = Method::FirstOrder;
    out.diagnostics.moments_used = {{"numerator", num}, {"denominator", den}};
    return out;
}

/// First-order estimate for ideal postselection at angle phi:
/// [sin^2(phi/2)<w>_1 - cos^2(phi/2)<w>_2] / [tan(phi/2)<w^2>_1 + cot(phi/2)<w^2>_2].
inline EstimationResult first_order(const MeasurementRecord& record, double phi) {
    if (!(phi > 0.0 && phi < kPi)) throw DomainError("postselection angle phi must lie in (0, pi)");
    const auto [m1, m2] = moments(record);
    const double half = phi / 2.0;
    const double s2 = std::sin(half) * std::sin(half);
    const double c2 = std::cos(half) * std::cos(half);
    const double t = std::tan(half);
    const double num = s2 * m1.m1() - c2 * m2.m1();
    const double den = t * m1.m2() + m2.m2() / t;
    if (den == 0.0) throw DegenerateError("first-order denominator is zero (empty record)");
    EstimationResult out;
    out.tau_hat_s = num / den;
    out.method = Method::FirstOrder;
    out.diagnostics.port_probabilities = std::pair{m1.p0(), m2.p0()};
    out.diagnostics.moments_used = {{"<w>_1", m1.m1()}, {"<w>_2", m2.m1()}, {"<w^2>_1", m1.m2()}, {"<w^2>_2", m2.m2()}};
    return out;
}

namespace detail {

/// Sub-normalized first moments about a reference frequency, which keeps
/// shift-invariant differences free of cancellation against omega ~ 1e15.
inline std::pair<double, double> centered_first_moments(const MeasurementRecord& record, double reference) {
    const auto omega = record.port1().angular_frequencies();
    const double total = record.total_events();
    double c1 = 0.0, c2 = 0.0;
    for (std::size_t i = 0; i < omega.size(); ++i) {
        const double d = omega[i] - reference;
        c1 += record.port1().weights()[i] / total * d;
        c2 += record.port2().weights()[i] / total * d;
    }
    return {c1, c2};
}

} // namespace detail

/// Balanced-port estimate s (P_f1<w>_2 - P_f2<w>_1)/dw^2 that needs no
/// knowledge of phi. dw^2 defaults to the pooled variance of both ports.
inline EstimationResult jwm_simplified(const MeasurementRecord& record, std::optional<double> variance = std::nullopt) {
    const auto pooled = pooled_statistics(record);
    const double var = variance.value_or(pooled.variance);
    if (!(var > 0.0)) throw DomainError("frequency variance must be positive");
    const auto [m1, m2] = moments(record);
    const double p1 = m1.p0(), p2 = m2.p0();
    // P1<w>_2 - P2<w>_1 is invariant under w -> w - ref since P1 P2 cancels.
    const auto [c1, c2] = detail::centered_first_moments(record, pooled.mean);
    EstimationResult out;
    out.tau_hat_s = kJwmSignConstant * (p1 * c2 - p2 * c1) / var;
    out.method = Method::JwmSimplified;
    out.diagnostics.port_probabilities = std::pair{p1, p2};
    out.diagnostics.moments_used = {{"P_f1", p1}, {"P_f2", p2}, {"<w>_1", m1.m1()}, {"<w>_2", m2.m1()}, {"dw^2", var}};
    if (p1 < 0.3 || p1 > 0.7) out.diagnostics.warnings.emplace_back("record is not near-balanced (P_f1 outside [0.3, 0.7])");
    return out;
}

struct OmegaStatistics {
    double variance;  // dw^2
    double deviation; // dw
};

/// Comparison formula from the earlier joint-weak-measurement proposal:
/// tau = 1/4 [ (<w>_2 - <w>_1)/dw^2 - (P_f2 - P_f1)/dw ] with normalized
/// first moments.
inline EstimationResult strubi_reference(const MeasurementRecord& record,
                                         std::optional<OmegaStatistics> stats = std::nullopt) {
    const auto pooled = pooled_statistics(record);
    const OmegaStatistics st = stats.value_or(OmegaStatistics{pooled.variance, std::sqrt(pooled.variance)});
    if (!(st.variance > 0.0) || !(st.deviation > 0.0)) throw DomainError("frequency spread must be positive");
    const auto [m1, m2] = moments(record);
    const double p1 = m1.p0(), p2 = m2.p0();
    if (!(p1 > 0.0) || !(p2 > 0.0)) throw DegenerateError("both ports must be nonempty");
    const auto [c1, c2] = detail::centered_first_moments(record, pooled.mean);
    const double mean_shift = c2 / p2 - c1 / p1;
    EstimationResult out;
    out.tau_hat_s = 0.25 * (mean_shift / st.variance - (p2 - p1) / st.deviation);
    out.method = Method::StrubiReference;
    out.diagnostics.port_probabilities = std::pair{p1, p2};
    out.diagnostics.moments_used = {{"<w>bar_2 - <w>bar_1", mean_shift}, {"dw^2", st.variance}, {"dw", st.deviation}};
    if (p1 < 0.3 || p1 > 0.7) out.diagnostics.warnings.emplace_back("record is not near-balanced (P_f1 outside [0.3, 0.7])");
    return out;
}

/// Unbalanced-port limit of the first-order estimate,
/// (phi/2)(<w>bar_1 - <w>bar_2) / (<w^2>bar_1 + <w^2>bar_2 - 2 w0 <w>bar_2),
/// evaluated about w0 (default: <w>bar_1, port 1 carrying nearly the source).
inline EstimationResult wva_first_order(const MeasurementRecord& record, double phi,
                                        std::optional<double> omega0 = std::nullopt) {
    if (!(phi > 0.0 && phi < kPi)) throw DomainError("postselection angle phi must lie in (0, pi)");
    const auto [m1, m2] = moments(record);
    if (!(m1.p0() > 0.0) || !(m2.p0() > 0.0)) throw DegenerateError("both ports must be nonempty for normalized moments");
    const double w0 = omega0.value_or(m1.m1_bar());
    // With u = w - w0 the denominator is E1[u^2] + E2[u^2] + 2 w0 E1[u].
    const auto omega = record.port1().angular_frequencies();
    double e1u = 0, e1u2 = 0, e2u = 0, e2u2 = 0;
    for (std::size_t i = 0; i < omega.size(); ++i) {
        const double u = omega[i] - w0;
        const double q1 = record.port1().weights()[i], q2 = record.port2().weights()[i];
        e1u += q1 * u;
        e1u2 += q1 * u * u;
        e2u += q2 * u;
        e2u2 += q2 * u * u;
    }
    const double t1 = record.port1().total(), t2 = record.port2().total();
    e1u /= t1;
    e1u2 /= t1;
    e2u /= t2;
    e2u2 /= t2;
    const double den = e1u2 + e2u2 + 2.0 * w0 * e1u;
    if (den == 0.0) throw DegenerateError("WVA denominator is zero");
    EstimationResult out;
    out.tau_hat_s = 0.5 * phi * (e1u - e2u) / den;
    out.method = Method::WvaFirstOrder;
    out.diagnostics.port_probabilities = std::pair{m1.p0(), m2.p0()};
    out.diagnostics.moments_used = {{"<w>bar_1", m1.m1_bar()}, {"<w>bar_2", m2.m1_bar()}, {"w0", w0}, {"denominator", den}};
    if (phi > 0.2) out.diagnostics.warnings.emplace_back("phi > 0.2 rad: unbalanced-port approximation not applicable");
    return out;
}

/// Mean-shift relation of weak-value amplification solved for the delay:
/// tau = dw / (2 Im(A_w2) <dw^2>).
inline double wva_mean_shift(double delta_omega, double im_aw2, double variance) {
    if (im_aw2 == 0.0) throw DomainError("Im(A_w2) must be nonzero");
    if (!(variance > 0.0)) throw DomainError("frequency variance must be positive");
    return delta_omega / (2.0 * im_aw2 * variance);
}

/// Record-level wrapper: dw = w0 - <w>bar_2, Im A_w2 = -cot(phi/2), pooled
/// variance.
inline EstimationResult wva_mean_shift(const MeasurementRecord& record, double phi,
                                       std::optional<double> omega0 = std::nullopt) {
    const auto wv = ideal_weak_values(phi);
    const auto [m1, m2] = moments(record);
    if (!(m2.p0() > 0.0) || !(m1.p0() > 0.0)) throw DegenerateError("both ports must be nonempty for normalized moments");
    const double w0 = omega0.value_or(m1.m1_bar());
    const double delta = w0 - m2.m1_bar();
    const double var = pooled_statistics(record).variance;
    EstimationResult out;
    out.tau_hat_s = wva_mean_shift(delta, wv.aw2.imag(), var);
    out.method = Method::WvaMeanShift;
    out.diagnostics.port_probabilities = std::pair{m1.p0(), m2.p0()};
    out.diagnostics.moments_used = {{"delta_omega", delta}, {"Im A_w2", wv.aw2.imag()}, {"<dw^2>", var}};
    if (phi > 0.2) out.diagnostics.warnings.emplace_back("phi > 0.2 rad: unbalanced-port approximation not applicable");
    return out;
}

/// Options shared by estimate(); phi is the assumed postselection angle.
struct EstimateOptions {
    double phi = kJwmPhi;
    QwpModel qwp = QwpIdeal{};
    std::optional<double> omega0;
    SolveOptions solve;
};

inline EstimationResult estimate(Method method, const MeasurementRecord& record, const EstimateOptions& o) {
    switch (method) {
    case Method::Exact: return solve_exact(record, weak_values_on_grid(o.phi, o.qwp, record.grid_nm()), o.solve);
    case Method::Quartic: return estimate_quartic(record, weak_values_on_grid(o.phi, o.qwp, record.grid_nm()));
    case Method::FirstOrder: return first_order(record, o.phi);
    case Method::JwmSimplified: return jwm_simplified(record);
    case Method::StrubiReference: return strubi_reference(record);
    case Method::WvaFirstOrder: return wva_first_order(record, o.phi, o.omega0);
    case Method::WvaMeanShift: return wva_mean_shift(record, o.phi, o.omega0);
    }
    throw DomainError("unknown estimator");
}

/// Diagnostic scan of the maximized full log-likelihood (including the
/// phi-dependent port overlaps) over candidate postselection angles.
struct PhiScanPoint {
    double phi;
    double tau_hat_s;
    double log_likelihood;
};

inline std::vector<PhiScanPoint> phi_likelihood_scan(const MeasurementRecord& record, const std::vector<double>& phis,
                                                     const QwpModel& qwp = QwpIdeal{}) {
    std::vector<PhiScanPoint> out;
    const auto [m1, m2] = moments(record);
    for (double phi : phis) {
        const auto wv = weak_values_on_grid(phi, qwp, record.grid_nm());
        const auto fit = solve_exact(record, wv);
        const double gamma = gamma_from_phi(phi);
        double ll = log_likelihood(fit.tau_hat_s, record, wv);
        const double o1 = postselection_overlap_sq(gamma, 1), o2 = postselection_overlap_sq(gamma, 2);
        if (m1.p0() > 0.0) ll += m1.p0() * std::log(o1);
        if (m2.p0() > 0.0) ll += m2.p0() * std::log(o2);
        out.push_back({phi, fit.tau_hat_s, ll});
    }
    return out;
}

} // namespace weakdelay
