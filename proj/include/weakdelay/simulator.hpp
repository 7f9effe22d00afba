#pragma once

// Synthetic two-port spectrometer records, theta sweeps through the pivoted
// waveplate, Monte Carlo SNR and the closed-form WVA uncertainty relations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "weakdelay/constants.hpp"
#include "weakdelay/errors.hpp"
#include "weakdelay/estimators.hpp"
#include "weakdelay/measurement_model.hpp"
#include "weakdelay/polarization.hpp"
#include "weakdelay/spectrum.hpp"
#include "weakdelay/waveplate.hpp"

namespace weakdelay {

enum class NoiseModel { Multinomial, Poisson };

struct ExperimentConfig {
    SourceParameters source;
    double phi_actual = kJwmPhi;
    double phi_assumed = kJwmPhi;
    QwpModel qwp = QwpIdeal{};
    std::uint64_t photons = 0; // 0: noise-free expected weights
    std::uint64_t seed = 0;
    double tau_s = 0.0;
    NoiseModel noise = NoiseModel::Multinomial;

    void validate() const {
        if (!(phi_actual > 0.0 && phi_actual < kPi)) throw DomainError("phi_actual must lie in (0, pi)");
        if (!(phi_assumed > 0.0 && phi_assumed < kPi)) throw DomainError("phi_assumed must lie in (0, pi)");
        if (!(source.step_nm > 0.0)) throw DomainError("grid step must be positive");
        if (!std::isfinite(tau_s)) throw DomainError("tau must be finite");
        if (const auto* d = std::get_if<QwpDispersive>(&qwp); d && !(d->tau0_s > 0.0)) {
            throw DomainError("dispersive plate tau0 must be positive");
        }
    }
};

inline std::string qwp_name(const QwpModel& qwp) {
    if (std::holds_alternative<QwpIdeal>(qwp)) return "ideal";
    if (std::holds_alternative<QwpDispersive>(qwp)) return "dispersive";
    return "absent";
}

/// Independent generator for trial `trial` of a run seeded with `seed`.
inline std::mt19937_64 trial_engine(std::uint64_t seed, std::uint64_t trial) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return std::mt19937_64(mix(seed ^ mix(trial)));
}

/// Expected (bin x port) probabilities for the configuration; sums to 1.
inline std::pair<Spectrum, Spectrum> expected_record(const ExperimentConfig& c) {
    c.validate();
    return postselected_pair(make_source_spectrum(c.source), c.tau_s, c.phi_actual, c.qwp);
}

/// One synthetic record. Counts are drawn multinomially over all (bin, port)
/// cells for a fixed total, or independently Poisson per cell.
inline MeasurementRecord simulate(const ExperimentConfig& c, std::uint64_t trial = 0) {
    auto [e1, e2] = expected_record(c);
    const double total_p = e1.total() + e2.total();
    if (!(total_p > 0.0)) throw ModelError("all postselection probabilities underflowed to zero");
    RecordMetadata meta{c.phi_actual, c.seed, qwp_name(c.qwp)};
    if (c.photons == 0) return {std::move(e1), std::move(e2), 0.0, meta};

    auto rng = trial_engine(c.seed, trial);
    const std::size_t n = e1.size();
    std::vector<double> k1(n, 0.0), k2(n, 0.0);
    if (c.noise == NoiseModel::Poisson) {
        const double photons = static_cast<double>(c.photons);
        auto draw = [&](double p) {
            const double mean = photons * p / total_p;
            if (!(mean > 0.0)) return 0.0;
            return static_cast<double>(std::poisson_distribution<long long>(mean)(rng));
        };
        for (std::size_t i = 0; i < n; ++i) {
            k1[i] = draw(e1.weights()[i]);
            k2[i] = draw(e2.weights()[i]);
        }
    } else {
        // Sequential conditional binomials.
        auto remaining = static_cast<long long>(c.photons);
        double mass_left = total_p;
        auto draw = [&](double p) {
            if (remaining == 0 || !(p > 0.0)) {
                mass_left -= p;
                return 0.0;
            }
            const double frac = std::clamp(p / mass_left, 0.0, 1.0);
            const long long k = frac >= 1.0 ? remaining : std::binomial_distribution<long long>(remaining, frac)(rng);
            remaining -= k;
            mass_left -= p;
            return static_cast<double>(k);
        };
        for (std::size_t i = 0; i < n; ++i) k1[i] = draw(e1.weights()[i]);
        for (std::size_t i = 0; i + 1 < n; ++i) k2[i] = draw(e2.weights()[i]);
        k2[n - 1] = static_cast<double>(remaining);
    }
    const auto& grid = e1.grid_nm();
    return {Spectrum(grid, std::move(k1)), Spectrum(grid, std::move(k2)), 0.0, meta};
}

struct SweepRow {
    double theta_rad;
    double tau_theory_s;
    double tau_exact_s;
    double tau_first_order_s;
    std::optional<double> tau_jwm_s;
};

/// Whether phi belongs to the near-balanced (JWM) family rather than the
/// near-orthogonal (WVA) one.
inline bool is_balanced_postselection(double phi) { return std::abs(phi - kPi / 2.0) < kPi / 4.0; }

/// Simulate and estimate at each tilt. Estimators use the ideal weak values
/// at phi_assumed whatever plate the simulation used, so plate dispersion
/// shows up as bias. Row k uses trial index k of the seed.
inline std::vector<SweepRow> sweep_theta(const std::vector<double>& thetas, const PlateStack& stack,
                                         const ExperimentConfig& config, int pivot_sign = +1) {
    if (thetas.empty()) throw DomainError("theta list is empty");
    const double lambda_m = config.source.center_nm * 1e-9;
    const bool balanced = is_balanced_postselection(config.phi_assumed);
    const auto wv = PortWeakValues(ideal_weak_values(config.phi_assumed));
    std::vector<SweepRow> rows;
    rows.reserve(thetas.size());
    for (std::size_t k = 0; k < thetas.size(); ++k) {
        ExperimentConfig c = config;
        c.tau_s = pivot_delay(thetas[k], stack, lambda_m, pivot_sign);
        const auto record = simulate(c, k);
        SweepRow row{thetas[k], c.tau_s, solve_exact(record, wv).tau_hat_s,
                     first_order(record, config.phi_assumed).tau_hat_s, std::nullopt};
        if (balanced) row.tau_jwm_s = jwm_simplified(record).tau_hat_s;
        rows.push_back(row);
    }
    return rows;
}

struct SnrPoint {
    double alpha;
    double snr_db; // +inf when every trial is exact
    int trials;
    double phi_assumed;
};

inline constexpr int kMinSnrTrials = 30;

/// SNR_dB = 10 log10(tau^2 / MSE) of first_order over seeded trials, with
/// tau = alpha / omega0 and omega0 at the source centre. The same trial
/// records are reused for every assumed phi.
inline std::vector<SnrPoint> snr_sweep(const std::vector<double>& alphas, double phi_actual,
                                       const std::vector<double>& phi_assumed_list, int trials,
                                       const ExperimentConfig& config) {
    if (trials < kMinSnrTrials) throw DomainError("snr_sweep needs at least 30 trials per point");
    if (phi_assumed_list.empty()) throw DomainError("phi_assumed list is empty");
    const double omega0 = wavelength_to_angular_frequency(config.source.center_nm);
    std::vector<SnrPoint> out;
    for (std::size_t a = 0; a < alphas.size(); ++a) {
        if (!(alphas[a] != 0.0)) throw DomainError("alpha = 0 has no defined SNR");
        ExperimentConfig c = config;
        c.phi_actual = phi_actual;
        c.tau_s = alphas[a] / omega0;
        std::vector<double> sq(phi_assumed_list.size(), 0.0);
        for (int t = 0; t < trials; ++t) {
            const auto record = simulate(c, (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(t));
            for (std::size_t p = 0; p < phi_assumed_list.size(); ++p) {
                const double err = first_order(record, phi_assumed_list[p]).tau_hat_s - c.tau_s;
                sq[p] += err * err;
            }
        }
        for (std::size_t p = 0; p < phi_assumed_list.size(); ++p) {
            const double mse = sq[p] / trials;
            const double snr = mse == 0.0 ? std::numeric_limits<double>::infinity()
                                          : 10.0 * std::log10(c.tau_s * c.tau_s / mse);
            out.push_back({alphas[a], snr, trials, phi_assumed_list[p]});
        }
    }
    return out;
}

/// C = lambda0 d(dl) / (4 dl^2): spectrometer resolution against line width.
inline double resolution_factor(double lambda0_nm, double delta_lambda_nm, double resolution_nm) {
    if (!(lambda0_nm > 0.0) || !(delta_lambda_nm > 0.0) || !(resolution_nm > 0.0)) {
        throw DomainError("wavelengths, line width and resolution must be positive");
    }
    return lambda0_nm * resolution_nm / (4.0 * delta_lambda_nm * delta_lambda_nm);
}

/// Uncertainty of alpha for postselection offset beta:
/// C (alpha^2 + beta^2)^2 / (alpha beta^2).
inline double wva_uncertainty(double alpha, double beta, double lambda0_nm, double delta_lambda_nm,
                              double resolution_nm) {
    if (alpha == 0.0 || beta == 0.0) throw DomainError("uncertainty is singular at alpha = 0 or beta = 0; use alpha_min");
    const double c = resolution_factor(lambda0_nm, delta_lambda_nm, resolution_nm);
    const double s = alpha * alpha + beta * beta;
    return c * s * s / (std::abs(alpha) * beta * beta);
}

/// Smallest alpha resolvable when the offset meant to be zero is epsilon:
/// the fixed point alpha = d(alpha) at beta = epsilon.
inline double alpha_min(double epsilon, double lambda0_nm = kDefaultCenterNm, double delta_lambda_nm = kDefaultFwhmNm,
                        double resolution_nm = kDefaultGridStepNm) {
    if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
    const double c = resolution_factor(lambda0_nm, delta_lambda_nm, resolution_nm);
    if (!(c < 0.25)) throw DomainError("resolution factor must be below 1/4 for a minimum detectable alpha");
    return std::sqrt((std::sqrt(1.0 - 4.0 * c) - 2.0 * c + 1.0) / (2.0 * c)) * epsilon;
}

} // namespace weakdelay
