#pragma once

// Forward model of the postselected pointer distributions:
//   P_j(omega) = |<f_j|i>|^2 P0(omega) zeta_j(omega, g)
//   zeta(omega, g, A) = cos^2(g w) + sin^2(g w)|A|^2 + sin(2 g w) Im A
// evaluated in exact trigonometric form.

#include <array>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "weakdelay/constants.hpp"
#include "weakdelay/errors.hpp"
#include "weakdelay/polarization.hpp"
#include "weakdelay/spectrum.hpp"

namespace weakdelay {

/// Weak value of one port, either constant or tabulated per spectral bin.
class PortWeakValue {
public:
    PortWeakValue(Complex constant) : values_{constant} {} // NOLINT: implicit by intent
    explicit PortWeakValue(std::vector<Complex> per_bin) : values_(std::move(per_bin)) {
        if (values_.empty()) throw DomainError("weak-value table is empty");
    }

    bool is_constant() const noexcept { return values_.size() == 1; }
    std::size_t size() const noexcept { return values_.size(); }

    Complex at(std::size_t bin) const noexcept { return is_constant() ? values_[0] : values_[bin]; }

    Complex constant() const {
        if (!is_constant()) throw DomainError("weak value is frequency dependent");
        return values_[0];
    }

    void check_bins(std::size_t bins) const {
        if (!is_constant() && values_.size() != bins) {
            throw DomainError("weak-value table length does not match the record grid");
        }
    }

private:
    std::vector<Complex> values_;
};

/// Weak values for ports 1 and 2.
struct PortWeakValues {
    PortWeakValue port1;
    PortWeakValue port2;

    PortWeakValues(PortWeakValue p1, PortWeakValue p2) : port1(std::move(p1)), port2(std::move(p2)) {}
    PortWeakValues(const WeakValuePair& pair) : port1(pair.aw1), port2(pair.aw2) {} // NOLINT

    const PortWeakValue& port(int j) const { return j == 1 ? port1 : port2; }
    bool is_constant() const noexcept { return port1.is_constant() && port2.is_constant(); }
    PortWeakValues swapped() const { return {port2, port1}; }
};

/// Weak values of the plate+PBS postselection evaluated on a record grid.
/// Constant unless the plate is dispersive.
inline PortWeakValues weak_values_on_grid(double phi, const QwpModel& qwp, const std::vector<double>& grid_nm) {
    if (std::holds_alternative<QwpIdeal>(qwp)) return PortWeakValues(ideal_weak_values(phi));
    const double gamma = gamma_from_phi(phi);
    if (!is_frequency_dependent(qwp)) {
        return PortWeakValues(postselection_weak_values(gamma, qwp_phase(qwp, 0.0)));
    }
    std::vector<Complex> a1(grid_nm.size()), a2(grid_nm.size());
    for (std::size_t i = 0; i < grid_nm.size(); ++i) {
        const auto pair = postselection_weak_values(gamma, qwp_phase(qwp, wavelength_to_angular_frequency(grid_nm[i])));
        a1[i] = pair.aw1;
        a2[i] = pair.aw2;
    }
    return {PortWeakValue(std::move(a1)), PortWeakValue(std::move(a2))};
}

inline double zeta(double omega, double g, Complex aw) {
    const double x = g * omega;
    const double s = std::sin(x);
    const double c = std::cos(x);
    const double value = c * c + s * s * std::norm(aw) + 2.0 * s * c * aw.imag();
    if (!std::isfinite(value)) throw ModelError("zeta is not finite");
    if (value < 0.0) {
        // Mathematically |cos x - i A sin x|^2 >= 0; only rounding can undershoot.
        if (value > -1e-12 * (1.0 + std::norm(aw))) return 0.0;
        throw ModelError("negative zeta: inconsistent weak value, coupling and frequency");
    }
    return value;
}

/// Unnormalized postselected spectrum overlap_sq * source * zeta. Its total
/// is the port probability P_fj.
inline Spectrum postselected_distribution(const Spectrum& source, double g, const PortWeakValue& aw, double overlap_sq) {
    if (!(overlap_sq >= 0.0 && overlap_sq <= 1.0)) throw DomainError("overlap_sq must lie in [0, 1]");
    aw.check_bins(source.size());
    const auto omega = source.angular_frequencies();
    std::vector<double> w(source.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = overlap_sq * source.weights()[i] * zeta(omega[i], g, aw.at(i));
    }
    return {source.grid_nm(), std::move(w)};
}

/// Postselected spectra of both ports for postselection angle phi behind the
/// given plate model.
inline std::pair<Spectrum, Spectrum> postselected_pair(const Spectrum& source, double tau, double phi, const QwpModel& qwp) {
    const double gamma = gamma_from_phi(phi);
    const auto wv = weak_values_on_grid(phi, qwp, source.grid_nm());
    return {postselected_distribution(source, tau, wv.port1, postselection_overlap_sq(gamma, 1)),
            postselected_distribution(source, tau, wv.port2, postselection_overlap_sq(gamma, 2))};
}

/// (P_f1, P_f2) by summing the exact postselected distributions over the
/// source grid (ideal quarter-wave plate).
inline std::pair<double, double> postselection_probabilities_exact(const Spectrum& source, double tau, double phi) {
    if (!source.is_normalized()) throw DomainError("source spectrum must be normalized");
    if (!(phi > 0.0 && phi < kPi)) throw DomainError("postselection angle phi must lie in (0, pi)");
    const auto [q1, q2] = postselected_pair(source, tau, phi, QwpIdeal{});
    return {q1.total(), q2.total()};
}

} // namespace weakdelay
