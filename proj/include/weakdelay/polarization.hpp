#pragma once

// Jones-vector polarization states, postselection optics and weak values for
// the two output ports of the polarizing beam splitter.
//
// Conventions: basis {|H>, |V>}, observable A = sigma_Z = |H><H| - |V><V|,
// preselected state |i> = (|H> + |V>)/sqrt(2). The PBS rotated by gamma
// selects port 1 = cos(g)|H> + sin(g)|V> and port 2 = sin(g)|H> - cos(g)|V>,
// preceded by a quarter-wave plate with retardance phase w*tau0 (pi/4 for
// an ideal plate). gamma = pi/4 - phi/2 maps onto the phi parametrization.

#include <cmath>
#include <complex>
#include <variant>

#include <Eigen/Core>

#include "weakdelay/constants.hpp"
#include "weakdelay/errors.hpp"

namespace weakdelay {

using Complex = std::complex<double>;
using JonesMatrix = Eigen::Matrix2cd;

class PolarizationState {
public:
    static constexpr double kNormTolerance = 1e-12;

    PolarizationState(Complex h, Complex v) : h_(h), v_(v) {
        const double norm = std::norm(h_) + std::norm(v_);
        if (!(std::abs(norm - 1.0) <= kNormTolerance)) {
            throw DomainError("polarization state is not normalized");
        }
    }

    static PolarizationState horizontal() { return {1.0, 0.0}; }
    static PolarizationState vertical() { return {0.0, 1.0}; }
    static PolarizationState diagonal() {
        const double r = 1.0 / std::sqrt(2.0);
        return {r, r};
    }

    Complex h() const noexcept { return h_; }
    Complex v() const noexcept { return v_; }

    /// <this|other>
    Complex inner(const PolarizationState& other) const noexcept {
        return std::conj(h_) * other.h_ + std::conj(v_) * other.v_;
    }

    /// <this|sigma_Z|other>
    Complex sigma_z_element(const PolarizationState& other) const noexcept {
        return std::conj(h_) * other.h_ - std::conj(v_) * other.v_;
    }

    bool equal_up_to_phase(const PolarizationState& other, double tol = 1e-12) const noexcept {
        return std::abs(std::abs(inner(other)) - 1.0) <= tol;
    }

    PolarizationState transformed(const JonesMatrix& m) const {
        return {m(0, 0) * h_ + m(0, 1) * v_, m(1, 0) * h_ + m(1, 1) * v_};
    }

private:
    Complex h_;
    Complex v_;
};

struct WeakValuePair {
    Complex aw1;
    Complex aw2;
};

/// Quarter-wave-plate model in front of the PBS.
struct QwpIdeal {};
struct QwpDispersive {
    double tau0_s; // retardance phase is omega * tau0; tau0 = (pi/4)/omega_design
};
struct QwpAbsent {};
using QwpModel = std::variant<QwpIdeal, QwpDispersive, QwpAbsent>;

inline QwpDispersive dispersive_qwp_for_design_wavelength(double design_nm) {
    return QwpDispersive{(kPi / 4.0) / wavelength_to_angular_frequency(design_nm)};
}

/// Retardance phase w*tau0 the plate applies at angular frequency omega.
inline double qwp_phase(const QwpModel& model, double omega) {
    struct Visitor {
        double omega;
        double operator()(const QwpIdeal&) const { return kPi / 4.0; }
        double operator()(const QwpDispersive& d) const { return omega * d.tau0_s; }
        double operator()(const QwpAbsent&) const { return 0.0; }
    };
    return std::visit(Visitor{omega}, model);
}

inline bool is_frequency_dependent(const QwpModel& model) {
    return std::holds_alternative<QwpDispersive>(model);
}

inline double gamma_from_phi(double phi) { return kPi / 4.0 - phi / 2.0; }
inline double phi_from_gamma(double gamma) { return kPi / 2.0 - 2.0 * gamma; }

/// Weak values (i tan(phi/2), -i cot(phi/2)) of an ideal quarter-wave
/// postselection.
inline WeakValuePair ideal_weak_values(double phi) {
    if (!(phi > 0.0 && phi < kPi)) {
        throw DomainError("postselection angle phi must lie in (0, pi)");
    }
    const double half = phi / 2.0;
    return {Complex(0.0, std::tan(half)), Complex(0.0, -1.0 / std::tan(half))};
}

/// Jones matrix of a quarter-wave plate with its axis at 45 degrees and
/// retardance phase `phase` (= omega * tau0).
inline JonesMatrix qwp_jones_matrix_for_phase(double phase) {
    const Complex c(std::cos(phase), 0.0);
    const Complex s(0.0, -std::sin(phase));
    JonesMatrix m;
    m << c, s, s, c;
    return m;
}

inline JonesMatrix qwp_jones_matrix(double omega, double tau0) {
    if (!(omega > 0.0) || !(tau0 > 0.0)) {
        throw DomainError("qwp_jones_matrix requires omega > 0 and tau0 > 0");
    }
    return qwp_jones_matrix_for_phase(omega * tau0);
}

/// Interaction exp(-i tau sigma_Z omega) for a delay phase tau*omega.
inline JonesMatrix delay_jones_matrix(double delay_phase) {
    JonesMatrix m = JonesMatrix::Zero();
    m(0, 0) = std::polar(1.0, -delay_phase);
    m(1, 1) = std::polar(1.0, delay_phase);
    return m;
}

/// Linear states selected by the PBS rotated by gamma. port is 1 or 2.
inline PolarizationState postselection_state(double gamma, int port) {
    const double c = std::cos(gamma);
    const double s = std::sin(gamma);
    switch (port) {
    case 1: return {c, s};
    case 2: return {s, -c};
    default: throw DomainError("postselection port must be 1 or 2");
    }
}

namespace detail {
// |cos g +- sin g| below this is treated as an orthogonal pre/postselection.
inline constexpr double kSingularOverlap = 1e-12;
} // namespace detail

/// Weak values for PBS angle gamma behind a quarter-wave plate of retardance
/// phase `phase`. For phase = pi/4 and gamma = pi/4 - phi/2 this equals
/// ideal_weak_values(phi); for phase = 0 (no plate) the values are real.
inline WeakValuePair postselection_weak_values(double gamma, double phase) {
    const double c = std::cos(gamma);
    const double s = std::sin(gamma);
    const double plus = c + s;
    const double minus = c - s;
    if (std::abs(plus) < detail::kSingularOverlap) {
        throw DomainError("port-1 weak value singular: postselection orthogonal to preselection");
    }
    if (std::abs(minus) < detail::kSingularOverlap) {
        throw DomainError("port-2 weak value singular: postselection orthogonal to preselection");
    }
    const Complex rotation = std::polar(1.0, 2.0 * phase);
    return {minus / plus * rotation, plus / (-minus) * rotation};
}

/// Frequency-dependent weak values behind a dispersive quarter-wave plate.
inline WeakValuePair dispersive_weak_values(double gamma, double omega, double tau0) {
    if (!(omega > 0.0)) {
        throw DomainError("dispersive_weak_values requires omega > 0");
    }
    return postselection_weak_values(gamma, omega * tau0);
}

/// |<f_j'|i>|^2 for the plate+PBS postselection. Independent of the plate
/// phase: (1 + sin 2g)/2 for port 1, (1 - sin 2g)/2 for port 2.
inline double postselection_overlap_sq(double gamma, int port) {
    const double s2 = std::sin(2.0 * gamma);
    switch (port) {
    case 1: return 0.5 * (1.0 + s2);
    case 2: return 0.5 * (1.0 - s2);
    default: throw DomainError("postselection port must be 1 or 2");
    }
}

/// Probability amplitude <f_j| U_qwp U_delay |i> computed directly by Jones
/// calculus, independent of the weak-value factorization.
inline Complex port_amplitude(double gamma, int port, double qwp_phase_rad, double delay_phase) {
    const PolarizationState initial = PolarizationState::diagonal();
    const PolarizationState evolved =
        initial.transformed(qwp_jones_matrix_for_phase(qwp_phase_rad) * delay_jones_matrix(delay_phase));
    return postselection_state(gamma, port).inner(evolved);
}

} // namespace weakdelay
