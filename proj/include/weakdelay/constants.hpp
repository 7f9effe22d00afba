#pragma once

#include <cmath>
#include <numbers>

#include "weakdelay/errors.hpp"

namespace weakdelay {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfLight = 2.99792458e8; // m/s, exact

/// Default source and spectrometer parameters of the reference setup:
/// 780 nm LED, 17.6 nm FWHM, 690-900 nm spectrometer range at 0.1 nm.
inline constexpr double kDefaultCenterNm = 780.0;
inline constexpr double kDefaultFwhmNm = 17.6;
inline constexpr double kDefaultGridMinNm = 690.0;
inline constexpr double kDefaultGridMaxNm = 900.0;
inline constexpr double kDefaultGridStepNm = 0.1;

/// Postselection angles used for the balanced (JWM) and nearly orthogonal
/// (WVA) configurations.
inline constexpr double kJwmPhi = kPi / 2 + 0.071;
inline constexpr double kWvaPhi = 0.03;

inline double wavelength_to_angular_frequency(double lambda_nm) {
    if (!(lambda_nm > 0.0) || !std::isfinite(lambda_nm)) {
        throw DomainError("wavelength must be positive and finite");
    }
    return 2.0 * kPi * kSpeedOfLight / (lambda_nm * 1e-9);
}

inline double angular_frequency_to_wavelength(double omega) {
    if (!(omega > 0.0) || !std::isfinite(omega)) {
        throw DomainError("angular frequency must be positive and finite");
    }
    return 2.0 * kPi * kSpeedOfLight / omega * 1e9;
}

inline constexpr double seconds_to_fs(double s) { return s * 1e15; }
inline constexpr double fs_to_seconds(double fs) { return fs * 1e-15; }

} // namespace weakdelay
