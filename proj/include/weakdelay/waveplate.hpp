#pragma once

// Compound binary zero-order waveplate: retardance of uniaxial plates under
// oblique incidence and the delay induced by pivoting the stack.
//
// Frame: optic axis along Z, plate surface in the X-Z plane, normal along Y.
// xi is the azimuth and psi the elevation of the internal ray.

#include <array>
#include <cmath>
#include <string>
#include <variant>

#include "weakdelay/constants.hpp"
#include "weakdelay/errors.hpp"

namespace weakdelay {

struct Indices {
    double n_o;
    double n_e;
    double average() const noexcept { return 0.5 * (n_o + n_e); }
    double birefringence() const noexcept { return n_e - n_o; }
};

/// Three-term Sellmeier form n^2 = a + b L^2/(L^2 - c) + d L^2/(L^2 - e),
/// L in micrometres.
struct SellmeierTerms {
    double a, b, c, d, e;

    double index(double lambda_um) const {
        const double l2 = lambda_um * lambda_um;
        const double n2 = a + b * l2 / (l2 - c) + d * l2 / (l2 - e);
        if (!(n2 > 0.0)) throw DomainError("Sellmeier model gives n^2 <= 0 at this wavelength");
        return std::sqrt(n2);
    }
};

struct SellmeierModel {
    SellmeierTerms ordinary;
    SellmeierTerms extraordinary;
};

/// Wavelength-independent indices.
struct ConstantIndexModel {
    double n_o;
    double n_e;
};

using DispersionModel = std::variant<SellmeierModel, ConstantIndexModel>;

/// Crystalline quartz at 20 C (Ghosh, Opt. Commun. 163, 95 (1999)).
inline SellmeierModel quartz_sellmeier() {
    return {{1.28604141, 1.07044083, 1.00585997e-2, 1.10202242, 100.0},
            {1.28851804, 1.09509924, 1.02101864e-2, 1.15662475, 100.0}};
}

inline Indices indices_at(const DispersionModel& model, double lambda_m) {
    if (!(lambda_m > 0.0)) throw DomainError("wavelength must be positive");
    if (const auto* s = std::get_if<SellmeierModel>(&model)) {
        const double um = lambda_m * 1e6;
        return {s->ordinary.index(um), s->extraordinary.index(um)};
    }
    const auto& c = std::get<ConstantIndexModel>(model);
    return {c.n_o, c.n_e};
}

class PlateStack {
public:
    PlateStack(double h1_m, double h2_m, DispersionModel model = quartz_sellmeier())
        : h1_(h1_m), h2_(h2_m), model_(model) {
        if (!(h1_ > 0.0) || !(h2_ > 0.0)) throw DomainError("plate thicknesses must be positive");
        const auto mid = indices_at(model_, kDefaultCenterNm * 1e-9);
        if (mid.birefringence() == 0.0) throw DomainError("plates must be birefringent (n_e != n_o)");
    }

    double h1() const noexcept { return h1_; }
    double h2() const noexcept { return h2_; }
    const DispersionModel& model() const noexcept { return model_; }
    Indices indices(double lambda_m) const { return indices_at(model_, lambda_m); }

private:
    double h1_;
    double h2_;
    DispersionModel model_;
};

/// Default stack: 1 mm plate and a partner thicker by one zero-order
/// half-wave at 780 nm.
inline PlateStack default_plate_stack() {
    const double h2 = 1.0e-3;
    const double lambda = kDefaultCenterNm * 1e-9;
    const double dn = indices_at(quartz_sellmeier(), lambda).birefringence();
    return {h2 + 0.5 * lambda / dn, h2};
}

class TiltAngles {
public:
    TiltAngles(double xi, double psi) : xi_(xi), psi_(psi) {
        if (!(std::abs(xi_) < kPi / 2.0) || !(std::abs(psi_) < kPi / 2.0)) {
            throw DomainError("tilt angles must satisfy |xi|, |psi| < pi/2");
        }
        const double s = std::sin(xi_) * std::sin(psi_);
        if (!(s * s < 1.0)) throw DomainError("tilt angles must satisfy sin^2(xi) sin^2(psi) < 1");
    }
    static TiltAngles normal() { return {0.0, 0.0}; }

    double xi() const noexcept { return xi_; }
    double psi() const noexcept { return psi_; }

private:
    double xi_;
    double psi_;
};

/// Birefringent path C = (x^2 + y^2)/sqrt(x^2 + y^2 + z^2) = L sin^2(eta),
/// eta being the angle between the ray and the optic axis.
inline double effective_path_length(const std::array<double, 3>& exit_point) {
    const auto [x, y, z] = exit_point;
    if (!(y > 0.0)) throw DomainError("exit point must lie beyond the entrance face (y > 0)");
    return (x * x + y * y) / std::sqrt(x * x + y * y + z * z);
}

namespace detail {

/// Exit point of a ray through a plate of thickness h, with x^2 + h^2 =
/// h^2/cos^2(xi) and z^2 + h^2 = h^2/cos^2(psi).
inline std::array<double, 3> exit_point(double h, const TiltAngles& t) {
    return {h * std::tan(t.xi()), h, h * std::tan(t.psi())};
}

} // namespace detail

/// Effective path of one plate, h cos(psi) / (cos(xi) sqrt(1 - sin^2 xi sin^2 psi)).
inline double single_plate_path(double h, const TiltAngles& t) {
    const double c = effective_path_length(detail::exit_point(h, t));
    if (!(c > 0.0) || !std::isfinite(c)) throw ModelError("plate geometry degenerate: effective path not positive");
    return c;
}

/// Retardance 2 pi (n_e - n_o) C / lambda of one plate.
inline double single_plate_retardance(double lambda_m, double h, const Indices& n, const TiltAngles& t) {
    if (!(lambda_m > 0.0) || !(h > 0.0)) throw DomainError("wavelength and thickness must be positive");
    return 2.0 * kPi * n.birefringence() * single_plate_path(h, t) / lambda_m;
}

/// Net retardance of the crossed pair. The second plate's optic axis is
/// rotated by 90 degrees about the normal, exchanging the roles of xi and psi;
/// refraction between the plates is neglected.
inline double compound_retardance(double lambda_m, const PlateStack& stack, const TiltAngles& t) {
    const Indices n = stack.indices(lambda_m);
    return single_plate_retardance(lambda_m, stack.h1(), n, t) -
           single_plate_retardance(lambda_m, stack.h2(), n, TiltAngles(t.psi(), t.xi()));
}

/// Refraction angle inside the plate for external tilt theta (small-angle
/// Snell's law).
inline double internal_angle(double theta, double n_avg) {
    if (!(n_avg > 0.0)) throw DomainError("refractive index must be positive");
    return theta / n_avg;
}

/// Delay tau = sign (n_e - n_o)(h1 + h2) theta^2 / (2 c n^2) from pivoting the
/// stack by theta; sign +1 for a pivot in the xi plane (psi = 0), -1 in the
/// psi plane. n is the average index. lambda_m selects where the indices are
/// evaluated.
inline double pivot_delay(double theta, const PlateStack& stack, double lambda_m, int sign = +1) {
    if (sign != 1 && sign != -1) throw DomainError("pivot sign must be +1 or -1");
    const Indices n = stack.indices(lambda_m);
    const double na = n.average();
    return sign * n.birefringence() * (stack.h1() + stack.h2()) * theta * theta / (2.0 * kSpeedOfLight * na * na);
}

/// Whether |theta| is outside the small-angle regime of pivot_delay.
inline bool pivot_angle_is_large(double theta) { return std::abs(theta) > 0.2; }

/// Nonnegative tilt producing delay |tau| (inverse of pivot_delay).
inline double theta_for_delay(double tau, const PlateStack& stack, double lambda_m) {
    const double unit = std::abs(pivot_delay(1.0, stack, lambda_m));
    if (!(unit > 0.0)) throw DegenerateError("stack produces no pivot delay");
    return std::sqrt(std::abs(tau) / unit);
}

} // namespace weakdelay
