// Acceptance run: one [PASS]/[FAIL] line per criterion, details indented
// below it. Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "support/bridge.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "weakdelay/weakdelay.hpp"

using namespace weakdelay;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;
std::vector<std::string> pending; // detail lines of the criterion being evaluated

template <typename... Args>
void detail(const char* fmt, Args... args) {
    char buf[512];
    if constexpr (sizeof...(Args) == 0) {
        std::snprintf(buf, sizeof buf, "%s", fmt);
    } else {
        std::snprintf(buf, sizeof buf, fmt, args...);
    }
    pending.emplace_back(buf);
}

void verdict(int id, bool ok, const std::string& title) {
    std::printf("[%s] %d %s\n", ok ? "PASS" : "FAIL", id, title.c_str());
    for (const auto& line : pending) std::printf("       %s\n", line.c_str());
    pending.clear();
    std::fflush(stdout);
    if (!ok) ++failures;
}

double rel(double est, double truth) { return std::abs(est / truth - 1.0); }

MeasurementRecord noise_free(double tau, double phi, const QwpModel& qwp = QwpIdeal{}) {
    ExperimentConfig c;
    c.tau_s = tau;
    c.phi_actual = c.phi_assumed = phi;
    c.qwp = qwp;
    return simulate(c);
}

const double kOmega0 = wavelength_to_angular_frequency(kDefaultCenterNm);

void alpha_min_coefficient() {
    const auto t0 = Clock::now();
    const double coeff = alpha_min(1.0, 780.0, 17.6, 0.1);
    const double dt = seconds_since(t0);
    const bool ok = std::abs(coeff - 3.7) <= 0.05 && dt < 1e-3;
    detail("alpha_min/epsilon = %.6f (target 3.7 +- 0.05), eps = 0.0027 -> %.5f, %.1f us", coeff,
           alpha_min(0.0027), dt * 1e6);
    verdict(1, ok, "alpha_min coefficient");
}

void estimator_recovery() {
    const auto t0 = Clock::now();
    bool ok = true;
    const double taus[] = {1e-18, 5e-18, 1e-17, 5e-17};
    const double phis[] = {kJwmPhi, kWvaPhi};
    double worst_exact = 0.0;
    for (double phi : phis) {
        const PortWeakValues wv(ideal_weak_values(phi));
        for (double tau : taus) {
            const double e = rel(solve_exact(noise_free(tau, phi), wv).tau_hat_s, tau);
            worst_exact = std::max(worst_exact, e);
            if (!(e <= 1e-3)) {
                ok = false;
                detail("solve_exact phi=%.4f tau=%.1e: rel err %.3e", phi, tau, e);
            }
        }
    }
    detail("solve_exact worst rel err %.2e over 8 configs (limit 1e-3)", worst_exact);

    // None of the listed delays has omega0 tau <= 1e-3 (1e-18 s gives 2.4e-3),
    // so the first-order clause is checked at 1e-19 and 4e-19 s.
    for (double phi : phis) {
        for (double tau : {1e-19, 4e-19}) {
            const double e = rel(first_order(noise_free(tau, phi), phi).tau_hat_s, tau);
            const bool fine = e <= 1e-2;
            ok = ok && fine;
            detail("first_order phi=%.4f tau=%.0e (omega0 tau=%.1e): rel err %.2f%% %s", phi, tau, kOmega0 * tau,
                   100.0 * e, fine ? "ok" : "> 1%");
        }
    }
    for (double phi : phis) {
        for (double tau : taus) {
            if (kOmega0 * tau > 1e-3) {
                detail("first_order phi=%.4f tau=%.0e (outside omega0 tau <= 1e-3): rel err %.2f%%", phi, tau,
                       100.0 * rel(first_order(noise_free(tau, phi), phi).tau_hat_s, tau));
            }
        }
    }

    int oracle_ok = 0;
    for (double phi : phis) {
        const PortWeakValues wv(ideal_weak_values(phi));
        for (double tau : taus) {
            const auto r = oracle::ideal_record(tau, phi);
            const double got = solve_exact(to_library(r), wv).tau_hat_s;
            const auto gm = oracle::grid_argmax(r, phi, 0.0, 2.0 * tau, 100001, 100);
            if (std::abs(got - gm.g) <= gm.step) {
                ++oracle_ok;
            } else {
                ok = false;
                detail("oracle mismatch phi=%.4f tau=%.0e: |diff| = %.2e, step %.2e", phi, tau, std::abs(got - gm.g),
                       gm.step);
            }
        }
    }
    detail("grid argmax (1e5 points on [0, 2 tau]) agrees within one step: %d/8", oracle_ok);
    const double dt = seconds_since(t0);
    ok = ok && dt < 10.0;
    detail("runtime %.2f s (limit 10 s)", dt);
    verdict(2, ok, "estimator recovery (noise-free)");
}

void trivial_zero() {
    const double limit = 1e-12 / kOmega0;
    bool ok = true;
    struct Domain {
        Method m;
        std::vector<double> phis;
    };
    // Each estimator at the angles it is defined for: the joint estimators
    // near balance, the unbalanced ones near orthogonality.
    const std::vector<Domain> domains = {
        {Method::Exact, {kJwmPhi, kWvaPhi}},         {Method::Quartic, {kJwmPhi, kWvaPhi}},
        {Method::FirstOrder, {kJwmPhi, kWvaPhi}},    {Method::JwmSimplified, {kJwmPhi, kPi / 2.0}},
        {Method::StrubiReference, {kPi / 2.0}},      {Method::WvaFirstOrder, {kWvaPhi}},
        {Method::WvaMeanShift, {kWvaPhi}},
    };
    for (const auto& d : domains) {
        for (double phi : d.phis) {
            EstimateOptions o;
            o.phi = phi;
            const double t = estimate(d.m, noise_free(0.0, phi), o).tau_hat_s;
            const bool fine = std::abs(t) <= limit;
            ok = ok && fine;
            detail("%-15s phi=%.4f: %+.2e s %s", std::string(method_name(d.m)).c_str(), phi, t, fine ? "" : "FAIL");
        }
    }
    EstimateOptions o;
    o.phi = kJwmPhi;
    detail("info, outside domain: strubi at phi=%.4f gives %+.2e s (its (P2-P1)/dw term is nonzero off balance)",
           kJwmPhi, estimate(Method::StrubiReference, noise_free(0.0, kJwmPhi), o).tau_hat_s);
    verdict(3, ok, "zero delay gives zero (limit 1e-12/omega0 = 4.1e-28 s)");
}

void completeness() {
    gen::Source src(2024);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const double omega = src.omega(), tau = src.tau(), phi = src.phi();
        const double gamma = gamma_from_phi(phi);
        const auto w = ideal_weak_values(phi);
        const double s = postselection_overlap_sq(gamma, 1) * zeta(omega, tau, w.aw1) +
                         postselection_overlap_sq(gamma, 2) * zeta(omega, tau, w.aw2);
        worst = std::max(worst, std::abs(s - 1.0));
    }
    detail("max |sum_j overlap_j zeta_j - 1| = %.2e over 1e4 samples (limit 1e-10)", worst);
    verdict(4, worst <= 1e-10, "completeness of the two ports");
}

std::vector<SweepRow> dispersive_sweep(double phi, const std::vector<double>& taus) {
    ExperimentConfig c;
    c.phi_actual = c.phi_assumed = phi;
    c.qwp = dispersive_qwp_for_design_wavelength(kDefaultCenterNm);
    const auto stack = default_plate_stack();
    std::vector<double> thetas;
    for (double t : taus) thetas.push_back(theta_for_delay(t, stack, kDefaultCenterNm * 1e-9));
    return sweep_theta(thetas, stack, c);
}

void dispersion_bias() {
    bool ok = true;
    const auto at03 = dispersive_sweep(kWvaPhi, {0.3e-17})[0];
    const double b03 = at03.tau_first_order_s / at03.tau_theory_s - 1.0;
    const bool first = std::abs(b03) < 0.10;
    ok = ok && first;
    detail("WVA bias at 0.3e-17 s: %+.2f%% (limit 10%%) %s", 100.0 * b03, first ? "ok" : "exceeded");

    std::vector<double> taus;
    for (int k = 0; k <= 15; ++k) taus.push_back(0.5e-17 + k * 0.1e-17);
    const auto rows = dispersive_sweep(kWvaPhi, taus);
    bool monotone = true;
    double prev = -1.0;
    std::string trace;
    for (const auto& r : rows) {
        const double b = std::abs(r.tau_first_order_s / r.tau_theory_s - 1.0);
        if (b < prev) monotone = false;
        prev = b;
        char buf[32];
        std::snprintf(buf, sizeof buf, " %.0f%%", 100.0 * b);
        trace += buf;
    }
    ok = ok && monotone;
    detail("WVA |bias| over 0.5e-17..2e-17 s:%s -> %s", trace.c_str(), monotone ? "monotone" : "not monotone");

    std::vector<double> jt = {0.3e-17};
    jt.insert(jt.end(), taus.begin(), taus.end());
    double worst = 0.0;
    for (const auto& r : dispersive_sweep(kJwmPhi, jt)) worst = std::max(worst, rel(r.tau_first_order_s, r.tau_theory_s));
    ok = ok && worst < 0.03;
    detail("JWM max |bias| over the same sweep: %.2f%% (limit 3%%)", 100.0 * worst);
    verdict(5, ok, "dispersive plate: WVA bias vs JWM");
}

void snr_robustness() {
    const auto t0 = Clock::now();
    ExperimentConfig c;
    c.photons = 10000000;
    c.seed = 6;
    const std::vector<double> alphas = {0.002, 0.005, 0.01, 0.02};
    const std::vector<double> assumed = {0.03, 0.05, 0.08};
    const auto pts = snr_sweep(alphas, kWvaPhi, assumed, 100, c);
    bool ok = true;
    double worst_gap = 0.0;
    for (double a : alphas) {
        double matched = 0.0;
        std::string line;
        for (const auto& p : pts) {
            if (p.alpha != a) continue;
            if (p.phi_assumed == 0.03) matched = p.snr_db;
            char buf[48];
            std::snprintf(buf, sizeof buf, "  phi=%.2f: %6.1f dB", p.phi_assumed, p.snr_db);
            line += buf;
            if (!(p.snr_db > 10.0)) ok = false;
        }
        for (const auto& p : pts) {
            if (p.alpha == a) worst_gap = std::max(worst_gap, matched - p.snr_db);
        }
        detail("alpha=%.3f%s", a, line.c_str());
    }
    ok = ok && worst_gap <= 5.0;
    const double dt = seconds_since(t0);
    ok = ok && dt < 300.0;
    detail("worst matched-minus-mismatched gap %.1f dB (limit 5 dB), 100 trials x 1e7 photons, %.1f s", worst_gap, dt);
    verdict(6, ok, "SNR robustness to postselection-angle mismatch");
}

void waveplate_geometry() {
    bool ok = true;
    const auto s = default_plate_stack();
    const double lambda = kDefaultCenterNm * 1e-9;
    const double dn = s.indices(lambda).birefringence();
    const double normal = compound_retardance(lambda, s, TiltAngles::normal());
    const double plain = 2.0 * kPi * dn * (s.h1() - s.h2()) / lambda;
    // equal up to rounding of the two ~72 rad single-plate terms
    const double d0 = std::abs(normal - plain);
    const double ulps = d0 / (std::numeric_limits<double>::epsilon() * 2.0 * kPi * dn * (s.h1() + s.h2()) / lambda);
    ok = ok && ulps <= 8.0;
    detail("normal incidence: |general - 2 pi dn (h1-h2)/lambda| = %.1e rad (%.1f ulp of the plate terms)", d0, ulps);

    double worst = 0.0;
    for (double a = 0.005; a <= 0.05 + 1e-12; a += 0.005) {
        const double gx = compound_retardance(lambda, s, TiltAngles(a, 0.0));
        const double gy = compound_retardance(lambda, s, TiltAngles(0.0, a));
        worst = std::max(worst, std::abs(gx / oracle::compound_small_xi(dn, s.h1(), s.h2(), lambda, a) - 1.0));
        worst = std::max(worst, std::abs(gy / oracle::compound_small_psi(dn, s.h1(), s.h2(), lambda, a) - 1.0));
    }
    ok = ok && worst <= 1e-4;
    detail("small-angle forms, angles <= 0.05 rad: worst rel diff %.2e (limit 1e-4)", worst);

    const double omega = 2.0 * kPi * kSpeedOfLight / lambda;
    const double n = s.indices(lambda).average();
    double worst_pivot = 0.0;
    for (double theta = 0.005; theta <= 0.05 + 1e-12; theta += 0.005) {
        const double a = internal_angle(theta, n);
        const double vx = (compound_retardance(lambda, s, TiltAngles(a, 0.0)) - normal) / omega;
        const double vy = (compound_retardance(lambda, s, TiltAngles(0.0, a)) - normal) / omega;
        worst_pivot = std::max(worst_pivot, rel(vx, pivot_delay(theta, s, lambda, +1)));
        worst_pivot = std::max(worst_pivot, rel(vy, pivot_delay(theta, s, lambda, -1)));
    }
    ok = ok && worst_pivot <= 0.01;
    detail("pivot delay vs retardance change / omega, theta <= 0.05: worst %.3f%% (limit 1%%)", 100.0 * worst_pivot);
    verdict(7, ok, "waveplate geometry");
}

void jwm_vs_reference() {
    ExperimentConfig c;
    c.phi_actual = c.phi_assumed = kJwmPhi;
    std::vector<double> thetas;
    for (int k = 1; k <= 12; ++k) thetas.push_back(0.005 * k);
    double worst_jwm = 0.0, best_ref = INFINITY, worst_ref = 0.0;
    for (const auto& r : sweep_theta(thetas, default_plate_stack(), c)) {
        worst_jwm = std::max(worst_jwm, rel(*r.tau_jwm_s, r.tau_theory_s));
        const auto ref = strubi_reference(noise_free(r.tau_theory_s, kJwmPhi)).tau_hat_s;
        best_ref = std::min(best_ref, rel(ref, r.tau_theory_s));
        worst_ref = std::max(worst_ref, rel(ref, r.tau_theory_s));
    }
    const bool ok = worst_jwm <= 0.05 && best_ref > worst_jwm;
    detail("theta 0.005..0.06 rad, noise-free, phi = pi/2 + 0.071");
    detail("simplified joint estimator: worst |rel err| %.2f%% (limit 5%%)", 100.0 * worst_jwm);
    detail("earlier two-port formula:   |rel err| from %.0f%% to %.0f%%", 100.0 * best_ref, 100.0 * worst_ref);
    verdict(8, ok, "simplified joint estimator vs earlier two-port formula");
}

} // namespace

int main() {
    alpha_min_coefficient();
    estimator_recovery();
    trivial_zero();
    completeness();
    dispersion_bias();
    snr_robustness();
    waveplate_geometry();
    jwm_vs_reference();
    std::printf("[N/A ] 9 laboratory data behind the measured sweeps are not available; criteria 2, 5, 6 and 8 use "
                "simulated records instead\n");
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
