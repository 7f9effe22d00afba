// Tilt the compound plate, simulate shot-noise-limited balanced records and
// compare the estimators against the delay the tilt produced.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "weakdelay/weakdelay.hpp"

int main(int argc, char** argv) {
    namespace wd = weakdelay;
    const double theta = argc > 1 ? std::stod(argv[1]) : 0.028;
    const int trials = argc > 2 ? std::stoi(argv[2]) : 20;

    const auto stack = wd::default_plate_stack();
    wd::ExperimentConfig cfg;
    cfg.tau_s = wd::pivot_delay(theta, stack, cfg.source.center_nm * 1e-9);
    cfg.photons = 10'000'000;
    cfg.seed = 7;
    std::printf("theta = %.4f rad, tau = %.4e s, %d records of %llu photons\n", theta, cfg.tau_s, trials,
                static_cast<unsigned long long>(cfg.photons));

    const std::vector<wd::Method> methods = {wd::Method::Exact, wd::Method::FirstOrder, wd::Method::JwmSimplified,
                                             wd::Method::StrubiReference};
    std::vector<double> sum(methods.size(), 0.0), sum_sq(methods.size(), 0.0);
    wd::EstimateOptions opts;
    opts.phi = cfg.phi_assumed;
    for (int t = 0; t < trials; ++t) {
        const auto record = wd::simulate(cfg, static_cast<std::uint64_t>(t));
        for (std::size_t k = 0; k < methods.size(); ++k) {
            const double x = wd::estimate(methods[k], record, opts).tau_hat_s / cfg.tau_s;
            sum[k] += x;
            sum_sq[k] += x * x;
        }
    }
    std::printf("  %-12s %12s %10s\n", "method", "mean/tau-1", "sd/tau");
    for (std::size_t k = 0; k < methods.size(); ++k) {
        const double mean = sum[k] / trials;
        const double sd = std::sqrt(std::max(0.0, sum_sq[k] / trials - mean * mean));
        std::printf("  %-12s %+11.2f%% %9.2f%%\n", std::string(wd::method_name(methods[k])).c_str(),
                    100.0 * (mean - 1.0), 100.0 * sd);
    }
}
