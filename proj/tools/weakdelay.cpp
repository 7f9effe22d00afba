// weakdelay: simulate, estimate, sweep and analyse postselected time-delay
// records.
//
// Exit status: 0 success, 1 model/estimator error, 2 input format error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "weakdelay/io/record_csv.hpp"
#include "weakdelay/io/result_json.hpp"
#include "weakdelay/io/run_config.hpp"
#include "weakdelay/weakdelay.hpp"

namespace wd = weakdelay;
using nlohmann::json;

namespace {

constexpr int kExitModel = 1;
constexpr int kExitFormat = 2;

std::string sidecar_path(const std::string& record_path) { return record_path + ".json"; }

wd::io::RunConfig config_or_default(const std::string& path) {
    return path.empty() ? wd::io::RunConfig{} : wd::io::load_run_config(path);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw wd::FormatError("cannot open output file: " + path);
    return out;
}

struct SimulateArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> photons;
};

int cmd_simulate(const SimulateArgs& a) {
    auto rc = config_or_default(a.config);
    if (a.seed) rc.experiment.seed = *a.seed;
    if (a.photons) rc.experiment.photons = *a.photons;
    const auto record = wd::simulate(rc.resolved());
    wd::io::write_record_csv(a.out, record);
    open_out(sidecar_path(a.out)) << wd::io::run_config_to_json(rc).dump(2) << '\n';
    return 0;
}

struct EstimateArgs {
    std::string records;
    std::string method = "all";
    std::optional<double> phi;
    std::string qwp = "ideal";
    std::optional<double> omega0;
};

int cmd_estimate(const EstimateArgs& a) {
    const auto record = wd::io::read_record_csv(a.records);
    double phi = 0.0;
    if (a.phi) {
        phi = *a.phi;
    } else if (std::filesystem::exists(sidecar_path(a.records))) {
        phi = wd::io::load_run_config(sidecar_path(a.records)).experiment.phi_assumed;
    } else {
        throw wd::FormatError("no --phi given and no sidecar " + sidecar_path(a.records));
    }

    wd::EstimateOptions opts;
    opts.phi = phi;
    opts.omega0 = a.omega0;
    if (a.qwp == "dispersive") {
        opts.qwp = wd::dispersive_qwp_for_design_wavelength(wd::kDefaultCenterNm);
    } else if (a.qwp == "absent") {
        opts.qwp = wd::QwpAbsent{};
    }

    std::vector<wd::Method> methods;
    if (a.method == "all") {
        methods.assign(wd::kAllMethods.begin(), wd::kAllMethods.end());
    } else if (auto m = wd::method_from_name(a.method)) {
        methods.push_back(*m);
    } else {
        throw wd::FormatError("unknown method '" + a.method + "'");
    }

    json out = json::array();
    int status = 0;
    for (auto m : methods) {
        const std::string name(wd::method_name(m));
        try {
            out.push_back(wd::io::result_to_json(wd::estimate(m, record, opts)));
        } catch (const wd::BracketError& e) {
            out.push_back(wd::io::error_to_json(name, "bracket", e.what()));
            status = kExitModel;
        } catch (const wd::DegenerateError& e) {
            out.push_back(wd::io::error_to_json(name, "degenerate", e.what()));
            status = kExitModel;
        } catch (const wd::ModelError& e) {
            out.push_back(wd::io::error_to_json(name, "model", e.what()));
            status = kExitModel;
        } catch (const wd::DomainError& e) {
            out.push_back(wd::io::error_to_json(name, "domain", e.what()));
            status = kExitModel;
        }
    }
    std::cout << (methods.size() == 1 ? out.at(0) : out).dump(2) << '\n';
    return status;
}

struct SweepArgs {
    std::string config;
    double theta_min = 0.0;
    double theta_max = 0.05;
    int steps = 11;
    std::string out;
};

int cmd_sweep(const SweepArgs& a) {
    if (a.steps < 1) throw wd::FormatError("--steps must be at least 1");
    const auto rc = config_or_default(a.config);
    std::vector<double> thetas;
    for (int k = 0; k < a.steps; ++k) {
        thetas.push_back(a.steps == 1 ? a.theta_min
                                      : a.theta_min + (a.theta_max - a.theta_min) * k / (a.steps - 1));
    }
    const auto rows = wd::sweep_theta(thetas, rc.plate_stack(), rc.experiment, rc.pivot_sign);
    const bool jwm = rows.front().tau_jwm_s.has_value();
    auto out = open_out(a.out);
    out << "theta_rad,tau_theory_s,tau_exact_s,tau_first_order_s" << (jwm ? ",tau_jwm_s" : "") << '\n';
    for (const auto& r : rows) {
        out << wd::io::format_g17(r.theta_rad) << ',' << wd::io::format_g17(r.tau_theory_s) << ','
            << wd::io::format_g17(r.tau_exact_s) << ',' << wd::io::format_g17(r.tau_first_order_s);
        if (jwm) out << ',' << wd::io::format_g17(*r.tau_jwm_s);
        out << '\n';
    }
    return 0;
}

struct SnrArgs {
    std::string config;
    std::vector<double> alphas{0.002, 0.005, 0.01, 0.02};
    std::optional<double> phi_actual;
    std::vector<double> phi_assumed;
    int trials = 100;
    std::optional<std::uint64_t> photons;
    std::string out;
};

int cmd_snr(const SnrArgs& a) {
    auto rc = config_or_default(a.config);
    if (a.photons) rc.experiment.photons = *a.photons;
    if (rc.experiment.photons == 0) rc.experiment.photons = 10'000'000;
    const double phi_actual = a.phi_actual.value_or(rc.experiment.phi_actual);
    const auto assumed = a.phi_assumed.empty() ? std::vector<double>{phi_actual} : a.phi_assumed;
    const auto points = wd::snr_sweep(a.alphas, phi_actual, assumed, a.trials, rc.experiment);
    auto out = open_out(a.out);
    out << "alpha,phi_assumed_rad,snr_db,trials\n";
    for (const auto& p : points) {
        out << wd::io::format_g17(p.alpha) << ',' << wd::io::format_g17(p.phi_assumed) << ','
            << (std::isinf(p.snr_db) ? std::string("inf") : wd::io::format_g17(p.snr_db)) << ',' << p.trials << '\n';
    }
    return 0;
}

struct AnalyticArgs {
    bool alpha_min = false;
    double epsilon = 0.0027;
    std::optional<double> alpha;
    std::optional<double> beta;
    double lambda0_nm = wd::kDefaultCenterNm;
    double delta_lambda_nm = wd::kDefaultFwhmNm;
    double resolution_nm = wd::kDefaultGridStepNm;
};

int cmd_analytic(const AnalyticArgs& a) {
    json j;
    j["resolution_factor"] = wd::resolution_factor(a.lambda0_nm, a.delta_lambda_nm, a.resolution_nm);
    if (a.alpha_min || (!a.alpha && !a.beta)) {
        const double am = wd::alpha_min(a.epsilon, a.lambda0_nm, a.delta_lambda_nm, a.resolution_nm);
        j["epsilon"] = a.epsilon;
        j["alpha_min"] = am;
        j["alpha_min_coefficient"] = am / a.epsilon;
    }
    if (a.alpha || a.beta) {
        if (!a.alpha || !a.beta) throw wd::FormatError("--alpha and --beta must be given together");
        j["alpha"] = *a.alpha;
        j["beta"] = *a.beta;
        j["delta_alpha"] = wd::wva_uncertainty(*a.alpha, *a.beta, a.lambda0_nm, a.delta_lambda_nm, a.resolution_nm);
    }
    std::cout << j.dump(2) << '\n';
    return 0;
}

struct WaveplateArgs {
    std::string config;
    double theta = 0.0;
    double lambda_nm = wd::kDefaultCenterNm;
    std::optional<double> xi;
    std::optional<double> psi;
};

int cmd_waveplate(const WaveplateArgs& a) {
    const auto rc = config_or_default(a.config);
    const auto stack = rc.plate_stack();
    const double lambda_m = a.lambda_nm * 1e-9;
    const auto n = stack.indices(lambda_m);
    json j;
    j["h1_mm"] = rc.h1_mm;
    j["h2_mm"] = rc.h2_mm;
    j["lambda_nm"] = a.lambda_nm;
    j["n_o"] = n.n_o;
    j["n_e"] = n.n_e;
    j["n_avg"] = n.average();
    j["theta_rad"] = a.theta;
    const double tau = wd::pivot_delay(a.theta, stack, lambda_m, rc.pivot_sign);
    j["tau_s"] = tau;
    j["tau_fs"] = wd::seconds_to_fs(tau);
    j["retardance_normal_rad"] = wd::compound_retardance(lambda_m, stack, wd::TiltAngles::normal());
    const double internal = wd::internal_angle(a.theta, n.average());
    const wd::TiltAngles tilt(a.xi.value_or(rc.pivot_sign > 0 ? internal : 0.0),
                              a.psi.value_or(rc.pivot_sign > 0 ? 0.0 : internal));
    j["xi_rad"] = tilt.xi();
    j["psi_rad"] = tilt.psi();
    j["retardance_tilted_rad"] = wd::compound_retardance(lambda_m, stack, tilt);
    if (wd::pivot_angle_is_large(a.theta)) j["warning"] = "theta beyond the small-angle regime (0.2 rad)";
    std::cout << j.dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Postselected weak-measurement time-delay estimation"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Write a synthetic two-port record (CSV) and a JSON sidecar");
    s->add_option("--config", sim.config, "Run configuration JSON (defaults when omitted)");
    s->add_option("--out", sim.out, "Output record CSV; the sidecar is <out>.json")->required();
    s->add_option("--seed", sim.seed, "Override the configured seed");
    s->add_option("--photons", sim.photons, "Override the photon count (0 = noise-free)");

    EstimateArgs est;
    auto* e = app.add_subcommand("estimate", "Estimate the delay from a record CSV");
    e->add_option("--records", est.records, "Record CSV")->required();
    e->add_option("--method", est.method,
                  "exact, quartic, first-order, jwm, strubi, wva, wva-mean-shift or all")
        ->capture_default_str();
    e->add_option("--phi", est.phi, "Assumed postselection angle (rad); defaults to the sidecar's phi_assumed_rad");
    e->add_option("--qwp", est.qwp, "Plate model for the exact and quartic solvers")
        ->check(CLI::IsMember({"ideal", "dispersive", "absent"}))
        ->capture_default_str();
    e->add_option("--omega0", est.omega0, "Reference angular frequency (rad/s) for the WVA estimators");

    SweepArgs sw;
    auto* w = app.add_subcommand("sweep", "Simulate and estimate over a range of plate tilts (CSV)");
    w->add_option("--config", sw.config, "Run configuration JSON");
    w->add_option("--theta-min", sw.theta_min, "First tilt (rad)")->capture_default_str();
    w->add_option("--theta-max", sw.theta_max, "Last tilt (rad)")->capture_default_str();
    w->add_option("--steps", sw.steps, "Number of tilts")->capture_default_str();
    w->add_option("--out", sw.out, "Output CSV")->required();

    SnrArgs snr;
    auto* n = app.add_subcommand("snr", "Monte Carlo SNR of the first-order estimator (CSV)");
    n->add_option("--config", snr.config, "Run configuration JSON");
    n->add_option("--alpha", snr.alphas, "Signal values omega0*tau")->delimiter(',')->capture_default_str();
    n->add_option("--phi-actual", snr.phi_actual, "Postselection angle used to simulate (rad)");
    n->add_option("--phi-assumed", snr.phi_assumed, "Angles assumed by the estimator (rad)")->delimiter(',');
    n->add_option("--trials", snr.trials, "Trials per point (>= 30)")->capture_default_str();
    n->add_option("--photons", snr.photons, "Photons per record (default 1e7)");
    n->add_option("--out", snr.out, "Output CSV")->required();

    AnalyticArgs an;
    auto* y = app.add_subcommand("analytic", "Closed-form WVA uncertainty and minimum detectable alpha (JSON)");
    y->add_flag("--alpha-min", an.alpha_min, "Report the minimum detectable alpha");
    y->add_option("--epsilon", an.epsilon, "Residual postselection offset (rad)")->capture_default_str();
    y->add_option("--alpha", an.alpha, "Signal alpha for the uncertainty formula");
    y->add_option("--beta", an.beta, "Postselection offset beta for the uncertainty formula");
    y->add_option("--lambda0-nm", an.lambda0_nm, "Centre wavelength")->capture_default_str();
    y->add_option("--delta-lambda-nm", an.delta_lambda_nm, "Line width (FWHM)")->capture_default_str();
    y->add_option("--resolution-nm", an.resolution_nm, "Spectrometer resolution")->capture_default_str();

    WaveplateArgs wp;
    auto* p = app.add_subcommand("waveplate", "Retardance and pivot delay of the compound plate (JSON)");
    p->add_option("--config", wp.config, "Run configuration JSON (plates section)");
    p->add_option("--theta", wp.theta, "External tilt (rad)")->capture_default_str();
    p->add_option("--lambda-nm", wp.lambda_nm, "Wavelength")->capture_default_str();
    p->add_option("--xi", wp.xi, "Internal azimuth (rad); default theta/n for a positive pivot");
    p->add_option("--psi", wp.psi, "Internal elevation (rad); default theta/n for a negative pivot");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& err) {
        return app.exit(err);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return kExitFormat;
    }

    try {
        if (*s) return cmd_simulate(sim);
        if (*e) return cmd_estimate(est);
        if (*w) return cmd_sweep(sw);
        if (*n) return cmd_snr(snr);
        if (*y) return cmd_analytic(an);
        if (*p) return cmd_waveplate(wp);
    } catch (const wd::FormatError& err) {
        std::cerr << "format error: " << err.what() << '\n';
        std::cout << wd::io::error_to_json("", "format", err.what()).dump() << '\n';
        return kExitFormat;
    } catch (const wd::DomainError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitModel;
    } catch (const wd::ModelError& err) {
        std::cerr << "model error: " << err.what() << '\n';
        return kExitModel;
    }
    return 0;
}
