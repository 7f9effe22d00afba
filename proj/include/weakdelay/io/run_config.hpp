#pragma once

// JSON run configuration. Physical quantities carry their unit in the key
// name; unknown keys are rejected and missing ones take the defaults below.
// See docs/config-schema.md.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>

#include "json.hpp"

#include "weakdelay/constants.hpp"
#include "weakdelay/errors.hpp"
#include "weakdelay/polarization.hpp"
#include "weakdelay/simulator.hpp"
#include "weakdelay/spectrum.hpp"
#include "weakdelay/waveplate.hpp"

namespace weakdelay::io {

using nlohmann::json;

struct RunConfig {
    ExperimentConfig experiment;
    double qwp_design_nm = kDefaultCenterNm;
    std::optional<double> theta_rad; // when set, tau comes from the plate pivot
    double h1_mm = default_plate_stack().h1() * 1e3;
    double h2_mm = default_plate_stack().h2() * 1e3;
    DispersionModel dispersion = quartz_sellmeier();
    int pivot_sign = +1;

    PlateStack plate_stack() const { return {h1_mm * 1e-3, h2_mm * 1e-3, dispersion}; }

    /// Experiment with tau resolved from theta when a tilt was given.
    ExperimentConfig resolved() const {
        ExperimentConfig c = experiment;
        if (theta_rad) c.tau_s = pivot_delay(*theta_rad, plate_stack(), c.source.center_nm * 1e-9, pivot_sign);
        return c;
    }
};

namespace detail {

inline void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw FormatError(where + " must be a JSON object");
    for (const auto& [key, _] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            throw FormatError("unknown key '" + key + "' in " + where);
        }
    }
}

inline double get_number(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw FormatError(std::string("key '") + key + "' must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw FormatError(std::string("key '") + key + "' must be finite");
    return d;
}

inline std::uint64_t get_count(const json& obj, const char* key, std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw FormatError(std::string("key '") + key + "' must be a nonnegative integer");
    }
    return v.get<std::uint64_t>();
}

inline std::string get_string(const json& obj, const char* key, const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_string()) throw FormatError(std::string("key '") + key + "' must be a string");
    return v.get<std::string>();
}

inline std::size_t line_of_offset(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

} // namespace detail

inline RunConfig run_config_from_json(const json& j) {
    using namespace detail;
    RunConfig rc;
    reject_unknown(j,
                   {"source", "phi_actual_rad", "phi_assumed_rad", "qwp", "photons", "seed", "tau_fs", "theta_rad",
                    "noise", "plates"},
                   "config");
    auto& ex = rc.experiment;
    if (j.contains("source")) {
        const auto& s = j.at("source");
        reject_unknown(s, {"center_nm", "fwhm_nm", "grid_min_nm", "grid_max_nm", "grid_step_nm", "shape"}, "source");
        ex.source.center_nm = get_number(s, "center_nm", ex.source.center_nm);
        ex.source.fwhm_nm = get_number(s, "fwhm_nm", ex.source.fwhm_nm);
        ex.source.min_nm = get_number(s, "grid_min_nm", ex.source.min_nm);
        ex.source.max_nm = get_number(s, "grid_max_nm", ex.source.max_nm);
        ex.source.step_nm = get_number(s, "grid_step_nm", ex.source.step_nm);
        const auto shape = get_string(s, "shape", "gaussian");
        if (shape == "gaussian") {
            ex.source.shape = LineShape::Gaussian;
        } else if (shape == "lorentzian") {
            ex.source.shape = LineShape::Lorentzian;
        } else {
            throw FormatError("source.shape must be 'gaussian' or 'lorentzian'");
        }
    }
    ex.phi_actual = get_number(j, "phi_actual_rad", ex.phi_actual);
    ex.phi_assumed = get_number(j, "phi_assumed_rad", ex.phi_actual);
    if (j.contains("qwp")) {
        const auto& q = j.at("qwp");
        reject_unknown(q, {"model", "design_nm"}, "qwp");
        rc.qwp_design_nm = get_number(q, "design_nm", rc.qwp_design_nm);
        const auto model = get_string(q, "model", "ideal");
        if (model == "ideal") {
            ex.qwp = QwpIdeal{};
        } else if (model == "dispersive") {
            ex.qwp = dispersive_qwp_for_design_wavelength(rc.qwp_design_nm);
        } else if (model == "absent") {
            ex.qwp = QwpAbsent{};
        } else {
            throw FormatError("qwp.model must be 'ideal', 'dispersive' or 'absent'");
        }
    }
    ex.photons = get_count(j, "photons", ex.photons);
    ex.seed = get_count(j, "seed", ex.seed);
    if (j.contains("tau_fs") && j.contains("theta_rad")) throw FormatError("give either tau_fs or theta_rad, not both");
    ex.tau_s = fs_to_seconds(get_number(j, "tau_fs", 0.0));
    if (j.contains("theta_rad")) rc.theta_rad = get_number(j, "theta_rad", 0.0);
    const auto noise = get_string(j, "noise", "multinomial");
    if (noise == "multinomial") {
        ex.noise = NoiseModel::Multinomial;
    } else if (noise == "poisson") {
        ex.noise = NoiseModel::Poisson;
    } else {
        throw FormatError("noise must be 'multinomial' or 'poisson'");
    }
    if (j.contains("plates")) {
        const auto& p = j.at("plates");
        reject_unknown(p, {"h1_mm", "h2_mm", "dispersion", "pivot_sign"}, "plates");
        rc.h1_mm = get_number(p, "h1_mm", rc.h1_mm);
        rc.h2_mm = get_number(p, "h2_mm", rc.h2_mm);
        const double sign = get_number(p, "pivot_sign", 1.0);
        if (sign != 1.0 && sign != -1.0) throw FormatError("plates.pivot_sign must be 1 or -1");
        rc.pivot_sign = static_cast<int>(sign);
        if (p.contains("dispersion")) {
            const auto& d = p.at("dispersion");
            reject_unknown(d, {"model", "n_o", "n_e"}, "plates.dispersion");
            const auto model = get_string(d, "model", "quartz");
            if (model == "quartz") {
                if (d.contains("n_o") || d.contains("n_e")) throw FormatError("quartz dispersion takes no indices");
                rc.dispersion = quartz_sellmeier();
            } else if (model == "constant") {
                if (!d.contains("n_o") || !d.contains("n_e")) throw FormatError("constant dispersion needs n_o and n_e");
                rc.dispersion = ConstantIndexModel{get_number(d, "n_o", 0.0), get_number(d, "n_e", 0.0)};
            } else {
                throw FormatError("plates.dispersion.model must be 'quartz' or 'constant'");
            }
        }
    }
    // Surface physical-domain problems as configuration errors.
    try {
        ex.validate();
        (void)rc.plate_stack();
        if (rc.experiment.source.min_nm >= rc.experiment.source.max_nm) throw DomainError("grid_min_nm must be below grid_max_nm");
    } catch (const DomainError& e) {
        throw FormatError(std::string("invalid config: ") + e.what());
    }
    return rc;
}

inline json run_config_to_json(const RunConfig& rc) {
    const auto& ex = rc.experiment;
    json j;
    j["source"] = {{"center_nm", ex.source.center_nm},
                   {"fwhm_nm", ex.source.fwhm_nm},
                   {"grid_min_nm", ex.source.min_nm},
                   {"grid_max_nm", ex.source.max_nm},
                   {"grid_step_nm", ex.source.step_nm},
                   {"shape", ex.source.shape == LineShape::Gaussian ? "gaussian" : "lorentzian"}};
    j["phi_actual_rad"] = ex.phi_actual;
    j["phi_assumed_rad"] = ex.phi_assumed;
    j["qwp"] = {{"model", qwp_name(ex.qwp)}, {"design_nm", rc.qwp_design_nm}};
    j["photons"] = ex.photons;
    j["seed"] = ex.seed;
    if (rc.theta_rad) {
        j["theta_rad"] = *rc.theta_rad;
    } else {
        j["tau_fs"] = seconds_to_fs(ex.tau_s);
    }
    j["noise"] = ex.noise == NoiseModel::Multinomial ? "multinomial" : "poisson";
    json disp;
    if (const auto* c = std::get_if<ConstantIndexModel>(&rc.dispersion)) {
        disp = {{"model", "constant"}, {"n_o", c->n_o}, {"n_e", c->n_e}};
    } else {
        disp = {{"model", "quartz"}};
    }
    j["plates"] = {{"h1_mm", rc.h1_mm}, {"h2_mm", rc.h2_mm}, {"dispersion", disp}, {"pivot_sign", rc.pivot_sign}};
    return j;
}

inline RunConfig parse_run_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t line = detail::line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1);
        throw FormatError("line " + std::to_string(line) + ": " + e.what(), line);
    }
    try {
        return run_config_from_json(j);
    } catch (const json::exception& e) {
        throw FormatError(std::string("config: ") + e.what());
    }
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_run_config(ss.str());
    } catch (const FormatError& e) {
        throw FormatError(path + ": " + e.what(), e.line());
    }
}

} // namespace weakdelay::io
