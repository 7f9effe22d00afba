#pragma once

#include <cmath>
#include <string>

#include "json.hpp"

#include "weakdelay/constants.hpp"
#include "weakdelay/estimators.hpp"

namespace weakdelay::io {

using nlohmann::json;

namespace detail {
// JSON has no inf/nan; emit null for those.
inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
} // namespace detail

inline json result_to_json(const EstimationResult& r) {
    json d = json::object();
    const auto& diag = r.diagnostics;
    if (diag.likelihood_residual) d["likelihood_residual"] = detail::number_or_null(*diag.likelihood_residual);
    if (diag.bracket_width_s) d["bracket_width_s"] = detail::number_or_null(*diag.bracket_width_s);
    d["iterations"] = diag.iterations;
    if (diag.port_probabilities) {
        d["port_probabilities"] = {{"p_f1", diag.port_probabilities->first}, {"p_f2", diag.port_probabilities->second}};
    }
    json moments = json::object();
    for (const auto& [name, value] : diag.moments_used) moments[name] = detail::number_or_null(value);
    d["moments_used"] = moments;
    d["warnings"] = diag.warnings;
    return {{"method", std::string(method_name(r.method))},
            {"tau_s", detail::number_or_null(r.tau_hat_s)},
            {"tau_fs", detail::number_or_null(seconds_to_fs(r.tau_hat_s))},
            {"diagnostics", d}};
}

inline json error_to_json(const std::string& method, const std::string& kind, const std::string& message) {
    return {{"method", method}, {"error", {{"kind", kind}, {"message", message}}}};
}

} // namespace weakdelay::io
