#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "weakdelay/io/record_csv.hpp"
#include "weakdelay/io/result_json.hpp"
#include "weakdelay/io/run_config.hpp"
#include "weakdelay/simulator.hpp"

using namespace weakdelay;
using namespace weakdelay::io;

namespace {

std::size_t csv_error_line(const std::string& body) {
    std::istringstream is(std::string(kRecordHeader) + "\n" + body);
    try {
        read_record_csv(is);
    } catch (const FormatError& e) {
        return e.line();
    }
    return 0;
}

} // namespace

TEST(RecordCsv, RoundTripIsBitIdentical) {
    ExperimentConfig c;
    c.tau_s = 3.3e-18;
    c.phi_actual = 0.77;
    const auto r = simulate(c); // noise-free weights exercise all 17 digits
    std::stringstream ss;
    write_record_csv(ss, r);
    const auto back = read_record_csv(ss);
    EXPECT_EQ(back.grid_nm(), r.grid_nm());
    EXPECT_EQ(back.port1().weights(), r.port1().weights());
    EXPECT_EQ(back.port2().weights(), r.port2().weights());
}

TEST(RecordCsv, ToleratesWhitespaceAndCrlf) {
    std::istringstream is(std::string(kRecordHeader) + "\r\n 700 , 1 , 2\r\n701,3,4\r\n\n");
    const auto r = read_record_csv(is);
    EXPECT_EQ(r.size(), 2u);
    EXPECT_EQ(r.port2().weights()[1], 4.0);
}

TEST(RecordCsv, MalformedRowsReportLineNumbers) {
    EXPECT_EQ(csv_error_line("700,1,2\n701,1\n"), 3u);
    EXPECT_EQ(csv_error_line("700,1,2\n701,x,2\n"), 3u);
    EXPECT_EQ(csv_error_line("700,1,2\n701,nan,2\n"), 3u);
    EXPECT_EQ(csv_error_line("700,1,2\n701,1,-2\n"), 3u);
    EXPECT_EQ(csv_error_line("-700,1,2\n701,1,2\n"), 2u);
    EXPECT_EQ(csv_error_line("700,1,2\n700,1,2\n"), 3u);
    EXPECT_EQ(csv_error_line("701,1,2\n700,1,2\n"), 3u);
    EXPECT_EQ(csv_error_line("700,1,2,5\n701,1,2\n"), 2u);
    EXPECT_NE(csv_error_line("700,1,2\n"), 0u);
    EXPECT_NE(csv_error_line("700,0,0\n701,0,0\n"), 0u);
}

TEST(RecordCsv, HeaderRequired) {
    std::istringstream bad("lambda,a,b\n700,1,2\n701,1,2\n");
    try {
        read_record_csv(bad);
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_EQ(e.line(), 1u);
    }
    std::istringstream empty("");
    EXPECT_THROW(read_record_csv(empty), FormatError);
    EXPECT_THROW(read_record_csv(std::string("/nonexistent/record.csv")), FormatError);
}

TEST(RunConfig, DefaultsFromEmptyObject) {
    const auto rc = parse_run_config("{}");
    EXPECT_DOUBLE_EQ(rc.experiment.phi_actual, kJwmPhi);
    EXPECT_DOUBLE_EQ(rc.experiment.phi_assumed, kJwmPhi);
    EXPECT_EQ(rc.experiment.photons, 0u);
    EXPECT_TRUE(std::holds_alternative<QwpIdeal>(rc.experiment.qwp));
    EXPECT_DOUBLE_EQ(rc.experiment.source.center_nm, 780.0);
    EXPECT_FALSE(rc.theta_rad.has_value());
}

TEST(RunConfig, ParsesFields) {
    const auto rc = parse_run_config(R"({
        "source": {"center_nm": 800, "fwhm_nm": 20, "grid_step_nm": 0.2},
        "phi_actual_rad": 0.03, "photons": 1000, "seed": 4, "tau_fs": 0.01,
        "qwp": {"model": "dispersive", "design_nm": 790},
        "noise": "poisson",
        "plates": {"h1_mm": 2.0, "h2_mm": 1.9, "dispersion": {"model": "constant", "n_o": 1.5, "n_e": 1.51}, "pivot_sign": -1}
    })");
    EXPECT_DOUBLE_EQ(rc.experiment.phi_assumed, 0.03);
    EXPECT_DOUBLE_EQ(rc.experiment.tau_s, 1e-17);
    EXPECT_EQ(rc.experiment.noise, NoiseModel::Poisson);
    EXPECT_NEAR(std::get<QwpDispersive>(rc.experiment.qwp).tau0_s,
                dispersive_qwp_for_design_wavelength(790.0).tau0_s, 1e-30);
    EXPECT_EQ(rc.pivot_sign, -1);
    EXPECT_DOUBLE_EQ(rc.plate_stack().indices(800e-9).n_e, 1.51);
}

TEST(RunConfig, ThetaResolvesDelay) {
    const auto rc = parse_run_config(R"({"theta_rad": 0.028})");
    const auto c = rc.resolved();
    EXPECT_NEAR(c.tau_s, pivot_delay(0.028, default_plate_stack(), 780e-9), 1e-30);
    EXPECT_GT(c.tau_s, 9e-18);
}

TEST(RunConfig, Rejections) {
    EXPECT_THROW(parse_run_config(R"({"phi": 1.0})"), FormatError);
    EXPECT_THROW(parse_run_config(R"({"source": {"centre_nm": 780}})"), FormatError);
    EXPECT_THROW(parse_run_config(R"({"tau_fs": 0.01, "theta_rad": 0.02})"), FormatError);
    EXPECT_THROW(parse_run_config(R"({"photons": -5})"), FormatError);
    EXPECT_THROW(parse_run_config(R"({"photons": 1.5})"), FormatError);
    EXPECT_THROW(parse_run_config(R"({"phi_actual_rad": 4.0})"), FormatError);
    EXPECT_THROW(parse_run_config(R"({"qwp": {"model": "wobbly"}})"), FormatError);
    EXPECT_THROW(parse_run_config(R"({"noise": "gaussian"})"), FormatError);
    EXPECT_THROW(parse_run_config(R"({"plates": {"pivot_sign": 2}})"), FormatError);
    EXPECT_THROW(parse_run_config(R"({"plates": {"dispersion": {"model": "constant", "n_o": 1.5}}})"), FormatError);
    EXPECT_THROW(parse_run_config(R"({"seed": "abc"})"), FormatError);
}

TEST(RunConfig, SyntaxErrorCarriesLine) {
    try {
        parse_run_config("{\n  \"seed\": 1,\n  \"photons\": ,\n}");
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(RunConfig, JsonRoundTrip) {
    const auto rc = parse_run_config(R"({"phi_actual_rad": 0.5, "phi_assumed_rad": 0.55, "photons": 7, "seed": 11,
        "tau_fs": 0.002, "qwp": {"model": "absent"}, "plates": {"h1_mm": 1.2, "h2_mm": 1.0}})");
    const auto back = run_config_from_json(run_config_to_json(rc));
    EXPECT_EQ(run_config_to_json(back), run_config_to_json(rc));
    EXPECT_DOUBLE_EQ(back.experiment.phi_assumed, 0.55);
    EXPECT_TRUE(std::holds_alternative<QwpAbsent>(back.experiment.qwp));
}

TEST(ResultJson, FieldsAndNullForNonFinite) {
    EstimationResult r;
    r.tau_hat_s = 1e-17;
    r.method = Method::Exact;
    r.diagnostics.likelihood_residual = 0.5;
    r.diagnostics.port_probabilities = std::pair{0.4, 0.6};
    r.diagnostics.moments_used = {{"x", INFINITY}};
    r.diagnostics.warnings = {"w"};
    const auto j = result_to_json(r);
    EXPECT_EQ(j["method"], "exact");
    EXPECT_DOUBLE_EQ(j["tau_fs"].get<double>(), 0.01);
    EXPECT_DOUBLE_EQ(j["diagnostics"]["port_probabilities"]["p_f2"].get<double>(), 0.6);
    EXPECT_TRUE(j["diagnostics"]["moments_used"]["x"].is_null());
    EXPECT_EQ(j["diagnostics"]["warnings"].size(), 1u);
    EXPECT_FALSE(j["diagnostics"].contains("bracket_width_s"));
    const auto e = error_to_json("quartic", "model", "no real roots");
    EXPECT_EQ(e["error"]["kind"], "model");
}
