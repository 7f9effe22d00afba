#pragma once

// Histogrammed spectra over a wavelength grid. Each bin is a point mass at
// the angular frequency of its wavelength sample; no d(lambda)/d(omega)
// Jacobian is applied since the weights are per-bin counts.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "weakdelay/constants.hpp"
#include "weakdelay/errors.hpp"
#include "weakdelay/polarization.hpp"

namespace weakdelay {

class Spectrum {
public:
    Spectrum(std::vector<double> grid_nm, std::vector<double> weights)
        : grid_nm_(std::move(grid_nm)), weights_(std::move(weights)) {
        if (grid_nm_.size() != weights_.size()) {
            throw DomainError("spectrum grid and weights differ in length");
        }
        if (grid_nm_.size() < 2) {
            throw DomainError("spectrum needs at least 2 samples");
        }
        for (std::size_t i = 0; i < grid_nm_.size(); ++i) {
            if (!(grid_nm_[i] > 0.0) || !std::isfinite(grid_nm_[i])) {
                throw DomainError("spectrum wavelengths must be positive and finite");
            }
            if (i > 0 && !(grid_nm_[i] > grid_nm_[i - 1])) {
                throw DomainError("spectrum grid must be strictly increasing");
            }
            if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i])) {
                throw DomainError("spectrum weights must be nonnegative and finite");
            }
        }
    }

    const std::vector<double>& grid_nm() const noexcept { return grid_nm_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    std::size_t size() const noexcept { return grid_nm_.size(); }

    double total() const noexcept { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

    bool is_normalized(double tol = 1e-9) const noexcept { return std::abs(total() - 1.0) <= tol; }

    Spectrum normalized() const {
        const double t = total();
        if (!(t > 0.0)) {
            throw DegenerateError("cannot normalize an empty spectrum");
        }
        std::vector<double> w(weights_);
        for (double& x : w) x /= t;
        return {grid_nm_, std::move(w)};
    }

    std::vector<double> angular_frequencies() const {
        std::vector<double> omega(grid_nm_.size());
        for (std::size_t i = 0; i < grid_nm_.size(); ++i) {
            omega[i] = wavelength_to_angular_frequency(grid_nm_[i]);
        }
        return omega;
    }

private:
    std::vector<double> grid_nm_;
    std::vector<double> weights_;
};

/// Evenly spaced wavelength grid min, min+step, ..., max (inclusive).
inline std::vector<double> uniform_grid_nm(double min_nm, double max_nm, double step_nm) {
    if (!(step_nm > 0.0) || !(max_nm > min_nm) || !(min_nm > 0.0)) {
        throw DomainError("invalid wavelength grid bounds");
    }
    const auto n = static_cast<std::size_t>(std::llround((max_nm - min_nm) / step_nm)) + 1;
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i) grid[i] = min_nm + static_cast<double>(i) * step_nm;
    return grid;
}

enum class LineShape { Gaussian, Lorentzian };

struct SourceParameters {
    double center_nm = kDefaultCenterNm;
    double fwhm_nm = kDefaultFwhmNm;
    double min_nm = kDefaultGridMinNm;
    double max_nm = kDefaultGridMaxNm;
    double step_nm = kDefaultGridStepNm;
    LineShape shape = LineShape::Gaussian;
};

/// Normalized source spectrum P0 sampled on the configured grid.
inline Spectrum make_source_spectrum(const SourceParameters& p) {
    if (!(p.fwhm_nm > 0.0)) throw DomainError("source FWHM must be positive");
    auto grid = uniform_grid_nm(p.min_nm, p.max_nm, p.step_nm);
    std::vector<double> w(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d = grid[i] - p.center_nm;
        switch (p.shape) {
        case LineShape::Gaussian: {
            const double sigma = p.fwhm_nm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
            w[i] = std::exp(-0.5 * d * d / (sigma * sigma));
            break;
        }
        case LineShape::Lorentzian: {
            const double hw = 0.5 * p.fwhm_nm;
            w[i] = hw * hw / (d * d + hw * hw);
            break;
        }
        }
    }
    return Spectrum(std::move(grid), std::move(w)).normalized();
}

struct RecordMetadata {
    double phi_nominal = kJwmPhi;
    std::uint64_t seed = 0;
    std::string qwp = "ideal";
};

/// Paired per-port spectra on a shared grid.
class MeasurementRecord {
public:
    MeasurementRecord(Spectrum port1, Spectrum port2, double total_events = 0.0, RecordMetadata meta = {})
        : port1_(std::move(port1)), port2_(std::move(port2)), total_events_(total_events), meta_(std::move(meta)) {
        if (port1_.grid_nm() != port2_.grid_nm()) {
            throw DomainError("record ports must share an identical grid");
        }
        const double sum = port1_.total() + port2_.total();
        if (total_events_ == 0.0) {
            total_events_ = sum;
        } else if (std::abs(total_events_ - sum) > 1e-9 * std::max(1.0, sum)) {
            throw DomainError("record total_events does not match the summed port counts");
        }
        if (!(total_events_ > 0.0)) throw DegenerateError("record contains no events");
    }

    const Spectrum& port(int j) const {
        switch (j) {
        case 1: return port1_;
        case 2: return port2_;
        default: throw DomainError("record port must be 1 or 2");
        }
    }
    const Spectrum& port1() const noexcept { return port1_; }
    const Spectrum& port2() const noexcept { return port2_; }
    const std::vector<double>& grid_nm() const noexcept { return port1_.grid_nm(); }
    std::size_t size() const noexcept { return port1_.size(); }
    double total_events() const noexcept { return total_events_; }
    const RecordMetadata& metadata() const noexcept { return meta_; }

    MeasurementRecord swapped_ports() const { return {port2_, port1_, total_events_, meta_}; }

    MeasurementRecord scaled(double factor) const {
        auto scale = [factor](const Spectrum& s) {
            std::vector<double> w(s.weights());
            for (double& x : w) x *= factor;
            return Spectrum(s.grid_nm(), std::move(w));
        };
        return {scale(port1_), scale(port2_), total_events_ * factor, meta_};
    }

private:
    Spectrum port1_;
    Spectrum port2_;
    double total_events_;
    RecordMetadata meta_;
};

/// Moments of one port against the sub-normalized measure Q_j = counts_j /
/// total (both ports), so that p0 = sum Q_j = P_fj.
class SpectralMoments {
public:
    SpectralMoments(double p0, double m1, double m2) : p0_(p0), m1_(m1), m2_(m2) {}

    double p0() const noexcept { return p0_; }
    double m1() const noexcept { return m1_; }
    double m2() const noexcept { return m2_; }
    bool has_normalized() const noexcept { return p0_ > 0.0; }

    double m1_bar() const {
        require_nonempty();
        return m1_ / p0_;
    }
    double m2_bar() const {
        require_nonempty();
        return m2_ / p0_;
    }
    double variance() const { return m2_bar() - m1_bar() * m1_bar(); }

private:
    void require_nonempty() const {
        if (!has_normalized()) throw DegenerateError("port is empty; normalized moments undefined");
    }

    double p0_;
    double m1_;
    double m2_;
};

inline SpectralMoments moments(const Spectrum& port, double normalize_by_total) {
    if (!(normalize_by_total > 0.0)) throw DomainError("moment normalization total must be positive");
    double p0 = 0.0, m1 = 0.0, m2 = 0.0;
    const auto& grid = port.grid_nm();
    const auto& w = port.weights();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (w[i] == 0.0) continue;
        const double q = w[i] / normalize_by_total;
        const double omega = wavelength_to_angular_frequency(grid[i]);
        p0 += q;
        m1 += q * omega;
        m2 += q * omega * omega;
    }
    return {p0, m1, m2};
}

inline std::pair<SpectralMoments, SpectralMoments> moments(const MeasurementRecord& r) {
    return {moments(r.port1(), r.total_events()), moments(r.port2(), r.total_events())};
}

/// Mean and variance of omega over the pooled (port1 + port2) spectrum.
struct PooledStatistics {
    double mean;
    double variance;
};

inline PooledStatistics pooled_statistics(const MeasurementRecord& r) {
    const auto omega = r.port1().angular_frequencies();
    const auto& w1 = r.port1().weights();
    const auto& w2 = r.port2().weights();
    double total = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < omega.size(); ++i) {
        total += w1[i] + w2[i];
        mean += (w1[i] + w2[i]) * omega[i];
    }
    if (!(total > 0.0)) throw DegenerateError("record contains no events");
    mean /= total;
    double var = 0.0;
    for (std::size_t i = 0; i < omega.size(); ++i) {
        const double d = omega[i] - mean;
        var += (w1[i] + w2[i]) * d * d;
    }
    return {mean, var / total};
}

/// Mean angular frequency of a normalized source spectrum.
inline double mean_angular_frequency(const Spectrum& s) {
    const auto m = moments(s, s.total());
    return m.m1_bar();
}

} // namespace weakdelay
