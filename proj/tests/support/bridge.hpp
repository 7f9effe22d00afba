#pragma once

// Oracle records as library records.

#include "support/oracles.hpp"
#include "weakdelay/spectrum.hpp"

inline weakdelay::MeasurementRecord to_library(const oracle::Record& r) {
    return {weakdelay::Spectrum(r.nm, r.q1), weakdelay::Spectrum(r.nm, r.q2)};
}
