#pragma once

#include "weakdelay/constants.hpp"
#include "weakdelay/errors.hpp"
#include "weakdelay/estimators.hpp"
#include "weakdelay/measurement_model.hpp"
#include "weakdelay/polarization.hpp"
#include "weakdelay/polynomial.hpp"
#include "weakdelay/simulator.hpp"
#include "weakdelay/spectrum.hpp"
#include "weakdelay/waveplate.hpp"
