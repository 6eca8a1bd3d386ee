#pragma once

// Domain model
#include "ponsep/geometry.hpp"
#include "ponsep/model.hpp"

// Splitter math and waveform synthesis
#include "ponsep/superpose.hpp"
#include "ponsep/waveform.hpp"

// Separation
#include "ponsep/de.hpp"
#include "ponsep/separator.hpp"

// Tooling
#include "ponsep/calibration.hpp"
#include "ponsep/design_io.hpp"
#include "ponsep/harness.hpp"
#include "ponsep/random.hpp"
#include "ponsep/trace_io.hpp"
