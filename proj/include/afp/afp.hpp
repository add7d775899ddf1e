#pragma once

// Umbrella header for the audio fingerprinting library.

#include "afp/audio.hpp"
#include "afp/error.hpp"
#include "afp/experiments.hpp"
#include "afp/fingerprint.hpp"
#include "afp/fir.hpp"
#include "afp/fixtures.hpp"
#include "afp/linalg.hpp"
#include "afp/manifest.hpp"
#include "afp/metrics.hpp"
#include "afp/parallel.hpp"
#include "afp/rng.hpp"
#include "afp/scoring.hpp"
#include "afp/spectrum.hpp"
