#pragma once

// Corpus-scale spectral forensics: second-order statistics of image sets
// (power spectra, autocorrelations, radial/angular profiles), detectors
// for upsampling lattices and JPEG grid bias, and deterministic fixture
// synthesis to validate the detectors end to end.

#include "specprint/common.hpp"
#include "specprint/corpus.hpp"
#include "specprint/denoise.hpp"
#include "specprint/detect.hpp"
#include "specprint/extern_denoise.hpp"
#include "specprint/fft.hpp"
#include "specprint/image.hpp"
#include "specprint/parallel.hpp"
#include "specprint/pnm.hpp"
#include "specprint/profiles.hpp"
#include "specprint/report.hpp"
#include "specprint/rng.hpp"
#include "specprint/serialize.hpp"
#include "specprint/svg.hpp"
#include "specprint/synth.hpp"
