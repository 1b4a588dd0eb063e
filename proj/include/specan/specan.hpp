#pragma once

// Umbrella header for the whole library.

#include "specan/baselines.hpp"
#include "specan/config.hpp"
#include "specan/dataset.hpp"
#include "specan/errors.hpp"
#include "specan/evaluation.hpp"
#include "specan/experiment.hpp"
#include "specan/fft.hpp"
#include "specan/io.hpp"
#include "specan/mat.hpp"
#include "specan/mlp.hpp"
#include "specan/rng.hpp"
#include "specan/scoring.hpp"
#include "specan/signal.hpp"
#include "specan/spectrogram.hpp"
#include "specan/vae.hpp"
