#pragma once

// Umbrella header for the texloss library.

#include "texloss/aggregation.hpp"
#include "texloss/analysis.hpp"
#include "texloss/descriptors.hpp"
#include "texloss/error.hpp"
#include "texloss/glcm.hpp"
#include "texloss/grad.hpp"
#include "texloss/image.hpp"
#include "texloss/io.hpp"
#include "texloss/matrix.hpp"
#include "texloss/metrics.hpp"
#include "texloss/mste.hpp"
#include "texloss/optimize.hpp"
#include "texloss/parallel.hpp"
#include "texloss/preprocess.hpp"
#include "texloss/rng.hpp"
#include "texloss/scaling_bench.hpp"
