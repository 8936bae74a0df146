#pragma once

// Umbrella header for the whole toolkit.

#include "sdacs/dataset.hpp"
#include "sdacs/errors.hpp"
#include "sdacs/haar.hpp"
#include "sdacs/image.hpp"
#include "sdacs/ista.hpp"
#include "sdacs/manifest.hpp"
#include "sdacs/measurement.hpp"
#include "sdacs/metrics.hpp"
#include "sdacs/model.hpp"
#include "sdacs/model_io.hpp"
#include "sdacs/numeric.hpp"
#include "sdacs/parallel.hpp"
#include "sdacs/pipeline.hpp"
#include "sdacs/prng.hpp"
#include "sdacs/synthetic.hpp"
#include "sdacs/training.hpp"
#include "sdacs/version.hpp"
