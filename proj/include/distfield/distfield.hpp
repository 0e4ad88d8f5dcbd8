#pragma once

// Umbrella header for the distortion-field estimation library.

#include "distfield/common.hpp"
#include "distfield/error.hpp"
#include "distfield/image.hpp"
#include "distfield/image_io.hpp"
#include "distfield/minutiae.hpp"
#include "distfield/rigid.hpp"
#include "distfield/field.hpp"
#include "distfield/tps.hpp"
#include "distfield/warp.hpp"
#include "distfield/synth.hpp"
#include "distfield/tensor.hpp"
#include "distfield/losses.hpp"
#include "distfield/network.hpp"
#include "distfield/optim.hpp"
#include "distfield/pca.hpp"
#include "distfield/eval_metrics.hpp"
