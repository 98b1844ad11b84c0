#pragma once

// Umbrella header for the parallel-beam CT toolkit: simulation, analytic and
// algebraic reconstruction, and the from-scratch training pipelines.

#include "ctkit/acquisition.hpp"
#include "ctkit/arch.hpp"
#include "ctkit/common.hpp"
#include "ctkit/dataset.hpp"
#include "ctkit/evaluate.hpp"
#include "ctkit/fbp.hpp"
#include "ctkit/filter.hpp"
#include "ctkit/geometry.hpp"
#include "ctkit/image.hpp"
#include "ctkit/io.hpp"
#include "ctkit/metrics.hpp"
#include "ctkit/nn/checkpoint.hpp"
#include "ctkit/nn/network.hpp"
#include "ctkit/nn/optim.hpp"
#include "ctkit/nn/tensor.hpp"
#include "ctkit/parallel.hpp"
#include "ctkit/phantom.hpp"
#include "ctkit/projector.hpp"
#include "ctkit/sinogram.hpp"
#include "ctkit/sirt.hpp"
#include "ctkit/train.hpp"
