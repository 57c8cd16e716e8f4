#pragma once

// Umbrella header.

#include "posecast/augment.hpp"
#include "posecast/checkpoint.hpp"
#include "posecast/conformer_forecaster.hpp"
#include "posecast/errors.hpp"
#include "posecast/evaluate.hpp"
#include "posecast/forecaster.hpp"
#include "posecast/layout.hpp"
#include "posecast/metrics.hpp"
#include "posecast/nn/conformer.hpp"
#include "posecast/nn/core.hpp"
#include "posecast/nn/layers.hpp"
#include "posecast/nn/optimizer.hpp"
#include "posecast/noise.hpp"
#include "posecast/pose.hpp"
#include "posecast/render.hpp"
#include "posecast/report.hpp"
#include "posecast/ridge.hpp"
#include "posecast/rng.hpp"
#include "posecast/sequence.hpp"
#include "posecast/smf.hpp"
#include "posecast/synth.hpp"
#include "posecast/train.hpp"
#include "posecast/transforms.hpp"
#include "posecast/window.hpp"
