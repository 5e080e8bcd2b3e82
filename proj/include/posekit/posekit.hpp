#pragma once

#include "posekit/camera.hpp"
#include "posekit/error.hpp"
#include "posekit/gradient_check.hpp"
#include "posekit/io.hpp"
#include "posekit/loss.hpp"
#include "posekit/metrics.hpp"
#include "posekit/pair_set.hpp"
#include "posekit/parallel.hpp"
#include "posekit/procrustes.hpp"
#include "posekit/representation.hpp"
#include "posekit/skeleton.hpp"
#include "posekit/synth.hpp"
#include "posekit/trainer.hpp"
#include "posekit/types.hpp"
