#pragma once

// Umbrella header for the item-centric exploration library.

#include "explore/audit.hpp"
#include "explore/bayes.hpp"
#include "explore/calibration.hpp"
#include "explore/config.hpp"
#include "explore/errors.hpp"
#include "explore/experiment.hpp"
#include "explore/pipeline.hpp"
#include "explore/report.hpp"
#include "explore/rng.hpp"
#include "explore/stats_store.hpp"
#include "explore/world.hpp"
