#pragma once

// Umbrella header.

#include "basics.hpp"           // IWYU pragma: export
#include "config.hpp"           // IWYU pragma: export
#include "harness.hpp"          // IWYU pragma: export
#include "interval_set.hpp"     // IWYU pragma: export
#include "learner.hpp"          // IWYU pragma: export
#include "learners.hpp"         // IWYU pragma: export
#include "processes.hpp"        // IWYU pragma: export
#include "reductions.hpp"       // IWYU pragma: export
#include "rng.hpp"              // IWYU pragma: export
#include "value_space.hpp"      // IWYU pragma: export
#include "verify.hpp"           // IWYU pragma: export
