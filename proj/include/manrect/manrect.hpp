#pragma once

// Umbrella include for the whole pipeline: geometry, consistency measure,
// optimizer, detection, rectification, metrics, synthetic scenes, file I/O,
// warping, and the CLI entry point.

#include "manrect/geom.hpp"         // IWYU pragma: export
#include "manrect/consistency.hpp"  // IWYU pragma: export
#include "manrect/optimize.hpp"     // IWYU pragma: export
#include "manrect/vp_detect.hpp"    // IWYU pragma: export
#include "manrect/rectify.hpp"      // IWYU pragma: export
#include "manrect/metrics.hpp"      // IWYU pragma: export
#include "manrect/synth.hpp"        // IWYU pragma: export
#include "manrect/io.hpp"           // IWYU pragma: export
#include "manrect/warp.hpp"         // IWYU pragma: export
#include "manrect/cli.hpp"          // IWYU pragma: export
