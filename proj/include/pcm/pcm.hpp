// Umbrella header.

#pragma once

#include "pcm/channel.hpp"
#include "pcm/common.hpp"
#include "pcm/constellation.hpp"
#include "pcm/construction.hpp"
#include "pcm/crc.hpp"
#include "pcm/labelsearch.hpp"
#include "pcm/polar.hpp"
#include "pcm/quadrature.hpp"
#include "pcm/rng.hpp"
#include "pcm/simulator.hpp"

namespace pcm {
inline constexpr const char* kVersion = "0.1.0";
}
