#pragma once

#include "eville/errors.hpp"
#include "eville/estimate.hpp"
#include "eville/evidence.hpp"
#include "eville/families.hpp"
#include "eville/format.hpp"
#include "eville/linecross.hpp"
#include "eville/mc.hpp"
#include "eville/numeric.hpp"
#include "eville/oracles.hpp"
#include "eville/paths.hpp"
#include "eville/process.hpp"
#include "eville/rng.hpp"
#include "eville/slln.hpp"

namespace eville {
inline constexpr const char* kVersion = "0.1.0";
}
