#pragma once

#include "rmt/airy.hpp"
#include "rmt/errors.hpp"
#include "rmt/fredholm.hpp"
#include "rmt/inference.hpp"
#include "rmt/laws.hpp"
#include "rmt/linalg.hpp"
#include "rmt/painleve.hpp"
#include "rmt/quadrature.hpp"
#include "rmt/simulate.hpp"
#include "rmt/tracy_widom.hpp"

namespace rmt {
inline constexpr const char* kVersion = "0.1.0";
}
