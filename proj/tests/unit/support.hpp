#pragma once

#include "doctest.h"

namespace testing {

// Purely relative comparison; doctest's default scale of 1 hides errors on small magnitudes.
inline doctest::Approx rel(double value, double eps) { return doctest::Approx(value).epsilon(eps).scale(0.0); }

}  // namespace testing
