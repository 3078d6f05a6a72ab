#pragma once

#include "roundfem/core.hpp"

namespace roundfem {

/// Sign of the signed area of triangle (a, b, c): +1 counterclockwise,
/// -1 clockwise, 0 collinear. Filtered double evaluation with an exact
/// expansion-arithmetic fallback.
int orient2d(Vec2 a, Vec2 b, Vec2 c);

/// Sign of the incircle determinant: +1 when d is strictly inside the
/// circumcircle of the counterclockwise triangle (a, b, c). Filtered double
/// evaluation with a double-double fallback; near-ties report 0.
int incircle(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

}  // namespace roundfem
