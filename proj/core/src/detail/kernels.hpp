#pragma once

#include <algorithm>
#include <cmath>

namespace cegsr::detail {

inline int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

// Catmull-Rom cubic weight (a = -0.5) on the unscaled axis.
inline double cubic_weight(double x) {
    const double a = -0.5;
    x = std::fabs(x);
    if (x < 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0) return (((x - 5.0) * x + 8.0) * x - 4.0) * a;
    return 0.0;
}

} // namespace cegsr::detail
