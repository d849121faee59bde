#pragma once

// Frozen outputs of the reference configuration (p = 3, a = 2 + cos 2 pi y +
// 10 exp(-|y|), f = 2x on (-1/2, 1/2)), used as regression anchors.

namespace baseline {

inline constexpr double eps[] = {0.1, 0.05, 0.01, 0.005, 0.001, 0.0005};
inline constexpr double R_per_Linf[] = {0.155803, 0.162711, 0.169632, 0.170456, 0.17111, 0.171191};
inline constexpr double R_Linf[] = {0.108839, 0.137471, 0.0658419, 0.0304791, 0.021639, 0.0132429};
inline constexpr double R_per_L2[] = {0.0638642, 0.050116, 0.0212713, 0.0147095, 0.00650866, 0.00458785};
inline constexpr double R_L2[] = {0.0385452, 0.0315894, 0.0074301, 0.00350942, 0.00084135, 0.000412048};
inline constexpr double C_eps[] = {-0.155298, -0.16286, -0.172404, -0.173593, -0.174546, -0.174663};

inline constexpr double a_star = 1.798102407346934;
inline constexpr double C_star = -0.174781;

}  // namespace baseline
