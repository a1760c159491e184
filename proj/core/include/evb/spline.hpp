#pragma once

#include <array>
#include <vector>

#include "evb/types.hpp"

namespace evb {

// Cardinal basis of the natural cubic spline with the given knots: column j is
// the spline through e_j at the knots. Linear beyond the boundary knots.
// Columns sum to 1 at every point since constants lie in the space.
Matrix natural_spline_basis(const Vector& grid, const std::vector<double>& knots);

// Intraday seasonal regressors. Rows are time points 0..T-1 with position
// (t mod day_length) inside the trading day; four knots are given as positions
// within the day. Returns the T x 3 zero-sum basis
//   W~_j = W_j - W_4 * mean(W_j) / mean(W_4),  j = 1..3,
// with means taken over the T rows, so every column sums to zero.
Matrix build_seasonal_basis(int T, int day_length, const std::array<int, 4>& knots);

inline constexpr int kDefaultDayLength = 1559;  // 15-second grid, 9:30:30 to 16:00:00

// 9:30:30, 10:00:30, 12:30:00 and 16:00:00 on the default grid, rescaled
// proportionally for other day lengths (evenly spaced when that collides).
std::array<int, 4> default_knots(int day_length);

}  // namespace evb
