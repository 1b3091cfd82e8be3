#pragma once

#include <utility>

#include "bitsi/core.hpp"

namespace bitsi::layout {

/// Inclusive pixel rectangle, y = 0 at the top row.
struct BBox {
	int x1 = 0;
	int y1 = 0;
	int x2 = 0;
	int y2 = 0;

	long long area() const { return (long long)(x2 - x1 + 1) * (long long)(y2 - y1 + 1); }
	friend bool operator==(const BBox&, const BBox&) = default;
};

/// h = max(1, floor(H / max(1, N))).
int band_height(int image_height, int num_vars);

/// Inclusive row range [y_start, y_end] of variable n's band.
std::pair<int, int> var_y_range(int var_1b, int image_height, int num_vars);

/// Inclusive column range [x1, x2] of 1-based cycle j. Spans are
/// computed in integer arithmetic ((j*W)/C, exact rational floor), so
/// they tile [0, W-1] with no gap or overlap; floating multiplication
/// of the fractional cycle width does not reproduce the same floors.
std::pair<int, int> cycle_x_span(int cycle_1b, const LayoutSpec& layout);

/// Pixel region of one cycle of one variable.
BBox cycle_bbox(int var_1b, int cycle_1b, const LayoutSpec& layout);

/// Union region of a contiguous cycle run [first, last] of one variable.
BBox cycle_run_bbox(int var_1b, int first_cycle_1b, int last_cycle_1b, const LayoutSpec& layout);

} // namespace bitsi::layout
