#include "bitsi/layout.hpp"

#include <algorithm>

namespace bitsi::layout {

int band_height(int image_height, int num_vars) {
	if (image_height < 1 || num_vars < 1)
		throw Error("band_height: image height and variable count must be >= 1");
	return std::max(1, image_height / std::max(1, num_vars));
}

std::pair<int, int> var_y_range(int var_1b, int image_height, int num_vars) {
	if (var_1b < 1 || var_1b > num_vars)
		throw IndexOutOfRange("variable " + std::to_string(var_1b) + " of " + std::to_string(num_vars));
	const int h = band_height(image_height, num_vars);
	return {(var_1b - 1) * h, var_1b * h - 1};
}

std::pair<int, int> cycle_x_span(int cycle_1b, const LayoutSpec& layout) {
	if (cycle_1b < 1 || cycle_1b > layout.total_cycles)
		throw IndexOutOfRange("cycle " + std::to_string(cycle_1b) + " of " +
		                      std::to_string(layout.total_cycles));
	const long long w = layout.image_width;
	const long long c = layout.total_cycles;
	const long long j = cycle_1b;
	const int x1 = static_cast<int>(((j - 1) * w) / c);
	const int x2 = static_cast<int>((j * w) / c) - 1;
	return {x1, x2};
}

BBox cycle_bbox(int var_1b, int cycle_1b, const LayoutSpec& layout) {
	const auto [x1, x2] = cycle_x_span(cycle_1b, layout);
	const auto [y1, y2] = var_y_range(var_1b, layout.image_height, layout.num_vars);
	return BBox{x1, y1, x2, y2};
}

BBox cycle_run_bbox(int var_1b, int first_cycle_1b, int last_cycle_1b, const LayoutSpec& layout) {
	if (first_cycle_1b > last_cycle_1b)
		throw IndexOutOfRange("empty cycle run");
	BBox first = cycle_bbox(var_1b, first_cycle_1b, layout);
	BBox last = cycle_bbox(var_1b, last_cycle_1b, layout);
	return BBox{first.x1, first.y1, last.x2, last.y2};
}

} // namespace bitsi::layout
