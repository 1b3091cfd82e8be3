#include <doctest.h>

#include "bitsi/layout.hpp"
#include "bitsi/rng.hpp"

using namespace bitsi;
using layout::BBox;

namespace {

LayoutSpec make_layout(int h, int w, int n, int c) {
	LayoutSpec lay;
	lay.image_height = h;
	lay.image_width = w;
	lay.num_vars = n;
	lay.band_height = layout::band_height(h, n);
	lay.total_cycles = c;
	return lay;
}

} // namespace

TEST_CASE("band height golden values") {
	CHECK(layout::band_height(896, 3) == 298);
	CHECK(layout::band_height(896, 1) == 896);
	CHECK(layout::band_height(896, 2) == 448);
	CHECK(layout::band_height(10, 64) == 1); // floored at one pixel
}

TEST_CASE("variable y-ranges") {
	CHECK(layout::var_y_range(1, 896, 3) == std::pair{0, 297});
	CHECK(layout::var_y_range(2, 896, 3) == std::pair{298, 595});
	CHECK(layout::var_y_range(3, 896, 3) == std::pair{596, 893});
	// Exact tiling when N divides H.
	CHECK(layout::var_y_range(2, 896, 2).second == 895);
	CHECK_THROWS_AS(layout::var_y_range(4, 896, 3), IndexOutOfRange);
	CHECK_THROWS_AS(layout::var_y_range(0, 896, 3), IndexOutOfRange);
}

TEST_CASE("cycle bounding boxes match the worked geometry") {
	const LayoutSpec lay = make_layout(896, 896, 3, 10);
	CHECK(layout::cycle_bbox(2, 3, lay) == BBox{179, 298, 267, 595});
	CHECK(layout::cycle_bbox(3, 10, lay) == BBox{806, 596, 895, 893});
	CHECK(layout::cycle_x_span(7, lay) == std::pair{537, 626});
	CHECK(layout::cycle_x_span(9, lay) == std::pair{716, 805});
	// Anomalous-cycle boxes for the bottom band of the same canvas.
	CHECK(layout::cycle_bbox(3, 2, lay) == BBox{89, 596, 178, 893});
	CHECK(layout::cycle_bbox(3, 5, lay) == BBox{358, 596, 447, 893});

	// Two variables, two history cycles plus one predicted: the
	// prediction strips cover the right third of each band.
	const LayoutSpec fc = make_layout(896, 896, 2, 3);
	CHECK(layout::cycle_bbox(1, 3, fc) == BBox{597, 0, 895, 447});
	CHECK(layout::cycle_bbox(2, 3, fc) == BBox{597, 448, 895, 895});

	const LayoutSpec single = make_layout(896, 896, 1, 1);
	CHECK(layout::cycle_bbox(1, 1, single) == BBox{0, 0, 895, 895});
	CHECK_THROWS_AS(layout::cycle_x_span(11, lay), IndexOutOfRange);
}

TEST_CASE("mask run bbox spans contiguous cycles") {
	const LayoutSpec lay = make_layout(896, 896, 1, 6);
	CHECK(layout::cycle_run_bbox(1, 2, 3, lay) == BBox{149, 0, 447, 895});
}

TEST_CASE("cycle spans tile the canvas exactly") {
	Rng rng(99);
	for (int trial = 0; trial < 200; ++trial) {
		const int c = rng.uniform_int(1, 64);
		const int w = rng.uniform_int(c, 2048); // capacity: at least one column per cycle
		const LayoutSpec lay = make_layout(896, w, 1, c);
		int expected_start = 0;
		for (int j = 1; j <= c; ++j) {
			const auto [x1, x2] = layout::cycle_x_span(j, lay);
			CHECK(x1 == expected_start); // no gap, no overlap
			CHECK(x2 >= x1);
			expected_start = x2 + 1;
		}
		CHECK(expected_start == w);
	}
}

TEST_CASE("variable bands tile top to bottom") {
	Rng rng(101);
	for (int trial = 0; trial < 100; ++trial) {
		const int n = rng.uniform_int(1, 21);
		const int h = rng.uniform_int(n, 1024);
		int expected = 0;
		for (int v = 1; v <= n; ++v) {
			const auto [y1, y2] = layout::var_y_range(v, h, n);
			CHECK(y1 == expected);
			CHECK(y2 >= y1);
			expected = y2 + 1;
		}
		CHECK(expected == layout::band_height(h, n) * n);
		CHECK(expected <= h);
	}
}
