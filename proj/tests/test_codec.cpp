#include <doctest.h>

#include <cmath>
#include <set>

#include "bitsi/codec.hpp"
#include "support/synthetic.hpp"

using namespace bitsi;

namespace {

MaskSpec no_mask(int num_vars) {
	MaskSpec mask;
	mask.kind = MaskKind::Forecast;
	mask.masked_cycles.assign(num_vars, {});
	return mask;
}

MaskSpec forecast_mask(int num_vars, int total_cycles, int masked) {
	MaskSpec mask;
	mask.kind = MaskKind::Forecast;
	std::vector<int> suffix;
	for (int j = total_cycles - masked + 1; j <= total_cycles; ++j) suffix.push_back(j);
	mask.masked_cycles.assign(num_vars, suffix);
	mask.prediction_length = masked * 1;
	return mask;
}

} // namespace

TEST_CASE("fold unrolls by cycle columns") {
	Vector x(6);
	x << 1, 2, 3, 4, 5, 6;
	const PeriodicGrid grid = codec::fold(x, 3);
	CHECK(grid.periodicity() == 3);
	CHECK(grid.num_cycles() == 2);
	CHECK(grid.cells(0, 0) == 1);
	CHECK(grid.cells(1, 0) == 2);
	CHECK(grid.cells(2, 0) == 3);
	CHECK(grid.cells(0, 1) == 4);
	CHECK(grid.cells(2, 1) == 6);

	SUBCASE("single cycle when f equals T") {
		const PeriodicGrid one = codec::fold(x, 6);
		CHECK(one.num_cycles() == 1);
		CHECK(one.cells.col(0) == x);
	}
	SUBCASE("240 at periodicity 24 folds to 24 x 10") {
		Vector long_x = Vector::LinSpaced(240, 0, 239);
		const PeriodicGrid big = codec::fold(long_x, 24);
		CHECK(big.periodicity() == 24);
		CHECK(big.num_cycles() == 10);
	}
	SUBCASE("non-divisible length") {
		Vector bad = Vector::Zero(7);
		CHECK_THROWS_AS(codec::fold(bad, 3), NotDivisible);
	}
}

TEST_CASE("unfold inverts fold") {
	Vector x(6);
	x << 1, 2, 3, 4, 5, 6;
	CHECK(codec::unfold(codec::fold(x, 3)) == x);

	Rng rng(123);
	for (int trial = 0; trial < 1000; ++trial) {
		const int f = rng.uniform_int(1, 32);
		const int c = rng.uniform_int(1, 16);
		Vector v(f * c);
		for (int i = 0; i < f * c; ++i) v[i] = rng.uniform(-3.0, 3.0);
		CHECK(codec::unfold(codec::fold(v, f)) == v);
	}
}

TEST_CASE("capacity check") {
	SUBCASE("the worked instance fits") {
		const auto report = codec::check_capacity(896, 896, 3, 24, 240);
		CHECK(report.ok);
	}
	SUBCASE("too many variables for the height") {
		const auto report = codec::check_capacity(896, 896, 64, 24, 240);
		CHECK_FALSE(report.ok);
		CHECK(report.min_image_height == 64 * 24);
		CHECK(report.violation.find("band height") != std::string::npos);
	}
	SUBCASE("boundary is inclusive") {
		CHECK(codec::check_capacity(72, 896, 3, 24, 240).ok); // floor(72/3) == 24
		CHECK(codec::check_capacity(896, 10, 1, 24, 240).ok); // 10 == 240/24
		CHECK_FALSE(codec::check_capacity(896, 9, 1, 24, 240).ok);
	}
}

TEST_CASE("render_band block replication") {
	SUBCASE("single zero cell fills mid-gray") {
		PeriodicGrid grid;
		grid.cells = Matrix::Zero(1, 1);
		LayoutSpec lay;
		lay.image_height = 8;
		lay.image_width = 6;
		lay.num_vars = 1;
		lay.band_height = 8;
		lay.total_cycles = 1;
		const Matrix band = codec::render_band(grid, lay);
		CHECK(band.rows() == 8);
		CHECK(band.cols() == 6);
		CHECK((band.array() == 0.5).all());
	}
	SUBCASE("two cells split the band") {
		PeriodicGrid grid;
		grid.cells.resize(2, 1);
		grid.cells << -1, 1;
		LayoutSpec lay;
		lay.image_height = 4;
		lay.image_width = 2;
		lay.num_vars = 1;
		lay.band_height = 4;
		lay.total_cycles = 1;
		const Matrix band = codec::render_band(grid, lay);
		CHECK((band.topRows(2).array() == 0.0).all());
		CHECK((band.bottomRows(2).array() == 1.0).all());
	}
	SUBCASE("no interpolation: band intensities come from grid cells") {
		const TimeSeries s = testsupport::make_series(31, 1, 24, 10);
		const NormStats stats = norm::rfn_fit(s);
		const Matrix u = norm::rfn_normalize(s, stats);
		const PeriodicGrid grid = codec::fold(u.col(0), 24);
		LayoutSpec lay;
		lay.image_height = 298;
		lay.image_width = 896;
		lay.num_vars = 1;
		lay.band_height = 298;
		lay.total_cycles = 10;
		const Matrix band = codec::render_band(grid, lay);
		std::set<double> cell_intensities;
		for (Eigen::Index i = 0; i < grid.cells.rows(); ++i)
			for (Eigen::Index j = 0; j < grid.cells.cols(); ++j)
				cell_intensities.insert((grid.cells(i, j) + 1.0) / 2.0);
		for (Eigen::Index y = 0; y < band.rows(); ++y)
			for (Eigen::Index x = 0; x < band.cols(); ++x)
				CHECK(cell_intensities.count(band(y, x)) == 1);
	}
}

TEST_CASE("encode places bands and channels per the worked geometry") {
	const TimeSeries s = testsupport::make_series(55, 3, 24, 10);
	const codec::Encoded out = codec::encode(s, no_mask(3), codec::EncodeConfig{}, "golden");
	CHECK(out.meta.layout.band_height == 298);
	CHECK(out.meta.layout.total_cycles == 10);

	// Variable 2 owns the green channel inside rows [298, 595].
	CHECK(out.image.g.block(298, 0, 298, 896).cwiseAbs().maxCoeff() > 0.0);
	CHECK(out.image.r.block(298, 0, 298, 896).cwiseAbs().maxCoeff() == 0.0);
	CHECK(out.image.b.block(298, 0, 298, 896).cwiseAbs().maxCoeff() == 0.0);
	// Variable 3 owns blue inside [596, 893].
	CHECK(out.image.b.block(596, 0, 298, 896).cwiseAbs().maxCoeff() > 0.0);
	CHECK(out.image.g.block(596, 0, 298, 896).cwiseAbs().maxCoeff() == 0.0);
	// Bottom leftover rows (894, 895) stay black.
	CHECK(out.image.r.bottomRows(2).cwiseAbs().maxCoeff() == 0.0);
	CHECK(out.image.g.bottomRows(2).cwiseAbs().maxCoeff() == 0.0);
	CHECK(out.image.b.bottomRows(2).cwiseAbs().maxCoeff() == 0.0);

	SUBCASE("univariate band spans the full canvas") {
		const TimeSeries one = testsupport::make_series(56, 1, 24, 6);
		const codec::Encoded enc = codec::encode(one, no_mask(1), codec::EncodeConfig{}, "n1");
		CHECK(enc.meta.layout.band_height == 896);
		CHECK(enc.image.r.cwiseAbs().maxCoeff() > 0.0);
		CHECK(enc.image.g.cwiseAbs().maxCoeff() == 0.0);
	}
	SUBCASE("encode is deterministic") {
		const codec::Encoded again = codec::encode(s, no_mask(3), codec::EncodeConfig{}, "golden");
		CHECK(again.image.r == out.image.r);
		CHECK(again.image.g == out.image.g);
		CHECK(again.image.b == out.image.b);
	}
	SUBCASE("capacity violations are refused") {
		const TimeSeries wide = testsupport::make_series(57, 64, 24, 2);
		CHECK_THROWS_AS(codec::encode(wide, no_mask(64), codec::EncodeConfig{}, "bad"),
		                CapacityViolation);
	}
}

TEST_CASE("masked cycles are black in every channel and stats ignore them") {
	const TimeSeries s = testsupport::make_series(58, 2, 24, 6);
	const MaskSpec mask = forecast_mask(2, 6, 2);
	const codec::Encoded out = codec::encode(s, mask, codec::EncodeConfig{}, "masked");

	const auto [x1, x2] = codec::cycle_x_span(5, out.meta.layout);
	const auto [x3, x4] = codec::cycle_x_span(6, out.meta.layout);
	for (int c = 0; c < 3; ++c) {
		CHECK(out.image.channel(c).block(0, x1, 896, x2 - x1 + 1).cwiseAbs().maxCoeff() == 0.0);
		CHECK(out.image.channel(c).block(0, x3, 896, x4 - x3 + 1).cwiseAbs().maxCoeff() == 0.0);
	}

	// Context-only fit: statistics equal a fit on the first four cycles.
	TimeSeries context = s;
	context.values = s.values.topRows(4 * 24).eval();
	const NormStats expect = norm::rfn_fit(context);
	CHECK(out.meta.norm.mu == expect.mu);
	CHECK(out.meta.norm.sigma == expect.sigma);

	SUBCASE("forecast extension beyond the series") {
		TimeSeries context_only = s;
		context_only.values = s.values.topRows(4 * 24).eval();
		const codec::Encoded ext = codec::encode(context_only, mask, codec::EncodeConfig{}, "ext");
		CHECK(ext.meta.layout.total_cycles == 6);
		CHECK(ext.meta.context_length == 4 * 24);
		for (int c = 0; c < 3; ++c)
			CHECK(ext.image.channel(c).rightCols(896 - x1).cwiseAbs().maxCoeff() == 0.0);
	}
	SUBCASE("unmasked cycles beyond the series are rejected") {
		TimeSeries context_only = s;
		context_only.values = s.values.topRows(4 * 24).eval();
		MaskSpec uneven;
		uneven.kind = MaskKind::Imputation;
		uneven.masked_cycles = {{5, 6}, {2}}; // var 2 leaves cycles 5-6 unmasked but has no data there
		CHECK_THROWS_AS(codec::encode(context_only, uneven, codec::EncodeConfig{}, "bad"),
		                InvalidMask);
	}
}

TEST_CASE("masked pixel region equals the mask bbox exactly") {
	// Univariate, six cycles, cycles 2-3 masked: the black strip must
	// cover columns [149, 447] over the full band and nothing more.
	const TimeSeries s = testsupport::make_periodic_series(71, 1, 24, 6);
	MaskSpec mask;
	mask.kind = MaskKind::Imputation;
	mask.masked_cycles = {{2, 3}};
	const codec::Encoded enc = codec::encode(s, mask, codec::EncodeConfig{}, "strip");
	const layout::BBox strip = layout::cycle_run_bbox(1, 2, 3, enc.meta.layout);
	CHECK(strip == layout::BBox{149, 0, 447, 895});
	CHECK(enc.image.r.block(0, 149, 896, 447 - 149 + 1).cwiseAbs().maxCoeff() == 0.0);
	// The columns flanking the strip carry signal (the series is
	// bounded away from the black level).
	CHECK(enc.image.r.col(148).cwiseAbs().minCoeff() > 0.0);
	CHECK(enc.image.r.col(448).cwiseAbs().minCoeff() > 0.0);
}

TEST_CASE("channel cycling repeats beyond three variables") {
	const TimeSeries s = testsupport::make_series(72, 4, 24, 4);
	codec::EncodeConfig config;
	config.image_height = 896;
	config.image_width = 896;
	const codec::Encoded enc = codec::encode(s, no_mask(4), config, "four");
	const int h = enc.meta.layout.band_height; // 224
	// Variable 4 is red again, one band below variable 3's blue band.
	CHECK(enc.image.r.block(3 * h, 0, h, 896).cwiseAbs().maxCoeff() > 0.0);
	CHECK(enc.image.g.block(3 * h, 0, h, 896).cwiseAbs().maxCoeff() == 0.0);
	CHECK(enc.image.b.block(3 * h, 0, h, 896).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("decode inverts encode on the float path") {
	const TimeSeries s = testsupport::make_series(60, 3, 24, 10);
	const codec::Encoded enc = codec::encode(s, no_mask(3), codec::EncodeConfig{}, "rt");
	const codec::Decoded dec = codec::decode(enc.image, enc.meta);
	const Matrix u = norm::rfn_normalize(s, enc.meta.norm);
	for (Eigen::Index t = 0; t < s.length(); ++t)
		for (Eigen::Index v = 0; v < 3; ++v) {
			if (std::abs(u(t, v)) > 0.99) continue;
			const double denom = std::max(std::abs(s.values(t, v)), enc.meta.norm.sigma[v]);
			CHECK(std::abs(dec.series.values(t, v) - s.values(t, v)) / denom <= 1e-6);
		}
}

TEST_CASE("decode maps mid-gray to the location parameter") {
	InstanceMeta meta;
	meta.layout = LayoutSpec{48, 96, 1, 48, 4};
	meta.periodicity = 12;
	meta.context_length = 48;
	meta.norm.mu = Vector::Constant(1, 7.25);
	meta.norm.sigma = Vector::Constant(1, 2.0);
	meta.mask.masked_cycles = {{}};
	TsImage image(48, 96);
	image.r.setConstant(0.5);
	const codec::Decoded dec = codec::decode(image, meta);
	CHECK((dec.series.values.array() == 7.25).all());
}

TEST_CASE("8-bit path stays inside the quantization bound") {
	const TimeSeries s = testsupport::make_series(61, 2, 24, 8);
	const codec::Encoded enc = codec::encode(s, no_mask(2), codec::EncodeConfig{}, "q");
	TsImage quantized(896, 896);
	for (int c = 0; c < 3; ++c)
		quantized.channel(c) =
		    enc.image.channel(c).unaryExpr([](double v) { return TsImage::quantize(v) / 255.0; });
	const codec::Decoded dec = codec::decode(quantized, enc.meta);
	const Matrix u = norm::rfn_normalize(s, enc.meta.norm);
	for (Eigen::Index t = 0; t < s.length(); ++t)
		for (Eigen::Index v = 0; v < 2; ++v) {
			if (std::abs(u(t, v)) > 0.9) continue;
			CHECK(std::abs(dec.series.values(t, v) - s.values(t, v)) <=
			      0.1 * enc.meta.norm.sigma[v]);
		}
}

TEST_CASE("decode regions select without changing values") {
	const TimeSeries s = testsupport::make_series(62, 2, 24, 6);
	const MaskSpec mask = forecast_mask(2, 6, 2);
	const codec::Encoded enc = codec::encode(s, mask, codec::EncodeConfig{}, "sel");
	const TsImage target = codec::render_target(s, enc.meta);

	const codec::Decoded all = codec::decode(target, enc.meta, codec::DecodeRegion::all());
	const codec::Decoded masked = codec::decode(target, enc.meta, codec::DecodeRegion::masked_only());
	CHECK((all.selected == true).all());
	for (Eigen::Index t = 0; t < s.length(); ++t)
		for (Eigen::Index v = 0; v < 2; ++v) {
			CHECK(masked.selected(t, v) == (t >= 4 * 24));
			if (masked.selected(t, v))
				CHECK(masked.series.values(t, v) == all.series.values(t, v));
		}

	const codec::Decoded cycle = codec::decode(target, enc.meta, codec::DecodeRegion::cycles({2}));
	for (Eigen::Index t = 0; t < s.length(); ++t)
		CHECK(cycle.selected(t, 0) == (t >= 24 && t < 48));
}

TEST_CASE("decode validates the meta against the image") {
	const TimeSeries s = testsupport::make_series(63, 1, 24, 4);
	const codec::Encoded enc = codec::encode(s, no_mask(1), codec::EncodeConfig{}, "mm");
	InstanceMeta wrong = enc.meta;
	wrong.layout.image_width = 128;
	CHECK_THROWS_AS(codec::decode(enc.image, wrong), MetaMismatch);
}
