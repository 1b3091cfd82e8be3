#include "bitsi/codec.hpp"

#include <algorithm>
#include <cmath>

namespace bitsi::codec {

PeriodicGrid fold(Eigen::Ref<const Vector> x, int periodicity) {
	const Eigen::Index t = x.size();
	if (periodicity < 1) throw Error("fold: periodicity must be >= 1");
	if (t % periodicity != 0)
		throw NotDivisible("fold: length " + std::to_string(t) + " not divisible by periodicity " +
		                   std::to_string(periodicity));
	PeriodicGrid grid;
	// Column-major reshape is exactly the folding convention: column j
	// holds timesteps [j*f, (j+1)*f).
	grid.cells = Eigen::Map<const Matrix>(x.data(), periodicity, t / periodicity);
	return grid;
}

Vector unfold(const PeriodicGrid& grid) {
	return Eigen::Map<const Vector>(grid.cells.data(), grid.cells.size());
}

CapacityReport check_capacity(int image_height, int image_width, int num_vars, int periodicity,
                              long total_length) {
	CapacityReport report;
	report.min_image_height = num_vars * periodicity;
	report.min_image_width = static_cast<int>((total_length + periodicity - 1) / periodicity);
	const int h = image_height / std::max(1, num_vars);
	if (h < periodicity) {
		report.ok = false;
		report.violation = "band height floor(" + std::to_string(image_height) + "/" +
		                   std::to_string(num_vars) + ") = " + std::to_string(h) +
		                   " < periodicity " + std::to_string(periodicity) + "; need image height >= " +
		                   std::to_string(report.min_image_height);
		return report;
	}
	// W >= L/f as an exact rational comparison: W*f >= L.
	if (static_cast<long>(image_width) * periodicity < total_length) {
		report.ok = false;
		report.violation = "image width " + std::to_string(image_width) + " < L/f = " +
		                   std::to_string(total_length) + "/" + std::to_string(periodicity) +
		                   "; need image width >= " + std::to_string(report.min_image_width);
	}
	return report;
}

namespace {

// Row block of intra-cycle position i inside a band: [(i*h)/f, ((i+1)*h)/f - 1].
std::pair<int, int> cell_row_span(int i, int band_height, int periodicity) {
	const long long h = band_height;
	const long long f = periodicity;
	return {static_cast<int>((i * h) / f), static_cast<int>(((i + 1) * h) / f) - 1};
}

} // namespace

Matrix render_band(const PeriodicGrid& grid, const LayoutSpec& layout) {
	const int f = static_cast<int>(grid.periodicity());
	const int c = static_cast<int>(grid.num_cycles());
	if (c > layout.total_cycles)
		throw CapacityViolation("render_band: grid has more cycles than the layout");
	if (layout.band_height < f)
		throw CapacityViolation("render_band: band height " + std::to_string(layout.band_height) +
		                        " < periodicity " + std::to_string(f));
	if (layout.image_width < layout.total_cycles)
		throw CapacityViolation("render_band: image width " + std::to_string(layout.image_width) +
		                        " < cycle count " + std::to_string(layout.total_cycles));
	Matrix band = Matrix::Zero(layout.band_height, layout.image_width);
	for (int j = 0; j < c; ++j) {
		const auto [x1, x2] = cycle_x_span(j + 1, layout);
		for (int i = 0; i < f; ++i) {
			const auto [r1, r2] = cell_row_span(i, layout.band_height, f);
			const double p = (grid.cells(i, j) + 1.0) / 2.0;
			band.block(r1, x1, r2 - r1 + 1, x2 - x1 + 1).setConstant(p);
		}
	}
	return band;
}

void validate_mask(const MaskSpec& mask, int num_vars, int total_cycles) {
	if (static_cast<int>(mask.masked_cycles.size()) != num_vars)
		throw InvalidMask("mask lists " + std::to_string(mask.masked_cycles.size()) +
		                  " variables, series has " + std::to_string(num_vars));
	for (const auto& cycles : mask.masked_cycles) {
		if (!std::is_sorted(cycles.begin(), cycles.end()))
			throw InvalidMask("masked cycle lists must be sorted");
		if (std::adjacent_find(cycles.begin(), cycles.end()) != cycles.end())
			throw InvalidMask("masked cycle lists must not repeat indices");
		for (int j : cycles)
			if (j < 1 || j > total_cycles)
				throw InvalidMask("masked cycle " + std::to_string(j) + " outside [1, " +
				                  std::to_string(total_cycles) + "]");
		if (static_cast<int>(cycles.size()) >= total_cycles)
			throw InvalidMask("mask covers every cycle of a variable");
	}
	if (mask.kind == MaskKind::Forecast) {
		const auto& first = mask.masked_cycles.front();
		for (const auto& cycles : mask.masked_cycles)
			if (cycles != first) throw InvalidMask("forecast mask must be identical across variables");
		for (size_t k = 0; k < first.size(); ++k)
			if (first[k] != total_cycles - static_cast<int>(first.size()) + 1 + static_cast<int>(k))
				throw InvalidMask("forecast mask must be a contiguous right-aligned suffix");
	}
}

Encoded encode(const TimeSeries& series, const MaskSpec& mask, const EncodeConfig& config,
               const std::string& series_id) {
	TimeSeries ts = truncate_to_period(series);
	const int f = ts.periodicity;
	const int n = static_cast<int>(ts.num_vars());
	const int series_cycles = static_cast<int>(ts.length()) / f;

	int total_cycles = series_cycles;
	for (const auto& cycles : mask.masked_cycles)
		if (!cycles.empty()) total_cycles = std::max(total_cycles, cycles.back());
	validate_mask(mask, n, total_cycles);
	// Cycles beyond the series carry no data; they are legal only as a
	// fully-masked forecast extension.
	for (int j = series_cycles + 1; j <= total_cycles; ++j)
		for (int v = 1; v <= n; ++v)
			if (!mask.is_masked(v, j))
				throw InvalidMask("cycle " + std::to_string(j) + " beyond series data is not masked for variable " +
				                  std::to_string(v));

	const long total_length = static_cast<long>(total_cycles) * f;
	CapacityReport cap =
	    check_capacity(config.image_height, config.image_width, n, f, total_length);
	if (!cap.ok) throw CapacityViolation(cap.violation);

	LayoutSpec lay;
	lay.image_height = config.image_height;
	lay.image_width = config.image_width;
	lay.num_vars = n;
	lay.band_height = layout::band_height(config.image_height, n);
	lay.total_cycles = total_cycles;

	// Fit statistics on the visible context only; the masked region is
	// unknown at inference time.
	NormStats stats;
	stats.alpha = config.alpha;
	stats.c_mad = config.c_mad;
	stats.kappa = config.kappa;
	stats.mu.resize(n);
	stats.sigma.resize(n);
	for (int v = 1; v <= n; ++v) {
		std::vector<double> visible;
		visible.reserve(ts.length());
		for (Eigen::Index t = 0; t < ts.length(); ++t) {
			const int cycle = static_cast<int>(t) / f + 1;
			if (!mask.is_masked(v, cycle)) visible.push_back(ts.values(t, v - 1));
		}
		if (visible.empty()) throw InvalidMask("no visible data for variable " + std::to_string(v));
		Eigen::Map<const Vector> vis(visible.data(), static_cast<Eigen::Index>(visible.size()));
		norm::LocScale ls = norm::rfn_fit_values(vis, config.alpha, config.c_mad);
		stats.mu[v - 1] = ls.mu;
		stats.sigma[v - 1] = ls.sigma;
	}

	const Matrix u = norm::rfn_normalize(ts.values, stats);

	TsImage image(config.image_height, config.image_width);
	for (int v = 1; v <= n; ++v) {
		PeriodicGrid grid = fold(u.col(v - 1), f);
		Matrix band = render_band(grid, lay);
		const auto [y1, y2] = layout::var_y_range(v, lay.image_height, n);
		// Black out masked cycles before placing; off-channel planes stay zero.
		for (int j : mask.masked_cycles[v - 1]) {
			const auto [x1, x2] = cycle_x_span(j, lay);
			band.block(0, x1, y2 - y1 + 1, x2 - x1 + 1).setZero();
		}
		image.channel(channel_of_var(v)).block(y1, 0, y2 - y1 + 1, lay.image_width) = band;
	}

	InstanceMeta meta;
	meta.layout = lay;
	meta.norm = stats;
	meta.mask = mask;
	meta.series_id = series_id;
	meta.periodicity = f;
	meta.context_length = mask.kind == MaskKind::Forecast
	                          ? static_cast<int>(total_length) - mask.masked_timesteps(1, f)
	                          : static_cast<int>(total_length);
	return Encoded{std::move(image), std::move(meta)};
}

TsImage render_target(const TimeSeries& series, const InstanceMeta& meta) {
	TimeSeries ts = truncate_to_period(series);
	const int f = meta.periodicity;
	const int n = meta.layout.num_vars;
	if (ts.periodicity != f || static_cast<int>(ts.num_vars()) != n ||
	    static_cast<int>(ts.length()) != meta.layout.total_cycles * f)
		throw MetaMismatch("render_target: series does not cover the layout");
	const Matrix u = norm::rfn_normalize(ts.values, meta.norm);
	TsImage image(meta.layout.image_height, meta.layout.image_width);
	for (int v = 1; v <= n; ++v) {
		PeriodicGrid grid = fold(u.col(v - 1), f);
		Matrix band = render_band(grid, meta.layout);
		const auto [y1, y2] = layout::var_y_range(v, meta.layout.image_height, n);
		image.channel(channel_of_var(v)).block(y1, 0, y2 - y1 + 1, meta.layout.image_width) = band;
	}
	return image;
}

Decoded decode(const TsImage& image, const InstanceMeta& meta, const DecodeRegion& region) {
	const LayoutSpec& lay = meta.layout;
	const int f = meta.periodicity;
	const int n = lay.num_vars;
	const int c = lay.total_cycles;
	if (image.height() != lay.image_height || image.width() != lay.image_width)
		throw MetaMismatch("decode: image is " + std::to_string(image.height()) + "x" +
		                   std::to_string(image.width()) + ", meta says " +
		                   std::to_string(lay.image_height) + "x" + std::to_string(lay.image_width));
	if (meta.norm.mu.size() != n || meta.norm.sigma.size() != n)
		throw MetaMismatch("decode: normalization stats do not match the variable count");
	if (static_cast<int>(meta.mask.masked_cycles.size()) != n)
		throw MetaMismatch("decode: mask does not match the variable count");
	if (lay.band_height < f) throw MetaMismatch("decode: band height below periodicity");

	const Eigen::Index length = static_cast<Eigen::Index>(c) * f;
	Matrix u(length, n);
	for (int v = 1; v <= n; ++v) {
		const auto [y1, y2] = layout::var_y_range(v, lay.image_height, n);
		const Matrix& plane = image.channel(channel_of_var(v));
		PeriodicGrid grid;
		grid.cells.resize(f, c);
		for (int j = 0; j < c; ++j) {
			const auto [x1, x2] = cycle_x_span(j + 1, lay);
			for (int i = 0; i < f; ++i) {
				const auto [r1, r2] = cell_row_span(i, lay.band_height, f);
				const double p =
				    plane.block(y1 + r1, x1, r2 - r1 + 1, x2 - x1 + 1).mean();
				grid.cells(i, j) = 2.0 * p - 1.0;
			}
		}
		u.col(v - 1) = unfold(grid);
	}

	Decoded out;
	out.series.values = norm::rfn_denormalize(u, meta.norm);
	out.series.periodicity = f;
	out.selected = BoolArray::Constant(length, n, true);
	switch (region.kind) {
	case DecodeRegion::Kind::All: break;
	case DecodeRegion::Kind::MaskedOnly:
		for (int v = 1; v <= n; ++v)
			for (Eigen::Index t = 0; t < length; ++t)
				out.selected(t, v - 1) = meta.mask.is_masked(v, static_cast<int>(t) / f + 1);
		break;
	case DecodeRegion::Kind::Cycles:
		for (int j : region.cycles_1b)
			if (j < 1 || j > c) throw IndexOutOfRange("decode region cycle " + std::to_string(j));
		for (Eigen::Index t = 0; t < length; ++t) {
			const int cycle = static_cast<int>(t) / f + 1;
			const bool in = std::find(region.cycles_1b.begin(), region.cycles_1b.end(), cycle) !=
			                region.cycles_1b.end();
			for (int v = 0; v < n; ++v) out.selected(t, v) = in;
		}
		break;
	}
	return out;
}

} // namespace bitsi::codec
