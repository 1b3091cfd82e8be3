#include "bitsi/core.hpp"

#include <algorithm>
#include <cmath>

namespace bitsi {

void validate(const TimeSeries& series) {
	if (series.length() < 1 || series.num_vars() < 1)
		throw Error("series must have at least one timestep and one variable");
	if (series.periodicity < 1)
		throw Error("periodicity must be >= 1");
	if (!series.values.allFinite())
		throw Error("series contains non-finite values");
}

bool MaskSpec::is_masked(int var_1b, int cycle_1b) const {
	if (var_1b < 1 || var_1b > static_cast<int>(masked_cycles.size())) return false;
	const auto& cycles = masked_cycles[var_1b - 1];
	return std::binary_search(cycles.begin(), cycles.end(), cycle_1b);
}

int MaskSpec::masked_timesteps(int var_1b, int periodicity) const {
	if (var_1b < 1 || var_1b > static_cast<int>(masked_cycles.size())) return 0;
	return static_cast<int>(masked_cycles[var_1b - 1].size()) * periodicity;
}

Matrix& TsImage::channel(int c) {
	switch (c) {
	case 0: return r;
	case 1: return g;
	default: return b;
	}
}

const Matrix& TsImage::channel(int c) const {
	switch (c) {
	case 0: return r;
	case 1: return g;
	default: return b;
	}
}

std::uint8_t TsImage::quantize(double v) {
	long q = std::lround(v * 255.0);
	return static_cast<std::uint8_t>(std::clamp(q, 0L, 255L));
}

const std::string& channel_name(int channel) {
	static const std::string names[3] = {"Red", "Green", "Blue"};
	if (channel < 0 || channel > 2) throw IndexOutOfRange("channel index " + std::to_string(channel));
	return names[channel];
}

TimeSeries truncate_to_period(const TimeSeries& series) {
	validate(series);
	const Eigen::Index t = series.length();
	const int f = series.periodicity;
	if (t < f)
		throw PeriodTooLong("series length " + std::to_string(t) + " is shorter than one cycle of " +
		                    std::to_string(f));
	const Eigen::Index kept = (t / f) * f;
	TimeSeries out = series;
	// Keep the suffix: forecasting conditions on the most recent context.
	out.values = series.values.bottomRows(kept).eval();
	return out;
}

} // namespace bitsi
