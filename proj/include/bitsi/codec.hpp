#pragma once

#include <string>
#include <vector>

#include "bitsi/core.hpp"
#include "bitsi/layout.hpp"
#include "bitsi/norm.hpp"

namespace bitsi::codec {

/// Canvas size and normalization constants for one encode run.
struct EncodeConfig {
	int image_height = 896;
	int image_width = 896;
	double alpha = 0.5;
	double c_mad = 0.6745;
	double kappa = 4.0;
};

/// fold: cells[i][j] = x[j*f + i]. Throws NotDivisible unless f | T.
PeriodicGrid fold(Eigen::Ref<const Vector> x, int periodicity);

/// Exact inverse of fold.
Vector unfold(const PeriodicGrid& grid);

/// Result of the capacity check. A violation is a value, not an error;
/// it names the failed constraint and the minimal canvas that fixes it.
struct CapacityReport {
	bool ok = true;
	std::string violation;    // empty when ok
	int min_image_height = 0; // smallest H satisfying floor(H/N) >= f
	int min_image_width = 0;  // smallest W satisfying W >= L/f
};

/// ok iff floor(H/N) >= f and W >= L/f. These bounds guarantee at
/// least one pixel per timestep, so rendering never downsamples.
CapacityReport check_capacity(int image_height, int image_width, int num_vars, int periodicity,
                              long total_length);

using layout::cycle_x_span;

/// Renders a periodic grid into a single-channel band of size
/// band_height x image_width, intensity p = (u+1)/2. Cell (i, j) is
/// replicated as a constant block (nearest-neighbor): rows
/// [(i*h)/f, ((i+1)*h)/f - 1] of the band, columns cycle_x_span(j+1).
/// Grids narrower than layout.total_cycles leave the remaining cycle
/// spans black.
Matrix render_band(const PeriodicGrid& grid, const LayoutSpec& layout);

struct Encoded {
	TsImage image;
	InstanceMeta meta;
};

/// Full encode pipeline: truncate to whole cycles, fit normalization
/// statistics on the visible (unmasked) portion of each variable, fold,
/// render each variable into its assigned channel, black out masked
/// cycles in every channel.
///
/// Forecast masks may extend beyond the series (the unknown future);
/// the mask's largest cycle index then fixes the total encoded length
/// L, and the capacity check runs against that L.
Encoded encode(const TimeSeries& series, const MaskSpec& mask, const EncodeConfig& config,
               const std::string& series_id = "");

/// Renders the ground-truth image for the same instance: identical
/// layout and statistics from `meta`, nothing blacked out. The series
/// must cover every cycle of the layout.
TsImage render_target(const TimeSeries& series, const InstanceMeta& meta);

struct DecodeRegion {
	enum class Kind { All, MaskedOnly, Cycles };
	Kind kind = Kind::All;
	std::vector<int> cycles_1b; // Kind::Cycles only

	static DecodeRegion all() { return {}; }
	static DecodeRegion masked_only() { return {Kind::MaskedOnly, {}}; }
	static DecodeRegion cycles(std::vector<int> cycles_1b) { return {Kind::Cycles, std::move(cycles_1b)}; }
};

/// Decoded values plus the timestep/variable selection implied by the
/// requested region. Entries outside the selection are still decoded
/// from the pixels (masked cycles decode from black) but carry no
/// information; consumers must honor `selected`.
struct Decoded {
	TimeSeries series;  // L x N, L = total_cycles * periodicity
	BoolArray selected; // L x N
};

/// Decode pipeline: per variable, crop the band, read the assigned
/// channel, reduce each replicated cell block by its arithmetic mean
/// back to the f x C grid, map p -> u = 2p - 1, unfold, denormalize.
Decoded decode(const TsImage& image, const InstanceMeta& meta,
               const DecodeRegion& region = DecodeRegion::all());

/// Validates mask shape against a variable count and cycle count:
/// indices in range and sorted, forecast masks a shared right-aligned
/// suffix, imputation masks leave every variable at least one visible
/// cycle. Throws InvalidMask.
void validate_mask(const MaskSpec& mask, int num_vars, int total_cycles);

} // namespace bitsi::codec
