#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "bitsi/errors.hpp"

namespace bitsi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using BoolArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Multivariate series, one row per timestep, one column per variable.
/// All user-facing variable/cycle indices are 1-based; loops and Eigen
/// indices are 0-based.
struct TimeSeries {
	Matrix values;               // T x N
	int periodicity = 1;         // timesteps per cycle (f)
	std::string frequency_label; // opaque metadata, e.g. "hourly"

	Eigen::Index length() const { return values.rows(); }
	Eigen::Index num_vars() const { return values.cols(); }
};

/// Throws if dimensions or periodicity are out of contract, or if any
/// value is non-finite. Call sites that build series from trusted math
/// may skip this.
void validate(const TimeSeries& series);

/// One variable folded at its periodicity: rows are intra-cycle
/// positions, columns are successive cycles.
struct PeriodicGrid {
	Matrix cells; // f x C

	Eigen::Index periodicity() const { return cells.rows(); }
	Eigen::Index num_cycles() const { return cells.cols(); }
};

/// Per-variable normalization record. Stored losslessly in the sidecar
/// so decoding is exact.
struct NormStats {
	Vector mu;    // length N, per-variable location
	Vector sigma; // length N, per-variable scale, strictly positive
	double alpha = 0.5;
	double c_mad = 0.6745;
	double kappa = 4.0;
};

/// Canvas geometry shared by the renderer and the geometry oracle.
struct LayoutSpec {
	int image_height = 896;
	int image_width = 896;
	int num_vars = 1;
	int band_height = 896;  // floor(H / max(1, N)), floored at 1
	int total_cycles = 1;   // context + masked cycles

	double cycle_width() const { return double(image_width) / double(total_cycles); }
};

enum class MaskKind { Forecast, Imputation };

/// Which cycles are blacked out, per variable (1-based cycle indices,
/// sorted). Forecast masks are a right-aligned contiguous suffix shared
/// by all variables; imputation masks may differ across variables.
struct MaskSpec {
	MaskKind kind = MaskKind::Forecast;
	std::vector<std::vector<int>> masked_cycles;
	int prediction_length = 0; // timesteps, forecast only

	bool is_masked(int var_1b, int cycle_1b) const;
	int masked_timesteps(int var_1b, int periodicity) const;
};

/// H x W x 3 canvas. The float planes (values in [0,1]) are canonical;
/// the 8-bit export is round(255 * float).
struct TsImage {
	Matrix r, g, b; // H x W each

	TsImage() = default;
	TsImage(int height, int width)
	    : r(Matrix::Zero(height, width)), g(Matrix::Zero(height, width)), b(Matrix::Zero(height, width)) {}

	Eigen::Index height() const { return r.rows(); }
	Eigen::Index width() const { return r.cols(); }

	Matrix& channel(int c);
	const Matrix& channel(int c) const;

	static std::uint8_t quantize(double v);
};

/// RGB channel assigned to a 1-based variable index: 0=R, 1=G, 2=B,
/// cycling so adjacent bands never share a color.
inline int channel_of_var(int var_1b) { return (var_1b - 1) % 3; }

/// Human-readable channel name ("Red", "Green", "Blue").
const std::string& channel_name(int channel);

/// Everything needed to invert an encoded image without the source
/// series. Serialized as the JSON sidecar next to each image.
struct InstanceMeta {
	LayoutSpec layout;
	NormStats norm;
	MaskSpec mask;
	std::string series_id;
	int periodicity = 1;
	int context_length = 0; // visible timesteps (forecast); full length (imputation)
};

/// Keeps the most recent floor(T/f)*f timesteps so the series folds
/// into whole cycles. Idempotent. Throws PeriodTooLong if T < f.
TimeSeries truncate_to_period(const TimeSeries& series);

} // namespace bitsi
