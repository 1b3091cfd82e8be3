#pragma once

#include "bitsi/core.hpp"

namespace bitsi::norm {

/// Location/scale pair for a single variable.
struct LocScale {
	double mu = 0.0;
	double sigma = 1.0;
};

/// Scale floor applied by every fit so constant series stay encodable
/// (they render as flat mid-gray instead of erroring).
double sigma_floor(double mu);

/// Blended robust fit for one variable: location is the median, scale
/// is alpha * MAD / c_mad + (1 - alpha) * population Std, floored.
LocScale rfn_fit_values(Eigen::Ref<const Vector> values, double alpha, double c_mad);

NormStats rfn_fit(const TimeSeries& series, double alpha = 0.5, double c_mad = 0.6745, double kappa = 4.0);

/// Baseline fits used for the normalization regime comparison.
/// std_fit centers on the mean and scales by population Std; mad_fit
/// centers on the median and scales by MAD / c_mad alone.
NormStats std_fit(const TimeSeries& series, double kappa = 4.0);
NormStats mad_fit(const TimeSeries& series, double c_mad = 0.6745, double kappa = 4.0);

/// u[t,n] = tanh((x[t,n] - mu[n]) / (kappa * sigma[n])), strictly inside (-1, 1).
Matrix rfn_normalize(Eigen::Ref<const Matrix> values, const NormStats& stats);
Matrix rfn_normalize(const TimeSeries& series, const NormStats& stats);

/// Exact inverse of rfn_normalize on the clamped domain: u is clamped
/// to [-(1-delta), 1-delta] with delta = 1e-6 so arctanh stays finite,
/// then x = kappa * sigma * arctanh(u) + mu.
Matrix rfn_denormalize(Eigen::Ref<const Matrix> u, const NormStats& stats);

/// Clamp margin used by rfn_denormalize.
inline constexpr double kDenormClampDelta = 1e-6;

} // namespace bitsi::norm
