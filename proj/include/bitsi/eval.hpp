#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bitsi/codec.hpp"
#include "bitsi/core.hpp"

namespace bitsi::eval {

/// Mean absolute error scaled by the seasonal-naive in-sample error
/// mean |insample[t] - insample[t-f]|. Returns nullopt when the scale
/// is degenerate (< 1e-12, e.g. an exactly periodic insample); such
/// instances are excluded from aggregation, never zero-divided.
/// Throws LengthMismatch when pred and target differ in length.
std::optional<double> mase(Eigen::Ref<const Vector> pred, Eigen::Ref<const Vector> target,
                           Eigen::Ref<const Vector> insample, int periodicity);

inline constexpr double kDegenerateScale = 1e-12;

struct NmaseResult {
	double geometric = 0.0;  // canonical aggregate: naive-relative geometric mean
	double arithmetic = 0.0; // arithmetic mean of the same ratios, for transparency
	int n_used = 0;
	int excluded = 0;
};

/// Normalized MASE: per-instance ratio model/naive, aggregated by
/// geometric mean. Instances where either side is degenerate (or the
/// naive error is zero) are excluded pairwise and counted. By
/// construction the Naive baseline scores exactly 1.
NmaseResult nmase(const std::vector<std::optional<double>>& model,
                  const std::vector<std::optional<double>>& naive);

/// Repeat the last full cycle of the context for `horizon` steps.
Vector baseline_naive_forecast(Eigen::Ref<const Vector> context, int periodicity, int horizon);

/// Series with per-entry observation flags; the imputation baselines
/// fill the unobserved entries.
struct GappySeries {
	Matrix values;
	BoolArray observed;
};

/// Nearest observed neighbor in time, ties to the earlier side.
Matrix baseline_nearest_impute(const GappySeries& series);

/// Linear interpolation between flanking observations; edge gaps are
/// held at the nearest observed value.
Matrix baseline_linear_impute(const GappySeries& series);

/// Image-space analogue of the seasonal naive: every masked cycle's
/// pixel block is copied from the nearest visible cycle to its left
/// (falling back to the right). Exercises the full decode path.
TsImage baseline_copycycle_inpaint(const TsImage& masked_image, const InstanceMeta& meta);

// ---------------------------------------------------------------------------
// Instance-directory evaluation (the CLI's `eval` subcommand).

enum class Baseline { Naive, Nearest, Linear, CopyCycle, External };

struct InstanceResult {
	std::string id;
	std::optional<double> mase_model; // nullopt: degenerate or unsuccessful
	std::optional<double> mase_naive;
	double mask_ratio = 0.0;
	int prediction_length = 0;
	bool success = true; // false: external output missing/unreadable
};

struct BucketReport {
	std::string bucket;
	NmaseResult nmase;
};

struct EvalReport {
	std::string task;     // "forecast" | "impute"
	std::string baseline; // flag spelling, e.g. "naive", "external:dir"
	std::vector<BucketReport> buckets;
	NmaseResult overall;
	double success_rate = 1.0;
	int n_instances = 0;
};

/// Value-space seasonal naive: each masked cycle copies the nearest
/// visible cycle to its left (falling back to the right) of the ground
/// truth, which reduces to repeat-last-cycle for forecast masks. This
/// is the nMASE reference predictor.
Matrix naive_prediction(const TimeSeries& truth, const InstanceMeta& meta);

/// Scores one instance given its ground truth series and mask. Values
/// predicted by the baseline under test are passed in `prediction`
/// aligned with `truth`; the naive reference is computed internally.
InstanceResult score_instance_values(const std::string& id, const TimeSeries& truth,
                                     const InstanceMeta& meta, const Matrix& prediction);

/// Ratio bucket labels matching the imputation report convention.
std::string ratio_bucket(double ratio);

/// Horizon bucket labels for forecast reports.
std::string horizon_bucket(int prediction_length);

} // namespace bitsi::eval
