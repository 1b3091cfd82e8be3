#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bitsi/codec.hpp"
#include "bitsi/core.hpp"
#include "bitsi/layout.hpp"
#include "bitsi/rng.hpp"

namespace bitsi::qa {

// ---------------------------------------------------------------------------
// Ground truth payloads, one per task.

struct Qa1Gt {
	int count = 0;
};

struct Qa2Gt {
	int y_start = 0;
	int y_end = 0;
};

struct Qa3Gt {
	double cycle_width = 0.0;
	layout::BBox bbox;
};

struct Qa4Gt {
	int winner = 0;          // 1-based cycle index with the higher mean
	double diff_percent = 0; // 100*|a-b| / ((a+b)/2), 0-255 scale means
};

struct Qa5Gt {
	int total = 0;
	int bright = 0;
	int dark = 0;
	std::vector<layout::BBox> boxes;
};

/// Facts about one decoded cycle, in original (denormalized) units.
/// Indices are 0-based positions within the cycle.
struct TrendFacts {
	double min_value = 0.0;
	int min_index = 0;
	double max_value = 0.0;
	int max_index = 0;
	double start_value = 0.0;
	double end_value = 0.0;
	std::string direction; // "increasing" | "decreasing" | "flat"
	std::string description;
};

struct Qa6Gt {
	std::string channel; // "Red" | "Green" | "Blue"
	layout::BBox bbox;
	TrendFacts trend;
};

using QaGroundTruth = std::variant<Qa1Gt, Qa2Gt, Qa3Gt, Qa4Gt, Qa5Gt, Qa6Gt>;

struct QaInstance {
	std::string task_id; // "qa1" .. "qa6"
	std::string series_id;
	std::string question;
	QaGroundTruth ground_truth;
	std::string cot;
	std::string image_path; // filled by the dataset writer
	std::string meta_path;
};

/// Canonical answer text for a ground truth, exactly what the template
/// parsers in the scoring module accept.
std::string format_answer(const QaGroundTruth& gt);

// ---------------------------------------------------------------------------
// Pixel statistics (0-255 scale, matching what a model sees in the PNG).

/// Mean quantized value of the variable's assigned channel over one
/// cycle's bounding box.
double cycle_mean_u8(const TsImage& image, const InstanceMeta& meta, int var_1b, int cycle_1b);

/// Default brightness margin for QA4 pre-screening and QA5 anomaly
/// thresholds.
inline constexpr double kBrightnessMargin = 18.0;

/// A random cycle pair of this variable whose mean brightness differs
/// by more than the margin, restricted to visible cycles. Empty if no
/// pair qualifies.
std::optional<std::pair<int, int>> find_distinct_pair(const TsImage& image, const InstanceMeta& meta,
                                                      int var_1b, double margin, Rng& rng);

// ---------------------------------------------------------------------------
// Understanding task generators.

QaInstance gen_qa1(const InstanceMeta& meta);
QaInstance gen_qa2(const InstanceMeta& meta, int var_1b);
QaInstance gen_qa3(const InstanceMeta& meta, int var_1b, int cycle_1b);

/// Mean-comparison task. The pair must be pre-screened; throws
/// NoDistinctPair if the given cycles are closer than the margin.
QaInstance gen_qa4(const TsImage& image, const InstanceMeta& meta, int var_1b, int cycle_a_1b,
                   int cycle_b_1b, double margin = kBrightnessMargin);

/// Anomaly counting: cycles whose mean is strictly above mean+threshold
/// (bright) or strictly below mean-threshold (dark), where the mean is
/// the unweighted average of all cycle means.
QaInstance gen_qa5(const TsImage& image, const InstanceMeta& meta, int var_1b,
                   double threshold = kBrightnessMargin);

QaInstance gen_qa6(const TsImage& image, const InstanceMeta& meta, int var_1b, int cycle_1b);

/// Trend facts recomputed from the image via the decoder; used by
/// gen_qa6 and exposed for tests.
TrendFacts trend_facts(const TsImage& image, const InstanceMeta& meta, int var_1b, int cycle_1b);

// ---------------------------------------------------------------------------
// Generation instances (forecasting / imputation).

struct GenConfig {
	codec::EncodeConfig encode;
	int prediction_length = 0; // forecast horizon in timesteps; 0 = one cycle
};

struct GenInstance {
	TsImage src_image; // masked
	TsImage tgt_image; // fully rendered ground truth
	InstanceMeta meta;
	TimeSeries window; // the numeric window the images encode (context + target)
	std::string system_prompt;
	std::string instruction;
	std::string gen_cot;
};

/// Builds one training instance from a series. Forecast: the horizon is
/// the prediction length rounded up to whole cycles, context length is
/// drawn from [P, 2P] (whole cycles); the window is the most recent
/// part of the series. Imputation: per-variable masked cycle sets with
/// masked-timestep ratios in [0.10, 0.50], at least one visible cycle
/// per variable.
GenInstance gen_generation_instance(const TimeSeries& series, MaskKind task, std::uint64_t rng_seed,
                                    const GenConfig& config, const std::string& series_id = "");

/// Deterministic reasoning text chaining layout geometry and visible
/// signal facts; conditions the image completion.
std::string build_generation_cot(const TsImage& src_image, const InstanceMeta& meta);

} // namespace bitsi::qa
