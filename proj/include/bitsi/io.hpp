#pragma once

#include <map>
#include <string>
#include <vector>

#include "bitsi/codec.hpp"
#include "bitsi/core.hpp"
#include "bitsi/eval.hpp"
#include "bitsi/qa.hpp"
#include "bitsi/scoring.hpp"

namespace bitsi::io {

/// Numeric CSV, one row per timestep, one column per variable. An
/// optional header row is detected by non-numeric fields. Rejects
/// NaN/Inf and malformed fields with their 1-based file row and column.
TimeSeries read_series_csv(const std::string& path, int periodicity);

/// Writes values at full precision. Entries where `selected` is false
/// are written as empty fields (gaps).
void write_series_csv(const std::string& path, const Matrix& values,
                      const BoolArray* selected = nullptr);

/// 8-bit RGB PNG, no alpha, no interlacing, fixed encoder settings so
/// identical pixels produce identical bytes.
void write_png(const std::string& path, const TsImage& image);

/// Reads a PNG into float planes p = v / 255 (the 8-bit decode path).
/// Grayscale/palette inputs are expanded to RGB.
TsImage read_png(const std::string& path);

/// Lossless float container: 16-byte header (magic "FIMG", u32 height,
/// width, channels, little-endian) followed by row-major float64
/// samples, channel interleaved. Bit-exact round trip.
void write_floatimg(const std::string& path, const TsImage& image);
TsImage read_floatimg(const std::string& path);

inline constexpr int kMetaSchemaVersion = 1;

/// JSON sidecar carrying everything needed to decode an image.
/// Readers reject unknown schema versions loudly.
void write_meta(const std::string& path, const InstanceMeta& meta);
InstanceMeta read_meta(const std::string& path);

std::string meta_to_json(const InstanceMeta& meta);
InstanceMeta meta_from_json(const std::string& text);

// ---------------------------------------------------------------------------
// JSONL datasets.

void write_qa_jsonl(const std::string& path, const std::vector<qa::QaInstance>& instances);
std::vector<qa::QaInstance> read_qa_jsonl(const std::string& path);

/// One generation sample: the interleaved-sequence fields plus file
/// references.
struct GenRecord {
	std::string system_prompt;
	std::string src_image_path;
	std::string instruction;
	std::string gen_cot;
	std::string tgt_image_path;
};

void write_gen_jsonl(const std::string& path, const std::vector<GenRecord>& records);
std::vector<GenRecord> read_gen_jsonl(const std::string& path);

/// Raw model outputs for scoring: {"task_id", "prediction"}. Lines
/// without a "prediction" field (e.g. a ground-truth file scored
/// against itself) fall back to the canonical answer rendered from
/// their own ground truth.
struct Prediction {
	std::string task_id;
	std::string text;
};
std::vector<Prediction> read_predictions_jsonl(const std::string& path);

void write_score_report(const std::string& path, const std::map<std::string, scoring::TaskReport>& report);
void write_eval_report(const std::string& path, const eval::EvalReport& report);

/// Reads a whole file; IoError on failure.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace bitsi::io
