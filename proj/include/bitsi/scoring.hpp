#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bitsi/layout.hpp"
#include "bitsi/qa.hpp"

namespace bitsi::scoring {

/// Case-folded exact match of canonical string forms.
bool exact_match(const std::string& pred, const std::string& gt);
inline bool exact_match(int pred, int gt) { return pred == gt; }

/// Intersection over union with inclusive pixel areas:
/// Area = (x2-x1+1) * (y2-y1+1).
double iou(const layout::BBox& a, const layout::BBox& b);

/// IoU of two inclusive 1-D pixel ranges (y-range scoring; the shared
/// full-width x extent cancels out of the 2-D formula).
double interval_iou(int a_lo, int a_hi, int b_lo, int b_hi);

/// Pluggable text similarity in [0, 1]; the default is token-level F1
/// over lowercase alphanumeric tokens.
using TextSim = std::function<double(const std::string&, const std::string&)>;
double token_f1(const std::string& a, const std::string& b);

/// Mean of the three count match indicators (total, bright, dark).
double score_qa5(const qa::Qa5Gt& pred, const qa::Qa5Gt& gt);

/// Parsed pieces of a QA6 prediction.
struct Qa6Pred {
	std::string channel;
	layout::BBox bbox;
	std::string description;
};

/// (EM_color + IoU_bbox + text_sim(desc)) / 3.
double score_qa6(const Qa6Pred& pred, const qa::Qa6Gt& gt, const TextSim& text_sim = token_f1);

/// Result of scoring one raw model output. Unparseable outputs carry
/// no score and count against the success rate only.
struct InstanceScore {
	bool parsed = false;
	double score = 0.0;
};

/// Extracts the task-specific answer from raw text and scores it
/// against the ground truth. The parsers accept the canonical answer
/// templates plus tolerant spacing/bracket variants; when an
/// "Answer:" marker is present only the text after the last marker is
/// considered.
InstanceScore score_instance(const std::string& task_id, const std::string& pred_text,
                             const qa::QaGroundTruth& gt, const TextSim& text_sim = token_f1);

struct TaskReport {
	double mean_score = 0.0; // over parsed outputs only
	double success_rate = 0.0;
	int n = 0;
};

/// Per-task aggregation mirroring the evaluation protocol: means are
/// computed over parsed outputs, the parsed fraction is reported as SR.
std::map<std::string, TaskReport> aggregate(const std::vector<std::pair<std::string, InstanceScore>>& scored);

} // namespace bitsi::scoring
