#include "bitsi/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <regex>

namespace bitsi::scoring {

namespace {

std::string lower(std::string s) {
	std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
	return s;
}

/// Text after the last "answer:" marker, or the whole text.
std::string answer_segment(const std::string& text) {
	const std::string low = lower(text);
	const size_t pos = low.rfind("answer:");
	return pos == std::string::npos ? text : text.substr(pos + 7);
}

const std::regex kInt(R"([-+]?\d+)");
// "[(x1, y1), (x2, y2)]" with optional brackets, or a flat "(x1, y1, x2, y2)".
const std::regex kBoxPaired(
    R"(\(\s*([-+]?\d+)\s*,\s*([-+]?\d+)\s*\)\s*,\s*\(\s*([-+]?\d+)\s*,\s*([-+]?\d+)\s*\))");
const std::regex kBoxFlat(
    R"(\(\s*([-+]?\d+)\s*,\s*([-+]?\d+)\s*,\s*([-+]?\d+)\s*,\s*([-+]?\d+)\s*\))");
const std::regex kRange(R"(\[\s*([-+]?\d+)\s*,\s*([-+]?\d+)\s*\])");

// Model output is untrusted; digit runs can overflow int.
std::optional<int> safe_stoi(const std::string& text) {
	try {
		return std::stoi(text);
	} catch (const std::exception&) {
		return std::nullopt;
	}
}

std::optional<int> last_int(const std::string& text) {
	std::optional<int> out;
	for (auto it = std::sregex_iterator(text.begin(), text.end(), kInt); it != std::sregex_iterator();
	     ++it)
		if (const auto v = safe_stoi(it->str())) out = v;
	return out;
}

std::optional<int> first_int(const std::string& text) {
	for (auto it = std::sregex_iterator(text.begin(), text.end(), kInt); it != std::sregex_iterator();
	     ++it)
		if (const auto v = safe_stoi(it->str())) return v;
	return std::nullopt;
}

std::optional<layout::BBox> first_bbox(const std::string& text, size_t* end_pos = nullptr) {
	std::smatch m;
	if (std::regex_search(text, m, kBoxPaired) || std::regex_search(text, m, kBoxFlat)) {
		const auto a = safe_stoi(m[1]);
		const auto b = safe_stoi(m[2]);
		const auto c = safe_stoi(m[3]);
		const auto d = safe_stoi(m[4]);
		// Inverted corners are not a box.
		if (!a || !b || !c || !d || *c < *a || *d < *b) return std::nullopt;
		if (end_pos) *end_pos = static_cast<size_t>(m.position(0) + m.length(0));
		return layout::BBox{*a, *b, *c, *d};
	}
	return std::nullopt;
}

std::optional<std::pair<int, int>> last_range(const std::string& text) {
	std::optional<std::pair<int, int>> out;
	for (auto it = std::sregex_iterator(text.begin(), text.end(), kRange); it != std::sregex_iterator();
	     ++it) {
		const auto lo = safe_stoi((*it)[1]);
		const auto hi = safe_stoi((*it)[2]);
		if (lo && hi && *hi >= *lo) out = std::make_pair(*lo, *hi);
	}
	return out;
}

std::vector<std::string> tokens(const std::string& text) {
	std::vector<std::string> out;
	std::string cur;
	for (unsigned char c : text) {
		if (std::isalnum(c)) {
			cur.push_back(static_cast<char>(std::tolower(c)));
		} else if (!cur.empty()) {
			out.push_back(std::move(cur));
			cur.clear();
		}
	}
	if (!cur.empty()) out.push_back(std::move(cur));
	return out;
}

std::optional<std::string> find_channel(const std::string& text) {
	// Whole words only: "red" inside e.g. "recovered" must not match.
	static const std::regex kChannel(R"(\b(red|green|blue)\b)", std::regex::icase);
	std::smatch m;
	if (!std::regex_search(text, m, kChannel)) return std::nullopt;
	std::string name = lower(m[1]);
	name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
	return name;
}

} // namespace

bool exact_match(const std::string& pred, const std::string& gt) { return lower(pred) == lower(gt); }

double iou(const layout::BBox& a, const layout::BBox& b) {
	const int ix1 = std::max(a.x1, b.x1);
	const int iy1 = std::max(a.y1, b.y1);
	const int ix2 = std::min(a.x2, b.x2);
	const int iy2 = std::min(a.y2, b.y2);
	if (ix1 > ix2 || iy1 > iy2) return 0.0;
	const double inter = double(ix2 - ix1 + 1) * double(iy2 - iy1 + 1);
	const double uni = double(a.area()) + double(b.area()) - inter;
	return inter / uni;
}

double interval_iou(int a_lo, int a_hi, int b_lo, int b_hi) {
	const int lo = std::max(a_lo, b_lo);
	const int hi = std::min(a_hi, b_hi);
	if (lo > hi) return 0.0;
	const double inter = hi - lo + 1;
	const double uni = double(a_hi - a_lo + 1) + double(b_hi - b_lo + 1) - inter;
	return inter / uni;
}

double token_f1(const std::string& a, const std::string& b) {
	const auto ta = tokens(a);
	const auto tb = tokens(b);
	if (ta.empty() && tb.empty()) return 1.0;
	if (ta.empty() || tb.empty()) return 0.0;
	std::map<std::string, int> counts;
	for (const auto& t : tb) counts[t] += 1;
	int common = 0;
	for (const auto& t : ta) {
		auto it = counts.find(t);
		if (it != counts.end() && it->second > 0) {
			--it->second;
			++common;
		}
	}
	if (common == 0) return 0.0;
	const double precision = double(common) / double(ta.size());
	const double recall = double(common) / double(tb.size());
	return 2.0 * precision * recall / (precision + recall);
}

double score_qa5(const qa::Qa5Gt& pred, const qa::Qa5Gt& gt) {
	const double matches = (pred.total == gt.total ? 1.0 : 0.0) + (pred.bright == gt.bright ? 1.0 : 0.0) +
	                       (pred.dark == gt.dark ? 1.0 : 0.0);
	return matches / 3.0;
}

double score_qa6(const Qa6Pred& pred, const qa::Qa6Gt& gt, const TextSim& text_sim) {
	const double em = exact_match(pred.channel, gt.channel) ? 1.0 : 0.0;
	const double box_iou = iou(pred.bbox, gt.bbox);
	const double sim = std::clamp(text_sim(pred.description, gt.trend.description), 0.0, 1.0);
	return (em + box_iou + sim) / 3.0;
}

InstanceScore score_instance(const std::string& task_id, const std::string& pred_text,
                             const qa::QaGroundTruth& gt, const TextSim& text_sim) {
	const std::string seg = answer_segment(pred_text);

	if (task_id == "qa1") {
		const auto* g = std::get_if<qa::Qa1Gt>(&gt);
		if (!g) throw Error("ground truth is not a qa1 payload");
		const auto pred = last_int(seg);
		if (!pred) return {};
		return {true, *pred == g->count ? 1.0 : 0.0};
	}
	if (task_id == "qa2") {
		const auto* g = std::get_if<qa::Qa2Gt>(&gt);
		if (!g) throw Error("ground truth is not a qa2 payload");
		const auto range = last_range(seg);
		if (!range) return {};
		return {true, interval_iou(range->first, range->second, g->y_start, g->y_end)};
	}
	if (task_id == "qa3") {
		const auto* g = std::get_if<qa::Qa3Gt>(&gt);
		if (!g) throw Error("ground truth is not a qa3 payload");
		const auto box = first_bbox(seg);
		if (!box) return {};
		return {true, iou(*box, g->bbox)};
	}
	if (task_id == "qa4") {
		const auto* g = std::get_if<qa::Qa4Gt>(&gt);
		if (!g) throw Error("ground truth is not a qa4 payload");
		const auto pred = first_int(seg);
		if (!pred) return {};
		return {true, *pred == g->winner ? 1.0 : 0.0};
	}
	if (task_id == "qa5") {
		const auto* g = std::get_if<qa::Qa5Gt>(&gt);
		if (!g) throw Error("ground truth is not a qa5 payload");
		static const std::regex kTotal(R"((\d+)\s+anomalous)", std::regex::icase);
		static const std::regex kBright(R"((\d+)\s+bright)", std::regex::icase);
		static const std::regex kDark(R"((\d+)\s+dark)", std::regex::icase);
		std::smatch mt, mb, md;
		if (!std::regex_search(seg, mt, kTotal) || !std::regex_search(seg, mb, kBright) ||
		    !std::regex_search(seg, md, kDark))
			return {};
		qa::Qa5Gt pred;
		pred.total = std::stoi(mt[1]);
		pred.bright = std::stoi(mb[1]);
		pred.dark = std::stoi(md[1]);
		return {true, score_qa5(pred, *g)};
	}
	if (task_id == "qa6") {
		const auto* g = std::get_if<qa::Qa6Gt>(&gt);
		if (!g) throw Error("ground truth is not a qa6 payload");
		Qa6Pred pred;
		const auto channel = find_channel(seg);
		size_t box_end = 0;
		const auto box = first_bbox(seg, &box_end);
		if (!channel || !box) return {};
		pred.channel = *channel;
		pred.bbox = *box;
		const std::string low = lower(seg);
		const size_t marker = low.find("trend analysis:");
		pred.description = marker != std::string::npos ? seg.substr(marker + 15) : seg.substr(box_end);
		return {true, score_qa6(pred, *g, text_sim)};
	}
	throw Error("unknown task id: " + task_id);
}

std::map<std::string, TaskReport> aggregate(
    const std::vector<std::pair<std::string, InstanceScore>>& scored) {
	std::map<std::string, TaskReport> out;
	std::map<std::string, std::pair<double, int>> sums; // task -> (score sum, parsed count)
	for (const auto& [task, score] : scored) {
		out[task].n += 1;
		if (score.parsed) {
			sums[task].first += score.score;
			sums[task].second += 1;
		}
	}
	for (auto& [task, report] : out) {
		const auto& [sum, parsed] = sums[task];
		report.success_rate = report.n > 0 ? double(parsed) / double(report.n) : 0.0;
		report.mean_score = parsed > 0 ? sum / double(parsed) : 0.0;
	}
	return out;
}

} // namespace bitsi::scoring
