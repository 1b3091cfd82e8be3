#include "bitsi/qa.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bitsi/strings.hpp"

namespace bitsi::qa {

namespace {

std::string bbox_text(const layout::BBox& b) {
	return "[(" + std::to_string(b.x1) + ", " + std::to_string(b.y1) + "), (" + std::to_string(b.x2) +
	       ", " + std::to_string(b.y2) + ")]";
}

std::string image_preamble(const LayoutSpec& lay) {
	return "You are given a " + std::to_string(lay.image_height) + "*" +
	       std::to_string(lay.image_width) +
	       " image that encodes one or more time series variables as horizontal bands stacked from top "
	       "to bottom.";
}

std::string metadata_line(const InstanceMeta& meta) {
	return "Given metadata: L = " + std::to_string(meta.layout.total_cycles * meta.periodicity) +
	       ", periodicity = " + std::to_string(meta.periodicity) + ".";
}

const std::string kIndexNote = "Note: Variables are indexed from 1 (top band) to nvars (bottom band).";

std::string geometry_cot(const InstanceMeta& meta) {
	const LayoutSpec& lay = meta.layout;
	const int length = lay.total_cycles * meta.periodicity;
	return "1) Geometry & Layout. Image size " + std::to_string(lay.image_height) + " x " +
	       std::to_string(lay.image_width) + ". Scanning bands -> nvars = " + std::to_string(lay.num_vars) +
	       ". Band height h = floor(" + std::to_string(lay.image_height) + "/" +
	       std::to_string(lay.num_vars) + ") = " + std::to_string(lay.band_height) +
	       ".\n2) Cycle Dimensions. Metadata: L = " + std::to_string(length) + ", periodicity = " +
	       std::to_string(meta.periodicity) + ". Total cycles C = ceil(" + std::to_string(length) + "/" +
	       std::to_string(meta.periodicity) + ") = " + std::to_string(lay.total_cycles) +
	       ". Width per cycle w = " + std::to_string(lay.image_width) + " / " +
	       std::to_string(lay.total_cycles) + " = " + fmt_double(lay.cycle_width()) + " pixels.";
}

void check_var(const InstanceMeta& meta, int var_1b) {
	if (var_1b < 1 || var_1b > meta.layout.num_vars)
		throw IndexOutOfRange("variable " + std::to_string(var_1b) + " of " +
		                      std::to_string(meta.layout.num_vars));
}

std::vector<int> visible_cycles(const InstanceMeta& meta, int var_1b) {
	std::vector<int> out;
	for (int j = 1; j <= meta.layout.total_cycles; ++j)
		if (!meta.mask.is_masked(var_1b, j)) out.push_back(j);
	return out;
}

} // namespace

std::string format_answer(const QaGroundTruth& gt) {
	struct Visitor {
		std::string operator()(const Qa1Gt& g) const {
			return "The image encodes " + std::to_string(g.count) + " variables (time series channels).";
		}
		std::string operator()(const Qa2Gt& g) const {
			return "The variable occupies y-range: [" + std::to_string(g.y_start) + ", " +
			       std::to_string(g.y_end) + "].";
		}
		std::string operator()(const Qa3Gt& g) const {
			return "(1) Each cycle is " + fmt_double(g.cycle_width) + " pixels wide.\n(2) The bounding box is: " +
			       bbox_text(g.bbox) + ".";
		}
		std::string operator()(const Qa4Gt& g) const {
			return "Cycle " + std::to_string(g.winner) + " is brighter (difference: " +
			       fmt_fixed(g.diff_percent, 1) + "%).";
		}
		std::string operator()(const Qa5Gt& g) const {
			std::string s = "There are " + std::to_string(g.total) + " anomalous cycles (" +
			                std::to_string(g.bright) + " bright, " + std::to_string(g.dark) + " dark).";
			if (!g.boxes.empty()) {
				s += " Bounding boxes: ";
				for (size_t i = 0; i < g.boxes.size(); ++i) {
					if (i) s += ", ";
					s += bbox_text(g.boxes[i]);
				}
				s += ".";
			}
			return s;
		}
		std::string operator()(const Qa6Gt& g) const {
			return "1. Color channel: " + g.channel + ".\n2. Bounding box: " + bbox_text(g.bbox) +
			       ".\n3. Trend analysis: " + g.trend.description;
		}
	};
	return std::visit(Visitor{}, gt);
}

double cycle_mean_u8(const TsImage& image, const InstanceMeta& meta, int var_1b, int cycle_1b) {
	check_var(meta, var_1b);
	const layout::BBox box = layout::cycle_bbox(var_1b, cycle_1b, meta.layout);
	const Matrix& plane = image.channel(channel_of_var(var_1b));
	double sum = 0.0;
	for (int y = box.y1; y <= box.y2; ++y)
		for (int x = box.x1; x <= box.x2; ++x) sum += TsImage::quantize(plane(y, x));
	return sum / static_cast<double>(box.area());
}

std::optional<std::pair<int, int>> find_distinct_pair(const TsImage& image, const InstanceMeta& meta,
                                                      int var_1b, double margin, Rng& rng) {
	const std::vector<int> cycles = visible_cycles(meta, var_1b);
	std::vector<double> means(cycles.size());
	for (size_t i = 0; i < cycles.size(); ++i) means[i] = cycle_mean_u8(image, meta, var_1b, cycles[i]);
	std::vector<std::pair<int, int>> pairs;
	for (size_t a = 0; a < cycles.size(); ++a)
		for (size_t b = a + 1; b < cycles.size(); ++b)
			if (std::abs(means[a] - means[b]) > margin) pairs.emplace_back(cycles[a], cycles[b]);
	if (pairs.empty()) return std::nullopt;
	for (size_t i = pairs.size() - 1; i > 0; --i)
		std::swap(pairs[i], pairs[rng.uniform_int(0, static_cast<int>(i))]);
	return pairs.front();
}

QaInstance gen_qa1(const InstanceMeta& meta) {
	QaInstance inst;
	inst.task_id = "qa1";
	inst.series_id = meta.series_id;
	inst.question = image_preamble(meta.layout) +
	                " How many variables (time series channels) are encoded in this image?";
	inst.ground_truth = Qa1Gt{meta.layout.num_vars};
	inst.cot = "Each continuous horizontal color band corresponds to one time series channel. Counting "
	           "the bands from top to bottom gives " +
	           std::to_string(meta.layout.num_vars) + ".";
	return inst;
}

QaInstance gen_qa2(const InstanceMeta& meta, int var_1b) {
	check_var(meta, var_1b);
	const LayoutSpec& lay = meta.layout;
	const auto [y1, y2] = layout::var_y_range(var_1b, lay.image_height, lay.num_vars);
	QaInstance inst;
	inst.task_id = "qa2";
	inst.series_id = meta.series_id;
	inst.question =
	    image_preamble(lay) +
	    "\n- Variables are indexed from 1 (top band) to nvars (bottom band).\n- First, determine nvars "
	    "by counting the number of horizontal bands in the image.\n- Then compute the per-variable "
	    "height using integer (floor) division: image_size_per_var = max(1, image_size // max(1, "
	    "nvars))\nUsing y=0 at the top row and inclusive pixel indices, what is the y-range [y_start, "
	    "y_end] for variable " +
	    std::to_string(var_1b) + "?";
	inst.ground_truth = Qa2Gt{y1, y2};
	inst.cot = "1) Visual Analysis. Scanning the image reveals " + std::to_string(lay.num_vars) +
	           " distinct horizontal bands. Thus, nvars = " + std::to_string(lay.num_vars) +
	           ".\n2) Height Calculation. Image height H = " + std::to_string(lay.image_height) +
	           ". Per-variable height h = floor(" + std::to_string(lay.image_height) + " / max(1, " +
	           std::to_string(lay.num_vars) + ")) = " + std::to_string(lay.band_height) +
	           " pixels.\n3) Range Derivation. Target: Variable " + std::to_string(var_1b) +
	           " (internal index i = " + std::to_string(var_1b - 1) + ").\n- y_start = i * h = " +
	           std::to_string(y1) + ".\n- y_end = (i + 1) * h - 1 = " + std::to_string(y2) + ".";
	return inst;
}

QaInstance gen_qa3(const InstanceMeta& meta, int var_1b, int cycle_1b) {
	check_var(meta, var_1b);
	const LayoutSpec& lay = meta.layout;
	const layout::BBox box = layout::cycle_bbox(var_1b, cycle_1b, lay);
	QaInstance inst;
	inst.task_id = "qa3";
	inst.series_id = meta.series_id;
	inst.question = image_preamble(lay) + "\n" + metadata_line(meta) +
	                "\nEach cycle corresponds to a vertical strip in the image. Questions:\n(1) How many "
	                "pixels wide is one cycle?\n(2) For variable " +
	                std::to_string(var_1b) + " and cycle " + std::to_string(cycle_1b) +
	                ", give the bounding box [(x1, y1), (x2, y2)] of that cycle region.";
	inst.ground_truth = Qa3Gt{lay.cycle_width(), box};
	inst.cot = geometry_cot(meta) + "\n3) Coordinates Calculation. Target: Variable " +
	           std::to_string(var_1b) + ", Cycle " + std::to_string(cycle_1b) + ".\n- Y-range: [(" +
	           std::to_string(var_1b) + "-1)h, " + std::to_string(var_1b) + "h-1] = [" +
	           std::to_string(box.y1) + ", " + std::to_string(box.y2) + "].\n- X-range: [floor((" +
	           std::to_string(cycle_1b) + "-1)w), floor(" + std::to_string(cycle_1b) + "w) - 1] = [" +
	           std::to_string(box.x1) + ", " + std::to_string(box.x2) + "].";
	return inst;
}

QaInstance gen_qa4(const TsImage& image, const InstanceMeta& meta, int var_1b, int cycle_a_1b,
                   int cycle_b_1b, double margin) {
	check_var(meta, var_1b);
	const double mean_a = cycle_mean_u8(image, meta, var_1b, cycle_a_1b);
	const double mean_b = cycle_mean_u8(image, meta, var_1b, cycle_b_1b);
	if (std::abs(mean_a - mean_b) <= margin)
		throw NoDistinctPair("cycles " + std::to_string(cycle_a_1b) + " and " + std::to_string(cycle_b_1b) +
		                     " differ by " + fmt_fixed(std::abs(mean_a - mean_b), 1) +
		                     ", margin is " + fmt_trim(margin, 1));
	const int winner = mean_a > mean_b ? cycle_a_1b : cycle_b_1b;
	const int loser = mean_a > mean_b ? cycle_b_1b : cycle_a_1b;
	const double diff = std::abs(mean_a - mean_b);
	const double percent = 100.0 * diff / ((mean_a + mean_b) / 2.0);
	const LayoutSpec& lay = meta.layout;
	const std::string channel = channel_name(channel_of_var(var_1b));
	const auto [y1, y2] = layout::var_y_range(var_1b, lay.image_height, lay.num_vars);
	const auto [ax1, ax2] = layout::cycle_x_span(cycle_a_1b, lay);
	const auto [bx1, bx2] = layout::cycle_x_span(cycle_b_1b, lay);

	QaInstance inst;
	inst.task_id = "qa4";
	inst.series_id = meta.series_id;
	inst.question = "You are given a " + std::to_string(lay.image_height) + " x " +
	                std::to_string(lay.image_width) +
	                " image that encodes one or more time series variables as horizontal bands stacked "
	                "from top to bottom. For variable " +
	                std::to_string(var_1b) + ", compare cycle " + std::to_string(cycle_a_1b) +
	                " and cycle " + std::to_string(cycle_b_1b) +
	                " based on overall brightness (0-255 pixel values). These two cycles show visually "
	                "distinct brightness levels.\n" +
	                metadata_line(meta) + "\nWhich cycle has higher values?\n\n" + kIndexNote;
	inst.ground_truth = Qa4Gt{winner, percent};
	inst.cot = "1) Geometry & Layout. nvars = " + std::to_string(lay.num_vars) + ", band height h = " +
	           std::to_string(lay.band_height) + ". Total cycles C = " + std::to_string(lay.total_cycles) +
	           ", cycle width w = " + fmt_double(lay.cycle_width()) + ". Target Band: Variable " +
	           std::to_string(var_1b) + " (" + channel + " channel). Y-range: [" + std::to_string(y1) +
	           ", " + std::to_string(y2) + "].\n2) Region Localization.\n- Cycle " +
	           std::to_string(cycle_a_1b) + ": X-range [" + std::to_string(ax1) + ", " +
	           std::to_string(ax2) + "].\n- Cycle " + std::to_string(cycle_b_1b) + ": X-range [" +
	           std::to_string(bx1) + ", " + std::to_string(bx2) +
	           "].\n3) Statistical Comparison. Calculating mean pixel values (" + channel +
	           " channel):\n- mean_cyc" + std::to_string(cycle_a_1b) + " = " + fmt_fixed(mean_a, 1) +
	           ".\n- mean_cyc" + std::to_string(cycle_b_1b) + " = " + fmt_fixed(mean_b, 1) +
	           ".\nDifference: delta = " + fmt_fixed(diff, 1) + ". Cycle " + std::to_string(winner) +
	           " is brighter than Cycle " + std::to_string(loser) + ".";
	return inst;
}

QaInstance gen_qa5(const TsImage& image, const InstanceMeta& meta, int var_1b, double threshold) {
	check_var(meta, var_1b);
	const LayoutSpec& lay = meta.layout;
	const int c = lay.total_cycles;
	std::vector<double> means(c);
	for (int j = 1; j <= c; ++j) means[j - 1] = cycle_mean_u8(image, meta, var_1b, j);
	const double global_mean =
	    std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(c);

	Qa5Gt gt;
	std::string scan_lines;
	for (int j = 1; j <= c; ++j) {
		// Strict comparisons: a cycle exactly on the band edge is normal.
		const bool bright = means[j - 1] > global_mean + threshold;
		const bool dark = means[j - 1] < global_mean - threshold;
		if (!bright && !dark) continue;
		const layout::BBox box = layout::cycle_bbox(var_1b, j, lay);
		gt.total += 1;
		gt.bright += bright ? 1 : 0;
		gt.dark += dark ? 1 : 0;
		gt.boxes.push_back(box);
		scan_lines += "\n- Cycle " + std::to_string(j) + ": Mean " + fmt_fixed(means[j - 1], 1) + " -> " +
		              (bright ? "Bright" : "Dark") + " Anomaly. Bbox: " + bbox_text(box) + ".";
	}
	if (scan_lines.empty()) scan_lines = "\n- No cycle mean leaves the band.";

	const std::string channel = channel_name(channel_of_var(var_1b));
	const auto [y1, y2] = layout::var_y_range(var_1b, lay.image_height, lay.num_vars);

	QaInstance inst;
	inst.task_id = "qa5";
	inst.series_id = meta.series_id;
	inst.question =
	    "You are given a " + std::to_string(lay.image_height) + " x " + std::to_string(lay.image_width) +
	    " image that encodes one or more time series variables as horizontal bands stacked from top to "
	    "bottom. For variable " +
	    std::to_string(var_1b) +
	    ", identify cycles that show significantly abnormal brightness compared to the typical level.\n" +
	    metadata_line(meta) +
	    "\nDefinition: \"Significantly abnormal\" means cycles where the average pixel value (0-255 "
	    "scale) is either brighter (mean + " +
	    fmt_trim(threshold, 1) + ") or darker (mean - " + fmt_trim(threshold, 1) +
	    ") than the overall mean for this variable.\nProvide the count and bounding boxes (x1, y1, x2, "
	    "y2) for each anomalous cycle.\n\n" +
	    kIndexNote;
	inst.cot = "1) Geometry & Layout. Target: Variable " + std::to_string(var_1b) + " (" + channel +
	           " channel). Band height h = " + std::to_string(lay.band_height) + ". Y-range [" +
	           std::to_string(y1) + ", " + std::to_string(y2) + "]. Total cycles C = " +
	           std::to_string(c) + ". Cycle width w = " + fmt_double(lay.cycle_width()) +
	           ".\n2) Statistical Analysis. Computed global mean of " + std::to_string(c) +
	           " cycles: mean = " + fmt_fixed(global_mean, 1) + ".\nThresholds:\n- Bright: > " +
	           fmt_fixed(global_mean + threshold, 1) + ".\n- Dark: < " +
	           fmt_fixed(global_mean - threshold, 1) +
	           ".\n3) Anomaly Identification. Scanning individual cycle averages:" + scan_lines;
	inst.ground_truth = std::move(gt);
	return inst;
}

TrendFacts trend_facts(const TsImage& image, const InstanceMeta& meta, int var_1b, int cycle_1b) {
	check_var(meta, var_1b);
	if (cycle_1b < 1 || cycle_1b > meta.layout.total_cycles)
		throw IndexOutOfRange("cycle " + std::to_string(cycle_1b));
	const codec::Decoded decoded = codec::decode(image, meta, codec::DecodeRegion::cycles({cycle_1b}));
	const int f = meta.periodicity;
	const Vector cycle =
	    decoded.series.values.col(var_1b - 1).segment(static_cast<Eigen::Index>(cycle_1b - 1) * f, f);

	TrendFacts facts;
	Eigen::Index min_i = 0;
	Eigen::Index max_i = 0;
	facts.min_value = cycle.minCoeff(&min_i);
	facts.max_value = cycle.maxCoeff(&max_i);
	facts.min_index = static_cast<int>(min_i);
	facts.max_index = static_cast<int>(max_i);
	facts.start_value = cycle[0];
	facts.end_value = cycle[f - 1];
	const double range = facts.max_value - facts.min_value;
	const double net = facts.end_value - facts.start_value;
	if (range <= 1e-12 || std::abs(net) <= 0.02 * range)
		facts.direction = "flat";
	else
		facts.direction = net > 0 ? "increasing" : "decreasing";
	facts.description = "The series starts at " + fmt_trim(facts.start_value, 3) + " and ends at " +
	                    fmt_trim(facts.end_value, 3) + ". It reaches its minimum of " +
	                    fmt_trim(facts.min_value, 3) + " at t=" + std::to_string(facts.min_index) +
	                    " and its maximum of " + fmt_trim(facts.max_value, 3) + " at t=" +
	                    std::to_string(facts.max_index) + ". Overall the cycle is " + facts.direction + ".";
	return facts;
}

QaInstance gen_qa6(const TsImage& image, const InstanceMeta& meta, int var_1b, int cycle_1b) {
	check_var(meta, var_1b);
	const LayoutSpec& lay = meta.layout;
	const layout::BBox box = layout::cycle_bbox(var_1b, cycle_1b, lay);
	const std::string channel = channel_name(channel_of_var(var_1b));
	const TrendFacts facts = trend_facts(image, meta, var_1b, cycle_1b);

	QaInstance inst;
	inst.task_id = "qa6";
	inst.series_id = meta.series_id;
	inst.question =
	    "You are given a " + std::to_string(lay.image_height) + " x " + std::to_string(lay.image_width) +
	    " image that encodes one or more time series variables as horizontal bands stacked from top to "
	    "bottom. For variable " +
	    std::to_string(var_1b) + ", cycle " + std::to_string(cycle_1b) +
	    ", analyze the time series within this cycle:\n1. What color channel is used for this "
	    "variable?\n2. What is the bounding box (x1, y1, x2, y2) of this cycle region?\n3. After "
	    "recovering to original time series values, describe the pattern and trend of this cycle in 2-3 "
	    "sentences.\n" +
	    metadata_line(meta) + "\nRecovery information:\n- Denorm: val = arctanh(norm) * " +
	    fmt_trim(meta.norm.kappa, 6) + " * sigma + mu, where norm = 2 * pixel / 255 - 1\n- Location (mu): " +
	    fmt_trim(meta.norm.mu[var_1b - 1], 6) + ", Scale (sigma): " +
	    fmt_trim(meta.norm.sigma[var_1b - 1], 6) + "\n" + kIndexNote;
	inst.ground_truth = Qa6Gt{channel, box, facts};
	inst.cot = geometry_cot(meta) + "\n3) Localization. Target: Variable " + std::to_string(var_1b) +
	           ", Cycle " + std::to_string(cycle_1b) + ".\n- Y-range: [" + std::to_string(box.y1) + ", " +
	           std::to_string(box.y2) + "].\n- X-range: [" + std::to_string(box.x1) + ", " +
	           std::to_string(box.x2) + "].\n4) Recovery & Analysis. Channel: " + channel +
	           " (associated with Var " + std::to_string(var_1b) +
	           "). Applying the denormalization formula recovers the raw values. " + facts.description;
	return inst;
}

// ---------------------------------------------------------------------------

namespace {

std::string forecast_instruction(const InstanceMeta& meta, int context_cycles, int masked_cycles) {
	const int f = meta.periodicity;
	return "You are given a " + std::to_string(meta.layout.image_height) + " x " +
	       std::to_string(meta.layout.image_width) + " image that encodes " +
	       std::to_string(meta.layout.num_vars) +
	       " time series variable(s) as horizontal bands stacked from top to bottom. Each series "
	       "contains " +
	       std::to_string(context_cycles) + " cycles, where each cycle has " + std::to_string(f) +
	       " time steps (totaling " + std::to_string(context_cycles) + " x " + std::to_string(f) + " = " +
	       std::to_string(context_cycles * f) +
	       " observations). The right side is masked and needs to be predicted for the next " +
	       std::to_string(masked_cycles) + " cycle(s) (totaling " + std::to_string(masked_cycles) +
	       " x " + std::to_string(f) + " = " + std::to_string(masked_cycles * f) +
	       " observations). Based on the observable parts in the time series image, please restore the "
	       "masked right side.";
}

std::string imputation_instruction(const InstanceMeta& meta) {
	const int f = meta.periodicity;
	const int c = meta.layout.total_cycles;
	return "You are given a " + std::to_string(meta.layout.image_height) + " x " +
	       std::to_string(meta.layout.image_width) + " image that encodes " +
	       std::to_string(meta.layout.num_vars) +
	       " time series variable(s) as horizontal bands stacked from top to bottom. Each series "
	       "contains " +
	       std::to_string(c) + " cycles, where each cycle has " + std::to_string(f) +
	       " time steps (totaling " + std::to_string(c) + " x " + std::to_string(f) + " = " +
	       std::to_string(c * f) +
	       " observations). Some regions in these series are masked (shown as black areas) and need to "
	       "be imputed. Different series may have masked regions at different positions, and the number "
	       "of masked cycles can vary across series. Based on the observable parts in the time series "
	       "image, please restore all the masked black regions for each series.";
}

const std::string kGenerationSystemPrompt =
    "You should first think about the planning process in the mind and then generate the image. The "
    "planning process is enclosed within <think> </think> tags, i.e. <think> planning process here "
    "</think> image here";

} // namespace

std::string build_generation_cot(const TsImage& src_image, const InstanceMeta& meta) {
	const LayoutSpec& lay = meta.layout;
	const int c = lay.total_cycles;
	const bool forecast = meta.mask.kind == MaskKind::Forecast;

	std::string cot = "1) Variable Counting. The image contains " + std::to_string(lay.num_vars) +
	                  " independent time series encoded as horizontal bands. Brighter pixels indicate "
	                  "larger values, and darker pixels indicate smaller ones.\n";

	cot += "2) Variable Y-Range. Total size is " + std::to_string(lay.image_height) + " x " +
	       std::to_string(lay.image_width) + ". With nvars = " + std::to_string(lay.num_vars) +
	       ", each band height is h = " + std::to_string(lay.band_height) + " pixels. ";
	if (forecast) {
		const int masked = static_cast<int>(meta.mask.masked_cycles.front().size());
		cot += "Total cycles = " + std::to_string(c - masked) + " (history) + " + std::to_string(masked) +
		       " (pred) = " + std::to_string(c) + ". ";
	} else {
		cot += "Total cycles = " + std::to_string(c) + ". ";
	}
	cot += "Cycle width w = " + fmt_double(lay.cycle_width()) + " pixels.\n";

	cot += "3) Cycle Bounding Box.";
	for (int v = 1; v <= lay.num_vars; ++v) {
		const auto& cycles = meta.mask.masked_cycles[v - 1];
		if (cycles.empty()) {
			cot += "\n- Var " + std::to_string(v) + ": no masked cycles.";
			continue;
		}
		cot += "\n- Var " + std::to_string(v) + ": missing cycle(s) ";
		std::string run_boxes;
		for (size_t k = 0; k < cycles.size(); ++k) {
			size_t run_end = k;
			while (run_end + 1 < cycles.size() && cycles[run_end + 1] == cycles[run_end] + 1) ++run_end;
			if (k) cot += ", ";
			if (!run_boxes.empty()) run_boxes += ", ";
			cot += run_end > k ? std::to_string(cycles[k]) + "-" + std::to_string(cycles[run_end])
			                   : std::to_string(cycles[k]);
			run_boxes += bbox_text(layout::cycle_run_bbox(v, cycles[k], cycles[run_end], lay));
			k = run_end;
		}
		cot += ". Mask bbox = " + run_boxes + ".";
	}

	cot += "\n4) Mean Comparison & Anomaly Detection & Trend Analysis.";
	for (int v = 1; v <= lay.num_vars; ++v) {
		std::vector<int> vis;
		for (int j = 1; j <= c; ++j)
			if (!meta.mask.is_masked(v, j)) vis.push_back(j);
		std::vector<double> means(vis.size());
		for (size_t i = 0; i < vis.size(); ++i) means[i] = cycle_mean_u8(src_image, meta, v, vis[i]);
		const size_t hi = std::max_element(means.begin(), means.end()) - means.begin();
		const size_t lo = std::min_element(means.begin(), means.end()) - means.begin();
		const double mean_of_means =
		    std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(means.size());
		int anomalies = 0;
		for (double m : means)
			if (m > mean_of_means + kBrightnessMargin || m < mean_of_means - kBrightnessMargin) ++anomalies;
		const TrendFacts facts = trend_facts(src_image, meta, v, vis.back());
		cot += "\n- Var " + std::to_string(v) + " (" + channel_name(channel_of_var(v)) +
		       " channel): visible cycle mean brightness " + fmt_fixed(mean_of_means, 1) +
		       "; brightest visible cycle " + std::to_string(vis[hi]) + " (" + fmt_fixed(means[hi], 1) +
		       "), darkest visible cycle " + std::to_string(vis[lo]) + " (" + fmt_fixed(means[lo], 1) +
		       "); " + std::to_string(anomalies) + " visible cycle(s) deviate by more than " +
		       fmt_trim(kBrightnessMargin, 1) + ". Last visible cycle " + std::to_string(vis.back()) +
		       ": " + facts.description;
	}

	cot += forecast ? "\nFirst, analyze the historical pattern for trend and seasonality. Then, "
	                  "extrapolate the masked cycles for each variable independently. Finally, restore "
	                  "the visual representation maintaining consistent brightness encoding."
	                : "\nFirst, analyze the observable patterns around each gap to identify trend and "
	                  "seasonality. Then, impute the missing cycles using the surrounding context, "
	                  "maintaining consistent brightness encoding. Finally, output the restored image.";
	return cot;
}

GenInstance gen_generation_instance(const TimeSeries& series, MaskKind task, std::uint64_t rng_seed,
                                    const GenConfig& config, const std::string& series_id) {
	TimeSeries ts = truncate_to_period(series);
	const int f = ts.periodicity;
	const int n = static_cast<int>(ts.num_vars());
	const int available_cycles = static_cast<int>(ts.length()) / f;
	Rng rng(rng_seed);

	MaskSpec mask;
	mask.kind = task;
	TimeSeries window = ts;

	if (task == MaskKind::Forecast) {
		const int pred_len = config.prediction_length > 0 ? config.prediction_length : f;
		const int pred_cycles = (pred_len + f - 1) / f;
		// Context length constrained to [P, 2P] timesteps, in whole cycles.
		const int ctx_lo = (pred_len + f - 1) / f;
		const int ctx_hi = std::min(2 * pred_len / f, available_cycles - pred_cycles);
		if (ctx_lo > ctx_hi)
			throw CapacityViolation("cannot fit a context of [P, 2P] = [" + std::to_string(pred_len) +
			                        ", " + std::to_string(2 * pred_len) + "] timesteps plus " +
			                        std::to_string(pred_cycles) + " prediction cycles into " +
			                        std::to_string(available_cycles) + " cycles");
		const int ctx_cycles = rng.uniform_int(ctx_lo, ctx_hi);
		const int total = ctx_cycles + pred_cycles;
		window.values = ts.values.bottomRows(static_cast<Eigen::Index>(total) * f).eval();
		std::vector<int> suffix;
		for (int j = ctx_cycles + 1; j <= total; ++j) suffix.push_back(j);
		mask.masked_cycles.assign(n, suffix);
		mask.prediction_length = pred_len;
	} else {
		const int c = available_cycles;
		// Whole-cycle masking with per-variable ratio in [0.10, 0.50] and
		// at least one visible cycle.
		const int k_lo = std::max(1, (c + 9) / 10);
		const int k_hi = std::min(c - 1, c / 2);
		if (c < 2 || k_lo > k_hi)
			throw CapacityViolation("series has " + std::to_string(c) +
			                        " cycles; cannot reach a masking ratio in [0.10, 0.50]");
		mask.masked_cycles.resize(n);
		for (int v = 0; v < n; ++v) {
			const int k = rng.uniform_int(k_lo, k_hi);
			mask.masked_cycles[v] = rng.sample_without_replacement(c, k);
		}
	}

	GenInstance inst;
	codec::Encoded encoded = codec::encode(window, mask, config.encode, series_id);
	inst.src_image = std::move(encoded.image);
	inst.meta = std::move(encoded.meta);
	inst.tgt_image = codec::render_target(window, inst.meta);
	inst.window = std::move(window);
	inst.system_prompt = kGenerationSystemPrompt;
	inst.instruction =
	    task == MaskKind::Forecast
	        ? forecast_instruction(inst.meta, inst.meta.layout.total_cycles -
	                                              static_cast<int>(mask.masked_cycles.front().size()),
	                               static_cast<int>(mask.masked_cycles.front().size()))
	        : imputation_instruction(inst.meta);
	inst.gen_cot = build_generation_cot(inst.src_image, inst.meta);
	return inst;
}

} // namespace bitsi::qa
