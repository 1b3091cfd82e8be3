#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "bitsi/codec.hpp"
#include "bitsi/core.hpp"
#include "bitsi/eval.hpp"
#include "bitsi/io.hpp"
#include "bitsi/qa.hpp"
#include "bitsi/rng.hpp"
#include "bitsi/scoring.hpp"
#include "bitsi/strings.hpp"

namespace fs = std::filesystem;
using namespace bitsi;

namespace {

// Exit codes: 0 ok, 1 tolerance failure (roundtrip), 2 usage,
// 3 data error, 4 capacity violation.
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitCapacity = 4;

int log_level() {
	static const int level = [] {
		const char* env = std::getenv("BITSI_LOG");
		if (!env) return 0;
		const std::string v = env;
		if (v == "debug") return 2;
		if (v == "info") return 1;
		return 0;
	}();
	return level;
}

void log_info(const std::string& msg) {
	if (log_level() >= 1) std::cerr << "[bitsi] " << msg << "\n";
}

struct CanvasOption {
	int height = 896;
	int width = 896;
};

CanvasOption parse_canvas(const std::string& spec) {
	const size_t x = spec.find('x');
	if (x == std::string::npos) throw CLI::ValidationError("--canvas", "expected HxW, e.g. 896x896");
	try {
		CanvasOption c;
		c.height = std::stoi(spec.substr(0, x));
		c.width = std::stoi(spec.substr(x + 1));
		if (c.height < 1 || c.width < 1) throw std::invalid_argument("non-positive");
		return c;
	} catch (const std::exception&) {
		throw CLI::ValidationError("--canvas", "expected HxW, e.g. 896x896");
	}
}

struct MaskOption {
	MaskKind kind = MaskKind::Forecast;
	int prediction_length = 0; // forecast
	double ratio = 0.0;        // imputation
};

MaskOption parse_mask(const std::string& spec) {
	MaskOption m;
	if (spec.rfind("forecast:", 0) == 0) {
		m.kind = MaskKind::Forecast;
		m.prediction_length = std::stoi(spec.substr(9));
		if (m.prediction_length < 1)
			throw CLI::ValidationError("--mask", "forecast horizon must be >= 1");
		return m;
	}
	if (spec.rfind("impute:", 0) == 0) {
		m.kind = MaskKind::Imputation;
		m.ratio = std::stod(spec.substr(7));
		if (m.ratio < 0.10 || m.ratio > 0.50)
			throw CLI::ValidationError("--mask", "imputation ratio must lie in [0.10, 0.50]");
		return m;
	}
	throw CLI::ValidationError("--mask", "expected forecast:P or impute:RATIO");
}

void run_parallel(int count, int jobs, const std::function<void(int)>& fn) {
	if (jobs <= 1) {
		for (int i = 0; i < count; ++i) fn(i);
		return;
	}
	std::atomic<int> next{0};
	std::mutex error_mutex;
	std::exception_ptr error;
	auto worker = [&] {
		for (;;) {
			const int i = next.fetch_add(1);
			if (i >= count) return;
			try {
				fn(i);
			} catch (...) {
				std::lock_guard<std::mutex> lock(error_mutex);
				if (!error) error = std::current_exception();
				return;
			}
		}
	};
	std::vector<std::thread> pool;
	for (int j = 0; j < std::min(jobs, count); ++j) pool.emplace_back(worker);
	for (auto& t : pool) t.join();
	if (error) std::rethrow_exception(error);
}

std::vector<fs::path> list_sorted(const fs::path& dir, const std::string& suffix) {
	if (!fs::is_directory(dir)) throw IoError(dir.string() + " is not a directory");
	std::vector<fs::path> out;
	for (const auto& entry : fs::directory_iterator(dir)) {
		const std::string name = entry.path().filename().string();
		if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
			out.push_back(entry.path());
	}
	std::sort(out.begin(), out.end());
	return out;
}

MaskSpec sample_imputation_mask(int num_vars, int total_cycles, double ratio, Rng& rng) {
	MaskSpec mask;
	mask.kind = MaskKind::Imputation;
	const int k = std::clamp(static_cast<int>(std::lround(ratio * total_cycles)), 1, total_cycles - 1);
	mask.masked_cycles.resize(num_vars);
	for (int v = 0; v < num_vars; ++v)
		mask.masked_cycles[v] = rng.sample_without_replacement(total_cycles, k);
	return mask;
}

TsImage quantized_copy(const TsImage& image) {
	TsImage out(static_cast<int>(image.height()), static_cast<int>(image.width()));
	for (int c = 0; c < 3; ++c)
		out.channel(c) = image.channel(c).unaryExpr(
		    [](double v) { return TsImage::quantize(v) / 255.0; });
	return out;
}

// ---------------------------------------------------------------------------

struct EncodeArgs {
	std::string input;
	int periodicity = 0;
	std::string mask;
	std::string out_dir;
	std::string canvas = "896x896";
	double alpha = 0.5;
	double kappa = 4.0;
	double cmad = 0.6745;
	std::optional<std::uint64_t> seed;
};

int cmd_encode(const EncodeArgs& args) {
	const CanvasOption canvas = parse_canvas(args.canvas);
	const MaskOption mask_opt = parse_mask(args.mask);
	TimeSeries series = io::read_series_csv(args.input, args.periodicity);
	series = truncate_to_period(series);
	const int n = static_cast<int>(series.num_vars());
	const int cycles = static_cast<int>(series.length()) / args.periodicity;

	MaskSpec mask;
	if (mask_opt.kind == MaskKind::Forecast) {
		// Inference framing: the horizon extends past the provided data.
		const int pred_cycles = (mask_opt.prediction_length + args.periodicity - 1) / args.periodicity;
		std::vector<int> suffix;
		for (int j = cycles + 1; j <= cycles + pred_cycles; ++j) suffix.push_back(j);
		mask.kind = MaskKind::Forecast;
		mask.masked_cycles.assign(n, suffix);
		mask.prediction_length = mask_opt.prediction_length;
	} else {
		if (!args.seed) {
			std::cerr << "error: --seed is required with --mask impute:RATIO\n";
			return kExitUsage;
		}
		Rng rng(*args.seed);
		mask = sample_imputation_mask(n, cycles, mask_opt.ratio, rng);
	}

	codec::EncodeConfig config;
	config.image_height = canvas.height;
	config.image_width = canvas.width;
	config.alpha = args.alpha;
	config.kappa = args.kappa;
	config.c_mad = args.cmad;

	const std::string stem = fs::path(args.input).stem().string();
	codec::Encoded encoded = codec::encode(series, mask, config, stem);
	fs::create_directories(args.out_dir);
	const fs::path base = fs::path(args.out_dir) / stem;
	io::write_png(base.string() + ".src.png", encoded.image);
	io::write_floatimg(base.string() + ".src.fimg", encoded.image);
	io::write_meta(base.string() + ".meta.json", encoded.meta);
	log_info("encoded " + args.input + " -> " + base.string() + ".src.png");
	return 0;
}

struct DecodeArgs {
	std::string image;
	std::string meta;
	std::string region = "all";
	std::string out;
};

int cmd_decode(const DecodeArgs& args) {
	const InstanceMeta meta = io::read_meta(args.meta);
	const bool fimg = args.image.size() > 5 && args.image.substr(args.image.size() - 5) == ".fimg";
	const TsImage image = fimg ? io::read_floatimg(args.image) : io::read_png(args.image);
	codec::DecodeRegion region = codec::DecodeRegion::all();
	if (args.region == "masked")
		region = codec::DecodeRegion::masked_only();
	else if (args.region != "all") {
		std::cerr << "error: --region must be all or masked\n";
		return kExitUsage;
	}
	const codec::Decoded decoded = codec::decode(image, meta, region);
	io::write_series_csv(args.out, decoded.series.values, &decoded.selected);
	return 0;
}

struct RoundtripArgs {
	std::string input;
	int periodicity = 0;
	std::string bit_depth = "float";
	std::string canvas = "896x896";
	double alpha = 0.5;
	double kappa = 4.0;
	double cmad = 0.6745;
};

int cmd_roundtrip(const RoundtripArgs& args) {
	const CanvasOption canvas = parse_canvas(args.canvas);
	TimeSeries series = io::read_series_csv(args.input, args.periodicity);
	series = truncate_to_period(series);

	codec::EncodeConfig config;
	config.image_height = canvas.height;
	config.image_width = canvas.width;
	config.alpha = args.alpha;
	config.kappa = args.kappa;
	config.c_mad = args.cmad;

	MaskSpec mask;
	mask.kind = MaskKind::Forecast;
	mask.masked_cycles.assign(series.num_vars(), {});

	const codec::Encoded encoded = codec::encode(series, mask, config, "roundtrip");
	const bool eight_bit = args.bit_depth == "u8";
	if (!eight_bit && args.bit_depth != "float") {
		std::cerr << "error: --bit-depth must be float or u8\n";
		return kExitUsage;
	}
	const TsImage image = eight_bit ? quantized_copy(encoded.image) : encoded.image;
	const codec::Decoded decoded = codec::decode(image, encoded.meta);

	const Matrix u = norm::rfn_normalize(series.values, encoded.meta.norm);
	const double u_limit = eight_bit ? 0.9 : 0.99;
	double max_err = 0.0;
	double sum_err = 0.0;
	long count = 0;
	for (Eigen::Index t = 0; t < series.length(); ++t) {
		for (Eigen::Index v = 0; v < series.num_vars(); ++v) {
			if (std::abs(u(t, v)) > u_limit) continue;
			const double err = std::abs(decoded.series.values(t, v) - series.values(t, v));
			// Float tolerance is scale-relative: |err| / max(|x|, sigma).
			const double denom = eight_bit ? encoded.meta.norm.sigma[v]
			                               : std::max(std::abs(series.values(t, v)),
			                                          encoded.meta.norm.sigma[v]);
			const double rel = err / denom;
			max_err = std::max(max_err, rel);
			sum_err += rel;
			count += 1;
		}
	}
	const double tolerance = eight_bit ? 0.1 : 1e-6;
	const double mean_err = count > 0 ? sum_err / count : 0.0;
	const bool pass = max_err <= tolerance;
	std::cout << (eight_bit ? "8-bit path" : "float path") << ": " << count << " points within |u| <= "
	          << u_limit << "\n";
	std::cout << "max " << (eight_bit ? "error (sigma units)" : "relative error") << ": "
	          << fmt_double(max_err) << "\n";
	std::cout << "mean " << (eight_bit ? "error (sigma units)" : "relative error") << ": "
	          << fmt_double(mean_err) << "\n";
	std::cout << (pass ? "PASS" : "FAIL") << " (tolerance " << fmt_double(tolerance) << ")\n";
	return pass ? 0 : 1;
}

struct GenDataArgs {
	std::string input_dir;
	std::string task;
	int count = 0;
	std::uint64_t seed = 0;
	std::string out_dir;
	int periodicity = 0;
	int pred_len = 0;
	std::string canvas = "896x896";
	double alpha = 0.5;
	double kappa = 4.0;
	double cmad = 0.6745;
	int jobs = 1;
};

std::string instance_id(int index, const std::string& stem) {
	char buf[16];
	std::snprintf(buf, sizeof(buf), "%05d", index);
	return std::string(buf) + "_" + stem;
}

int cmd_gen_data(const GenDataArgs& args) {
	if (args.task != "forecast" && args.task != "impute") {
		std::cerr << "error: --task must be forecast or impute\n";
		return kExitUsage;
	}
	const CanvasOption canvas = parse_canvas(args.canvas);
	const auto files = list_sorted(args.input_dir, ".csv");
	if (files.empty()) throw IoError("no .csv files in " + args.input_dir);
	fs::create_directories(args.out_dir);

	qa::GenConfig config;
	config.encode.image_height = canvas.height;
	config.encode.image_width = canvas.width;
	config.encode.alpha = args.alpha;
	config.encode.kappa = args.kappa;
	config.encode.c_mad = args.cmad;
	config.prediction_length = args.pred_len;

	const MaskKind task = args.task == "forecast" ? MaskKind::Forecast : MaskKind::Imputation;
	std::vector<io::GenRecord> records(args.count);
	run_parallel(args.count, args.jobs, [&](int i) {
		const fs::path& file = files[static_cast<size_t>(i) % files.size()];
		const std::string stem = file.stem().string();
		const std::string id = instance_id(i, stem);
		const TimeSeries series = io::read_series_csv(file.string(), args.periodicity);
		const std::uint64_t instance_seed = Rng::derive(args.seed, static_cast<std::uint64_t>(i)).next_u64();
		qa::GenInstance inst = qa::gen_generation_instance(series, task, instance_seed, config, id);
		const fs::path base = fs::path(args.out_dir) / id;
		io::write_png(base.string() + ".src.png", inst.src_image);
		io::write_floatimg(base.string() + ".src.fimg", inst.src_image);
		io::write_png(base.string() + ".tgt.png", inst.tgt_image);
		io::write_floatimg(base.string() + ".tgt.fimg", inst.tgt_image);
		io::write_meta(base.string() + ".meta.json", inst.meta);
		// Ground truth is the window the images encode, not the whole input file.
		io::write_series_csv(base.string() + ".truth.csv", inst.window.values);
		records[static_cast<size_t>(i)] =
		    io::GenRecord{inst.system_prompt, id + ".src.png", inst.instruction, inst.gen_cot,
		                  id + ".tgt.png"};
		log_info("generated " + id);
	});
	io::write_gen_jsonl((fs::path(args.out_dir) / "dataset.jsonl").string(), records);
	return 0;
}

struct GenQaArgs {
	std::string instances_dir;
	std::string tasks = "all";
	std::uint64_t seed = 0;
	std::string out;
};

int cmd_gen_qa(const GenQaArgs& args) {
	std::vector<std::string> wanted;
	if (args.tasks == "all" || args.tasks == "qa1..qa6") {
		wanted = {"qa1", "qa2", "qa3", "qa4", "qa5", "qa6"};
	} else {
		std::stringstream ss(args.tasks);
		std::string item;
		while (std::getline(ss, item, ',')) wanted.push_back(item);
		for (const auto& t : wanted)
			if (t.size() != 3 || t.compare(0, 2, "qa") != 0 || t[2] < '1' || t[2] > '6') {
				std::cerr << "error: unknown task \"" << t << "\" (expected qa1..qa6)\n";
				return kExitUsage;
			}
	}
	const auto has = [&](const std::string& t) {
		return std::find(wanted.begin(), wanted.end(), t) != wanted.end();
	};

	const auto metas = list_sorted(args.instances_dir, ".meta.json");
	if (metas.empty()) throw IoError("no .meta.json files in " + args.instances_dir);
	std::vector<qa::QaInstance> instances;
	int index = 0;
	for (const auto& meta_path : metas) {
		const std::string id =
		    meta_path.filename().string().substr(0, meta_path.filename().string().size() - 10);
		const InstanceMeta meta = io::read_meta(meta_path.string());
		// Understanding tasks read the fully rendered image when present.
		fs::path image_path = meta_path.parent_path() / (id + ".tgt.png");
		if (!fs::exists(image_path)) image_path = meta_path.parent_path() / (id + ".src.png");
		if (!fs::exists(image_path)) throw IoError("no image next to " + meta_path.string());
		const TsImage image = io::read_png(image_path.string());
		Rng rng = Rng::derive(args.seed, static_cast<std::uint64_t>(index++));

		auto attach = [&](qa::QaInstance inst) {
			inst.image_path = image_path.filename().string();
			inst.meta_path = meta_path.filename().string();
			instances.push_back(std::move(inst));
		};
		const int c = meta.layout.total_cycles;
		if (has("qa1")) attach(qa::gen_qa1(meta));
		for (int v = 1; v <= meta.layout.num_vars; ++v) {
			if (has("qa2")) attach(qa::gen_qa2(meta, v));
			if (has("qa3")) attach(qa::gen_qa3(meta, v, rng.uniform_int(1, c)));
			if (has("qa4")) {
				auto pair = qa::find_distinct_pair(image, meta, v, qa::kBrightnessMargin, rng);
				if (pair) attach(qa::gen_qa4(image, meta, v, pair->first, pair->second));
				else log_info("qa4 skipped for " + id + " var " + std::to_string(v) + ": no distinct pair");
			}
			if (has("qa5")) attach(qa::gen_qa5(image, meta, v));
			if (has("qa6")) attach(qa::gen_qa6(image, meta, v, rng.uniform_int(1, c)));
		}
	}
	io::write_qa_jsonl(args.out, instances);
	log_info("wrote " + std::to_string(instances.size()) + " QA instances to " + args.out);
	return 0;
}

struct ScoreArgs {
	std::string pred;
	std::string gt;
	std::string out;
};

int cmd_score(const ScoreArgs& args) {
	const auto gt = io::read_qa_jsonl(args.gt);
	const auto preds = io::read_predictions_jsonl(args.pred);
	if (gt.size() != preds.size())
		throw SchemaMismatch("prediction file has " + std::to_string(preds.size()) +
		                     " lines, ground truth has " + std::to_string(gt.size()));
	std::vector<std::pair<std::string, scoring::InstanceScore>> scored;
	scored.reserve(gt.size());
	for (size_t i = 0; i < gt.size(); ++i) {
		if (!preds[i].task_id.empty() && preds[i].task_id != gt[i].task_id)
			throw SchemaMismatch("line " + std::to_string(i + 1) + ": prediction task " +
			                     preds[i].task_id + " does not match ground truth task " + gt[i].task_id);
		scored.emplace_back(gt[i].task_id,
		                    scoring::score_instance(gt[i].task_id, preds[i].text, gt[i].ground_truth));
	}
	const auto report = scoring::aggregate(scored);
	io::write_score_report(args.out, report);
	for (const auto& [task, r] : report)
		std::cout << task << ": mean " << fmt_fixed(r.mean_score, 4) << ", SR "
		          << fmt_fixed(100.0 * r.success_rate, 1) << "% (n=" << r.n << ")\n";
	return 0;
}

struct EvalArgs {
	std::string task;
	std::string baseline;
	std::string instances_dir;
	std::string out;
	int jobs = 1;
};

int cmd_eval(const EvalArgs& args) {
	if (args.task != "forecast" && args.task != "impute") {
		std::cerr << "error: --task must be forecast or impute\n";
		return kExitUsage;
	}
	eval::Baseline baseline;
	std::string external_dir;
	if (args.baseline == "naive") baseline = eval::Baseline::Naive;
	else if (args.baseline == "nearest") baseline = eval::Baseline::Nearest;
	else if (args.baseline == "linear") baseline = eval::Baseline::Linear;
	else if (args.baseline == "copycycle") baseline = eval::Baseline::CopyCycle;
	else if (args.baseline.rfind("external:", 0) == 0) {
		baseline = eval::Baseline::External;
		external_dir = args.baseline.substr(9);
	} else {
		std::cerr << "error: --baseline must be naive|nearest|linear|copycycle|external:dir\n";
		return kExitUsage;
	}

	const auto metas = list_sorted(args.instances_dir, ".meta.json");
	if (metas.empty()) throw IoError("no .meta.json files in " + args.instances_dir);

	std::vector<eval::InstanceResult> results(metas.size());
	run_parallel(static_cast<int>(metas.size()), args.jobs, [&](int i) {
		const fs::path& meta_path = metas[static_cast<size_t>(i)];
		const std::string id =
		    meta_path.filename().string().substr(0, meta_path.filename().string().size() - 10);
		const InstanceMeta meta = io::read_meta(meta_path.string());
		const fs::path dir = meta_path.parent_path();
		TimeSeries truth =
		    io::read_series_csv((dir / (id + ".truth.csv")).string(), meta.periodicity);

		Matrix prediction = truth.values;
		bool success = true;
		switch (baseline) {
		case eval::Baseline::Naive:
			// The model under test IS the reference; ratios are exactly 1.
			prediction = eval::naive_prediction(truth, meta);
			break;
		case eval::Baseline::Nearest:
		case eval::Baseline::Linear: {
			eval::GappySeries gappy;
			gappy.values = truth.values;
			gappy.observed = BoolArray::Constant(truth.length(), truth.num_vars(), true);
			for (int v = 1; v <= meta.layout.num_vars; ++v)
				for (Eigen::Index t = 0; t < truth.length(); ++t)
					if (meta.mask.is_masked(v, static_cast<int>(t) / meta.periodicity + 1))
						gappy.observed(t, v - 1) = false;
			for (Eigen::Index tt = 0; tt < truth.length(); ++tt)
				for (Eigen::Index v = 0; v < truth.num_vars(); ++v)
					if (!gappy.observed(tt, v)) gappy.values(tt, v) = 0.0;
			prediction = baseline == eval::Baseline::Nearest ? eval::baseline_nearest_impute(gappy)
			                                                 : eval::baseline_linear_impute(gappy);
			break;
		}
		case eval::Baseline::CopyCycle: {
			const TsImage src = io::read_png((dir / (id + ".src.png")).string());
			const TsImage filled = eval::baseline_copycycle_inpaint(src, meta);
			const codec::Decoded decoded =
			    codec::decode(filled, meta, codec::DecodeRegion::masked_only());
			for (Eigen::Index t = 0; t < truth.length(); ++t)
				for (Eigen::Index v = 0; v < truth.num_vars(); ++v)
					if (decoded.selected(t, v)) prediction(t, v) = decoded.series.values(t, v);
			break;
		}
		case eval::Baseline::External: {
			const fs::path completed = fs::path(external_dir) / (id + ".completed.png");
			if (!fs::exists(completed)) {
				success = false;
				break;
			}
			try {
				const TsImage image = io::read_png(completed.string());
				const codec::Decoded decoded =
				    codec::decode(image, meta, codec::DecodeRegion::masked_only());
				for (Eigen::Index t = 0; t < truth.length(); ++t)
					for (Eigen::Index v = 0; v < truth.num_vars(); ++v)
						if (decoded.selected(t, v)) prediction(t, v) = decoded.series.values(t, v);
			} catch (const Error&) {
				success = false;
			}
			break;
		}
		}

		eval::InstanceResult result;
		if (success) {
			result = eval::score_instance_values(id, truth, meta, prediction);
		} else {
			result.id = id;
			result.success = false;
		}
		results[static_cast<size_t>(i)] = std::move(result);
	});

	eval::EvalReport report;
	report.task = args.task;
	report.baseline = args.baseline;
	report.n_instances = static_cast<int>(results.size());
	int successes = 0;
	std::map<std::string, std::pair<std::vector<std::optional<double>>, std::vector<std::optional<double>>>>
	    buckets;
	std::vector<std::optional<double>> model_all;
	std::vector<std::optional<double>> naive_all;
	for (const auto& r : results) {
		if (r.success) ++successes;
		const auto model = r.success ? r.mase_model : std::nullopt;
		model_all.push_back(model);
		naive_all.push_back(r.mase_naive);
		const std::string bucket = args.task == "impute" ? eval::ratio_bucket(r.mask_ratio)
		                                                 : eval::horizon_bucket(r.prediction_length);
		buckets[bucket].first.push_back(model);
		buckets[bucket].second.push_back(r.mase_naive);
	}
	report.success_rate = results.empty() ? 1.0 : double(successes) / double(results.size());
	report.overall = eval::nmase(model_all, naive_all);
	for (const auto& [name, pair] : buckets) {
		try {
			report.buckets.push_back({name, eval::nmase(pair.first, pair.second)});
		} catch (const EmptyIntersection&) {
			eval::NmaseResult empty;
			empty.excluded = static_cast<int>(pair.first.size());
			report.buckets.push_back({name, empty});
		}
	}
	io::write_eval_report(args.out, report);
	std::cout << "nmase (" << args.baseline << ", " << args.task << "): "
	          << fmt_double(report.overall.geometric) << " over " << report.overall.n_used
	          << " instances (" << report.overall.excluded << " excluded)\n";
	return 0;
}

} // namespace

int main(int argc, char** argv) {
	CLI::App app{"Bidirectional time series <-> image codec, dataset generator, and evaluation harness"};
	app.require_subcommand(1);

	EncodeArgs encode_args;
	auto* encode = app.add_subcommand("encode", "Encode a CSV series into a masked TS-image");
	encode->add_option("--input", encode_args.input, "Input CSV")->required();
	encode->add_option("--periodicity", encode_args.periodicity, "Timesteps per cycle")->required();
	encode->add_option("--mask", encode_args.mask, "forecast:P or impute:RATIO")->required();
	encode->add_option("--out", encode_args.out_dir, "Output directory")->required();
	encode->add_option("--canvas", encode_args.canvas, "Canvas HxW (default 896x896)");
	encode->add_option("--alpha", encode_args.alpha, "MAD/Std blend weight (alpha)");
	encode->add_option("--kappa", encode_args.kappa, "tanh saturation control (kappa)");
	encode->add_option("--cmad", encode_args.cmad, "MAD consistency constant");
	encode->add_option("--seed", encode_args.seed, "RNG seed (required for impute masks)");

	DecodeArgs decode_args;
	auto* decode = app.add_subcommand("decode", "Decode a TS-image back to CSV");
	decode->add_option("--image", decode_args.image, "PNG or .fimg image")->required();
	decode->add_option("--meta", decode_args.meta, "Sidecar JSON")->required();
	decode->add_option("--region", decode_args.region, "all or masked");
	decode->add_option("--out", decode_args.out, "Output CSV")->required();

	RoundtripArgs rt_args;
	auto* roundtrip = app.add_subcommand("roundtrip", "Measure encode/decode reconstruction error");
	roundtrip->add_option("--input", rt_args.input, "Input CSV")->required();
	roundtrip->add_option("--periodicity", rt_args.periodicity, "Timesteps per cycle")->required();
	roundtrip->add_option("--bit-depth", rt_args.bit_depth, "float or u8");
	roundtrip->add_option("--canvas", rt_args.canvas, "Canvas HxW");
	roundtrip->add_option("--alpha", rt_args.alpha, "MAD/Std blend weight (alpha)");
	roundtrip->add_option("--kappa", rt_args.kappa, "tanh saturation control (kappa)");
	roundtrip->add_option("--cmad", rt_args.cmad, "MAD consistency constant");

	GenDataArgs gd_args;
	auto* gen_data = app.add_subcommand("gen-data", "Generate forecasting/imputation instances");
	gen_data->add_option("--input", gd_args.input_dir, "Directory of CSV files")->required();
	gen_data->add_option("--task", gd_args.task, "forecast or impute")->required();
	gen_data->add_option("--n", gd_args.count, "Number of instances")->required();
	gen_data->add_option("--seed", gd_args.seed, "RNG seed")->required();
	gen_data->add_option("--out", gd_args.out_dir, "Output directory")->required();
	gen_data->add_option("--periodicity", gd_args.periodicity, "Timesteps per cycle")->required();
	gen_data->add_option("--pred-len", gd_args.pred_len, "Forecast horizon in timesteps (default: one cycle)");
	gen_data->add_option("--canvas", gd_args.canvas, "Canvas HxW");
	gen_data->add_option("--alpha", gd_args.alpha, "MAD/Std blend weight (alpha)");
	gen_data->add_option("--kappa", gd_args.kappa, "tanh saturation control (kappa)");
	gen_data->add_option("--cmad", gd_args.cmad, "MAD consistency constant");
	gen_data->add_option("--jobs", gd_args.jobs, "Worker threads");

	GenQaArgs gq_args;
	auto* gen_qa = app.add_subcommand("gen-qa", "Generate understanding QA instances");
	gen_qa->add_option("--instances", gq_args.instances_dir, "Instance directory")->required();
	gen_qa->add_option("--tasks", gq_args.tasks, "Comma list of qa1..qa6, or all");
	gen_qa->add_option("--seed", gq_args.seed, "RNG seed")->required();
	gen_qa->add_option("--out", gq_args.out, "Output JSONL")->required();

	ScoreArgs score_args;
	auto* score = app.add_subcommand("score", "Score predictions against QA ground truth");
	score->add_option("--pred", score_args.pred, "Predictions JSONL")->required();
	score->add_option("--gt", score_args.gt, "Ground truth JSONL")->required();
	score->add_option("--out", score_args.out, "Report JSON")->required();

	EvalArgs eval_args;
	auto* evalc = app.add_subcommand("eval", "Evaluate a baseline or external model with nMASE");
	evalc->add_option("--task", eval_args.task, "forecast or impute")->required();
	evalc->add_option("--baseline", eval_args.baseline, "naive|nearest|linear|copycycle|external:dir")
	    ->required();
	evalc->add_option("--instances", eval_args.instances_dir, "Instance directory")->required();
	evalc->add_option("--out", eval_args.out, "Report JSON")->required();
	evalc->add_option("--jobs", eval_args.jobs, "Worker threads");

	try {
		app.parse(argc, argv);
	} catch (const CLI::CallForHelp& e) {
		return app.exit(e);
	} catch (const CLI::ParseError& e) {
		app.exit(e);
		return kExitUsage;
	}

	try {
		if (encode->parsed()) return cmd_encode(encode_args);
		if (decode->parsed()) return cmd_decode(decode_args);
		if (roundtrip->parsed()) return cmd_roundtrip(rt_args);
		if (gen_data->parsed()) return cmd_gen_data(gd_args);
		if (gen_qa->parsed()) return cmd_gen_qa(gq_args);
		if (score->parsed()) return cmd_score(score_args);
		if (evalc->parsed()) return cmd_eval(eval_args);
	} catch (const CapacityViolation& e) {
		std::cerr << "capacity violation: " << e.what() << "\n";
		return kExitCapacity;
	} catch (const Error& e) {
		std::cerr << "error: " << e.what() << "\n";
		return kExitData;
	} catch (const std::exception& e) {
		std::cerr << "error: " << e.what() << "\n";
		return kExitData;
	}
	return 0;
}
