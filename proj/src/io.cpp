#include "bitsi/io.hpp"

#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <png.h>
#include <nlohmann/json.hpp>

#include "bitsi/strings.hpp"

using nlohmann::json;

namespace bitsi::io {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
	std::vector<std::string> out;
	std::string cur;
	for (char c : line) {
		if (c == ',') {
			out.push_back(cur);
			cur.clear();
		} else if (c != '\r') {
			cur.push_back(c);
		}
	}
	out.push_back(cur);
	return out;
}

std::string trim(const std::string& s) {
	size_t b = s.find_first_not_of(" \t");
	if (b == std::string::npos) return "";
	size_t e = s.find_last_not_of(" \t");
	return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& field, double& out) {
	const std::string t = trim(field);
	if (t.empty()) return false;
	const char* begin = t.data();
	const char* end = begin + t.size();
	auto [ptr, ec] = std::from_chars(begin, end, out);
	return ec == std::errc() && ptr == end;
}

} // namespace

TimeSeries read_series_csv(const std::string& path, int periodicity) {
	std::ifstream in(path);
	if (!in) throw IoError("cannot open " + path);
	std::vector<std::vector<double>> rows;
	std::string line;
	int file_row = 0;
	int width = -1;
	bool first_content_line = true;
	while (std::getline(in, line)) {
		++file_row;
		if (trim(line).empty()) continue;
		const auto fields = split_fields(line);
		std::vector<double> row(fields.size());
		bool numeric = true;
		int bad_col = 0;
		for (size_t i = 0; i < fields.size(); ++i) {
			if (!parse_double(fields[i], row[i])) {
				numeric = false;
				bad_col = static_cast<int>(i) + 1;
				break;
			}
			if (!std::isfinite(row[i])) throw ParseError(file_row, static_cast<int>(i) + 1, "non-finite value");
		}
		if (!numeric) {
			// A non-numeric first content line is a header.
			if (first_content_line) {
				first_content_line = false;
				continue;
			}
			throw ParseError(file_row, bad_col, "expected a number, got \"" + trim(fields[bad_col - 1]) + "\"");
		}
		first_content_line = false;
		if (width < 0) width = static_cast<int>(row.size());
		if (static_cast<int>(row.size()) != width)
			throw ParseError(file_row, std::min<int>(width, static_cast<int>(row.size())) + 1,
			                 "expected " + std::to_string(width) + " columns, got " +
			                     std::to_string(row.size()));
		rows.push_back(std::move(row));
	}
	if (rows.empty()) throw EmptyFile(path + " has no data rows");

	TimeSeries series;
	series.periodicity = periodicity;
	series.values.resize(static_cast<Eigen::Index>(rows.size()), width);
	for (size_t t = 0; t < rows.size(); ++t)
		for (int v = 0; v < width; ++v) series.values(static_cast<Eigen::Index>(t), v) = rows[t][v];
	validate(series);
	return series;
}

void write_series_csv(const std::string& path, const Matrix& values, const BoolArray* selected) {
	std::ofstream out(path, std::ios::binary);
	if (!out) throw IoError("cannot write " + path);
	for (Eigen::Index t = 0; t < values.rows(); ++t) {
		for (Eigen::Index v = 0; v < values.cols(); ++v) {
			if (v) out << ',';
			if (!selected || (*selected)(t, v)) out << fmt_double(values(t, v));
		}
		out << '\n';
	}
	if (!out) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// PNG

void write_png(const std::string& path, const TsImage& image) {
	FILE* fp = std::fopen(path.c_str(), "wb");
	if (!fp) throw IoError("cannot write " + path);
	png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
	png_infop info = png ? png_create_info_struct(png) : nullptr;
	if (!png || !info) {
		if (png) png_destroy_write_struct(&png, &info);
		std::fclose(fp);
		throw IoError("libpng initialization failed");
	}
	if (setjmp(png_jmpbuf(png))) {
		png_destroy_write_struct(&png, &info);
		std::fclose(fp);
		throw IoError("libpng write failed: " + path);
	}
	png_init_io(png, fp);
	const int h = static_cast<int>(image.height());
	const int w = static_cast<int>(image.width());
	png_set_IHDR(png, info, w, h, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
	             PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
	// Pinned encoder settings keep output bytes reproducible.
	png_set_compression_level(png, 6);
	png_set_filter(png, 0, PNG_FILTER_NONE);
	png_write_info(png, info);
	std::vector<png_byte> row(static_cast<size_t>(w) * 3);
	for (int y = 0; y < h; ++y) {
		for (int x = 0; x < w; ++x) {
			row[3 * x + 0] = TsImage::quantize(image.r(y, x));
			row[3 * x + 1] = TsImage::quantize(image.g(y, x));
			row[3 * x + 2] = TsImage::quantize(image.b(y, x));
		}
		png_write_row(png, row.data());
	}
	png_write_end(png, nullptr);
	png_destroy_write_struct(&png, &info);
	std::fclose(fp);
}

TsImage read_png(const std::string& path) {
	FILE* fp = std::fopen(path.c_str(), "rb");
	if (!fp) throw IoError("cannot open " + path);
	png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
	png_infop info = png ? png_create_info_struct(png) : nullptr;
	if (!png || !info) {
		if (png) png_destroy_read_struct(&png, &info, nullptr);
		std::fclose(fp);
		throw IoError("libpng initialization failed");
	}
	if (setjmp(png_jmpbuf(png))) {
		png_destroy_read_struct(&png, &info, nullptr);
		std::fclose(fp);
		throw IoError("libpng read failed: " + path);
	}
	png_init_io(png, fp);
	png_read_info(png, info);
	// Normalize anything we might be handed to 8-bit RGB.
	png_set_expand(png);
	png_set_strip_16(png);
	png_set_strip_alpha(png);
	const png_byte color = png_get_color_type(png, info);
	if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
		png_set_gray_to_rgb(png);
	png_read_update_info(png, info);
	const int h = static_cast<int>(png_get_image_height(png, info));
	const int w = static_cast<int>(png_get_image_width(png, info));
	if (png_get_rowbytes(png, info) != static_cast<size_t>(w) * 3) {
		png_destroy_read_struct(&png, &info, nullptr);
		std::fclose(fp);
		throw IoError("unsupported PNG layout: " + path);
	}
	TsImage image(h, w);
	std::vector<png_byte> row(static_cast<size_t>(w) * 3);
	for (int y = 0; y < h; ++y) {
		png_read_row(png, row.data(), nullptr);
		for (int x = 0; x < w; ++x) {
			image.r(y, x) = row[3 * x + 0] / 255.0;
			image.g(y, x) = row[3 * x + 1] / 255.0;
			image.b(y, x) = row[3 * x + 2] / 255.0;
		}
	}
	png_read_end(png, nullptr);
	png_destroy_read_struct(&png, &info, nullptr);
	std::fclose(fp);
	return image;
}

// ---------------------------------------------------------------------------
// Float image container

namespace {

constexpr char kFloatImgMagic[4] = {'F', 'I', 'M', 'G'};

void put_u32(std::ostream& out, std::uint32_t v) {
	char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff), char((v >> 24) & 0xff)};
	out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in) {
	unsigned char b[4];
	in.read(reinterpret_cast<char*>(b), 4);
	return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
	       (std::uint32_t(b[3]) << 24);
}

} // namespace

void write_floatimg(const std::string& path, const TsImage& image) {
	std::ofstream out(path, std::ios::binary);
	if (!out) throw IoError("cannot write " + path);
	out.write(kFloatImgMagic, 4);
	put_u32(out, static_cast<std::uint32_t>(image.height()));
	put_u32(out, static_cast<std::uint32_t>(image.width()));
	put_u32(out, 3);
	for (Eigen::Index y = 0; y < image.height(); ++y)
		for (Eigen::Index x = 0; x < image.width(); ++x)
			for (int c = 0; c < 3; ++c) {
				const double v = image.channel(c)(y, x);
				out.write(reinterpret_cast<const char*>(&v), sizeof(v));
			}
	if (!out) throw IoError("write failed: " + path);
}

TsImage read_floatimg(const std::string& path) {
	std::ifstream in(path, std::ios::binary);
	if (!in) throw IoError("cannot open " + path);
	char magic[4];
	in.read(magic, 4);
	if (!in || std::memcmp(magic, kFloatImgMagic, 4) != 0)
		throw IoError(path + " is not a float image container");
	const std::uint32_t h = get_u32(in);
	const std::uint32_t w = get_u32(in);
	const std::uint32_t channels = get_u32(in);
	if (!in || channels != 3) throw IoError(path + ": unsupported channel count");
	TsImage image(static_cast<int>(h), static_cast<int>(w));
	for (std::uint32_t y = 0; y < h; ++y)
		for (std::uint32_t x = 0; x < w; ++x)
			for (int c = 0; c < 3; ++c) {
				double v;
				in.read(reinterpret_cast<char*>(&v), sizeof(v));
				image.channel(c)(y, x) = v;
			}
	if (!in) throw IoError(path + " is truncated");
	return image;
}

// ---------------------------------------------------------------------------
// Meta sidecar

std::string meta_to_json(const InstanceMeta& meta) {
	json j;
	j["schema_version"] = kMetaSchemaVersion;
	j["series_id"] = meta.series_id;
	j["image_height"] = meta.layout.image_height;
	j["image_width"] = meta.layout.image_width;
	j["num_vars"] = meta.layout.num_vars;
	j["band_height"] = meta.layout.band_height;
	j["total_cycles"] = meta.layout.total_cycles;
	j["periodicity"] = meta.periodicity;
	j["context_length"] = meta.context_length;
	j["mu"] = std::vector<double>(meta.norm.mu.data(), meta.norm.mu.data() + meta.norm.mu.size());
	j["sigma"] =
	    std::vector<double>(meta.norm.sigma.data(), meta.norm.sigma.data() + meta.norm.sigma.size());
	j["alpha"] = meta.norm.alpha;
	j["c_mad"] = meta.norm.c_mad;
	j["kappa"] = meta.norm.kappa;
	j["mask"]["kind"] = meta.mask.kind == MaskKind::Forecast ? "forecast" : "imputation";
	j["mask"]["masked_cycles"] = meta.mask.masked_cycles;
	j["mask"]["prediction_length"] = meta.mask.prediction_length;
	return j.dump(2) + "\n";
}

InstanceMeta meta_from_json(const std::string& text) {
	json j;
	try {
		j = json::parse(text);
	} catch (const json::exception& e) {
		throw SchemaMismatch(std::string("meta is not valid JSON: ") + e.what());
	}
	try {
		if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
			throw SchemaMismatch("meta lacks an integer schema_version");
		const int version = j["schema_version"].get<int>();
		if (version != kMetaSchemaVersion)
			throw SchemaMismatch("unsupported meta schema_version " + std::to_string(version));
		InstanceMeta meta;
		meta.series_id = j.at("series_id").get<std::string>();
		meta.layout.image_height = j.at("image_height").get<int>();
		meta.layout.image_width = j.at("image_width").get<int>();
		meta.layout.num_vars = j.at("num_vars").get<int>();
		meta.layout.band_height = j.at("band_height").get<int>();
		meta.layout.total_cycles = j.at("total_cycles").get<int>();
		meta.periodicity = j.at("periodicity").get<int>();
		meta.context_length = j.at("context_length").get<int>();
		const auto mu = j.at("mu").get<std::vector<double>>();
		const auto sigma = j.at("sigma").get<std::vector<double>>();
		meta.norm.mu = Eigen::Map<const Vector>(mu.data(), static_cast<Eigen::Index>(mu.size()));
		meta.norm.sigma = Eigen::Map<const Vector>(sigma.data(), static_cast<Eigen::Index>(sigma.size()));
		meta.norm.alpha = j.at("alpha").get<double>();
		meta.norm.c_mad = j.at("c_mad").get<double>();
		meta.norm.kappa = j.at("kappa").get<double>();
		const std::string kind = j.at("mask").at("kind").get<std::string>();
		if (kind == "forecast")
			meta.mask.kind = MaskKind::Forecast;
		else if (kind == "imputation")
			meta.mask.kind = MaskKind::Imputation;
		else
			throw SchemaMismatch("unknown mask kind \"" + kind + "\"");
		meta.mask.masked_cycles = j.at("mask").at("masked_cycles").get<std::vector<std::vector<int>>>();
		meta.mask.prediction_length = j.at("mask").at("prediction_length").get<int>();
		return meta;
	} catch (const json::exception& e) {
		throw SchemaMismatch(std::string("meta field error: ") + e.what());
	}
}

void write_meta(const std::string& path, const InstanceMeta& meta) {
	write_text_file(path, meta_to_json(meta));
}

InstanceMeta read_meta(const std::string& path) { return meta_from_json(read_text_file(path)); }

// ---------------------------------------------------------------------------
// JSONL

namespace {

json bbox_to_json(const layout::BBox& b) {
	return json::array({json::array({b.x1, b.y1}), json::array({b.x2, b.y2})});
}

layout::BBox bbox_from_json(const json& j) {
	return layout::BBox{j.at(0).at(0).get<int>(), j.at(0).at(1).get<int>(), j.at(1).at(0).get<int>(),
	                    j.at(1).at(1).get<int>()};
}

json gt_to_json(const qa::QaGroundTruth& gt) {
	struct Visitor {
		json operator()(const qa::Qa1Gt& g) const { return json{{"count", g.count}}; }
		json operator()(const qa::Qa2Gt& g) const {
			return json{{"y_range", json::array({g.y_start, g.y_end})}};
		}
		json operator()(const qa::Qa3Gt& g) const {
			return json{{"cycle_width", g.cycle_width}, {"bbox", bbox_to_json(g.bbox)}};
		}
		json operator()(const qa::Qa4Gt& g) const {
			return json{{"winner", g.winner}, {"diff_percent", g.diff_percent}};
		}
		json operator()(const qa::Qa5Gt& g) const {
			json boxes = json::array();
			for (const auto& b : g.boxes) boxes.push_back(bbox_to_json(b));
			return json{{"total", g.total}, {"bright", g.bright}, {"dark", g.dark}, {"bboxes", boxes}};
		}
		json operator()(const qa::Qa6Gt& g) const {
			return json{{"channel", g.channel},
			            {"bbox", bbox_to_json(g.bbox)},
			            {"trend",
			             json{{"min_value", g.trend.min_value},
			                  {"min_index", g.trend.min_index},
			                  {"max_value", g.trend.max_value},
			                  {"max_index", g.trend.max_index},
			                  {"start_value", g.trend.start_value},
			                  {"end_value", g.trend.end_value},
			                  {"direction", g.trend.direction},
			                  {"description", g.trend.description}}}};
		}
	};
	return std::visit(Visitor{}, gt);
}

qa::QaGroundTruth gt_from_json(const std::string& task_id, const json& j) {
	if (task_id == "qa1") return qa::Qa1Gt{j.at("count").get<int>()};
	if (task_id == "qa2")
		return qa::Qa2Gt{j.at("y_range").at(0).get<int>(), j.at("y_range").at(1).get<int>()};
	if (task_id == "qa3")
		return qa::Qa3Gt{j.at("cycle_width").get<double>(), bbox_from_json(j.at("bbox"))};
	if (task_id == "qa4") return qa::Qa4Gt{j.at("winner").get<int>(), j.at("diff_percent").get<double>()};
	if (task_id == "qa5") {
		qa::Qa5Gt g;
		g.total = j.at("total").get<int>();
		g.bright = j.at("bright").get<int>();
		g.dark = j.at("dark").get<int>();
		for (const auto& b : j.at("bboxes")) g.boxes.push_back(bbox_from_json(b));
		return g;
	}
	if (task_id == "qa6") {
		qa::Qa6Gt g;
		g.channel = j.at("channel").get<std::string>();
		g.bbox = bbox_from_json(j.at("bbox"));
		const json& t = j.at("trend");
		g.trend.min_value = t.at("min_value").get<double>();
		g.trend.min_index = t.at("min_index").get<int>();
		g.trend.max_value = t.at("max_value").get<double>();
		g.trend.max_index = t.at("max_index").get<int>();
		g.trend.start_value = t.at("start_value").get<double>();
		g.trend.end_value = t.at("end_value").get<double>();
		g.trend.direction = t.at("direction").get<std::string>();
		g.trend.description = t.at("description").get<std::string>();
		return g;
	}
	throw SchemaMismatch("unknown task id \"" + task_id + "\"");
}

std::vector<json> read_jsonl(const std::string& path) {
	std::ifstream in(path);
	if (!in) throw IoError("cannot open " + path);
	std::vector<json> out;
	std::string line;
	int line_no = 0;
	while (std::getline(in, line)) {
		++line_no;
		if (trim(line).empty()) continue;
		try {
			out.push_back(json::parse(line));
		} catch (const json::exception& e) {
			throw SchemaMismatch(path + ":" + std::to_string(line_no) + " is not valid JSON: " + e.what());
		}
	}
	return out;
}

} // namespace

void write_qa_jsonl(const std::string& path, const std::vector<qa::QaInstance>& instances) {
	std::ofstream out(path, std::ios::binary);
	if (!out) throw IoError("cannot write " + path);
	for (const auto& inst : instances) {
		json j;
		j["task_id"] = inst.task_id;
		j["series_id"] = inst.series_id;
		j["question"] = inst.question;
		j["ground_truth"] = gt_to_json(inst.ground_truth);
		j["cot"] = inst.cot;
		j["image_path"] = inst.image_path;
		j["meta_path"] = inst.meta_path;
		out << j.dump() << '\n';
	}
	if (!out) throw IoError("write failed: " + path);
}

std::vector<qa::QaInstance> read_qa_jsonl(const std::string& path) {
	std::vector<qa::QaInstance> out;
	for (const auto& j : read_jsonl(path)) {
		try {
			qa::QaInstance inst;
			inst.task_id = j.at("task_id").get<std::string>();
			inst.series_id = j.at("series_id").get<std::string>();
			inst.question = j.at("question").get<std::string>();
			inst.ground_truth = gt_from_json(inst.task_id, j.at("ground_truth"));
			inst.cot = j.at("cot").get<std::string>();
			inst.image_path = j.value("image_path", "");
			inst.meta_path = j.value("meta_path", "");
			out.push_back(std::move(inst));
		} catch (const json::exception& e) {
			throw SchemaMismatch(path + ": " + e.what());
		}
	}
	return out;
}

void write_gen_jsonl(const std::string& path, const std::vector<GenRecord>& records) {
	std::ofstream out(path, std::ios::binary);
	if (!out) throw IoError("cannot write " + path);
	for (const auto& r : records) {
		json j;
		j["system_prompt"] = r.system_prompt;
		j["src_image_path"] = r.src_image_path;
		j["instruction"] = r.instruction;
		j["gen_cot"] = r.gen_cot;
		j["tgt_image_path"] = r.tgt_image_path;
		out << j.dump() << '\n';
	}
	if (!out) throw IoError("write failed: " + path);
}

std::vector<GenRecord> read_gen_jsonl(const std::string& path) {
	std::vector<GenRecord> out;
	for (const auto& j : read_jsonl(path)) {
		try {
			GenRecord r;
			r.system_prompt = j.at("system_prompt").get<std::string>();
			r.src_image_path = j.at("src_image_path").get<std::string>();
			r.instruction = j.at("instruction").get<std::string>();
			r.gen_cot = j.at("gen_cot").get<std::string>();
			r.tgt_image_path = j.at("tgt_image_path").get<std::string>();
			out.push_back(std::move(r));
		} catch (const json::exception& e) {
			throw SchemaMismatch(path + ": " + e.what());
		}
	}
	return out;
}

std::vector<Prediction> read_predictions_jsonl(const std::string& path) {
	std::vector<Prediction> out;
	for (const auto& j : read_jsonl(path)) {
		Prediction p;
		p.task_id = j.value("task_id", "");
		if (j.contains("prediction")) {
			p.text = j.at("prediction").get<std::string>();
		} else if (j.contains("ground_truth")) {
			// A ground-truth file scored against itself: render the
			// canonical answer from its own payload.
			p.text = qa::format_answer(gt_from_json(j.at("task_id").get<std::string>(), j.at("ground_truth")));
		} else {
			throw SchemaMismatch(path + ": line has neither \"prediction\" nor \"ground_truth\"");
		}
		out.push_back(std::move(p));
	}
	return out;
}

void write_score_report(const std::string& path,
                        const std::map<std::string, scoring::TaskReport>& report) {
	json tasks;
	for (const auto& [task, r] : report)
		tasks[task] = json{{"mean_score", r.mean_score}, {"success_rate", r.success_rate}, {"n", r.n}};
	write_text_file(path, json{{"tasks", tasks}}.dump(2) + "\n");
}

void write_eval_report(const std::string& path, const eval::EvalReport& report) {
	json buckets = json::array();
	for (const auto& b : report.buckets)
		buckets.push_back(json{{"bucket", b.bucket},
		                       {"nmase", b.nmase.geometric},
		                       {"nmase_arithmetic", b.nmase.arithmetic},
		                       {"n", b.nmase.n_used},
		                       {"excluded", b.nmase.excluded}});
	json j{{"task", report.task},
	       {"baseline", report.baseline},
	       {"buckets", buckets},
	       {"overall",
	        json{{"nmase", report.overall.geometric},
	             {"nmase_arithmetic", report.overall.arithmetic},
	             {"n", report.overall.n_used},
	             {"excluded", report.overall.excluded}}},
	       {"success_rate", report.success_rate},
	       {"n_instances", report.n_instances}};
	write_text_file(path, j.dump(2) + "\n");
}

std::string read_text_file(const std::string& path) {
	std::ifstream in(path, std::ios::binary);
	if (!in) throw IoError("cannot open " + path);
	std::ostringstream buf;
	buf << in.rdbuf();
	return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
	std::ofstream out(path, std::ios::binary);
	if (!out) throw IoError("cannot write " + path);
	out << content;
	if (!out) throw IoError("write failed: " + path);
}

} // namespace bitsi::io
