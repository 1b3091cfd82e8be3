#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "bitsi/io.hpp"
#include "support/synthetic.hpp"

using namespace bitsi;
namespace fs = std::filesystem;

namespace {

struct TempDir {
	fs::path path;
	TempDir() {
		path = fs::temp_directory_path() / ("bitsi_test_" + std::to_string(std::rand()));
		fs::create_directories(path);
	}
	~TempDir() { fs::remove_all(path); }
	std::string file(const std::string& name) const { return (path / name).string(); }
};

} // namespace

TEST_CASE("csv ingestion") {
	TempDir dir;
	SUBCASE("numeric matrix with a header") {
		std::ofstream out(dir.file("ok.csv"));
		out << "a,b,c\n";
		for (int t = 0; t < 240; ++t) out << t << "," << t * 0.5 << "," << -t << "\n";
		out.close();
		const TimeSeries s = io::read_series_csv(dir.file("ok.csv"), 24);
		CHECK(s.length() == 240);
		CHECK(s.num_vars() == 3);
		CHECK(s.periodicity == 24);
		CHECK(s.values(10, 1) == 5.0);
	}
	SUBCASE("malformed cell reports its location") {
		std::ofstream out(dir.file("bad.csv"));
		for (int t = 1; t <= 10; ++t) {
			if (t == 7)
				out << "1.0,abc,3.0\n";
			else
				out << "1.0,2.0,3.0\n";
		}
		out.close();
		try {
			io::read_series_csv(dir.file("bad.csv"), 2);
			FAIL("expected ParseError");
		} catch (const ParseError& e) {
			CHECK(e.row == 7);
			CHECK(e.col == 2);
		}
	}
	SUBCASE("non-finite values are rejected") {
		std::ofstream out(dir.file("nan.csv"));
		out << "1.0\nnan\n";
		out.close();
		CHECK_THROWS_AS(io::read_series_csv(dir.file("nan.csv"), 1), ParseError);
	}
	SUBCASE("header-only file is empty") {
		std::ofstream out(dir.file("empty.csv"));
		out << "a,b,c\n";
		out.close();
		CHECK_THROWS_AS(io::read_series_csv(dir.file("empty.csv"), 1), EmptyFile);
	}
	SUBCASE("ragged rows are rejected") {
		std::ofstream out(dir.file("ragged.csv"));
		out << "1,2,3\n1,2\n";
		out.close();
		CHECK_THROWS_AS(io::read_series_csv(dir.file("ragged.csv"), 1), ParseError);
	}
	SUBCASE("write/read round trip preserves doubles") {
		Matrix values(3, 2);
		values << 0.1, 1e-17, -3.25, 2.0 / 3.0, 1e300, -0.0;
		io::write_series_csv(dir.file("rt.csv"), values);
		const TimeSeries back = io::read_series_csv(dir.file("rt.csv"), 1);
		CHECK(back.values == values);
	}
}

TEST_CASE("float image container round trip is bit exact") {
	TempDir dir;
	Rng rng(999);
	TsImage image(17, 23);
	for (int c = 0; c < 3; ++c)
		for (int y = 0; y < 17; ++y)
			for (int x = 0; x < 23; ++x) image.channel(c)(y, x) = rng.uniform();
	io::write_floatimg(dir.file("img.fimg"), image);
	const TsImage back = io::read_floatimg(dir.file("img.fimg"));
	CHECK(back.r == image.r);
	CHECK(back.g == image.g);
	CHECK(back.b == image.b);

	SUBCASE("bad magic is rejected") {
		io::write_text_file(dir.file("junk.fimg"), "NOPE....");
		CHECK_THROWS_AS(io::read_floatimg(dir.file("junk.fimg")), IoError);
	}
}

TEST_CASE("png round trip preserves quantized pixels") {
	TempDir dir;
	Rng rng(1234);
	TsImage image(31, 29);
	for (int c = 0; c < 3; ++c)
		for (int y = 0; y < 31; ++y)
			for (int x = 0; x < 29; ++x) image.channel(c)(y, x) = rng.uniform();
	io::write_png(dir.file("img.png"), image);
	const TsImage back = io::read_png(dir.file("img.png"));
	for (int c = 0; c < 3; ++c)
		for (int y = 0; y < 31; ++y)
			for (int x = 0; x < 29; ++x)
				CHECK(TsImage::quantize(back.channel(c)(y, x)) ==
				      TsImage::quantize(image.channel(c)(y, x)));
}

TEST_CASE("meta sidecar round trips bit exactly") {
	TempDir dir;
	InstanceMeta meta;
	meta.layout = LayoutSpec{896, 896, 3, 298, 10};
	meta.periodicity = 24;
	meta.context_length = 192;
	meta.series_id = "series/odd \"name\"";
	meta.norm.mu = Vector(3);
	meta.norm.mu << 0.1 + 0.2, -1e-17, 3.0;
	meta.norm.sigma = Vector(3);
	meta.norm.sigma << 1e-8, 2.0 / 3.0, 123.456789012345678;
	meta.norm.alpha = 0.5;
	meta.norm.c_mad = 0.6745;
	meta.norm.kappa = 4.0;
	meta.mask.kind = MaskKind::Imputation;
	meta.mask.masked_cycles = {{2, 3}, {1}, {5, 7, 9}};
	meta.mask.prediction_length = 0;

	io::write_meta(dir.file("m.json"), meta);
	const InstanceMeta back = io::read_meta(dir.file("m.json"));
	CHECK(back.layout.image_height == meta.layout.image_height);
	CHECK(back.layout.band_height == meta.layout.band_height);
	CHECK(back.layout.total_cycles == meta.layout.total_cycles);
	CHECK(back.series_id == meta.series_id);
	CHECK(back.norm.mu == meta.norm.mu);       // bit exact
	CHECK(back.norm.sigma == meta.norm.sigma); // bit exact
	CHECK(back.mask.masked_cycles == meta.mask.masked_cycles);
	CHECK(back.mask.kind == MaskKind::Imputation);

	SUBCASE("sidecar uses the pinned field names") {
		const std::string text = io::read_text_file(dir.file("m.json"));
		for (const char* field :
		     {"\"image_height\"", "\"image_width\"", "\"num_vars\"", "\"band_height\"",
		      "\"total_cycles\"", "\"periodicity\"", "\"context_length\"", "\"mu\"", "\"sigma\"",
		      "\"alpha\"", "\"c_mad\"", "\"kappa\"", "\"mask\"", "\"kind\"", "\"masked_cycles\"",
		      "\"prediction_length\"", "\"series_id\"", "\"schema_version\""})
			CHECK(text.find(field) != std::string::npos);
	}
	SUBCASE("unknown schema version fails loudly") {
		std::string text = io::read_text_file(dir.file("m.json"));
		const size_t pos = text.find("\"schema_version\": 1");
		REQUIRE(pos != std::string::npos);
		text.replace(pos, 19, "\"schema_version\": 99");
		io::write_text_file(dir.file("m99.json"), text);
		CHECK_THROWS_AS(io::read_meta(dir.file("m99.json")), SchemaMismatch);
	}
}

TEST_CASE("qa jsonl round trip") {
	TempDir dir;
	std::vector<qa::QaInstance> instances;
	qa::QaInstance a;
	a.task_id = "qa3";
	a.series_id = "s1";
	a.question = "where is it?\nline two";
	a.ground_truth = qa::Qa3Gt{89.6, layout::BBox{179, 298, 267, 595}};
	a.cot = "think";
	a.image_path = "s1.tgt.png";
	a.meta_path = "s1.meta.json";
	instances.push_back(a);
	qa::QaInstance b;
	b.task_id = "qa5";
	b.series_id = "s2";
	b.question = "count?";
	b.ground_truth = qa::Qa5Gt{2, 1, 1, {layout::BBox{0, 0, 5, 5}, layout::BBox{10, 0, 15, 5}}};
	b.cot = "scan";
	instances.push_back(b);

	io::write_qa_jsonl(dir.file("qa.jsonl"), instances);
	const auto back = io::read_qa_jsonl(dir.file("qa.jsonl"));
	REQUIRE(back.size() == 2);
	CHECK(back[0].task_id == "qa3");
	CHECK(back[0].question == a.question);
	CHECK(std::get<qa::Qa3Gt>(back[0].ground_truth).bbox == layout::BBox{179, 298, 267, 595});
	CHECK(std::get<qa::Qa5Gt>(back[1].ground_truth).boxes.size() == 2);

	SUBCASE("prediction reader falls back to canonical answers") {
		const auto preds = io::read_predictions_jsonl(dir.file("qa.jsonl"));
		REQUIRE(preds.size() == 2);
		CHECK(preds[0].task_id == "qa3");
		CHECK(preds[0].text.find("[(179, 298), (267, 595)]") != std::string::npos);
		CHECK(preds[1].text.find("2 anomalous cycles (1 bright, 1 dark)") != std::string::npos);
	}
}

TEST_CASE("gen jsonl round trip") {
	TempDir dir;
	io::GenRecord r;
	r.system_prompt = "plan first";
	r.src_image_path = "x.src.png";
	r.instruction = "restore";
	r.gen_cot = "1) ...";
	r.tgt_image_path = "x.tgt.png";
	io::write_gen_jsonl(dir.file("gen.jsonl"), {r});
	const auto back = io::read_gen_jsonl(dir.file("gen.jsonl"));
	REQUIRE(back.size() == 1);
	CHECK(back[0].system_prompt == r.system_prompt);
	CHECK(back[0].tgt_image_path == r.tgt_image_path);
}
