// Copyright 2026 The CoS Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "cos/error.hpp"
#include "cos/harness.hpp"
#include "cos/oracles.hpp"
#include "support/test_util.hpp"

using namespace chainshot;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path make_temp_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("cos_harness_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_manifest(const fs::path& dir, const std::vector<std::string>& lines) {
    const fs::path path = dir / "manifest.jsonl";
    std::ofstream out(path, std::ios::trunc);
    for (const auto& line : lines) out << line << "\n";
    return path;
}

BenchConfig suite_config(const SyntheticSpec& spec, const fs::path& manifest,
                         const TagManifest& tags) {
    BenchConfig config;
    config.num_shots = spec.shots;
    config.group_size = spec.group_size;
    config.tile_size = spec.tile;
    config.base_dir = fs::absolute(manifest).parent_path();
    config.tags = &tags;
    config.grounding.retry.backoff_base = std::chrono::milliseconds(0);
    return config;
}

} // namespace

TEST_CASE("load_manifest on an empty file returns an empty list") {
    const auto dir = make_temp_dir("empty");
    const auto path = write_manifest(dir, {});
    CHECK(load_manifest(path).empty());
    CHECK_THROWS_AS(load_manifest(dir / "missing.jsonl"), IoError);
}

TEST_CASE("load_manifest validates fields with line numbers") {
    const auto dir = make_temp_dir("validate");
    SUBCASE("missing answer") {
        const auto path = write_manifest(
            dir, {R"({"id":"a","frames_path":"f","question":"q","options":["x","y"]})"});
        try {
            load_manifest(path);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            const std::string what = e.what();
            CHECK(what.find("answer") != std::string::npos);
            CHECK(what.find("line 1") != std::string::npos);
        }
    }
    SUBCASE("malformed json names the line") {
        const auto path = write_manifest(
            dir, {R"({"id":"a","frames_path":"f","question":"q","options":["x","y"],"answer":"A"})",
                  "{broken"});
        try {
            load_manifest(path);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
    SUBCASE("duplicate ids are rejected") {
        const std::string item =
            R"({"id":"a","frames_path":"f","question":"q","options":["x","y"],"answer":"A"})";
        const auto path = write_manifest(dir, {item, item});
        CHECK_THROWS_AS(load_manifest(path), ParseError);
    }
    SUBCASE("answer outside the options") {
        const auto path = write_manifest(
            dir, {R"({"id":"a","frames_path":"f","question":"q","options":["x","y"],"answer":"C"})"});
        CHECK_THROWS_AS(load_manifest(path), ParseError);
    }
    SUBCASE("fewer than two options") {
        const auto path = write_manifest(
            dir, {R"({"id":"a","frames_path":"f","question":"q","options":["x"],"answer":"A"})"});
        CHECK_THROWS_AS(load_manifest(path), ParseError);
    }
    SUBCASE("bad duration class") {
        const auto path = write_manifest(
            dir,
            {R"({"id":"a","frames_path":"f","question":"q","options":["x","y"],"answer":"A","duration_class":"epic"})"});
        CHECK_THROWS_AS(load_manifest(path), ParseError);
    }
}

TEST_CASE("manifest items round trip through serialization") {
    const std::string line =
        R"({"id":"v1","frames_path":"clips/v1","question":"what happens?","options":["run","hide","eat","sleep"],"answer":"C","duration_class":"long"})";
    const auto dir = make_temp_dir("roundtrip");
    const auto items = load_manifest(write_manifest(dir, {line}));
    REQUIRE(items.size() == 1);
    CHECK(item_to_json(items[0]) == json::parse(line));
}

TEST_CASE("extract_answer finds the first standalone option letter") {
    const std::vector<std::string> options{"w", "x", "y", "z"};
    CHECK(extract_answer("The answer is B.", options) == 'B');
    CHECK(extract_answer("b", options) == 'B');
    CHECK(extract_answer("Both brands", options) == std::nullopt);
    CHECK(extract_answer("(C)", options) == 'C');
    CHECK(extract_answer("d, final answer", options) == 'D');
    CHECK(extract_answer("", options) == std::nullopt);
    CHECK(extract_answer("E", options) == std::nullopt); // outside the 4 options
    CHECK(extract_answer("maybe D7", options) == std::nullopt); // not token-delimited
    CHECK(extract_answer("unsure", options) == std::nullopt);
}

TEST_CASE("format_question lists lettered options") {
    BenchmarkItem item;
    item.question = "Which marker?";
    item.options = {"red", "blue"};
    const auto text = format_question(item);
    CHECK(text.find("Which marker?") != std::string::npos);
    CHECK(text.find("A. red") != std::string::npos);
    CHECK(text.find("B. blue") != std::string::npos);
}

TEST_CASE("synthetic suite layout is deterministic and well formed") {
    const auto dir = make_temp_dir("synth");
    SyntheticSpec spec;
    spec.items = 4;
    spec.shots = 16;
    spec.relevant = 2;
    spec.distractors = 6;
    spec.tile = 8;
    spec.seed = 5;
    const auto suite = generate_synthetic_suite(spec, dir / "suite");

    const auto items = load_manifest(suite.manifest_path);
    REQUIRE(items.size() == 4);
    const auto tags = TagManifest::load(suite.tags_path);
    CHECK(tags.keyword_set == std::set<std::string>{"evidence"});

    int evidence = 0;
    int distractor = 0;
    for (const auto& [file, file_tags] : tags.file_tags) {
        evidence += file_tags.count("evidence");
        distractor += file_tags.count("distractor");
    }
    CHECK(evidence == 4 * 2);
    CHECK(distractor == 4 * 6);

    // deterministic per seed
    const auto again = generate_synthetic_suite(spec, dir / "suite2");
    CHECK(TagManifest::load(again.tags_path).serialize() == tags.serialize());

    // frame files exist and follow the naming convention
    FrameDirectorySource source(fs::absolute(suite.manifest_path).parent_path() /
                                    items[0].frames_path,
                                &tags);
    CHECK(source.frame_count() == 16);
}

TEST_CASE("synthetic generator rejects impossible layouts") {
    const auto dir = make_temp_dir("synth_bad");
    SyntheticSpec spec;
    spec.items = 1;
    spec.shots = 8;
    spec.relevant = 8;
    spec.distractors = 1; // no room outside evidence groups
    CHECK_THROWS_AS(generate_synthetic_suite(spec, dir / "suite"), ArgumentError);
}

TEST_CASE("cos mode on a clean sparse suite answers every item") {
    const auto dir = make_temp_dir("bench_cos");
    SyntheticSpec spec;
    spec.items = 6;
    spec.shots = 16;
    spec.relevant = 2;
    spec.distractors = 8;
    spec.tile = 8;
    spec.seed = 11;
    const auto suite = generate_synthetic_suite(spec, dir / "suite");
    const auto items = load_manifest(suite.manifest_path);
    const auto tags = TagManifest::load(suite.tags_path);

    MockOracle oracle = MockOracle::from_manifest(tags);
    ToyDecoderBackend backend;
    const auto config = suite_config(spec, suite.manifest_path, tags);
    const auto report = run_benchmark(items, &oracle, backend, config, BenchMode::cos);

    CHECK(report.overall.total == 6);
    CHECK(report.overall.accuracy() == doctest::Approx(1.0));
    for (const auto& record : report.items) {
        REQUIRE(record.alpha.has_value());
        REQUIRE(record.relevant_count.has_value());
        CHECK(*record.relevant_count == 2 * spec.group_size);
        CHECK(record.oracle_calls == spec.shots / spec.group_size);
        CHECK(record.error.empty());
    }
    int class_total = 0;
    for (const auto& [name, bucket] : report.by_duration) class_total += bucket.total;
    CHECK(class_total == report.overall.total);
}

TEST_CASE("baseline mode matches direct baseline_decode calls") {
    const auto dir = make_temp_dir("bench_base");
    SyntheticSpec spec;
    spec.items = 3;
    spec.shots = 8;
    spec.relevant = 2;
    spec.distractors = 4;
    spec.tile = 8;
    spec.seed = 3;
    const auto suite = generate_synthetic_suite(spec, dir / "suite");
    const auto items = load_manifest(suite.manifest_path);
    const auto tags = TagManifest::load(suite.tags_path);

    ToyDecoderBackend backend;
    const auto config = suite_config(spec, suite.manifest_path, tags);
    const auto report = run_benchmark(items, nullptr, backend, config, BenchMode::baseline);
    REQUIRE(report.items.size() == 3);

    for (size_t i = 0; i < items.size(); ++i) {
        FrameDirectorySource source(config.base_dir / items[i].frames_path, &tags);
        const auto shots = normalize_frames(sample_shots(source, spec.shots), spec.tile);
        const auto direct =
            baseline_decode(backend, shots, format_question(items[i]), config.generation);
        CHECK(report.items[i].raw_output == direct.text);
        CHECK_FALSE(report.items[i].alpha.has_value());
    }
}

TEST_CASE("accuracy is invariant to item order and jobs") {
    const auto dir = make_temp_dir("bench_order");
    SyntheticSpec spec;
    spec.items = 8;
    spec.shots = 16;
    spec.relevant = 2;
    spec.distractors = 6;
    spec.tile = 8;
    spec.seed = 21;
    const auto suite = generate_synthetic_suite(spec, dir / "suite");
    auto items = load_manifest(suite.manifest_path);
    const auto tags = TagManifest::load(suite.tags_path);

    MockOracle oracle = MockOracle::from_manifest(tags);
    ToyDecoderBackend backend;
    auto config = suite_config(spec, suite.manifest_path, tags);
    const auto ordered = run_benchmark(items, &oracle, backend, config, BenchMode::cos);

    std::shuffle(items.begin(), items.end(), std::mt19937_64(99));
    config.jobs = 4;
    const auto shuffled = run_benchmark(items, &oracle, backend, config, BenchMode::cos);

    CHECK(ordered.overall.correct == shuffled.overall.correct);
    CHECK(ordered.to_json(false) == shuffled.to_json(false));
}

TEST_CASE("reports are canonically deterministic across runs") {
    const auto dir = make_temp_dir("bench_det");
    SyntheticSpec spec;
    spec.items = 5;
    spec.shots = 12;
    spec.relevant = 1;
    spec.distractors = 4;
    spec.tile = 8;
    spec.seed = 8;
    spec.flip_rate = 0.3; // noise must also be deterministic
    const auto suite = generate_synthetic_suite(spec, dir / "suite");
    const auto items = load_manifest(suite.manifest_path);
    const auto tags = TagManifest::load(suite.tags_path);

    MockOracle oracle = MockOracle::from_manifest(tags);
    ToyDecoderBackend backend;
    const auto config = suite_config(spec, suite.manifest_path, tags);
    const auto a = run_benchmark(items, &oracle, backend, config, BenchMode::cos);
    const auto b = run_benchmark(items, &oracle, backend, config, BenchMode::cos);
    CHECK(a.to_json(false) == b.to_json(false));
    CHECK(a.to_json(false).dump(2) == b.to_json(false).dump(2));
}

TEST_CASE("per-item failures are recorded without aborting the run") {
    const auto dir = make_temp_dir("bench_fail");
    SyntheticSpec spec;
    spec.items = 2;
    spec.shots = 8;
    spec.relevant = 1;
    spec.distractors = 2;
    spec.tile = 8;
    const auto suite = generate_synthetic_suite(spec, dir / "suite");
    auto items = load_manifest(suite.manifest_path);
    BenchmarkItem broken;
    broken.id = "zz_broken";
    broken.frames_path = "items/does_not_exist";
    broken.question = "?";
    broken.options = {"a", "b"};
    broken.answer = 'A';
    items.push_back(broken);

    const auto tags = TagManifest::load(suite.tags_path);
    MockOracle oracle = MockOracle::from_manifest(tags);
    ToyDecoderBackend backend;
    const auto config = suite_config(spec, suite.manifest_path, tags);
    const auto report = run_benchmark(items, &oracle, backend, config, BenchMode::cos);

    REQUIRE(report.overall.total == 3);
    const auto& last = report.items.back(); // sorted by id, zz_broken last
    CHECK(last.id == "zz_broken");
    CHECK_FALSE(last.error.empty());
    CHECK_FALSE(last.correct);
    CHECK(report.overall.correct == 2);
}

TEST_CASE("items with no relevant shots fall back to alpha zero") {
    const auto dir = make_temp_dir("bench_r0");
    SyntheticSpec spec;
    spec.items = 3;
    spec.shots = 8;
    spec.relevant = 0;
    spec.distractors = 4;
    spec.tile = 8;
    const auto suite = generate_synthetic_suite(spec, dir / "suite");
    const auto items = load_manifest(suite.manifest_path);
    const auto tags = TagManifest::load(suite.tags_path);

    MockOracle oracle = MockOracle::from_manifest(tags);
    ToyDecoderBackend backend;
    const auto config = suite_config(spec, suite.manifest_path, tags);
    const auto cos_report = run_benchmark(items, &oracle, backend, config, BenchMode::cos);
    const auto base_report = run_benchmark(items, nullptr, backend, config, BenchMode::baseline);

    for (size_t i = 0; i < cos_report.items.size(); ++i) {
        CHECK(cos_report.items[i].alpha == 0.0);
        CHECK(cos_report.items[i].relevant_count == 0);
        CHECK(cos_report.items[i].raw_output == base_report.items[i].raw_output);
    }
}

TEST_CASE("run_benchmark requires an oracle in cos mode") {
    ToyDecoderBackend backend;
    CHECK_THROWS_AS(run_benchmark({}, nullptr, backend, BenchConfig{}, BenchMode::cos),
                    ArgumentError);
}

TEST_CASE("report table mirrors the duration columns") {
    const auto dir = make_temp_dir("table");
    SyntheticSpec spec;
    spec.items = 6;
    spec.shots = 8;
    spec.relevant = 1;
    spec.distractors = 2;
    spec.tile = 8;
    const auto suite = generate_synthetic_suite(spec, dir / "suite");
    const auto items = load_manifest(suite.manifest_path);
    const auto tags = TagManifest::load(suite.tags_path);
    MockOracle oracle = MockOracle::from_manifest(tags);
    ToyDecoderBackend backend;
    const auto report =
        run_benchmark(items, &oracle, backend, suite_config(spec, suite.manifest_path, tags),
                      BenchMode::cos);
    const auto table = report.table();
    CHECK(table.find("short") != std::string::npos);
    CHECK(table.find("medium") != std::string::npos);
    CHECK(table.find("long") != std::string::npos);
    CHECK(table.find("avg") != std::string::npos);
    CHECK(table.find("accuracy") != std::string::npos);
}
