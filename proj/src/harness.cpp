// Copyright 2026 The CoS Authors
// SPDX-License-Identifier: Apache-2.0

#include "cos/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "cos/error.hpp"
#include "cos/image_io.hpp"
#include "cos/media.hpp"
#include "cos/oracles.hpp"
#include "cos/subshots.hpp"

namespace chainshot {

namespace {

using json = nlohmann::json;

const std::set<std::string> kDurationClasses{"short", "medium", "long"};

[[noreturn]] void manifest_error(int lineno, const std::string& message) {
    throw ParseError("manifest line " + std::to_string(lineno) + ": " + message);
}

std::string require_string(const json& j, const char* field, int lineno) {
    if (!j.contains(field)) manifest_error(lineno, std::string("missing field \"") + field + "\"");
    if (!j[field].is_string()) {
        manifest_error(lineno, std::string("field \"") + field + "\" must be a string");
    }
    return j[field].get<std::string>();
}

bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

} // namespace

std::vector<BenchmarkItem> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open manifest: " + path.string());
    }

    std::vector<BenchmarkItem> items;
    std::set<std::string> seen_ids;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (is_blank(line)) continue;

        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            manifest_error(lineno, e.what());
        }
        if (!j.is_object()) manifest_error(lineno, "expected a JSON object");

        BenchmarkItem item;
        item.id = require_string(j, "id", lineno);
        item.frames_path = require_string(j, "frames_path", lineno);
        item.question = require_string(j, "question", lineno);

        if (!j.contains("options") || !j["options"].is_array()) {
            manifest_error(lineno, "missing field \"options\"");
        }
        for (const auto& opt : j["options"]) {
            if (!opt.is_string()) manifest_error(lineno, "options must be strings");
            item.options.push_back(opt.get<std::string>());
        }
        if (item.options.size() < 2) manifest_error(lineno, "at least 2 options are required");
        if (item.options.size() > 26) manifest_error(lineno, "too many options");

        const std::string answer = require_string(j, "answer", lineno);
        if (answer.size() != 1) manifest_error(lineno, "answer must be a single option letter");
        item.answer = static_cast<char>(std::toupper(static_cast<unsigned char>(answer[0])));
        if (item.answer < 'A' || item.answer >= static_cast<char>('A' + item.options.size())) {
            manifest_error(lineno, "answer letter outside the declared options");
        }

        if (j.contains("duration_class")) {
            if (!j["duration_class"].is_string() ||
                !kDurationClasses.count(j["duration_class"].get<std::string>())) {
                manifest_error(lineno, "duration_class must be short, medium, or long");
            }
            item.duration_class = j["duration_class"].get<std::string>();
        }

        if (!seen_ids.insert(item.id).second) {
            manifest_error(lineno, "duplicate item id \"" + item.id + "\"");
        }
        items.push_back(std::move(item));
    }
    return items;
}

json item_to_json(const BenchmarkItem& item) {
    json j{{"id", item.id},
           {"frames_path", item.frames_path},
           {"question", item.question},
           {"options", item.options},
           {"answer", std::string(1, item.answer)}};
    if (!item.duration_class.empty()) {
        j["duration_class"] = item.duration_class;
    }
    return j;
}

std::optional<char> extract_answer(const std::string& output,
                                   const std::vector<std::string>& options) {
    const int option_count = static_cast<int>(options.size());
    for (size_t i = 0; i < output.size(); ++i) {
        const unsigned char c = static_cast<unsigned char>(output[i]);
        if (!std::isalpha(c)) continue;
        const bool left_ok = i == 0 || !std::isalnum(static_cast<unsigned char>(output[i - 1]));
        const bool right_ok =
            i + 1 == output.size() || !std::isalnum(static_cast<unsigned char>(output[i + 1]));
        if (!left_ok || !right_ok) continue;
        const char letter = static_cast<char>(std::toupper(c));
        if (letter >= 'A' && letter < static_cast<char>('A' + option_count)) {
            return letter;
        }
    }
    return std::nullopt;
}

std::string format_question(const BenchmarkItem& item) {
    std::ostringstream out;
    out << item.question << "\n";
    for (size_t i = 0; i < item.options.size(); ++i) {
        out << static_cast<char>('A' + i) << ". " << item.options[i] << "\n";
    }
    out << "Answer with the option letter.";
    return std::move(out).str();
}

json RunReport::to_json(bool include_timings) const {
    json bucket_json = json::object();
    for (const auto& [name, bucket] : by_duration) {
        bucket_json[name] = {
            {"total", bucket.total}, {"correct", bucket.correct}, {"accuracy", bucket.accuracy()}};
    }
    json j{{"mode", mode},
           {"num_shots", num_shots},
           {"group_size", group_size},
           {"tile_size", tile_size},
           {"seed", seed},
           {"alpha_override", alpha_override ? json(*alpha_override) : json(nullptr)},
           {"aggregate",
            {{"total", overall.total},
             {"correct", overall.correct},
             {"accuracy", overall.accuracy()},
             {"by_duration", std::move(bucket_json)}}}};

    json item_array = json::array();
    for (const auto& record : items) {
        json r{{"id", record.id},
               {"predicted", record.predicted},
               {"gold", std::string(1, record.gold)},
               {"correct", record.correct},
               {"raw_output", record.raw_output},
               {"alpha", record.alpha ? json(*record.alpha) : json(nullptr)},
               {"relevant_count", record.relevant_count ? json(*record.relevant_count) : json(nullptr)},
               {"oracle_calls", record.oracle_calls},
               {"error", record.error}};
        if (include_timings) {
            r["wall_ms"] = record.wall_ms;
        }
        item_array.push_back(std::move(r));
    }
    j["items"] = std::move(item_array);
    return j;
}

std::string RunReport::table() const {
    const std::vector<std::string> columns{"short", "medium", "long", "unspecified"};
    auto cell = [](const std::string& text) {
        std::string padded = text;
        padded.resize(std::max<size_t>(padded.size() + 2, 12), ' ');
        return padded;
    };
    auto num = [&](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", v);
        return cell(buf);
    };

    std::ostringstream out;
    out << "mode=" << mode << " items=" << overall.total << "\n";

    out << cell("");
    for (const auto& col : columns) {
        if (by_duration.count(col)) out << cell(col);
    }
    out << cell("avg") << "\n";

    out << cell("accuracy");
    for (const auto& col : columns) {
        const auto it = by_duration.find(col);
        if (it != by_duration.end()) out << num(it->second.accuracy());
    }
    out << num(overall.accuracy()) << "\n";

    out << cell("items");
    for (const auto& col : columns) {
        const auto it = by_duration.find(col);
        if (it != by_duration.end()) out << cell(std::to_string(it->second.total));
    }
    out << cell(std::to_string(overall.total)) << "\n";
    return std::move(out).str();
}

RunReport run_benchmark(const std::vector<BenchmarkItem>& items, BinaryRelevanceOracle* oracle,
                        StepwiseDecoderBackend& backend, const BenchConfig& config,
                        BenchMode mode) {
    if (mode == BenchMode::cos && oracle == nullptr) {
        throw ArgumentError("run_benchmark: cos mode requires a relevance oracle");
    }

    RunReport report;
    report.mode = mode == BenchMode::cos ? "cos" : "baseline";
    report.num_shots = config.num_shots;
    report.group_size = config.group_size;
    report.tile_size = config.tile_size;
    report.seed = config.generation.seed;
    report.alpha_override = config.alpha_override;
    report.items.resize(items.size());

    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t idx; (idx = next.fetch_add(1)) < items.size();) {
            const BenchmarkItem& item = items[idx];
            ItemRecord record;
            record.id = item.id;
            record.gold = item.answer;
            const auto start = std::chrono::steady_clock::now();
            try {
                const std::filesystem::path dir =
                    config.base_dir.empty() ? std::filesystem::path(item.frames_path)
                                            : config.base_dir / item.frames_path;
                FrameDirectorySource source(dir, config.tags);
                ShotSequence shots =
                    normalize_frames(sample_shots(source, config.num_shots), config.tile_size);
                const std::string question = format_question(item);

                DecodeResult output;
                if (mode == BenchMode::cos) {
                    GroundingOptions grounding = config.grounding;
                    grounding.group_size = config.group_size;
                    const GroundingResult grounded = ground(*oracle, shots, item.question, grounding);
                    SubShotPair pair = build_subshot_pair(grounded.code);
                    if (config.alpha_override) {
                        pair.alpha = *config.alpha_override;
                    }
                    record.alpha = pair.alpha;
                    record.relevant_count = grounded.code.relevant_count();
                    record.oracle_calls = grounded.oracle_calls;
                    output = co_reason_decode(backend, shots, pair, question, config.generation);
                } else {
                    output = baseline_decode(backend, shots, question, config.generation);
                }

                record.raw_output = output.text;
                const auto letter = extract_answer(output.text, item.options);
                if (letter) {
                    record.predicted = std::string(1, *letter);
                    record.correct = *letter == item.answer;
                }
            } catch (const std::exception& e) {
                record.error = e.what();
                record.correct = false;
            }
            record.wall_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                    .count();
            report.items[idx] = std::move(record);
        }
    };

    const int jobs = std::clamp<int>(config.jobs, 1, static_cast<int>(items.size()) > 0
                                                         ? static_cast<int>(items.size())
                                                         : 1);
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::sort(report.items.begin(), report.items.end(),
              [](const ItemRecord& a, const ItemRecord& b) { return a.id < b.id; });

    std::map<std::string, std::string> duration_of;
    for (const auto& item : items) {
        duration_of[item.id] = item.duration_class.empty() ? "unspecified" : item.duration_class;
    }
    for (const auto& record : report.items) {
        ++report.overall.total;
        auto& bucket = report.by_duration[duration_of[record.id]];
        ++bucket.total;
        if (record.correct) {
            ++report.overall.correct;
            ++bucket.correct;
        }
    }
    return report;
}

SyntheticSuite generate_synthetic_suite(const SyntheticSpec& spec,
                                        const std::filesystem::path& out_dir) {
    if (spec.items < 1 || spec.shots < 1 || spec.group_size < 1 || spec.tile < 1) {
        throw ArgumentError("generate_synthetic_suite: counts must be positive");
    }
    if (spec.options < 2 || spec.options > 8) {
        throw ArgumentError("generate_synthetic_suite: options must be in [2, 8]");
    }
    if (spec.relevant < 0 || spec.relevant > spec.shots) {
        throw ArgumentError("generate_synthetic_suite: relevant must be in [0, shots]");
    }

    const int n = spec.shots;
    const int k = spec.group_size;
    const int m = (n + k - 1) / k;

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw IoError("cannot create suite directory: " + out_dir.string());
    }

    std::mt19937_64 rng(spec.seed);
    TagManifest tags;
    tags.keyword_set = {"evidence"};
    tags.flip_rate = spec.flip_rate;
    tags.seed = spec.seed;

    std::ostringstream manifest;
    const std::vector<std::string> durations{"short", "medium", "long"};

    for (int it = 0; it < spec.items; ++it) {
        char id_buf[32];
        std::snprintf(id_buf, sizeof(id_buf), "item_%04d", it);
        const std::string item_id = id_buf;
        const std::string rel_dir = "items/" + item_id;
        const std::filesystem::path frame_dir = out_dir / rel_dir;
        std::filesystem::create_directories(frame_dir, ec);
        if (ec) {
            throw IoError("cannot create frame directory: " + frame_dir.string());
        }

        const int gold = static_cast<int>(rng() % spec.options);

        // Evidence positions: one per distinct group while groups last, so
        // grounding granularity never hides an evidence shot.
        std::vector<int> evidence_positions;
        if (spec.relevant <= m) {
            std::vector<int> groups(m);
            for (int g = 0; g < m; ++g) groups[g] = g;
            std::shuffle(groups.begin(), groups.end(), rng);
            for (int e = 0; e < spec.relevant; ++e) {
                const int g = groups[e];
                const int begin = g * k;
                const int end = std::min(begin + k, n);
                evidence_positions.push_back(
                    begin + static_cast<int>(rng() % static_cast<uint64_t>(end - begin)));
            }
        } else {
            std::vector<int> all(n);
            for (int i = 0; i < n; ++i) all[i] = i;
            std::shuffle(all.begin(), all.end(), rng);
            evidence_positions.assign(all.begin(), all.begin() + spec.relevant);
        }
        const std::set<int> evidence_set(evidence_positions.begin(), evidence_positions.end());

        std::set<int> evidence_groups;
        for (const int pos : evidence_set) evidence_groups.insert(pos / k);

        // Distractors stay out of evidence groups so the negative sequence
        // concentrates them.
        std::vector<int> capacity;
        for (int i = 0; i < n; ++i) {
            if (!evidence_groups.count(i / k)) capacity.push_back(i);
        }
        if (spec.distractors > static_cast<int>(capacity.size())) {
            throw ArgumentError(
                "generate_synthetic_suite: not enough non-evidence capacity for " +
                std::to_string(spec.distractors) + " distractors");
        }
        std::shuffle(capacity.begin(), capacity.end(), rng);
        const std::set<int> distractor_set(capacity.begin(), capacity.begin() + spec.distractors);

        for (int i = 0; i < n; ++i) {
            char frame_buf[32];
            std::snprintf(frame_buf, sizeof(frame_buf), "frame_%06d.png", i);
            const std::string rel_file = rel_dir + "/" + frame_buf;

            Image img;
            std::set<std::string> frame_tags;
            if (evidence_set.count(i)) {
                img = Image::solid(spec.tile, spec.tile, 32, 200, 32);
                frame_tags = {"evidence",
                              std::string("ev_") + static_cast<char>('A' + gold)};
            } else if (distractor_set.count(i)) {
                img = Image::solid(spec.tile, spec.tile, 200, 32, 32);
                frame_tags = {"distractor"};
            } else {
                img = Image::solid(spec.tile, spec.tile, 128, 128, 128);
            }
            save_image_file(frame_dir / frame_buf, img);
            tags.file_tags[rel_file] = std::move(frame_tags);
        }

        BenchmarkItem item;
        item.id = item_id;
        item.frames_path = rel_dir;
        item.question = "Which marker appears during the highlighted moments?";
        for (int o = 0; o < spec.options; ++o) {
            item.options.push_back(std::string("marker ") + static_cast<char>('A' + o));
        }
        item.answer = static_cast<char>('A' + gold);
        item.duration_class = durations[it % durations.size()];
        manifest << item_to_json(item).dump() << "\n";
    }

    SyntheticSuite suite;
    suite.manifest_path = out_dir / "manifest.jsonl";
    suite.tags_path = out_dir / "tags.manifest";

    std::ofstream mf(suite.manifest_path, std::ios::trunc);
    if (!mf) {
        throw IoError("cannot write manifest: " + suite.manifest_path.string());
    }
    mf << manifest.str();

    std::ofstream tf(suite.tags_path, std::ios::trunc);
    if (!tf) {
        throw IoError("cannot write tag manifest: " + suite.tags_path.string());
    }
    tf << tags.serialize();
    return suite;
}

} // namespace chainshot
