// Copyright 2026 The CoS Authors
// SPDX-License-Identifier: Apache-2.0
//
// cos — query-adaptive shot selection and contrastive co-reasoning for
// long-video QA. Subcommands: ground, subshots, run, bench, synth.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cos/decode.hpp"
#include "cos/error.hpp"
#include "cos/grounding.hpp"
#include "cos/harness.hpp"
#include "cos/manifest.hpp"
#include "cos/media.hpp"
#include "cos/oracles.hpp"
#include "cos/remote.hpp"
#include "cos/subshots.hpp"

namespace {

using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitTransport = 4;

struct PipelineConfig {
    int num_shots = 128;
    int group_size = 4;
    int tile_size = 336;
    std::string oracle_spec;
    std::string backend_spec = "toy";
    std::string tags_spec; // extra tag manifest when the oracle is not a mock
    int max_new_tokens = 8;
    double sample_temperature = 0.0; // 0 = greedy
    uint64_t seed = 0;
    double alpha_override = -1.0; // <0 = unset
    int jobs = 4;                 // concurrent oracle calls
    int bench_jobs = 1;           // concurrent items
    int retries = 3;
    int backoff_ms = 100;
    bool trace = false;
};

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

// Flat key=value config file mirroring flag names (without the leading --).
// Flags given on the command line take precedence; parsing happens after
// this loader seeds the defaults.
void load_config_file(const std::string& path, PipelineConfig& cfg) {
    std::ifstream in(path);
    if (!in) {
        throw chainshot::IoError("cannot open config file: " + path);
    }
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string text = trim(line);
        if (text.empty() || text[0] == '#') continue;
        const auto sep = text.find_first_of("=:");
        if (sep == std::string::npos) {
            throw chainshot::ArgumentError("config line " + std::to_string(lineno) +
                                     ": expected 'key = value'");
        }
        const std::string key = trim(text.substr(0, sep));
        const std::string value = trim(text.substr(sep + 1));
        try {
            if (key == "num-shots") cfg.num_shots = std::stoi(value);
            else if (key == "group-size") cfg.group_size = std::stoi(value);
            else if (key == "tile-size") cfg.tile_size = std::stoi(value);
            else if (key == "oracle") cfg.oracle_spec = value;
            else if (key == "backend") cfg.backend_spec = value;
            else if (key == "tags") cfg.tags_spec = value;
            else if (key == "max-new-tokens") cfg.max_new_tokens = std::stoi(value);
            else if (key == "sample") cfg.sample_temperature = std::stod(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "alpha-override") cfg.alpha_override = std::stod(value);
            else if (key == "jobs") cfg.jobs = std::stoi(value);
            else if (key == "bench-jobs") cfg.bench_jobs = std::stoi(value);
            else if (key == "retries") cfg.retries = std::stoi(value);
            else if (key == "backoff-ms") cfg.backoff_ms = std::stoi(value);
            else throw chainshot::ArgumentError("config line " + std::to_string(lineno) +
                                          ": unknown key '" + key + "'");
        } catch (const chainshot::Error&) {
            throw;
        } catch (const std::exception&) {
            throw chainshot::ArgumentError("config line " + std::to_string(lineno) +
                                     ": bad value for '" + key + "'");
        }
    }
}

void validate_config(const PipelineConfig& cfg) {
    if (cfg.num_shots < 1) throw chainshot::ArgumentError("--num-shots must be >= 1");
    if (cfg.group_size < 1) throw chainshot::ArgumentError("--group-size must be >= 1");
    if (cfg.tile_size < 1) throw chainshot::ArgumentError("--tile-size must be >= 1");
    if (cfg.max_new_tokens < 1) throw chainshot::ArgumentError("--max-new-tokens must be >= 1");
    if (cfg.sample_temperature < 0.0) throw chainshot::ArgumentError("--sample temperature must be > 0");
    if (cfg.alpha_override >= 0.0 && cfg.alpha_override > 1.0) {
        throw chainshot::ArgumentError("--alpha-override must be in [0, 1]");
    }
    if (cfg.jobs < 1 || cfg.bench_jobs < 1) throw chainshot::ArgumentError("job counts must be >= 1");
    if (cfg.retries < 0) throw chainshot::ArgumentError("--retries must be >= 0");
}

void print_effective_config(const PipelineConfig& cfg, const std::string& command) {
    auto& out = std::cerr;
    out << "# effective config (" << command << ")\n";
    out << "num-shots = " << cfg.num_shots << "\n";
    out << "group-size = " << cfg.group_size << "\n";
    out << "tile-size = " << cfg.tile_size << "\n";
    out << "oracle = " << (cfg.oracle_spec.empty() ? "(none)" : cfg.oracle_spec) << "\n";
    out << "backend = " << cfg.backend_spec << "\n";
    out << "tags = " << (cfg.tags_spec.empty() ? "(none)" : cfg.tags_spec) << "\n";
    out << "max-new-tokens = " << cfg.max_new_tokens << "\n";
    if (cfg.sample_temperature > 0.0) {
        out << "sample = " << cfg.sample_temperature << "\n";
    } else {
        out << "greedy = true\n";
    }
    out << "seed = " << cfg.seed << "\n";
    if (cfg.alpha_override >= 0.0) {
        out << "alpha-override = " << cfg.alpha_override << "\n";
    } else {
        out << "alpha-override = (none)\n";
    }
    out << "jobs = " << cfg.jobs << "\n";
    out << "bench-jobs = " << cfg.bench_jobs << "\n";
    out << "retries = " << cfg.retries << "\n";
    out << "backoff-ms = " << cfg.backoff_ms << "\n";
}

struct OracleHandle {
    std::unique_ptr<chainshot::BinaryRelevanceOracle> oracle;
    std::optional<chainshot::TagManifest> tags;
};

OracleHandle make_oracle(const PipelineConfig& cfg) {
    if (cfg.oracle_spec.empty()) {
        throw chainshot::ArgumentError("--oracle is required (mock:FILE, remote:FILE, or http URL)");
    }
    OracleHandle handle;
    if (cfg.oracle_spec.rfind("mock:", 0) == 0) {
        handle.tags = chainshot::TagManifest::load(cfg.oracle_spec.substr(5));
        handle.oracle = std::make_unique<chainshot::MockOracle>(chainshot::MockOracle::from_manifest(*handle.tags));
    } else if (cfg.oracle_spec.rfind("remote:", 0) == 0) {
        auto remote_cfg = chainshot::RemoteBackendConfig::load(cfg.oracle_spec.substr(7));
        handle.oracle = std::make_unique<chainshot::RemoteOracle>(remote_cfg.endpoint);
    } else if (cfg.oracle_spec.rfind("http", 0) == 0) {
        chainshot::RemoteEndpoint endpoint;
        endpoint.url = cfg.oracle_spec;
        handle.oracle = std::make_unique<chainshot::RemoteOracle>(std::move(endpoint));
    } else {
        throw chainshot::ArgumentError("unrecognized oracle spec: " + cfg.oracle_spec);
    }
    if (!handle.tags && !cfg.tags_spec.empty()) {
        handle.tags = chainshot::TagManifest::load(cfg.tags_spec);
    }
    return handle;
}

std::unique_ptr<chainshot::StepwiseDecoderBackend> make_backend(const PipelineConfig& cfg) {
    const std::string& spec = cfg.backend_spec;
    if (spec == "toy") {
        return std::make_unique<chainshot::ToyDecoderBackend>();
    }
    if (spec.rfind("toy:", 0) == 0) {
        return std::make_unique<chainshot::ToyDecoderBackend>(chainshot::ToyBackendConfig::load(spec.substr(4)));
    }
    if (spec.rfind("remote:", 0) == 0) {
        return std::make_unique<chainshot::RemoteDecoderBackend>(
            chainshot::RemoteBackendConfig::load(spec.substr(7)));
    }
    if (spec.rfind("http", 0) == 0) {
        chainshot::RemoteBackendConfig remote_cfg;
        remote_cfg.endpoint.url = spec;
        return std::make_unique<chainshot::RemoteDecoderBackend>(std::move(remote_cfg));
    }
    throw chainshot::ArgumentError("unrecognized backend spec: " + spec);
}

chainshot::GenerationConfig make_generation_config(const PipelineConfig& cfg) {
    chainshot::GenerationConfig gen;
    gen.max_new_tokens = cfg.max_new_tokens;
    gen.seed = cfg.seed;
    if (cfg.sample_temperature > 0.0) {
        gen.mode = chainshot::GenerationConfig::Mode::sample;
        gen.temperature = cfg.sample_temperature;
    }
    return gen;
}

chainshot::GroundingOptions make_grounding_options(const PipelineConfig& cfg) {
    chainshot::GroundingOptions options;
    options.group_size = cfg.group_size;
    options.parallelism = cfg.jobs;
    options.retry.max_retries = cfg.retries;
    options.retry.backoff_base = std::chrono::milliseconds(cfg.backoff_ms);
    return options;
}

chainshot::ShotSequence load_shots(const PipelineConfig& cfg, const std::string& frames_dir,
                             const chainshot::TagManifest* tags) {
    chainshot::FrameDirectorySource source(frames_dir, tags);
    return chainshot::normalize_frames(chainshot::sample_shots(source, cfg.num_shots), cfg.tile_size);
}

json grounding_report_json(const chainshot::GroundingResult& result, const std::string& question) {
    json groups = json::array();
    for (const auto& record : result.groups) {
        groups.push_back({{"group_index", record.verdict.group_index},
                          {"members", record.members},
                          {"raw_response", record.verdict.raw_response},
                          {"relevant", record.verdict.relevant},
                          {"attempts", record.verdict.attempts},
                          {"error", record.verdict.transport_error},
                          {"latency_ms", record.latency_ms}});
    }
    return json{{"question", question},
                {"n", result.code.n},
                {"k", result.code.k},
                {"code", result.code.to_bit_string()},
                {"oracle_calls", result.oracle_calls},
                {"groups", std::move(groups)}};
}

int cmd_ground(const PipelineConfig& cfg, const std::string& frames_dir,
               const std::string& question, const std::string& out_path) {
    auto handle = make_oracle(cfg);
    const auto shots = load_shots(cfg, frames_dir, handle.tags ? &*handle.tags : nullptr);
    const auto result = chainshot::ground(*handle.oracle, shots, question, make_grounding_options(cfg));

    std::cout << result.code.to_bit_string() << "\n";
    const json report = grounding_report_json(result, question);
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::trunc);
        if (!out) throw chainshot::IoError("cannot write report: " + out_path);
        out << report.dump(2) << "\n";
    } else {
        std::cout << report.dump(2) << "\n";
    }
    return kExitOk;
}

int cmd_subshots(const std::string& code_bits) {
    const auto code = chainshot::RelevanceCode::from_bit_string(code_bits);
    const auto pair = chainshot::build_subshot_pair(code);

    auto print_slots = [](const char* name, const std::vector<chainshot::SourceSlot>& slots) {
        std::cout << name;
        for (const auto& slot : slots) {
            std::cout << ' ';
            if (slot.is_black()) {
                std::cout << 'B';
            } else {
                std::cout << slot.index;
            }
        }
        std::cout << "\n";
    };
    std::cout << "n " << code.n << "\n";
    std::cout << "alpha " << pair.alpha << "\n";
    print_slots("positive", pair.positive);
    print_slots("negative", pair.negative);
    return kExitOk;
}

int cmd_run(const PipelineConfig& cfg, const std::string& frames_dir, const std::string& question) {
    auto handle = make_oracle(cfg);
    auto backend = make_backend(cfg);
    const auto shots = load_shots(cfg, frames_dir, handle.tags ? &*handle.tags : nullptr);

    const auto grounded = chainshot::ground(*handle.oracle, shots, question, make_grounding_options(cfg));
    auto pair = chainshot::build_subshot_pair(grounded.code);
    if (cfg.alpha_override >= 0.0) {
        pair.alpha = cfg.alpha_override;
    }
    std::cerr << "# code=" << grounded.code.to_bit_string() << " alpha=" << pair.alpha << "\n";

    std::vector<chainshot::StepTrace> trace;
    const auto result = chainshot::co_reason_decode(*backend, shots, pair, question,
                                              make_generation_config(cfg),
                                              cfg.trace ? &trace : nullptr);
    if (cfg.trace) {
        for (const auto& step : trace) {
            std::cerr << "# step " << step.step << " chosen=" << step.chosen << " top:";
            for (const auto& [token, logit] : step.top) {
                std::cerr << " " << token << ":" << logit;
            }
            std::cerr << "\n";
        }
    }
    std::cout << result.text << "\n";
    return kExitOk;
}

int cmd_bench(const PipelineConfig& cfg, const std::string& manifest_path, const std::string& mode,
              const std::string& out_path, bool canonical) {
    if (mode != "cos" && mode != "baseline") {
        throw chainshot::ArgumentError("--mode must be cos or baseline");
    }
    const auto items = chainshot::load_manifest(manifest_path);

    OracleHandle handle;
    if (mode == "cos" || !cfg.oracle_spec.empty()) {
        handle = make_oracle(cfg);
    } else if (!cfg.tags_spec.empty()) {
        handle.tags = chainshot::TagManifest::load(cfg.tags_spec);
    }
    auto backend = make_backend(cfg);

    chainshot::BenchConfig bench;
    bench.num_shots = cfg.num_shots;
    bench.group_size = cfg.group_size;
    bench.tile_size = cfg.tile_size;
    if (cfg.alpha_override >= 0.0) bench.alpha_override = cfg.alpha_override;
    bench.generation = make_generation_config(cfg);
    bench.grounding = make_grounding_options(cfg);
    bench.jobs = cfg.bench_jobs;
    bench.base_dir = std::filesystem::absolute(manifest_path).parent_path();
    bench.tags = handle.tags ? &*handle.tags : nullptr;

    const auto report = chainshot::run_benchmark(
        items, handle.oracle.get(), *backend, bench,
        mode == "cos" ? chainshot::BenchMode::cos : chainshot::BenchMode::baseline);

    std::cout << report.table();
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::trunc);
        if (!out) throw chainshot::IoError("cannot write report: " + out_path);
        out << report.to_json(!canonical).dump(2) << "\n";
    }
    return kExitOk;
}

int cmd_synth(const chainshot::SyntheticSpec& spec, const std::string& out_dir) {
    const auto suite = chainshot::generate_synthetic_suite(spec, out_dir);
    std::cout << "manifest " << suite.manifest_path.string() << "\n";
    std::cout << "tags " << suite.tags_path.string() << "\n";
    std::cerr << "# bench: cos bench --manifest " << suite.manifest_path.string()
              << " --oracle mock:" << suite.tags_path.string() << " --backend toy --mode cos"
              << " --num-shots " << spec.shots << " --tile-size " << spec.tile << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    PipelineConfig cfg;

    // --config / COS_CONFIG seeds defaults before flag parsing, so flags win.
    try {
        std::string config_path;
        for (int i = 1; i < argc; ++i) {
            const std::string arg = argv[i];
            if (arg == "--config" && i + 1 < argc) {
                config_path = argv[i + 1];
            } else if (arg.rfind("--config=", 0) == 0) {
                config_path = arg.substr(9);
            }
        }
        if (config_path.empty()) {
            if (const char* env = std::getenv("COS_CONFIG")) config_path = env;
        }
        if (!config_path.empty()) {
            load_config_file(config_path, cfg);
        }
    } catch (const chainshot::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const chainshot::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    CLI::App app{"query-adaptive shot selection and contrastive co-reasoning for video QA"};
    app.require_subcommand(1);
    std::string config_path_flag;
    app.add_option("--config", config_path_flag, "flat key=value config file (or $COS_CONFIG)");

    std::string frames_dir;
    std::string question;
    std::string out_path;
    std::string code_bits;
    std::string manifest_path;
    std::string mode = "cos";
    bool canonical = false;
    bool greedy_flag = false;
    chainshot::SyntheticSpec synth_spec;
    std::string synth_out;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--num-shots", cfg.num_shots, "shots sampled per video");
        sub->add_option("--group-size", cfg.group_size, "shots aggregated per mosaic");
        sub->add_option("--tile-size", cfg.tile_size, "normalized per-tile resolution");
        sub->add_option("--oracle", cfg.oracle_spec, "mock:FILE, remote:FILE, or http URL");
        sub->add_option("--backend", cfg.backend_spec, "toy, toy:FILE, remote:FILE, or http URL");
        sub->add_option("--tags", cfg.tags_spec, "tag manifest when the oracle is not a mock");
        sub->add_option("--max-new-tokens", cfg.max_new_tokens, "generation length cap");
        sub->add_option("--sample", cfg.sample_temperature, "sample with this temperature");
        sub->add_flag("--greedy", greedy_flag, "greedy decoding (default)");
        sub->add_option("--seed", cfg.seed, "seed for sampling and mock noise");
        sub->add_option("--alpha-override", cfg.alpha_override, "fixed contrast weight in [0, 1]");
        sub->add_option("--jobs", cfg.jobs, "concurrent oracle calls");
        sub->add_option("--bench-jobs", cfg.bench_jobs, "concurrent benchmark items");
        sub->add_option("--retries", cfg.retries, "oracle retries per group");
        sub->add_option("--backoff-ms", cfg.backoff_ms, "base retry backoff");
        sub->add_flag("--trace", cfg.trace, "log per-step combined logits to stderr");
    };

    CLI::App* ground_cmd = app.add_subcommand("ground", "binary relevance summary for one video");
    ground_cmd->add_option("--frames", frames_dir, "frame directory")->required();
    ground_cmd->add_option("--question", question, "query text")->required();
    ground_cmd->add_option("--out", out_path, "write the group report JSON here");
    add_common(ground_cmd);

    CLI::App* subshots_cmd =
        app.add_subcommand("subshots", "positive/negative index maps for a relevance code");
    subshots_cmd->add_option("--code", code_bits, "relevance bits, e.g. 0101")->required();

    CLI::App* run_cmd = app.add_subcommand("run", "answer one question about one video");
    run_cmd->add_option("--frames", frames_dir, "frame directory")->required();
    run_cmd->add_option("--question", question, "query text")->required();
    add_common(run_cmd);

    CLI::App* bench_cmd = app.add_subcommand("bench", "run a QA manifest and report accuracy");
    bench_cmd->add_option("--manifest", manifest_path, "JSONL benchmark manifest")->required();
    bench_cmd->add_option("--mode", mode, "cos or baseline");
    bench_cmd->add_option("--out", out_path, "write the report JSON here");
    bench_cmd->add_flag("--canonical", canonical, "exclude wall-time fields from the report");
    add_common(bench_cmd);

    CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic QA suite");
    synth_cmd->add_option("--out", synth_out, "suite output directory")->required();
    synth_cmd->add_option("--items", synth_spec.items, "number of items");
    synth_cmd->add_option("--shots", synth_spec.shots, "frames per item");
    synth_cmd->add_option("--relevant", synth_spec.relevant, "evidence shots per item");
    synth_cmd->add_option("--distractors", synth_spec.distractors, "distractor shots per item");
    synth_cmd->add_option("--options", synth_spec.options, "answer options per item");
    synth_cmd->add_option("--suite-group-size", synth_spec.group_size,
                          "grouping the evidence placement assumes");
    synth_cmd->add_option("--tile", synth_spec.tile, "written frame resolution");
    synth_cmd->add_option("--flip-rate", synth_spec.flip_rate, "mock verdict noise in [0, 1]");
    synth_cmd->add_option("--seed", synth_spec.seed, "suite seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        validate_config(cfg);
        if (ground_cmd->parsed()) {
            print_effective_config(cfg, "ground");
            return cmd_ground(cfg, frames_dir, question, out_path);
        }
        if (subshots_cmd->parsed()) {
            return cmd_subshots(code_bits);
        }
        if (run_cmd->parsed()) {
            print_effective_config(cfg, "run");
            return cmd_run(cfg, frames_dir, question);
        }
        if (bench_cmd->parsed()) {
            print_effective_config(cfg, "bench");
            return cmd_bench(cfg, manifest_path, mode, out_path, canonical);
        }
        if (synth_cmd->parsed()) {
            return cmd_synth(synth_spec, synth_out);
        }
    } catch (const chainshot::ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const chainshot::TransportError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitTransport;
    } catch (const chainshot::DecodeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.transport() ? kExitTransport : kExitRuntime;
    } catch (const chainshot::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const chainshot::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
