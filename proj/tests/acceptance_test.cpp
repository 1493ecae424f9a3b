// Copyright 2026 The CoS Authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the process exits nonzero if any criterion fails.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cos/decode.hpp"
#include "cos/error.hpp"
#include "cos/grounding.hpp"
#include "cos/harness.hpp"
#include "cos/oracles.hpp"
#include "cos/subshots.hpp"
#include "support/proc.hpp"
#include "support/reference_subshots.hpp"
#include "support/test_util.hpp"

using namespace chainshot;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool ok, const std::string& detail = "") {
    std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", index, name.c_str(),
                detail.empty() ? "" : " — ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// 1. Sub-shot construction equals the literal exhaustive reference for every
//    relevance code up to n = 10.
void criterion_subshot_equivalence() {
    const double start = now_seconds();
    long checked = 0;
    for (int n = 1; n <= 10; ++n) {
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            const auto bits = testing::bits_from_mask(mask, n);
            const auto code = testing::code_from_bits(bits);
            if (build_positive(n, code) != testing::reference_positive(bits) ||
                build_negative(n, code) != testing::reference_negative(bits)) {
                report(1, "sub-shot brute-force equivalence", false,
                       "mismatch at n=" + std::to_string(n) + " mask=" + std::to_string(mask));
                return;
            }
            ++checked;
        }
    }
    const double elapsed = now_seconds() - start;
    std::ostringstream detail;
    detail << checked << " codes, " << elapsed << " s";
    report(1, "sub-shot brute-force equivalence", elapsed < 60.0, detail.str());
}

// 2. softmax of the combined logits equals the normalized product form
//    p_x * (p_p / p_n)^alpha within 1e-9 relative error per entry.
void criterion_product_form() {
    std::mt19937_64 rng(20260810);
    auto uniform = [&](double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };

    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int v = 2 + static_cast<int>(rng() % 63);
        std::vector<double> lx(v), lp(v), ln(v);
        for (int i = 0; i < v; ++i) {
            lx[i] = uniform(-10, 10);
            lp[i] = uniform(-10, 10);
            ln[i] = uniform(-10, 10);
        }
        for (const double alpha : {0.0, 0.25, 0.5, 1.0}) {
            const auto probs =
                combined_probability({lx}, {lp}, {ln}, alpha);

            // reference route in the linear domain, long double
            auto soft = [&](const std::vector<double>& l) {
                long double max_l = l[0];
                for (const double x : l) max_l = std::max<long double>(max_l, x);
                std::vector<long double> p(v);
                long double sum = 0.0L;
                for (int i = 0; i < v; ++i) {
                    p[i] = std::exp(static_cast<long double>(l[i]) - max_l);
                    sum += p[i];
                }
                for (auto& x : p) x /= sum;
                return p;
            };
            const auto px = soft(lx);
            const auto pp = soft(lp);
            const auto pn = soft(ln);
            long double sum = 0.0L;
            std::vector<long double> q(v);
            for (int i = 0; i < v; ++i) {
                q[i] = px[i] * std::pow(pp[i] / pn[i], static_cast<long double>(alpha));
                sum += q[i];
            }
            for (int i = 0; i < v; ++i) {
                const double expected = static_cast<double>(q[i] / sum);
                const double rel =
                    std::abs(probs[i] - expected) / std::max(std::abs(expected), 1e-300);
                worst = std::max(worst, rel);
                if (rel >= 1e-9) {
                    std::ostringstream detail;
                    detail << "trial " << trial << " alpha " << alpha << " rel err " << rel;
                    report(2, "product-form identity", false, detail.str());
                    return;
                }
            }
        }
    }
    std::ostringstream detail;
    detail << "1000 trials x 4 alphas, worst rel err " << worst;
    report(2, "product-form identity", true, detail.str());
}

// 3. alpha = 0, empty index set, and all-relevant index set each reduce
//    co-reasoning to the baseline decode, token for token.
void criterion_reductions() {
    std::mt19937_64 rng(31337);
    for (int scenario = 0; scenario < 100; ++scenario) {
        const int n = 4 + static_cast<int>(rng() % 28);
        std::map<int, std::set<std::string>> tags;
        for (int i = 0; i < n; ++i) {
            const int roll = static_cast<int>(rng() % 5);
            if (roll == 0) tags[i] = {"evidence", std::string("ev_") + char('A' + rng() % 4)};
            if (roll == 1) tags[i] = {"distractor"};
        }
        const auto seq = testing::make_sequence(n, tags);
        ToyDecoderBackend backend;

        GenerationConfig config;
        config.max_new_tokens = 8;
        if (scenario % 2 == 1) {
            config.mode = GenerationConfig::Mode::sample;
            config.temperature = 0.5 + 0.1 * (scenario % 7);
            config.seed = 1000 + scenario;
        }
        const auto baseline = baseline_decode(backend, seq, "q", config);

        // (a) random code with alpha forced to zero
        std::vector<bool> random_bits(n);
        for (int i = 0; i < n; ++i) random_bits[i] = (rng() & 1) == 1;
        auto forced = build_subshot_pair(testing::code_from_bits(random_bits));
        forced.alpha = 0.0;
        // (b) empty index set, (c) all shots relevant
        const auto empty_pair =
            build_subshot_pair(testing::code_from_bits(std::vector<bool>(n, false)));
        const auto full_pair =
            build_subshot_pair(testing::code_from_bits(std::vector<bool>(n, true)));

        int which = 0;
        const SubShotPair* cases[3] = {&forced, &empty_pair, &full_pair};
        for (const SubShotPair* pair : cases) {
            const auto result = co_reason_decode(backend, seq, *pair, "q", config);
            if (result.tokens != baseline.tokens) {
                report(3, "reduction to baseline", false,
                       "scenario " + std::to_string(scenario) + " case " +
                           std::to_string(which) + " diverged");
                return;
            }
            ++which;
        }
    }
    report(3, "reduction to baseline", true, "100 scenarios x {alpha=0, empty, all-relevant}");
}

// 4. ground issues exactly ceil(n/k) oracle calls and its code is stable
//    across repeated runs.
void criterion_grounding_calls() {
    for (const auto& [n, k] : std::vector<std::pair<int, int>>{{128, 4}, {128, 2}, {5, 4}, {7, 1}}) {
        std::map<int, std::set<std::string>> tags;
        for (int i = 0; i < n; i += 3) tags[i] = {"evidence"};
        const auto seq = testing::make_sequence(n, tags);

        MockOracle mock({"evidence"});
        testing::CountingOracle counting(mock);
        GroundingOptions options;
        options.group_size = k;
        options.parallelism = 8;
        options.retry.backoff_base = std::chrono::milliseconds(0);

        const auto first = ground(counting, seq, "marker?", options);
        const int expected = (n + k - 1) / k;
        if (counting.calls.load() != expected) {
            report(4, "grounding determinism and call count", false,
                   "n=" + std::to_string(n) + " k=" + std::to_string(k) + " calls=" +
                       std::to_string(counting.calls.load()) + " expected=" +
                       std::to_string(expected));
            return;
        }
        const auto second = ground(counting, seq, "marker?", options);
        if (first.code.to_bit_string() != second.code.to_bit_string()) {
            report(4, "grounding determinism and call count", false,
                   "codes diverged for n=" + std::to_string(n) + " k=" + std::to_string(k));
            return;
        }
    }
    report(4, "grounding determinism and call count", true,
           "(n,k) in {(128,4),(128,2),(5,4),(7,1)}");
}

// 5. On the sparse synthetic suite the co-reasoning pipeline beats the
//    baseline by at least 20 accuracy points within the time budget.
void criterion_synthetic_gap(const fs::path& suite_dir) {
    const double start = now_seconds();

    SyntheticSpec spec;
    spec.items = 200;
    spec.shots = 64;
    spec.relevant = 4;
    spec.distractors = 40;
    spec.options = 4;
    spec.tile = 16;
    spec.seed = 7;
    const auto suite = generate_synthetic_suite(spec, suite_dir);
    const auto items = load_manifest(suite.manifest_path);
    const auto tags = TagManifest::load(suite.tags_path);

    MockOracle oracle = MockOracle::from_manifest(tags);
    ToyDecoderBackend backend;
    BenchConfig config;
    config.num_shots = spec.shots;
    config.group_size = spec.group_size;
    config.tile_size = spec.tile;
    config.base_dir = fs::absolute(suite.manifest_path).parent_path();
    config.tags = &tags;
    config.grounding.retry.backoff_base = std::chrono::milliseconds(0);

    const auto cos_report = run_benchmark(items, &oracle, backend, config, BenchMode::cos);
    const auto base_report = run_benchmark(items, nullptr, backend, config, BenchMode::baseline);

    const double gap = cos_report.overall.accuracy() - base_report.overall.accuracy();
    const double elapsed = now_seconds() - start;
    std::ostringstream detail;
    detail << "cos " << cos_report.overall.accuracy() << " vs baseline "
           << base_report.overall.accuracy() << " (gap " << gap << "), " << elapsed << " s";
    report(5, "synthetic end-to-end gap", gap >= 0.20 && elapsed < 300.0, detail.str());
}

// 6. alpha arithmetic: the worked value, the degenerate codes, and the
//    bounds over every code up to n = 10.
void criterion_alpha() {
    bool ok = true;
    std::string detail;

    const auto half = RelevanceCode::from_bit_string("11110000");
    if (compute_alpha(half) != 0.5) {
        ok = false;
        detail = "alpha(11110000) != 0.5";
    }
    if (compute_alpha(RelevanceCode::from_bit_string("00000000")) != 0.0 ||
        compute_alpha(RelevanceCode::from_bit_string("11111111")) != 0.0) {
        ok = false;
        detail = "degenerate codes must give alpha 0";
    }
    for (int n = 1; ok && n <= 10; ++n) {
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            const double alpha = compute_alpha(testing::code_from_bits(testing::bits_from_mask(mask, n)));
            if (!(alpha >= 0.0 && alpha <= 1.0)) {
                ok = false;
                detail = "alpha out of bounds at n=" + std::to_string(n) +
                         " mask=" + std::to_string(mask);
                break;
            }
        }
    }
    report(6, "alpha arithmetic", ok, ok ? "exact at n/2, 0 at degenerates, bounded on 2^n codes" : detail);
}

// 7. With flip_rate 0.3 the full bench pipeline completes and records alpha
//    and the relevant-shot count for every item.
void criterion_robustness(const fs::path& suite_dir) {
    SyntheticSpec spec;
    spec.items = 30;
    spec.shots = 32;
    spec.relevant = 3;
    spec.distractors = 12;
    spec.tile = 8;
    spec.seed = 99;
    spec.flip_rate = 0.3;
    const auto suite = generate_synthetic_suite(spec, suite_dir);
    const auto items = load_manifest(suite.manifest_path);
    const auto tags = TagManifest::load(suite.tags_path);

    MockOracle oracle = MockOracle::from_manifest(tags);
    ToyDecoderBackend backend;
    BenchConfig config;
    config.num_shots = spec.shots;
    config.tile_size = spec.tile;
    config.base_dir = fs::absolute(suite.manifest_path).parent_path();
    config.tags = &tags;
    config.grounding.retry.backoff_base = std::chrono::milliseconds(0);

    try {
        const auto report_run = run_benchmark(items, &oracle, backend, config, BenchMode::cos);
        bool ok = report_run.overall.total == spec.items;
        for (const auto& record : report_run.items) {
            if (!record.alpha.has_value() || !record.relevant_count.has_value() ||
                !record.error.empty()) {
                ok = false;
            }
        }
        report(7, "robustness smoke at flip_rate 0.3", ok,
               ok ? "30 items, alpha and relevant count recorded for each"
                  : "missing per-item fields or aborted items");
    } catch (const std::exception& e) {
        report(7, "robustness smoke at flip_rate 0.3", false, e.what());
    }
}

// 8. Two CLI bench runs with identical seeds and mock components produce
//    canonically identical reports.
void criterion_determinism(const fs::path& suite_dir, const std::string& cli) {
    SyntheticSpec spec;
    spec.items = 12;
    spec.shots = 16;
    spec.relevant = 2;
    spec.distractors = 6;
    spec.tile = 8;
    spec.seed = 42;
    spec.flip_rate = 0.2;
    const auto suite = generate_synthetic_suite(spec, suite_dir);

    const fs::path out_a = suite_dir / "report_a.json";
    const fs::path out_b = suite_dir / "report_b.json";
    const std::string command = cli + " bench --manifest " + suite.manifest_path.string() +
                                " --oracle mock:" + suite.tags_path.string() +
                                " --backend toy --mode cos --num-shots 16 --tile-size 8" +
                                " --seed 42 --canonical 2>/dev/null";

    const auto first = testing::run_command(command + " --out " + out_a.string());
    const auto second = testing::run_command(command + " --out " + out_b.string());
    if (first.exit_code != 0 || second.exit_code != 0) {
        report(8, "bench determinism", false,
               "cli exits " + std::to_string(first.exit_code) + "/" +
                   std::to_string(second.exit_code));
        return;
    }
    std::ifstream fa(out_a), fb(out_b);
    const std::string a((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    const std::string b((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    const bool ok = !a.empty() && a == b;
    report(8, "bench determinism", ok,
           ok ? "two cos bench runs byte-identical after canonicalization" : "reports differ");
}

} // namespace

int main(int argc, char** argv) {
    const fs::path scratch =
        fs::temp_directory_path() / ("cos_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(scratch);
    fs::create_directories(scratch);

    std::string cli = COS_CLI_PATH;
    if (argc > 1) cli = argv[1];

    criterion_subshot_equivalence();
    criterion_product_form();
    criterion_reductions();
    criterion_grounding_calls();
    criterion_synthetic_gap(scratch / "gap_suite");
    criterion_alpha();
    criterion_robustness(scratch / "robust_suite");
    criterion_determinism(scratch / "determinism_suite", cli);

    fs::remove_all(scratch);
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
