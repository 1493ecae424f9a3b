// Copyright 2026 The CoS Authors
// SPDX-License-Identifier: Apache-2.0

#include "cos/subshots.hpp"

#include "cos/error.hpp"

namespace chainshot {

namespace {

// Shared nearest-neighbor replacement: positions already in the set keep
// themselves, the rest take the closest in-set index scanning [i+1, n-1]
// first, then [0, i-1]. `fallback_black` selects the behavior when the set is
// empty (black frames for the negative sequence, identity for the positive).
std::vector<SourceSlot> nearest_in_set(int n, const std::vector<bool>& in_set,
                                       bool fallback_black) {
    std::vector<int> next(n, -1); // smallest in-set index >= i
    std::vector<int> prev(n, -1); // largest in-set index <= i
    for (int i = n - 1; i >= 0; --i) {
        next[i] = in_set[i] ? i : (i + 1 < n ? next[i + 1] : -1);
    }
    for (int i = 0; i < n; ++i) {
        prev[i] = in_set[i] ? i : (i > 0 ? prev[i - 1] : -1);
    }

    std::vector<SourceSlot> slots;
    slots.reserve(n);
    for (int i = 0; i < n; ++i) {
        if (in_set[i]) {
            slots.push_back(SourceSlot::original(i));
            continue;
        }
        const int k = i + 1 < n ? next[i + 1] : -1;
        if (k != -1) {
            slots.push_back(SourceSlot::original(k));
            continue;
        }
        const int j = i > 0 ? prev[i - 1] : -1;
        if (j != -1) {
            slots.push_back(SourceSlot::original(j));
            continue;
        }
        slots.push_back(fallback_black ? SourceSlot::black() : SourceSlot::original(i));
    }
    return slots;
}

void check_code(int n, const RelevanceCode& code, const char* op) {
    if (code.n != n || static_cast<int>(code.bits.size()) != n) {
        throw ArgumentError(std::string(op) + ": relevance code length does not match n");
    }
    if (n < 1) {
        throw ArgumentError(std::string(op) + ": n must be >= 1");
    }
}

} // namespace

std::vector<SourceSlot> build_positive(int n, const RelevanceCode& code) {
    check_code(n, code, "build_positive");
    return nearest_in_set(n, code.bits, /*fallback_black=*/false);
}

std::vector<SourceSlot> build_negative(int n, const RelevanceCode& code) {
    check_code(n, code, "build_negative");
    std::vector<bool> complement(code.bits.size());
    for (size_t i = 0; i < code.bits.size(); ++i) {
        complement[i] = !code.bits[i];
    }
    return nearest_in_set(n, complement, /*fallback_black=*/true);
}

double compute_alpha(const RelevanceCode& code) {
    if (code.n < 1 || static_cast<int>(code.bits.size()) != code.n) {
        throw ArgumentError("compute_alpha: invalid relevance code");
    }
    const int relevant = code.relevant_count();
    if (relevant == 0 || relevant == code.n) {
        return 0.0; // no discrimination signal in the pair
    }
    return 1.0 - static_cast<double>(relevant) / code.n;
}

SubShotPair build_subshot_pair(const RelevanceCode& code) {
    SubShotPair pair;
    pair.positive = build_positive(code.n, code);
    pair.negative = build_negative(code.n, code);
    pair.alpha = compute_alpha(code);
    pair.code = code;
    return pair;
}

std::pair<ShotSequence, ShotSequence> materialize(const ShotSequence& shots,
                                                  const SubShotPair& pair) {
    const int n = shots.size();
    if (n < 1) {
        throw ArgumentError("materialize: empty shot sequence");
    }
    if (static_cast<int>(pair.positive.size()) != n ||
        static_cast<int>(pair.negative.size()) != n) {
        throw ArgumentError("materialize: pair was not built from this sequence");
    }
    const auto& front = shots.shots.front().pixels;
    if (!front || front->empty()) {
        throw ArgumentError("materialize: sequence resolution unknown");
    }

    FrameRef black; // shared by every black slot, created on demand
    auto resolve = [&](const SourceSlot& slot) -> FrameRef {
        if (slot.is_black()) {
            if (!black.pixels) {
                black = make_black_frame(front->height, front->width);
            }
            return black;
        }
        if (slot.index < 0 || slot.index >= n) {
            throw ArgumentError("materialize: slot index out of range");
        }
        return shots.shots[slot.index];
    };

    ShotSequence positive;
    ShotSequence negative;
    positive.source = shots.source;
    negative.source = shots.source;
    positive.shots.reserve(n);
    negative.shots.reserve(n);
    for (int i = 0; i < n; ++i) {
        positive.shots.push_back(resolve(pair.positive[i]));
        negative.shots.push_back(resolve(pair.negative[i]));
    }
    return {std::move(positive), std::move(negative)};
}

} // namespace chainshot
