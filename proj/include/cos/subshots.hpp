// Copyright 2026 The CoS Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <utility>
#include <vector>

#include "cos/grounding.hpp"
#include "cos/media.hpp"

namespace chainshot {

// Where one position of a sub-shot sequence draws its frame from: a shot of
// the original sequence, or the synthesized black fallback frame.
struct SourceSlot {
    enum class Kind { original, black };

    Kind kind = Kind::original;
    int index = -1; // valid only for Kind::original

    static SourceSlot original(int i) { return {Kind::original, i}; }
    static SourceSlot black() { return {Kind::black, -1}; }
    bool is_black() const { return kind == Kind::black; }

    bool operator==(const SourceSlot&) const = default;
};

// Positive sequence, negative sequence, and the dynamic contrast weight.
// Both sequences keep the original length n.
struct SubShotPair {
    std::vector<SourceSlot> positive;
    std::vector<SourceSlot> negative;
    double alpha = 0.0;
    RelevanceCode code;
};

// Positive sub-shot construction. Position i keeps shot i when it is
// relevant; otherwise it takes the nearest subsequent relevant shot, then the
// nearest preceding one. With no relevant shots at all the sequence is the
// identity (the positive sequence falls back to the original video).
std::vector<SourceSlot> build_positive(int n, const RelevanceCode& code);

// Negative counterpart: irrelevant shots stay, relevant positions take the
// nearest irrelevant neighbor (subsequent first), and when every shot is
// relevant each position becomes the black fallback frame.
std::vector<SourceSlot> build_negative(int n, const RelevanceCode& code);

// Contrast weight: 1 - relevant/n, forced to 0 for the two degenerate codes
// (no relevant shots, all relevant) where the pair carries no signal.
double compute_alpha(const RelevanceCode& code);

SubShotPair build_subshot_pair(const RelevanceCode& code);

// Resolves slots to concrete frames; black slots become all-zero frames at
// the sequence's normalized resolution.
std::pair<ShotSequence, ShotSequence> materialize(const ShotSequence& shots,
                                                  const SubShotPair& pair);

} // namespace chainshot
