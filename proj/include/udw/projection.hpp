#pragma once

// The deterministic density-increment engine. Projecting a rectangle on
// (coord i, player j) removes coordinate i: every other player keeps the
// inputs whose i-bit is 0, player j keeps inputs with either i-bit. Two
// structural facts drive everything downstream:
//   - projection preserves 0-monochromaticity;
//   - if the rectangle misses the yes-instances at i, some player's
//     projection multiplies the exact no-density ratio by >= (k+1)/k.
// Iterating the best projection over all coordinates certifies the global
// bound |R ∩ no-instances| <= k^n for 0-monochromatic rectangles.

#include <map>
#include <optional>
#include <vector>

#include "udw/domain.hpp"

namespace udw {

inline Rectangle project(const Rectangle& r, int coord, int player) {
    const int p = r.coords.position_of(coord);
    if (p < 0) throw std::invalid_argument("project: coordinate not in rectangle");
    if (player < 1 || player > r.k) throw std::invalid_argument("project: bad player index");

    Rectangle out;
    out.k = r.k;
    out.coords = r.coords.without(coord);
    out.parts.resize(static_cast<std::size_t>(r.k));
    for (int j = 1; j <= r.k; ++j) {
        const auto& src = r.parts[static_cast<std::size_t>(j - 1)];
        auto& dst = out.parts[static_cast<std::size_t>(j - 1)];
        for (Mask m : src) {
            if (j == player || !(m >> p & 1u)) dst.push_back(drop_bit(m, p));
        }
    }
    normalize_parts(out);
    return out;
}

inline bool check_monochromatic_preserved(const Rectangle& r, int coord, int player,
                                          std::uint64_t cap = kDefaultEnumerationCap) {
    if (!is_zero_monochromatic(r, cap))
        throw std::invalid_argument(
            "check_monochromatic_preserved: rectangle is not 0-monochromatic");
    return is_zero_monochromatic(project(r, coord, player), cap);
}

struct ProjectionStep {
    int coord = 0;
    int player = 0;
    DensityValue before;
    DensityValue after;
    Rat increment_ratio;  // defined when before.num > 0
};

// Pick the player whose projection keeps the most no-instances (ties go to
// the smallest player index).
inline ProjectionStep best_projection(const Rectangle& r, int coord,
                                      std::uint64_t cap = kDefaultEnumerationCap) {
    DensityValue before = density(r, cap);
    if (before.num == 0)
        throw std::invalid_argument("best_projection: rectangle has no no-instances");

    ProjectionStep best;
    bool have = false;
    for (int j = 1; j <= r.k; ++j) {
        DensityValue after = density(project(r, coord, j), cap);
        if (!have || after.num > best.after.num) {
            best.coord = coord;
            best.player = j;
            best.after = after;
            have = true;
        }
    }
    best.before = before;
    best.increment_ratio = Rat(best.after.num * before.den, before.num * best.after.den);
    return best;
}

struct ExtensionProfile {
    CoordSet reduced_coords;
    // projected no-instances x' with |ext(x')|, keyed by the k restricted masks
    std::vector<std::pair<std::vector<Mask>, int>> ext_sizes;
    std::size_t a_size = 0;  // |ext| >= 2
    std::size_t b_size = 0;  // |ext| == 1
};

inline ExtensionProfile extension_profile(const Rectangle& r, int coord,
                                          std::uint64_t cap = kDefaultEnumerationCap) {
    const int p = r.coords.position_of(coord);
    if (p < 0) throw std::invalid_argument("extension_profile: coordinate not in rectangle");

    std::map<std::vector<Mask>, int> groups;
    for_each_member(
        r,
        [&](const std::vector<Mask>& m) {
            if (classify_member(r.coords, m).tag == ClassTag::No) {
                std::vector<Mask> key(m.size());
                for (std::size_t j = 0; j < m.size(); ++j) key[j] = drop_bit(m[j], p);
                ++groups[key];
            }
            return true;
        },
        cap);

    ExtensionProfile prof;
    prof.reduced_coords = r.coords.without(coord);
    for (auto& [key, count] : groups) {
        prof.ext_sizes.emplace_back(key, count);
        if (count >= 2)
            ++prof.a_size;
        else
            ++prof.b_size;
    }
    return prof;
}

struct BoundCertificate {
    std::vector<ProjectionStep> steps;
    bool bound_certified = false;
    BigInt certified_bound;  // k^n when certified
    BigInt actual_count;     // |R ∩ no-instances|, exact
    std::optional<Instance> yes_witness;
};

// Either exhibit a yes instance inside R, or run the full projection
// cascade and certify |R ∩ no-instances| <= k^n. A projection step falling
// below the guaranteed (k+1)/k factor while the rectangle is
// 0-monochromatic is impossible; it aborts loudly instead of certifying.
inline BoundCertificate certify_density_bound(const Rectangle& r,
                                              const std::vector<int>* coord_order = nullptr,
                                              std::uint64_t cap = kDefaultEnumerationCap) {
    BoundCertificate cert;
    const unsigned n = static_cast<unsigned>(r.coords.size());
    cert.actual_count = density(r, cap).num;

    if (auto w = witness_yes(r, cap)) {
        cert.yes_witness = std::move(w);
        return cert;
    }

    cert.bound_certified = true;
    cert.certified_bound = ipow(BigInt(r.k), n);
    if (cert.actual_count == 0) return cert;  // empty density: nothing to project

    std::vector<int> order = coord_order ? *coord_order : r.coords.labels;
    if (order.size() != r.coords.size())
        throw std::invalid_argument("certify_density_bound: order must cover all coordinates");

    const Rat guaranteed(r.k + 1, r.k);
    Rectangle cur = r;
    for (int coord : order) {
        ProjectionStep step = best_projection(cur, coord, cap);
        if (step.increment_ratio < guaranteed)
            throw falsification_error(
                "projection increment below (k+1)/k on a 0-monochromatic rectangle");
        Rectangle next = project(cur, coord, step.player);
        cert.steps.push_back(step);
        cur = std::move(next);
    }

    if (cert.actual_count > cert.certified_bound)
        throw falsification_error("certified bound violated by the exact count");
    return cert;
}

}  // namespace udw
