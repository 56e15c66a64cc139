#pragma once

// Instance spaces for k-party unique-disjointness over a coordinate set I,
// combinatorial rectangles, and the exact density of a rectangle inside the
// no-instance space. A no instance has every column sum at most 1; a yes
// instance has exactly one all-ones column and every other column sum at
// most 1. The no-instance space over I has exactly (k+1)^|I| members.

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "udw/coords.hpp"
#include "udw/rational.hpp"
#include "udw/rng.hpp"

namespace udw {

struct cap_exceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// raised when an exhaustive check contradicts a structural guarantee the
// rest of the code relies on; these must never be swallowed
struct falsification_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr std::uint64_t kDefaultEnumerationCap = std::uint64_t{1} << 24;

enum class ClassTag { No, Yes, Outside };

struct InstanceClass {
    ClassTag tag = ClassTag::Outside;
    int yes_coord = 0;  // label, meaningful only for Yes

    bool operator==(const InstanceClass& o) const {
        return tag == o.tag && (tag != ClassTag::Yes || yes_coord == o.yes_coord);
    }
};

struct Instance {
    int k = 0;
    CoordSet coords;
    std::vector<Mask> bits;  // one mask per player

    bool operator==(const Instance& o) const {
        return k == o.k && coords == o.coords && bits == o.bits;
    }
};

// columns with sum >= 2 accumulate in seen_twice; all-ones columns are the
// AND of every player's mask
inline InstanceClass classify_member(const CoordSet& coords, const std::vector<Mask>& bits) {
    Mask seen_once = 0, seen_twice = 0;
    Mask all_ones = ~Mask{0};
    for (Mask b : bits) {
        seen_twice |= seen_once & b;
        seen_once |= b;
        all_ones &= b;
    }
    const Mask width_mask = coords.size() >= 32 ? ~Mask{0} : (Mask{1} << coords.size()) - 1;
    all_ones &= width_mask;
    if (seen_twice == 0) return {ClassTag::No, 0};
    if (all_ones != 0 && seen_twice == all_ones && (all_ones & (all_ones - 1)) == 0) {
        int p = 0;
        while (!(all_ones >> p & 1u)) ++p;
        return {ClassTag::Yes, coords.labels[static_cast<std::size_t>(p)]};
    }
    return {ClassTag::Outside, 0};
}

inline InstanceClass classify(const Instance& inst) {
    return classify_member(inst.coords, inst.bits);
}

struct Rectangle {
    int k = 0;
    CoordSet coords;
    std::vector<std::vector<Mask>> parts;  // k player-input sets, sorted unique

    static Rectangle full(int k, const CoordSet& coords) {
        Rectangle r;
        r.k = k;
        r.coords = coords;
        std::vector<Mask> all;
        all.reserve(std::size_t{1} << coords.size());
        for (Mask m = 0; m < (Mask{1} << coords.size()); ++m) all.push_back(m);
        r.parts.assign(static_cast<std::size_t>(k), all);
        return r;
    }

    BigInt product_size() const {
        BigInt s = 1;
        for (const auto& p : parts) s *= static_cast<std::uint64_t>(p.size());
        return s;
    }

    bool any_part_empty() const {
        for (const auto& p : parts)
            if (p.empty()) return true;
        return false;
    }

    // componentwise subset test
    bool contained_in(const Rectangle& outer) const {
        if (k != outer.k || !(coords == outer.coords)) return false;
        for (int j = 0; j < k; ++j) {
            const auto& a = parts[static_cast<std::size_t>(j)];
            const auto& b = outer.parts[static_cast<std::size_t>(j)];
            if (!std::includes(b.begin(), b.end(), a.begin(), a.end())) return false;
        }
        return true;
    }
};

inline void normalize_parts(Rectangle& r) {
    for (auto& p : r.parts) {
        std::sort(p.begin(), p.end());
        p.erase(std::unique(p.begin(), p.end()), p.end());
    }
}

// Walk the cartesian product of the parts in lexicographic order (player 1
// outermost, masks ascending). The visitor returns false to stop early.
inline void for_each_member(const Rectangle& r,
                            const std::function<bool(const std::vector<Mask>&)>& visit,
                            std::uint64_t cap = kDefaultEnumerationCap) {
    if (r.any_part_empty()) return;
    if (r.product_size() > cap) throw cap_exceeded("rectangle product size exceeds cap");
    std::vector<std::size_t> idx(static_cast<std::size_t>(r.k), 0);
    std::vector<Mask> member(static_cast<std::size_t>(r.k));
    for (std::size_t j = 0; j < member.size(); ++j) member[j] = r.parts[j][0];
    for (;;) {
        if (!visit(member)) return;
        int j = r.k - 1;
        for (; j >= 0; --j) {
            auto ju = static_cast<std::size_t>(j);
            if (++idx[ju] < r.parts[ju].size()) {
                member[ju] = r.parts[ju][idx[ju]];
                break;
            }
            idx[ju] = 0;
            member[ju] = r.parts[ju][0];
        }
        if (j < 0) return;
    }
}

struct DensityValue {
    BigInt num;  // |R ∩ no-instances|
    BigInt den;  // (k+1)^|coords|

    Rat ratio() const { return Rat(num, den); }

    // advisory only; never used for comparisons
    double log2_view() const {
        if (num == 0) return -std::numeric_limits<double>::infinity();
        return log2_big(num) - log2_big(den);
    }

    // exact cross-multiplied comparison against another density
    int compare(const DensityValue& o) const {
        BigInt lhs = num * o.den, rhs = o.num * den;
        if (lhs < rhs) return -1;
        if (lhs > rhs) return 1;
        return 0;
    }
};

inline DensityValue density(const Rectangle& r, std::uint64_t cap = kDefaultEnumerationCap) {
    std::uint64_t no_count = 0;
    for_each_member(
        r,
        [&](const std::vector<Mask>& m) {
            if (classify_member(r.coords, m).tag == ClassTag::No) ++no_count;
            return true;
        },
        cap);
    return {BigInt(no_count), ipow(BigInt(r.k) + 1, static_cast<unsigned>(r.coords.size()))};
}

inline std::optional<Instance> witness_yes(const Rectangle& r,
                                           std::uint64_t cap = kDefaultEnumerationCap) {
    std::optional<Instance> found;
    for_each_member(
        r,
        [&](const std::vector<Mask>& m) {
            if (classify_member(r.coords, m).tag == ClassTag::Yes) {
                found = Instance{r.k, r.coords, m};
                return false;
            }
            return true;
        },
        cap);
    return found;
}

inline bool is_zero_monochromatic(const Rectangle& r,
                                  std::uint64_t cap = kDefaultEnumerationCap) {
    return !witness_yes(r, cap).has_value();
}

// sampling fallback for rectangles whose product space exceeds the
// enumeration cap; a miss is not a proof of monochromaticity
inline std::optional<Instance> witness_yes_sampled(const Rectangle& r, Rng& rng,
                                                   std::uint64_t samples) {
    if (r.any_part_empty()) return std::nullopt;
    std::vector<Mask> member(static_cast<std::size_t>(r.k));
    for (std::uint64_t t = 0; t < samples; ++t) {
        for (int j = 0; j < r.k; ++j) {
            const auto& part = r.parts[static_cast<std::size_t>(j)];
            member[static_cast<std::size_t>(j)] = part[rng.below(part.size())];
        }
        if (classify_member(r.coords, member).tag == ClassTag::Yes)
            return Instance{r.k, r.coords, member};
    }
    return std::nullopt;
}

enum class SpaceSelector { No, YesAll };

// Enumerate an instance class over `coords`. No-instances are generated
// column by column (k+1 choices each: empty column or a single owner), so
// the count (k+1)^|coords| is exact by construction.
inline std::vector<Instance> enumerate_space(const CoordSet& coords, int k,
                                             SpaceSelector which,
                                             std::uint64_t cap = kDefaultEnumerationCap) {
    const auto m = coords.size();
    BigInt total = ipow(BigInt(k) + 1, static_cast<unsigned>(m));
    if (total > cap) throw cap_exceeded("enumerate_space: (k+1)^|coords| exceeds cap");

    std::vector<Instance> out;
    auto emit_no_like = [&](int yes_position) {
        // columns over positions != yes_position range over k+1 choices;
        // yes_position (if any) is pinned to all-ones
        std::vector<int> choice(m, 0);  // 0 = empty column, j = player j owns it
        for (;;) {
            Instance inst{k, coords, std::vector<Mask>(static_cast<std::size_t>(k), 0)};
            for (std::size_t p = 0; p < m; ++p) {
                if (static_cast<int>(p) == yes_position) {
                    for (auto& b : inst.bits) b |= Mask{1} << p;
                } else if (choice[p] > 0) {
                    inst.bits[static_cast<std::size_t>(choice[p] - 1)] |= Mask{1} << p;
                }
            }
            out.push_back(std::move(inst));
            std::size_t p = 0;
            for (; p < m; ++p) {
                if (static_cast<int>(p) == yes_position) continue;
                if (++choice[p] <= k) break;
                choice[p] = 0;
            }
            if (p == m) break;
        }
    };

    if (which == SpaceSelector::No) {
        emit_no_like(-1);
    } else {
        for (std::size_t p = 0; p < m; ++p) emit_no_like(static_cast<int>(p));
    }
    return out;
}

inline std::vector<Instance> enumerate_yes_at(const CoordSet& coords, int k, int yes_label,
                                              std::uint64_t cap = kDefaultEnumerationCap) {
    int pos = coords.position_of(yes_label);
    if (pos < 0) throw std::invalid_argument("enumerate_yes_at: label not in coords");
    auto all = enumerate_space(coords, k, SpaceSelector::YesAll, cap);
    std::vector<Instance> out;
    for (auto& inst : all) {
        auto c = classify(inst);
        if (c.tag == ClassTag::Yes && c.yes_coord == yes_label) out.push_back(std::move(inst));
    }
    return out;
}

// does the rectangle contain any yes instance whose all-ones column is `label`?
inline bool intersects_yes_at(const Rectangle& r, int label,
                              std::uint64_t cap = kDefaultEnumerationCap) {
    bool hit = false;
    for_each_member(
        r,
        [&](const std::vector<Mask>& m) {
            auto c = classify_member(r.coords, m);
            if (c.tag == ClassTag::Yes && c.yes_coord == label) {
                hit = true;
                return false;
            }
            return true;
        },
        cap);
    return hit;
}

}  // namespace udw
