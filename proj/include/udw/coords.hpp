#pragma once

// Coordinate sets and bit-vector inputs. A player's input over a coordinate
// set is stored as a machine-word bitmask: bit p corresponds to the p-th
// coordinate in canonical (ascending label) order. Exhaustive loops over all
// 2^|coords| inputs dominate the workload, so everything here stays in
// registers.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace udw {

using Mask = std::uint32_t;

struct CoordSet {
    std::vector<int> labels;  // sorted ascending, no duplicates

    CoordSet() = default;
    explicit CoordSet(std::vector<int> ls) : labels(std::move(ls)) {
        std::sort(labels.begin(), labels.end());
        auto it = std::unique(labels.begin(), labels.end());
        if (it != labels.end()) throw std::invalid_argument("CoordSet: duplicate labels");
    }

    static CoordSet range(int n) {  // {1, 2, ..., n}
        std::vector<int> ls(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) ls[static_cast<std::size_t>(i)] = i + 1;
        CoordSet cs;
        cs.labels = std::move(ls);
        return cs;
    }

    std::size_t size() const { return labels.size(); }
    bool empty() const { return labels.empty(); }

    bool contains(int label) const {
        return std::binary_search(labels.begin(), labels.end(), label);
    }

    // position in canonical order, -1 if absent
    int position_of(int label) const {
        auto it = std::lower_bound(labels.begin(), labels.end(), label);
        if (it == labels.end() || *it != label) return -1;
        return static_cast<int>(it - labels.begin());
    }

    CoordSet without(int label) const {
        CoordSet out;
        out.labels.reserve(labels.size());
        for (int l : labels)
            if (l != label) out.labels.push_back(l);
        if (out.labels.size() == labels.size())
            throw std::invalid_argument("CoordSet::without: label not present");
        return out;
    }

    bool operator==(const CoordSet& o) const { return labels == o.labels; }
};

// remove bit p from a mask, shifting higher bits down
inline Mask drop_bit(Mask m, int p) {
    const Mask low = m & ((Mask{1} << p) - 1);
    const Mask high = (m >> (p + 1)) << p;
    return low | high;
}

// bitstring wire format: character at index p is the bit of the p-th
// canonical coordinate, most significant first
inline std::string mask_to_bitstring(Mask m, std::size_t width) {
    std::string s(width, '0');
    for (std::size_t p = 0; p < width; ++p)
        if (m >> p & 1u) s[p] = '1';
    return s;
}

inline Mask bitstring_to_mask(const std::string& s, std::size_t width) {
    if (s.size() != width) throw std::invalid_argument("bitstring width mismatch");
    Mask m = 0;
    for (std::size_t p = 0; p < width; ++p) {
        if (s[p] == '1')
            m |= Mask{1} << p;
        else if (s[p] != '0')
            throw std::invalid_argument("bitstring: invalid character");
    }
    return m;
}

}  // namespace udw
