#pragma once

// Shannon quantities over finite tables with integer weights. Group counts
// stay exact; the only floating-point step is the final log2. Keys pack
// variable values into 128 bits so that grouping is collision-free.

#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "udw/rational.hpp"

namespace udw {

struct Key128 {
    std::uint64_t hi = 0, lo = 0;
    int used = 0;

    void push(std::uint64_t value, int width) {
        if (width < 64 && value >> width)
            throw std::logic_error("Key128: value wider than declared");
        if (used + width > 128) throw std::logic_error("Key128: out of bits");
        if (used >= 64) {
            hi |= value << (used - 64);
        } else {
            lo |= value << used;
            if (used + width > 64) hi |= value >> (64 - used);
        }
        used += width;
    }

    bool operator==(const Key128& o) const { return hi == o.hi && lo == o.lo; }
};

struct Key128Hash {
    std::size_t operator()(const Key128& k) const {
        std::uint64_t h = k.lo * 0x9e3779b97f4a7c15ull;
        h ^= k.hi + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

// Accumulates H(T | G) from (g-key, joint-key, weight) rows.
class CondEntropyAcc {
public:
    void add(const Key128& g, const Key128& joint, std::uint64_t w) {
        if (w == 0) return;
        given_[g] += w;
        auto& cell = cells_[joint];
        cell.count += w;
        cell.given = g;
        total_ += w;
    }

    double value() const {
        if (total_ == 0) return 0.0;
        double h = 0.0;
        const double tw = static_cast<double>(total_);
        for (const auto& [joint, cell] : cells_) {
            const double c = static_cast<double>(cell.count);
            const double g = static_cast<double>(given_.at(cell.given));
            if (cell.count != given_.at(cell.given)) h += c / tw * std::log2(g / c);
        }
        return h;
    }

    std::uint64_t total_weight() const { return total_; }

private:
    struct Cell {
        std::uint64_t count = 0;
        Key128 given;
    };
    std::unordered_map<Key128, std::uint64_t, Key128Hash> given_;
    std::unordered_map<Key128, Cell, Key128Hash> cells_;
    std::uint64_t total_ = 0;
};

// A plain weighted table: one row per outcome, one column per variable.
struct DiscreteTable {
    std::vector<std::vector<std::uint32_t>> rows;
    std::vector<std::uint64_t> weights;

    static Key128 key_of(const std::vector<std::uint32_t>& row, const std::vector<int>& cols) {
        Key128 k;
        for (int c : cols) k.push(row[static_cast<std::size_t>(c)], 32);
        return k;
    }

    // H(target | given), in bits
    double entropy(const std::vector<int>& target, const std::vector<int>& given = {}) const {
        CondEntropyAcc acc;
        std::vector<int> joint = given;
        joint.insert(joint.end(), target.begin(), target.end());
        for (std::size_t r = 0; r < rows.size(); ++r)
            acc.add(key_of(rows[r], given), key_of(rows[r], joint), weights[r]);
        return acc.value();
    }

    // I(a : b | given), in bits
    double mutual_information(const std::vector<int>& a, const std::vector<int>& b,
                              const std::vector<int>& given = {}) const {
        std::vector<int> bg = given;
        bg.insert(bg.end(), b.begin(), b.end());
        return entropy(a, given) - entropy(a, bg);
    }
};

}  // namespace udw
