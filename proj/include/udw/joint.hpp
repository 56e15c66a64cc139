#pragma once

// The hard input distribution, materialized exactly. An atom is a full
// assignment (owner W_i of every coordinate, activation bit A_i, the
// yes/no bit B, and the planted coordinate L). Atoms are equiprobable by
// construction, so every event probability is an exact count over the atom
// space, and the no-instance conditional (B = 0) is again uniform.
//
// The derived input x: player j holds coordinate i when W_i = j and
// A_i = 1; when B = 1 the column at L is overwritten to all-ones.

#include <cstdint>
#include <vector>

#include "udw/coords.hpp"
#include "udw/domain.hpp"
#include "udw/rational.hpp"
#include "udw/rng.hpp"

namespace udw {

constexpr std::uint64_t kDefaultAtomCap = std::uint64_t{1} << 24;

class JointTable {
public:
    JointTable(int n, int k, std::uint64_t atom_cap = kDefaultAtomCap) : n_(n), k_(k) {
        if (n < 1 || k < 2) throw std::invalid_argument("JointTable: need n >= 1, k >= 2");
        BigInt total = ipow(BigInt(k), static_cast<unsigned>(n)) *
                       ipow(BigInt(2), static_cast<unsigned>(n)) * 2 * n;
        if (total > atom_cap) throw cap_exceeded("JointTable: atom count exceeds cap");
        natoms_ = total.convert_to<std::uint64_t>();
        w_space_ = 1;
        for (int i = 0; i < n; ++i) w_space_ *= static_cast<std::uint64_t>(k);
        coords_ = CoordSet::range(n);
    }

    int n() const { return n_; }
    int k() const { return k_; }
    std::uint64_t natoms() const { return natoms_; }
    std::uint64_t q_atoms() const { return natoms_ / 2; }  // atoms with B = 0
    const CoordSet& coords() const { return coords_; }

    // atom index layout: ((w_index * 2^n + a_mask) * 2 + b) * n + (ell - 1)
    int ell_of(std::uint64_t idx) const { return static_cast<int>(idx % n_) + 1; }
    int b_of(std::uint64_t idx) const { return static_cast<int>((idx / n_) % 2); }
    Mask a_mask_of(std::uint64_t idx) const {
        return static_cast<Mask>((idx / (2 * static_cast<std::uint64_t>(n_))) %
                                 (std::uint64_t{1} << n_));
    }
    std::uint64_t w_index_of(std::uint64_t idx) const {
        return idx / (2 * static_cast<std::uint64_t>(n_)) >> n_;
    }

    // owner of coordinate i (1-based player), from the W digits base k
    int w_of(std::uint64_t idx, int i) const {
        std::uint64_t w = w_index_of(idx);
        for (int t = 1; t < i; ++t) w /= static_cast<std::uint64_t>(k_);
        return static_cast<int>(w % static_cast<std::uint64_t>(k_)) + 1;
    }

    // column of the derived input at coordinate i, as a k-bit value
    Mask column_of(std::uint64_t idx, int i) const {
        if (b_of(idx) == 1 && ell_of(idx) == i) return (Mask{1} << k_) - 1;
        if (!(a_mask_of(idx) >> (i - 1) & 1u)) return 0;
        return Mask{1} << (w_of(idx, i) - 1);
    }

    std::vector<Mask> player_masks(std::uint64_t idx) const {
        std::vector<Mask> bits(static_cast<std::size_t>(k_), 0);
        for (int i = 1; i <= n_; ++i) {
            Mask col = column_of(idx, i);
            for (int j = 0; j < k_; ++j)
                if (col >> j & 1u) bits[static_cast<std::size_t>(j)] |= Mask{1} << (i - 1);
        }
        return bits;
    }

    Instance instance_of(std::uint64_t idx) const {
        return Instance{k_, coords_, player_masks(idx)};
    }

    // exact probability of an event given by an atom predicate
    template <typename Pred>
    Rat probability(Pred&& pred, bool condition_b0 = false) const {
        std::uint64_t hits = 0, total = 0;
        for (std::uint64_t idx = 0; idx < natoms_; ++idx) {
            if (condition_b0 && b_of(idx) != 0) continue;
            ++total;
            if (pred(idx)) ++hits;
        }
        return Rat(hits, total);
    }

    struct Draw {
        Instance x;
        std::vector<int> w;
        Mask a_mask;
        int b;
        int ell;
        std::uint64_t atom;
    };

    Draw sample(Rng& rng) const {
        std::uint64_t idx = rng.below(natoms_);
        Draw d;
        d.atom = idx;
        d.x = instance_of(idx);
        d.w.resize(static_cast<std::size_t>(n_));
        for (int i = 1; i <= n_; ++i) d.w[static_cast<std::size_t>(i - 1)] = w_of(idx, i);
        d.a_mask = a_mask_of(idx);
        d.b = b_of(idx);
        d.ell = ell_of(idx);
        return d;
    }

private:
    int n_, k_;
    std::uint64_t natoms_;
    std::uint64_t w_space_;
    CoordSet coords_;
};

inline JointTable build_joint(int n, int k, std::uint64_t atom_cap = kDefaultAtomCap) {
    return JointTable(n, k, atom_cap);
}

}  // namespace udw
