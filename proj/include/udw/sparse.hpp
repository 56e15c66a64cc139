#pragma once

// Sparse unique-equality machinery for the two-party lower bound: block
// instances, the unique-disjointness reduction, squares (free coordinates,
// pattern set, fixed-coordinate splits), thickness, average degree, the
// pruning and projection subroutines, and the long-path walk down a
// communication tree with its exact density ledger.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "udw/coords.hpp"
#include "udw/domain.hpp"
#include "udw/protocol.hpp"
#include "udw/rational.hpp"
#include "udw/rng.hpp"

namespace udw {

using Symbol = std::uint16_t;
using Packed = std::uint64_t;

struct BlockAlphabet {
    int size = 2;

    explicit BlockAlphabet(int b) : size(b) {
        if (b < 2) throw std::invalid_argument("block alphabet needs at least two symbols");
    }
};

struct UEqualInstance {
    std::vector<Symbol> x, y;  // length s each
};

// No: blocks all differ. Yes(l): equality at exactly block l. Outside: more
// than one agreement.
inline InstanceClass classify_uequal(const UEqualInstance& inst) {
    if (inst.x.size() != inst.y.size())
        throw std::invalid_argument("classify_uequal: length mismatch");
    int agreements = 0, where = 0;
    for (std::size_t i = 0; i < inst.x.size(); ++i) {
        if (inst.x[i] == inst.y[i]) {
            ++agreements;
            where = static_cast<int>(i) + 1;
        }
    }
    if (agreements == 0) return {ClassTag::No, 0};
    if (agreements == 1) return {ClassTag::Yes, where};
    return {ClassTag::Outside, 0};
}

// the sets {(i, x_i)} and {(i, y_i)} over the universe [s] x B; block
// agreements become exactly the common elements
inline std::pair<std::vector<std::pair<int, Symbol>>, std::vector<std::pair<int, Symbol>>>
reduce_to_udisj(const UEqualInstance& inst) {
    std::vector<std::pair<int, Symbol>> xs, ys;
    for (std::size_t i = 0; i < inst.x.size(); ++i) {
        xs.emplace_back(static_cast<int>(i) + 1, inst.x[i]);
        ys.emplace_back(static_cast<int>(i) + 1, inst.y[i]);
    }
    return {xs, ys};
}

//--------------------------------------------------------------------------
// pattern sets over B^I with packed storage

struct PatternSet {
    CoordSet I;
    int b = 2;
    int sym_bits = 1;
    std::vector<Packed> members;  // sorted unique

    static int bits_needed(int b) {
        int bits = 1;
        while ((1 << bits) < b) ++bits;
        return bits;
    }

    static PatternSet empty_set(const CoordSet& I, int b) {
        PatternSet ps;
        ps.I = I;
        ps.b = BlockAlphabet(b).size;
        ps.sym_bits = bits_needed(b);
        if (static_cast<int>(I.size()) * ps.sym_bits > 60)
            throw cap_exceeded("pattern set: packed width exceeds 60 bits");
        return ps;
    }

    static PatternSet full(const CoordSet& I, int b) {
        PatternSet ps = empty_set(I, b);
        std::uint64_t count = 1;
        for (std::size_t i = 0; i < I.size(); ++i) {
            count *= static_cast<std::uint64_t>(b);
            if (count > (std::uint64_t{1} << 24)) throw cap_exceeded("pattern set: full B^I too large");
        }
        ps.members.reserve(count);
        std::vector<Symbol> cur(I.size(), 0);
        for (;;) {
            ps.members.push_back(ps.pack(cur));
            std::size_t p = 0;
            for (; p < cur.size(); ++p) {
                if (++cur[p] < ps.b) break;
                cur[p] = 0;
            }
            if (p == cur.size()) break;
        }
        std::sort(ps.members.begin(), ps.members.end());
        return ps;
    }

    Packed pack(const std::vector<Symbol>& syms) const {
        Packed z = 0;
        for (std::size_t p = 0; p < syms.size(); ++p)
            z |= static_cast<Packed>(syms[p]) << (p * static_cast<std::size_t>(sym_bits));
        return z;
    }

    Symbol symbol_at(Packed z, std::size_t p) const {
        return static_cast<Symbol>(z >> (p * static_cast<std::size_t>(sym_bits)) &
                                   ((Packed{1} << sym_bits) - 1));
    }

    Packed clear_symbol(Packed z, std::size_t p) const {
        return z & ~(((Packed{1} << sym_bits) - 1) << (p * static_cast<std::size_t>(sym_bits)));
    }

    Packed drop_symbol(Packed z, std::size_t p) const {
        const std::size_t shift = p * static_cast<std::size_t>(sym_bits);
        const Packed low = z & ((Packed{1} << shift) - 1);
        const Packed high = z >> (shift + static_cast<std::size_t>(sym_bits)) << shift;
        return low | high;
    }

    bool contains(Packed z) const {
        return std::binary_search(members.begin(), members.end(), z);
    }

    std::uint64_t size() const { return members.size(); }

    void finalize() {
        std::sort(members.begin(), members.end());
        members.erase(std::unique(members.begin(), members.end()), members.end());
    }
};

// projection of S onto I minus one coordinate
inline PatternSet drop(const PatternSet& s, int coord) {
    if (s.I.empty()) throw std::invalid_argument("drop: no coordinates left");
    const int p = s.I.position_of(coord);
    if (p < 0) throw std::invalid_argument("drop: coordinate not in set");
    PatternSet out = PatternSet::empty_set(s.I.without(coord), s.b);
    out.members.reserve(s.members.size());
    for (Packed z : s.members) out.members.push_back(s.drop_symbol(z, static_cast<std::size_t>(p)));
    out.finalize();
    return out;
}

// the best alpha with |S| >= alpha * |S_{-i}| for every coordinate; empty I
// means no constraint
inline std::optional<Rat> best_average_degree(const PatternSet& s) {
    if (s.members.empty()) return Rat(0);
    if (s.I.empty()) return std::nullopt;  // unconstrained
    std::optional<Rat> best;
    for (int c : s.I.labels) {
        Rat a(s.size(), drop(s, c).size());
        if (!best || a < *best) best = a;
    }
    return best;
}

inline bool avg_degree_ok(const PatternSet& s, const Rat& alpha) {
    if (s.members.empty()) return false;
    auto best = best_average_degree(s);
    return !best.has_value() || *best >= alpha;
}

inline bool is_thick(const PatternSet& s, int r) {
    if (s.members.empty()) return false;
    for (std::size_t p = 0; p < s.I.size(); ++p) {
        std::unordered_map<Packed, int> line_count;
        for (Packed z : s.members) ++line_count[s.clear_symbol(z, p)];
        for (const auto& [key, cnt] : line_count)
            if (cnt < r) return false;
    }
    return true;
}

// iterative pruning to the unique maximal r-thick subset (possibly empty)
inline PatternSet make_thick(const PatternSet& s, int r) {
    const std::size_t dims = s.I.size();
    if (dims == 0) return s;  // thickness is vacuous over no coordinates

    std::unordered_set<Packed> alive(s.members.begin(), s.members.end());
    std::vector<std::unordered_map<Packed, std::vector<Packed>>> lines(dims);
    std::vector<std::unordered_map<Packed, int>> count(dims);
    for (std::size_t p = 0; p < dims; ++p) {
        for (Packed z : s.members) {
            Packed key = s.clear_symbol(z, p);
            lines[p][key].push_back(z);
            ++count[p][key];
        }
    }

    std::vector<std::pair<std::size_t, Packed>> deficient;
    for (std::size_t p = 0; p < dims; ++p)
        for (const auto& [key, cnt] : count[p])
            if (cnt < r) deficient.emplace_back(p, key);

    while (!deficient.empty()) {
        auto [p, key] = deficient.back();
        deficient.pop_back();
        for (Packed z : lines[p][key]) {
            if (!alive.count(z)) continue;
            alive.erase(z);
            for (std::size_t q = 0; q < dims; ++q) {
                Packed qkey = s.clear_symbol(z, q);
                if (--count[q][qkey] < r) deficient.emplace_back(q, qkey);
            }
        }
    }

    PatternSet out = PatternSet::empty_set(s.I, s.b);
    for (Packed z : s.members)
        if (alive.count(z)) out.members.push_back(z);
    out.finalize();
    return out;
}

struct ThickenResult {
    PatternSet pruned;
    bool guarantee_applicable = false;  // entry avg degree >= r * s / delta
};

// prune to r-thick and, when the entry average degree supports it, verify
// the (1 - delta) retention bound exactly
inline ThickenResult make_thick_checked(const PatternSet& s, int r, const Rat& delta,
                                        int ambient_s) {
    ThickenResult res;
    res.pruned = make_thick(s, r);
    auto avg = best_average_degree(s);
    const Rat threshold = Rat(r) * Rat(ambient_s) / delta;
    res.guarantee_applicable =
        !s.members.empty() && (!avg.has_value() || *avg >= threshold);
    if (res.guarantee_applicable) {
        // |S'| >= (1 - delta) |S|, cross-multiplied
        Rat lhs(res.pruned.size());
        Rat rhs = (Rat(1) - delta) * Rat(s.size());
        if (lhs < rhs)
            throw falsification_error("thickness pruning kept fewer elements than guaranteed");
    }
    return res;
}

//--------------------------------------------------------------------------
// squares inside two-party rectangles over B^s x B^s

struct SparseRectangle {
    int s = 0;
    int b = 2;
    std::vector<Packed> X, Y;  // packed length-s strings, sorted unique

    static SparseRectangle full(int s, int b) {
        SparseRectangle r;
        r.s = s;
        r.b = b;
        PatternSet all = PatternSet::full(CoordSet::range(s), b);
        r.X = all.members;
        r.Y = all.members;
        return r;
    }
};

struct Square {
    CoordSet I;                            // free coordinates, labels in [s]
    PatternSet S;                          // patterns over I
    std::map<int, std::vector<Symbol>> A;  // fixed coordinate -> split set

    static Square initial(int s, int b) {
        Square q;
        q.I = CoordSet::range(s);
        q.S = PatternSet::full(q.I, b);
        return q;
    }
};

inline Rat square_density_ratio(const Square& q, int b) {
    return Rat(BigInt(q.S.size()), ipow(BigInt(b), static_cast<unsigned>(q.I.size())));
}

inline double square_density_log2(const Square& q, int b) {
    if (q.S.size() == 0) return -std::numeric_limits<double>::infinity();
    return log2_big(BigInt(q.S.size())) -
           static_cast<double>(q.I.size()) * std::log2(static_cast<double>(b));
}

namespace detail {

// patterns over q.I realizable on one side of the rectangle: project the
// side's strings that satisfy the fixed-coordinate constraints
inline std::unordered_set<Packed> realizable_patterns(const Square& q,
                                                      const std::vector<Packed>& side, int s,
                                                      int b, bool complement_splits) {
    const int sym_bits = PatternSet::bits_needed(b);
    std::vector<char> allowed(static_cast<std::size_t>(s * b), 1);
    for (int i = 1; i <= s; ++i) {
        if (q.I.contains(i)) continue;
        auto it = q.A.find(i);
        std::vector<char> in_a(static_cast<std::size_t>(b), 0);
        if (it != q.A.end())
            for (Symbol v : it->second) in_a[v] = 1;
        for (int v = 0; v < b; ++v) {
            bool ok = complement_splits ? !in_a[static_cast<std::size_t>(v)]
                                        : in_a[static_cast<std::size_t>(v)] != 0;
            allowed[static_cast<std::size_t>((i - 1) * b + v)] = ok ? 1 : 0;
        }
    }
    std::unordered_set<Packed> out;
    const Packed sym_mask = (Packed{1} << sym_bits) - 1;
    for (Packed full : side) {
        bool ok = true;
        for (int i = 1; i <= s && ok; ++i) {
            if (q.I.contains(i)) continue;
            Symbol v = static_cast<Symbol>(full >> ((i - 1) * sym_bits) & sym_mask);
            ok = allowed[static_cast<std::size_t>((i - 1) * b + v)] != 0;
        }
        if (!ok) continue;
        Packed z = 0;
        std::size_t p = 0;
        for (int i = 1; i <= s; ++i) {
            if (!q.I.contains(i)) continue;
            Symbol v = static_cast<Symbol>(full >> ((i - 1) * sym_bits) & sym_mask);
            z |= static_cast<Packed>(v) << (p * static_cast<std::size_t>(sym_bits));
            ++p;
        }
        out.insert(z);
    }
    return out;
}

}  // namespace detail

inline bool square_in_rectangle(const Square& q, const SparseRectangle& r) {
    auto xs = detail::realizable_patterns(q, r.X, r.s, r.b, false);
    auto ys = detail::realizable_patterns(q, r.Y, r.s, r.b, true);
    for (Packed z : q.S.members)
        if (!xs.count(z) || !ys.count(z)) return false;
    return true;
}

// keep I and the splits, filter the pattern set to what survives in the
// sub-rectangle
inline Square restrict_square(const Square& q, const SparseRectangle& r) {
    auto xs = detail::realizable_patterns(q, r.X, r.s, r.b, false);
    auto ys = detail::realizable_patterns(q, r.Y, r.s, r.b, true);
    Square out;
    out.I = q.I;
    out.A = q.A;
    out.S = PatternSet::empty_set(q.I, q.S.b);
    for (Packed z : q.S.members)
        if (xs.count(z) && ys.count(z)) out.S.members.push_back(z);
    out.S.finalize();
    return out;
}

//--------------------------------------------------------------------------
// coordinate dropping until the average degree clears 3 * alpha

struct DropTrace {
    CoordSet I_prime;
    PatternSet S_tilde;
    std::vector<int> dropped;  // coordinate labels in drop order
};

inline DropTrace find_I_prime(const CoordSet& I, const PatternSet& S, const Rat& alpha) {
    DropTrace out;
    out.I_prime = I;
    out.S_tilde = S;
    const Rat three_alpha = Rat(3) * alpha;
    for (;;) {
        int victim = 0;
        bool found = false;
        for (int c : out.I_prime.labels) {
            PatternSet proj = drop(out.S_tilde, c);
            if (Rat(out.S_tilde.size()) <= three_alpha * Rat(proj.size())) {
                victim = c;
                found = true;
                break;  // labels ascend, so this is the smallest eligible one
            }
        }
        if (!found) break;
        out.S_tilde = drop(out.S_tilde, victim);
        out.I_prime = out.I_prime.without(victim);
        out.dropped.push_back(victim);
    }
    return out;
}

//--------------------------------------------------------------------------
// randomized projection: drop coordinates, sample splits, re-realize

struct retries_exhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LiftResult {
    Square square;
    std::vector<int> dropped;
    int attempts = 0;
    bool in_lemma_regime = false;  // entry was thick with |S| > (3 alpha)^|I|
    bool used_exhaustive = false;
};

struct SparseParams {
    int r = 1;
    Rat alpha = 1;
    Rat delta = Rat(1, 2);
    int retry_budget = 100;
    std::uint64_t seed = 0;
    std::uint64_t pair_search_cap = std::uint64_t{1} << 24;
    std::uint64_t exhaustive_aset_cap = std::uint64_t{1} << 20;
    bool strict_properties = true;

    // r = 10 log n, alpha = sqrt(n), delta = 1/2 with n = s * b; the
    // asymptotic choices, usually overridden at desk scale
    static SparseParams paper_defaults(int s, int b, std::uint64_t seed = 0) {
        SparseParams p;
        const double n = static_cast<double>(s) * static_cast<double>(b);
        p.r = std::max(1, static_cast<int>(std::ceil(10.0 * std::log2(n))));
        p.alpha = Rat(static_cast<std::int64_t>(std::floor(std::sqrt(n))));
        p.delta = Rat(1, 2);
        p.seed = seed;
        return p;
    }

    bool applicable(int s) const { return Rat(r) <= delta * alpha / Rat(s); }

    void validate() const {
        if (r < 1 || alpha <= 0 || delta <= 0 || delta >= 1 || retry_budget < 1)
            throw std::invalid_argument("sparse params out of range");
    }
};

inline LiftResult lift_projection(const Square& q_tilde, const SparseRectangle& rect,
                                  const Rat& alpha, const SparseParams& params,
                                  Rng& rng) {
    LiftResult res;
    const Rat size_gate = rpow(Rat(3) * alpha, static_cast<int>(q_tilde.I.size()));
    res.in_lemma_regime =
        is_thick(q_tilde.S, params.r) && Rat(q_tilde.S.size()) > size_gate;

    DropTrace dt = find_I_prime(q_tilde.I, q_tilde.S, alpha);
    res.dropped = dt.dropped;
    if (dt.dropped.empty()) {
        res.square = q_tilde;
        return res;
    }

    // acceptance thresholds, exact
    const Rat size_floor = Rat(9, 10) *
                           rpow(Rat(3) * alpha,
                                static_cast<int>(dt.I_prime.size()) -
                                    static_cast<int>(q_tilde.I.size())) *
                           Rat(q_tilde.S.size());
    const Rat degree_floor = Rat(2) * alpha;

    auto attempt_with = [&](const std::map<int, std::vector<Symbol>>& new_splits,
                            Square& out) -> bool {
        Square cand;
        cand.I = dt.I_prime;
        cand.A = q_tilde.A;
        for (const auto& [c, split] : new_splits) cand.A[c] = split;
        cand.S = dt.S_tilde;  // upper bound; filter to realizable patterns
        auto xs = detail::realizable_patterns(cand, rect.X, rect.s, rect.b, false);
        auto ys = detail::realizable_patterns(cand, rect.Y, rect.s, rect.b, true);
        PatternSet filtered = PatternSet::empty_set(cand.I, cand.S.b);
        for (Packed z : cand.S.members)
            if (xs.count(z) && ys.count(z)) filtered.members.push_back(z);
        filtered.finalize();
        cand.S = std::move(filtered);
        if (Rat(cand.S.size()) < size_floor) return false;
        if (!avg_degree_ok(cand.S, degree_floor)) return false;
        out = std::move(cand);
        return true;
    };

    for (int attempt = 0; attempt < params.retry_budget; ++attempt) {
        ++res.attempts;
        std::map<int, std::vector<Symbol>> splits;
        for (int c : dt.dropped) {
            std::vector<Symbol> a;
            for (int v = 0; v < rect.b; ++v)
                if (rng.coin()) a.push_back(static_cast<Symbol>(v));
            splits[c] = std::move(a);
        }
        Square cand;
        if (attempt_with(splits, cand)) {
            res.square = std::move(cand);
            return res;
        }
    }

    // exhaustive fallback over all split combinations when small enough
    BigInt combos = ipow(ipow(BigInt(2), static_cast<unsigned>(rect.b)),
                         static_cast<unsigned>(dt.dropped.size()));
    if (combos <= params.exhaustive_aset_cap) {
        res.used_exhaustive = true;
        const std::uint64_t per = std::uint64_t{1} << rect.b;
        std::vector<std::uint64_t> choice(dt.dropped.size(), 0);
        for (;;) {
            std::map<int, std::vector<Symbol>> splits;
            for (std::size_t t = 0; t < dt.dropped.size(); ++t) {
                std::vector<Symbol> a;
                for (int v = 0; v < rect.b; ++v)
                    if (choice[t] >> v & 1u) a.push_back(static_cast<Symbol>(v));
                splits[dt.dropped[t]] = std::move(a);
            }
            Square cand;
            if (attempt_with(splits, cand)) {
                res.square = std::move(cand);
                return res;
            }
            std::size_t t = 0;
            for (; t < choice.size(); ++t) {
                if (++choice[t] < per) break;
                choice[t] = 0;
            }
            if (t == choice.size()) break;
        }
    }

    throw retries_exhausted(
        std::string("projection found no acceptable split after retries (") +
        (res.in_lemma_regime ? "inside" : "outside") + " the guaranteed regime)");
}

//--------------------------------------------------------------------------
// witnesses from patterns: realize equality patterns inside the rectangle

// pattern bit p set means the pair must agree at the p-th free coordinate
inline std::optional<std::pair<Packed, Packed>> full_range_witness(
    const PatternSet& s, Mask pattern, std::uint64_t pair_cap = std::uint64_t{1} << 24,
    Rng* sampler = nullptr, std::uint64_t samples = 200000) {
    if (s.members.empty()) return std::nullopt;
    auto matches = [&](Packed a, Packed b) {
        for (std::size_t p = 0; p < s.I.size(); ++p) {
            const bool agree = s.symbol_at(a, p) == s.symbol_at(b, p);
            if (agree != ((pattern >> p & 1u) != 0)) return false;
        }
        return true;
    };
    const std::uint64_t n = s.size();
    if (n * n <= pair_cap) {
        for (Packed a : s.members)
            for (Packed b : s.members)
                if (matches(a, b)) return std::make_pair(a, b);
        return std::nullopt;
    }
    if (!sampler) throw cap_exceeded("full_range_witness: pair space above cap");
    for (std::uint64_t t = 0; t < samples; ++t) {
        Packed a = s.members[sampler->below(n)];
        Packed b = s.members[sampler->below(n)];
        if (matches(a, b)) return std::make_pair(a, b);
    }
    return std::nullopt;
}

struct MonoCheckVerdict {
    bool found_no = false;
    bool found_yes = false;
    UEqualInstance no_pair, yes_pair;

    bool proves_not_monochromatic() const { return found_no && found_yes; }
};

namespace detail {

// an input on the given side realizing pattern z (free coords) under the
// square's splits
inline std::optional<Packed> realize_side(const Square& q, const std::vector<Packed>& side,
                                          int s, int b, Packed z, bool complement_splits) {
    const int sym_bits = PatternSet::bits_needed(b);
    const Packed sym_mask = (Packed{1} << sym_bits) - 1;
    for (Packed full : side) {
        bool ok = true;
        std::size_t p = 0;
        for (int i = 1; i <= s && ok; ++i) {
            Symbol v = static_cast<Symbol>(full >> ((i - 1) * sym_bits) & sym_mask);
            if (q.I.contains(i)) {
                ok = v == static_cast<Symbol>(z >> (p * static_cast<std::size_t>(sym_bits)) &
                                              sym_mask);
                ++p;
            } else {
                auto it = q.A.find(i);
                bool in_a = it != q.A.end() &&
                            std::binary_search(it->second.begin(), it->second.end(), v);
                ok = complement_splits ? !in_a : in_a;
            }
        }
        if (ok) return full;
    }
    return std::nullopt;
}

inline std::vector<Symbol> unpack_string(Packed z, int s, int b) {
    const int sym_bits = PatternSet::bits_needed(b);
    const Packed sym_mask = (Packed{1} << sym_bits) - 1;
    std::vector<Symbol> out(static_cast<std::size_t>(s));
    for (int i = 0; i < s; ++i)
        out[static_cast<std::size_t>(i)] =
            static_cast<Symbol>(z >> (i * sym_bits) & sym_mask);
    return out;
}

}  // namespace detail

// constructively exhibit a no pair and a yes pair inside the rectangle via
// the all-disagree pattern and a single-agreement pattern
inline MonoCheckVerdict mono_check_via_square(const SparseRectangle& rect, const Square& q,
                                              const SparseParams& params, Rng* sampler = nullptr) {
    if (q.I.empty()) throw std::invalid_argument("mono_check_via_square: no free coordinates");
    if (!is_thick(q.S, params.r))
        throw std::invalid_argument("mono_check_via_square: pattern set is not thick");

    MonoCheckVerdict verdict;
    auto realize_pair = [&](Packed za, Packed zb) -> std::optional<UEqualInstance> {
        auto x = detail::realize_side(q, rect.X, rect.s, rect.b, za, false);
        auto y = detail::realize_side(q, rect.Y, rect.s, rect.b, zb, true);
        if (!x || !y) return std::nullopt;
        return UEqualInstance{detail::unpack_string(*x, rect.s, rect.b),
                              detail::unpack_string(*y, rect.s, rect.b)};
    };

    if (auto w = full_range_witness(q.S, 0, params.pair_search_cap, sampler)) {
        if (auto pair = realize_pair(w->first, w->second)) {
            verdict.no_pair = *pair;
            verdict.found_no = classify_uequal(verdict.no_pair).tag == ClassTag::No;
        }
    }
    const Mask e1 = 1;  // agree exactly at the first free coordinate
    if (auto w = full_range_witness(q.S, e1, params.pair_search_cap, sampler)) {
        if (auto pair = realize_pair(w->first, w->second)) {
            verdict.yes_pair = *pair;
            verdict.found_yes = classify_uequal(verdict.yes_pair).tag == ClassTag::Yes;
        }
    }
    return verdict;
}

//--------------------------------------------------------------------------
// block instances as protocol inputs (requires a power-of-two alphabet so
// that packed strings and bit-vector inputs coincide)

inline bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

inline InstanceClass classify_packed_pair(Packed x, Packed y, int s, int sym_bits) {
    const Packed sym_mask = (Packed{1} << sym_bits) - 1;
    int agreements = 0, where = 0;
    for (int i = 0; i < s; ++i) {
        if ((x >> (i * sym_bits) & sym_mask) == (y >> (i * sym_bits) & sym_mask)) {
            ++agreements;
            where = i + 1;
        }
    }
    if (agreements == 0) return {ClassTag::No, 0};
    if (agreements == 1) return {ClassTag::Yes, where};
    return {ClassTag::Outside, 0};
}

// player 1 broadcasts all s*log2(b) bits of her block string, player 2
// announces the answer
inline ProtocolTree uequal_broadcast(int s, int b) {
    if (!is_power_of_two(b))
        throw std::invalid_argument("uequal_broadcast: alphabet size must be a power of two");
    const int w = PatternSet::bits_needed(b);
    const int nbits = s * w;
    if (nbits > 16) throw cap_exceeded("uequal_broadcast: tree would exceed 2^17 nodes");

    ProtocolTree t;
    t.k = 2;
    t.coords = CoordSet::range(nbits);
    const Mask all = (Mask{1} << nbits) - 1;

    auto new_leaf = [&](int output) {
        ProtocolNode lf;
        lf.is_leaf = true;
        lf.leaf_output = output;
        t.nodes.push_back(lf);
        return static_cast<int>(t.nodes.size() - 1);
    };

    Mask fixed = 0;
    auto build = [&](auto&& self, int p) -> int {
        if (p == nbits) {
            ProtocolNode answer;
            answer.speaker = 2;
            for (Mask y = 0; y <= all; ++y)
                if (classify_packed_pair(fixed, y, s, w).tag == ClassTag::Yes)
                    answer.one_set.push_back(y);
            t.nodes.push_back(answer);
            int id = static_cast<int>(t.nodes.size() - 1);
            t.nodes[static_cast<std::size_t>(id)].child0 = new_leaf(0);
            t.nodes[static_cast<std::size_t>(id)].child1 = new_leaf(1);
            return id;
        }
        ProtocolNode node;
        node.speaker = 1;
        for (Mask m = 0; m <= all; ++m)
            if (m >> p & 1u) node.one_set.push_back(m);
        t.nodes.push_back(node);
        int id = static_cast<int>(t.nodes.size() - 1);
        t.nodes[static_cast<std::size_t>(id)].child0 = self(self, p + 1);
        fixed |= Mask{1} << p;
        t.nodes[static_cast<std::size_t>(id)].child1 = self(self, p + 1);
        fixed &= ~(Mask{1} << p);
        return id;
    };

    build(build, 0);
    validate_tree(t, nbits + 1);
    return t;
}

struct RectPromiseScan {
    bool has_no = false;
    bool has_yes = false;
    bool monochromatic() const { return !(has_no && has_yes); }
};

inline RectPromiseScan scan_rectangle_promise(const SparseRectangle& rect) {
    const int w = PatternSet::bits_needed(rect.b);
    RectPromiseScan scan;
    for (Packed x : rect.X) {
        for (Packed y : rect.Y) {
            auto c = classify_packed_pair(x, y, rect.s, w);
            if (c.tag == ClassTag::No) scan.has_no = true;
            if (c.tag == ClassTag::Yes) scan.has_yes = true;
            if (scan.has_no && scan.has_yes) return scan;
        }
    }
    return scan;
}

//--------------------------------------------------------------------------
// the long-path walk with its exact density ledger

struct PathStep {
    int node_id = -1;
    int chosen_child = 0;
    std::uint64_t size_q = 0, size_qprime = 0, size_qtilde = 0, size_qnext = 0;
    Rat e_q, e_qprime, e_qtilde, e_qnext;  // exact |S| / b^|I| ratios
    std::size_t coords_before = 0, coords_after = 0;
    std::vector<int> dropped;
    std::map<int, std::vector<Symbol>> sampled_splits;
    bool p1 = false, p2 = false, p3 = false;
    bool loss_ok = false;  // 4 * |S_tilde| >= |S| exactly
    bool used_lift = false;
    bool lift_in_regime = false;
    int lift_attempts = 0;
};

struct PathTrace {
    int s = 0, b = 0;
    std::vector<PathStep> steps;
    int t_star = 0;
    int final_node = -1;
    bool final_monochromatic = false;
    bool reached_nonmono_leaf = false;  // the protocol errs on the promise
    bool final_I_empty = false;
    bool corollary_contradicted = false;  // thick square with free coords in a mono leaf
    std::uint64_t final_size = 0;
    int total_dropped = 0;
    double ledger_rhs = 0.0;  // sum z_t * (log2(b / (3 alpha)) - 2)
    bool ledger_applicable = false;
    bool ledger_ok = true;
};

inline PathTrace find_long_path(const ProtocolTree& tree, int s, int b,
                                const SparseParams& params) {
    if (!is_power_of_two(b))
        throw std::invalid_argument("find_long_path: alphabet size must be a power of two");
    const int w = PatternSet::bits_needed(b);
    if (tree.k != 2 || tree.n() != s * w)
        throw std::invalid_argument("find_long_path: tree shape does not match (s, b)");
    params.validate();
    if (!params.applicable(s))
        throw std::invalid_argument("find_long_path: params violate r <= delta * alpha / s");

    Rng rng(params.seed);
    PathTrace trace;
    trace.s = s;
    trace.b = b;

    SparseRectangle rect = SparseRectangle::full(s, b);
    Square q = Square::initial(s, b);
    int v = 0;

    auto density_of = [&](const Square& sq) { return square_density_ratio(sq, b); };

    for (;;) {
        RectPromiseScan scan = scan_rectangle_promise(rect);
        if (scan.monochromatic()) {
            trace.final_monochromatic = true;
            break;
        }
        const auto& node = tree.nodes[static_cast<std::size_t>(v)];
        if (node.is_leaf) {
            trace.reached_nonmono_leaf = true;  // can only happen if the tree errs
            break;
        }

        PathStep step;
        step.node_id = v;
        step.size_q = q.S.size();
        step.e_q = density_of(q);
        step.coords_before = q.I.size();

        SparseRectangle r0 = rect, r1 = rect;
        auto& side0 = node.speaker == 1 ? r0.X : r0.Y;
        auto& side1 = node.speaker == 1 ? r1.X : r1.Y;
        std::vector<Packed> keep0, keep1;
        for (Packed m : (node.speaker == 1 ? rect.X : rect.Y))
            (in_one_set(node, static_cast<Mask>(m)) ? keep1 : keep0).push_back(m);
        side0 = std::move(keep0);
        side1 = std::move(keep1);

        Square q0 = restrict_square(q, r0);
        Square q1 = restrict_square(q, r1);
        // denser child wins; ties go to child 0
        const bool go1 = q1.S.size() > q0.S.size();
        step.chosen_child = go1 ? 1 : 0;
        Square qprime = go1 ? std::move(q1) : std::move(q0);
        rect = go1 ? std::move(r1) : std::move(r0);
        v = go1 ? node.child1 : node.child0;

        step.size_qprime = qprime.S.size();
        step.e_qprime = density_of(qprime);
        step.p2 = avg_degree_ok(qprime.S, params.alpha);

        ThickenResult th = make_thick_checked(qprime.S, params.r, params.delta, s);
        Square qtilde;
        qtilde.I = qprime.I;
        qtilde.A = qprime.A;
        qtilde.S = std::move(th.pruned);
        step.size_qtilde = qtilde.S.size();
        step.e_qtilde = density_of(qtilde);
        step.p3 = is_thick(qtilde.S, params.r);  // false exactly when S emptied
        step.loss_ok = 4 * step.size_qtilde >= step.size_q;

        Square qnext;
        if (!avg_degree_ok(qtilde.S, Rat(2) * params.alpha) && !qtilde.I.empty() &&
            qtilde.S.size() > 0) {
            Rng attempt_rng = rng.fork(static_cast<std::uint64_t>(trace.steps.size()));
            LiftResult lift = lift_projection(qtilde, rect, params.alpha, params, attempt_rng);
            qnext = std::move(lift.square);
            step.used_lift = true;
            step.lift_in_regime = lift.in_lemma_regime;
            step.lift_attempts = lift.attempts;
            step.dropped = lift.dropped;
            for (int c : lift.dropped) step.sampled_splits[c] = qnext.A.at(c);
        } else {
            qnext = std::move(qtilde);
        }
        step.size_qnext = qnext.S.size();
        step.e_qnext = density_of(qnext);
        step.coords_after = qnext.I.size();
        step.p1 = avg_degree_ok(qnext.S, Rat(2) * params.alpha);
        trace.total_dropped += static_cast<int>(step.dropped.size());

        const bool ok = step.p1 && step.p2 && step.p3 && step.loss_ok;
        trace.steps.push_back(std::move(step));
        if (!ok && params.strict_properties)
            throw falsification_error("long-path property violated at step " +
                                      std::to_string(trace.steps.size() - 1));
        q = std::move(qnext);
    }

    trace.t_star = static_cast<int>(trace.steps.size());
    trace.final_node = v;
    trace.final_I_empty = q.I.empty();
    trace.final_size = q.S.size();

    // a thick square with free coordinates inside a monochromatic rectangle
    // would contradict the witness corollary; check constructively
    if (trace.final_monochromatic && !q.I.empty() && q.S.size() > 0) {
        PatternSet re_thick = make_thick(q.S, params.r);
        if (re_thick.size() > 0) {
            Square probe;
            probe.I = q.I;
            probe.A = q.A;
            probe.S = std::move(re_thick);
            Rng sampler = rng.fork(0xabcdef);
            MonoCheckVerdict verdict = mono_check_via_square(rect, probe, params, &sampler);
            if (verdict.proves_not_monochromatic()) {
                trace.corollary_contradicted = true;
                throw falsification_error(
                    "monochromatic termination with a thick free-coordinate square");
            }
        }
    }

    const double gain = log2_rat(Rat(b) / (Rat(3) * params.alpha)) - 2.0;
    trace.ledger_rhs = static_cast<double>(trace.total_dropped) * gain;
    trace.ledger_applicable = trace.ledger_rhs > 0.0;
    if (trace.ledger_applicable)
        trace.ledger_ok = 2.0 * static_cast<double>(trace.t_star) >= trace.ledger_rhs;
    if (!trace.ledger_ok && params.strict_properties)
        throw falsification_error("long-path ledger inequality violated");
    return trace;
}

}  // namespace udw
