#pragma once

// Deterministic multi-party protocol trees in the blackboard model: every
// spoken bit is visible to all players. A node's predicate is an explicit
// one-set (the speaker inputs that transmit 1), which keeps trees
// serializable and leaf rectangles exactly computable. Leaf rectangles
// partition the full product domain by construction; the partition check
// verifies the exact member count as a guard against malformed one-sets.

#include <cstdint>
#include <string>
#include <vector>

#include "udw/domain.hpp"
#include "udw/joint.hpp"
#include "udw/rng.hpp"

namespace udw {

constexpr int kDefaultDepthCap = 40;
constexpr std::uint64_t kDefaultLeafCap = std::uint64_t{1} << 20;

struct ProtocolNode {
    bool is_leaf = false;
    int leaf_output = 0;
    int speaker = 0;                // 1-based player
    std::vector<Mask> one_set;      // sorted unique speaker inputs transmitting 1
    std::vector<std::uint64_t> one_bitmap;
    int child0 = -1, child1 = -1;
};

struct ProtocolTree {
    int k = 0;
    CoordSet coords;
    std::vector<ProtocolNode> nodes;  // root at index 0

    int n() const { return static_cast<int>(coords.size()); }
};

inline void build_node_bitmap(ProtocolNode& node, int n) {
    node.one_bitmap.assign(((std::size_t{1} << n) + 63) / 64, 0);
    for (Mask m : node.one_set) node.one_bitmap[m >> 6] |= std::uint64_t{1} << (m & 63u);
}

inline bool in_one_set(const ProtocolNode& node, Mask m) {
    return node.one_bitmap[m >> 6] >> (m & 63u) & 1u;
}

struct malformed_tree : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void validate_tree(ProtocolTree& tree, int depth_cap = kDefaultDepthCap) {
    if (tree.nodes.empty()) throw malformed_tree("protocol tree has no nodes");
    const int n = tree.n();
    const Mask limit = n >= 32 ? ~Mask{0} : (Mask{1} << n);
    std::vector<int> depth(tree.nodes.size(), -1);
    depth[0] = 0;
    std::vector<int> stack{0};
    std::size_t seen = 0;
    while (!stack.empty()) {
        int id = stack.back();
        stack.pop_back();
        ++seen;
        auto& node = tree.nodes[static_cast<std::size_t>(id)];
        if (node.is_leaf) {
            if (node.leaf_output != 0 && node.leaf_output != 1)
                throw malformed_tree("leaf output must be 0 or 1");
            continue;
        }
        if (node.speaker < 1 || node.speaker > tree.k)
            throw malformed_tree("node speaker out of range");
        for (Mask m : node.one_set)
            if (m >= limit) throw malformed_tree("one-set references unknown inputs");
        std::sort(node.one_set.begin(), node.one_set.end());
        node.one_set.erase(std::unique(node.one_set.begin(), node.one_set.end()),
                           node.one_set.end());
        build_node_bitmap(node, n);
        for (int c : {node.child0, node.child1}) {
            if (c < 0 || c >= static_cast<int>(tree.nodes.size()))
                throw malformed_tree("child index out of range");
            if (depth[static_cast<std::size_t>(c)] != -1)
                throw malformed_tree("node reachable along two paths");
            depth[static_cast<std::size_t>(c)] = depth[static_cast<std::size_t>(id)] + 1;
            if (depth[static_cast<std::size_t>(c)] > depth_cap)
                throw cap_exceeded("protocol tree exceeds depth cap");
            stack.push_back(c);
        }
    }
    if (seen != tree.nodes.size()) throw malformed_tree("unreachable nodes in protocol tree");
}

// returns (output bit, leaf node id)
inline std::pair<int, int> evaluate(const ProtocolTree& tree, const std::vector<Mask>& bits) {
    if (static_cast<int>(bits.size()) != tree.k)
        throw std::invalid_argument("evaluate: player count mismatch");
    int id = 0;
    for (;;) {
        const auto& node = tree.nodes[static_cast<std::size_t>(id)];
        if (node.is_leaf) return {node.leaf_output, id};
        id = in_one_set(node, bits[static_cast<std::size_t>(node.speaker - 1)]) ? node.child1
                                                                                : node.child0;
    }
}

inline std::pair<int, int> evaluate(const ProtocolTree& tree, const Instance& inst) {
    if (!(inst.coords == tree.coords) || inst.k != tree.k)
        throw std::invalid_argument("evaluate: instance shape mismatch");
    return evaluate(tree, inst.bits);
}

struct LeafRecord {
    int leaf_id = -1;
    Rectangle rect;
    int output = 0;
    int depth = 0;
};

inline std::vector<LeafRecord> leaf_rectangles(const ProtocolTree& tree,
                                               std::uint64_t leaf_cap = kDefaultLeafCap,
                                               bool check_partition = true) {
    std::vector<LeafRecord> leaves;
    struct Frame {
        int id;
        int depth;
        Rectangle rect;
    };
    std::vector<Frame> stack;
    stack.push_back({0, 0, Rectangle::full(tree.k, tree.coords)});
    while (!stack.empty()) {
        Frame f = std::move(stack.back());
        stack.pop_back();
        const auto& node = tree.nodes[static_cast<std::size_t>(f.id)];
        if (node.is_leaf) {
            if (leaves.size() >= leaf_cap) throw cap_exceeded("leaf count exceeds cap");
            leaves.push_back({f.id, std::move(f.rect), node.leaf_output, f.depth});
            continue;
        }
        const auto spk = static_cast<std::size_t>(node.speaker - 1);
        Rectangle r0 = f.rect, r1 = std::move(f.rect);
        auto& s0 = r0.parts[spk];
        auto& s1 = r1.parts[spk];
        std::vector<Mask> keep0, keep1;
        for (Mask m : s0) (in_one_set(node, m) ? keep1 : keep0).push_back(m);
        s0 = std::move(keep0);
        s1 = std::move(keep1);
        stack.push_back({node.child1, f.depth + 1, std::move(r1)});
        stack.push_back({node.child0, f.depth + 1, std::move(r0)});
    }
    std::sort(leaves.begin(), leaves.end(),
              [](const LeafRecord& a, const LeafRecord& b) { return a.leaf_id < b.leaf_id; });
    if (check_partition) {
        BigInt covered = 0;
        for (const auto& lf : leaves) covered += lf.rect.product_size();
        BigInt expect = ipow(ipow(BigInt(2), static_cast<unsigned>(tree.n())),
                             static_cast<unsigned>(tree.k));
        if (covered != expect)
            throw malformed_tree("leaf rectangles do not cover the product domain");
    }
    return leaves;
}

// exact probability that the protocol answers differently from the promise
inline Rat protocol_error(const ProtocolTree& tree, const JointTable& jt) {
    if (tree.n() != jt.n() || tree.k != jt.k())
        throw std::invalid_argument("protocol_error: dimension mismatch");
    std::uint64_t wrong = 0;
    for (std::uint64_t idx = 0; idx < jt.natoms(); ++idx) {
        const int want = jt.b_of(idx);  // B = 1 exactly on yes instances
        if (evaluate(tree, jt.player_masks(idx)).first != want) ++wrong;
    }
    return Rat(wrong, jt.natoms());
}

//--------------------------------------------------------------------------
// builtin protocols

inline ProtocolTree constant_protocol(int n, int k, int output) {
    ProtocolTree t;
    t.k = k;
    t.coords = CoordSet::range(n);
    ProtocolNode leaf;
    leaf.is_leaf = true;
    leaf.leaf_output = output;
    t.nodes.push_back(leaf);
    validate_tree(t);
    return t;
}

// players 1..k-1 broadcast all their bits, then player k announces the
// answer for the now-determined prefix
inline ProtocolTree broadcast_full(int n, int k, int depth_cap = kDefaultDepthCap) {
    if (n * (k - 1) + 1 > depth_cap) throw cap_exceeded("broadcast_full exceeds depth cap");
    if (n * (k - 1) > 20) throw cap_exceeded("broadcast_full tree would exceed 2^21 nodes");
    ProtocolTree t;
    t.k = k;
    t.coords = CoordSet::range(n);

    const Mask all = (Mask{1} << n) - 1;
    std::vector<Mask> fixed(static_cast<std::size_t>(k - 1), 0);

    auto new_leaf = [&](int output) {
        ProtocolNode lf;
        lf.is_leaf = true;
        lf.leaf_output = output;
        t.nodes.push_back(lf);
        return static_cast<int>(t.nodes.size() - 1);
    };

    // recursion over (player j, bit position p); reserves the node slot
    // before descending so the root lands at index 0
    auto build = [&](auto&& self, int j, int p) -> int {
        if (j == k) {
            ProtocolNode answer;
            answer.speaker = k;
            std::vector<Mask> member(static_cast<std::size_t>(k));
            for (int jj = 0; jj < k - 1; ++jj)
                member[static_cast<std::size_t>(jj)] = fixed[static_cast<std::size_t>(jj)];
            for (Mask mk = 0; mk <= all; ++mk) {
                member[static_cast<std::size_t>(k - 1)] = mk;
                if (classify_member(t.coords, member).tag == ClassTag::Yes)
                    answer.one_set.push_back(mk);
            }
            t.nodes.push_back(answer);
            int id = static_cast<int>(t.nodes.size() - 1);
            t.nodes[static_cast<std::size_t>(id)].child0 = new_leaf(0);
            t.nodes[static_cast<std::size_t>(id)].child1 = new_leaf(1);
            return id;
        }
        const int nj = p + 1 == n ? j + 1 : j;
        const int np = p + 1 == n ? 0 : p + 1;
        ProtocolNode node;
        node.speaker = j;
        for (Mask m = 0; m <= all; ++m)
            if (m >> p & 1u) node.one_set.push_back(m);
        t.nodes.push_back(node);
        int id = static_cast<int>(t.nodes.size() - 1);
        t.nodes[static_cast<std::size_t>(id)].child0 = self(self, nj, np);
        fixed[static_cast<std::size_t>(j - 1)] |= Mask{1} << p;
        t.nodes[static_cast<std::size_t>(id)].child1 = self(self, nj, np);
        fixed[static_cast<std::size_t>(j - 1)] &= ~(Mask{1} << p);
        return id;
    };

    build(build, 1, 0);
    validate_tree(t, depth_cap);
    return t;
}

// broadcast_full with ceil(p * leaves) leaf outputs flipped, chosen by a
// seeded shuffle
inline ProtocolTree noisy_protocol(int n, int k, double p, std::uint64_t seed) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("noisy_protocol: p outside [0,1]");
    ProtocolTree t = broadcast_full(n, k);
    std::vector<int> leaf_ids;
    for (std::size_t i = 0; i < t.nodes.size(); ++i)
        if (t.nodes[i].is_leaf) leaf_ids.push_back(static_cast<int>(i));
    const auto flips =
        static_cast<std::size_t>(std::ceil(p * static_cast<double>(leaf_ids.size()) - 1e-12));
    Rng rng(seed);
    rng.shuffle(leaf_ids);
    for (std::size_t i = 0; i < flips && i < leaf_ids.size(); ++i) {
        auto& node = t.nodes[static_cast<std::size_t>(leaf_ids[i])];
        node.leaf_output ^= 1;
    }
    return t;
}

// name is one of: constant_0, constant_1, broadcast_full, noisy
inline ProtocolTree builtin_protocol(const std::string& name, int n, int k, double p = 0.0,
                                     std::uint64_t seed = 0) {
    if (name == "constant_0") return constant_protocol(n, k, 0);
    if (name == "constant_1") return constant_protocol(n, k, 1);
    if (name == "broadcast_full") return broadcast_full(n, k);
    if (name == "noisy") return noisy_protocol(n, k, p, seed);
    throw std::invalid_argument("unknown builtin protocol: " + name);
}

//--------------------------------------------------------------------------
// audit of the deterministic lower bound on an exact protocol

struct LbAuditReport {
    BigInt per_leaf_bound;          // k^n
    std::vector<BigInt> zero_leaf_counts;
    std::uint64_t zero_leaves = 0;
    Rat min_zero_leaves;            // ((k+1)/k)^n
    int depth = 0;                  // max bits spoken on any path
    double depth_lower_bound = 0.0; // n * log2(1 + 1/k)
};

inline LbAuditReport deterministic_lb_audit(const ProtocolTree& tree, const JointTable& jt,
                                            std::uint64_t leaf_cap = kDefaultLeafCap) {
    if (protocol_error(tree, jt) != 0)
        throw std::invalid_argument("deterministic_lb_audit: protocol must be exact");
    const int n = tree.n(), k = tree.k;
    LbAuditReport rep;
    rep.per_leaf_bound = ipow(BigInt(k), static_cast<unsigned>(n));
    rep.min_zero_leaves = rpow(Rat(k + 1, k), n);
    rep.depth_lower_bound = n * std::log2(1.0 + 1.0 / k);

    auto leaves = leaf_rectangles(tree, leaf_cap);
    for (const auto& lf : leaves) {
        rep.depth = std::max(rep.depth, lf.depth);
        if (lf.output != 0) continue;
        BigInt cnt = density(lf.rect).num;
        if (cnt > rep.per_leaf_bound)
            throw falsification_error("0-leaf holds more no-instances than the certified bound");
        rep.zero_leaf_counts.push_back(cnt);
        ++rep.zero_leaves;
    }
    if (Rat(rep.zero_leaves) < rep.min_zero_leaves)
        throw falsification_error("exact protocol has fewer 0-leaves than the bound allows");
    return rep;
}

}  // namespace udw
