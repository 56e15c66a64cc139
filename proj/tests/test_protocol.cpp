#include <catch2/catch_amalgamated.hpp>

#include "udw/json_io.hpp"
#include "udw/protocol.hpp"

using namespace udw;

namespace {

// single node splitting player 1 on its first bit
ProtocolTree depth_one_split(int n, int k) {
    ProtocolTree t;
    t.k = k;
    t.coords = CoordSet::range(n);
    ProtocolNode root;
    root.speaker = 1;
    for (Mask m = 0; m < (Mask{1} << n); ++m)
        if (m & 1u) root.one_set.push_back(m);
    root.child0 = 1;
    root.child1 = 2;
    t.nodes.push_back(root);
    ProtocolNode l0, l1;
    l0.is_leaf = l1.is_leaf = true;
    l0.leaf_output = 0;
    l1.leaf_output = 1;
    t.nodes.push_back(l0);
    t.nodes.push_back(l1);
    validate_tree(t);
    return t;
}

}  // namespace

TEST_CASE("evaluate walks the tree by explicit one-sets") {
    SECTION("constant tree answers at the root") {
        ProtocolTree t = constant_protocol(2, 2, 0);
        auto [bit, leaf] = evaluate(t, std::vector<Mask>{0b01, 0b10});
        CHECK(bit == 0);
        CHECK(leaf == 0);
    }
    SECTION("broadcast protocol computes the promise answer") {
        ProtocolTree t = broadcast_full(2, 2);
        CHECK(evaluate(t, std::vector<Mask>{0b01, 0b10}).first == 0);  // x1=10, x2=01
        ProtocolTree t1 = broadcast_full(1, 2);
        CHECK(evaluate(t1, std::vector<Mask>{1, 1}).first == 1);
    }
    SECTION("shape mismatches are rejected") {
        ProtocolTree t = broadcast_full(1, 2);
        CHECK_THROWS_AS(evaluate(t, std::vector<Mask>{1}), std::invalid_argument);
    }
}

TEST_CASE("leaf rectangles partition the product domain") {
    SECTION("constant tree has one full leaf") {
        auto leaves = leaf_rectangles(constant_protocol(2, 2, 0));
        REQUIRE(leaves.size() == 1);
        CHECK(leaves[0].rect.product_size() == 4 * 4);
        CHECK(leaves[0].depth == 0);
    }
    SECTION("a depth-one split fixes the speaker bit") {
        auto leaves = leaf_rectangles(depth_one_split(1, 2));
        REQUIRE(leaves.size() == 2);
        CHECK(leaves[0].rect.parts[0] == std::vector<Mask>{0});
        CHECK(leaves[1].rect.parts[0] == std::vector<Mask>{1});
        CHECK(leaves[0].rect.parts[1] == std::vector<Mask>{0, 1});
        CHECK(leaves[1].rect.parts[1] == std::vector<Mask>{0, 1});
    }
    SECTION("every input lands in the leaf that contains it") {
        ProtocolTree t = broadcast_full(2, 2);
        auto leaves = leaf_rectangles(t);
        std::map<int, const LeafRecord*> by_id;
        for (const auto& lf : leaves) by_id[lf.leaf_id] = &lf;
        for (Mask a = 0; a < 4; ++a)
            for (Mask b = 0; b < 4; ++b) {
                auto [bit, leaf] = evaluate(t, std::vector<Mask>{a, b});
                const LeafRecord* rec = by_id.at(leaf);
                CHECK(rec->output == bit);
                CHECK(std::binary_search(rec->rect.parts[0].begin(),
                                         rec->rect.parts[0].end(), a));
                CHECK(std::binary_search(rec->rect.parts[1].begin(),
                                         rec->rect.parts[1].end(), b));
            }
    }
}

TEST_CASE("protocol error under the hard distribution") {
    JointTable jt = build_joint(2, 2);
    CHECK(protocol_error(broadcast_full(2, 2), jt) == 0);
    CHECK(protocol_error(constant_protocol(2, 2, 0), jt) == Rat(1, 2));
    CHECK(protocol_error(constant_protocol(2, 2, 1), jt) == Rat(1, 2));
}

TEST_CASE("broadcast protocols are exact across the desk range") {
    for (int k : {2, 3})
        for (int n = 1; n <= (k == 2 ? 6 : 4); ++n) {
            JointTable jt = build_joint(n, k);
            CAPTURE(n, k);
            CHECK(protocol_error(broadcast_full(n, k), jt) == 0);
        }
}

TEST_CASE("builtin protocols") {
    SECTION("depth accounting") {
        auto leaves1 = leaf_rectangles(broadcast_full(1, 2));
        int depth = 0;
        for (const auto& lf : leaves1) depth = std::max(depth, lf.depth);
        CHECK(depth == 2);  // one broadcast bit plus the answer
        CHECK(leaf_rectangles(constant_protocol(3, 2, 0))[0].depth == 0);
    }
    SECTION("zero noise is the exact broadcast protocol") {
        JointTable jt = build_joint(2, 2);
        CHECK(protocol_error(noisy_protocol(2, 2, 0.0, 5), jt) == 0);
    }
    SECTION("noise flips a seeded fraction of leaves") {
        JointTable jt = build_joint(2, 2);
        Rat e1 = protocol_error(noisy_protocol(2, 2, 0.4, 5), jt);
        Rat e2 = protocol_error(noisy_protocol(2, 2, 0.4, 5), jt);
        CHECK(e1 > 0);
        CHECK(e1 == e2);  // same seed, same tree
    }
    SECTION("unknown names are rejected") {
        CHECK_THROWS_AS(builtin_protocol("nope", 2, 2), std::invalid_argument);
    }
}

TEST_CASE("deterministic lower-bound audit") {
    SECTION("broadcast at n=2") {
        JointTable jt = build_joint(2, 2);
        LbAuditReport rep = deterministic_lb_audit(broadcast_full(2, 2), jt);
        CHECK(rep.per_leaf_bound == 4);
        for (const auto& c : rep.zero_leaf_counts) CHECK(c <= 4);
        CHECK(Rat(rep.zero_leaves) >= rep.min_zero_leaves);
    }
    SECTION("broadcast at n=3 meets the depth bound") {
        JointTable jt = build_joint(3, 2);
        LbAuditReport rep = deterministic_lb_audit(broadcast_full(3, 2), jt);
        CHECK(rep.depth == 4);
        CHECK(rep.depth_lower_bound == Catch::Approx(3 * std::log2(1.5)));
        CHECK(static_cast<double>(rep.depth) >= rep.depth_lower_bound);
    }
    SECTION("inexact protocols are rejected") {
        JointTable jt = build_joint(1, 2);
        CHECK_THROWS_AS(deterministic_lb_audit(constant_protocol(1, 2, 0), jt),
                        std::invalid_argument);
    }
}

TEST_CASE("protocol trees validate their structure") {
    SECTION("speaker range") {
        ProtocolTree t = depth_one_split(1, 2);
        t.nodes[0].speaker = 5;
        CHECK_THROWS_AS(validate_tree(t), malformed_tree);
    }
    SECTION("one-set inputs must exist") {
        ProtocolTree t = depth_one_split(1, 2);
        t.nodes[0].one_set.push_back(4);  // n = 1, inputs are {0, 1}
        CHECK_THROWS_AS(validate_tree(t), malformed_tree);
    }
    SECTION("dag shapes are rejected") {
        ProtocolTree t = depth_one_split(1, 2);
        t.nodes[0].child1 = 1;  // both children point at the same leaf
        CHECK_THROWS_AS(validate_tree(t), malformed_tree);
    }
}

TEST_CASE("protocol json round trip") {
    ProtocolTree t = broadcast_full(2, 2);
    Json j = protocol_to_json(t);
    ProtocolTree back = protocol_from_json(j);
    REQUIRE(back.nodes.size() == t.nodes.size());
    JointTable jt = build_joint(2, 2);
    CHECK(protocol_error(back, jt) == 0);
    for (Mask a = 0; a < 4; ++a)
        for (Mask b = 0; b < 4; ++b)
            CHECK(evaluate(back, std::vector<Mask>{a, b}) ==
                  evaluate(t, std::vector<Mask>{a, b}));
}
