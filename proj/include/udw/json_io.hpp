#pragma once

// Wire formats. Bit-vector inputs serialize as bitstrings whose p-th
// character is the bit of the p-th canonical coordinate (most significant
// first); rationals serialize as reduced "num/den" strings.

#include <fstream>
#include <string>

#include <json.hpp>

#include "udw/domain.hpp"
#include "udw/protocol.hpp"

namespace udw {

using Json = nlohmann::ordered_json;

inline Json instance_to_json(const Instance& inst) {
    Json j;
    j["k"] = inst.k;
    j["coords"] = inst.coords.labels;
    Json bits = Json::array();
    for (Mask m : inst.bits) bits.push_back(mask_to_bitstring(m, inst.coords.size()));
    j["bits"] = bits;
    return j;
}

inline Instance instance_from_json(const Json& j) {
    Instance inst;
    inst.k = j.at("k").get<int>();
    inst.coords = CoordSet(j.at("coords").get<std::vector<int>>());
    for (const auto& s : j.at("bits"))
        inst.bits.push_back(bitstring_to_mask(s.get<std::string>(), inst.coords.size()));
    if (static_cast<int>(inst.bits.size()) != inst.k)
        throw std::invalid_argument("instance json: wrong number of bit-vectors");
    return inst;
}

inline Json rectangle_to_json(const Rectangle& r) {
    Json j;
    j["k"] = r.k;
    j["coords"] = r.coords.labels;
    Json parts = Json::array();
    for (const auto& part : r.parts) {
        Json ps = Json::array();
        for (Mask m : part) ps.push_back(mask_to_bitstring(m, r.coords.size()));
        parts.push_back(ps);
    }
    j["parts"] = parts;
    return j;
}

inline Rectangle rectangle_from_json(const Json& j) {
    Rectangle r;
    r.k = j.at("k").get<int>();
    r.coords = CoordSet(j.at("coords").get<std::vector<int>>());
    for (const auto& part : j.at("parts")) {
        std::vector<Mask> ms;
        for (const auto& s : part)
            ms.push_back(bitstring_to_mask(s.get<std::string>(), r.coords.size()));
        r.parts.push_back(std::move(ms));
    }
    if (static_cast<int>(r.parts.size()) != r.k)
        throw std::invalid_argument("rectangle json: wrong number of parts");
    normalize_parts(r);
    return r;
}

inline Json protocol_to_json(const ProtocolTree& t) {
    Json j;
    j["k"] = t.k;
    j["n"] = t.n();
    Json nodes = Json::array();
    for (const auto& node : t.nodes) {
        Json nj;
        if (node.is_leaf) {
            nj["leaf"] = node.leaf_output;
        } else {
            nj["speaker"] = node.speaker;
            Json os = Json::array();
            for (Mask m : node.one_set)
                os.push_back(mask_to_bitstring(m, static_cast<std::size_t>(t.n())));
            nj["one_set"] = os;
            nj["child0"] = node.child0;
            nj["child1"] = node.child1;
        }
        nodes.push_back(nj);
    }
    j["nodes"] = nodes;
    return j;
}

inline ProtocolTree protocol_from_json(const Json& j) {
    ProtocolTree t;
    t.k = j.at("k").get<int>();
    const int n = j.at("n").get<int>();
    t.coords = CoordSet::range(n);
    for (const auto& nj : j.at("nodes")) {
        ProtocolNode node;
        if (nj.contains("leaf")) {
            node.is_leaf = true;
            node.leaf_output = nj.at("leaf").get<int>();
        } else {
            node.speaker = nj.at("speaker").get<int>();
            for (const auto& s : nj.at("one_set"))
                node.one_set.push_back(
                    bitstring_to_mask(s.get<std::string>(), static_cast<std::size_t>(n)));
            node.child0 = nj.at("child0").get<int>();
            node.child1 = nj.at("child1").get<int>();
        }
        t.nodes.push_back(std::move(node));
    }
    validate_tree(t);
    return t;
}

inline Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    Json j;
    in >> j;
    return j;
}

inline void save_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << j.dump(2) << "\n";
}

}  // namespace udw
