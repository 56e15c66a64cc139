#pragma once

// Information-theoretic side of the workbench: protocols attached to the
// exact hard distribution, the leaf random variable, information densities
// over coordinate sets, per-coordinate bias of leaf rectangles, and the
// convexity inequality used to propagate bias bounds through projections.
//
// Probabilities are exact atom counts; Shannon quantities convert to double
// at the final log2. The comparison tolerance for float identities is 1e-9.

#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "udw/entropy.hpp"
#include "udw/joint.hpp"
#include "udw/protocol.hpp"

namespace udw {

constexpr double kFloatTolerance = 1e-9;

enum class VarKind { Col, W, A, Bbit, Ell, Leaf };

struct Var {
    VarKind kind;
    int coord = 0;  // 1-based, used by Col / W / A
};

inline int bits_for(std::uint64_t max_value) {
    int b = 1;
    while ((std::uint64_t{1} << b) <= max_value) ++b;
    return b;
}

struct AttachedTable {
    const JointTable* jt = nullptr;
    const ProtocolTree* tree = nullptr;
    std::vector<std::int32_t> leaf_of;  // per atom
    Rat error;                          // protocol error under the full distribution

    int n() const { return jt->n(); }
    int k() const { return jt->k(); }
};

inline AttachedTable attach_protocol(const JointTable& jt, const ProtocolTree& tree) {
    if (tree.n() != jt.n() || tree.k != jt.k())
        throw std::invalid_argument("attach_protocol: dimension mismatch");
    AttachedTable at;
    at.jt = &jt;
    at.tree = &tree;
    at.leaf_of.resize(jt.natoms());
    std::uint64_t wrong = 0;
    for (std::uint64_t idx = 0; idx < jt.natoms(); ++idx) {
        auto [bit, leaf] = evaluate(tree, jt.player_masks(idx));
        at.leaf_of[idx] = leaf;
        if (bit != jt.b_of(idx)) ++wrong;
    }
    at.error = Rat(wrong, jt.natoms());
    return at;
}

inline Key128 atom_key(const AttachedTable& at, std::uint64_t idx,
                       const std::vector<Var>& vars) {
    const auto& jt = *at.jt;
    const int wb = bits_for(static_cast<std::uint64_t>(jt.k() - 1));
    const int lb = bits_for(static_cast<std::uint64_t>(jt.n() - 1));
    Key128 key;
    for (const Var& v : vars) {
        switch (v.kind) {
            case VarKind::Col: key.push(jt.column_of(idx, v.coord), jt.k()); break;
            case VarKind::W: key.push(static_cast<std::uint64_t>(jt.w_of(idx, v.coord) - 1), wb); break;
            case VarKind::A: key.push(jt.a_mask_of(idx) >> (v.coord - 1) & 1u, 1); break;
            case VarKind::Bbit: key.push(static_cast<std::uint64_t>(jt.b_of(idx)), 1); break;
            case VarKind::Ell: key.push(static_cast<std::uint64_t>(jt.ell_of(idx) - 1), lb); break;
            case VarKind::Leaf: key.push(static_cast<std::uint64_t>(at.leaf_of[idx]), 32); break;
        }
    }
    return key;
}

inline std::vector<Var> cols_over(const CoordSet& I) {
    std::vector<Var> vs;
    for (int c : I.labels) vs.push_back({VarKind::Col, c});
    return vs;
}

inline std::vector<Var> owners_over(const CoordSet& I) {
    std::vector<Var> vs;
    for (int c : I.labels) vs.push_back({VarKind::W, c});
    return vs;
}

inline std::vector<Var> concat(std::vector<Var> a, const std::vector<Var>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

// H(target | given) under the full distribution or the no-instance
// conditional
inline double entropy(const AttachedTable& at, const std::vector<Var>& target,
                      const std::vector<Var>& given = {}, bool no_instances_only = true) {
    CondEntropyAcc acc;
    const auto joint = concat(given, target);
    for (std::uint64_t idx = 0; idx < at.jt->natoms(); ++idx) {
        if (no_instances_only && at.jt->b_of(idx) != 0) continue;
        acc.add(atom_key(at, idx, given), atom_key(at, idx, joint), 1);
    }
    return acc.value();
}

inline double mutual_information(const AttachedTable& at, const std::vector<Var>& a,
                                 const std::vector<Var>& b, const std::vector<Var>& given = {},
                                 bool no_instances_only = true) {
    return entropy(at, a, given, no_instances_only) -
           entropy(at, a, concat(given, b), no_instances_only);
}

//--------------------------------------------------------------------------
// information density over a coordinate set

// an assignment of owners to the fixed coordinates
struct Restriction {
    CoordSet J;
    std::vector<int> owners;  // one player per coordinate of J, in label order
};

struct InfoDensity {
    CoordSet I;
    double value = 0.0;  // -I(cols_I, W_I : leaf | W_outside), <= 0 up to float noise
    // the same number along the two other computation routes
    double via_breakdown = 0.0;
    double via_per_restriction = 0.0;
    struct Entry {
        Restriction restriction;  // owner assignment outside I
        int leaf;
        Rat weight;               // joint probability of (restriction, leaf)
        double density;           // conditional-entropy gap for this pair
    };
    std::vector<Entry> breakdown;
};

inline double info_density_value(const AttachedTable& at, const CoordSet& I) {
    CoordSet outside;
    for (int c : at.jt->coords().labels)
        if (!I.contains(c)) outside.labels.push_back(c);
    auto qw = concat(cols_over(I), owners_over(I));
    return -mutual_information(at, qw, {{VarKind::Leaf, 0}}, owners_over(outside));
}

inline InfoDensity info_density(const AttachedTable& at, const CoordSet& I) {
    const auto& jt = *at.jt;
    CoordSet outside;
    for (int c : jt.coords().labels)
        if (!I.contains(c)) outside.labels.push_back(c);

    InfoDensity out;
    out.I = I;
    out.value = info_density_value(at, I);

    const auto rho_vars = owners_over(outside);
    const auto rho_leaf_vars = concat(rho_vars, {{VarKind::Leaf, 0}});
    const auto qw_vars = concat(cols_over(I), owners_over(I));

    struct Group {
        std::uint64_t total = 0;
        std::unordered_map<Key128, std::uint64_t, Key128Hash> cells;
        int leaf = -1;
        Key128 rho;
        std::vector<int> owners;
    };
    std::map<std::pair<std::uint64_t, std::uint64_t>, Group> by_rho, by_rho_leaf;

    std::uint64_t q_total = 0;
    for (std::uint64_t idx = 0; idx < jt.natoms(); ++idx) {
        if (jt.b_of(idx) != 0) continue;
        ++q_total;
        Key128 rho = atom_key(at, idx, rho_vars);
        Key128 rho_leaf = atom_key(at, idx, rho_leaf_vars);
        Key128 qw = atom_key(at, idx, qw_vars);
        auto& g1 = by_rho[{rho.hi, rho.lo}];
        g1.total++;
        g1.cells[qw]++;
        g1.rho = rho;
        auto& g2 = by_rho_leaf[{rho_leaf.hi, rho_leaf.lo}];
        g2.total++;
        g2.cells[qw]++;
        g2.leaf = at.leaf_of[idx];
        g2.rho = rho;
        if (g2.owners.empty())
            for (int c : outside.labels) g2.owners.push_back(jt.w_of(idx, c));
    }

    auto plain_entropy = [](const Group& g) {
        double h = 0.0;
        const double tw = static_cast<double>(g.total);
        for (const auto& [key, c] : g.cells)
            if (c != g.total) h += static_cast<double>(c) / tw * std::log2(tw / static_cast<double>(c));
        return h;
    };

    std::map<std::pair<std::uint64_t, std::uint64_t>, double> h_by_rho;
    for (const auto& [id, g] : by_rho) h_by_rho[id] = plain_entropy(g);

    double avg = 0.0;
    for (const auto& [id, g] : by_rho_leaf) {
        InfoDensity::Entry e;
        e.restriction = Restriction{outside, g.owners};
        e.leaf = g.leaf;
        e.weight = Rat(g.total, q_total);
        e.density = plain_entropy(g) - h_by_rho.at({g.rho.hi, g.rho.lo});
        avg += to_double(e.weight) * e.density;
        out.breakdown.push_back(std::move(e));
    }
    out.via_breakdown = avg;

    // third route: average over restrictions of the per-restriction mutual
    // information between (cols_I, W_I) and the leaf
    std::map<std::pair<std::uint64_t, std::uint64_t>, double> cond_by_rho;
    for (const auto& [lid, lg] : by_rho_leaf)
        cond_by_rho[{lg.rho.hi, lg.rho.lo}] +=
            static_cast<double>(lg.total) * plain_entropy(lg);
    double per_rho = 0.0;
    for (const auto& [id, g] : by_rho) {
        double cond = cond_by_rho.count(id) ? cond_by_rho.at(id) / static_cast<double>(g.total)
                                            : 0.0;
        per_rho += static_cast<double>(g.total) / static_cast<double>(q_total) *
                   (cond - plain_entropy(g));
    }
    out.via_per_restriction = per_rho;
    return out;
}

//--------------------------------------------------------------------------
// bias of leaf rectangles on a coordinate

struct BiasBreakdown {
    CoordSet I;
    int coord = 0;
    Rat gamma_overall;
    std::map<int, Rat> gamma_per_leaf;
    struct Term {
        int leaf;
        std::uint64_t yes_count;   // all-ones column at `coord` within the cell
        std::uint64_t cell_count;  // conditioning-event size within the atom space
        std::uint64_t q_weight;    // averaging weight (no-instance atoms)
        Rat gamma;
    };
    std::vector<Term> terms;
};

// gamma for coordinate i over unrestricted set I: the chance, within a leaf
// and conditioned on everything but coordinate i, that column i is the
// planted intersection. Atoms whose planted coordinate lies outside I are
// excluded from the conditioning, matching the restriction semantics.
inline BiasBreakdown bias(const AttachedTable& at, const CoordSet& I, int coord) {
    if (!I.contains(coord)) throw std::invalid_argument("bias: coordinate not in set");
    const auto& jt = *at.jt;
    CoordSet outside;
    for (int c : jt.coords().labels)
        if (!I.contains(c)) outside.labels.push_back(c);
    CoordSet match_set = I.without(coord);

    const auto key_vars =
        concat(concat({{VarKind::Leaf, 0}}, owners_over(outside)), cols_over(match_set));
    const Mask all_ones_col = (Mask{1} << jt.k()) - 1;

    struct Cell {
        std::uint64_t den = 0, num = 0, qw = 0;
        int leaf = -1;
    };
    std::map<std::pair<std::uint64_t, std::uint64_t>, Cell> cells;
    std::map<int, std::uint64_t> q_per_leaf;
    std::uint64_t q_total = 0;

    for (std::uint64_t idx = 0; idx < jt.natoms(); ++idx) {
        const bool is_yes = jt.b_of(idx) == 1;
        if (is_yes && outside.contains(jt.ell_of(idx))) continue;  // excluded event
        Key128 key = atom_key(at, idx, key_vars);
        auto& cell = cells[{key.hi, key.lo}];
        cell.leaf = at.leaf_of[idx];
        cell.den++;
        if (jt.column_of(idx, coord) == all_ones_col) cell.num++;
        if (!is_yes) {
            cell.qw++;
            q_per_leaf[cell.leaf]++;
            ++q_total;
        }
    }

    BiasBreakdown out;
    out.I = I;
    out.coord = coord;
    out.gamma_overall = 0;
    std::map<int, Rat> leaf_acc;
    for (const auto& [id, cell] : cells) {
        if (cell.qw == 0) continue;  // zero-mass conditioning event: contributes nothing
        Rat gamma(cell.num, cell.den);
        out.terms.push_back({cell.leaf, cell.num, cell.den, cell.qw, gamma});
        leaf_acc[cell.leaf] += Rat(cell.qw) * gamma;
        out.gamma_overall += Rat(cell.qw, q_total) * gamma;
    }
    for (auto& [leaf, acc] : leaf_acc)
        out.gamma_per_leaf[leaf] = acc / Rat(q_per_leaf.at(leaf));
    return out;
}

// coordinates whose overall bias stays below delta; only meaningful for
// protocols whose error is below the configured threshold
inline std::vector<int> good_set(const AttachedTable& at, const Rat& delta,
                                 const Rat& epsilon) {
    if (at.error > epsilon)
        throw std::invalid_argument("good_set: protocol error exceeds threshold");
    std::vector<int> J;
    for (int c : at.jt->coords().labels)
        if (bias(at, at.jt->coords(), c).gamma_overall <= delta) J.push_back(c);
    return J;
}

// a leaf is good for coordinate i when, conditioned on the planted
// coordinate being i, the planted mass inside the leaf stays below the
// threshold; returns the probability (leaf sampled through no instances)
// of landing in a good leaf
inline Rat good_rectangle_mass(const AttachedTable& at, int coord,
                               const Rat& threshold = Rat(1, 100)) {
    const auto& jt = *at.jt;
    std::map<int, std::pair<std::uint64_t, std::uint64_t>> planted;  // leaf -> (yes, all)
    std::map<int, std::uint64_t> q_mass;
    std::uint64_t q_total = 0;
    for (std::uint64_t idx = 0; idx < jt.natoms(); ++idx) {
        const int leaf = at.leaf_of[idx];
        if (jt.ell_of(idx) == coord) {
            auto& [yes, all] = planted[leaf];
            ++all;
            if (jt.b_of(idx) == 1) ++yes;
        }
        if (jt.b_of(idx) == 0) {
            ++q_mass[leaf];
            ++q_total;
        }
    }
    Rat good = 0;
    for (const auto& [leaf, w] : q_mass) {
        auto it = planted.find(leaf);
        const bool is_good = it == planted.end() || it->second.second == 0 ||
                             Rat(it->second.first, it->second.second) <= threshold;
        if (is_good) good += Rat(w, q_total);
    }
    return good;
}

//--------------------------------------------------------------------------
// projection increment and its entropy-gap lower bound

struct ProjectionIncrement {
    double delta_e = 0.0;      // density gain when coordinate i leaves the set
    double entropy_gap = 0.0;  // H(col_i | W_i) - H(col_i | leaf, cols rest, W)
};

inline ProjectionIncrement projection_increment(const AttachedTable& at, const CoordSet& I,
                                                int coord) {
    if (!I.contains(coord)) throw std::invalid_argument("projection_increment: bad coordinate");
    ProjectionIncrement out;
    out.delta_e = info_density_value(at, I.without(coord)) - info_density_value(at, I);

    const std::vector<Var> col_i{{VarKind::Col, coord}};
    const std::vector<Var> w_i{{VarKind::W, coord}};
    auto rest = concat(cols_over(I.without(coord)), owners_over(at.jt->coords()));
    auto given = concat(std::vector<Var>{{VarKind::Leaf, 0}}, rest);
    out.entropy_gap = entropy(at, col_i, w_i) - entropy(at, col_i, given);

    if (out.delta_e < out.entropy_gap - kFloatTolerance)
        throw falsification_error("projection increment fell below its entropy-gap bound");
    return out;
}

//--------------------------------------------------------------------------
// bias after a projection, computed two ways

struct BiasRoutes {
    Rat direct;    // definitionally, over the reduced set
    Rat via_mass;  // through the per-cell yes/no mass decomposition
    std::map<int, Rat> per_leaf_direct;
    std::map<int, Rat> per_leaf_via_mass;
    // per leaf: total yes-mass over total mass, the convexity upper bound
    std::map<int, Rat> leaf_yes_fraction;
};

inline BiasRoutes bias_after_projection(const AttachedTable& at, const CoordSet& I, int coord,
                                        int coord_prime) {
    if (coord == coord_prime) throw std::invalid_argument("bias_after_projection: i == i'");
    if (!I.contains(coord) || !I.contains(coord_prime))
        throw std::invalid_argument("bias_after_projection: coordinates not in set");

    const auto& jt = *at.jt;
    BiasRoutes out;
    BiasBreakdown direct = bias(at, I.without(coord), coord_prime);
    out.direct = direct.gamma_overall;
    out.per_leaf_direct = direct.gamma_per_leaf;

    // mass decomposition: cells are (leaf, owners outside I, owner of the
    // projected coordinate, columns elsewhere); within a cell, no-mass and
    // yes-at-coord_prime mass determine the cell bias
    CoordSet outside;
    for (int c : jt.coords().labels)
        if (!I.contains(c)) outside.labels.push_back(c);
    CoordSet match_set = I.without(coord).without(coord_prime);

    const auto key_vars = concat(
        concat(concat({{VarKind::Leaf, 0}}, owners_over(outside)), {{VarKind::W, coord}}),
        cols_over(match_set));

    struct Cell {
        std::uint64_t no_mass = 0, yes_mass = 0;
        int leaf = -1;
    };
    std::map<std::pair<std::uint64_t, std::uint64_t>, Cell> cells;
    std::map<int, std::uint64_t> q_per_leaf;
    std::uint64_t q_total = 0;

    for (std::uint64_t idx = 0; idx < jt.natoms(); ++idx) {
        const bool is_yes = jt.b_of(idx) == 1;
        if (is_yes && outside.contains(jt.ell_of(idx))) continue;
        if (is_yes && jt.ell_of(idx) != coord_prime) {
            // planted somewhere else in I: never part of a cell's two-way mass
            continue;
        }
        Key128 key = atom_key(at, idx, key_vars);
        auto& cell = cells[{key.hi, key.lo}];
        cell.leaf = at.leaf_of[idx];
        if (is_yes) {
            cell.yes_mass++;
        } else {
            cell.no_mass++;
            q_per_leaf[cell.leaf]++;
            ++q_total;
        }
    }

    std::map<int, Rat> leaf_acc, leaf_yes, leaf_all;
    out.via_mass = 0;
    for (const auto& [id, cell] : cells) {
        leaf_yes[cell.leaf] += Rat(cell.yes_mass);
        leaf_all[cell.leaf] += Rat(cell.yes_mass + cell.no_mass);
        if (cell.no_mass == 0) continue;  // zero weight in the average
        Rat gamma(cell.yes_mass, cell.yes_mass + cell.no_mass);
        leaf_acc[cell.leaf] += Rat(cell.no_mass) * gamma;
        out.via_mass += Rat(cell.no_mass, q_total) * gamma;
    }
    for (auto& [leaf, acc] : leaf_acc) {
        out.per_leaf_via_mass[leaf] = acc / Rat(q_per_leaf.at(leaf));
        if (leaf_all[leaf] > 0) out.leaf_yes_fraction[leaf] = leaf_yes[leaf] / leaf_all[leaf];
    }
    return out;
}

//--------------------------------------------------------------------------
// the convexity inequality, evaluated exactly

inline bool convexity_check(const std::vector<Rat>& xs, const std::vector<Rat>& ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("convexity_check: length mismatch");
    Rat sum_x = 0, sum_y = 0, lhs_sum = 0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
        if (xs[j] < 0 || ys[j] < 0)
            throw std::invalid_argument("convexity_check: negative entry");
        sum_x += xs[j];
        sum_y += ys[j];
        if (xs[j] + ys[j] == 0) continue;  // 0*0/0 term reads as 0
        lhs_sum += ys[j] * xs[j] / (xs[j] + ys[j]);
    }
    if (sum_y == 0) throw std::invalid_argument("convexity_check: ys sum to zero");
    // (1/sum_y) * lhs_sum <= sum_x / (sum_x + sum_y)
    return lhs_sum * (sum_x + sum_y) <= sum_x * sum_y;
}

//--------------------------------------------------------------------------
// total information cost of a protocol

struct InfoCost {
    double cost = 0.0;           // I(cols, W : leaf)
    double cost_given_w = 0.0;   // I(cols : leaf | W), reported for comparison
};

inline InfoCost info_cost(const AttachedTable& at) {
    const auto& coords = at.jt->coords();
    InfoCost out;
    auto qw = concat(cols_over(coords), owners_over(coords));
    out.cost = mutual_information(at, qw, {{VarKind::Leaf, 0}});
    out.cost_given_w =
        mutual_information(at, cols_over(coords), {{VarKind::Leaf, 0}}, owners_over(coords));
    return out;
}

}  // namespace udw
