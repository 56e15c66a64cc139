#pragma once

// Named experiment suites. Each experiment builds a Report whose canonical
// JSON is a pure function of (config, seed); hard assertion failures also
// surface as failed checks so that the process exit status reflects them.

#include <functional>
#include <set>
#include <string>

#include "udw/info.hpp"
#include "udw/json_io.hpp"
#include "udw/projection.hpp"
#include "udw/report.hpp"
#include "udw/sparse.hpp"

namespace udw {

struct ExperimentConfig {
    std::string experiment;
    int n = 2;
    int k = 2;
    int s = 2;
    int b = 32;
    int r = 2;
    Rat alpha = 8;
    Rat delta = Rat(1, 2);       // pruning slack (sparse) or bias threshold (info)
    Rat epsilon = Rat(1, 10000);
    Rat good_threshold = Rat(1, 100);
    std::uint64_t seed = 1;
    bool exhaustive = true;
    std::uint64_t samples = 1000;
    std::uint64_t trials = 0;  // 0 = experiment default
    std::string protocol = "broadcast_full";
    std::string out_path;
    bool csv = false;

    Json to_json() const {
        Json j;
        j["experiment"] = experiment;
        j["n"] = n;
        j["k"] = k;
        j["s"] = s;
        j["b"] = b;
        j["r"] = r;
        j["alpha"] = rat_to_string(alpha);
        j["delta"] = rat_to_string(delta);
        j["epsilon"] = rat_to_string(epsilon);
        j["good_threshold"] = rat_to_string(good_threshold);
        j["seed"] = seed;
        j["exhaustive"] = exhaustive;
        j["samples"] = samples;
        j["trials"] = trials;
        j["protocol"] = protocol;
        return j;
    }

    static ExperimentConfig from_json(const Json& j) {
        ExperimentConfig c;
        if (j.contains("experiment")) c.experiment = j.at("experiment").get<std::string>();
        if (j.contains("n")) c.n = j.at("n").get<int>();
        if (j.contains("k")) c.k = j.at("k").get<int>();
        if (j.contains("s")) c.s = j.at("s").get<int>();
        if (j.contains("b")) c.b = j.at("b").get<int>();
        if (j.contains("r")) c.r = j.at("r").get<int>();
        if (j.contains("alpha")) c.alpha = parse_rat(j.at("alpha").get<std::string>());
        if (j.contains("delta")) c.delta = parse_rat(j.at("delta").get<std::string>());
        if (j.contains("epsilon")) c.epsilon = parse_rat(j.at("epsilon").get<std::string>());
        if (j.contains("good_threshold"))
            c.good_threshold = parse_rat(j.at("good_threshold").get<std::string>());
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("exhaustive")) c.exhaustive = j.at("exhaustive").get<bool>();
        if (j.contains("samples")) c.samples = j.at("samples").get<std::uint64_t>();
        if (j.contains("trials")) c.trials = j.at("trials").get<std::uint64_t>();
        if (j.contains("protocol")) c.protocol = j.at("protocol").get<std::string>();
        return c;
    }
};

// presets pin the standing verification configurations
inline ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig c;
    if (name == "desk1") {
        c.experiment = "long-path";
        c.s = 2;
        c.b = 32;
        c.alpha = 8;
        c.r = 2;
        c.delta = Rat(1, 2);
        c.protocol = "uequal_broadcast";
        c.seed = 20240817;
        return c;
    }
    if (name == "desk2") {
        c.experiment = "sparse-lemmas";
        c.s = 2;
        c.b = 32;
        c.trials = 100;
        c.seed = 7;
        return c;
    }
    if (name == "desk3") {
        c.experiment = "info-lemmas";
        c.n = 4;
        c.k = 2;
        c.protocol = "broadcast_full";
        c.delta = Rat(1, 50);
        c.epsilon = Rat(1, 10000);
        c.seed = 11;
        return c;
    }
    throw std::invalid_argument("unknown preset: " + name);
}

// protocol spec strings: a builtin name, "noisy:<p>", or "@<json file>"
inline ProtocolTree load_protocol(const std::string& spec, int n, int k,
                                  std::uint64_t seed) {
    if (!spec.empty() && spec[0] == '@') return protocol_from_json(load_json_file(spec.substr(1)));
    auto colon = spec.find(':');
    if (colon != std::string::npos) {
        std::string name = spec.substr(0, colon);
        double p = std::stod(spec.substr(colon + 1));
        return builtin_protocol(name, n, k, p, seed);
    }
    return builtin_protocol(spec, n, k, 0.0, seed);
}

//--------------------------------------------------------------------------
// rectangle sweeps

// visit every rectangle over coords [n] with k players (each part an
// arbitrary subset of {0,1}^n)
inline void for_each_rectangle(int n, int k, const std::function<void(const Rectangle&)>& fn) {
    if (n > 3 || (n == 3 && k > 2) || k > 3)
        throw cap_exceeded("exhaustive rectangle sweep limited to small (n, k)");
    const std::uint64_t subsets = std::uint64_t{1} << (1 << n);
    CoordSet coords = CoordSet::range(n);
    std::vector<std::uint64_t> idx(static_cast<std::size_t>(k), 0);
    Rectangle r;
    r.k = k;
    r.coords = coords;
    r.parts.resize(static_cast<std::size_t>(k));
    for (;;) {
        for (int j = 0; j < k; ++j) {
            auto& part = r.parts[static_cast<std::size_t>(j)];
            part.clear();
            for (Mask v = 0; v < (Mask{1} << n); ++v)
                if (idx[static_cast<std::size_t>(j)] >> v & 1u) part.push_back(v);
        }
        fn(r);
        int j = k - 1;
        for (; j >= 0; --j) {
            if (++idx[static_cast<std::size_t>(j)] < subsets) break;
            idx[static_cast<std::size_t>(j)] = 0;
        }
        if (j < 0) return;
    }
}

inline Rectangle random_rectangle(int n, int k, Rng& rng) {
    Rectangle r;
    r.k = k;
    r.coords = CoordSet::range(n);
    r.parts.resize(static_cast<std::size_t>(k));
    for (auto& part : r.parts)
        for (Mask v = 0; v < (Mask{1} << n); ++v)
            if (rng.coin()) part.push_back(v);
    return r;
}

//--------------------------------------------------------------------------
// experiment: verify-projection (increment lemma + preservation + extensions)

inline Report run_verify_projection(const ExperimentConfig& cfg) {
    Report rep;
    rep.experiment = "verify-projection";
    rep.config = cfg.to_json();
    const int n = cfg.n, k = cfg.k;
    const Rat guaranteed(k + 1, k);

    std::uint64_t rects = 0, lemma_checks = 0, fact_checks = 0, ext_checks = 0;
    std::uint64_t lemma_violations = 0, fact_violations = 0, ext_violations = 0;

    auto inspect = [&](const Rectangle& r) {
        ++rects;
        DensityValue d = density(r);
        const bool mono = is_zero_monochromatic(r);
        for (int coord : r.coords.labels) {
            const bool misses_yes_at = !intersects_yes_at(r, coord);
            if (misses_yes_at && d.num > 0) {
                ++lemma_checks;
                ProjectionStep step = best_projection(r, coord);
                if (step.increment_ratio < guaranteed) ++lemma_violations;
                ExtensionProfile prof = extension_profile(r, coord);
                ++ext_checks;
                for (const auto& [key, ext] : prof.ext_sizes)
                    if (ext > k) ++ext_violations;
            }
            if (mono) {
                for (int j = 1; j <= k; ++j) {
                    ++fact_checks;
                    if (!check_monochromatic_preserved(r, coord, j)) ++fact_violations;
                }
            }
        }
    };

    if (cfg.exhaustive) {
        for_each_rectangle(n, k, inspect);
    } else {
        Rng rng(cfg.seed);
        for (std::uint64_t t = 0; t < cfg.samples; ++t) inspect(random_rectangle(n, k, rng));
    }

    Json stats;
    stats["rectangles"] = rects;
    stats["increment_checks"] = lemma_checks;
    stats["violations"] = lemma_violations;
    rep.check(lemma_violations == 0, "projection_increment_at_least_(k+1)/k", stats);

    Json fstats;
    fstats["preservation_checks"] = fact_checks;
    fstats["violations"] = fact_violations;
    rep.check(fact_violations == 0, "projection_preserves_0_monochromatic", fstats);

    Json estats;
    estats["profiles"] = ext_checks;
    estats["violations"] = ext_violations;
    rep.check(ext_violations == 0, "extension_sizes_at_most_k_without_yes_at_coord", estats);
    return rep;
}

//--------------------------------------------------------------------------
// experiment: theorem1 (certified count bound for 0-monochromatic rectangles)

inline Report run_theorem1(const ExperimentConfig& cfg) {
    Report rep;
    rep.experiment = "theorem1";
    rep.config = cfg.to_json();
    const int n = cfg.n, k = cfg.k;
    const BigInt bound = ipow(BigInt(k), static_cast<unsigned>(n));

    std::uint64_t rects = 0, mono_rects = 0, violations = 0, cascade_errors = 0;
    BoundCertificate extremal;
    Rectangle extremal_rect;
    auto inspect = [&](const Rectangle& r) {
        ++rects;
        if (!is_zero_monochromatic(r)) return;
        ++mono_rects;
        try {
            BoundCertificate cert = certify_density_bound(r);
            if (!cert.bound_certified || cert.actual_count > bound) ++violations;
            if (cert.actual_count > extremal.actual_count) {
                extremal = cert;
                extremal_rect = r;
            }
        } catch (const falsification_error&) {
            ++cascade_errors;
        }
    };

    if (cfg.exhaustive) {
        for_each_rectangle(n, k, inspect);
    } else {
        Rng rng(cfg.seed);
        for (std::uint64_t t = 0; t < cfg.samples; ++t) inspect(random_rectangle(n, k, rng));
    }

    Json stats;
    stats["rectangles"] = rects;
    stats["monochromatic"] = mono_rects;
    stats["count_bound"] = bound.str();
    stats["violations"] = violations;
    stats["cascade_errors"] = cascade_errors;
    rep.check(violations == 0 && cascade_errors == 0, "zero_monochromatic_count_bounded_by_k^n",
              stats);

    // JSON trace of the cascade on the fullest monochromatic rectangle seen
    if (mono_rects > 0 && extremal.bound_certified) {
        Json cert;
        cert["rectangle"] = rectangle_to_json(extremal_rect);
        cert["count"] = extremal.actual_count.str();
        cert["bound"] = extremal.certified_bound.str();
        Json steps = Json::array();
        for (const auto& st : extremal.steps) {
            Json sj;
            sj["coord"] = st.coord;
            sj["player"] = st.player;
            sj["before"] = rat_to_string(st.before.ratio());
            sj["after"] = rat_to_string(st.after.ratio());
            sj["increment"] = rat_to_string(st.increment_ratio);
            steps.push_back(sj);
        }
        cert["steps"] = steps;
        rep.note("extremal_certificate", cert);
    }
    return rep;
}

//--------------------------------------------------------------------------
// experiment: protocol-audit

inline Report run_protocol_audit(const ExperimentConfig& cfg) {
    Report rep;
    rep.experiment = "protocol-audit";
    rep.config = cfg.to_json();
    ProtocolTree tree = load_protocol(cfg.protocol, cfg.n, cfg.k, cfg.seed);
    JointTable jt = build_joint(tree.n(), tree.k);
    Rat err = protocol_error(tree, jt);
    rep.note("protocol_error", rat_json(err));
    if (err != 0) {
        rep.fail("audit_requires_exact_protocol", rat_json(err));
        return rep;
    }
    LbAuditReport audit = deterministic_lb_audit(tree, jt);
    Json stats;
    stats["zero_leaves"] = audit.zero_leaves;
    stats["per_leaf_bound"] = audit.per_leaf_bound.str();
    stats["min_zero_leaves"] = rat_json(audit.min_zero_leaves);
    stats["depth"] = audit.depth;
    stats["depth_lower_bound"] = audit.depth_lower_bound;
    bool leaves_ok = Rat(audit.zero_leaves) >= audit.min_zero_leaves;
    bool depth_ok = static_cast<double>(audit.depth) >= audit.depth_lower_bound - 1e-9;
    rep.check(leaves_ok, "zero_leaf_count_meets_bound", stats);
    rep.check(depth_ok, "depth_meets_lower_bound", stats);
    return rep;
}

//--------------------------------------------------------------------------
// experiment: convexity

inline Report run_convexity(const ExperimentConfig& cfg) {
    Report rep;
    rep.experiment = "convexity";
    rep.config = cfg.to_json();
    const std::uint64_t trials = cfg.trials ? cfg.trials : 100000;
    Rng rng(cfg.seed);
    std::uint64_t violations = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        const auto len = static_cast<std::size_t>(rng.in_range(1, 10));
        std::vector<Rat> xs(len), ys(len);
        Rat sum_y = 0;
        for (std::size_t i = 0; i < len; ++i) {
            xs[i] = Rat(rng.in_range(0, 100), rng.in_range(1, 100));
            ys[i] = Rat(rng.in_range(0, 100), rng.in_range(1, 100));
            sum_y += ys[i];
        }
        if (sum_y == 0) ys[0] = Rat(1, static_cast<std::int64_t>(rng.in_range(1, 100)));
        if (!convexity_check(xs, ys)) ++violations;
    }
    Json stats;
    stats["trials"] = trials;
    stats["violations"] = violations;
    rep.check(violations == 0, "convexity_inequality_exact", stats);
    return rep;
}

//--------------------------------------------------------------------------
// experiment: info-lemmas (entropy engine, exact masses, identities, bias)

inline Report run_info_lemmas(const ExperimentConfig& cfg) {
    Report rep;
    rep.experiment = "info-lemmas";
    rep.config = cfg.to_json();
    const int n = cfg.n, k = cfg.k;

    // entropy engine on seeded random tables
    {
        const std::uint64_t tables = cfg.trials ? cfg.trials : 1000;
        Rng rng(cfg.seed);
        std::uint64_t bad = 0;
        for (std::uint64_t t = 0; t < tables; ++t) {
            DiscreteTable tab;
            const auto na = static_cast<std::uint32_t>(rng.in_range(2, 8));
            const auto nb = static_cast<std::uint32_t>(rng.in_range(2, 8));
            bool any = false;
            for (std::uint32_t a = 0; a < na; ++a)
                for (std::uint32_t b2 = 0; b2 < nb; ++b2) {
                    auto w = static_cast<std::uint64_t>(rng.in_range(0, 100));
                    if (w == 0) continue;
                    tab.rows.push_back({a, b2});
                    tab.weights.push_back(w);
                    any = true;
                }
            if (!any) {
                tab.rows.push_back({0, 0});
                tab.weights.push_back(1);
            }
            const double hab = tab.entropy({0, 1});
            const double ha = tab.entropy({0});
            const double hb = tab.entropy({1});
            const double hb_a = tab.entropy({1}, {0});
            const double ha_b = tab.entropy({0}, {1});
            const double mi = tab.mutual_information({0}, {1});
            if (std::abs(hab - (ha + hb_a)) > kFloatTolerance) ++bad;
            if (std::abs(hab - (hb + ha_b)) > kFloatTolerance) ++bad;
            if (hb_a > hb + kFloatTolerance) ++bad;
            if (mi < -1e-12) ++bad;
        }
        Json stats;
        stats["tables"] = tables;
        stats["violations"] = bad;
        rep.check(bad == 0, "entropy_engine_chain_rule_and_conditioning", stats);
    }

    // exact masses of the hard distribution
    {
        JointTable jt = build_joint(n, k);
        bool ok = true;
        Json stats;
        Rat yes_mass = jt.probability([&](std::uint64_t idx) { return jt.b_of(idx) == 1; });
        stats["yes_mass"] = rat_json(yes_mass);
        ok = ok && yes_mass == Rat(1, 2);
        // classification agrees with the B bit atom by atom
        std::uint64_t class_mismatch = 0;
        for (std::uint64_t idx = 0; idx < jt.natoms(); ++idx) {
            auto c = classify(jt.instance_of(idx));
            const bool want_yes = jt.b_of(idx) == 1;
            if (want_yes != (c.tag == ClassTag::Yes)) ++class_mismatch;
            if (!want_yes && c.tag != ClassTag::No) ++class_mismatch;
            if (want_yes && c.tag == ClassTag::Yes && c.yes_coord != jt.ell_of(idx))
                ++class_mismatch;
        }
        stats["class_mismatches"] = class_mismatch;
        ok = ok && class_mismatch == 0;
        bool bit_ok = true;
        for (int i = 1; i <= n && bit_ok; ++i)
            for (int j = 1; j <= k && bit_ok; ++j) {
                Rat p = jt.probability(
                    [&](std::uint64_t idx) {
                        return (jt.column_of(idx, i) >> (j - 1) & 1u) != 0;
                    },
                    true);
                bit_ok = p == Rat(1, 2 * k);
            }
        stats["bit_mass_1_over_2k"] = bit_ok;
        ok = ok && bit_ok;
        rep.check(ok, "hard_distribution_exact_masses", stats);
    }

    // identities and bias for the configured protocol
    JointTable jt = build_joint(n, k);
    ProtocolTree tree = load_protocol(cfg.protocol, n, k, cfg.seed);
    AttachedTable at = attach_protocol(jt, tree);
    rep.note("protocol_error", rat_json(at.error));

    {
        InfoCost cost = info_cost(at);
        const double e_full = info_density_value(at, jt.coords());
        Json stats;
        stats["info_cost"] = cost.cost;
        stats["info_cost_given_w"] = cost.cost_given_w;
        stats["density_full_set"] = e_full;
        rep.check(std::abs(cost.cost + e_full) <= kFloatTolerance,
                  "info_cost_equals_minus_full_density", stats);

        // telescoping along two elimination orders
        bool ok = true;
        Json tstats;
        for (int order = 0; order < 2; ++order) {
            CoordSet I = jt.coords();
            std::vector<int> elim = I.labels;
            if (order == 1) std::reverse(elim.begin(), elim.end());
            double total = 0.0;
            bool chain_ok = true;
            for (int c : elim) {
                ProjectionIncrement inc = projection_increment(at, I, c);
                total += inc.delta_e;
                I = I.without(c);
                if (inc.delta_e < inc.entropy_gap - kFloatTolerance) chain_ok = false;
            }
            tstats[order == 0 ? "ascending_total" : "descending_total"] = total;
            ok = ok && chain_ok && std::abs(total - cost.cost) <= kFloatTolerance;
        }
        tstats["info_cost"] = cost.cost;
        rep.check(ok, "telescoping_and_entropy_gap_chain", tstats);

        // three computation routes of the density agree; value is <= 0
        bool dens_ok = true;
        InfoDensity dens = info_density(at, jt.coords());
        dens_ok = dens_ok && std::abs(dens.value - dens.via_breakdown) <= kFloatTolerance;
        dens_ok = dens_ok && std::abs(dens.value - dens.via_per_restriction) <= kFloatTolerance;
        dens_ok = dens_ok && dens.value <= kFloatTolerance;
        dens_ok = dens_ok && std::abs(info_density_value(at, CoordSet{})) <= kFloatTolerance;
        Json dstats;
        dstats["value"] = dens.value;
        dstats["via_breakdown"] = dens.via_breakdown;
        dstats["via_per_restriction"] = dens.via_per_restriction;
        rep.check(dens_ok, "density_definition_routes_agree", dstats);
    }

    {
        // bias suite: overall bias per coordinate, and the two routes for
        // the post-projection bias
        bool zero_ok = true;
        Json bstats;
        Json gammas = Json::array();
        for (int c : jt.coords().labels) {
            BiasBreakdown bb = bias(at, jt.coords(), c);
            gammas.push_back(rat_json(bb.gamma_overall));
            if (at.error == 0 && bb.gamma_overall != 0) zero_ok = false;
        }
        bstats["gamma_by_coord"] = gammas;
        if (at.error == 0)
            rep.check(zero_ok, "exact_protocol_has_zero_bias", bstats);
        else
            rep.note("bias_by_coord", bstats);

        if (n >= 2) {
            bool routes_ok = true;
            Json rstats = Json::array();
            for (int i : jt.coords().labels)
                for (int ip : jt.coords().labels) {
                    if (i == ip) continue;
                    BiasRoutes routes = bias_after_projection(at, jt.coords(), i, ip);
                    Json e;
                    e["i"] = i;
                    e["i_prime"] = ip;
                    e["direct"] = rat_json(routes.direct);
                    e["via_mass"] = rat_json(routes.via_mass);
                    rstats.push_back(e);
                    if (routes.direct != routes.via_mass) routes_ok = false;
                    // the convexity route bounds each per-leaf bias by the
                    // leaf's yes fraction
                    for (const auto& [leaf, g] : routes.per_leaf_via_mass) {
                        auto it = routes.leaf_yes_fraction.find(leaf);
                        if (it != routes.leaf_yes_fraction.end() && g > it->second)
                            routes_ok = false;
                    }
                }
            rep.check(routes_ok, "bias_routes_agree_exactly",
                      Json::object({{"pairs", rstats}}));
        }

        if (at.error <= cfg.epsilon) {
            auto J = good_set(at, cfg.delta, cfg.epsilon);
            Json gstats;
            gstats["good_set"] = J;
            rep.check(at.error != 0 || static_cast<int>(J.size()) == n,
                      "good_set_is_everything_for_exact_protocols", gstats);
        }

        // mass of leaves whose planted fraction stays under the
        // good-rectangle threshold, per coordinate (reported)
        Json gm = Json::array();
        for (int c : jt.coords().labels)
            gm.push_back(rat_json(good_rectangle_mass(at, c, cfg.good_threshold)));
        rep.note("good_rectangle_mass_by_coord",
                 Json::object({{"threshold", rat_to_string(cfg.good_threshold)},
                               {"mass", gm}}));
    }
    return rep;
}

//--------------------------------------------------------------------------
// experiment: info-cost

inline Report run_info_cost(const ExperimentConfig& cfg) {
    Report rep;
    rep.experiment = "info-cost";
    rep.config = cfg.to_json();
    JointTable jt = build_joint(cfg.n, cfg.k);
    ProtocolTree tree = load_protocol(cfg.protocol, cfg.n, cfg.k, cfg.seed);
    AttachedTable at = attach_protocol(jt, tree);
    InfoCost cost = info_cost(at);
    const double e_full = info_density_value(at, jt.coords());
    Json stats;
    stats["info_cost"] = cost.cost;
    stats["info_cost_given_w"] = cost.cost_given_w;
    stats["protocol_error"] = rat_json(at.error);
    rep.note("info_cost", stats);
    rep.check(std::abs(cost.cost + e_full) <= kFloatTolerance,
              "info_cost_equals_minus_full_density",
              Json::object({{"density_full_set", e_full}}));
    return rep;
}

//--------------------------------------------------------------------------
// experiment: reduction-check

inline Report run_reduction_check(const ExperimentConfig& cfg) {
    Report rep;
    rep.experiment = "reduction-check";
    rep.config = cfg.to_json();
    const int s = cfg.s, b = cfg.b;
    BigInt strings = ipow(BigInt(b), static_cast<unsigned>(s));
    if (strings * strings > (std::uint64_t{1} << 22))
        throw cap_exceeded("reduction-check: pair space too large for exhaustive mode");

    std::uint64_t pairs = 0, mismatches = 0;
    std::vector<Symbol> x(static_cast<std::size_t>(s), 0), y(static_cast<std::size_t>(s), 0);
    auto advance = [&](std::vector<Symbol>& v) {
        std::size_t p = 0;
        for (; p < v.size(); ++p) {
            if (++v[p] < b) break;
            v[p] = 0;
        }
        return p < v.size();
    };
    do {
        std::fill(y.begin(), y.end(), Symbol{0});
        do {
            ++pairs;
            UEqualInstance inst{x, y};
            InstanceClass direct = classify_uequal(inst);
            auto [xs, ys] = reduce_to_udisj(inst);
            std::set<std::pair<int, Symbol>> xset(xs.begin(), xs.end());
            int common = 0, where = 0;
            for (const auto& e : ys)
                if (xset.count(e)) {
                    ++common;
                    where = e.first;
                }
            InstanceClass via_sets;
            if (common == 0)
                via_sets = {ClassTag::No, 0};
            else if (common == 1)
                via_sets = {ClassTag::Yes, where};
            else
                via_sets = {ClassTag::Outside, 0};
            if (!(direct == via_sets)) ++mismatches;
            if (static_cast<int>(xs.size()) != s || static_cast<int>(ys.size()) != s)
                ++mismatches;
        } while (advance(y));
    } while (advance(x));

    Json stats;
    stats["pairs"] = pairs;
    stats["mismatches"] = mismatches;
    rep.check(mismatches == 0, "reduction_preserves_classification", stats);
    return rep;
}

//--------------------------------------------------------------------------
// experiment: sparse-lemmas

inline PatternSet random_pattern_set(const CoordSet& I, int b, Rng& rng, int density_pct) {
    PatternSet full = PatternSet::full(I, b);
    PatternSet out = PatternSet::empty_set(I, b);
    for (Packed z : full.members)
        if (rng.below(100) < static_cast<std::uint64_t>(density_pct)) out.members.push_back(z);
    if (out.members.empty()) out.members.push_back(full.members[rng.below(full.size())]);
    out.finalize();
    return out;
}

inline Report run_sparse_lemmas(const ExperimentConfig& cfg) {
    Report rep;
    rep.experiment = "sparse-lemmas";
    rep.config = cfg.to_json();
    const int s = cfg.s, b = cfg.b;
    const std::uint64_t trials = cfg.trials ? cfg.trials : 100;
    const Rat delta(1, 2);
    Rng rng(cfg.seed);

    std::uint64_t thick_violations = 0, retention_violations = 0, trans_violations = 0;
    std::uint64_t drop_violations = 0, lift_post_violations = 0;
    std::uint64_t lifts_run = 0, lift_failures_in_regime = 0, lift_failures_out_of_regime = 0;
    std::uint64_t range_probes = 0, range_hits = 0;

    const int alphas[] = {1, 2, 4, 8};
    const int rs[] = {1, 2, 3};

    for (std::uint64_t t = 0; t < trials; ++t) {
        const Rat alpha(alphas[rng.below(4)]);
        const int r = rs[rng.below(3)];
        const int density_pct = static_cast<int>(rng.in_range(5, 100));
        CoordSet I = CoordSet::range(s);
        PatternSet S = random_pattern_set(I, b, rng, density_pct);

        // pruning: result must be r-thick or empty; the retention bound is
        // enforced inside make_thick_checked whenever it applies
        try {
            ThickenResult th = make_thick_checked(S, r, delta, s);
            if (th.pruned.size() > 0 && !is_thick(th.pruned, r)) ++thick_violations;
        } catch (const falsification_error&) {
            ++retention_violations;
        }

        // degree transfer to subsets
        if (S.size() > 1) {
            PatternSet sub = PatternSet::empty_set(I, b);
            for (Packed z : S.members)
                if (rng.coin()) sub.members.push_back(z);
            if (sub.members.empty()) sub.members.push_back(S.members[0]);
            sub.finalize();
            auto base = best_average_degree(S);
            if (base && *base > 0) {
                Rat beta(sub.size(), S.size());
                if (!avg_degree_ok(sub, *base * beta)) ++trans_violations;
            }
        }

        // coordinate dropping postconditions, exact
        {
            DropTrace dt = find_I_prime(I, S, alpha);
            const Rat three_alpha = Rat(3) * alpha;
            for (int c : dt.I_prime.labels) {
                PatternSet proj = drop(dt.S_tilde, c);
                if (!(Rat(dt.S_tilde.size()) > three_alpha * Rat(proj.size())))
                    ++drop_violations;
            }
            Rat floor_size = rpow(three_alpha, static_cast<int>(dt.I_prime.size()) -
                                                   static_cast<int>(I.size())) *
                             Rat(S.size());
            if (Rat(dt.S_tilde.size()) < floor_size) ++drop_violations;
            if (Rat(S.size()) > rpow(three_alpha, static_cast<int>(I.size())) &&
                dt.I_prime.empty())
                ++drop_violations;
        }

        // projection inside a random rectangle
        {
            SparseRectangle rect = SparseRectangle::full(s, b);
            auto thin_side = [&](std::vector<Packed>& side) {
                std::vector<Packed> kept;
                for (Packed z : side)
                    if (rng.below(100) < 70) kept.push_back(z);
                if (kept.empty()) kept.push_back(side[0]);
                side = std::move(kept);
            };
            thin_side(rect.X);
            thin_side(rect.Y);
            Square q0 = Square::initial(s, b);
            Square inside = restrict_square(q0, rect);
            SparseParams params;
            params.r = r;
            params.alpha = alpha;
            params.delta = delta;
            params.seed = cfg.seed + t;
            ThickenResult th = make_thick_checked(inside.S, r, delta, s);
            Square qt;
            qt.I = inside.I;
            qt.A = inside.A;
            qt.S = th.pruned;
            if (qt.S.size() > 0 && !avg_degree_ok(qt.S, Rat(2) * alpha)) {
                ++lifts_run;
                Rng lift_rng(params.seed);
                try {
                    LiftResult lift = lift_projection(qt, rect, alpha, params, lift_rng);
                    if (!lift.dropped.empty()) {
                        Rat floor_size =
                            Rat(9, 10) *
                            rpow(Rat(3) * alpha, static_cast<int>(lift.square.I.size()) -
                                                     static_cast<int>(qt.I.size())) *
                            Rat(qt.S.size());
                        if (Rat(lift.square.S.size()) < floor_size) ++lift_post_violations;
                        if (!avg_degree_ok(lift.square.S, Rat(2) * alpha))
                            ++lift_post_violations;
                        if (!square_in_rectangle(lift.square, rect)) ++lift_post_violations;
                    }
                } catch (const retries_exhausted& e) {
                    if (std::string(e.what()).find("inside") != std::string::npos)
                        ++lift_failures_in_regime;
                    else
                        ++lift_failures_out_of_regime;
                }
            }
        }

        // full-range witness probe on a thick set (reported, not asserted)
        if (t % 10 == 0) {
            PatternSet thick = make_thick(S, r);
            if (thick.size() > 1 && thick.size() * thick.size() <= (std::uint64_t{1} << 20)) {
                for (Mask pattern = 0; pattern < (Mask{1} << s); ++pattern) {
                    ++range_probes;
                    if (full_range_witness(thick, pattern, std::uint64_t{1} << 20)) ++range_hits;
                }
            }
        }
    }

    Json stats;
    stats["trials"] = trials;
    stats["thick_violations"] = thick_violations;
    stats["retention_violations"] = retention_violations;
    rep.check(thick_violations == 0 && retention_violations == 0,
              "pruning_thick_or_empty_with_retention_bound", stats);
    rep.check(trans_violations == 0, "average_degree_transfers_to_subsets",
              Json::object({{"violations", trans_violations}}));
    rep.check(drop_violations == 0, "coordinate_drop_postconditions",
              Json::object({{"violations", drop_violations}}));
    Json lstats;
    lstats["lifts_run"] = lifts_run;
    lstats["postcondition_violations"] = lift_post_violations;
    lstats["failures_in_regime"] = lift_failures_in_regime;
    lstats["failures_out_of_regime"] = lift_failures_out_of_regime;
    rep.check(lift_post_violations == 0 && lift_failures_in_regime == 0,
              "projection_postconditions", lstats);
    Json rstats;
    rstats["probes"] = range_probes;
    rstats["hits"] = range_hits;
    rep.note("full_range_witness_rate", rstats);
    return rep;
}

//--------------------------------------------------------------------------
// experiment: long-path, with an independent replay of the whole ledger

namespace audit {

// quadratic-scan thickness pruning, independent of the indexed version
inline std::vector<Packed> naive_thick(const PatternSet& ps, int r) {
    std::vector<Packed> cur = ps.members;
    if (ps.I.empty()) return cur;
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<Packed> next;
        for (Packed z : cur) {
            bool ok = true;
            for (std::size_t p = 0; p < ps.I.size() && ok; ++p) {
                int deg = 0;
                for (Packed w : cur)
                    if (ps.clear_symbol(w, p) == ps.clear_symbol(z, p)) ++deg;
                ok = deg >= r;
            }
            if (ok)
                next.push_back(z);
            else
                changed = true;
        }
        cur = std::move(next);
    }
    return cur;
}

// realizability by direct per-pattern scan of the rectangle sides
inline std::vector<Packed> naive_restrict(const Square& q, const SparseRectangle& rect,
                                          const std::vector<Packed>& candidates) {
    std::vector<Packed> out;
    for (Packed z : candidates) {
        auto x = detail::realize_side(q, rect.X, rect.s, rect.b, z, false);
        auto y = detail::realize_side(q, rect.Y, rect.s, rect.b, z, true);
        if (x && y) out.push_back(z);
    }
    return out;
}

}  // namespace audit

inline Report run_long_path(const ExperimentConfig& cfg) {
    Report rep;
    rep.experiment = "long-path";
    rep.config = cfg.to_json();
    const int s = cfg.s, b = cfg.b;
    SparseParams params;
    params.r = cfg.r;
    params.alpha = cfg.alpha;
    params.delta = cfg.delta;
    params.seed = cfg.seed;
    rep.note("applicability_r_le_delta_alpha_over_s",
             Json::object({{"holds", params.applicable(s)}}));

    ProtocolTree tree = cfg.protocol == "uequal_broadcast"
                            ? uequal_broadcast(s, b)
                            : load_protocol(cfg.protocol, s * PatternSet::bits_needed(b), 2,
                                            cfg.seed);

    PathTrace trace;
    try {
        trace = find_long_path(tree, s, b, params);
    } catch (const falsification_error& e) {
        rep.fail("long_path_property_violation", Json::object({{"what", e.what()}}));
        return rep;
    }

    Json summary;
    summary["t_star"] = trace.t_star;
    summary["final_node"] = trace.final_node;
    summary["final_I_empty"] = trace.final_I_empty;
    summary["total_dropped"] = trace.total_dropped;
    summary["ledger_rhs"] = trace.ledger_rhs;
    summary["ledger_applicable"] = trace.ledger_applicable;
    rep.note("walk_summary", summary);

    bool flags_ok = true, loss_ok = true;
    Json steps = Json::array();
    for (const auto& st : trace.steps) {
        Json sj;
        sj["node"] = st.node_id;
        sj["child"] = st.chosen_child;
        sj["size_q"] = st.size_q;
        sj["size_qprime"] = st.size_qprime;
        sj["size_qtilde"] = st.size_qtilde;
        sj["size_qnext"] = st.size_qnext;
        sj["e_q"] = rat_to_string(st.e_q);
        sj["e_qnext"] = rat_to_string(st.e_qnext);
        sj["dropped"] = st.dropped;
        sj["p1"] = st.p1;
        sj["p2"] = st.p2;
        sj["p3"] = st.p3;
        steps.push_back(sj);
        flags_ok = flags_ok && st.p1 && st.p2 && st.p3;
        loss_ok = loss_ok && st.loss_ok;
    }
    rep.note("steps", steps);
    rep.check(trace.final_monochromatic, "terminates_at_monochromatic_rectangle");
    rep.check(flags_ok, "walk_properties_hold_at_every_step");
    rep.check(loss_ok, "per_step_loss_ratio_at_least_one_quarter");
    rep.check(trace.final_I_empty || !trace.corollary_contradicted,
              "termination_consistent_with_witness_corollary",
              Json::object({{"final_I_empty", trace.final_I_empty}}));
    rep.check(!trace.ledger_applicable || trace.ledger_ok, "ledger_inequality",
              Json::object({{"rhs", trace.ledger_rhs}, {"t_star", trace.t_star}}));

    // independent replay: recompute every recorded size and density from
    // scratch with the naive routines
    {
        bool replay_ok = true;
        SparseRectangle rect = SparseRectangle::full(s, b);
        Square q = Square::initial(s, b);
        int v = 0;
        for (const auto& st : trace.steps) {
            if (st.node_id != v) replay_ok = false;
            const auto& node = tree.nodes[static_cast<std::size_t>(v)];
            if (node.is_leaf) {
                replay_ok = false;
                break;
            }
            if (q.S.size() != st.size_q ||
                square_density_ratio(q, b) != st.e_q)
                replay_ok = false;

            SparseRectangle chosen = rect;
            auto& side = node.speaker == 1 ? chosen.X : chosen.Y;
            std::vector<Packed> kept;
            for (Packed m : side) {
                const bool one = in_one_set(node, static_cast<Mask>(m));
                if ((st.chosen_child == 1) == one) kept.push_back(m);
            }
            side = std::move(kept);
            v = st.chosen_child == 1 ? node.child1 : node.child0;

            std::vector<Packed> sprime = audit::naive_restrict(q, chosen, q.S.members);
            if (sprime.size() != st.size_qprime) replay_ok = false;
            PatternSet sp = PatternSet::empty_set(q.I, b);
            sp.members = sprime;
            sp.finalize();
            std::vector<Packed> stilde = audit::naive_thick(sp, params.r);
            if (stilde.size() != st.size_qtilde) replay_ok = false;

            Square next;
            if (!st.dropped.empty()) {
                next.I = q.I;
                PatternSet cur = sp;
                cur.members = stilde;
                cur.finalize();
                for (int c : st.dropped) {
                    cur = drop(cur, c);
                    next.I = next.I.without(c);
                }
                next.A = q.A;
                for (const auto& [c, split] : st.sampled_splits) next.A[c] = split;
                next.S = PatternSet::empty_set(next.I, b);
                next.S.members = audit::naive_restrict(next, chosen, cur.members);
                next.S.finalize();
            } else {
                next.I = q.I;
                next.A = q.A;
                next.S = PatternSet::empty_set(q.I, b);
                next.S.members = stilde;
                next.S.finalize();
            }
            if (next.S.size() != st.size_qnext ||
                square_density_ratio(next, b) != st.e_qnext)
                replay_ok = false;
            q = std::move(next);
            rect = std::move(chosen);
        }
        if (v != trace.final_node) replay_ok = false;
        RectPromiseScan final_scan = scan_rectangle_promise(rect);
        rep.check(replay_ok, "replay_matches_recorded_densities_exactly");
        rep.check(final_scan.monochromatic(), "final_rectangle_confirmed_by_exhaustive_scan",
                  Json::object({{"has_no", final_scan.has_no}, {"has_yes", final_scan.has_yes}}));
    }
    return rep;
}

//--------------------------------------------------------------------------
// dispatcher

inline Report run_experiment(const ExperimentConfig& cfg) {
    Stopwatch watch;
    Report rep;
    if (cfg.experiment == "verify-projection") rep = run_verify_projection(cfg);
    else if (cfg.experiment == "theorem1") rep = run_theorem1(cfg);
    else if (cfg.experiment == "protocol-audit") rep = run_protocol_audit(cfg);
    else if (cfg.experiment == "info-lemmas") rep = run_info_lemmas(cfg);
    else if (cfg.experiment == "info-cost") rep = run_info_cost(cfg);
    else if (cfg.experiment == "convexity") rep = run_convexity(cfg);
    else if (cfg.experiment == "sparse-lemmas") rep = run_sparse_lemmas(cfg);
    else if (cfg.experiment == "long-path") rep = run_long_path(cfg);
    else if (cfg.experiment == "reduction-check") rep = run_reduction_check(cfg);
    else throw std::invalid_argument("unknown experiment: " + cfg.experiment);
    rep.wall_ms = watch.ms();
    return rep;
}

}  // namespace udw
