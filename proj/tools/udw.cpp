// Command-line front end: one experiment per invocation, JSON reports on
// stdout or --out, optional CSV summary. Flags override preset and config
// file values. Exit status: 0 all checks passed, 1 check failures, 2 usage
// or input errors, 3 a structural guarantee was falsified outright.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "udw/experiments.hpp"

namespace {

struct CliValues {
    int n = 0, k = 0, s = 0, b = 0, r = 0;
    std::string alpha, delta, epsilon;
    std::uint64_t seed = 0, samples = 0, trials = 0;
    bool exhaustive = false, sampled = false, csv = false;
    std::string protocol, out, preset, config_file, experiment;
};

void add_common_options(CLI::App* cmd, CliValues& v) {
    cmd->add_option("--n", v.n, "coordinate count");
    cmd->add_option("--k", v.k, "player count");
    cmd->add_option("--s", v.s, "block count");
    cmd->add_option("--b", v.b, "block alphabet size");
    cmd->add_option("--r", v.r, "thickness parameter");
    cmd->add_option("--alpha", v.alpha, "average-degree parameter (rational or decimal)");
    cmd->add_option("--delta", v.delta, "slack / bias threshold (rational or decimal)");
    cmd->add_option("--epsilon", v.epsilon, "protocol error threshold");
    cmd->add_option("--seed", v.seed, "RNG seed");
    cmd->add_option("--samples", v.samples, "sample count for non-exhaustive sweeps");
    cmd->add_option("--trials", v.trials, "trial count for property runs");
    cmd->add_flag("--exhaustive", v.exhaustive, "exhaustive sweep mode");
    cmd->add_flag("--sampled", v.sampled, "sampled sweep mode");
    cmd->add_option("--protocol", v.protocol,
                    "builtin name, noisy:<p>, uequal_broadcast, or @file.json");
    cmd->add_option("--out", v.out, "write the report to this path");
    cmd->add_option("--preset", v.preset, "desk1 | desk2 | desk3");
    cmd->add_option("--config", v.config_file, "config JSON (flags win)");
    cmd->add_flag("--csv", v.csv, "also print a CSV summary");
}

udw::ExperimentConfig assemble(const CLI::App* cmd, const CliValues& v,
                               const std::string& experiment) {
    udw::ExperimentConfig cfg;
    if (!v.preset.empty()) cfg = udw::preset_config(v.preset);
    if (!v.config_file.empty()) {
        udw::ExperimentConfig file_cfg =
            udw::ExperimentConfig::from_json(udw::load_json_file(v.config_file));
        if (v.preset.empty()) cfg = file_cfg;
        else throw CLI::ValidationError("--preset and --config are mutually exclusive");
    }
    if (!experiment.empty()) cfg.experiment = experiment;
    if (cmd->count("--n")) cfg.n = v.n;
    if (cmd->count("--k")) cfg.k = v.k;
    if (cmd->count("--s")) cfg.s = v.s;
    if (cmd->count("--b")) cfg.b = v.b;
    if (cmd->count("--r")) cfg.r = v.r;
    if (cmd->count("--alpha")) cfg.alpha = udw::parse_rat(v.alpha);
    if (cmd->count("--delta")) cfg.delta = udw::parse_rat(v.delta);
    if (cmd->count("--epsilon")) cfg.epsilon = udw::parse_rat(v.epsilon);
    if (cmd->count("--seed")) cfg.seed = v.seed;
    if (cmd->count("--samples")) cfg.samples = v.samples;
    if (cmd->count("--trials")) cfg.trials = v.trials;
    if (cmd->count("--exhaustive")) cfg.exhaustive = true;
    if (cmd->count("--sampled")) cfg.exhaustive = false;
    if (cmd->count("--protocol")) cfg.protocol = v.protocol;
    if (cmd->count("--out")) cfg.out_path = v.out;
    if (cmd->count("--csv")) cfg.csv = true;
    return cfg;
}

int emit_report(const udw::Report& rep, const udw::ExperimentConfig& cfg) {
    udw::Json j = udw::report_to_json(rep);
    if (!cfg.out_path.empty())
        udw::save_json_file(cfg.out_path, j);
    else
        std::cout << j.dump(2) << "\n";
    if (cfg.csv) std::cout << udw::report_to_csv(rep);
    return rep.ok() ? 0 : 1;
}

int run_one(const CLI::App* cmd, const CliValues& v, const std::string& experiment) {
    udw::ExperimentConfig cfg = assemble(cmd, v, experiment);
    udw::Report rep = udw::run_experiment(cfg);
    return emit_report(rep, cfg);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"unique-disjointness density-increment workbench"};
    app.require_subcommand(1);

    CliValues v;
    std::string diff_a, diff_b, proto_file;

    auto* run_cmd = app.add_subcommand("run", "run a named experiment");
    run_cmd->add_option("--experiment", v.experiment,
                        "verify-projection | theorem1 | protocol-audit | info-lemmas | "
                        "info-cost | convexity | sparse-lemmas | long-path | reduction-check");
    add_common_options(run_cmd, v);

    const char* sugar[] = {"verify-projection", "theorem1",      "protocol-audit",
                           "info-lemmas",       "info-cost",     "convexity",
                           "sparse-lemmas",     "long-path",     "reduction-check",
                           "verify-info-lemmas"};
    for (const char* name : sugar) {
        auto* cmd = app.add_subcommand(name, std::string("run the ") + name + " experiment");
        add_common_options(cmd, v);
    }

    auto* proto_cmd = app.add_subcommand("protocol", "inspect a protocol file");
    auto* proto_check = proto_cmd->add_subcommand("check", "validate and report leaf structure");
    proto_check->add_option("file", proto_file, "protocol JSON")->required();
    auto* proto_audit = proto_cmd->add_subcommand("audit", "run the lower-bound audit");
    proto_audit->add_option("file", proto_file, "protocol JSON")->required();
    add_common_options(proto_audit, v);
    auto* proto_export = proto_cmd->add_subcommand("export", "write a builtin protocol to JSON");
    std::string export_name;
    proto_export->add_option("name", export_name, "builtin name or noisy:<p>")->required();
    add_common_options(proto_export, v);

    auto* sparse_cmd = app.add_subcommand("sparse", "sparse-side verification");
    auto* sparse_verify = sparse_cmd->add_subcommand("verify-lemmas", "run the sparse lemma suite");
    add_common_options(sparse_verify, v);

    auto* diff_cmd = app.add_subcommand("report-diff", "compare two reports field by field");
    diff_cmd->add_option("a", diff_a, "first report")->required();
    diff_cmd->add_option("b", diff_b, "second report")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            if (v.experiment.empty() && v.preset.empty() && v.config_file.empty())
                throw CLI::ValidationError("run needs --experiment, --preset or --config");
            return run_one(run_cmd, v, v.experiment);
        }
        for (const char* name : sugar) {
            auto* cmd = app.get_subcommand(name);
            if (cmd->parsed()) {
                std::string experiment =
                    std::string(name) == "verify-info-lemmas" ? "info-lemmas" : name;
                return run_one(cmd, v, experiment);
            }
        }
        if (sparse_cmd->parsed()) {
            if (sparse_verify->parsed()) return run_one(sparse_verify, v, "sparse-lemmas");
            throw CLI::ValidationError("sparse needs a subcommand");
        }
        if (proto_cmd->parsed()) {
            if (proto_export->parsed()) {
                udw::ExperimentConfig cfg = assemble(proto_export, v, "");
                udw::ProtocolTree tree =
                    export_name == "uequal_broadcast"
                        ? udw::uequal_broadcast(cfg.s, cfg.b)
                        : udw::load_protocol(export_name, cfg.n, cfg.k, cfg.seed);
                udw::Json j = udw::protocol_to_json(tree);
                if (cfg.out_path.empty())
                    std::cout << j.dump(2) << "\n";
                else
                    udw::save_json_file(cfg.out_path, j);
                return 0;
            }
            if (proto_check->parsed()) {
                udw::ProtocolTree tree =
                    udw::protocol_from_json(udw::load_json_file(proto_file));
                auto leaves = udw::leaf_rectangles(tree);
                udw::Json j;
                j["k"] = tree.k;
                j["n"] = tree.n();
                j["nodes"] = tree.nodes.size();
                j["leaves"] = leaves.size();
                int depth = 0;
                for (const auto& lf : leaves) depth = std::max(depth, lf.depth);
                j["depth"] = depth;
                j["partition"] = "ok";
                std::cout << j.dump(2) << "\n";
                return 0;
            }
            udw::ProtocolTree tree = udw::protocol_from_json(udw::load_json_file(proto_file));
            udw::ExperimentConfig cfg = assemble(proto_audit, v, "protocol-audit");
            cfg.n = tree.n();
            cfg.k = tree.k;
            cfg.protocol = "@" + proto_file;
            udw::Report rep = udw::run_experiment(cfg);
            return emit_report(rep, cfg);
        }
        if (diff_cmd->parsed()) {
            udw::Json a = udw::load_json_file(diff_a);
            udw::Json b = udw::load_json_file(diff_b);
            auto diffs = udw::report_diff(a, b);
            for (const auto& d : diffs) std::cout << d << "\n";
            std::cout << (diffs.empty() ? "reports identical\n" : "") << std::flush;
            return 0;
        }
    } catch (const udw::falsification_error& e) {
        std::cerr << "FALSIFICATION: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
