#include <catch2/catch_amalgamated.hpp>

#include "udw/experiments.hpp"

using namespace udw;

TEST_CASE("reports separate deterministic content from timings") {
    Report rep;
    rep.experiment = "demo";
    rep.config = Json::object({{"n", 2}});
    rep.pass("a_check", Json::object({{"value", 1}}));
    rep.note("a_note");
    rep.wall_ms = 123.4;
    Json full = report_to_json(rep);
    Json canon = report_canonical_json(rep);
    CHECK(full.contains("timings_ms"));
    CHECK_FALSE(canon.contains("timings_ms"));
    CHECK(full["checks"] == canon["checks"]);
    CHECK(canon["summary"]["failed"] == 0);
    CHECK(rep.ok());

    rep.fail("bad");
    CHECK_FALSE(rep.ok());
    CHECK(report_canonical_json(rep)["summary"]["failed"] == 1);
}

TEST_CASE("experiment configs round trip through json") {
    ExperimentConfig cfg;
    cfg.experiment = "long-path";
    cfg.s = 2;
    cfg.b = 32;
    cfg.alpha = Rat(17, 3);
    cfg.delta = parse_rat("0.02");
    cfg.seed = 99;
    ExperimentConfig back = ExperimentConfig::from_json(cfg.to_json());
    CHECK(back.experiment == cfg.experiment);
    CHECK(back.alpha == Rat(17, 3));
    CHECK(back.delta == Rat(1, 50));
    CHECK(back.seed == 99);
    CHECK(parse_rat("0.5") == Rat(1, 2));
    CHECK(parse_rat("3/4") == Rat(3, 4));
    CHECK(parse_rat("7") == Rat(7));
}

TEST_CASE("presets pin the standing configurations") {
    ExperimentConfig d1 = preset_config("desk1");
    CHECK(d1.experiment == "long-path");
    CHECK(d1.s == 2);
    CHECK(d1.b == 32);
    CHECK(d1.alpha == Rat(8));
    CHECK(d1.r == 2);
    CHECK(d1.delta == Rat(1, 2));
    CHECK(preset_config("desk2").experiment == "sparse-lemmas");
    CHECK(preset_config("desk3").experiment == "info-lemmas");
    CHECK_THROWS_AS(preset_config("desk9"), std::invalid_argument);
}

TEST_CASE("identical configs give byte-identical canonical reports") {
    ExperimentConfig cfg;
    cfg.experiment = "convexity";
    cfg.trials = 500;
    cfg.seed = 42;
    std::string a = report_canonical_json(run_experiment(cfg)).dump();
    std::string b = report_canonical_json(run_experiment(cfg)).dump();
    CHECK(a == b);

    cfg.experiment = "sparse-lemmas";
    cfg.trials = 5;
    a = report_canonical_json(run_experiment(cfg)).dump();
    b = report_canonical_json(run_experiment(cfg)).dump();
    CHECK(a == b);
}

TEST_CASE("report diff") {
    ExperimentConfig cfg;
    cfg.experiment = "convexity";
    cfg.trials = 200;
    cfg.seed = 1;
    Json a = report_to_json(run_experiment(cfg));
    SECTION("identical runs diff empty") {
        Json b = report_to_json(run_experiment(cfg));
        CHECK(report_diff(a, b).empty());
    }
    SECTION("different seeds keep verdicts but change the config echo") {
        cfg.seed = 2;
        Json b = report_to_json(run_experiment(cfg));
        auto diffs = report_diff(a, b);
        CHECK_FALSE(diffs.empty());
        CHECK(a["checks"][0]["verdict"] == b["checks"][0]["verdict"]);
    }
    SECTION("experiment mismatch is an error") {
        ExperimentConfig other;
        other.experiment = "reduction-check";
        other.s = 2;
        other.b = 4;
        Json b = report_to_json(run_experiment(other));
        CHECK_THROWS_AS(report_diff(a, b), std::invalid_argument);
    }
}

TEST_CASE("experiment dispatch") {
    SECTION("unknown experiments are rejected") {
        ExperimentConfig cfg;
        cfg.experiment = "nope";
        CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
    }
    SECTION("theorem1 audits all 256 rectangles at n=2, k=2") {
        ExperimentConfig cfg;
        cfg.experiment = "theorem1";
        cfg.n = 2;
        cfg.k = 2;
        cfg.exhaustive = true;
        Report rep = run_experiment(cfg);
        REQUIRE(rep.ok());
        REQUIRE(!rep.checks.empty());
        CHECK(rep.checks[0].details["rectangles"] == 256);
        bool has_cert = false;
        for (const auto& c : rep.checks)
            if (c.name == "extremal_certificate") {
                has_cert = true;
                CHECK(c.details["steps"].size() == 2);
                CHECK(c.details["bound"] == "4");
            }
        CHECK(has_cert);
    }
    SECTION("csv has one row per check") {
        ExperimentConfig cfg;
        cfg.experiment = "reduction-check";
        cfg.s = 2;
        cfg.b = 4;
        Report rep = run_experiment(cfg);
        std::string csv = report_to_csv(rep);
        std::size_t lines = std::count(csv.begin(), csv.end(), '\n');
        CHECK(lines == rep.checks.size() + 1);
    }
}
