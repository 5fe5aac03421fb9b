#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <string>

#include "boss/io.hpp"
#include "support/oracles.hpp"
#include "support/schema_check.hpp"
#include "support/tempdir.hpp"

#ifndef BOSS_CLI_PATH
#error "BOSS_CLI_PATH must point at the built binary"
#endif
#ifndef BOSS_FIXTURE_DIR
#error "BOSS_FIXTURE_DIR must point at tests/fixtures"
#endif
#ifndef BOSS_SCHEMA_DIR
#error "BOSS_SCHEMA_DIR must point at schemas/"
#endif

using namespace boss;
using nlohmann::json;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

// Runs the CLI through the shell, capturing exit code and both streams.
RunResult run_cli(const std::string& args, const std::string& env = "") {
    testing::TempDir cap;
    std::string out_file = cap.file("out.txt");
    std::string err_file = cap.file("err.txt");
    std::string cmd = env + (env.empty() ? "" : " ") + BOSS_CLI_PATH + " " +
                      args + " >" + out_file + " 2>" + err_file;
    int status = std::system(cmd.c_str());
    RunResult result;
    if (WIFEXITED(status)) result.code = WEXITSTATUS(status);
    result.out = io::read_text_file(out_file);
    result.err = io::read_text_file(err_file);
    return result;
}

std::string fixture(const std::string& name) {
    return std::string(BOSS_FIXTURE_DIR) + "/" + name;
}

json load_schema(const std::string& name) {
    return io::read_json_file(std::string(BOSS_SCHEMA_DIR) + "/" + name);
}

// Small scenario so subprocess pipelines stay fast.
json tiny_scenario(uint64_t seed, int n_train, int n_test, int T,
                   double separation = 2.0, double noise = 0.5) {
    json cfg;
    cfg["signature"] = io::signature_to_json(oracle::tiny_signature(3));
    // names the coordinate map knows, so the states stay separable
    cfg["states"] = {"literal", "sarcastic", "hesitant"};
    cfg["seed"] = seed;
    cfg["n_train"] = n_train;
    cfg["n_test"] = n_test;
    cfg["T"] = T;
    cfg["separation"] = separation;
    cfg["noise"] = noise;
    return cfg;
}

void expect_schema(const json& doc, const std::string& schema_name) {
    auto err = schema::check(doc, load_schema(schema_name));
    INFO("schema " << schema_name << ": " << err);
    CHECK(err.empty());
}

}  // namespace

TEST_CASE("cli requires a subcommand and flags its errors", "[cli]") {
    CHECK(run_cli("").code == 2);
    CHECK(run_cli("frobnicate").code == 2);
    CHECK(run_cli("gen").code == 2);  // --out is required
    CHECK(run_cli("train --data x.jsonl --out y --mode sgd").code == 2);
}

TEST_CASE("gen writes a complete, reproducible dataset", "[cli]") {
    testing::TempDir dir;
    io::write_json_file(dir.file("scenario.json"), tiny_scenario(7, 5, 3, 6));

    auto first = run_cli("gen --config " + dir.file("scenario.json") +
                         " --out " + dir.file("a"));
    INFO(first.err);
    REQUIRE(first.code == 0);
    CHECK(first.out.find("gen: 5 train + 3 test") != std::string::npos);

    auto train_set = io::read_dataset(dir.file("a/train.jsonl"));
    auto test_set = io::read_dataset(dir.file("a/test.jsonl"));
    REQUIRE(train_set.size() == 5);
    REQUIRE(test_set.size() == 3);
    CHECK(train_set[0].id == "train-0000");
    CHECK(train_set[0].length() == 6);
    CHECK(train_set[0].has_states());

    auto truth = io::load_truth(dir.file("a/truth.json"));
    CHECK(truth.signature.n_states == 3);
    expect_schema(io::read_json_file(dir.file("a/truth.json")),
                  "truth.schema.json");
    expect_schema(io::read_json_file(dir.file("a/resolved_config.json")),
                  "scenario_config.schema.json");

    auto second = run_cli("gen --config " + dir.file("scenario.json") +
                          " --out " + dir.file("b"));
    REQUIRE(second.code == 0);
    for (const char* name :
         {"train.jsonl", "test.jsonl", "truth.json", "resolved_config.json"}) {
        CHECK(io::read_text_file(dir.file("a/") + name) ==
              io::read_text_file(dir.file("b/") + name));
    }

    SECTION("the seed flag changes the draw") {
        auto moved = run_cli("gen --config " + dir.file("scenario.json") +
                             " --seed 8 --out " + dir.file("c"));
        REQUIRE(moved.code == 0);
        CHECK(io::read_text_file(dir.file("a/train.jsonl")) !=
              io::read_text_file(dir.file("c/train.jsonl")));
    }
}

TEST_CASE("gen handles an empty split", "[cli]") {
    testing::TempDir dir;
    io::write_json_file(dir.file("scenario.json"), tiny_scenario(1, 0, 2, 4));
    auto result = run_cli("gen --config " + dir.file("scenario.json") +
                          " --out " + dir.file("o"));
    REQUIRE(result.code == 0);
    CHECK(io::read_text_file(dir.file("o/train.jsonl")).empty());
    CHECK(io::read_dataset(dir.file("o/test.jsonl")).size() == 2);
}

TEST_CASE("train fits both modes and reports a monotone trace", "[cli]") {
    testing::TempDir dir;
    io::write_json_file(dir.file("scenario.json"), tiny_scenario(3, 25, 0, 8));
    REQUIRE(run_cli("gen --config " + dir.file("scenario.json") + " --out " +
                    dir.file("data"))
                .code == 0);

    json tcfg{{"hidden_width", 6}};
    io::write_json_file(dir.file("train.json"), tcfg);

    for (const std::string mode : {"supervised", "em"}) {
        auto result = run_cli("train --data " + dir.file("data/train.jsonl") +
                              " --config " + dir.file("train.json") +
                              " --mode " + mode + " --iters 3 --seed 11" +
                              " --out " + dir.file(mode));
        INFO(result.err);
        REQUIRE(result.code == 0);
        CHECK(result.out.find("train: mode=" + mode) != std::string::npos);

        auto report = io::read_json_file(dir.file(mode + "/report.json"));
        expect_schema(report, "train_report.schema.json");
        CHECK(report["mode"] == mode);
        auto trace = report["log_likelihood_trace"].get<std::vector<double>>();
        REQUIRE(!trace.empty());
        for (size_t i = 1; i < trace.size(); ++i) {
            CHECK(trace[i] >= trace[i - 1] - 1e-6);
        }
        CHECK(report["final_ll"].get<double>() == trace.back());

        auto model = io::load_model(dir.file(mode + "/model.json"));
        CHECK(model.n_states() == 3);
        expect_schema(io::read_json_file(dir.file(mode + "/model.json")),
                      "model.schema.json");
    }

    SECTION("training is byte-reproducible") {
        auto again = run_cli("train --data " + dir.file("data/train.jsonl") +
                             " --config " + dir.file("train.json") +
                             " --mode supervised --iters 3 --seed 11" +
                             " --out " + dir.file("again"));
        REQUIRE(again.code == 0);
        CHECK(io::read_text_file(dir.file("supervised/model.json")) ==
              io::read_text_file(dir.file("again/model.json")));
        CHECK(io::read_text_file(dir.file("supervised/report.json")) ==
              io::read_text_file(dir.file("again/report.json")));
    }
}

TEST_CASE("supervised training demands labels", "[cli]") {
    testing::TempDir dir;
    auto sig = oracle::tiny_signature(3);
    std::vector<LabeledSequence> data;
    for (uint64_t s = 0; s < 3; ++s) {
        data.push_back(oracle::random_test_sequence(sig, 5, s));
        data.back().states.clear();
    }
    io::write_dataset(dir.file("unlabeled.jsonl"), data);

    auto result = run_cli("train --data " + dir.file("unlabeled.jsonl") +
                          " --mode supervised --iters 1 --out " +
                          dir.file("o"));
    CHECK(result.code == 2);
    CHECK(result.err.find("error:") != std::string::npos);
}

TEST_CASE("decode emits one reproducible line per sequence", "[cli]") {
    testing::TempDir dir;
    io::write_json_file(dir.file("scenario.json"), tiny_scenario(5, 10, 4, 6));
    REQUIRE(run_cli("gen --config " + dir.file("scenario.json") + " --out " +
                    dir.file("data"))
                .code == 0);
    REQUIRE(run_cli("train --data " + dir.file("data/train.jsonl") +
                    " --mode supervised --iters 2 --seed 1 --out " +
                    dir.file("fit"))
                .code == 0);

    auto result = run_cli("decode --model " + dir.file("fit/model.json") +
                          " --data " + dir.file("data/test.jsonl") +
                          " --out " + dir.file("dec"));
    INFO(result.err);
    REQUIRE(result.code == 0);
    CHECK(result.out.find("decode: wrote 4 paths") != std::string::npos);

    auto text = io::read_text_file(dir.file("dec/decoded.jsonl"));
    REQUIRE(std::count(text.begin(), text.end(), '\n') == 4);
    size_t start = 0;
    while (start < text.size()) {
        size_t end = text.find('\n', start);
        auto line = io::parse_json(text.substr(start, end - start), "line");
        expect_schema(line, "decoded_line.schema.json");
        CHECK(line["states"].size() == 6);
        start = end + 1;
    }

    auto again = run_cli("decode --model " + dir.file("fit/model.json") +
                         " --data " + dir.file("data/test.jsonl") +
                         " --out " + dir.file("dec2"));
    REQUIRE(again.code == 0);
    CHECK(io::read_text_file(dir.file("dec2/decoded.jsonl")) == text);
}

TEST_CASE("eval reports accuracy with an oracle ceiling", "[cli]") {
    testing::TempDir dir;
    // nearly noise-free, so the oracle ceiling must saturate
    io::write_json_file(dir.file("scenario.json"),
                        tiny_scenario(9, 15, 10, 6, 2.0, 1e-6));
    REQUIRE(run_cli("gen --config " + dir.file("scenario.json") + " --out " +
                    dir.file("data"))
                .code == 0);
    REQUIRE(run_cli("train --data " + dir.file("data/train.jsonl") +
                    " --mode supervised --iters 2 --seed 2 --out " +
                    dir.file("fit"))
                .code == 0);

    auto result = run_cli("eval --model " + dir.file("fit/model.json") +
                          " --data " + dir.file("data/test.jsonl") +
                          " --truth " + dir.file("data/truth.json") +
                          " --out " + dir.file("ev"));
    INFO(result.err);
    REQUIRE(result.code == 0);
    CHECK(result.out.find("oracle ceiling") != std::string::npos);

    auto report = io::read_json_file(dir.file("ev/eval.json"));
    expect_schema(report, "eval_report.schema.json");
    CHECK(report["sequences"] == 10);
    CHECK(report["oracle"]["overall"].get<double>() == 1.0);
    double accuracy = report["overall"].get<double>();
    CHECK(accuracy >= 0.0);
    CHECK(accuracy <= 1.0);
}

TEST_CASE("eval on indistinguishable states hovers at chance", "[cli]") {
    testing::TempDir dir;
    io::write_json_file(dir.file("scenario.json"),
                        tiny_scenario(13, 20, 100, 10, 0.0, 0.5));
    REQUIRE(run_cli("gen --config " + dir.file("scenario.json") + " --out " +
                    dir.file("data"))
                .code == 0);
    REQUIRE(run_cli("train --data " + dir.file("data/train.jsonl") +
                    " --mode supervised --iters 1 --seed 3 --out " +
                    dir.file("fit"))
                .code == 0);

    auto result = run_cli("eval --model " + dir.file("fit/model.json") +
                          " --data " + dir.file("data/test.jsonl") +
                          " --truth " + dir.file("data/truth.json") +
                          " --out " + dir.file("ev"));
    REQUIRE(result.code == 0);
    auto report = io::read_json_file(dir.file("ev/eval.json"));
    // three indistinguishable states: chance sits at 1/3
    CHECK_THAT(report["oracle"]["overall"].get<double>(),
               Catch::Matchers::WithinAbs(1.0 / 3.0, 0.08));
    CHECK_THAT(report["overall"].get<double>(),
               Catch::Matchers::WithinAbs(1.0 / 3.0, 0.12));
}

TEST_CASE("eval rejects unlabeled data", "[cli]") {
    testing::TempDir dir;
    io::write_json_file(dir.file("scenario.json"), tiny_scenario(4, 4, 2, 5));
    REQUIRE(run_cli("gen --config " + dir.file("scenario.json") + " --out " +
                    dir.file("data"))
                .code == 0);
    REQUIRE(run_cli("train --data " + dir.file("data/train.jsonl") +
                    " --mode supervised --iters 1 --seed 1 --out " +
                    dir.file("fit"))
                .code == 0);

    auto unlabeled = io::read_dataset(dir.file("data/test.jsonl"));
    for (auto& seq : unlabeled) seq.states.clear();
    io::write_dataset(dir.file("unlabeled.jsonl"), unlabeled);

    auto result = run_cli("eval --model " + dir.file("fit/model.json") +
                          " --data " + dir.file("unlabeled.jsonl"));
    CHECK(result.code == 2);
    CHECK(result.err.find("no state labels") != std::string::npos);
}

TEST_CASE("a model cannot decode data with a foreign shape", "[cli]") {
    testing::TempDir dir;
    io::write_json_file(dir.file("small.json"), tiny_scenario(6, 5, 2, 5));
    REQUIRE(run_cli("gen --config " + dir.file("small.json") + " --out " +
                    dir.file("small"))
                .code == 0);
    REQUIRE(run_cli("train --data " + dir.file("small/train.jsonl") +
                    " --mode supervised --iters 1 --seed 1 --out " +
                    dir.file("fit"))
                .code == 0);

    json wide = tiny_scenario(6, 0, 2, 5);
    wide["signature"] = io::signature_to_json(synth::default_signature());
    wide.erase("states");  // label count must follow the wider signature
    io::write_json_file(dir.file("wide.json"), wide);
    REQUIRE(run_cli("gen --config " + dir.file("wide.json") + " --out " +
                    dir.file("wide"))
                .code == 0);

    auto result = run_cli("decode --model " + dir.file("fit/model.json") +
                          " --data " + dir.file("wide/test.jsonl") +
                          " --out " + dir.file("dec"));
    CHECK(result.code == 2);
}

TEST_CASE("bound reproduces the noiseless and noisy closed forms", "[cli]") {
    SECTION("noiseless four-symbol channel") {
        auto result = run_cli("bound " + fixture("identity_channel.json") +
                              " " + fixture("identity_marginal.json"));
        INFO(result.err);
        REQUIRE(result.code == 0);
        auto report = io::parse_json(result.out, "stdout");
        expect_schema(report, "bound_report.schema.json");
        CHECK_THAT(report["mi_bits"].get<double>(),
                   Catch::Matchers::WithinAbs(2.0, 1e-9));
        CHECK_THAT(report["mi_nats"].get<double>(),
                   Catch::Matchers::WithinAbs(std::log(4.0), 1e-9));
        CHECK(report["tight"] == true);
        CHECK_THAT(report["slack"].get<double>(),
                   Catch::Matchers::WithinAbs(0.0, 1e-12));
    }
    SECTION("binary symmetric channel with the true rows as q") {
        auto result = run_cli("bound " + fixture("bsc_channel.json") + " " +
                              fixture("bsc_marginal.json"));
        REQUIRE(result.code == 0);
        auto report = io::parse_json(result.out, "stdout");
        double expected = std::log(2.0) + 0.25 * std::log(0.25) +
                          0.75 * std::log(0.75);
        CHECK_THAT(report["mi_nats"].get<double>(),
                   Catch::Matchers::WithinAbs(expected, 1e-9));
        CHECK(report["tight"] == true);
    }
    SECTION("the variational family equal to the truth meets the information") {
        auto result = run_cli("bound " + fixture("identity_channel.json") +
                              " " + fixture("identity_marginal.json") + " " +
                              fixture("identity_q.json"));
        REQUIRE(result.code == 0);
        auto report = io::parse_json(result.out, "stdout");
        CHECK_THAT(report["ba_lower"].get<double>(),
                   Catch::Matchers::WithinAbs(report["mi_nats"].get<double>(),
                                              1e-12));
    }
    SECTION("bound writes its report when asked") {
        testing::TempDir dir;
        auto result = run_cli("bound " + fixture("bsc_channel.json") + " " +
                              fixture("bsc_marginal.json") + " --out " +
                              dir.file("rep"));
        REQUIRE(result.code == 0);
        auto report = io::read_json_file(dir.file("rep/bound.json"));
        CHECK(report["tight"] == true);
    }
    SECTION("a reference with a hole in its support is rejected") {
        auto result = run_cli("bound " + fixture("bsc_channel.json") + " " +
                              fixture("bad_continuity_v.json"));
        CHECK(result.code == 2);
        CHECK(result.err.find("index 1") != std::string::npos);
    }
}

TEST_CASE("score aggregates fixtures to the expected totals", "[cli]") {
    SECTION("perfect scores") {
        auto result = run_cli("score --data " + fixture("scores_fives.json"));
        REQUIRE(result.code == 0);
        auto report = io::parse_json(result.out, "stdout");
        expect_schema(report, "score_report.schema.json");
        CHECK_THAT(report["overall"].get<double>(),
                   Catch::Matchers::WithinAbs(100.0, 1e-12));
    }
    SECTION("zero scores") {
        auto result = run_cli("score --data " + fixture("scores_zeros.json"));
        REQUIRE(result.code == 0);
        auto report = io::parse_json(result.out, "stdout");
        CHECK_THAT(report["overall"].get<double>(),
                   Catch::Matchers::WithinAbs(0.0, 1e-12));
    }
    SECTION("mixed items under the document's own exponent") {
        auto result = run_cli("score --data " + fixture("scores_mixed.json"));
        REQUIRE(result.code == 0);
        auto report = io::parse_json(result.out, "stdout");
        CHECK(report["power"] == 1.0);
        CHECK_THAT(report["overall"].get<double>(),
                   Catch::Matchers::WithinAbs(70.0, 1e-12));
    }
    SECTION("the power flag overrides the document") {
        auto result = run_cli("score --data " + fixture("scores_mixed.json") +
                              " --power 2");
        REQUIRE(result.code == 0);
        auto report = io::parse_json(result.out, "stdout");
        // item means 5 and 2 scale to 1 and 0.16
        CHECK_THAT(report["overall"].get<double>(),
                   Catch::Matchers::WithinAbs(58.0, 1e-12));
    }
    SECTION("out-of-range scores are rejected") {
        auto result = run_cli("score --data " + fixture("scores_bad.json"));
        CHECK(result.code == 2);
        CHECK(result.err.find("outside [0, 5]") != std::string::npos);
    }
    SECTION("score writes its report when asked") {
        testing::TempDir dir;
        auto result = run_cli("score --data " + fixture("scores_fives.json") +
                              " --out " + dir.file("rep"));
        REQUIRE(result.code == 0);
        auto on_disk = io::read_json_file(dir.file("rep/score.json"));
        CHECK_THAT(on_disk["overall"].get<double>(),
                   Catch::Matchers::WithinAbs(100.0, 1e-12));
    }
}

TEST_CASE("exit codes separate i/o failures from bad content", "[cli]") {
    testing::TempDir dir;
    CHECK(run_cli("train --data " + dir.file("absent.jsonl") +
                  " --mode supervised --out " + dir.file("o"))
              .code == 3);
    CHECK(run_cli("score --data " + dir.file("absent.json")).code == 3);

    io::write_text_file(dir.file("mangled.json"), "{not json");
    CHECK(run_cli("gen --config " + dir.file("mangled.json") + " --out " +
                  dir.file("o"))
              .code == 2);
    CHECK(run_cli("score --data " + dir.file("mangled.json")).code == 2);
}

TEST_CASE("logging level is environment controlled", "[cli]") {
    testing::TempDir dir;
    io::write_json_file(dir.file("scenario.json"), tiny_scenario(2, 2, 0, 4));

    auto quiet = run_cli("gen --config " + dir.file("scenario.json") +
                         " --out " + dir.file("a"));
    REQUIRE(quiet.code == 0);
    CHECK(quiet.err.find("[info]") == std::string::npos);

    auto chatty = run_cli("gen --config " + dir.file("scenario.json") +
                          " --out " + dir.file("b"),
                          "BOSS_LOG=info");
    REQUIRE(chatty.code == 0);
    CHECK(chatty.err.find("[info]") != std::string::npos);

    auto unknown = run_cli("gen --config " + dir.file("scenario.json") +
                           " --out " + dir.file("c"),
                           "BOSS_LOG=noisy");
    REQUIRE(unknown.code == 0);
    CHECK(unknown.err.find("[warn]") != std::string::npos);
}
