// Command-line front end: dataset generation, training, decoding,
// evaluation, information-bound reports, and score aggregation.
//
// Exit codes: 0 success, 2 input or contract error, 3 I/O error,
// 4 numerical failure. BOSS_LOG={error,info,debug} sets stderr verbosity.

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "boss/boss.hpp"

namespace fs = std::filesystem;
using boss::io::json;

namespace {

int g_verbosity = 0;

void init_logging() {
    const char* env = std::getenv("BOSS_LOG");
    if (env == nullptr) return;
    std::string level(env);
    if (level == "debug") {
        g_verbosity = 2;
    } else if (level == "info") {
        g_verbosity = 1;
    } else if (level == "error") {
        g_verbosity = 0;
    } else {
        std::cerr << "[warn] unknown BOSS_LOG level '" << level
                  << "', using error\n";
    }
}

void log_info(const std::string& msg) {
    if (g_verbosity >= 1) std::cerr << "[info] " << msg << "\n";
}

void log_debug(const std::string& msg) {
    if (g_verbosity >= 2) std::cerr << "[debug] " << msg << "\n";
}

void make_output_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw boss::IoError("cannot create output directory " + dir + ": " +
                            ec.message());
    }
}

std::string join_path(const std::string& dir, const char* name) {
    return (fs::path(dir) / name).string();
}

// Options shared by the subcommands. Each field is only wired into the
// subcommands that use it.
struct Cli {
    std::string config_path;
    std::string data_path;
    std::string model_path;
    std::string out_path;
    std::string truth_path;
    std::string mode;
    std::string channel_path;
    std::string v_path;
    std::string q_path;
    std::optional<uint64_t> seed;
    std::optional<double> power;
    std::optional<int> iters;
    std::optional<double> lr;
};

// ---------------------------------------------------------------------
// gen

int cmd_gen(const Cli& cli) {
    json cfg_json = cli.config_path.empty()
                        ? json::object()
                        : boss::io::read_json_file(cli.config_path);
    if (cli.seed) cfg_json["seed"] = *cli.seed;
    boss::synth::ScenarioConfig cfg = boss::io::scenario_from_json(cfg_json);
    json resolved = boss::io::scenario_to_json(cfg);
    std::string hash = boss::io::config_hash(resolved);
    log_info("scenario config hash " + hash);

    auto data = boss::synth::generate_dataset(cfg);
    make_output_dir(cli.out_path);
    boss::io::write_dataset(join_path(cli.out_path, "train.jsonl"), data.train);
    boss::io::write_dataset(join_path(cli.out_path, "test.jsonl"), data.test);
    boss::io::save_truth(join_path(cli.out_path, "truth.json"), data.truth);
    boss::io::write_json_file(join_path(cli.out_path, "resolved_config.json"),
                              resolved);
    std::cout << "gen: " << data.train.size() << " train + " << data.test.size()
              << " test sequences, T=" << cfg.T << ", states="
              << cfg.signature.n_states << ", config " << hash << "\n";
    return 0;
}

// ---------------------------------------------------------------------
// train

boss::DimensionSignature infer_signature(
    const json& cfg_json, const std::vector<boss::LabeledSequence>& data) {
    if (cfg_json.contains("signature")) {
        return boss::io::signature_from_json(cfg_json["signature"]);
    }
    const boss::LabeledSequence& first = data.front();
    boss::ensure(!first.observations.empty(), "dataset: empty first sequence");
    boss::DimensionSignature sig;
    sig.d_l = static_cast<int>(first.observations[0].v_l.size());
    sig.d_ac = static_cast<int>(first.observations[0].v_ac.size());
    sig.d_cd = static_cast<int>(first.observations[0].v_cd.size());
    sig.d_is = static_cast<int>(first.observations[0].v_is.size());
    sig.d_hist = static_cast<int>(first.contexts[0].c_hist.size());
    sig.d_env = static_cast<int>(first.contexts[0].c_env.size());
    sig.d_char = static_cast<int>(first.contexts[0].c_char.size());
    sig.d_task = static_cast<int>(first.contexts[0].c_task.size());
    if (cfg_json.contains("n_states")) {
        sig.n_states = cfg_json["n_states"].get<int>();
    } else {
        // widest labeled state, falling back to 4 for unlabeled data
        int max_state = -1;
        for (const auto& seq : data) {
            for (int s : seq.states) max_state = std::max(max_state, s);
        }
        sig.n_states = max_state >= 0 ? max_state + 1 : 4;
    }
    sig.validate();
    return sig;
}

int cmd_train(const Cli& cli) {
    auto data = boss::io::read_dataset(cli.data_path);
    boss::ensure(!data.empty(), "dataset: no sequences in " + cli.data_path);

    json cfg_json = cli.config_path.empty()
                        ? json::object()
                        : boss::io::read_json_file(cli.config_path);
    if (!cli.mode.empty()) cfg_json["mode"] = cli.mode;
    if (cli.seed) cfg_json["seed"] = *cli.seed;
    if (cli.iters) cfg_json["iterations"] = *cli.iters;
    if (cli.lr) cfg_json["learning_rate"] = *cli.lr;
    boss::train::TrainConfig cfg = boss::io::train_config_from_json(cfg_json);

    boss::DimensionSignature sig = infer_signature(cfg_json, data);
    int hidden = cfg_json.value("hidden_width", 16);
    boss::BossModel initial =
        boss::random_model(sig, cfg.seed, {}, hidden);

    json resolved = boss::io::train_config_to_json(cfg);
    resolved["signature"] = boss::io::signature_to_json(sig);
    resolved["hidden_width"] = hidden;
    std::string hash = boss::io::config_hash(resolved);
    log_info("train config hash " + hash);
    log_debug("training on " + std::to_string(data.size()) + " sequences");

    auto [model, report] = cfg.mode == boss::train::TrainConfig::Mode::supervised
                               ? boss::train::fit_supervised(initial, data, cfg)
                               : boss::train::fit_em(initial, data, cfg);

    make_output_dir(cli.out_path);
    boss::io::save_model(join_path(cli.out_path, "model.json"), model);
    json report_json{
        {"mode", cfg.mode == boss::train::TrainConfig::Mode::supervised
                     ? "supervised"
                     : "em"},
        {"iterations_run", report.log_likelihood_trace.size()},
        {"converged", report.converged},
        {"final_ll", report.final_ll},
        {"log_likelihood_trace", report.log_likelihood_trace},
        {"sequences", data.size()},
        {"config_hash", hash}};
    boss::io::write_json_file(join_path(cli.out_path, "report.json"),
                              report_json);
    boss::io::write_json_file(join_path(cli.out_path, "resolved_config.json"),
                              resolved);
    std::cout << "train: mode="
              << (cfg.mode == boss::train::TrainConfig::Mode::supervised
                      ? "supervised"
                      : "em")
              << " iterations=" << report.log_likelihood_trace.size()
              << " final_ll=" << report.final_ll
              << " converged=" << (report.converged ? "true" : "false")
              << " config " << hash << "\n";
    return 0;
}

// ---------------------------------------------------------------------
// decode / eval

int cmd_decode(const Cli& cli) {
    boss::BossModel model = boss::io::load_model(cli.model_path);
    auto data = boss::io::read_dataset(cli.data_path);
    boss::ensure(!data.empty(), "dataset: no sequences in " + cli.data_path);

    make_output_dir(cli.out_path);
    std::string out;
    for (const auto& seq : data) {
        auto decoded = boss::viterbi(model, seq);
        json line{{"id", seq.id},
                  {"states", decoded.states},
                  {"log_prob", decoded.log_prob}};
        out += line.dump();
        out += '\n';
    }
    boss::io::write_text_file(join_path(cli.out_path, "decoded.jsonl"), out);
    json resolved{{"model", cli.model_path}, {"data", cli.data_path}};
    boss::io::write_json_file(join_path(cli.out_path, "resolved_config.json"),
                              resolved);
    std::cout << "decode: wrote " << data.size() << " paths\n";
    return 0;
}

json accuracy_to_json(const boss::synth::AccuracyReport& report,
                      const std::vector<std::string>& labels) {
    return json{{"overall", report.overall},
                {"per_state_recall", report.per_state_recall},
                {"per_state_support", report.per_state_support},
                {"labels", labels}};
}

int cmd_eval(const Cli& cli) {
    boss::BossModel model = boss::io::load_model(cli.model_path);
    auto data = boss::io::read_dataset(cli.data_path);
    boss::ensure(!data.empty(), "dataset: no sequences in " + cli.data_path);

    std::vector<std::vector<int>> decoded;
    std::vector<std::vector<int>> reference;
    decoded.reserve(data.size());
    reference.reserve(data.size());
    for (const auto& seq : data) {
        boss::ensure(seq.has_states(),
                     "eval: sequence " + seq.id + " has no state labels");
        decoded.push_back(boss::viterbi(model, seq).states);
        reference.push_back(seq.states);
    }
    auto accuracy = boss::synth::evaluate_accuracy(decoded, reference,
                                                   model.n_states());
    json report = accuracy_to_json(accuracy, model.labels);
    report["sequences"] = data.size();

    if (!cli.truth_path.empty()) {
        auto truth = boss::io::load_truth(cli.truth_path);
        std::vector<std::vector<int>> oracle;
        oracle.reserve(data.size());
        for (const auto& seq : data) {
            oracle.push_back(boss::synth::bayes_oracle_decode(truth, seq));
        }
        auto ceiling = boss::synth::evaluate_accuracy(
            oracle, reference, truth.signature.n_states);
        report["oracle"] = accuracy_to_json(ceiling, truth.labels);
        std::cout << "eval: accuracy " << accuracy.overall << " (oracle ceiling "
                  << ceiling.overall << ")\n";
    } else {
        std::cout << "eval: accuracy " << accuracy.overall << "\n";
    }

    if (!cli.out_path.empty()) {
        make_output_dir(cli.out_path);
        boss::io::write_json_file(join_path(cli.out_path, "eval.json"), report);
        json resolved{{"model", cli.model_path},
                      {"data", cli.data_path},
                      {"truth", cli.truth_path}};
        boss::io::write_json_file(
            join_path(cli.out_path, "resolved_config.json"), resolved);
    }
    return 0;
}

// ---------------------------------------------------------------------
// bound / score

int cmd_bound(const Cli& cli) {
    auto channel =
        boss::io::channel_from_json(boss::io::read_json_file(cli.channel_path));
    auto v =
        boss::io::distribution_from_json(boss::io::read_json_file(cli.v_path));
    auto report = boss::info::check_upper_bound(channel, v);
    json out{{"mi_nats", report.mi},
             {"mi_bits", boss::info::nats_to_bits(report.mi)},
             {"expected_kl", report.expected_kl},
             {"slack", report.slack},
             {"tight", report.tight}};
    if (!cli.q_path.empty()) {
        auto q_rows =
            boss::io::q_rows_from_json(boss::io::read_json_file(cli.q_path));
        out["ba_lower"] = boss::info::ba_lower_bound(channel, q_rows);
    }
    std::cout << out.dump(2) << "\n";
    if (!cli.out_path.empty()) {
        make_output_dir(cli.out_path);
        boss::io::write_json_file(join_path(cli.out_path, "bound.json"), out);
        json resolved{{"channel", cli.channel_path},
                      {"v", cli.v_path},
                      {"q", cli.q_path}};
        boss::io::write_json_file(
            join_path(cli.out_path, "resolved_config.json"), resolved);
    }
    return 0;
}

int cmd_score(const Cli& cli) {
    auto doc =
        boss::io::score_document_from_json(boss::io::read_json_file(cli.data_path));
    double power = boss::score::k_default_power;
    if (doc.power >= 0.0) power = doc.power;
    if (cli.power) power = *cli.power;
    auto report = boss::score::aggregate_repeated(doc.items, power);
    json out = boss::io::score_report_to_json(report);
    std::cout << out.dump(2) << "\n";
    if (!cli.out_path.empty()) {
        make_output_dir(cli.out_path);
        boss::io::write_json_file(join_path(cli.out_path, "score.json"), out);
        json resolved{{"scores", cli.data_path}, {"power", power}};
        boss::io::write_json_file(
            join_path(cli.out_path, "resolved_config.json"), resolved);
    }
    return 0;
}

int run_guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const boss::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const boss::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const boss::NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    init_logging();
    CLI::App app{"beyond-semantic sequence modeling toolkit"};
    app.require_subcommand(1);
    Cli cli;

    CLI::App* gen = app.add_subcommand("gen", "generate a synthetic dataset");
    gen->add_option("--config", cli.config_path, "scenario config JSON");
    gen->add_option("--out", cli.out_path, "output directory")->required();
    gen->add_option("--seed", cli.seed, "override config seed");

    CLI::App* train = app.add_subcommand("train", "fit a model to a dataset");
    train->add_option("--data", cli.data_path, "dataset JSONL")->required();
    train->add_option("--config", cli.config_path, "training config JSON");
    train->add_option("--mode", cli.mode, "supervised or em")
        ->check(CLI::IsMember({"supervised", "em"}));
    train->add_option("--out", cli.out_path, "output directory")->required();
    train->add_option("--seed", cli.seed, "override config seed");
    train->add_option("--iters", cli.iters, "override iteration count");
    train->add_option("--lr", cli.lr, "override learning rate");

    CLI::App* decode = app.add_subcommand("decode", "best state paths");
    decode->add_option("--model", cli.model_path, "model JSON")->required();
    decode->add_option("--data", cli.data_path, "dataset JSONL")->required();
    decode->add_option("--out", cli.out_path, "output directory")->required();

    CLI::App* eval = app.add_subcommand("eval", "accuracy against labels");
    eval->add_option("--model", cli.model_path, "model JSON")->required();
    eval->add_option("--data", cli.data_path, "labeled dataset JSONL")
        ->required();
    eval->add_option("--truth", cli.truth_path,
                     "generator truth JSON for the oracle ceiling");
    eval->add_option("--out", cli.out_path, "output directory");

    CLI::App* bound = app.add_subcommand("bound", "information-bound report");
    bound->add_option("channel", cli.channel_path, "channel JSON")->required();
    bound->add_option("v", cli.v_path, "reference distribution JSON")
        ->required();
    bound->add_option("q", cli.q_path, "variational conditional JSON");
    bound->add_option("--out", cli.out_path, "output directory");

    CLI::App* score = app.add_subcommand("score", "aggregate judge scores");
    score->add_option("--data", cli.data_path, "score document JSON")
        ->required();
    score->add_option("--power", cli.power, "scaling exponent (>= 1)");
    score->add_option("--out", cli.out_path, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (gen->parsed()) return run_guarded([&] { return cmd_gen(cli); });
    if (train->parsed()) return run_guarded([&] { return cmd_train(cli); });
    if (decode->parsed()) return run_guarded([&] { return cmd_decode(cli); });
    if (eval->parsed()) return run_guarded([&] { return cmd_eval(cli); });
    if (bound->parsed()) return run_guarded([&] { return cmd_bound(cli); });
    if (score->parsed()) return run_guarded([&] { return cmd_score(cli); });
    return 2;
}
