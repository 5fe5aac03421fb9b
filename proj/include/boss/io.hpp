#pragma once

// JSON serialization for datasets, model checkpoints, generator truth,
// distribution documents, and score documents, plus small file helpers.
//
// Keys are emitted in sorted order (nlohmann's default object ordering),
// so equal inputs always produce byte-identical documents; the config
// hash below relies on that.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "boss/common.hpp"
#include "boss/hmm.hpp"
#include "boss/infobound.hpp"
#include "boss/relevance.hpp"
#include "boss/score.hpp"
#include "boss/synth.hpp"
#include "boss/train.hpp"
#include "boss/vectors.hpp"

namespace boss::io {

using nlohmann::json;

// ---------------------------------------------------------------------
// files

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path + " for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failed on " + path);
    return buf.str();
}

inline void write_text_file(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write failed on " + path);
}

inline json parse_json(const std::string& text, const std::string& where) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        throw ValidationError(where + ": malformed JSON");
    }
    return j;
}

inline json read_json_file(const std::string& path) {
    return parse_json(read_text_file(path), path);
}

inline void write_json_file(const std::string& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------
// config hash (FNV-1a 64 over the canonical compact dump)

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string config_hash(const json& j) {
    static const char* digits = "0123456789abcdef";
    uint64_t h = fnv1a64(j.dump());
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

// ---------------------------------------------------------------------
// field access helpers

namespace detail {

inline const json& require(const json& j, const char* key,
                           const std::string& where) {
    ensure(j.is_object(), where + ": expected an object");
    auto it = j.find(key);
    ensure(it != j.end(), where + ": missing field '" + key + "'");
    return *it;
}

inline std::vector<double> doubles(const json& j, const std::string& where) {
    ensure(j.is_array(), where + ": expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        ensure(v.is_number(), where + ": expected an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

inline std::vector<std::vector<double>> matrix(const json& j,
                                               const std::string& where) {
    ensure(j.is_array(), where + ": expected an array of rows");
    std::vector<std::vector<double>> out;
    out.reserve(j.size());
    for (size_t i = 0; i < j.size(); ++i) {
        out.push_back(doubles(j[i], where + "[" + std::to_string(i) + "]"));
    }
    return out;
}

inline std::vector<std::string> strings(const json& j,
                                        const std::string& where) {
    ensure(j.is_array(), where + ": expected an array of strings");
    std::vector<std::string> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        ensure(v.is_string(), where + ": expected an array of strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

inline std::vector<int> ints(const json& j, const std::string& where) {
    ensure(j.is_array(), where + ": expected an array of integers");
    std::vector<int> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        ensure(v.is_number_integer(), where + ": expected an array of integers");
        out.push_back(v.get<int>());
    }
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------
// dimension signature

inline json signature_to_json(const DimensionSignature& sig) {
    return json{{"d_l", sig.d_l},       {"d_ac", sig.d_ac},
                {"d_cd", sig.d_cd},     {"d_is", sig.d_is},
                {"d_hist", sig.d_hist}, {"d_env", sig.d_env},
                {"d_char", sig.d_char}, {"d_task", sig.d_task},
                {"n_states", sig.n_states}};
}

inline DimensionSignature signature_from_json(const json& j) {
    const std::string where = "signature";
    DimensionSignature sig;
    sig.d_l = detail::require(j, "d_l", where).get<int>();
    sig.d_ac = detail::require(j, "d_ac", where).get<int>();
    sig.d_cd = detail::require(j, "d_cd", where).get<int>();
    sig.d_is = detail::require(j, "d_is", where).get<int>();
    sig.d_hist = detail::require(j, "d_hist", where).get<int>();
    sig.d_env = detail::require(j, "d_env", where).get<int>();
    sig.d_char = detail::require(j, "d_char", where).get<int>();
    sig.d_task = detail::require(j, "d_task", where).get<int>();
    sig.n_states = detail::require(j, "n_states", where).get<int>();
    sig.validate();
    return sig;
}

// ---------------------------------------------------------------------
// observation / context records

inline json observation_to_json(const ObservationVector& o) {
    return json{{"v_l", o.v_l}, {"v_ac", o.v_ac}, {"v_cd", o.v_cd},
                {"v_is", o.v_is}};
}

inline ObservationVector observation_from_json(const json& j,
                                               const std::string& where) {
    ObservationVector o;
    o.v_l = detail::doubles(detail::require(j, "v_l", where), where + ".v_l");
    o.v_ac = detail::doubles(detail::require(j, "v_ac", where), where + ".v_ac");
    o.v_cd = detail::doubles(detail::require(j, "v_cd", where), where + ".v_cd");
    o.v_is = detail::doubles(detail::require(j, "v_is", where), where + ".v_is");
    return o;
}

inline json context_to_json(const ContextVector& c) {
    return json{{"c_hist", c.c_hist}, {"c_env", c.c_env}, {"c_char", c.c_char},
                {"c_task", c.c_task}};
}

inline ContextVector context_from_json(const json& j,
                                       const std::string& where) {
    ContextVector c;
    c.c_hist =
        detail::doubles(detail::require(j, "c_hist", where), where + ".c_hist");
    c.c_env =
        detail::doubles(detail::require(j, "c_env", where), where + ".c_env");
    c.c_char =
        detail::doubles(detail::require(j, "c_char", where), where + ".c_char");
    c.c_task =
        detail::doubles(detail::require(j, "c_task", where), where + ".c_task");
    return c;
}

// ---------------------------------------------------------------------
// dataset (JSON Lines, one sequence per line)

inline json sequence_to_json(const LabeledSequence& seq) {
    json obs = json::array();
    for (const auto& o : seq.observations) obs.push_back(observation_to_json(o));
    json ctx = json::array();
    for (const auto& c : seq.contexts) ctx.push_back(context_to_json(c));
    json j{{"id", seq.id}, {"obs", std::move(obs)}, {"ctx", std::move(ctx)}};
    if (seq.has_states()) j["states"] = seq.states;
    return j;
}

inline LabeledSequence sequence_from_json(const json& j,
                                          const std::string& where) {
    LabeledSequence seq;
    seq.id = detail::require(j, "id", where).get<std::string>();
    const json& obs = detail::require(j, "obs", where);
    ensure(obs.is_array(), where + ".obs: expected an array");
    for (size_t t = 0; t < obs.size(); ++t) {
        seq.observations.push_back(observation_from_json(
            obs[t], where + ".obs[" + std::to_string(t) + "]"));
    }
    const json& ctx = detail::require(j, "ctx", where);
    ensure(ctx.is_array(), where + ".ctx: expected an array");
    for (size_t t = 0; t < ctx.size(); ++t) {
        seq.contexts.push_back(context_from_json(
            ctx[t], where + ".ctx[" + std::to_string(t) + "]"));
    }
    if (j.contains("states")) {
        seq.states = detail::ints(j["states"], where + ".states");
    }
    return seq;
}

inline void write_dataset(const std::string& path,
                          std::span<const LabeledSequence> sequences) {
    std::string out;
    for (const auto& seq : sequences) {
        out += sequence_to_json(seq).dump();
        out += '\n';
    }
    write_text_file(path, out);
}

inline std::vector<LabeledSequence> read_dataset(const std::string& path) {
    std::string text = read_text_file(path);
    std::vector<LabeledSequence> out;
    size_t start = 0;
    size_t line_no = 0;
    while (start < text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        ++line_no;
        std::string_view line(text.data() + start, end - start);
        start = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        std::string where = path + ":" + std::to_string(line_no);
        json j = parse_json(std::string(line), where);
        out.push_back(sequence_from_json(j, where));
    }
    return out;
}

// ---------------------------------------------------------------------
// scorer nets and model checkpoints

inline json scorer_to_json(const ScorerNet& net) {
    return json{{"w1", net.w1}, {"b1", net.b1}, {"w2", net.w2}, {"b2", net.b2}};
}

inline ScorerNet scorer_from_json(const json& j, const std::string& where) {
    ScorerNet net;
    net.w1 = detail::matrix(detail::require(j, "w1", where), where + ".w1");
    net.b1 = detail::doubles(detail::require(j, "b1", where), where + ".b1");
    net.w2 = detail::doubles(detail::require(j, "w2", where), where + ".w2");
    net.b2 = detail::require(j, "b2", where).get<double>();
    return net;
}

inline constexpr int k_model_version = 1;

inline json model_to_json(const BossModel& model) {
    return json{{"version", k_model_version},
                {"signature", signature_to_json(model.signature)},
                {"labels", model.labels},
                {"pi", model.pi},
                {"trans", model.trans},
                {"net_e", scorer_to_json(model.net_e)},
                {"net_p", scorer_to_json(model.net_p)},
                {"epsilon_effort", k_epsilon_effort}};
}

inline BossModel model_from_json(const json& j) {
    const std::string where = "model";
    int version = detail::require(j, "version", where).get<int>();
    ensure(version == k_model_version,
           "model: unsupported version " + std::to_string(version));
    BossModel model;
    model.signature = signature_from_json(detail::require(j, "signature", where));
    model.labels =
        detail::strings(detail::require(j, "labels", where), where + ".labels");
    model.pi = detail::doubles(detail::require(j, "pi", where), where + ".pi");
    model.trans =
        detail::matrix(detail::require(j, "trans", where), where + ".trans");
    model.net_e = scorer_from_json(detail::require(j, "net_e", where),
                                   where + ".net_e");
    model.net_p = scorer_from_json(detail::require(j, "net_p", where),
                                   where + ".net_p");
    if (j.contains("epsilon_effort")) {
        double eps = j["epsilon_effort"].get<double>();
        ensure(eps == k_epsilon_effort,
               "model: epsilon_effort " + std::to_string(eps) +
                   " differs from the built-in constant");
    }
    model.validate();
    return model;
}

inline void save_model(const std::string& path, const BossModel& model) {
    write_json_file(path, model_to_json(model));
}

inline BossModel load_model(const std::string& path) {
    return model_from_json(read_json_file(path));
}

// ---------------------------------------------------------------------
// generator truth

inline json truth_to_json(const synth::GeneratorTruth& truth) {
    json means = json::array();
    for (const auto& m : truth.means) means.push_back(observation_to_json(m));
    return json{{"signature", signature_to_json(truth.signature)},
                {"labels", truth.labels},
                {"pi", truth.pi},
                {"trans", truth.trans},
                {"means", std::move(means)},
                {"sigma", truth.sigma}};
}

inline synth::GeneratorTruth truth_from_json(const json& j) {
    const std::string where = "truth";
    synth::GeneratorTruth truth;
    truth.signature = signature_from_json(detail::require(j, "signature", where));
    truth.labels =
        detail::strings(detail::require(j, "labels", where), where + ".labels");
    truth.pi = detail::doubles(detail::require(j, "pi", where), where + ".pi");
    truth.trans =
        detail::matrix(detail::require(j, "trans", where), where + ".trans");
    const json& means = detail::require(j, "means", where);
    ensure(means.is_array(), where + ".means: expected an array");
    for (size_t k = 0; k < means.size(); ++k) {
        truth.means.push_back(observation_from_json(
            means[k], where + ".means[" + std::to_string(k) + "]"));
    }
    truth.sigma = detail::require(j, "sigma", where).get<double>();
    ensure(std::isfinite(truth.sigma) && truth.sigma > 0.0,
           "truth: sigma must be > 0");
    ensure(static_cast<int>(truth.means.size()) == truth.signature.n_states,
           "truth: means count differs from n_states");
    for (const auto& m : truth.means) {
        validate_observation(m, truth.signature);
    }
    return truth;
}

inline void save_truth(const std::string& path,
                       const synth::GeneratorTruth& truth) {
    write_json_file(path, truth_to_json(truth));
}

inline synth::GeneratorTruth load_truth(const std::string& path) {
    return truth_from_json(read_json_file(path));
}

// ---------------------------------------------------------------------
// scenario / training configs (all fields optional, defaults fill in)

inline json scenario_to_json(const synth::ScenarioConfig& cfg) {
    return json{{"states", cfg.states},
                {"separation", cfg.separation},
                {"noise", cfg.noise},
                {"stickiness", cfg.stickiness},
                {"T", cfg.T},
                {"n_train", cfg.n_train},
                {"n_test", cfg.n_test},
                {"seed", cfg.seed},
                {"signature", signature_to_json(cfg.signature)},
                {"context_informative", cfg.context_informative}};
}

inline synth::ScenarioConfig scenario_from_json(const json& j) {
    const std::string where = "scenario config";
    ensure(j.is_object(), where + ": expected an object");
    synth::ScenarioConfig cfg;
    if (j.contains("signature")) {
        cfg.signature = signature_from_json(j["signature"]);
    }
    if (j.contains("states")) {
        cfg.states = detail::strings(j["states"], where + ".states");
    } else if (cfg.signature.n_states != static_cast<int>(cfg.states.size())) {
        // without an explicit list, fall back to generic labels
        cfg.states = default_state_labels(cfg.signature.n_states);
    }
    cfg.separation = j.value("separation", cfg.separation);
    cfg.noise = j.value("noise", cfg.noise);
    cfg.stickiness = j.value("stickiness", cfg.stickiness);
    cfg.T = j.value("T", cfg.T);
    cfg.n_train = j.value("n_train", cfg.n_train);
    cfg.n_test = j.value("n_test", cfg.n_test);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.context_informative =
        j.value("context_informative", cfg.context_informative);
    cfg.validate();
    return cfg;
}

inline json train_config_to_json(const train::TrainConfig& cfg) {
    return json{{"mode", cfg.mode == train::TrainConfig::Mode::supervised
                             ? "supervised"
                             : "em"},
                {"iterations", cfg.iterations},
                {"learning_rate", cfg.learning_rate},
                {"seed", cfg.seed},
                {"tolerance", cfg.tolerance},
                {"step_halving_max", cfg.step_halving_max},
                {"em_gradient_steps", cfg.em_gradient_steps}};
}

inline train::TrainConfig train_config_from_json(const json& j) {
    const std::string where = "train config";
    ensure(j.is_object(), where + ": expected an object");
    train::TrainConfig cfg;
    if (j.contains("mode")) {
        std::string mode = j["mode"].get<std::string>();
        if (mode == "supervised") {
            cfg.mode = train::TrainConfig::Mode::supervised;
        } else if (mode == "em") {
            cfg.mode = train::TrainConfig::Mode::em;
        } else {
            throw ValidationError(where + ": unknown mode '" + mode + "'");
        }
    }
    cfg.iterations = j.value("iterations", cfg.iterations);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.tolerance = j.value("tolerance", cfg.tolerance);
    cfg.step_halving_max = j.value("step_halving_max", cfg.step_halving_max);
    cfg.em_gradient_steps = j.value("em_gradient_steps", cfg.em_gradient_steps);
    cfg.validate();
    return cfg;
}

// ---------------------------------------------------------------------
// distribution / channel / score documents

inline info::DiscreteDistribution distribution_from_json(const json& j) {
    info::DiscreteDistribution d;
    d.probs = detail::doubles(detail::require(j, "probs", "distribution"),
                              "distribution.probs");
    d.validate();
    return d;
}

inline json distribution_to_json(const info::DiscreteDistribution& d) {
    return json{{"probs", d.probs}};
}

inline info::DiscreteChannel channel_from_json(const json& j) {
    const std::string where = "channel";
    info::DiscreteChannel ch;
    ch.input_marginal.probs = detail::doubles(
        detail::require(j, "input_marginal", where), where + ".input_marginal");
    auto rows = detail::matrix(detail::require(j, "rows", where), where + ".rows");
    ch.rows.reserve(rows.size());
    for (auto& row : rows) {
        ch.rows.push_back(info::DiscreteDistribution{std::move(row)});
    }
    ch.validate();
    return ch;
}

inline json channel_to_json(const info::DiscreteChannel& ch) {
    json rows = json::array();
    for (const auto& row : ch.rows) rows.push_back(row.probs);
    return json{{"input_marginal", ch.input_marginal.probs},
                {"rows", std::move(rows)}};
}

inline std::vector<info::DiscreteDistribution> q_rows_from_json(const json& j) {
    auto rows = detail::matrix(detail::require(j, "rows", "q document"),
                               "q document.rows");
    std::vector<info::DiscreteDistribution> out;
    out.reserve(rows.size());
    for (auto& row : rows) {
        out.push_back(info::DiscreteDistribution{std::move(row)});
        out.back().validate();
    }
    return out;
}

struct ScoreDocument {
    std::vector<score::ItemJudgments> items;
    // power in the document is optional; negative means "not given"
    double power = -1.0;
};

inline ScoreDocument score_document_from_json(const json& j) {
    const std::string where = "score document";
    ScoreDocument doc;
    const json& items = detail::require(j, "items", where);
    ensure(items.is_array(), where + ".items: expected an array");
    for (size_t i = 0; i < items.size(); ++i) {
        std::string item_where = where + ".items[" + std::to_string(i) + "]";
        score::ItemJudgments item;
        item.id = detail::require(items[i], "id", item_where).get<std::string>();
        item.scores = detail::doubles(
            detail::require(items[i], "scores", item_where),
            item_where + ".scores");
        doc.items.push_back(std::move(item));
    }
    if (j.contains("power")) {
        doc.power = j["power"].get<double>();
    }
    return doc;
}

inline json score_report_to_json(const score::ScoreReport& report) {
    json items = json::array();
    for (const auto& item : report.items) {
        items.push_back(json{{"id", item.id},
                             {"mean_raw", item.mean_raw},
                             {"scaled", item.scaled}});
    }
    return json{{"items", std::move(items)},
                {"power", report.power},
                {"overall", report.overall}};
}

}  // namespace boss::io
