#pragma once

// Synthetic beyond-semantic scenario datasets with known ground truth, and
// the exact Bayes decoder under the true generative parameters.
//
// State-conditional observation means follow a fixed coordinate map:
//   "literal"   v_l[0] = +d   v_ac[0] = +d    (lexical and affect agree)
//   "sarcastic" v_l[0] = +d   v_ac[0] = -d    (cross-channel mismatch)
//   "hesitant"  v_cd[0] = +d                  (pause coordinate)
//   "emphatic"  v_ac[1] = +d                  (energy coordinate)
// Any other label k places +d at v_is[k mod d_is]. All remaining
// coordinates are zero. d is the separation parameter.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "boss/common.hpp"
#include "boss/hmm.hpp"
#include "boss/vectors.hpp"

namespace boss::synth {

inline DimensionSignature default_signature() {
    DimensionSignature sig;
    sig.d_l = 8;
    sig.d_ac = 4;
    sig.d_cd = 4;
    sig.d_is = 4;
    sig.d_hist = 4;
    sig.d_env = 4;
    sig.d_char = 4;
    sig.d_task = 4;
    sig.n_states = 4;
    return sig;
}

inline std::vector<std::string> default_state_set() {
    return {"literal", "sarcastic", "hesitant", "emphatic"};
}

struct ScenarioConfig {
    std::vector<std::string> states = default_state_set();
    double separation = 2.0;  // distance between state-conditional means
    double noise = 0.5;       // emission standard deviation
    double stickiness = 0.7;  // self-transition probability
    int T = 20;
    int n_train = 500;
    int n_test = 200;
    uint64_t seed = 0;
    DimensionSignature signature = default_signature();
    // When set, c_hist carries the current state at every step, making the
    // context channels informative instead of inert.
    bool context_informative = false;

    void validate() const {
        signature.validate();
        ensure(static_cast<int>(states.size()) == signature.n_states,
               "scenario: states list length must equal signature n_states");
        // separation 0 is the documented indistinguishable-states limit
        ensure(std::isfinite(separation) && separation >= 0.0,
               "scenario: separation must be >= 0");
        ensure(std::isfinite(noise) && noise > 0.0,
               "scenario: noise must be > 0");
        ensure(stickiness > 0.0 && stickiness < 1.0,
               "scenario: stickiness must lie in (0, 1)");
        ensure(T >= 1, "scenario: T must be >= 1");
        ensure(n_train >= 0 && n_test >= 0,
               "scenario: sequence counts must be >= 0");
        for (size_t k = 0; k < states.size(); ++k) {
            if (states[k] == "emphatic") {
                ensure(signature.d_ac >= 2,
                       "scenario: label emphatic needs d_ac >= 2");
            }
        }
    }
};

// True chain parameters and state-conditional emission means.
struct GeneratorTruth {
    std::vector<double> pi;
    std::vector<std::vector<double>> trans;
    std::vector<ObservationVector> means;  // one per state
    double sigma = 1.0;
    std::vector<std::string> labels;
    DimensionSignature signature;
};

inline ObservationVector state_mean(const std::string& label, int state_index,
                                    double separation,
                                    const DimensionSignature& sig) {
    ObservationVector mean = zero_observation(sig);
    if (label == "literal") {
        mean.v_l[0] = separation;
        mean.v_ac[0] = separation;
    } else if (label == "sarcastic") {
        mean.v_l[0] = separation;
        mean.v_ac[0] = -separation;
    } else if (label == "hesitant") {
        mean.v_cd[0] = separation;
    } else if (label == "emphatic") {
        mean.v_ac[1] = separation;
    } else {
        mean.v_is[state_index % sig.d_is] = separation;
    }
    return mean;
}

// Deterministic truth construction: uniform initial distribution, sticky
// transition matrix, coordinate-map means.
inline GeneratorTruth build_truth(const ScenarioConfig& cfg) {
    cfg.validate();
    const int n = cfg.signature.n_states;
    GeneratorTruth truth;
    truth.signature = cfg.signature;
    truth.labels = cfg.states;
    truth.sigma = cfg.noise;
    truth.pi.assign(static_cast<size_t>(n), 1.0 / n);
    double off_diagonal = (1.0 - cfg.stickiness) / (n - 1);
    truth.trans.assign(static_cast<size_t>(n),
                       std::vector<double>(static_cast<size_t>(n), off_diagonal));
    for (int i = 0; i < n; ++i) truth.trans[i][i] = cfg.stickiness;
    truth.means.reserve(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        truth.means.push_back(
            state_mean(cfg.states[k], k, cfg.separation, cfg.signature));
    }
    return truth;
}

namespace detail {

inline std::string sequence_id(const char* split, int i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s-%04d", split, i);
    return buf;
}

// One sequence, reproducible from (seed, global index) alone. Draw order:
// states, then the per-sequence environment offset, then per-step
// observation noise channel by channel.
inline LabeledSequence generate_sequence(const ScenarioConfig& cfg,
                                         const GeneratorTruth& truth,
                                         const std::string& id,
                                         uint64_t global_index) {
    Rng rng(derive_seed(cfg.seed, global_index));
    LabeledSequence seq;
    seq.id = id;

    seq.states.resize(static_cast<size_t>(cfg.T));
    seq.states[0] = rng.categorical(truth.pi);
    for (int t = 1; t < cfg.T; ++t) {
        seq.states[t] = rng.categorical(truth.trans[seq.states[t - 1]]);
    }

    ContextVector shared = zero_context(cfg.signature);
    for (double& v : shared.c_env) v = rng.normal();
    if (cfg.context_informative) {
        seq.contexts.reserve(static_cast<size_t>(cfg.T));
        for (int t = 0; t < cfg.T; ++t) {
            ContextVector ctx = shared;
            ctx.c_hist[seq.states[t] % cfg.signature.d_hist] = cfg.separation;
            seq.contexts.push_back(std::move(ctx));
        }
    } else {
        seq.contexts.push_back(std::move(shared));
    }

    seq.observations.reserve(static_cast<size_t>(cfg.T));
    for (int t = 0; t < cfg.T; ++t) {
        ObservationVector obs = truth.means[seq.states[t]];
        for (auto* channel : {&obs.v_l, &obs.v_ac, &obs.v_cd, &obs.v_is}) {
            for (double& v : *channel) v += cfg.noise * rng.normal();
        }
        seq.observations.push_back(std::move(obs));
    }
    return seq;
}

}  // namespace detail

struct SyntheticDataset {
    std::vector<LabeledSequence> train;
    std::vector<LabeledSequence> test;
    GeneratorTruth truth;
};

// Train sequences use stream indices [0, n_train), test sequences
// [n_train, n_train + n_test), so any sequence can be regenerated alone.
inline SyntheticDataset generate_dataset(const ScenarioConfig& cfg) {
    cfg.validate();
    SyntheticDataset data;
    data.truth = build_truth(cfg);
    data.train.reserve(static_cast<size_t>(cfg.n_train));
    for (int i = 0; i < cfg.n_train; ++i) {
        data.train.push_back(detail::generate_sequence(
            cfg, data.truth, detail::sequence_id("train", i),
            static_cast<uint64_t>(i)));
    }
    data.test.reserve(static_cast<size_t>(cfg.n_test));
    for (int i = 0; i < cfg.n_test; ++i) {
        data.test.push_back(detail::generate_sequence(
            cfg, data.truth, detail::sequence_id("test", i),
            static_cast<uint64_t>(cfg.n_train + i)));
    }
    return data;
}

// log N(flat(obs) | flat(mean_state), sigma^2 I)
inline double gaussian_log_emission(const GeneratorTruth& truth, int state,
                                    const ObservationVector& obs) {
    ensure(state >= 0 && state < static_cast<int>(truth.means.size()),
           "gaussian_log_emission: state out of range");
    auto x = flatten_observation(obs, truth.signature);
    auto mu = flatten_observation(truth.means[state]);
    double log_density = 0.0;
    const double log_norm =
        -std::log(truth.sigma) - 0.5 * std::log(2.0 * M_PI);
    for (size_t i = 0; i < x.size(); ++i) {
        double z = (x[i] - mu[i]) / truth.sigma;
        log_density += log_norm - 0.5 * z * z;
    }
    return log_density;
}

// Exact Viterbi under the true generative model with Gaussian emission
// log densities. Ties break toward the smaller state index.
inline std::vector<int> bayes_oracle_decode(const GeneratorTruth& truth,
                                            const LabeledSequence& seq) {
    const size_t T = seq.length();
    ensure(T >= 1, "bayes_oracle_decode: empty sequence");
    const int n = static_cast<int>(truth.means.size());
    for (const auto& o : seq.observations) {
        validate_observation(o, truth.signature);
    }

    std::vector<std::vector<double>> score(
        T, std::vector<double>(static_cast<size_t>(n)));
    std::vector<std::vector<int>> backptr(
        T, std::vector<int>(static_cast<size_t>(n), 0));
    for (int j = 0; j < n; ++j) {
        score[0][j] = boss::detail::safe_log(truth.pi[j]) +
                      gaussian_log_emission(truth, j, seq.observations[0]);
    }
    for (size_t t = 1; t < T; ++t) {
        for (int j = 0; j < n; ++j) {
            double best = -std::numeric_limits<double>::infinity();
            int best_prev = 0;
            for (int i = 0; i < n; ++i) {
                double cand =
                    score[t - 1][i] + boss::detail::safe_log(truth.trans[i][j]);
                if (cand > best) {
                    best = cand;
                    best_prev = i;
                }
            }
            score[t][j] =
                best + gaussian_log_emission(truth, j, seq.observations[t]);
            backptr[t][j] = best_prev;
        }
    }
    std::vector<int> path(T, 0);
    double best = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
        if (score[T - 1][j] > best) {
            best = score[T - 1][j];
            path[T - 1] = j;
        }
    }
    for (size_t t = T - 1; t > 0; --t) {
        path[t - 1] = backptr[t][path[t]];
    }
    return path;
}

struct AccuracyReport {
    double overall = 0.0;
    std::vector<double> per_state_recall;      // 0 when a state never occurs
    std::vector<int64_t> per_state_support;
};

inline AccuracyReport evaluate_accuracy(
    std::span<const std::vector<int>> decoded,
    std::span<const std::vector<int>> truth_paths, int n_states) {
    ensure(decoded.size() == truth_paths.size(),
           "evaluate_accuracy: sequence count mismatch");
    ensure(!decoded.empty(), "evaluate_accuracy: no sequences");
    ensure(n_states >= 1, "evaluate_accuracy: n_states must be >= 1");
    AccuracyReport report;
    report.per_state_recall.assign(static_cast<size_t>(n_states), 0.0);
    report.per_state_support.assign(static_cast<size_t>(n_states), 0);
    std::vector<int64_t> matches(static_cast<size_t>(n_states), 0);
    int64_t total = 0;
    int64_t total_matches = 0;
    for (size_t s = 0; s < decoded.size(); ++s) {
        ensure(decoded[s].size() == truth_paths[s].size(),
               "evaluate_accuracy: length mismatch in sequence " +
                   std::to_string(s));
        for (size_t t = 0; t < decoded[s].size(); ++t) {
            int truth_state = truth_paths[s][t];
            ensure(truth_state >= 0 && truth_state < n_states,
                   "evaluate_accuracy: truth state out of range");
            ++total;
            ++report.per_state_support[truth_state];
            if (decoded[s][t] == truth_state) {
                ++total_matches;
                ++matches[truth_state];
            }
        }
    }
    report.overall = static_cast<double>(total_matches) /
                     static_cast<double>(total);
    for (int j = 0; j < n_states; ++j) {
        if (report.per_state_support[j] > 0) {
            report.per_state_recall[j] =
                static_cast<double>(matches[j]) /
                static_cast<double>(report.per_state_support[j]);
        }
    }
    return report;
}

}  // namespace boss::synth
