#pragma once

// Temporal inference over hidden beyond-semantic states: Viterbi decoding,
// forward-backward posteriors, and sequence likelihoods. All recursions run
// in log space with log-sum-exp.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "boss/common.hpp"
#include "boss/relevance.hpp"
#include "boss/vectors.hpp"

namespace boss {

inline constexpr double k_distribution_tolerance = 1e-9;

// Complete generative/inference model: initial distribution, transition
// matrix, and the effect/effort scoring networks behind the emissions.
struct BossModel {
    DimensionSignature signature;
    std::vector<double> pi;                 // initial state distribution
    std::vector<std::vector<double>> trans; // row-stochastic, n x n
    ScorerNet net_e;
    ScorerNet net_p;
    std::vector<std::string> labels;

    int n_states() const { return signature.n_states; }

    void validate() const {
        signature.validate();
        const size_t n = static_cast<size_t>(signature.n_states);
        ensure(pi.size() == n, "model: pi length must equal n_states");
        ensure(trans.size() == n, "model: trans must have n_states rows");
        check_distribution(pi, "pi");
        for (size_t i = 0; i < n; ++i) {
            ensure(trans[i].size() == n, "model: trans row " +
                                             std::to_string(i) +
                                             " has wrong length");
            check_distribution(trans[i], "trans row " + std::to_string(i));
        }
        net_e.validate();
        net_p.validate();
        ensure(net_e.input_dim() == signature.scorer_input_dim(),
               "model: net_e input_dim does not match signature");
        ensure(net_p.input_dim() == signature.scorer_input_dim(),
               "model: net_p input_dim does not match signature");
        ensure(labels.size() == n, "model: labels length must equal n_states");
    }

private:
    static void check_distribution(std::span<const double> probs,
                                   const std::string& name) {
        double sum = 0.0;
        for (double p : probs) {
            ensure(std::isfinite(p) && p >= 0.0,
                   "model: " + name + " has a negative or non-finite entry");
            sum += p;
        }
        ensure(std::abs(sum - 1.0) <= k_distribution_tolerance,
               "model: " + name + " sums to " + std::to_string(sum) +
                   ", expected 1");
    }
};

inline std::vector<std::string> default_state_labels(int n_states) {
    std::vector<std::string> labels;
    labels.reserve(static_cast<size_t>(n_states));
    for (int i = 0; i < n_states; ++i) {
        labels.push_back("state" + std::to_string(i));
    }
    return labels;
}

// Uniform chain parameters plus seeded scorer networks.
inline BossModel random_model(const DimensionSignature& sig, uint64_t seed,
                              std::vector<std::string> labels = {},
                              int hidden_width = 16) {
    sig.validate();
    const int n = sig.n_states;
    BossModel model;
    model.signature = sig;
    model.pi.assign(static_cast<size_t>(n), 1.0 / n);
    model.trans.assign(static_cast<size_t>(n),
                       std::vector<double>(static_cast<size_t>(n), 1.0 / n));
    Rng rng(derive_seed(seed, 0));
    model.net_e = make_scorer_net(sig.scorer_input_dim(), hidden_width, rng);
    model.net_p = make_scorer_net(sig.scorer_input_dim(), hidden_width, rng);
    model.labels = labels.empty() ? default_state_labels(n) : std::move(labels);
    return model;
}

// Time-indexed series of (observation, context) pairs. The context track
// either holds one record shared by all timesteps or one per timestep.
// Ground-truth states are optional.
struct LabeledSequence {
    std::string id;
    std::vector<ObservationVector> observations;
    std::vector<ContextVector> contexts;
    std::vector<int> states;

    size_t length() const { return observations.size(); }
    bool has_states() const { return !states.empty(); }

    const ContextVector& context_at(size_t t) const {
        return contexts.size() == 1 ? contexts.front() : contexts[t];
    }

    void validate(const DimensionSignature& sig) const {
        ensure(!observations.empty(), "sequence " + id + ": empty");
        ensure(contexts.size() == 1 || contexts.size() == observations.size(),
               "sequence " + id + ": context track must have length 1 or T");
        for (const auto& o : observations) validate_observation(o, sig);
        for (const auto& c : contexts) validate_context(c, sig);
        if (!states.empty()) {
            ensure(states.size() == observations.size(),
                   "sequence " + id + ": state track length mismatch");
            for (int s : states) {
                ensure(s >= 0 && s < sig.n_states,
                       "sequence " + id + ": state index out of range");
            }
        }
    }
};

inline std::vector<double> relevance_ratios(const BossModel& model,
                                            const ObservationVector& o,
                                            const ContextVector& c) {
    return relevance_ratios(model.net_e, model.net_p, o, c, model.signature);
}

inline std::vector<double> emission_distribution(const BossModel& model,
                                                 const ObservationVector& o,
                                                 const ContextVector& c) {
    return emission_distribution(model.net_e, model.net_p, o, c,
                                 model.signature);
}

// log P(O | H = H_j) for each j: ratios minus their log-sum-exp.
inline std::vector<double> emission_log_probs(const BossModel& model,
                                              const ObservationVector& o,
                                              const ContextVector& c) {
    std::vector<double> ratios = relevance_ratios(model, o, c);
    double lse = log_sum_exp(ratios);
    for (double& r : ratios) r -= lse;
    return ratios;
}

struct DecodedSequence {
    std::vector<int> states;
    double log_prob = 0.0;
    std::vector<std::vector<double>> posteriors;  // empty unless requested
};

namespace detail {

inline double safe_log(double p) {
    return p > 0.0 ? std::log(p)
                   : -std::numeric_limits<double>::infinity();
}

// T x n matrix of emission log probabilities for a whole sequence.
inline std::vector<std::vector<double>> emission_log_matrix(
    const BossModel& model, const LabeledSequence& seq) {
    std::vector<std::vector<double>> logb;
    logb.reserve(seq.length());
    for (size_t t = 0; t < seq.length(); ++t) {
        logb.push_back(
            emission_log_probs(model, seq.observations[t], seq.context_at(t)));
    }
    return logb;
}

}  // namespace detail

// Maximum-joint-log-probability state path. Ties break toward the smaller
// state index at every dynamic-programming cell, which makes the decoded
// path deterministic across platforms.
inline DecodedSequence viterbi(const BossModel& model,
                               const LabeledSequence& seq) {
    model.validate();
    seq.validate(model.signature);
    const size_t T = seq.length();
    const int n = model.n_states();
    const auto logb = detail::emission_log_matrix(model, seq);

    std::vector<std::vector<double>> score(
        T, std::vector<double>(static_cast<size_t>(n)));
    std::vector<std::vector<int>> backptr(
        T, std::vector<int>(static_cast<size_t>(n), 0));

    for (int j = 0; j < n; ++j) {
        score[0][j] = detail::safe_log(model.pi[j]) + logb[0][j];
    }
    for (size_t t = 1; t < T; ++t) {
        for (int j = 0; j < n; ++j) {
            double best = -std::numeric_limits<double>::infinity();
            int best_prev = 0;
            for (int i = 0; i < n; ++i) {
                double cand = score[t - 1][i] + detail::safe_log(model.trans[i][j]);
                if (cand > best) {  // strict: first (lowest) index wins ties
                    best = cand;
                    best_prev = i;
                }
            }
            score[t][j] = best + logb[t][j];
            backptr[t][j] = best_prev;
        }
    }

    DecodedSequence decoded;
    decoded.states.assign(T, 0);
    double best = -std::numeric_limits<double>::infinity();
    int best_state = 0;
    for (int j = 0; j < n; ++j) {
        if (score[T - 1][j] > best) {
            best = score[T - 1][j];
            best_state = j;
        }
    }
    decoded.log_prob = best;
    decoded.states[T - 1] = best_state;
    for (size_t t = T - 1; t > 0; --t) {
        decoded.states[t - 1] = backptr[t][decoded.states[t]];
    }
    return decoded;
}

struct ForwardBackwardResult {
    std::vector<std::vector<double>> posteriors;  // T x n, rows sum to 1
    double log_likelihood = 0.0;           // from the forward terminal
    double log_likelihood_backward = 0.0;  // from the backward initial
};

namespace detail {

inline std::vector<std::vector<double>> forward_pass(
    const BossModel& model, const std::vector<std::vector<double>>& logb) {
    const size_t T = logb.size();
    const int n = model.n_states();
    std::vector<std::vector<double>> alpha(
        T, std::vector<double>(static_cast<size_t>(n)));
    for (int j = 0; j < n; ++j) {
        alpha[0][j] = safe_log(model.pi[j]) + logb[0][j];
    }
    std::vector<double> terms(static_cast<size_t>(n));
    for (size_t t = 1; t < T; ++t) {
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                terms[i] = alpha[t - 1][i] + safe_log(model.trans[i][j]);
            }
            alpha[t][j] = log_sum_exp(terms) + logb[t][j];
        }
    }
    return alpha;
}

inline std::vector<std::vector<double>> backward_pass(
    const BossModel& model, const std::vector<std::vector<double>>& logb) {
    const size_t T = logb.size();
    const int n = model.n_states();
    std::vector<std::vector<double>> beta(
        T, std::vector<double>(static_cast<size_t>(n), 0.0));
    std::vector<double> terms(static_cast<size_t>(n));
    for (size_t t = T - 1; t > 0; --t) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                terms[j] =
                    safe_log(model.trans[i][j]) + logb[t][j] + beta[t][j];
            }
            beta[t - 1][i] = log_sum_exp(terms);
        }
    }
    return beta;
}

}  // namespace detail

// Per-step state marginals and the total observation log likelihood.
inline ForwardBackwardResult forward_backward(const BossModel& model,
                                              const LabeledSequence& seq) {
    model.validate();
    seq.validate(model.signature);
    const size_t T = seq.length();
    const int n = model.n_states();
    const auto logb = detail::emission_log_matrix(model, seq);
    const auto alpha = detail::forward_pass(model, logb);
    const auto beta = detail::backward_pass(model, logb);

    ForwardBackwardResult result;
    result.log_likelihood = log_sum_exp(alpha[T - 1]);

    std::vector<double> initial(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        initial[j] = detail::safe_log(model.pi[j]) + logb[0][j] + beta[0][j];
    }
    result.log_likelihood_backward = log_sum_exp(initial);

    result.posteriors.assign(T, std::vector<double>(static_cast<size_t>(n)));
    std::vector<double> row(static_cast<size_t>(n));
    for (size_t t = 0; t < T; ++t) {
        for (int j = 0; j < n; ++j) row[j] = alpha[t][j] + beta[t][j];
        double norm = log_sum_exp(row);
        for (int j = 0; j < n; ++j) {
            result.posteriors[t][j] = std::exp(row[j] - norm);
        }
    }
    return result;
}

// Joint log probability of a given state path and the observations.
inline double sequence_log_likelihood(const BossModel& model,
                                      const LabeledSequence& seq,
                                      std::span<const int> states) {
    model.validate();
    seq.validate(model.signature);
    ensure(states.size() == seq.length(),
           "sequence_log_likelihood: path length mismatch");
    for (int s : states) {
        ensure(s >= 0 && s < model.n_states(),
               "sequence_log_likelihood: state index out of range");
    }
    const auto logb = detail::emission_log_matrix(model, seq);
    double total = detail::safe_log(model.pi[states[0]]) + logb[0][states[0]];
    for (size_t t = 1; t < states.size(); ++t) {
        total += detail::safe_log(model.trans[states[t - 1]][states[t]]);
        total += logb[t][states[t]];
    }
    return total;
}

// State-path sampling from the Markov chain. Emissions are scored against
// externally supplied observations in this framework, so the model cannot
// generate observations; the returned sequence carries zero observation
// vectors and the sampled states.
inline std::vector<int> sample_states(const BossModel& model, size_t T,
                                      Rng& rng) {
    ensure(T >= 1, "sample_states: T must be >= 1");
    std::vector<int> states(T);
    states[0] = rng.categorical(model.pi);
    for (size_t t = 1; t < T; ++t) {
        states[t] = rng.categorical(model.trans[states[t - 1]]);
    }
    return states;
}

inline LabeledSequence sample_sequence(const BossModel& model,
                                       std::vector<ContextVector> contexts,
                                       size_t T, uint64_t seed) {
    model.validate();
    Rng rng(seed);
    LabeledSequence seq;
    seq.id = "sampled";
    seq.states = sample_states(model, T, rng);
    seq.observations.assign(T, zero_observation(model.signature));
    seq.contexts = contexts.empty()
                       ? std::vector<ContextVector>{zero_context(model.signature)}
                       : std::move(contexts);
    seq.validate(model.signature);
    return seq;
}

}  // namespace boss
