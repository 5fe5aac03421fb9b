#pragma once

// Relevance scoring: cognitive effect and processing effort produced by
// small feedforward networks, their ratio, and the softmax emission
// distribution over meaning hypotheses built from those ratios.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "boss/common.hpp"
#include "boss/vectors.hpp"

namespace boss {

// Effort is kept strictly positive: softplus(raw) + k_epsilon_effort.
inline constexpr double k_epsilon_effort = 1e-3;

// Ratios are clamped to [-k_ratio_clamp, +k_ratio_clamp] before they are
// exponentiated. Only active in pathological regimes.
inline constexpr double k_ratio_clamp = 50.0;

// One-hidden-layer scoring network: w2 . tanh(w1 x + b1) + b2.
struct ScorerNet {
    std::vector<std::vector<double>> w1;  // hidden_width x input_dim
    std::vector<double> b1;               // hidden_width
    std::vector<double> w2;               // hidden_width
    double b2 = 0.0;

    int hidden_width() const { return static_cast<int>(w1.size()); }
    int input_dim() const {
        return w1.empty() ? 0 : static_cast<int>(w1.front().size());
    }

    void validate() const {
        ensure(!w1.empty(), "scorer: empty weight matrix");
        const size_t width = w1.size();
        const size_t dim = w1.front().size();
        ensure(dim >= 1, "scorer: input_dim must be >= 1");
        for (const auto& row : w1) {
            ensure(row.size() == dim, "scorer: ragged w1 rows");
            ensure(all_finite(row), "scorer: non-finite entry in w1");
        }
        ensure(b1.size() == width && w2.size() == width,
               "scorer: b1/w2 length must equal hidden width");
        ensure(all_finite(b1) && all_finite(w2) && std::isfinite(b2),
               "scorer: non-finite parameter");
    }
};

// All parameters drawn uniform in [-0.5, 0.5] / sqrt(input_dim).
inline ScorerNet make_scorer_net(int input_dim, int hidden_width, Rng& rng) {
    ensure(input_dim >= 1, "make_scorer_net: input_dim must be >= 1");
    ensure(hidden_width >= 1, "make_scorer_net: hidden_width must be >= 1");
    const double scale = 1.0 / std::sqrt(static_cast<double>(input_dim));
    ScorerNet net;
    net.w1.assign(hidden_width, std::vector<double>(input_dim, 0.0));
    net.b1.assign(hidden_width, 0.0);
    net.w2.assign(hidden_width, 0.0);
    for (auto& row : net.w1) {
        for (double& w : row) w = rng.uniform(-0.5, 0.5) * scale;
    }
    for (double& b : net.b1) b = rng.uniform(-0.5, 0.5) * scale;
    for (double& w : net.w2) w = rng.uniform(-0.5, 0.5) * scale;
    net.b2 = rng.uniform(-0.5, 0.5) * scale;
    return net;
}

inline ScorerNet zero_scorer_net(int input_dim, int hidden_width = 16) {
    ScorerNet net;
    net.w1.assign(hidden_width, std::vector<double>(input_dim, 0.0));
    net.b1.assign(hidden_width, 0.0);
    net.w2.assign(hidden_width, 0.0);
    net.b2 = 0.0;
    return net;
}

inline double scorer_forward(const ScorerNet& net, std::span<const double> x) {
    ensure(static_cast<int>(x.size()) == net.input_dim(),
           "scorer_forward: input length " + std::to_string(x.size()) +
               " does not match input_dim " + std::to_string(net.input_dim()));
    double out = net.b2;
    for (int h = 0; h < net.hidden_width(); ++h) {
        double pre = net.b1[h];
        const auto& row = net.w1[h];
        for (size_t i = 0; i < x.size(); ++i) pre += row[i] * x[i];
        out += net.w2[h] * std::tanh(pre);
    }
    return out;
}

// Overflow-safe softplus: log(1 + e^x) = max(x, 0) + log1p(e^-|x|).
inline double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

// Scorer input layout: one-hot hypothesis embedding | flat(o) | flat(c).
inline std::vector<double> scorer_input(int h_index,
                                        const ObservationVector& o,
                                        const ContextVector& c,
                                        const DimensionSignature& sig) {
    validate_observation(o, sig);
    validate_context(c, sig);
    std::vector<double> x = hypothesis_embedding(h_index, sig.n_states);
    x.reserve(sig.scorer_input_dim());
    auto obs = flatten_observation(o);
    auto ctx = flatten_context(c);
    x.insert(x.end(), obs.begin(), obs.end());
    x.insert(x.end(), ctx.begin(), ctx.end());
    return x;
}

inline double effect_score(const ScorerNet& net_e, int h_index,
                           const ObservationVector& o, const ContextVector& c,
                           const DimensionSignature& sig) {
    return scorer_forward(net_e, scorer_input(h_index, o, c, sig));
}

inline double effect_score(const ScorerNet& net_e, const Hypothesis& h,
                           const ObservationVector& o, const ContextVector& c,
                           const DimensionSignature& sig) {
    return effect_score(net_e, h.index, o, c, sig);
}

// Strictly positive by construction; the relevance ratio divides by it.
inline double effort_score(const ScorerNet& net_p, int h_index,
                           const ObservationVector& o, const ContextVector& c,
                           const DimensionSignature& sig) {
    double raw = scorer_forward(net_p, scorer_input(h_index, o, c, sig));
    return softplus(raw) + k_epsilon_effort;
}

inline double effort_score(const ScorerNet& net_p, const Hypothesis& h,
                           const ObservationVector& o, const ContextVector& c,
                           const DimensionSignature& sig) {
    return effort_score(net_p, h.index, o, c, sig);
}

// Relevance R = effect / effort, clamped for downstream exp safety.
inline double relevance_ratio(double effect, double effort) {
    ensure(std::isfinite(effect), "relevance_ratio: non-finite effect");
    ensure(std::isfinite(effort) && effort > 0.0,
           "relevance_ratio: effort must be strictly positive");
    return std::clamp(effect / effort, -k_ratio_clamp, k_ratio_clamp);
}

struct RelevanceScores {
    double effect = 0.0;
    double effort = 0.0;
    double ratio = 0.0;
};

inline RelevanceScores score_hypothesis(const ScorerNet& net_e,
                                        const ScorerNet& net_p, int h_index,
                                        const ObservationVector& o,
                                        const ContextVector& c,
                                        const DimensionSignature& sig) {
    RelevanceScores s;
    s.effect = effect_score(net_e, h_index, o, c, sig);
    s.effort = effort_score(net_p, h_index, o, c, sig);
    s.ratio = relevance_ratio(s.effect, s.effort);
    return s;
}

// Shift-invariant softmax (max subtraction before exponentiation).
inline std::vector<double> softmax(std::span<const double> values) {
    ensure(!values.empty(), "softmax: empty input");
    double max_value = *std::max_element(values.begin(), values.end());
    std::vector<double> out(values.size());
    double sum = 0.0;
    for (size_t i = 0; i < values.size(); ++i) {
        out[i] = std::exp(values[i] - max_value);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

// Relevance ratio per hypothesis, in hypothesis-index order.
inline std::vector<double> relevance_ratios(const ScorerNet& net_e,
                                            const ScorerNet& net_p,
                                            const ObservationVector& o,
                                            const ContextVector& c,
                                            const DimensionSignature& sig) {
    std::vector<double> ratios(static_cast<size_t>(sig.n_states));
    for (int j = 0; j < sig.n_states; ++j) {
        ratios[static_cast<size_t>(j)] =
            score_hypothesis(net_e, net_p, j, o, c, sig).ratio;
    }
    return ratios;
}

// Softmax over relevance ratios: P(O | H = H_j) for each j.
inline std::vector<double> emission_distribution(const ScorerNet& net_e,
                                                 const ScorerNet& net_p,
                                                 const ObservationVector& o,
                                                 const ContextVector& c,
                                                 const DimensionSignature& sig) {
    return softmax(relevance_ratios(net_e, net_p, o, c, sig));
}

}  // namespace boss
