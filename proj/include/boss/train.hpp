#pragma once

// Parameter estimation. Supervised fitting uses closed-form smoothed counts
// for the chain parameters and gradient ascent on the emission term;
// unsupervised fitting is generalized EM (forward-backward E-step,
// closed-form chain M-step, a few gradient steps for the scorer networks).
// Gradients are hand-derived; gradient_check compares them against central
// finite differences.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "boss/common.hpp"
#include "boss/hmm.hpp"
#include "boss/relevance.hpp"

namespace boss::train {

// Accepted iterations may decrease the objective by at most this much.
inline constexpr double k_monotonicity_slack = 1e-6;

struct TrainConfig {
    enum class Mode { supervised, em };

    Mode mode = Mode::supervised;
    int iterations = 100;
    double learning_rate = 0.1;
    uint64_t seed = 0;
    // Convergence: |delta LL| < tolerance * sequence count.
    double tolerance = 1e-6;
    int step_halving_max = 20;
    // Gradient steps per EM outer iteration (the generalized M-step).
    int em_gradient_steps = 5;

    void validate() const {
        ensure(iterations >= 1, "train config: iterations must be >= 1");
        ensure(learning_rate > 0.0, "train config: learning_rate must be > 0");
        ensure(tolerance > 0.0, "train config: tolerance must be > 0");
        ensure(step_halving_max >= 0,
               "train config: step_halving_max must be >= 0");
        ensure(em_gradient_steps >= 1,
               "train config: em_gradient_steps must be >= 1");
    }
};

struct TrainReport {
    std::vector<double> log_likelihood_trace;  // one entry per accepted iteration
    bool converged = false;
    double final_ll = 0.0;
};

// Gradient record with the same shape as a ScorerNet.
struct ScorerGradient {
    std::vector<std::vector<double>> w1;
    std::vector<double> b1;
    std::vector<double> w2;
    double b2 = 0.0;

    static ScorerGradient zeros_like(const ScorerNet& net) {
        ScorerGradient g;
        g.w1.assign(net.w1.size(),
                    std::vector<double>(net.w1.front().size(), 0.0));
        g.b1.assign(net.b1.size(), 0.0);
        g.w2.assign(net.w2.size(), 0.0);
        return g;
    }

    void scale(double factor) {
        for (auto& row : w1) {
            for (double& v : row) v *= factor;
        }
        for (double& v : b1) v *= factor;
        for (double& v : w2) v *= factor;
        b2 *= factor;
    }

    std::vector<double> flattened() const {
        std::vector<double> flat;
        for (const auto& row : w1) flat.insert(flat.end(), row.begin(), row.end());
        flat.insert(flat.end(), b1.begin(), b1.end());
        flat.insert(flat.end(), w2.begin(), w2.end());
        flat.push_back(b2);
        return flat;
    }
};

// net += step * grad
inline void apply_gradient(ScorerNet& net, const ScorerGradient& grad,
                           double step) {
    for (size_t h = 0; h < net.w1.size(); ++h) {
        for (size_t i = 0; i < net.w1[h].size(); ++i) {
            net.w1[h][i] += step * grad.w1[h][i];
        }
        net.b1[h] += step * grad.b1[h];
        net.w2[h] += step * grad.w2[h];
    }
    net.b2 += step * grad.b2;
}

// Parameter pointers in the flattening order used by ScorerGradient:
// w1 row-major, then b1, then w2, then b2.
inline std::vector<double*> parameter_pointers(ScorerNet& net) {
    std::vector<double*> ptrs;
    for (auto& row : net.w1) {
        for (double& v : row) ptrs.push_back(&v);
    }
    for (double& v : net.b1) ptrs.push_back(&v);
    for (double& v : net.w2) ptrs.push_back(&v);
    ptrs.push_back(&net.b2);
    return ptrs;
}

namespace detail {

// Scorer inputs for all hypotheses at one timestep.
using HypothesisInputs = std::vector<std::vector<double>>;

inline HypothesisInputs step_inputs(const DimensionSignature& sig,
                                    const ObservationVector& o,
                                    const ContextVector& c) {
    HypothesisInputs xs;
    xs.reserve(static_cast<size_t>(sig.n_states));
    for (int k = 0; k < sig.n_states; ++k) {
        xs.push_back(scorer_input(k, o, c, sig));
    }
    return xs;
}

// Values of one emission evaluation, kept for the backward pass.
struct EmissionEval {
    std::vector<double> effect;
    std::vector<double> raw_effort;
    std::vector<double> effort;
    std::vector<double> ratio;
    std::vector<double> prob;       // softmax(ratio)
    std::vector<bool> clamped;      // ratio clamp active for hypothesis k
    double log_normalizer = 0.0;    // log-sum-exp of ratios

    double log_prob(int j) const { return ratio[j] - log_normalizer; }
};

inline EmissionEval eval_emission(const ScorerNet& net_e,
                                  const ScorerNet& net_p,
                                  const HypothesisInputs& xs) {
    const size_t n = xs.size();
    EmissionEval ev;
    ev.effect.resize(n);
    ev.raw_effort.resize(n);
    ev.effort.resize(n);
    ev.ratio.resize(n);
    ev.clamped.resize(n);
    for (size_t k = 0; k < n; ++k) {
        ev.effect[k] = scorer_forward(net_e, xs[k]);
        ev.raw_effort[k] = scorer_forward(net_p, xs[k]);
        ev.effort[k] = softplus(ev.raw_effort[k]) + k_epsilon_effort;
        double raw_ratio = ev.effect[k] / ev.effort[k];
        ev.clamped[k] = std::abs(raw_ratio) > k_ratio_clamp;
        ev.ratio[k] = std::clamp(raw_ratio, -k_ratio_clamp, k_ratio_clamp);
    }
    ev.log_normalizer = log_sum_exp(ev.ratio);
    ev.prob = softmax(ev.ratio);
    return ev;
}

// Backprop one scorer evaluation: grad += coeff * d(net(x))/d(theta).
inline void accumulate_scorer_gradient(const ScorerNet& net,
                                       std::span<const double> x, double coeff,
                                       ScorerGradient& grad) {
    const int width = net.hidden_width();
    for (int h = 0; h < width; ++h) {
        double pre = net.b1[h];
        const auto& row = net.w1[h];
        for (size_t i = 0; i < x.size(); ++i) pre += row[i] * x[i];
        double hidden = std::tanh(pre);
        grad.w2[h] += coeff * hidden;
        double d_pre = coeff * net.w2[h] * (1.0 - hidden * hidden);
        grad.b1[h] += d_pre;
        auto& grow = grad.w1[h];
        for (size_t i = 0; i < x.size(); ++i) grow[i] += d_pre * x[i];
    }
    grad.b2 += coeff;
}

// Gradient of sum_j weights[j] * log P(O | H_j) with respect to both
// networks, accumulated into ge/gp. Derivation: with r_k = E_k / P_k,
// log P(O|H_j) = r_j - logsumexp(r), so d/dr_k of the weighted sum is
// weights[k] - (sum weights) * softmax(r)_k. Then
//   dr_k/dE_k      = 1 / P_k
//   dr_k/draw(P_k) = -E_k * sigmoid(raw) / P_k^2   (softplus chain)
// and zero through a clamped ratio. Returns the weighted objective value.
inline double accumulate_emission_gradient(
    const ScorerNet& net_e, const ScorerNet& net_p, const HypothesisInputs& xs,
    const EmissionEval& ev, std::span<const double> weights,
    ScorerGradient& ge, ScorerGradient& gp,
    std::vector<double>* effect_pass_weight = nullptr,
    std::vector<double>* effort_pass_weight = nullptr) {
    const size_t n = xs.size();
    double weight_total = 0.0;
    double objective = 0.0;
    for (size_t k = 0; k < n; ++k) {
        weight_total += weights[k];
        objective += weights[k] * ev.log_prob(static_cast<int>(k));
    }
    if (effect_pass_weight) effect_pass_weight->assign(n, 0.0);
    if (effort_pass_weight) effort_pass_weight->assign(n, 0.0);
    for (size_t k = 0; k < n; ++k) {
        double d_ratio = weights[k] - weight_total * ev.prob[k];
        if (ev.clamped[k]) continue;
        double effect_coeff = d_ratio / ev.effort[k];
        double effort_coeff = -d_ratio * ev.effect[k] *
                              sigmoid(ev.raw_effort[k]) /
                              (ev.effort[k] * ev.effort[k]);
        if (effect_pass_weight) (*effect_pass_weight)[k] = effect_coeff;
        if (effort_pass_weight) (*effort_pass_weight)[k] = effort_coeff;
        if (effect_coeff != 0.0) {
            accumulate_scorer_gradient(net_e, xs[k], effect_coeff, ge);
        }
        if (effort_coeff != 0.0) {
            accumulate_scorer_gradient(net_p, xs[k], effort_coeff, gp);
        }
    }
    return objective;
}

}  // namespace detail

// Gradient of log P(O | H_j) with respect to every parameter of both
// networks, with the per-hypothesis chain coefficients exposed:
// effect_pass_weight[k] multiplies d(effect_k)/d(theta_e) and
// effort_pass_weight[k] multiplies d(raw effort_k)/d(theta_p).
struct EmissionGradient {
    ScorerGradient net_e;
    ScorerGradient net_p;
    std::vector<double> effect_pass_weight;
    std::vector<double> effort_pass_weight;
    double log_prob = 0.0;
};

inline EmissionGradient grad_emission_log_prob(const BossModel& model,
                                               const ObservationVector& o,
                                               const ContextVector& c,
                                               int j) {
    model.validate();
    ensure(j >= 0 && j < model.n_states(),
           "grad_emission_log_prob: hypothesis index out of range");
    const auto xs = detail::step_inputs(model.signature, o, c);
    const auto ev = detail::eval_emission(model.net_e, model.net_p, xs);
    EmissionGradient grad;
    grad.net_e = ScorerGradient::zeros_like(model.net_e);
    grad.net_p = ScorerGradient::zeros_like(model.net_p);
    std::vector<double> weights(static_cast<size_t>(model.n_states()), 0.0);
    weights[static_cast<size_t>(j)] = 1.0;
    grad.log_prob = detail::accumulate_emission_gradient(
        model.net_e, model.net_p, xs, ev, weights, grad.net_e, grad.net_p,
        &grad.effect_pass_weight, &grad.effort_pass_weight);
    return grad;
}

// Add-one (Laplace) smoothed distribution from (possibly expected) counts.
inline std::vector<double> smoothed_distribution(
    std::span<const double> counts) {
    ensure(!counts.empty(), "smoothed_distribution: empty counts");
    double total = 0.0;
    for (double c : counts) {
        ensure(std::isfinite(c) && c >= 0.0,
               "smoothed_distribution: counts must be non-negative");
        total += c;
    }
    std::vector<double> probs(counts.size());
    double denom = total + static_cast<double>(counts.size());
    for (size_t i = 0; i < counts.size(); ++i) {
        probs[i] = (counts[i] + 1.0) / denom;
    }
    return probs;
}

namespace detail {

// Scorer inputs for every (sequence, timestep), built once per fit.
using DatasetInputs = std::vector<std::vector<HypothesisInputs>>;

inline DatasetInputs build_inputs(const DimensionSignature& sig,
                                  std::span<const LabeledSequence> data) {
    DatasetInputs inputs;
    inputs.reserve(data.size());
    for (const auto& seq : data) {
        std::vector<HypothesisInputs> steps;
        steps.reserve(seq.length());
        for (size_t t = 0; t < seq.length(); ++t) {
            steps.push_back(
                step_inputs(sig, seq.observations[t], seq.context_at(t)));
        }
        inputs.push_back(std::move(steps));
    }
    return inputs;
}

inline std::vector<std::vector<double>> emission_log_matrix_cached(
    const ScorerNet& net_e, const ScorerNet& net_p,
    const std::vector<HypothesisInputs>& steps) {
    std::vector<std::vector<double>> logb;
    logb.reserve(steps.size());
    for (const auto& xs : steps) {
        auto ev = eval_emission(net_e, net_p, xs);
        std::vector<double> row(xs.size());
        for (size_t j = 0; j < xs.size(); ++j) {
            row[j] = ev.log_prob(static_cast<int>(j));
        }
        logb.push_back(std::move(row));
    }
    return logb;
}

// Joint log probability of the labeled path, split so the chain part can
// be reused unchanged while the networks move.
inline double chain_log_likelihood(const BossModel& model,
                                   std::span<const LabeledSequence> data) {
    double total = 0.0;
    for (const auto& seq : data) {
        total += boss::detail::safe_log(model.pi[seq.states[0]]);
        for (size_t t = 1; t < seq.length(); ++t) {
            total += boss::detail::safe_log(
                model.trans[seq.states[t - 1]][seq.states[t]]);
        }
    }
    return total;
}

inline double labeled_emission_log_likelihood(
    const ScorerNet& net_e, const ScorerNet& net_p, const DatasetInputs& inputs,
    std::span<const LabeledSequence> data) {
    double total = 0.0;
    for (size_t s = 0; s < data.size(); ++s) {
        for (size_t t = 0; t < data[s].length(); ++t) {
            auto ev = eval_emission(net_e, net_p, inputs[s][t]);
            total += ev.log_prob(data[s].states[t]);
        }
    }
    return total;
}

inline double marginal_log_likelihood(const BossModel& model,
                                      const DatasetInputs& inputs) {
    double total = 0.0;
    for (const auto& steps : inputs) {
        auto logb = emission_log_matrix_cached(model.net_e, model.net_p, steps);
        auto alpha = boss::detail::forward_pass(model, logb);
        total += log_sum_exp(alpha.back());
    }
    return total;
}

}  // namespace detail

// Supervised fit: chain parameters from add-one smoothed empirical
// frequencies, scorer networks by monotone (step-halved) gradient ascent
// on the summed emission log likelihood. The trace records the full joint
// objective after each accepted iteration.
inline std::pair<BossModel, TrainReport> fit_supervised(
    BossModel model, std::span<const LabeledSequence> data,
    const TrainConfig& cfg) {
    cfg.validate();
    model.validate();
    ensure(!data.empty(), "fit_supervised: empty data");
    size_t total_steps = 0;
    for (const auto& seq : data) {
        seq.validate(model.signature);
        ensure(seq.has_states(),
               "fit_supervised: sequence " + seq.id + " is unlabeled");
        total_steps += seq.length();
    }
    const int n = model.n_states();

    std::vector<double> initial_counts(static_cast<size_t>(n), 0.0);
    std::vector<std::vector<double>> trans_counts(
        static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(n), 0.0));
    for (const auto& seq : data) {
        initial_counts[seq.states[0]] += 1.0;
        for (size_t t = 1; t < seq.length(); ++t) {
            trans_counts[seq.states[t - 1]][seq.states[t]] += 1.0;
        }
    }
    model.pi = smoothed_distribution(initial_counts);
    for (int i = 0; i < n; ++i) {
        model.trans[i] = smoothed_distribution(trans_counts[i]);
    }

    const auto inputs = detail::build_inputs(model.signature, data);
    const double chain_ll = detail::chain_log_likelihood(model, data);
    auto objective = [&](const ScorerNet& net_e, const ScorerNet& net_p) {
        return chain_ll + detail::labeled_emission_log_likelihood(
                              net_e, net_p, inputs, data);
    };

    TrainReport report;
    double obj_prev = objective(model.net_e, model.net_p);
    if (!std::isfinite(obj_prev)) {
        throw NumericError("fit_supervised: non-finite initial objective");
    }

    for (int iter = 0; iter < cfg.iterations; ++iter) {
        ScorerGradient ge = ScorerGradient::zeros_like(model.net_e);
        ScorerGradient gp = ScorerGradient::zeros_like(model.net_p);
        std::vector<double> weights(static_cast<size_t>(n), 0.0);
        for (size_t s = 0; s < data.size(); ++s) {
            for (size_t t = 0; t < data[s].length(); ++t) {
                auto ev = detail::eval_emission(model.net_e, model.net_p,
                                                inputs[s][t]);
                weights.assign(static_cast<size_t>(n), 0.0);
                weights[data[s].states[t]] = 1.0;
                detail::accumulate_emission_gradient(model.net_e, model.net_p,
                                                     inputs[s][t], ev, weights,
                                                     ge, gp);
            }
        }
        // learning_rate applies to the per-step mean gradient, so its
        // scale is independent of the dataset size
        ge.scale(1.0 / static_cast<double>(total_steps));
        gp.scale(1.0 / static_cast<double>(total_steps));

        double step = cfg.learning_rate;
        bool accepted = false;
        ScorerNet cand_e;
        ScorerNet cand_p;
        double obj_new = 0.0;
        for (int halving = 0; halving <= cfg.step_halving_max; ++halving) {
            cand_e = model.net_e;
            cand_p = model.net_p;
            apply_gradient(cand_e, ge, step);
            apply_gradient(cand_p, gp, step);
            obj_new = objective(cand_e, cand_p);
            if (!std::isfinite(obj_new)) {
                throw NumericError("fit_supervised: non-finite objective");
            }
            if (obj_new >= obj_prev - k_monotonicity_slack) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // no monotone step found; stop and flag

        model.net_e = std::move(cand_e);
        model.net_p = std::move(cand_p);
        report.log_likelihood_trace.push_back(obj_new);
        double delta = std::abs(obj_new - obj_prev);
        obj_prev = obj_new;
        if (delta < cfg.tolerance * static_cast<double>(data.size())) {
            report.converged = true;
            break;
        }
    }
    report.final_ll = report.log_likelihood_trace.empty()
                          ? obj_prev
                          : report.log_likelihood_trace.back();
    return {std::move(model), std::move(report)};
}

namespace detail {

struct ExpectedCounts {
    std::vector<double> initial;                   // expected gamma_1
    std::vector<std::vector<double>> transitions;  // expected xi sums
    // gamma[s][t][j]: posterior state marginals per sequence and step
    std::vector<std::vector<std::vector<double>>> gamma;
    double log_likelihood = 0.0;
};

inline ExpectedCounts e_step(const BossModel& model,
                             const DatasetInputs& inputs) {
    const int n = model.n_states();
    ExpectedCounts counts;
    counts.initial.assign(static_cast<size_t>(n), 0.0);
    counts.transitions.assign(static_cast<size_t>(n),
                              std::vector<double>(static_cast<size_t>(n), 0.0));
    counts.gamma.reserve(inputs.size());

    for (const auto& steps : inputs) {
        auto logb = emission_log_matrix_cached(model.net_e, model.net_p, steps);
        auto alpha = boss::detail::forward_pass(model, logb);
        auto beta = boss::detail::backward_pass(model, logb);
        const size_t T = logb.size();
        double ll = log_sum_exp(alpha[T - 1]);
        counts.log_likelihood += ll;

        std::vector<std::vector<double>> gamma(
            T, std::vector<double>(static_cast<size_t>(n)));
        std::vector<double> row(static_cast<size_t>(n));
        for (size_t t = 0; t < T; ++t) {
            for (int j = 0; j < n; ++j) row[j] = alpha[t][j] + beta[t][j];
            double norm = log_sum_exp(row);
            for (int j = 0; j < n; ++j) gamma[t][j] = std::exp(row[j] - norm);
        }
        for (int j = 0; j < n; ++j) counts.initial[j] += gamma[0][j];
        for (size_t t = 0; t + 1 < T; ++t) {
            for (int i = 0; i < n; ++i) {
                double base = alpha[t][i];
                for (int j = 0; j < n; ++j) {
                    counts.transitions[i][j] += std::exp(
                        base + boss::detail::safe_log(model.trans[i][j]) +
                        logb[t + 1][j] + beta[t + 1][j] - ll);
                }
            }
        }
        counts.gamma.push_back(std::move(gamma));
    }
    return counts;
}

// K gradient ascent steps on the expected emission log likelihood with
// the posteriors held fixed.
inline void em_gradient_steps(BossModel& model, const DatasetInputs& inputs,
                              const ExpectedCounts& counts, int k_steps,
                              double step, double total_steps) {
    for (int inner = 0; inner < k_steps; ++inner) {
        ScorerGradient ge = ScorerGradient::zeros_like(model.net_e);
        ScorerGradient gp = ScorerGradient::zeros_like(model.net_p);
        for (size_t s = 0; s < inputs.size(); ++s) {
            for (size_t t = 0; t < inputs[s].size(); ++t) {
                auto ev = eval_emission(model.net_e, model.net_p, inputs[s][t]);
                accumulate_emission_gradient(model.net_e, model.net_p,
                                             inputs[s][t], ev,
                                             counts.gamma[s][t], ge, gp);
            }
        }
        ge.scale(1.0 / total_steps);
        gp.scale(1.0 / total_steps);
        apply_gradient(model.net_e, ge, step);
        apply_gradient(model.net_p, gp, step);
    }
}

}  // namespace detail

// Generalized EM on unlabeled sequences. Each outer iteration runs the
// E-step, the closed-form smoothed chain update, and em_gradient_steps
// gradient steps on the scorer networks, then enforces monotone data log
// likelihood by step-halving. A violating iteration is rolled back.
inline std::pair<BossModel, TrainReport> fit_em(
    BossModel model, std::span<const LabeledSequence> data,
    const TrainConfig& cfg) {
    cfg.validate();
    model.validate();
    ensure(!data.empty(), "fit_em: empty data");
    size_t total_steps = 0;
    for (const auto& seq : data) {
        seq.validate(model.signature);
        total_steps += seq.length();
    }
    const int n = model.n_states();

    const auto inputs = detail::build_inputs(model.signature, data);
    TrainReport report;
    double ll_prev = detail::marginal_log_likelihood(model, inputs);
    if (!std::isfinite(ll_prev)) {
        throw NumericError("fit_em: non-finite initial log likelihood");
    }

    for (int iter = 0; iter < cfg.iterations; ++iter) {
        const BossModel snapshot = model;
        auto counts = detail::e_step(model, inputs);

        BossModel updated = model;
        updated.pi = smoothed_distribution(counts.initial);
        for (int i = 0; i < n; ++i) {
            updated.trans[i] = smoothed_distribution(counts.transitions[i]);
        }

        double step = cfg.learning_rate;
        bool accepted = false;
        double ll_new = 0.0;
        BossModel candidate;
        for (int halving = 0; halving <= cfg.step_halving_max + 1; ++halving) {
            candidate = updated;
            if (halving <= cfg.step_halving_max) {
                detail::em_gradient_steps(candidate, inputs, counts,
                                          cfg.em_gradient_steps, step,
                                          static_cast<double>(total_steps));
            }
            // the final attempt keeps the closed-form update only
            ll_new = detail::marginal_log_likelihood(candidate, inputs);
            if (!std::isfinite(ll_new)) {
                throw NumericError("fit_em: non-finite log likelihood");
            }
            if (ll_new >= ll_prev - k_monotonicity_slack) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            model = snapshot;
            break;
        }
        model = std::move(candidate);
        report.log_likelihood_trace.push_back(ll_new);
        double delta = std::abs(ll_new - ll_prev);
        ll_prev = ll_new;
        if (delta < cfg.tolerance * static_cast<double>(data.size())) {
            report.converged = true;
            break;
        }
    }
    report.final_ll = report.log_likelihood_trace.empty()
                          ? ll_prev
                          : report.log_likelihood_trace.back();
    return {std::move(model), std::move(report)};
}

struct GradientCheckReport {
    double max_relative_error = 0.0;
    int checked_parameters = 0;
    bool passed = false;
};

// Relative error between two gradient values, floored so that entries far
// below the gradient scale cannot dominate the report.
inline double gradient_relative_error(double analytic, double numeric) {
    double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    return std::abs(analytic - numeric) / denom;
}

inline double max_gradient_relative_error(std::span<const double> analytic,
                                          std::span<const double> numeric) {
    ensure(analytic.size() == numeric.size(),
           "gradient comparison: length mismatch");
    double worst = 0.0;
    for (size_t i = 0; i < analytic.size(); ++i) {
        worst = std::max(worst, gradient_relative_error(analytic[i], numeric[i]));
    }
    return worst;
}

// Compare analytic emission gradients against central finite differences
// on `samples` random (observation, context, hypothesis) draws. Every
// parameter of both networks is checked.
inline GradientCheckReport gradient_check(const BossModel& model, int samples,
                                          double step, double tol,
                                          uint64_t seed = 0) {
    model.validate();
    ensure(samples >= 1, "gradient_check: samples must be >= 1");
    ensure(step > 0.0, "gradient_check: step must be > 0");
    const auto& sig = model.signature;

    GradientCheckReport report;
    BossModel work = model;
    Rng rng(derive_seed(seed, 0x67726164));
    for (int s = 0; s < samples; ++s) {
        ObservationVector o = zero_observation(sig);
        ContextVector c = zero_context(sig);
        for (auto* channel : {&o.v_l, &o.v_ac, &o.v_cd, &o.v_is}) {
            for (double& v : *channel) v = rng.normal();
        }
        for (auto* channel : {&c.c_hist, &c.c_env, &c.c_char, &c.c_task}) {
            for (double& v : *channel) v = rng.normal();
        }
        int j = static_cast<int>(rng.next_u64() % sig.n_states);

        auto analytic = grad_emission_log_prob(work, o, c, j);
        std::vector<double> analytic_flat = analytic.net_e.flattened();
        {
            auto p_flat = analytic.net_p.flattened();
            analytic_flat.insert(analytic_flat.end(), p_flat.begin(),
                                 p_flat.end());
        }

        std::vector<double*> params = parameter_pointers(work.net_e);
        {
            auto p_params = parameter_pointers(work.net_p);
            params.insert(params.end(), p_params.begin(), p_params.end());
        }
        std::vector<double> numeric_flat(params.size());
        for (size_t i = 0; i < params.size(); ++i) {
            double original = *params[i];
            *params[i] = original + step;
            double plus = emission_log_probs(work, o, c)[j];
            *params[i] = original - step;
            double minus = emission_log_probs(work, o, c)[j];
            *params[i] = original;
            numeric_flat[i] = (plus - minus) / (2.0 * step);
        }
        report.max_relative_error =
            std::max(report.max_relative_error,
                     max_gradient_relative_error(analytic_flat, numeric_flat));
        report.checked_parameters += static_cast<int>(params.size());
    }
    report.passed = report.max_relative_error <= tol;
    return report;
}

}  // namespace boss::train
