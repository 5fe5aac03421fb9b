#pragma once

// Information-theoretic identities on explicit finite distributions: KL
// divergence, its decomposition against a reference distribution, mutual
// information of a discrete channel, the induced upper bound with its
// tightness condition, and the variational lower bound.
//
// Everything is in nats; use nats_to_bits for display.

#include <cmath>
#include <string>
#include <vector>

#include "boss/common.hpp"

namespace boss::info {

// Probabilities must sum to 1 within this.
inline constexpr double k_sum_tolerance = 1e-12;
// Identities that must hold exactly are checked to this.
inline constexpr double k_identity_tolerance = 1e-12;
// A bound is reported tight when its slack is below this.
inline constexpr double k_tightness_tolerance = 1e-9;

inline double nats_to_bits(double nats) { return nats / std::log(2.0); }

struct DiscreteDistribution {
    std::vector<double> probs;

    size_t support_size() const { return probs.size(); }

    void validate() const {
        ensure(!probs.empty(), "distribution: empty support");
        double total = 0.0;
        for (size_t i = 0; i < probs.size(); ++i) {
            ensure(std::isfinite(probs[i]) && probs[i] >= 0.0,
                   "distribution: entry " + std::to_string(i) +
                       " is negative or non-finite");
            total += probs[i];
        }
        ensure(std::abs(total - 1.0) <= k_sum_tolerance,
               "distribution: entries sum to " + std::to_string(total) +
                   ", not 1");
    }
};

// Conditional family P(Z | U = u) together with the input marginal P(U).
struct DiscreteChannel {
    DiscreteDistribution input_marginal;
    std::vector<DiscreteDistribution> rows;

    size_t input_size() const { return input_marginal.support_size(); }
    size_t output_size() const { return rows.empty() ? 0 : rows[0].support_size(); }

    void validate() const {
        input_marginal.validate();
        ensure(rows.size() == input_marginal.support_size(),
               "channel: row count differs from input support");
        for (size_t u = 0; u < rows.size(); ++u) {
            rows[u].validate();
            ensure(rows[u].support_size() == rows[0].support_size(),
                   "channel: row " + std::to_string(u) +
                       " has a different output support");
        }
    }
};

namespace detail {

inline void require_support(const DiscreteDistribution& p,
                            const DiscreteDistribution& q,
                            const char* where) {
    ensure(p.support_size() == q.support_size(),
           std::string(where) + ": support size mismatch");
}

}  // namespace detail

// Sum of p_i ln(p_i / q_i) with the 0 ln 0 = 0 convention. Mass of p
// outside the support of q makes the divergence infinite and is rejected.
inline double kl_divergence(const DiscreteDistribution& p,
                            const DiscreteDistribution& q) {
    p.validate();
    q.validate();
    detail::require_support(p, q, "kl_divergence");
    double total = 0.0;
    for (size_t i = 0; i < p.probs.size(); ++i) {
        if (p.probs[i] == 0.0) continue;
        ensure(q.probs[i] > 0.0,
               "kl_divergence: q is zero at index " + std::to_string(i) +
                   " where p is positive");
        total += p.probs[i] * std::log(p.probs[i] / q.probs[i]);
    }
    return total;
}

// P(Z) = sum_u P(u) P(Z | u)
inline DiscreteDistribution marginal(const DiscreteChannel& channel) {
    channel.validate();
    DiscreteDistribution out;
    out.probs.assign(channel.output_size(), 0.0);
    for (size_t u = 0; u < channel.rows.size(); ++u) {
        double weight = channel.input_marginal.probs[u];
        for (size_t z = 0; z < out.probs.size(); ++z) {
            out.probs[z] += weight * channel.rows[u].probs[z];
        }
    }
    return out;
}

// I(Z;U) = sum_u P(u) KL(P(Z|u) || P(Z)). Inputs with zero mass
// contribute nothing and are skipped.
inline double mutual_information(const DiscreteChannel& channel) {
    channel.validate();
    DiscreteDistribution mix = marginal(channel);
    double mi = 0.0;
    for (size_t u = 0; u < channel.rows.size(); ++u) {
        double weight = channel.input_marginal.probs[u];
        if (weight == 0.0) continue;
        mi += weight * kl_divergence(channel.rows[u], mix);
    }
    return mi;
}

// KL(row_u || v) split against the channel marginal:
//   total        = KL(row_u || v)
//   information  = KL(row_u || marginal)
//   mismatch     = sum_z row_u(z) ln(marginal(z) / v(z))
// The three satisfy total = information + mismatch by construction; the
// identity is re-checked numerically before returning.
struct KlDecomposition {
    double total = 0.0;
    double information_term = 0.0;
    double mismatch_term = 0.0;
};

inline KlDecomposition decompose_kl(const DiscreteChannel& channel, int u,
                                    const DiscreteDistribution& v) {
    channel.validate();
    v.validate();
    ensure(u >= 0 && static_cast<size_t>(u) < channel.rows.size(),
           "decompose_kl: row index out of range");
    const DiscreteDistribution& row = channel.rows[static_cast<size_t>(u)];
    detail::require_support(row, v, "decompose_kl");
    DiscreteDistribution mix = marginal(channel);

    KlDecomposition out;
    out.total = kl_divergence(row, v);
    out.information_term = kl_divergence(row, mix);
    for (size_t z = 0; z < row.probs.size(); ++z) {
        if (row.probs[z] == 0.0) continue;
        ensure(mix.probs[z] > 0.0,
               "decompose_kl: marginal is zero at index " + std::to_string(z) +
                   " where the row is positive");
        out.mismatch_term += row.probs[z] * std::log(mix.probs[z] / v.probs[z]);
    }
    double gap =
        std::abs(out.total - (out.information_term + out.mismatch_term));
    if (gap > k_identity_tolerance) {
        throw NumericError("decompose_kl: decomposition identity broke by " +
                           std::to_string(gap));
    }
    return out;
}

// expected_kl = E_U{KL(P(Z|U) || v)} dominates I(Z;U); the slack is
// KL(marginal || v), zero exactly when v equals the marginal.
struct UpperBoundReport {
    double mi = 0.0;
    double expected_kl = 0.0;
    double slack = 0.0;
    bool tight = false;
};

inline UpperBoundReport check_upper_bound(const DiscreteChannel& channel,
                                          const DiscreteDistribution& v) {
    channel.validate();
    v.validate();
    UpperBoundReport report;
    report.mi = mutual_information(channel);
    for (size_t u = 0; u < channel.rows.size(); ++u) {
        double weight = channel.input_marginal.probs[u];
        if (weight == 0.0) continue;
        report.expected_kl += weight * kl_divergence(channel.rows[u], v);
    }
    report.slack = report.expected_kl - report.mi;
    if (report.slack < -k_identity_tolerance) {
        throw NumericError("check_upper_bound: slack went negative (" +
                           std::to_string(report.slack) + ")");
    }
    report.tight = report.slack <= k_tightness_tolerance;
    return report;
}

// E_{U,Z}[ln q(Z|U) - ln P(Z)] for an arbitrary conditional family q.
// Never exceeds the mutual information; equals it when q matches the
// true rows.
inline double ba_lower_bound(const DiscreteChannel& channel,
                             const std::vector<DiscreteDistribution>& q_rows) {
    channel.validate();
    ensure(q_rows.size() == channel.rows.size(),
           "ba_lower_bound: q row count differs from channel");
    DiscreteDistribution mix = marginal(channel);
    double value = 0.0;
    for (size_t u = 0; u < channel.rows.size(); ++u) {
        q_rows[u].validate();
        detail::require_support(channel.rows[u], q_rows[u], "ba_lower_bound");
        double weight = channel.input_marginal.probs[u];
        if (weight == 0.0) continue;
        const auto& row = channel.rows[u].probs;
        for (size_t z = 0; z < row.size(); ++z) {
            if (row[z] == 0.0) continue;
            ensure(q_rows[u].probs[z] > 0.0,
                   "ba_lower_bound: q row " + std::to_string(u) +
                       " is zero at index " + std::to_string(z) +
                       " where the channel row is positive");
            ensure(mix.probs[z] > 0.0,
                   "ba_lower_bound: marginal is zero at index " +
                       std::to_string(z) + " where the row is positive");
            value += weight * row[z] *
                     (std::log(q_rows[u].probs[z]) - std::log(mix.probs[z]));
        }
    }
    double mi = mutual_information(channel);
    if (value > mi + k_identity_tolerance) {
        throw NumericError("ba_lower_bound: bound exceeded mutual information by " +
                           std::to_string(value - mi));
    }
    return value;
}

}  // namespace boss::info
