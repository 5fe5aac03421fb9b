#pragma once

// Observation and context value types: the four-channel per-timestep
// observation record, the four-channel external context record, the
// dimension signature binding them to a model, and their flattening
// into scorer inputs.

#include <span>
#include <string>
#include <vector>

#include "boss/common.hpp"

namespace boss {

// Per-channel dimensions shared by every vector and model in a run.
struct DimensionSignature {
    int d_l = 1;     // explicit-semantics latent
    int d_ac = 1;    // affective cues
    int d_cd = 1;    // contextual dynamics
    int d_is = 1;    // implicit semantics
    int d_hist = 1;  // conversational history
    int d_env = 1;   // environment
    int d_char = 1;  // speaker/listener characteristics
    int d_task = 1;  // task knowledge
    int n_states = 2;

    int total_observation_dim() const { return d_l + d_ac + d_cd + d_is; }
    int total_context_dim() const { return d_hist + d_env + d_char + d_task; }
    int scorer_input_dim() const {
        return n_states + total_observation_dim() + total_context_dim();
    }

    void validate() const {
        ensure(d_l >= 1 && d_ac >= 1 && d_cd >= 1 && d_is >= 1,
               "signature: observation channel dimensions must be >= 1");
        ensure(d_hist >= 1 && d_env >= 1 && d_char >= 1 && d_task >= 1,
               "signature: context channel dimensions must be >= 1");
        ensure(n_states >= 2, "signature: n_states must be >= 2");
    }

    bool operator==(const DimensionSignature&) const = default;
};

// Four latent sub-vectors of a per-timestep speech observation.
struct ObservationVector {
    std::vector<double> v_l;
    std::vector<double> v_ac;
    std::vector<double> v_cd;
    std::vector<double> v_is;
};

// Four components of the external context at a timestep.
struct ContextVector {
    std::vector<double> c_hist;
    std::vector<double> c_env;
    std::vector<double> c_char;
    std::vector<double> c_task;
};

// One candidate meaning (hidden state) out of the finite hypothesis set.
struct Hypothesis {
    int index = 0;
    std::string label;
};

namespace detail {

inline void check_channel(std::span<const double> values, int expected,
                          const char* record, const char* channel) {
    if (static_cast<int>(values.size()) != expected) {
        throw ValidationError(std::string(record) + " channel " + channel +
                              ": expected length " + std::to_string(expected) +
                              ", got " + std::to_string(values.size()));
    }
    if (!all_finite(values)) {
        throw ValidationError(std::string(record) + " channel " + channel +
                              ": non-finite entry");
    }
}

}  // namespace detail

inline void validate_observation(const ObservationVector& o,
                                 const DimensionSignature& sig) {
    detail::check_channel(o.v_l, sig.d_l, "observation", "v_l");
    detail::check_channel(o.v_ac, sig.d_ac, "observation", "v_ac");
    detail::check_channel(o.v_cd, sig.d_cd, "observation", "v_cd");
    detail::check_channel(o.v_is, sig.d_is, "observation", "v_is");
}

inline void validate_context(const ContextVector& c,
                             const DimensionSignature& sig) {
    detail::check_channel(c.c_hist, sig.d_hist, "context", "c_hist");
    detail::check_channel(c.c_env, sig.d_env, "context", "c_env");
    detail::check_channel(c.c_char, sig.d_char, "context", "c_char");
    detail::check_channel(c.c_task, sig.d_task, "context", "c_task");
}

// Concatenation in fixed channel order v_l | v_ac | v_cd | v_is.
inline std::vector<double> flatten_observation(const ObservationVector& o) {
    std::vector<double> flat;
    flat.reserve(o.v_l.size() + o.v_ac.size() + o.v_cd.size() + o.v_is.size());
    flat.insert(flat.end(), o.v_l.begin(), o.v_l.end());
    flat.insert(flat.end(), o.v_ac.begin(), o.v_ac.end());
    flat.insert(flat.end(), o.v_cd.begin(), o.v_cd.end());
    flat.insert(flat.end(), o.v_is.begin(), o.v_is.end());
    return flat;
}

inline std::vector<double> flatten_observation(const ObservationVector& o,
                                               const DimensionSignature& sig) {
    validate_observation(o, sig);
    return flatten_observation(o);
}

// Fixed channel order c_hist | c_env | c_char | c_task.
inline std::vector<double> flatten_context(const ContextVector& c) {
    std::vector<double> flat;
    flat.reserve(c.c_hist.size() + c.c_env.size() + c.c_char.size() +
                 c.c_task.size());
    flat.insert(flat.end(), c.c_hist.begin(), c.c_hist.end());
    flat.insert(flat.end(), c.c_env.begin(), c.c_env.end());
    flat.insert(flat.end(), c.c_char.begin(), c.c_char.end());
    flat.insert(flat.end(), c.c_task.begin(), c.c_task.end());
    return flat;
}

inline std::vector<double> flatten_context(const ContextVector& c,
                                           const DimensionSignature& sig) {
    validate_context(c, sig);
    return flatten_context(c);
}

inline ObservationVector unflatten_observation(std::span<const double> flat,
                                               const DimensionSignature& sig) {
    ensure(static_cast<int>(flat.size()) == sig.total_observation_dim(),
           "unflatten_observation: length " + std::to_string(flat.size()) +
               " does not match signature total " +
               std::to_string(sig.total_observation_dim()));
    ObservationVector o;
    auto it = flat.begin();
    o.v_l.assign(it, it + sig.d_l);
    it += sig.d_l;
    o.v_ac.assign(it, it + sig.d_ac);
    it += sig.d_ac;
    o.v_cd.assign(it, it + sig.d_cd);
    it += sig.d_cd;
    o.v_is.assign(it, it + sig.d_is);
    return o;
}

inline ContextVector unflatten_context(std::span<const double> flat,
                                       const DimensionSignature& sig) {
    ensure(static_cast<int>(flat.size()) == sig.total_context_dim(),
           "unflatten_context: length " + std::to_string(flat.size()) +
               " does not match signature total " +
               std::to_string(sig.total_context_dim()));
    ContextVector c;
    auto it = flat.begin();
    c.c_hist.assign(it, it + sig.d_hist);
    it += sig.d_hist;
    c.c_env.assign(it, it + sig.d_env);
    it += sig.d_env;
    c.c_char.assign(it, it + sig.d_char);
    it += sig.d_char;
    c.c_task.assign(it, it + sig.d_task);
    return c;
}

// One-hot embedding of a hypothesis over the finite hypothesis set.
inline std::vector<double> hypothesis_embedding(int index, int n_states) {
    ensure(n_states >= 2, "hypothesis_embedding: n_states must be >= 2");
    ensure(index >= 0 && index < n_states,
           "hypothesis_embedding: index " + std::to_string(index) +
               " out of range [0, " + std::to_string(n_states) + ")");
    std::vector<double> embedding(static_cast<size_t>(n_states), 0.0);
    embedding[static_cast<size_t>(index)] = 1.0;
    return embedding;
}

inline std::vector<double> hypothesis_embedding(const Hypothesis& h,
                                                int n_states) {
    return hypothesis_embedding(h.index, n_states);
}

inline ObservationVector zero_observation(const DimensionSignature& sig) {
    return ObservationVector{std::vector<double>(sig.d_l, 0.0),
                             std::vector<double>(sig.d_ac, 0.0),
                             std::vector<double>(sig.d_cd, 0.0),
                             std::vector<double>(sig.d_is, 0.0)};
}

inline ContextVector zero_context(const DimensionSignature& sig) {
    return ContextVector{std::vector<double>(sig.d_hist, 0.0),
                         std::vector<double>(sig.d_env, 0.0),
                         std::vector<double>(sig.d_char, 0.0),
                         std::vector<double>(sig.d_task, 0.0)};
}

}  // namespace boss
