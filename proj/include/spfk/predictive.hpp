#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "spfk/spectrum.hpp"
#include "spfk/suffix_automaton.hpp"
#include "spfk/token_stream.hpp"

namespace spfk {

// Sparse probability distribution over token ids, sorted by token.
// Zero-probability entries are not stored unless produced by add-alpha
// smoothing over the full vocabulary.
struct Distribution {
    std::vector<std::pair<std::uint32_t, double>> probs;

    std::size_t support_size() const { return probs.size(); }
    double at(std::uint32_t token) const;  // 0 when absent
    double total() const;
};

// Empirical unigram distribution of the stream. With alpha > 0, add-alpha
// smoothing over the full vocabulary: (count(t) + alpha) / (n + alpha * V).
Distribution global_next_distribution(const TokenStream& s, double alpha);

// Next-token distribution induced by the outgoing transitions of `state`:
// count(s,c) = occ(target of transition on c). Returns nullopt when the
// state has no outgoing transitions. Requires compute_occurrences; state
// must not be the root.
std::optional<Distribution> state_next_distribution(const Automaton& a,
                                                    std::uint32_t state);

// KL(p || q) in nats; terms with p(t) = 0 contribute 0. Throws "baseline
// support violation" when p(t) > 0 and q(t) = 0.
double kl_divergence(const Distribution& p, const Distribution& q);

// Jensen-Shannon divergence in nats (symmetric, bounded by ln 2).
double jensen_shannon(const Distribution& p, const Distribution& q);

// Predictive contribution spectrum: E(s) = mu(s) * KL(P(next|s) || baseline)
// for every non-root state, descending, ties by ascending state id. States
// with no outgoing transitions contribute 0. Unnormalized.
Spectrum global_kl_spectrum(const Automaton& a, const Distribution& baseline);

}  // namespace spfk
