#include "spfk/predictive.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "spfk/error.hpp"

namespace spfk {

namespace {

// Dense counting is wasteful past this vocab size; smoothing over the full
// vocabulary is refused beyond it.
constexpr std::uint32_t kDenseVocabLimit = 1u << 24;

}  // namespace

double Distribution::at(std::uint32_t token) const {
    auto it = std::lower_bound(probs.begin(), probs.end(), token,
                               [](const auto& e, std::uint32_t t) { return e.first < t; });
    if (it == probs.end() || it->first != token) return 0.0;
    return it->second;
}

double Distribution::total() const {
    double t = 0.0;
    for (const auto& [token, p] : probs) t += p;
    return t;
}

Distribution global_next_distribution(const TokenStream& s, double alpha) {
    if (s.tokens.empty()) throw error("empty corpus");
    if (alpha < 0.0) throw error("alpha must be nonnegative");

    std::vector<std::pair<std::uint32_t, std::uint64_t>> counts;
    if (s.vocab_size <= kDenseVocabLimit) {
        std::vector<std::uint64_t> dense(s.vocab_size, 0);
        for (std::uint32_t t : s.tokens) ++dense[t];
        for (std::uint32_t t = 0; t < s.vocab_size; ++t)
            if (dense[t] > 0) counts.emplace_back(t, dense[t]);
    } else {
        std::unordered_map<std::uint32_t, std::uint64_t> sparse;
        for (std::uint32_t t : s.tokens) ++sparse[t];
        counts.assign(sparse.begin(), sparse.end());
        std::sort(counts.begin(), counts.end());
    }

    Distribution d;
    const double n = static_cast<double>(s.tokens.size());
    if (alpha == 0.0) {
        d.probs.reserve(counts.size());
        for (const auto& [token, c] : counts)
            d.probs.emplace_back(token, static_cast<double>(c) / n);
        return d;
    }

    if (s.vocab_size > kDenseVocabLimit)
        throw error("vocab too large for smoothed baseline");
    const double denom = n + alpha * static_cast<double>(s.vocab_size);
    d.probs.reserve(s.vocab_size);
    auto it = counts.begin();
    for (std::uint32_t t = 0; t < s.vocab_size; ++t) {
        double c = 0.0;
        if (it != counts.end() && it->first == t) {
            c = static_cast<double>(it->second);
            ++it;
        }
        d.probs.emplace_back(t, (c + alpha) / denom);
    }
    return d;
}

std::optional<Distribution> state_next_distribution(const Automaton& a,
                                                    std::uint32_t state) {
    if (!a.occ_computed) throw error("occurrences not computed");
    if (state == Automaton::root || state >= a.states.size())
        throw error("invalid state id");

    const SamState& st = a.states[state];
    if (st.transitions.empty()) return std::nullopt;

    std::uint64_t total = 0;
    for (const Transition& t : st.transitions) total += a.states[t.target].occ;

    Distribution d;
    d.probs.reserve(st.transitions.size());
    for (const Transition& t : st.transitions)
        d.probs.emplace_back(t.token, static_cast<double>(a.states[t.target].occ) /
                                          static_cast<double>(total));
    return d;
}

double kl_divergence(const Distribution& p, const Distribution& q) {
    double acc = 0.0;
    auto qi = q.probs.begin();
    for (const auto& [token, pv] : p.probs) {
        if (pv == 0.0) continue;
        while (qi != q.probs.end() && qi->first < token) ++qi;
        if (qi == q.probs.end() || qi->first != token || qi->second == 0.0)
            throw error("baseline support violation");
        acc += pv * std::log(pv / qi->second);
    }
    return acc;
}

double jensen_shannon(const Distribution& p, const Distribution& q) {
    double acc = 0.0;
    auto pi = p.probs.begin();
    auto qi = q.probs.begin();
    while (pi != p.probs.end() || qi != q.probs.end()) {
        double pv = 0.0, qv = 0.0;
        if (qi == q.probs.end() || (pi != p.probs.end() && pi->first < qi->first)) {
            pv = pi->second;
            ++pi;
        } else if (pi == p.probs.end() || qi->first < pi->first) {
            qv = qi->second;
            ++qi;
        } else {
            pv = pi->second;
            qv = qi->second;
            ++pi;
            ++qi;
        }
        double m = 0.5 * (pv + qv);
        if (pv > 0.0) acc += 0.5 * pv * std::log(pv / m);
        if (qv > 0.0) acc += 0.5 * qv * std::log(qv / m);
    }
    return acc;
}

Spectrum global_kl_spectrum(const Automaton& a, const Distribution& baseline) {
    if (!a.occ_computed) throw error("occurrences not computed");

    std::uint64_t total_occ = 0;
    for (std::size_t i = 1; i < a.states.size(); ++i) total_occ += a.states[i].occ;

    std::vector<std::pair<double, std::uint32_t>> entries;
    entries.reserve(a.states.size() - 1);
    for (std::size_t i = 1; i < a.states.size(); ++i) {
        double e = 0.0;
        auto next = state_next_distribution(a, static_cast<std::uint32_t>(i));
        if (next) {
            double mu = static_cast<double>(a.states[i].occ) / static_cast<double>(total_occ);
            e = mu * kl_divergence(*next, baseline);
        }
        entries.emplace_back(e, static_cast<std::uint32_t>(i));
    }
    std::sort(entries.begin(), entries.end(), [](const auto& x, const auto& y) {
        if (x.first != y.first) return x.first > y.first;
        return x.second < y.second;
    });

    Spectrum sp;
    sp.provenance = Provenance::global_kl_raw;
    sp.normalized = false;
    sp.source_size = a.source_length;
    sp.weights.reserve(entries.size());
    for (const auto& [w, id] : entries) sp.weights.push_back(w);
    return sp;
}

}  // namespace spfk
