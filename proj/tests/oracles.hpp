#pragma once

// Test-only brute-force oracles. Everything here works directly on the raw
// token sequence (longest-common-extension table, exhaustive end-position
// sets, linear scans) and stays independent of the library implementation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <vector>

namespace oracle {

using Tokens = std::vector<std::uint32_t>;

struct SubstringClass {
    std::set<std::uint32_t> lens;  // distinct member lengths
    std::uint32_t max_len = 0;
    std::size_t rep_start = 0;  // start index of the longest member
};

// All end-position equivalence classes of a stream, keyed by the endpos set
// (sorted 1-based end positions). Two substrings of equal length with the
// same endpos set are the same string, so distinct lengths count distinct
// members.
class EndposOracle {
public:
    explicit EndposOracle(const Tokens& s) : s_(s) {
        const std::size_t n = s.size();
        lce_.assign(n + 1, std::vector<std::uint16_t>(n + 1, 0));
        for (std::size_t i = n; i-- > 0;)
            for (std::size_t j = n; j-- > 0;)
                lce_[i][j] =
                    s[i] == s[j] ? static_cast<std::uint16_t>(lce_[i + 1][j + 1] + 1) : 0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t len = 1; i + len <= n; ++len) {
                SubstringClass& cls = classes_[endpos_of(i, len)];
                cls.lens.insert(static_cast<std::uint32_t>(len));
                if (len > cls.max_len) {
                    cls.max_len = static_cast<std::uint32_t>(len);
                    cls.rep_start = i;
                }
            }
        }
    }

    const std::map<std::vector<std::uint32_t>, SubstringClass>& classes() const {
        return classes_;
    }

    // Sorted 1-based end positions of the substring starting at `start` with
    // the given length, via the precomputed LCE table.
    std::vector<std::uint32_t> endpos_of(std::size_t start, std::size_t len) const {
        std::vector<std::uint32_t> out;
        for (std::size_t j = 0; j + len <= s_.size(); ++j)
            if (lce_[start][j] >= len) out.push_back(static_cast<std::uint32_t>(j + len));
        return out;
    }

    std::uint64_t distinct_substrings() const {
        std::uint64_t total = 0;
        for (const auto& [endpos, cls] : classes_) total += cls.lens.size();
        return total;
    }

    std::uint64_t occurrences(std::size_t start, std::size_t len) const {
        std::uint64_t count = 0;
        for (std::size_t j = 0; j + len <= s_.size(); ++j)
            if (lce_[start][j] >= len) ++count;
        return count;
    }

    bool contains(const Tokens& probe) const {
        if (probe.empty()) return true;
        return std::search(s_.begin(), s_.end(), probe.begin(), probe.end()) != s_.end();
    }

    // Next-token tally of a class: tokens following each end position.
    std::map<std::uint32_t, std::uint64_t> next_tally(
        const std::vector<std::uint32_t>& endpos) const {
        std::map<std::uint32_t, std::uint64_t> tally;
        for (std::uint32_t p : endpos)
            if (p < s_.size()) ++tally[s_[p]];
        return tally;
    }

    const Tokens& stream() const { return s_; }

private:
    Tokens s_;
    std::vector<std::vector<std::uint16_t>> lce_;
    std::map<std::vector<std::uint32_t>, SubstringClass> classes_;
};

// Unigram token probabilities as (token -> p), long-double accumulation.
inline std::map<std::uint32_t, double> unigram(const Tokens& s) {
    std::map<std::uint32_t, std::uint64_t> counts;
    for (std::uint32_t t : s) ++counts[t];
    std::map<std::uint32_t, double> out;
    for (const auto& [token, c] : counts)
        out[token] = static_cast<double>(c) / static_cast<double>(s.size());
    return out;
}

// KL(p || q) in nats over sparse maps.
inline double kl(const std::map<std::uint32_t, double>& p,
                 const std::map<std::uint32_t, double>& q) {
    long double acc = 0.0L;
    for (const auto& [token, pv] : p) {
        if (pv == 0.0) continue;
        auto it = q.find(token);
        if (it == q.end() || it->second == 0.0)
            return std::numeric_limits<double>::quiet_NaN();
        acc += static_cast<long double>(pv) * std::log(static_cast<long double>(pv) / it->second);
    }
    return static_cast<double>(acc);
}

// Linear-scan evaluation of the cutoff min-rule with endpoint conventions:
// ratio 1 -> 1, ratio 0 -> M, else min { k : sum_{j>k} w_j <= ratio }.
inline std::uint64_t cutoff_linear(const std::vector<double>& w, double ratio) {
    const std::uint64_t m = w.size();
    if (ratio == 1.0) return 1;
    if (ratio == 0.0) return m;
    std::vector<double> suffix(m + 1, 0.0);
    for (std::uint64_t k = m; k-- > 0;) suffix[k] = suffix[k + 1] + w[k];
    for (std::uint64_t k = 1; k <= m; ++k)
        if (suffix[k] <= ratio) return k;
    return m;
}

// Random stream with the given length and alphabet size.
inline Tokens random_stream(std::mt19937_64& rng, std::size_t length,
                            std::uint32_t alphabet) {
    Tokens s(length);
    for (auto& t : s) t = static_cast<std::uint32_t>(rng() % alphabet);
    return s;
}

}  // namespace oracle
