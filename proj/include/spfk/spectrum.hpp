#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace spfk {

enum class Provenance { state_mass, global_kl_raw, global_kl_smoothed, quotient };

const char* provenance_name(Provenance p);

// Descending-sorted nonnegative weights. Ranks are implicit (1..M) unless
// `ranks` is non-empty, in which case entry i sits at abscissa ranks[i]
// (log-binned smoothing produces fractional geometric-mean ranks).
struct Spectrum {
    std::vector<double> weights;
    std::vector<double> ranks;  // empty => implicit 1..size()
    bool normalized = false;
    Provenance provenance = Provenance::global_kl_raw;
    std::uint64_t source_size = 0;  // tokens of the prepared corpus

    std::size_t size() const { return weights.size(); }
    double rank_at(std::size_t i) const {
        return ranks.empty() ? static_cast<double>(i + 1) : ranks[i];
    }
};

// Divide every weight by the total and set the normalized flag. Idempotent:
// an already-normalized spectrum is returned unchanged. Throws "degenerate
// spectrum" when the total is zero.
Spectrum normalize_spectrum(const Spectrum& sp);

// Residual tail masses T(K) = sum_{k>K} w_k of a normalized spectrum,
// precomputed as a suffix-sum array (backward accumulation, so
// T(K-1) - T(K) == w_K exactly). Queries are O(1), cutoffs O(log M).
class TailMass {
public:
    explicit TailMass(const Spectrum& normalized);

    // T(k) for 0 <= k <= size(); throws "rank out of range".
    double at(std::uint64_t k) const;

    // min { k in [1, M] : T(k) <= ratio }. No endpoint conventions here.
    std::uint64_t cutoff(double ratio) const;

    std::uint64_t size() const { return suffix_.size() - 1; }

private:
    std::vector<double> suffix_;  // suffix_[k] = T(k), k = 0..M
};

// One-off T(K) query (builds the suffix array; prefer TailMass for loops).
double tail_mass(const Spectrum& normalized, std::uint64_t k);

// Log-binned smoothing: ranks are grouped into geometric bins with edges at
// 10^(i/bins_per_decade); each bin becomes one point at the geometric-mean
// rank carrying the arithmetic-mean weight. Output is re-sorted descending.
Spectrum smooth_spectrum(const Spectrum& sp, unsigned bins_per_decade);

// Spectrum CSV: header "rank,weight", 1-based ranks, shortest round-trip
// decimal weights.
void write_spectrum_csv(const Spectrum& sp, const std::filesystem::path& path);
std::string spectrum_csv(const Spectrum& sp);
Spectrum read_spectrum_csv(const std::filesystem::path& path);

}  // namespace spfk
