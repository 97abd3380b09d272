#include "spfk/spectrum.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include "spfk/error.hpp"
#include "spfk/kernels.hpp"

namespace spfk {

const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::state_mass: return "state-mass";
        case Provenance::global_kl_raw: return "global-kl-raw";
        case Provenance::global_kl_smoothed: return "global-kl-smoothed";
        case Provenance::quotient: return "quotient";
    }
    return "unknown";
}

Spectrum normalize_spectrum(const Spectrum& sp) {
    if (sp.normalized) return sp;
    double total = kernels::sum(sp.weights);
    if (total <= 0.0) throw error("degenerate spectrum");
    Spectrum out = sp;
    kernels::scale(out.weights, 1.0 / total);
    out.normalized = true;
    return out;
}

TailMass::TailMass(const Spectrum& normalized) {
    if (!normalized.normalized) throw error("spectrum must be normalized");
    const auto& w = normalized.weights;
    suffix_.resize(w.size() + 1);
    suffix_[w.size()] = 0.0;
    for (std::size_t k = w.size(); k-- > 0;) suffix_[k] = suffix_[k + 1] + w[k];
}

double TailMass::at(std::uint64_t k) const {
    if (k >= suffix_.size()) throw error("rank out of range");
    return suffix_[k];
}

std::uint64_t TailMass::cutoff(double ratio) const {
    // suffix_ is non-increasing; find the first k in [1, M] with T(k) <= ratio.
    std::uint64_t lo = 1, hi = size();
    while (lo < hi) {
        std::uint64_t mid = lo + (hi - lo) / 2;
        if (suffix_[mid] <= ratio)
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

double tail_mass(const Spectrum& normalized, std::uint64_t k) {
    return TailMass(normalized).at(k);
}

Spectrum smooth_spectrum(const Spectrum& sp, unsigned bins_per_decade) {
    if (sp.weights.empty()) throw error("empty spectrum");
    if (bins_per_decade < 1) throw error("bins_per_decade must be at least 1");

    struct Bin {
        double log_rank_sum = 0.0;
        double weight_sum = 0.0;
        std::size_t count = 0;
    };
    std::map<long, Bin> bins;
    for (std::size_t i = 0; i < sp.size(); ++i) {
        double rank = sp.rank_at(i);
        long b = static_cast<long>(std::floor(bins_per_decade * std::log10(rank)));
        Bin& bin = bins[b];
        bin.log_rank_sum += std::log(rank);
        bin.weight_sum += sp.weights[i];
        ++bin.count;
    }

    std::vector<std::pair<double, double>> points;  // (weight, rank)
    points.reserve(bins.size());
    for (const auto& [index, bin] : bins)
        points.emplace_back(bin.weight_sum / static_cast<double>(bin.count),
                            std::exp(bin.log_rank_sum / static_cast<double>(bin.count)));
    std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    Spectrum out;
    out.provenance = Provenance::global_kl_smoothed;
    out.normalized = false;
    out.source_size = sp.source_size;
    out.weights.reserve(points.size());
    out.ranks.reserve(points.size());
    for (const auto& [w, r] : points) {
        out.weights.push_back(w);
        out.ranks.push_back(r);
    }
    return out;
}

namespace {

void append_double(std::string& out, double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, end);
}

}  // namespace

std::string spectrum_csv(const Spectrum& sp) {
    std::string out = "rank,weight\n";
    for (std::size_t i = 0; i < sp.size(); ++i) {
        if (sp.ranks.empty()) {
            char buf[24];
            auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), i + 1);
            out.append(buf, end);
        } else {
            append_double(out, sp.ranks[i]);
        }
        out.push_back(',');
        append_double(out, sp.weights[i]);
        out.push_back('\n');
    }
    return out;
}

void write_spectrum_csv(const Spectrum& sp, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw error("cannot write " + path.string());
    std::string csv = spectrum_csv(sp);
    f.write(csv.data(), static_cast<std::streamsize>(csv.size()));
    if (!f) throw error("cannot write " + path.string());
}

Spectrum read_spectrum_csv(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw error("cannot open " + path.string());
    std::string line;
    if (!std::getline(f, line) || (line != "rank,weight" && line != "rank,weight\r"))
        throw error("unrecognized format");

    Spectrum sp;
    bool implicit = true;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t comma = line.find(',');
        if (comma == std::string::npos) throw error("corrupt spectrum csv");
        double rank = 0.0, weight = 0.0;
        auto r1 = std::from_chars(line.data(), line.data() + comma, rank);
        auto r2 = std::from_chars(line.data() + comma + 1, line.data() + line.size(), weight);
        if (r1.ec != std::errc() || r2.ec != std::errc()) throw error("corrupt spectrum csv");
        sp.ranks.push_back(rank);
        sp.weights.push_back(weight);
        if (rank != static_cast<double>(sp.weights.size())) implicit = false;
    }
    if (sp.weights.empty()) throw error("corrupt spectrum csv");
    if (implicit) sp.ranks.clear();
    return sp;
}

}  // namespace spfk
