#include "spfk/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "spfk/error.hpp"

namespace spfk {

namespace {

double check_distribution(const std::vector<std::pair<std::uint32_t, double>>& probs,
                          std::uint32_t vocab_size, const char* what) {
    double total = 0.0;
    std::uint32_t prev = 0;
    bool first = true;
    for (const auto& [token, p] : probs) {
        if (p < 0.0) throw error(std::string("invalid markov spec: negative ") + what);
        if (token >= vocab_size) throw error("invalid markov spec: token out of range");
        if (!first && token <= prev) throw error("invalid markov spec: unsorted emission");
        prev = token;
        first = false;
        total += p;
    }
    return total;
}

// 53-bit uniform in [0, 1); fully determined by the mt19937_64 stream.
double next_u01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint32_t sample_row(const std::vector<double>& row, double u) {
    double acc = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
        acc += row[i];
        if (u < acc) return static_cast<std::uint32_t>(i);
    }
    return static_cast<std::uint32_t>(row.size() - 1);
}

std::uint32_t sample_emission(const Distribution& d, double u) {
    double acc = 0.0;
    for (const auto& [token, p] : d.probs) {
        acc += p;
        if (u < acc) return token;
    }
    return d.probs.back().first;
}

}  // namespace

void validate(const MarkovSpec& spec) {
    if (spec.n_states == 0) throw error("invalid markov spec: no states");
    if (spec.vocab_size == 0) throw error("invalid markov spec: empty vocab");
    if (spec.transitions.size() != spec.n_states ||
        spec.emissions.size() != spec.n_states)
        throw error("invalid markov spec: shape mismatch");
    for (const auto& row : spec.transitions) {
        if (row.size() != spec.n_states)
            throw error("invalid markov spec: shape mismatch");
        double total = 0.0;
        for (double p : row) {
            if (p < 0.0) throw error("invalid markov spec: negative transition");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw error("invalid markov spec: transition row does not sum to 1");
    }
    for (const Distribution& d : spec.emissions) {
        if (d.probs.empty()) throw error("invalid markov spec: empty emission");
        double total = check_distribution(d.probs, spec.vocab_size, "emission");
        if (std::abs(total - 1.0) > 1e-9)
            throw error("invalid markov spec: emission does not sum to 1");
    }
}

MarkovSpec parse_markov_spec(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception&) {
        throw error("invalid markov spec: bad json");
    }
    MarkovSpec spec;
    try {
        spec.n_states = j.at("n_states").get<std::uint32_t>();
        spec.vocab_size = j.at("vocab_size").get<std::uint32_t>();
        spec.seed = j.value("seed", std::uint64_t{0});
        spec.transitions = j.at("transitions").get<std::vector<std::vector<double>>>();
        for (const auto& emission : j.at("emissions")) {
            Distribution d;
            for (const auto& entry : emission) {
                if (!entry.is_array() || entry.size() != 2)
                    throw error("invalid markov spec: emission entries are [token, prob]");
                d.probs.emplace_back(entry[0].get<std::uint32_t>(), entry[1].get<double>());
            }
            std::sort(d.probs.begin(), d.probs.end());
            spec.emissions.push_back(std::move(d));
        }
    } catch (const nlohmann::json::exception&) {
        throw error("invalid markov spec: missing or mistyped field");
    }
    validate(spec);
    return spec;
}

MarkovSpec read_markov_spec(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw error("cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_markov_spec(text);
}

TokenStream generate_markov_corpus(const MarkovSpec& spec, std::uint64_t length) {
    validate(spec);
    if (length < 2) throw error("length must be at least 2");

    std::mt19937_64 rng(spec.seed);
    TokenStream s;
    s.vocab_size = spec.vocab_size;
    s.tokens.reserve(length);
    std::uint32_t state = 0;
    for (std::uint64_t i = 0; i < length; ++i) {
        s.tokens.push_back(sample_emission(spec.emissions[state], next_u01(rng)));
        state = sample_row(spec.transitions[state], next_u01(rng));
    }
    return s;
}

LossCurve planted_frontier_losses(const Spectrum& normalized, double gamma,
                                  double scale, std::span<const std::uint64_t> sizes,
                                  double floor, const std::string& dataset) {
    if (!normalized.normalized) throw error("spectrum must be normalized");
    if (gamma <= 0.0) throw error("gamma must be positive");
    if (sizes.size() < 2) throw error("insufficient points");
    for (std::size_t i = 1; i < sizes.size(); ++i)
        if (sizes[i] <= sizes[i - 1]) throw error("sizes must be strictly increasing");

    const TailMass tail(normalized);
    const std::uint64_t m = tail.size();

    LossCurve curve;
    curve.dataset = dataset;
    for (std::uint64_t n : sizes) {
        double target = scale * std::pow(static_cast<double>(n), gamma);
        std::uint64_t k;
        if (!(target >= 1.0))  // also catches NaN
            k = 1;
        else if (target >= static_cast<double>(m))
            k = m;
        else
            k = static_cast<std::uint64_t>(std::llround(target));  // ties away from 0 = up
        k = std::clamp<std::uint64_t>(k, 1, m);
        curve.points.push_back(LossPoint{n, floor + tail.at(k)});
    }
    return curve;
}

}  // namespace spfk
