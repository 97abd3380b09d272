#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "spfk/fits.hpp"
#include "spfk/predictive.hpp"
#include "spfk/token_stream.hpp"

namespace spfk {

// Seeded Markov chain over hidden states with per-state token emissions.
// Rows of `transitions` and every emission distribution must sum to 1
// within 1e-9.
struct MarkovSpec {
    std::uint32_t n_states = 0;
    std::uint32_t vocab_size = 0;
    std::uint64_t seed = 0;
    std::vector<std::vector<double>> transitions;  // n_states x n_states
    std::vector<Distribution> emissions;           // one per state
};

MarkovSpec read_markov_spec(const std::filesystem::path& path);
MarkovSpec parse_markov_spec(const std::string& json_text);
void validate(const MarkovSpec& spec);

// Walk the chain from state 0 with a seeded deterministic generator
// (mt19937_64, inverse-CDF sampling); identical (spec, length) always
// yields identical streams. length must be >= 2.
TokenStream generate_markov_corpus(const MarkovSpec& spec, std::uint64_t length);

// Planted frontier: K*(N) = clamp(round(scale * N^gamma), 1, M) (round =
// nearest, ties up) and L(N) = floor + T(K*(N)). Spectrum must be
// normalized; gamma > 0; sizes strictly increasing.
LossCurve planted_frontier_losses(const Spectrum& normalized, double gamma,
                                  double scale, std::span<const std::uint64_t> sizes,
                                  double floor, const std::string& dataset = "planted");

}  // namespace spfk
