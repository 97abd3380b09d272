#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "spfk/error.hpp"
#include "spfk/fits.hpp"
#include "spfk/kernel_quotient.hpp"
#include "spfk/synth.hpp"

using namespace spfk;

namespace {

MarkovSpec unary_spec() {
    MarkovSpec spec;
    spec.n_states = 1;
    spec.vocab_size = 2;
    spec.seed = 1;
    spec.transitions = {{1.0}};
    Distribution d;
    d.probs = {{0, 1.0}};
    spec.emissions = {d};
    return spec;
}

Spectrum normalized_power_law(std::size_t m, double exponent) {
    Spectrum sp;
    sp.weights.resize(m);
    for (std::size_t k = 0; k < m; ++k)
        sp.weights[k] = std::pow(static_cast<double>(k + 1), exponent);
    return normalize_spectrum(sp);
}

// Close the loop: planted losses -> cutoff trace -> frontier fit.
FitResult recovered_frontier(const Spectrum& sp, double gamma, double scale,
                             const std::vector<std::uint64_t>& sizes) {
    LossCurve losses = planted_frontier_losses(sp, gamma, scale, sizes, 2.0);
    FrontierTrace trace = effective_cutoff(sp, losses);
    FrontierFits ff = frontier_fit({trace}, false, false);
    REQUIRE(ff.errors.empty());
    return ff.fits.at(trace.dataset);
}

}  // namespace

TEST_CASE("markov generation basics") {
    TokenStream unary = generate_markov_corpus(unary_spec(), 64);
    CHECK(unary.size() == 64);
    for (std::uint32_t t : unary.tokens) CHECK(t == 0);

    // Deterministic two-state alternation emitting a/b.
    MarkovSpec alt;
    alt.n_states = 2;
    alt.vocab_size = 2;
    alt.seed = 42;
    alt.transitions = {{0.0, 1.0}, {1.0, 0.0}};
    Distribution ea, eb;
    ea.probs = {{0, 1.0}};
    eb.probs = {{1, 1.0}};
    alt.emissions = {ea, eb};
    TokenStream s = generate_markov_corpus(alt, 10);
    for (std::size_t i = 0; i < s.tokens.size(); ++i)
        CHECK(s.tokens[i] == static_cast<std::uint32_t>(i % 2));

    // Identical (spec, length) gives identical streams.
    MarkovSpec mixed;
    mixed.n_states = 2;
    mixed.vocab_size = 6;
    mixed.seed = 777;
    mixed.transitions = {{0.8, 0.2}, {0.35, 0.65}};
    Distribution e0, e1;
    e0.probs = {{0, 0.5}, {1, 0.3}, {2, 0.2}};
    e1.probs = {{3, 0.6}, {4, 0.25}, {5, 0.15}};
    mixed.emissions = {e0, e1};
    TokenStream a = generate_markov_corpus(mixed, 5000);
    TokenStream b = generate_markov_corpus(mixed, 5000);
    CHECK(a.tokens == b.tokens);
    bool saw_late = false;
    for (std::uint32_t t : a.tokens) saw_late |= t >= 3;
    CHECK(saw_late);
}

TEST_CASE("markov spec parsing and validation") {
    const char* good = R"({
      "n_states": 2, "vocab_size": 4, "seed": 9,
      "transitions": [[0.5, 0.5], [0.25, 0.75]],
      "emissions": [[[0, 0.5], [1, 0.5]], [[2, 1.0]]]
    })";
    MarkovSpec spec = parse_markov_spec(good);
    CHECK(spec.n_states == 2);
    CHECK(spec.emissions[1].probs[0].first == 2);

    CHECK_THROWS_AS(parse_markov_spec("{"), error);
    CHECK_THROWS_AS(parse_markov_spec(R"({"n_states": 1})"), error);

    MarkovSpec bad = spec;
    bad.transitions[0][0] = 0.9;  // row sums to 1.4
    CHECK_THROWS_AS(validate(bad), error);

    MarkovSpec bad2 = spec;
    bad2.emissions[0].probs[0].second = 0.75;  // emission sums to 1.25
    CHECK_THROWS_AS(validate(bad2), error);

    CHECK_THROWS_AS(generate_markov_corpus(spec, 1), error);
}

TEST_CASE("planted frontier losses") {
    Spectrum sp;
    sp.weights = {0.5, 0.3, 0.2};
    sp.normalized = true;

    // K*(N) = N at gamma 1, scale 1: losses are floor + T(N).
    std::vector<std::uint64_t> sizes{1, 2, 3};
    LossCurve c = planted_frontier_losses(sp, 1.0, 1.0, sizes, 2.0);
    REQUIRE(c.points.size() == 3);
    CHECK(c.points[0].loss == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(c.points[1].loss == doctest::Approx(2.2).epsilon(1e-12));
    CHECK(c.points[2].loss == doctest::Approx(2.0).epsilon(1e-12));

    // Full coverage: K*(N_max) = M means the last loss sits on the floor.
    CHECK(c.points.back().loss == 2.0);

    // K*(N_min) = 1: the excess at N_min is T(1) and its ratio is 1.
    auto excess = excess_loss(c);
    CHECK(std::get<1>(excess[0]) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::get<2>(excess[0]) == 1.0);

    CHECK_THROWS_AS(planted_frontier_losses(sp, 0.0, 1.0, sizes, 2.0), error);
    std::vector<std::uint64_t> unsorted{3, 2, 1};
    CHECK_THROWS_AS(planted_frontier_losses(sp, 1.0, 1.0, unsorted, 2.0), error);
    Spectrum unnormalized;
    unnormalized.weights = {2.0, 1.0};
    CHECK_THROWS_AS(planted_frontier_losses(unnormalized, 1.0, 1.0, sizes, 2.0), error);
}

TEST_CASE("pipeline closure recovers planted frontier exponents") {
    Spectrum sp = normalized_power_law(100000, -1.2);
    const double m = 100000.0;

    SUBCASE("gamma 3.9 over the five standard sizes") {
        std::vector<std::uint64_t> sizes{100'000, 200'000, 500'000, 1'000'000, 2'000'000};
        double scale = 1.5 * m / std::pow(2e6, 3.9);
        FitResult fit = recovered_frontier(sp, 3.9, scale, sizes);
        CHECK(std::abs(fit.slope - 3.9) <= 0.05 * 3.9);
        CHECK(fit.r_squared >= 0.99);
    }

    SUBCASE("gamma 2 over five sizes spanning sqrt(M)") {
        std::vector<std::uint64_t> sizes{10'000, 42'170, 177'828, 749'894, 3'162'278};
        double scale = 1.25 * m / std::pow(3.162278e6, 2.0);
        FitResult fit = recovered_frontier(sp, 2.0, scale, sizes);
        CHECK(std::abs(fit.slope - 2.0) <= 0.05 * 2.0);
        CHECK(fit.r_squared >= 0.99);
    }
}

TEST_CASE("quotient clusters recover well-separated markov states") {
    // Three hidden states with disjoint emission supports and strong
    // self-loops; the top clusters should mirror the planted kernels.
    MarkovSpec spec;
    spec.n_states = 3;
    spec.vocab_size = 12;
    spec.seed = 20240601;
    spec.transitions = {{0.94, 0.03, 0.03}, {0.03, 0.94, 0.03}, {0.03, 0.03, 0.94}};
    for (std::uint32_t st = 0; st < 3; ++st) {
        Distribution e;
        for (std::uint32_t j = 0; j < 4; ++j)
            e.probs.emplace_back(4 * st + j, j == 0 ? 0.4 : 0.2);
        spec.emissions.push_back(e);
    }
    TokenStream s = generate_markov_corpus(spec, 15000);
    Automaton a = build_sam(s);
    compute_occurrences(a);
    // epsilon sits between the one-hot-to-own-mixture divergence (~0.28) and
    // the cross-state mixture divergence (~0.52).
    QuotientStates q = kernel_quotient(a, 0.45);
    REQUIRE(q.clusters.size() >= 3);

    // Total mass concentrated in the top three clusters.
    std::vector<std::size_t> order(q.clusters.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return q.clusters[x].mass > q.clusters[y].mass;
    });
    double total_mass = 0.0;
    for (const QuotientCluster& c : q.clusters) total_mass += c.mass;
    double top_mass = q.clusters[order[0]].mass + q.clusters[order[1]].mass +
                      q.clusters[order[2]].mass;
    CHECK(top_mass / total_mass >= 0.9);

    // Each top cluster's kernel concentrates on one planted support block.
    std::set<std::uint32_t> blocks;
    for (std::size_t rank = 0; rank < 3; ++rank) {
        const QuotientCluster& c = q.clusters[order[rank]];
        double block_mass[3] = {0, 0, 0};
        for (const auto& [token, p] : c.kernel.probs) block_mass[token / 4] += p;
        std::size_t best = std::max_element(block_mass, block_mass + 3) - block_mass;
        CHECK(block_mass[best] >= 0.9);
        blocks.insert(static_cast<std::uint32_t>(best));
    }
    CHECK(blocks.size() == 3);
}
