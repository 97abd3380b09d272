#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spfk/error.hpp"
#include "spfk/predictive.hpp"

using namespace spfk;

namespace {

Distribution dist(std::initializer_list<std::pair<std::uint32_t, double>> entries) {
    Distribution d;
    d.probs.assign(entries.begin(), entries.end());
    return d;
}

Automaton built(const char* text) {
    Automaton a = build_sam(tokenize_bytes(text));
    compute_occurrences(a);
    return a;
}

std::int64_t walk(const Automaton& a, const char* text) {
    std::uint32_t state = Automaton::root;
    for (const char* p = text; *p; ++p) {
        std::int64_t next = a.states[state].next(static_cast<unsigned char>(*p));
        if (next == -1) return -1;
        state = static_cast<std::uint32_t>(next);
    }
    return state;
}

}  // namespace

TEST_CASE("global next distribution") {
    TokenStream aab = tokenize_bytes("aab");
    Distribution d = global_next_distribution(aab, 0.0);
    CHECK(d.support_size() == 2);
    CHECK(d.at('a') == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(d.at('b') == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    // Support equals the set of tokens present.
    std::mt19937_64 rng(3);
    for (int it = 0; it < 20; ++it) {
        TokenStream s;
        s.vocab_size = 32;
        s.tokens = oracle::random_stream(rng, 2 + rng() % 50, 9);
        Distribution g = global_next_distribution(s, 0.0);
        auto uni = oracle::unigram(s.tokens);
        REQUIRE(g.support_size() == uni.size());
        for (const auto& [token, p] : uni)
            CHECK(g.at(token) == doctest::Approx(p).epsilon(1e-12));
    }

    // Add-alpha smoothing spreads mass over the whole vocabulary.
    TokenStream ab = tokenize_bytes("ab");
    Distribution smoothed = global_next_distribution(ab, 1.0);
    CHECK(smoothed.support_size() == 256);
    CHECK(smoothed.at('a') == doctest::Approx(2.0 / 258.0).epsilon(1e-12));
    CHECK(smoothed.at('z') == doctest::Approx(1.0 / 258.0).epsilon(1e-12));
    CHECK(smoothed.total() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("state next distributions") {
    Automaton aba = built("aba");
    auto d_a = state_next_distribution(aba, static_cast<std::uint32_t>(walk(aba, "a")));
    REQUIRE(d_a.has_value());
    CHECK(d_a->support_size() == 1);
    CHECK(d_a->at('b') == doctest::Approx(1.0).epsilon(1e-12));

    auto d_full = state_next_distribution(aba, static_cast<std::uint32_t>(walk(aba, "aba")));
    CHECK(!d_full.has_value());

    Automaton aab = built("aab");
    auto d = state_next_distribution(aab, static_cast<std::uint32_t>(walk(aab, "a")));
    REQUIRE(d.has_value());
    CHECK(d->at('a') == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(d->at('b') == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("kl divergence closed forms") {
    Distribution p = dist({{0, 0.3}, {1, 0.7}});
    CHECK(kl_divergence(p, p) == 0.0);

    CHECK(kl_divergence(dist({{5, 1.0}}), dist({{5, 0.5}, {6, 0.5}})) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(kl_divergence(dist({{1, 1.0}}), dist({{0, 2.0 / 3.0}, {1, 1.0 / 3.0}})) ==
          doctest::Approx(std::log(3.0)).epsilon(1e-12));

    CHECK_THROWS_WITH_AS(kl_divergence(dist({{2, 1.0}}), dist({{3, 1.0}})),
                         "baseline support violation", error);

    // Nonnegativity on random distribution pairs over a shared support.
    std::mt19937_64 rng(17);
    for (int it = 0; it < 200; ++it) {
        std::size_t support = 1 + rng() % 8;
        Distribution a, b;
        double ta = 0.0, tb = 0.0;
        for (std::size_t i = 0; i < support; ++i) {
            double xa = 1e-3 + static_cast<double>(rng() % 1000);
            double xb = 1e-3 + static_cast<double>(rng() % 1000);
            a.probs.emplace_back(static_cast<std::uint32_t>(i), xa);
            b.probs.emplace_back(static_cast<std::uint32_t>(i), xb);
            ta += xa;
            tb += xb;
        }
        for (auto& [t, v] : a.probs) v /= ta;
        for (auto& [t, v] : b.probs) v /= tb;
        CHECK(kl_divergence(a, b) >= -1e-12);
        CHECK(jensen_shannon(a, b) >= 0.0);
        CHECK(jensen_shannon(a, b) <= std::log(2.0) + 1e-12);
        CHECK(jensen_shannon(a, b) ==
              doctest::Approx(jensen_shannon(b, a)).epsilon(1e-12));
    }
}

TEST_CASE("jensen-shannon of disjoint supports is ln 2") {
    CHECK(jensen_shannon(dist({{0, 1.0}}), dist({{1, 1.0}})) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("global KL spectrum examples") {
    Automaton aba = built("aba");
    TokenStream s = tokenize_bytes("aba");
    Distribution baseline = global_next_distribution(s, 0.0);
    Spectrum spec = global_kl_spectrum(aba, baseline);
    REQUIRE(spec.size() == 3);
    // E({a}) = mu * KL({b:1} || {a:2/3, b:1/3}) = 0.5 * ln 3.
    CHECK(spec.weights[0] == doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-12));
    CHECK(!spec.normalized);
    CHECK(spec.provenance == Provenance::global_kl_raw);
    CHECK(spec.source_size == 3);

    // A state whose next distribution equals the baseline contributes 0:
    // in the unary corpus every kernel is {a:1} = baseline.
    Automaton unary = built("aaaaaa");
    TokenStream us = tokenize_bytes("aaaaaa");
    Spectrum uspec = global_kl_spectrum(unary, global_next_distribution(us, 0.0));
    for (double w : uspec.weights) CHECK(w == 0.0);
}

TEST_CASE("per-state counts never exceed occurrences") {
    std::mt19937_64 rng(23);
    for (int it = 0; it < 40; ++it) {
        TokenStream s;
        s.vocab_size = 6;
        s.tokens = oracle::random_stream(rng, 2 + rng() % 80, 2 + rng() % 4);
        Automaton a = build_sam(s);
        compute_occurrences(a);
        oracle::EndposOracle o(s.tokens);
        for (std::size_t i = 1; i < a.states.size(); ++i) {
            auto d = state_next_distribution(a, static_cast<std::uint32_t>(i));
            std::uint64_t count_total = 0;
            for (const Transition& t : a.states[i].transitions)
                count_total += a.states[t.target].occ;
            CHECK(count_total <= a.states[i].occ);
            if (!d) CHECK(count_total == 0);
        }
    }
}
