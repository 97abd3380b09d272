#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "sam_check.hpp"
#include "spfk/error.hpp"
#include "spfk/suffix_automaton.hpp"

using namespace spfk;

namespace {

TokenStream bytes(const char* text) {
    return tokenize_bytes(text);
}

Automaton built(const char* text) {
    Automaton a = build_sam(bytes(text));
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

TEST_CASE("state counts on tiny streams") {
    CHECK(built("aa").state_count() == 3);   // root + {a} + {aa}
    CHECK(built("aba").state_count() == 4);  // root + {a} + {b,ab} + {ba,aba}
    for (std::size_t k = 1; k <= 8; ++k) {
        std::string unary(k, 'a');
        CHECK(built(unary.c_str()).state_count() == k + 1);
    }
}

TEST_CASE("aba endpos classes and occurrences") {
    Automaton a = built("aba");
    std::int64_t s_a = walk(a, "a");
    std::int64_t s_b = walk(a, "b");
    std::int64_t s_ab = walk(a, "ab");
    std::int64_t s_ba = walk(a, "ba");
    std::int64_t s_aba = walk(a, "aba");
    REQUIRE(s_a != -1);
    CHECK(s_b == s_ab);    // endpos {2}
    CHECK(s_ba == s_aba);  // endpos {3}
    CHECK(s_a != s_b);
    CHECK(a.states[s_a].occ == 2);
    CHECK(a.states[s_b].occ == 1);
    CHECK(a.states[s_ba].occ == 1);
}

TEST_CASE("occurrence counts") {
    Automaton a = built("aaaa");
    CHECK(a.states[walk(a, "a")].occ == 4);
    CHECK(a.states[walk(a, "aaaa")].occ == 1);

    Automaton b = built("abacaba");
    CHECK(b.states[walk(b, "abacaba")].occ == 1);
    CHECK(b.states[walk(b, "a")].occ == 4);
    CHECK(b.states[walk(b, "aba")].occ == 2);
}

TEST_CASE("distinct substring counts") {
    CHECK(distinct_substring_count(built("aba")) == 5);  // a b ab ba aba
    CHECK(distinct_substring_count(built("aa")) == 2);
    CHECK(distinct_substring_count(built("x")) == 1);
}

TEST_CASE("state mass spectrum") {
    Spectrum aba = state_mass_spectrum(built("aba"));
    REQUIRE(aba.size() == 3);
    CHECK(aba.weights[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(aba.weights[1] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(aba.weights[2] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(aba.normalized);
    CHECK(aba.provenance == Provenance::state_mass);

    Spectrum unary = state_mass_spectrum(built("aaa"));
    REQUIRE(unary.size() == 3);
    CHECK(unary.weights[0] == doctest::Approx(3.0 / 6.0).epsilon(1e-12));
    CHECK(unary.weights[1] == doctest::Approx(2.0 / 6.0).epsilon(1e-12));
    CHECK(unary.weights[2] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));

    std::mt19937_64 rng(99);
    for (int it = 0; it < 20; ++it) {
        auto tokens = oracle::random_stream(rng, 2 + rng() % 120, 2 + rng() % 7);
        TokenStream s;
        s.tokens = tokens;
        s.vocab_size = 8;
        Automaton a = build_sam(s);
        compute_occurrences(a);
        Spectrum mass = state_mass_spectrum(a);
        double total = 0.0;
        for (double w : mass.weights) total += w;
        CHECK(std::abs(total - 1.0) <= 1e-12);
        for (std::size_t i = 1; i < mass.size(); ++i)
            CHECK(mass.weights[i - 1] >= mass.weights[i]);
    }
}

TEST_CASE("fuzz against the endpos oracle") {
    std::mt19937_64 rng(2024);
    for (int it = 0; it < 150; ++it) {
        std::uint32_t alphabet = 2 + static_cast<std::uint32_t>(rng() % 7);
        std::size_t length = 2 + rng() % 119;
        auto tokens = oracle::random_stream(rng, length, alphabet);
        std::string verdict = oracle::check_sam_against_oracle(tokens, alphabet, rng);
        if (!verdict.empty()) {
            CAPTURE(it);
            CAPTURE(verdict);
            FAIL_CHECK("oracle mismatch: " << verdict);
            break;
        }
    }
}

TEST_CASE("build rejects invalid streams") {
    TokenStream empty;
    empty.vocab_size = 4;
    CHECK_THROWS_WITH_AS(build_sam(empty), "empty corpus", error);

    TokenStream bad;
    bad.vocab_size = 4;
    bad.tokens = {1, 9};
    CHECK_THROWS_WITH_AS(build_sam(bad), "token out of range", error);
}

TEST_CASE("automaton save/load round trip") {
    auto path = std::filesystem::temp_directory_path() / "spfk_roundtrip.sam";
    std::mt19937_64 rng(5);
    auto tokens = oracle::random_stream(rng, 200, 5);
    TokenStream s;
    s.tokens = tokens;
    s.vocab_size = 5;
    Automaton a = build_sam(s);
    compute_occurrences(a);
    save_automaton(a, path);
    Automaton b = load_automaton(path);

    REQUIRE(a.state_count() == b.state_count());
    CHECK(a.source_length == b.source_length);
    CHECK(a.vocab_size == b.vocab_size);
    CHECK(b.occ_computed);
    for (std::size_t i = 0; i < a.states.size(); ++i) {
        CHECK(a.states[i].len == b.states[i].len);
        CHECK(a.states[i].link == b.states[i].link);
        CHECK(a.states[i].occ == b.states[i].occ);
        CHECK(a.states[i].is_clone == b.states[i].is_clone);
        REQUIRE(a.states[i].transitions.size() == b.states[i].transitions.size());
        for (std::size_t j = 0; j < a.states[i].transitions.size(); ++j) {
            CHECK(a.states[i].transitions[j].token == b.states[i].transitions[j].token);
            CHECK(a.states[i].transitions[j].target == b.states[i].transitions[j].target);
        }
    }

    // Corrupt the magic.
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(0);
    f.put('X');
    f.close();
    CHECK_THROWS_WITH_AS(load_automaton(path), "unrecognized format", error);
}
