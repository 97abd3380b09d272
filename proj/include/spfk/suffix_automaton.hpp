#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "spfk/spectrum.hpp"
#include "spfk/token_stream.hpp"

namespace spfk {

struct Transition {
    std::uint32_t token;
    std::uint32_t target;
};

// One end-position equivalence class of substrings. Transitions are kept as
// a sorted association list keyed by token id.
struct SamState {
    std::vector<Transition> transitions;
    std::uint32_t len = 0;    // length of the longest substring in the class
    std::int32_t link = -1;   // suffix link; -1 only for the root
    std::uint64_t occ = 0;    // |endpos|, filled by compute_occurrences
    bool is_clone = false;

    // Target state for `token`, or -1.
    std::int64_t next(std::uint32_t token) const;
};

// Suffix automaton over a token stream. State 0 is the root; it carries no
// mass and is excluded from all spectra.
struct Automaton {
    std::vector<SamState> states;
    std::uint64_t source_length = 0;
    std::uint32_t vocab_size = 0;
    bool occ_computed = false;

    static constexpr std::uint32_t root = 0;

    std::uint64_t state_count() const { return states.size(); }
    std::uint64_t transition_count() const;
};

// Online construction; accepts exactly the substrings of s.
Automaton build_sam(const TokenStream& s);

// Fill occ(s) = |endpos(s)| by seeding non-clone states with 1 and summing
// counts up the suffix-link tree in decreasing-len order (counting sort, no
// recursion). occ(root) is defined as 0.
void compute_occurrences(Automaton& a);

// Sum over non-root states of len(s) - len(link(s)).
std::uint64_t distinct_substring_count(const Automaton& a);

// True iff `query` is a substring of the source stream.
bool accepts(const Automaton& a, std::span<const std::uint32_t> query);

// Descending-sorted state masses mu(s) = occ(s) / sum occ, root excluded.
// Ties broken by ascending state id. Requires compute_occurrences.
Spectrum state_mass_spectrum(const Automaton& a);

// Automaton file format (little-endian): magic "SPSA", version u32 = 1,
// vocab_size u32, source_length u64, state count u64, then per state:
// len u64, link i64 (-1 for root), occ u64, is_clone u8, transition count
// u32, pairs (token u32, target u64).
void save_automaton(const Automaton& a, const std::filesystem::path& path);
Automaton load_automaton(const std::filesystem::path& path);

}  // namespace spfk
