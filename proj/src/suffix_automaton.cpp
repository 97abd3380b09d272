#include "spfk/suffix_automaton.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>

#include "spfk/error.hpp"

namespace spfk {

namespace {

// Sorted association-list insert/update.
void set_transition(SamState& st, std::uint32_t token, std::uint32_t target) {
    auto it = std::lower_bound(st.transitions.begin(), st.transitions.end(), token,
                               [](const Transition& t, std::uint32_t tok) {
                                   return t.token < tok;
                               });
    if (it != st.transitions.end() && it->token == token)
        it->target = target;
    else
        st.transitions.insert(it, Transition{token, target});
}

}  // namespace

std::int64_t SamState::next(std::uint32_t token) const {
    auto it = std::lower_bound(transitions.begin(), transitions.end(), token,
                               [](const Transition& t, std::uint32_t tok) {
                                   return t.token < tok;
                               });
    if (it == transitions.end() || it->token != token) return -1;
    return it->target;
}

std::uint64_t Automaton::transition_count() const {
    std::uint64_t total = 0;
    for (const SamState& st : states) total += st.transitions.size();
    return total;
}

Automaton build_sam(const TokenStream& s) {
    if (s.tokens.empty()) throw error("empty corpus");
    for (std::uint32_t t : s.tokens)
        if (t >= s.vocab_size) throw error("token out of range");

    Automaton a;
    a.source_length = s.tokens.size();
    a.vocab_size = s.vocab_size;
    a.states.reserve(2 * s.tokens.size());
    a.states.emplace_back();  // root: len 0, link -1

    std::uint32_t last = 0;
    for (std::uint32_t token : s.tokens) {
        std::uint32_t cur = static_cast<std::uint32_t>(a.states.size());
        {
            SamState st;
            st.len = a.states[last].len + 1;
            a.states.push_back(std::move(st));
        }
        std::int64_t p = last;
        while (p != -1 && a.states[p].next(token) == -1) {
            set_transition(a.states[p], token, cur);
            p = a.states[p].link;
        }
        if (p == -1) {
            a.states[cur].link = 0;
        } else {
            std::uint32_t q = static_cast<std::uint32_t>(a.states[p].next(token));
            if (a.states[q].len == a.states[p].len + 1) {
                a.states[cur].link = static_cast<std::int32_t>(q);
            } else {
                std::uint32_t clone = static_cast<std::uint32_t>(a.states.size());
                {
                    SamState st = a.states[q];  // copies transitions and link
                    st.len = a.states[p].len + 1;
                    st.is_clone = true;
                    a.states.push_back(std::move(st));
                }
                while (p != -1 && a.states[p].next(token) == static_cast<std::int64_t>(q)) {
                    set_transition(a.states[p], token, clone);
                    p = a.states[p].link;
                }
                a.states[q].link = static_cast<std::int32_t>(clone);
                a.states[cur].link = static_cast<std::int32_t>(clone);
            }
        }
        last = cur;
    }
    return a;
}

void compute_occurrences(Automaton& a) {
    const std::size_t n_states = a.states.size();
    for (std::size_t i = 1; i < n_states; ++i)
        a.states[i].occ = a.states[i].is_clone ? 0 : 1;

    // Counting sort by len; propagate in decreasing-len order so every child
    // is folded into its parent exactly once.
    std::uint32_t max_len = 0;
    for (const SamState& st : a.states) max_len = std::max(max_len, st.len);
    std::vector<std::uint32_t> bucket(max_len + 2, 0);
    for (const SamState& st : a.states) ++bucket[st.len + 1];
    for (std::uint32_t l = 1; l < bucket.size(); ++l) bucket[l] += bucket[l - 1];
    std::vector<std::uint32_t> by_len(n_states);
    for (std::uint32_t i = 0; i < n_states; ++i) by_len[bucket[a.states[i].len]++] = i;

    for (std::size_t idx = n_states; idx-- > 0;) {
        std::uint32_t v = by_len[idx];
        if (v == Automaton::root) continue;
        a.states[a.states[v].link].occ += a.states[v].occ;
    }
    a.states[Automaton::root].occ = 0;
    a.occ_computed = true;
}

std::uint64_t distinct_substring_count(const Automaton& a) {
    std::uint64_t total = 0;
    for (std::size_t i = 1; i < a.states.size(); ++i)
        total += a.states[i].len - a.states[a.states[i].link].len;
    return total;
}

bool accepts(const Automaton& a, std::span<const std::uint32_t> query) {
    std::uint32_t state = Automaton::root;
    for (std::uint32_t token : query) {
        std::int64_t next = a.states[state].next(token);
        if (next == -1) return false;
        state = static_cast<std::uint32_t>(next);
    }
    return true;
}

Spectrum state_mass_spectrum(const Automaton& a) {
    if (!a.occ_computed) throw error("occurrences not computed");
    std::uint64_t total = 0;
    for (std::size_t i = 1; i < a.states.size(); ++i) total += a.states[i].occ;

    std::vector<std::pair<double, std::uint32_t>> entries;
    entries.reserve(a.states.size() - 1);
    for (std::size_t i = 1; i < a.states.size(); ++i)
        entries.emplace_back(static_cast<double>(a.states[i].occ) / static_cast<double>(total),
                             static_cast<std::uint32_t>(i));
    std::sort(entries.begin(), entries.end(), [](const auto& x, const auto& y) {
        if (x.first != y.first) return x.first > y.first;
        return x.second < y.second;
    });

    Spectrum sp;
    sp.provenance = Provenance::state_mass;
    sp.normalized = true;
    sp.source_size = a.source_length;
    sp.weights.reserve(entries.size());
    for (const auto& [w, id] : entries) sp.weights.push_back(w);
    return sp;
}

namespace {

constexpr char kSamMagic[4] = {'S', 'P', 'S', 'A'};
constexpr std::uint32_t kSamVersion = 1;

class BufWriter {
public:
    explicit BufWriter(const std::filesystem::path& path)
        : out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw error("cannot write " + path.string());
        buf_.reserve(1 << 20);
    }

    void bytes(const char* p, std::size_t n) {
        buf_.append(p, n);
        if (buf_.size() >= (1 << 20)) flush();
    }
    void u8(std::uint8_t v) { bytes(reinterpret_cast<const char*>(&v), 1); }
    void u32(std::uint32_t v) {
        char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
        bytes(b, 4);
    }
    void u64(std::uint64_t v) {
        u32(static_cast<std::uint32_t>(v & 0xffffffffu));
        u32(static_cast<std::uint32_t>(v >> 32));
    }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }

    void finish() {
        flush();
        out_.flush();
        if (!out_) throw error("write failed");
    }

private:
    void flush() {
        out_.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
        buf_.clear();
    }
    std::ofstream out_;
    std::string buf_;
};

class BufReader {
public:
    explicit BufReader(const std::filesystem::path& path)
        : in_(path, std::ios::binary) {
        if (!in_) throw error("cannot open " + path.string());
    }

    void bytes(char* p, std::size_t n) {
        in_.read(p, static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) throw error("corrupt automaton");
    }
    std::uint8_t u8() {
        char c;
        bytes(&c, 1);
        return static_cast<std::uint8_t>(c);
    }
    std::uint32_t u32() {
        unsigned char b[4];
        bytes(reinterpret_cast<char*>(b), 4);
        return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    }
    std::uint64_t u64() {
        std::uint64_t lo = u32();
        std::uint64_t hi = u32();
        return lo | (hi << 32);
    }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    bool exhausted() { return in_.peek() == std::ifstream::traits_type::eof(); }

private:
    std::ifstream in_;
};

}  // namespace

void save_automaton(const Automaton& a, const std::filesystem::path& path) {
    BufWriter w(path);
    w.bytes(kSamMagic, 4);
    w.u32(kSamVersion);
    w.u32(a.vocab_size);
    w.u64(a.source_length);
    w.u64(a.states.size());
    for (const SamState& st : a.states) {
        w.u64(st.len);
        w.i64(st.link);
        w.u64(st.occ);
        w.u8(st.is_clone ? 1 : 0);
        w.u32(static_cast<std::uint32_t>(st.transitions.size()));
        for (const Transition& t : st.transitions) {
            w.u32(t.token);
            w.u64(t.target);
        }
    }
    w.finish();
}

Automaton load_automaton(const std::filesystem::path& path) {
    BufReader r(path);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kSamMagic, 4) != 0) throw error("unrecognized format");
    if (r.u32() != kSamVersion) throw error("unrecognized format");
    Automaton a;
    a.vocab_size = r.u32();
    a.source_length = r.u64();
    std::uint64_t count = r.u64();
    if (count == 0) throw error("corrupt automaton");
    a.states.resize(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        SamState& st = a.states[i];
        st.len = static_cast<std::uint32_t>(r.u64());
        std::int64_t link = r.i64();
        if (link < -1 || link >= static_cast<std::int64_t>(count))
            throw error("corrupt automaton");
        st.link = static_cast<std::int32_t>(link);
        st.occ = r.u64();
        st.is_clone = r.u8() != 0;
        std::uint32_t tcount = r.u32();
        st.transitions.resize(tcount);
        std::uint32_t prev_token = 0;
        for (std::uint32_t j = 0; j < tcount; ++j) {
            st.transitions[j].token = r.u32();
            std::uint64_t target = r.u64();
            if (target == 0 || target >= count) throw error("corrupt automaton");
            st.transitions[j].target = static_cast<std::uint32_t>(target);
            if (j > 0 && st.transitions[j].token <= prev_token)
                throw error("corrupt automaton");
            prev_token = st.transitions[j].token;
        }
    }
    if (a.states[0].link != -1 || a.states[0].len != 0) throw error("corrupt automaton");
    if (!r.exhausted()) throw error("corrupt automaton");
    a.occ_computed = true;
    for (std::uint64_t i = 1; i < count; ++i)
        if (a.states[i].occ == 0) {
            a.occ_computed = false;
            break;
        }
    return a;
}

}  // namespace spfk
