#include "spfk/token_stream.hpp"

#include <charconv>
#include <cstring>
#include <fstream>

#include "spfk/error.hpp"

namespace spfk {

namespace {

constexpr char kMagic[4] = {'S', 'P', 'F', 'K'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    char b[4];
    b[0] = static_cast<char>(v & 0xff);
    b[1] = static_cast<char>((v >> 8) & 0xff);
    b[2] = static_cast<char>((v >> 16) & 0xff);
    b[3] = static_cast<char>((v >> 24) & 0xff);
    out.append(b, 4);
}

void put_u64(std::string& out, std::uint64_t v) {
    put_u32(out, static_cast<std::uint32_t>(v & 0xffffffffu));
    put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

class Reader {
public:
    Reader(const char* data, std::size_t size) : data_(data), size_(size) {}

    std::uint32_t u32(const char* context) {
        if (pos_ + 4 > size_) throw error(context);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i)
            v = (v << 8) | static_cast<unsigned char>(data_[pos_ + i]);
        pos_ += 4;
        return v;
    }

    std::uint64_t u64(const char* context) {
        std::uint64_t lo = u32(context);
        std::uint64_t hi = u32(context);
        return lo | (hi << 32);
    }

    bool exhausted() const { return pos_ == size_; }

private:
    const char* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    return bytes;
}

}  // namespace

TokenStream tokenize_bytes(std::string_view raw) {
    if (raw.empty()) throw error("empty corpus");
    TokenStream s;
    s.vocab_size = 256;
    s.tokens.reserve(raw.size());
    for (char c : raw) s.tokens.push_back(static_cast<unsigned char>(c));
    return s;
}

TokenStream prepare_corpus(const TokenStream& s, std::uint64_t target) {
    if (target < 2) throw error("prepare target must be at least 2");
    TokenStream out;
    out.vocab_size = s.vocab_size;
    std::uint64_t keep = std::min<std::uint64_t>(target, s.tokens.size());
    out.tokens.assign(s.tokens.begin(), s.tokens.begin() + keep);
    return out;
}

void save_token_stream(const TokenStream& s, const std::filesystem::path& path) {
    std::string out;
    out.reserve(20 + 4 * s.tokens.size());
    out.append(kMagic, 4);
    put_u32(out, kVersion);
    put_u32(out, s.vocab_size);
    put_u64(out, s.tokens.size());
    for (std::uint32_t t : s.tokens) put_u32(out, t);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw error("cannot write " + path.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw error("cannot write " + path.string());
}

TokenStream load_token_stream(const std::filesystem::path& path) {
    std::string bytes = read_file(path);
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw error("unrecognized format");
    Reader r(bytes.data() + 4, bytes.size() - 4);
    if (r.u32("unrecognized format") != kVersion) throw error("unrecognized format");
    TokenStream s;
    s.vocab_size = r.u32("corrupt stream");
    std::uint64_t count = r.u64("corrupt stream");
    s.tokens.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint32_t t = r.u32("corrupt stream");
        if (t >= s.vocab_size) throw error("token out of range");
        s.tokens.push_back(t);
    }
    if (!r.exhausted()) throw error("corrupt stream");
    return s;
}

TokenStream parse_token_text(std::string_view text, std::uint32_t vocab_size_hint) {
    TokenStream s;
    const char* p = text.data();
    const char* end = p + text.size();
    std::uint32_t max_id = 0;
    while (p < end) {
        while (p < end && std::isspace(static_cast<unsigned char>(*p))) ++p;
        if (p == end) break;
        std::uint32_t value = 0;
        auto [next, ec] = std::from_chars(p, end, value);
        if (ec != std::errc()) throw error("invalid token text");
        s.tokens.push_back(value);
        max_id = std::max(max_id, value);
        p = next;
    }
    if (s.tokens.empty()) throw error("empty corpus");
    s.vocab_size = vocab_size_hint != 0 ? vocab_size_hint : max_id + 1;
    if (max_id >= s.vocab_size) throw error("token out of range");
    return s;
}

}  // namespace spfk
