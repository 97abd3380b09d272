#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace spfk {

// A tokenized corpus: a flat sequence of token ids plus the declared
// vocabulary size. Token ids are 32-bit; every id must be < vocab_size.
struct TokenStream {
    std::vector<std::uint32_t> tokens;
    std::uint32_t vocab_size = 0;

    std::uint64_t size() const { return tokens.size(); }
};

// Byte-level fallback tokenizer: token ids are the raw byte values,
// vocab_size is 256. Throws "empty corpus" on empty input.
TokenStream tokenize_bytes(std::string_view raw);

// Prefix truncation to min(target, length) tokens. target must be >= 2.
TokenStream prepare_corpus(const TokenStream& s, std::uint64_t target);

// Binary token-stream format (little-endian):
//   magic "SPFK", version u32 = 1, vocab_size u32, count u64, count x u32 ids.
void save_token_stream(const TokenStream& s, const std::filesystem::path& path);
TokenStream load_token_stream(const std::filesystem::path& path);

// Parse whitespace-separated decimal token ids. vocab_size_hint = 0 means
// "use max id + 1".
TokenStream parse_token_text(std::string_view text, std::uint32_t vocab_size_hint);

}  // namespace spfk
