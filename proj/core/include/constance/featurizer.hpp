#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "constance/dataset.hpp"

namespace constance {

struct NgramConfig {
    std::size_t char_min = 3;
    std::size_t char_max = 5;
    std::size_t word_min = 1;
    std::size_t word_max = 3;
    // Tokens occurring fewer times than this across the corpus are dropped.
    std::size_t min_count = 10;

    void validate() const;
};

enum class TokenKind : std::uint8_t { Char = 0, Word = 1 };

struct Token {
    TokenKind kind = TokenKind::Char;
    std::string text;

    friend auto operator<=>(const Token&, const Token&) = default;
};

// Lowercases ASCII letters; other bytes pass through unchanged.
std::string normalize_text(std::string_view text);

// Every n-gram occurrence, characters counted as UTF-8 code points over the
// normalized text, words separated by Unicode whitespace.
std::vector<Token> extract_ngrams(std::string_view text, const NgramConfig& config);

class Vocabulary {
public:
    struct Entry {
        Token token;
        std::size_t corpus_count = 0;
        std::size_t document_frequency = 0;
    };

    Vocabulary() = default;
    Vocabulary(NgramConfig config, std::size_t num_documents, std::vector<Entry> entries);

    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    const std::vector<Entry>& entries() const noexcept { return entries_; }
    const NgramConfig& config() const noexcept { return config_; }
    std::size_t num_documents() const noexcept { return num_documents_; }
    std::optional<std::size_t> find(const Token& token) const;

    // log((1 + N) / (1 + df)) + 1
    double idf(std::size_t index) const;

private:
    NgramConfig config_;
    std::size_t num_documents_ = 0;
    std::vector<Entry> entries_;  // sorted by token
    std::map<Token, std::size_t> lookup_;
};

// Keeps n-grams whose total occurrence count reaches min_count. Indices follow
// token order: character n-grams first, each kind sorted lexicographically.
// Throws ValidationError on an empty corpus.
Vocabulary build_vocabulary(std::span<const std::string> corpus, const NgramConfig& config);

// tf-idf vector with raw term counts; out-of-vocabulary n-grams are ignored.
FeatureVector featurize(const Vocabulary& vocab, std::string_view text);

// "c:" or "w:" prefix, then the n-gram with tab, newline and backslash escaped.
std::string token_display(const Token& token);

// token<TAB>index<TAB>df
void write_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path);

}  // namespace constance
