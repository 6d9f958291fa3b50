#include "constance/featurizer.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "constance/errors.hpp"
#include "constance/text_table.hpp"

namespace constance {

namespace {

struct CodePoint {
    std::size_t offset;
    std::size_t length;
    char32_t value;
};

// Malformed sequences decode one byte at a time.
std::vector<CodePoint> decode_utf8(std::string_view s) {
    std::vector<CodePoint> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const auto b = static_cast<unsigned char>(s[i]);
        std::size_t len = 1;
        char32_t cp = b;
        if (b >= 0xC0 && b < 0xE0) {
            len = 2;
            cp = b & 0x1F;
        } else if (b >= 0xE0 && b < 0xF0) {
            len = 3;
            cp = b & 0x0F;
        } else if (b >= 0xF0 && b < 0xF8) {
            len = 4;
            cp = b & 0x07;
        }
        bool ok = len == 1 || i + len <= s.size();
        for (std::size_t k = 1; ok && k < len; ++k) {
            const auto c = static_cast<unsigned char>(s[i + k]);
            if ((c & 0xC0) != 0x80) ok = false;
            cp = (cp << 6) | (c & 0x3F);
        }
        if (!ok) {
            len = 1;
            cp = b;
        }
        out.push_back({i, len, cp});
        i += len;
    }
    return out;
}

bool is_unicode_space(char32_t c) {
    return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 || c == 0x1680 ||
           (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F ||
           c == 0x205F || c == 0x3000;
}

}  // namespace

void NgramConfig::validate() const {
    if (char_min == 0 || char_min > char_max) throw ValidationError("invalid character n range");
    if (word_min == 0 || word_min > word_max) throw ValidationError("invalid word n range");
    if (min_count == 0) throw ValidationError("min_count must be >= 1");
}

std::string normalize_text(std::string_view text) {
    std::string out(text);
    for (auto& ch : out)
        if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
    return out;
}

std::vector<Token> extract_ngrams(std::string_view raw, const NgramConfig& config) {
    const std::string text = normalize_text(raw);
    const auto cps = decode_utf8(text);
    std::vector<Token> out;

    for (std::size_t n = config.char_min; n <= config.char_max; ++n) {
        for (std::size_t start = 0; start + n <= cps.size(); ++start) {
            const std::size_t begin = cps[start].offset;
            const std::size_t end = cps[start + n - 1].offset + cps[start + n - 1].length;
            out.push_back({TokenKind::Char, text.substr(begin, end - begin)});
        }
    }

    std::vector<std::string> words;
    std::size_t word_start = 0;
    bool in_word = false;
    for (const auto& cp : cps) {
        if (is_unicode_space(cp.value)) {
            if (in_word) words.push_back(text.substr(word_start, cp.offset - word_start));
            in_word = false;
        } else if (!in_word) {
            word_start = cp.offset;
            in_word = true;
        }
    }
    if (in_word) words.push_back(text.substr(word_start));

    for (std::size_t n = config.word_min; n <= config.word_max; ++n) {
        for (std::size_t start = 0; start + n <= words.size(); ++start) {
            std::string gram = words[start];
            for (std::size_t k = 1; k < n; ++k) gram += ' ' + words[start + k];
            out.push_back({TokenKind::Word, std::move(gram)});
        }
    }
    return out;
}

Vocabulary::Vocabulary(NgramConfig config, std::size_t num_documents, std::vector<Entry> entries)
    : config_(config), num_documents_(num_documents), entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return a.token < b.token; });
    for (std::size_t k = 0; k < entries_.size(); ++k) lookup_.emplace(entries_[k].token, k);
}

std::optional<std::size_t> Vocabulary::find(const Token& token) const {
    auto it = lookup_.find(token);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

double Vocabulary::idf(std::size_t index) const {
    const auto df = static_cast<double>(entries_.at(index).document_frequency);
    return std::log((1.0 + static_cast<double>(num_documents_)) / (1.0 + df)) + 1.0;
}

Vocabulary build_vocabulary(std::span<const std::string> corpus, const NgramConfig& config) {
    config.validate();
    if (corpus.empty()) throw ValidationError("cannot build a vocabulary from an empty corpus");
    std::map<Token, std::pair<std::size_t, std::size_t>> counts;  // (occurrences, documents)
    for (const auto& doc : corpus) {
        std::set<Token> seen;
        for (auto& token : extract_ngrams(doc, config)) {
            auto& entry = counts[token];
            ++entry.first;
            if (seen.insert(token).second) ++entry.second;
        }
    }
    std::vector<Vocabulary::Entry> entries;
    for (auto& [token, c] : counts)
        if (c.first >= config.min_count) entries.push_back({token, c.first, c.second});
    return Vocabulary(config, corpus.size(), std::move(entries));
}

FeatureVector featurize(const Vocabulary& vocab, std::string_view text) {
    std::unordered_map<std::size_t, std::size_t> tf;
    for (const auto& token : extract_ngrams(text, vocab.config()))
        if (const auto index = vocab.find(token)) ++tf[*index];
    std::vector<std::pair<std::uint32_t, double>> entries;
    entries.reserve(tf.size());
    for (const auto& [index, count] : tf)
        entries.emplace_back(static_cast<std::uint32_t>(index),
                             static_cast<double>(count) * vocab.idf(index));
    return FeatureVector::sparse(vocab.size(), std::move(entries));
}

std::string token_display(const Token& token) {
    std::string out = token.kind == TokenKind::Char ? "c:" : "w:";
    for (char ch : token.text) {
        switch (ch) {
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\\': out += "\\\\"; break;
            default: out += ch;
        }
    }
    return out;
}

void write_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path) {
    auto out = text::open_output(path);
    for (std::size_t k = 0; k < vocab.size(); ++k)
        out << token_display(vocab.entries()[k].token) << '\t' << k << '\t'
            << vocab.entries()[k].document_frequency << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace constance
