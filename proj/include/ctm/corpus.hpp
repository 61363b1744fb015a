#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ctm/common.hpp"

namespace ctm {

using TermId = std::int32_t;

/// Ordered list of distinct terms with a dense id in [0, V).
class Vocabulary {
public:
    Vocabulary() = default;
    explicit Vocabulary(std::vector<std::string> terms);

    /// Appends a term, returning its id. Throws if the term already exists.
    TermId add(std::string term);
    std::optional<TermId> find(const std::string& term) const;
    const std::string& term(TermId id) const { return terms_.at(static_cast<std::size_t>(id)); }
    const std::vector<std::string>& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }

    bool operator==(const Vocabulary& other) const { return terms_ == other.terms_; }

private:
    std::vector<std::string> terms_;
    std::unordered_map<std::string, TermId> index_;
};

struct TermCount {
    TermId term = 0;
    std::int32_t count = 0;
    bool operator==(const TermCount&) const = default;
};

/// Sparse word-count record for one document. Entries are sorted by term id.
struct BowDocument {
    std::string doc_id;
    std::vector<TermCount> entries;
    std::string title;
    std::string year;

    /// Total number of tokens.
    std::int64_t total() const;
    std::size_t unique_terms() const noexcept { return entries.size(); }

    /// Builds a document from arbitrary (term, count) pairs, merging duplicates.
    static BowDocument from_counts(std::string doc_id, std::vector<TermCount> counts);

    bool operator==(const BowDocument&) const = default;
};

struct Corpus {
    Vocabulary vocabulary;
    std::vector<BowDocument> documents;

    std::size_t num_docs() const noexcept { return documents.size(); }
    std::size_t vocab_size() const noexcept { return vocabulary.size(); }
    std::int64_t total_tokens() const;

    /// Checks ids, counts, and ordering; throws Error on the first violation.
    void validate() const;

    /// Corpus restricted to the given document indices, sharing the vocabulary.
    Corpus subset(const std::vector<std::size_t>& indices) const;

    bool operator==(const Corpus&) const = default;
};

/// Lowercased alphabetic tokens; every non-letter byte is a separator.
std::vector<std::string> tokenize(const std::string& text);

struct RawDocument {
    std::string doc_id;
    std::string text;
    std::string title;
    std::string year;
};

struct BuildReport {
    std::size_t raw_terms = 0;
    std::size_t kept_terms = 0;
    std::vector<std::string> dropped_documents;
};

/// Tokenizes, drops stop words and terms with corpus frequency below
/// `min_term_count`, and discards documents left empty. Vocabulary ids are
/// assigned in lexicographic term order.
Corpus build_corpus(const std::vector<RawDocument>& docs,
                    const std::unordered_set<std::string>& stop_words,
                    std::int64_t min_term_count,
                    BuildReport* report = nullptr,
                    unsigned threads = 1);

/// Bundled English stop-word list.
const std::unordered_set<std::string>& default_stop_words();

/// One document per line: `M t1:c1 t2:c2 ...` where M is the number of pairs.
void write_bow(const std::filesystem::path& path, const std::vector<BowDocument>& docs);
std::vector<BowDocument> read_bow(const std::filesystem::path& path);

void write_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab);
Vocabulary read_vocabulary(const std::filesystem::path& path);

/// Writes `corpus.bow`, `vocab.txt` and `docs.tsv` into `dir`.
void save_corpus(const std::filesystem::path& dir, const Corpus& corpus);
Corpus load_corpus(const std::filesystem::path& dir);

} // namespace ctm
