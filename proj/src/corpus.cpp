#include "ctm/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "ctm/parallel.hpp"

namespace ctm {

Vocabulary::Vocabulary(std::vector<std::string> terms) {
    for (auto& t : terms) add(std::move(t));
}

TermId Vocabulary::add(std::string term) {
    auto id = static_cast<TermId>(terms_.size());
    auto [it, inserted] = index_.emplace(term, id);
    if (!inserted) throw Error("duplicate vocabulary term '" + term + "'");
    terms_.push_back(std::move(term));
    return id;
}

std::optional<TermId> Vocabulary::find(const std::string& term) const {
    auto it = index_.find(term);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::int64_t BowDocument::total() const {
    std::int64_t n = 0;
    for (const auto& e : entries) n += e.count;
    return n;
}

BowDocument BowDocument::from_counts(std::string doc_id, std::vector<TermCount> counts) {
    std::map<TermId, std::int32_t> merged;
    for (const auto& c : counts) {
        if (c.count <= 0) continue;
        merged[c.term] += c.count;
    }
    BowDocument doc;
    doc.doc_id = std::move(doc_id);
    doc.entries.reserve(merged.size());
    for (const auto& [term, count] : merged) doc.entries.push_back({term, count});
    return doc;
}

std::int64_t Corpus::total_tokens() const {
    std::int64_t n = 0;
    for (const auto& d : documents) n += d.total();
    return n;
}

void Corpus::validate() const {
    if (vocabulary.size() == 0) throw EmptyCorpusError("vocabulary is empty");
    if (documents.empty()) throw EmptyCorpusError("corpus has no documents");
    const auto V = static_cast<TermId>(vocabulary.size());
    for (const auto& doc : documents) {
        if (doc.entries.empty()) throw Error("document '" + doc.doc_id + "' is empty");
        TermId prev = -1;
        for (const auto& e : doc.entries) {
            if (e.term <= prev || e.term >= V)
                throw Error("document '" + doc.doc_id + "' has invalid term id " +
                            std::to_string(e.term));
            if (e.count < 1)
                throw Error("document '" + doc.doc_id + "' has nonpositive count");
            prev = e.term;
        }
    }
}

Corpus Corpus::subset(const std::vector<std::size_t>& indices) const {
    Corpus out;
    out.vocabulary = vocabulary;
    out.documents.reserve(indices.size());
    for (auto i : indices) out.documents.push_back(documents.at(i));
    return out;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) {
            current.push_back(static_cast<char>(c | 0x20));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

Corpus build_corpus(const std::vector<RawDocument>& docs,
                    const std::unordered_set<std::string>& stop_words,
                    std::int64_t min_term_count, BuildReport* report, unsigned threads) {
    if (min_term_count < 1) throw Error("min_term_count must be at least 1");

    std::vector<std::map<std::string, std::int32_t>> per_doc(docs.size());
    parallel_for(docs.size(), threads, [&](std::size_t i) {
        for (auto& tok : tokenize(docs[i].text)) ++per_doc[i][tok];
    });

    // Merge in document order so the result is independent of worker count.
    std::map<std::string, std::int64_t> freq;
    for (const auto& counts : per_doc)
        for (const auto& [term, c] : counts) freq[term] += c;

    Vocabulary vocab;
    for (const auto& [term, c] : freq) {
        if (c >= min_term_count && !stop_words.contains(term)) vocab.add(term);
    }

    Corpus corpus;
    BuildReport local;
    local.raw_terms = freq.size();
    local.kept_terms = vocab.size();
    for (std::size_t i = 0; i < docs.size(); ++i) {
        BowDocument doc;
        doc.doc_id = docs[i].doc_id;
        doc.title = docs[i].title;
        doc.year = docs[i].year;
        for (const auto& [term, c] : per_doc[i]) {
            if (auto id = vocab.find(term)) doc.entries.push_back({*id, c});
        }
        if (doc.entries.empty()) {
            local.dropped_documents.push_back(doc.doc_id);
            continue;
        }
        std::sort(doc.entries.begin(), doc.entries.end(),
                  [](const TermCount& a, const TermCount& b) { return a.term < b.term; });
        corpus.documents.push_back(std::move(doc));
    }
    if (corpus.documents.empty())
        throw EmptyCorpusError("every document is empty after pruning");
    corpus.vocabulary = std::move(vocab);
    if (report) *report = std::move(local);
    return corpus;
}

void write_bow(const std::filesystem::path& path, const std::vector<BowDocument>& docs) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& doc : docs) {
        out << doc.entries.size();
        for (const auto& e : doc.entries) out << ' ' << e.term << ':' << e.count;
        out << '\n';
    }
}

namespace {

bool parse_int(const std::string& s, long long& value) {
    if (s.empty()) return false;
    std::size_t pos = 0;
    try {
        value = std::stoll(s, &pos);
    } catch (...) {
        return false;
    }
    return pos == s.size();
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep)) fields.push_back(field);
    if (!line.empty() && line.back() == sep) fields.emplace_back();
    return fields;
}

} // namespace

std::vector<BowDocument> read_bow(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path.string());
    std::vector<BowDocument> docs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string tok;
        fields >> tok;
        long long pairs = 0;
        if (!parse_int(tok, pairs) || pairs < 0)
            throw ParseError(path.string(), lineno, "expected pair count, got '" + tok + "'");
        BowDocument doc;
        doc.doc_id = std::to_string(docs.size());
        TermId prev = -1;
        while (fields >> tok) {
            auto colon = tok.find(':');
            long long term = 0, count = 0;
            if (colon == std::string::npos || !parse_int(tok.substr(0, colon), term) ||
                !parse_int(tok.substr(colon + 1), count))
                throw ParseError(path.string(), lineno, "malformed entry '" + tok + "'");
            if (term <= prev) throw ParseError(path.string(), lineno, "term ids not increasing");
            if (count < 1) throw ParseError(path.string(), lineno, "count must be positive");
            doc.entries.push_back({static_cast<TermId>(term), static_cast<std::int32_t>(count)});
            prev = static_cast<TermId>(term);
        }
        if (static_cast<long long>(doc.entries.size()) != pairs)
            throw ParseError(path.string(), lineno,
                             "declared " + std::to_string(pairs) + " entries, found " +
                                 std::to_string(doc.entries.size()));
        if (doc.entries.empty()) throw ParseError(path.string(), lineno, "empty document");
        docs.push_back(std::move(doc));
    }
    return docs;
}

void write_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& t : vocab.terms()) out << t << '\n';
}

Vocabulary read_vocabulary(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path.string());
    Vocabulary vocab;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.find_first_of(" \t\r") != std::string::npos)
            throw ParseError(path.string(), lineno, "invalid term '" + line + "'");
        if (vocab.find(line)) throw ParseError(path.string(), lineno, "duplicate term '" + line + "'");
        vocab.add(line);
    }
    return vocab;
}

void save_corpus(const std::filesystem::path& dir, const Corpus& corpus) {
    corpus.validate();
    std::filesystem::create_directories(dir);
    write_bow(dir / "corpus.bow", corpus.documents);
    write_vocabulary(dir / "vocab.txt", corpus.vocabulary);
    std::ofstream out(dir / "docs.tsv");
    if (!out) throw Error("cannot write " + (dir / "docs.tsv").string());
    for (const auto& doc : corpus.documents) {
        for (const auto* field : {&doc.doc_id, &doc.title, &doc.year})
            if (field->find_first_of("\t\n") != std::string::npos)
                throw Error("document metadata contains a tab or newline: " + doc.doc_id);
        out << doc.doc_id << '\t' << doc.title << '\t' << doc.year << '\n';
    }
}

Corpus load_corpus(const std::filesystem::path& dir) {
    Corpus corpus;
    corpus.vocabulary = read_vocabulary(dir / "vocab.txt");
    corpus.documents = read_bow(dir / "corpus.bow");
    auto meta_path = dir / "docs.tsv";
    if (std::filesystem::exists(meta_path)) {
        std::ifstream in(meta_path);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (lineno > corpus.documents.size())
                throw ParseError(meta_path.string(), lineno, "more metadata rows than documents");
            auto fields = split(line, '\t');
            if (fields.size() != 3)
                throw ParseError(meta_path.string(), lineno, "expected 3 tab-separated fields");
            auto& doc = corpus.documents[lineno - 1];
            doc.doc_id = fields[0];
            doc.title = fields[1];
            doc.year = fields[2];
        }
        if (lineno != corpus.documents.size())
            throw ParseError(meta_path.string(), lineno, "fewer metadata rows than documents");
    }
    corpus.validate();
    return corpus;
}

const std::unordered_set<std::string>& default_stop_words() {
    static const std::unordered_set<std::string> words = {
        "a", "about", "above", "across", "after", "afterwards", "again", "against", "all",
        "almost", "alone", "along", "already", "also", "although", "always", "am", "among",
        "amongst", "an", "and", "another", "any", "anyhow", "anyone", "anything", "anyway",
        "anywhere", "are", "around", "as", "at", "back", "be", "became", "because", "become",
        "becomes", "becoming", "been", "before", "beforehand", "behind", "being", "below",
        "beside", "besides", "between", "beyond", "both", "but", "by", "can", "cannot", "could",
        "did", "do", "does", "doing", "done", "down", "due", "during", "each", "eg", "eight",
        "either", "eleven", "else", "elsewhere", "enough", "etc", "even", "ever", "every",
        "everyone", "everything", "everywhere", "except", "few", "fifteen", "fifty", "first",
        "five", "for", "former", "formerly", "forty", "four", "from", "further", "had", "has",
        "have", "having", "he", "hence", "her", "here", "hereafter", "hereby", "herein",
        "hereupon", "hers", "herself", "him", "himself", "his", "how", "however", "hundred",
        "i", "ie", "if", "in", "indeed", "into", "is", "it", "its", "itself", "just", "last",
        "latter", "latterly", "least", "less", "made", "many", "may", "me", "meanwhile",
        "might", "mine", "more", "moreover", "most", "mostly", "much", "must", "my", "myself",
        "namely", "neither", "never", "nevertheless", "next", "nine", "no", "nobody", "none",
        "noone", "nor", "not", "nothing", "now", "nowhere", "of", "off", "often", "on", "once",
        "one", "only", "onto", "or", "other", "others", "otherwise", "our", "ours", "ourselves",
        "out", "over", "own", "per", "perhaps", "please", "rather", "re", "same", "seem",
        "seemed", "seeming", "seems", "several", "she", "should", "since", "six", "sixty", "so",
        "some", "somehow", "someone", "something", "sometime", "sometimes", "somewhere",
        "still", "such", "ten", "than", "that", "the", "their", "theirs", "them", "themselves",
        "then", "thence", "there", "thereafter", "thereby", "therefore", "therein",
        "thereupon", "these", "they", "third", "this", "those", "though", "three", "through",
        "throughout", "thru", "thus", "to", "together", "too", "toward", "towards", "twelve",
        "twenty", "two", "un", "under", "until", "up", "upon", "us", "very", "via", "was", "we",
        "well", "were", "what", "whatever", "when", "whence", "whenever", "where", "whereafter",
        "whereas", "whereby", "wherein", "whereupon", "wherever", "whether", "which", "while",
        "whither", "who", "whoever", "whole", "whom", "whose", "why", "will", "with", "within",
        "without", "would", "yet", "you", "your", "yours", "yourself", "yourselves", "s", "t",
        "et", "al", "fig", "figure", "table", "shown", "show", "shows", "using", "used", "use",
        "found", "however", "thus", "within", "among", "new", "data", "may", "de",
    };
    return words;
}

} // namespace ctm
