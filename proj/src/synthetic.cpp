#include "ctm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "ctm/numerics.hpp"
#include "ctm/random.hpp"

namespace ctm {

std::vector<std::string> pseudo_words(std::size_t count) {
    static const std::string consonants = "bdfgklmnprstvz";
    static const std::string vowels = "aeiou";
    const std::size_t syllables = consonants.size() * vowels.size();
    std::vector<std::string> words;
    words.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        // Three syllables cover 70^3 words; prefix with extra syllables beyond that.
        std::string w;
        std::size_t x = i;
        for (int s = 0; s < 3 || x > 0; ++s) {
            const std::size_t syl = x % syllables;
            x /= syllables;
            w.push_back(consonants[syl / vowels.size()]);
            w.push_back(vowels[syl % vowels.size()]);
        }
        words.push_back(std::move(w));
    }
    return words;
}

RowMatrix random_log_topics(Eigen::Index num_topics, Eigen::Index vocab_size, double concentration,
                            std::uint64_t seed) {
    Rng rng(seed);
    std::gamma_distribution<double> gamma(concentration, 1.0);
    RowMatrix log_beta(num_topics, vocab_size);
    for (Eigen::Index i = 0; i < num_topics; ++i) {
        Eigen::RowVectorXd row(vocab_size);
        for (Eigen::Index w = 0; w < vocab_size; ++w) row(w) = gamma(rng) + 1e-12;
        log_beta.row(i) = (row / row.sum()).array().log();
    }
    return log_beta;
}

Matrix correlated_covariance(Eigen::Index num_topics, double scale,
                             const std::vector<std::pair<Eigen::Index, Eigen::Index>>& pairs, double rho) {
    Matrix sigma = Matrix::Identity(num_topics, num_topics);
    for (auto [a, b] : pairs) {
        sigma(a, b) = rho;
        sigma(b, a) = rho;
    }
    return scale * sigma;
}

namespace {

Corpus sample_from_thetas(const RowMatrix& log_beta, const std::vector<Vector>& thetas, int words_per_doc,
                          Rng& rng) {
    const auto V = log_beta.cols();
    Corpus corpus;
    corpus.vocabulary = Vocabulary(pseudo_words(static_cast<std::size_t>(V)));
    std::vector<std::discrete_distribution<Eigen::Index>> topic_dists;
    for (Eigen::Index i = 0; i < log_beta.rows(); ++i) {
        std::vector<double> p(static_cast<std::size_t>(V));
        for (Eigen::Index w = 0; w < V; ++w) p[static_cast<std::size_t>(w)] = std::exp(log_beta(i, w));
        topic_dists.emplace_back(p.begin(), p.end());
    }
    for (std::size_t d = 0; d < thetas.size(); ++d) {
        std::discrete_distribution<Eigen::Index> topic_of(thetas[d].data(), thetas[d].data() + thetas[d].size());
        std::vector<TermCount> counts;
        for (int n = 0; n < words_per_doc; ++n) {
            const auto z = topic_of(rng);
            counts.push_back({static_cast<TermId>(topic_dists[static_cast<std::size_t>(z)](rng)), 1});
        }
        auto doc = BowDocument::from_counts("doc" + std::to_string(d), std::move(counts));
        doc.title = "Synthetic document " + std::to_string(d);
        doc.year = std::to_string(1990 + d % 10);
        corpus.documents.push_back(std::move(doc));
    }
    return corpus;
}

} // namespace

Corpus sample_ctm_corpus(const CtmModel& truth, std::size_t num_docs, int words_per_doc, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto K = truth.num_topics();
    const Matrix& L = truth.sigma.cholesky_factor();
    std::vector<Vector> thetas;
    thetas.reserve(num_docs);
    Vector z(K);
    for (std::size_t d = 0; d < num_docs; ++d) {
        for (Eigen::Index i = 0; i < K; ++i) z(i) = normal(rng);
        thetas.push_back(softmax(Vector(truth.mu + L * z)));
    }
    return sample_from_thetas(truth.log_beta, thetas, words_per_doc, rng);
}

Corpus sample_lda_corpus(const LdaModel& truth, std::size_t num_docs, int words_per_doc, std::uint64_t seed) {
    Rng rng(seed);
    const auto K = truth.num_topics();
    std::vector<Vector> thetas;
    thetas.reserve(num_docs);
    for (std::size_t d = 0; d < num_docs; ++d) {
        Vector g(K);
        for (Eigen::Index i = 0; i < K; ++i) {
            std::gamma_distribution<double> gamma(truth.alpha(i), 1.0);
            g(i) = gamma(rng) + 1e-300;
        }
        thetas.push_back(g / g.sum());
    }
    return sample_from_thetas(truth.log_beta, thetas, words_per_doc, rng);
}

std::vector<RawDocument> render_raw_documents(const Corpus& corpus, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<RawDocument> out;
    for (const auto& doc : corpus.documents) {
        std::vector<TermId> tokens;
        for (const auto& e : doc.entries)
            for (int c = 0; c < e.count; ++c) tokens.push_back(e.term);
        std::shuffle(tokens.begin(), tokens.end(), rng);
        std::ostringstream text;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (i) text << (i % 12 == 0 ? ".\n" : " ");
            text << corpus.vocabulary.term(tokens[i]);
        }
        text << ".\n";
        out.push_back({doc.doc_id, text.str(), doc.title, doc.year});
    }
    return out;
}

TopicMatch match_topics(const RowMatrix& fitted_log_beta, const RowMatrix& true_log_beta) {
    const auto K = true_log_beta.rows();
    if (fitted_log_beta.rows() != K || fitted_log_beta.cols() != true_log_beta.cols())
        throw Error("match_topics dimension mismatch");
    const RowMatrix fitted = fitted_log_beta.array().exp();
    const RowMatrix truth = true_log_beta.array().exp();
    Matrix tv(K, K);
    for (Eigen::Index i = 0; i < K; ++i)
        for (Eigen::Index j = 0; j < K; ++j) tv(i, j) = 0.5 * (truth.row(i) - fitted.row(j)).cwiseAbs().sum();

    TopicMatch match;
    match.permutation.assign(static_cast<std::size_t>(K), -1);
    std::vector<bool> used_true(static_cast<std::size_t>(K), false), used_fit(static_cast<std::size_t>(K), false);
    double total = 0.0;
    for (Eigen::Index step = 0; step < K; ++step) {
        double best = std::numeric_limits<double>::infinity();
        Eigen::Index bi = -1, bj = -1;
        for (Eigen::Index i = 0; i < K; ++i) {
            if (used_true[static_cast<std::size_t>(i)]) continue;
            for (Eigen::Index j = 0; j < K; ++j) {
                if (used_fit[static_cast<std::size_t>(j)]) continue;
                if (tv(i, j) < best) {
                    best = tv(i, j);
                    bi = i;
                    bj = j;
                }
            }
        }
        used_true[static_cast<std::size_t>(bi)] = true;
        used_fit[static_cast<std::size_t>(bj)] = true;
        match.permutation[static_cast<std::size_t>(bi)] = bj;
        total += best;
    }
    match.mean_tv = total / static_cast<double>(K);
    return match;
}

} // namespace ctm
