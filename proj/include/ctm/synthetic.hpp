#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctm/corpus.hpp"
#include "ctm/inference.hpp"
#include "ctm/lda.hpp"

namespace ctm {

/// `count` distinct lowercase pseudo-words built from consonant-vowel syllables.
std::vector<std::string> pseudo_words(std::size_t count);

/// K topics drawn from a symmetric Dirichlet(concentration) over V terms, log domain.
RowMatrix random_log_topics(Eigen::Index num_topics, Eigen::Index vocab_size, double concentration,
                            std::uint64_t seed);

/// Covariance with unit variances scaled by `scale`, and correlation `rho`
/// between each listed pair of topics.
Matrix correlated_covariance(Eigen::Index num_topics, double scale,
                             const std::vector<std::pair<Eigen::Index, Eigen::Index>>& pairs, double rho);

/// Draws documents from the generative process of the model: eta ~ N(mu, Sigma),
/// theta = softmax(eta), then `words_per_doc` topic/word draws.
Corpus sample_ctm_corpus(const CtmModel& truth, std::size_t num_docs, int words_per_doc, std::uint64_t seed);

/// Same for LDA with theta ~ Dirichlet(alpha).
Corpus sample_lda_corpus(const LdaModel& truth, std::size_t num_docs, int words_per_doc, std::uint64_t seed);

/// Raw text for a corpus: each document's tokens in shuffled order, space separated.
std::vector<RawDocument> render_raw_documents(const Corpus& corpus, std::uint64_t seed);

/// Mean total-variation distance between fitted and true topics after greedy
/// matching on pairwise TV distance. `permutation[i]` is the fitted topic
/// matched to true topic i.
struct TopicMatch {
    double mean_tv = 0.0;
    std::vector<Eigen::Index> permutation;
};
TopicMatch match_topics(const RowMatrix& fitted_log_beta, const RowMatrix& true_log_beta);

} // namespace ctm
