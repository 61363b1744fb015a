#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctm/corpus.hpp"
#include "ctm/estimation.hpp"
#include "ctm/inference.hpp"
#include "ctm/lda.hpp"

namespace ctm {

/// log-mean-exp of importance weights with its delta-method standard error.
struct ImportanceEstimate {
    double log_prob = 0.0;
    double std_error = 0.0;
    double elbo = 0.0;  // variational bound of the fitted proposal
};

/// sum_n c_n log(sum_i theta_i beta_{i,w_n}) given log theta.
template <class LogBeta>
double document_log_likelihood(const BowDocument& doc, const LogBeta& log_beta, const Vector& log_theta);

/// Summarizes log weights as log(mean(exp(w))) plus its standard error.
ImportanceEstimate summarize_log_weights(const Vector& log_weights);

/// Held-out log probability by importance sampling. The proposal is the
/// document's fitted variational distribution N(lambda, diag(nu2)) mixed with a
/// 10% share of the prior N(mu, Sigma), which keeps the weights bounded.
ImportanceEstimate heldout_log_prob(const BowDocument& doc, const CtmModel& model, int n_samples,
                                    std::uint64_t seed, const InferenceOptions& options = {});
ImportanceEstimate heldout_log_prob(const BowDocument& doc, const CtmModel& model,
                                    const VariationalState& state, int n_samples, std::uint64_t seed);

/// Same estimator for LDA: Dirichlet(gamma) mixed with 10% Dirichlet(alpha).
ImportanceEstimate heldout_log_prob(const BowDocument& doc, const LdaModel& model, int n_samples,
                                    std::uint64_t seed, const InferenceOptions& options = {});

/// Random token split: `observed` tokens drawn without replacement, the rest held out.
std::pair<BowDocument, BowDocument> split_document(const BowDocument& doc, std::int64_t observed,
                                                   std::uint64_t seed);

struct PerplexityResult {
    double perplexity = 0.0;
    double log_prob = 0.0;        // summed over held-out tokens
    std::int64_t heldout_words = 0;
    std::size_t evaluated_docs = 0;
    std::vector<std::string> excluded_docs;  // N_d <= P
};

struct PerplexityOptions {
    std::int64_t observed = 10;
    int theta_samples = 512;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    InferenceOptions inference;
};

/// Perplexity of the held-out tokens given `observed` randomly chosen tokens
/// of each document; E[theta | observed] comes from the variational fit.
PerplexityResult predictive_perplexity(const std::vector<BowDocument>& docs, const CtmModel& model,
                                       const PerplexityOptions& options);
PerplexityResult predictive_perplexity(const std::vector<BowDocument>& docs, const LdaModel& model,
                                       const PerplexityOptions& options);

/// Monte Carlo estimate of E_q[theta] under q = N(lambda, diag(nu2)).
Vector expected_theta(const VariationalState& state, int n_samples, std::uint64_t seed);

/// Monte Carlo estimate of E_q[sqrt(theta_k)] for each k. Depends only on
/// (state, n_samples, seed).
Vector expected_sqrt_theta(const VariationalState& state, int n_samples, std::uint64_t seed);

/// 2 - 2 sum_k m_ik m_jk clamped to [0, 2].
double hellinger_from_moments(const Vector& m_i, const Vector& m_j);

/// Expected squared Hellinger distance between independent draws from the two
/// variational posteriors. Both moment vectors use the same seed.
double expected_hellinger(const VariationalState& a, const VariationalState& b, int n_samples = 512,
                          std::uint64_t seed = 1);

struct SimilarDocument {
    std::size_t index = 0;
    double distance = 0.0;
};

/// Documents ordered by ascending distance to `moments[query]`, ties by index,
/// the query itself excluded.
std::vector<SimilarDocument> rank_similar_moments(std::size_t query, const std::vector<Vector>& moments,
                                                  std::size_t top_n);
std::vector<SimilarDocument> rank_similar(std::size_t query, const std::vector<VariationalState>& states,
                                          std::size_t top_n, int n_samples = 512, std::uint64_t seed = 1,
                                          unsigned threads = 1);

/// Seeded assignment of documents to folds: fold_of[d] in [0, folds).
std::vector<int> partition_folds(std::size_t num_docs, int folds, std::uint64_t seed);

struct CrossValidationConfig {
    int folds = 10;
    std::vector<int> k_grid{10};
    std::vector<std::int64_t> p_grid;  // empty: no perplexity
    int n_samples = 1000;
    int theta_samples = 512;
    std::uint64_t seed = 1;
    FitConfig fit;  // num_topics and seed are overridden per run
};

struct FoldResult {
    int fold = 0;
    bool ok = true;
    std::string error;
    std::vector<std::size_t> test_docs;
    std::vector<double> ctm_log_probs;
    std::vector<double> lda_log_probs;
    double ctm_total = 0.0;
    double lda_total = 0.0;
};

struct SummaryStat {
    double mean = 0.0;
    double std_error = 0.0;
};

struct PerplexityRow {
    std::int64_t observed = 0;
    double ctm = 0.0;
    double lda = 0.0;
};

struct TopicCountResult {
    int num_topics = 0;
    std::vector<FoldResult> folds;
    SummaryStat ctm;
    SummaryStat lda;
    SummaryStat difference;  // per-fold CTM - LDA
    bool partial = false;
    std::vector<PerplexityRow> perplexity;  // pooled over all test documents
};

struct EvalReport {
    int folds = 0;
    int n_samples = 0;
    int theta_samples = 0;
    std::uint64_t seed = 0;
    std::vector<int> fold_of_doc;
    std::vector<TopicCountResult> results;
};

SummaryStat summarize(const std::vector<double>& values);

/// k-fold cross-validated held-out log probability for CTM and LDA over a
/// grid of topic counts, with optional predictive perplexity.
EvalReport cross_validate(const Corpus& corpus, const CrossValidationConfig& config,
                          const IterationCallback& on_iteration = {});

template <class LogBeta>
double document_log_likelihood(const BowDocument& doc, const LogBeta& log_beta, const Vector& log_theta) {
    double total = 0.0;
    for (const auto& e : doc.entries) {
        Vector terms = log_theta + log_beta.col(e.term);
        total += e.count * log_sum_exp_lenient(terms);
    }
    return total;
}

} // namespace ctm
