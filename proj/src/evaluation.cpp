#include "ctm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ctm/numerics.hpp"
#include "ctm/parallel.hpp"
#include "ctm/random.hpp"

namespace ctm {

namespace {

/// log of a Gamma(shape, 1) draw, stable for small shapes.
double log_gamma_draw(double shape, Rng& rng) {
    if (shape < 1.0) {
        std::gamma_distribution<double> g(shape + 1.0, 1.0);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double uu;
        do {
            uu = u(rng);
        } while (uu <= 0.0);
        return std::log(g(rng)) + std::log(uu) / shape;
    }
    std::gamma_distribution<double> g(shape, 1.0);
    return std::log(g(rng));
}

double log_dirichlet_density(const Vector& log_theta, const Vector& alpha) {
    double value = std::lgamma(alpha.sum());
    for (Eigen::Index i = 0; i < alpha.size(); ++i)
        value += -std::lgamma(alpha(i)) + (alpha(i) - 1.0) * log_theta(i);
    return value;
}

/// With one topic theta = 1 almost surely, so the marginal is the plain likelihood.
ImportanceEstimate exact_single_topic(const BowDocument& doc, const RowMatrix& log_beta, double elbo) {
    ImportanceEstimate est;
    est.log_prob = document_log_likelihood(doc, log_beta, Vector::Zero(1));
    est.elbo = elbo;
    return est;
}

/// Share of proposal draws taken from the prior. Mixing the prior in bounds the
/// importance weights by likelihood / share. The variational posterior alone is
/// narrower than the prior for long documents, and the weights then have
/// infinite variance (Gaussian case: 2 Sigma^-1 - diag(1/nu2) not positive
/// definite; Dirichlet case: some gamma_i above 2 alpha_i).
constexpr double kPriorShare = 0.1;

std::vector<TermId> expand_tokens(const BowDocument& doc) {
    std::vector<TermId> tokens;
    tokens.reserve(static_cast<std::size_t>(doc.total()));
    for (const auto& e : doc.entries)
        for (std::int32_t c = 0; c < e.count; ++c) tokens.push_back(e.term);
    return tokens;
}

BowDocument collect(const std::string& id, std::vector<TermId>::const_iterator first,
                    std::vector<TermId>::const_iterator last) {
    std::vector<TermCount> counts;
    for (auto it = first; it != last; ++it) counts.push_back({*it, 1});
    return BowDocument::from_counts(id, std::move(counts));
}

template <class Model, class MeanTheta>
PerplexityResult perplexity_impl(const std::vector<BowDocument>& docs, const Model& model,
                                 const PerplexityOptions& options, MeanTheta&& mean_theta) {
    if (options.observed < 0) throw Error("observed word count must be nonnegative");
    std::vector<double> log_probs(docs.size(), 0.0);
    std::vector<std::int64_t> words(docs.size(), 0);
    std::vector<char> used(docs.size(), 0);
    parallel_for(docs.size(), options.threads, [&](std::size_t d) {
        const auto& doc = docs[d];
        if (doc.total() <= options.observed) return;
        const auto seed = task_seed(options.seed, d);
        auto [observed, heldout] = split_document(doc, options.observed, seed);
        const Vector theta = mean_theta(observed, mix_seed(seed));
        const Vector log_theta = theta.array().log();
        log_probs[d] = document_log_likelihood(heldout, model.log_beta, log_theta);
        words[d] = heldout.total();
        used[d] = 1;
    });
    PerplexityResult result;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        if (!used[d]) {
            result.excluded_docs.push_back(docs[d].doc_id);
            continue;
        }
        result.log_prob += log_probs[d];
        result.heldout_words += words[d];
        ++result.evaluated_docs;
    }
    if (result.heldout_words == 0) throw Error("no document has more than the observed word count");
    result.perplexity = std::exp(-result.log_prob / static_cast<double>(result.heldout_words));
    return result;
}

} // namespace

ImportanceEstimate summarize_log_weights(const Vector& log_weights) {
    if (log_weights.size() == 0) throw Error("no importance weights");
    const double m = log_weights.maxCoeff();
    if (!std::isfinite(m)) throw NumericError("every importance weight is zero");
    const Eigen::ArrayXd w = (log_weights.array() - m).exp();
    const double R = static_cast<double>(w.size());
    const double mean = w.mean();
    ImportanceEstimate est;
    est.log_prob = m + std::log(mean);
    if (w.size() > 1) {
        const double var = (w - mean).square().sum() / (R - 1.0);
        est.std_error = std::sqrt(var / R) / mean;
    }
    return est;
}

ImportanceEstimate heldout_log_prob(const BowDocument& doc, const CtmModel& model,
                                    const VariationalState& state, int n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw Error("n_samples must be at least 1");
    const auto K = model.num_topics();
    if (K == 1) return exact_single_topic(doc, model.log_beta, state.elbo);
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> pick(0.0, 1.0);
    const Vector sd = state.nu2.array().sqrt();
    const Matrix& prior_factor = model.sigma.cholesky_factor();
    const double log_main = std::log1p(-kPriorShare), log_prior = std::log(kPriorShare);
    const double log_q_const = -0.5 * static_cast<double>(K) * std::log(2.0 * M_PI) -
                               0.5 * state.nu2.array().log().sum();
    Vector log_w(n_samples);
    Vector z(K), eta(K);
    for (int r = 0; r < n_samples; ++r) {
        const bool from_prior = pick(rng) < kPriorShare;
        for (Eigen::Index i = 0; i < K; ++i) z(i) = normal(rng);
        eta = from_prior ? Vector(model.mu + prior_factor * z) : Vector(state.lambda + sd.cwiseProduct(z));
        const Vector u = (eta - state.lambda).cwiseQuotient(sd);
        const Vector log_theta = eta.array() - log_sum_exp(eta);
        const double log_p = gaussian_log_density(eta, model.mu, model.sigma);
        const double a = log_main + log_q_const - 0.5 * u.squaredNorm();
        const double b = log_prior + log_p;
        const double log_q = std::max(a, b) + std::log1p(std::exp(-std::abs(a - b)));
        log_w(r) = log_p + document_log_likelihood(doc, model.log_beta, log_theta) - log_q;
    }
    auto est = summarize_log_weights(log_w);
    est.elbo = state.elbo;
    return est;
}

ImportanceEstimate heldout_log_prob(const BowDocument& doc, const CtmModel& model, int n_samples,
                                    std::uint64_t seed, const InferenceOptions& options) {
    const auto state = infer_document(doc, model, options);
    return heldout_log_prob(doc, model, state, n_samples, seed);
}

ImportanceEstimate heldout_log_prob(const BowDocument& doc, const LdaModel& model, int n_samples,
                                    std::uint64_t seed, const InferenceOptions& options) {
    if (n_samples < 1) throw Error("n_samples must be at least 1");
    const auto state = lda_infer_document(doc, model, options);
    const auto K = model.num_topics();
    if (K == 1) return exact_single_topic(doc, model.log_beta, state.elbo);
    Rng rng(seed);
    std::uniform_real_distribution<double> pick(0.0, 1.0);
    const double log_main = std::log1p(-kPriorShare), log_prior = std::log(kPriorShare);
    Vector log_w(n_samples);
    Vector log_g(K);
    for (int r = 0; r < n_samples; ++r) {
        const Vector& shape = pick(rng) < kPriorShare ? model.alpha : state.gamma;
        for (Eigen::Index i = 0; i < K; ++i) log_g(i) = log_gamma_draw(shape(i), rng);
        const Vector log_theta = log_g.array() - log_sum_exp(log_g);
        const double log_p = log_dirichlet_density(log_theta, model.alpha);
        const double a = log_main + log_dirichlet_density(log_theta, state.gamma);
        const double b = log_prior + log_p;
        const double log_q = std::max(a, b) + std::log1p(std::exp(-std::abs(a - b)));
        log_w(r) = log_p + document_log_likelihood(doc, model.log_beta, log_theta) - log_q;
    }
    auto est = summarize_log_weights(log_w);
    est.elbo = state.elbo;
    return est;
}

std::pair<BowDocument, BowDocument> split_document(const BowDocument& doc, std::int64_t observed,
                                                   std::uint64_t seed) {
    auto tokens = expand_tokens(doc);
    if (observed < 0 || observed > static_cast<std::int64_t>(tokens.size()))
        throw Error("cannot observe " + std::to_string(observed) + " of " +
                    std::to_string(tokens.size()) + " tokens");
    Rng rng(seed);
    std::shuffle(tokens.begin(), tokens.end(), rng);
    const auto mid = tokens.cbegin() + observed;
    return {collect(doc.doc_id, tokens.cbegin(), mid), collect(doc.doc_id, mid, tokens.cend())};
}

Vector expected_theta(const VariationalState& state, int n_samples, std::uint64_t seed) {
    const auto K = state.lambda.size();
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Vector sd = state.nu2.array().sqrt();
    Vector sum = Vector::Zero(K);
    Vector eta(K);
    for (int r = 0; r < n_samples; ++r) {
        for (Eigen::Index i = 0; i < K; ++i) eta(i) = state.lambda(i) + sd(i) * normal(rng);
        sum += softmax(eta);
    }
    return sum / static_cast<double>(n_samples);
}

Vector expected_sqrt_theta(const VariationalState& state, int n_samples, std::uint64_t seed) {
    const auto K = state.lambda.size();
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Vector sd = state.nu2.array().sqrt();
    Vector sum = Vector::Zero(K);
    Vector eta(K);
    for (int r = 0; r < n_samples; ++r) {
        for (Eigen::Index i = 0; i < K; ++i) eta(i) = state.lambda(i) + sd(i) * normal(rng);
        sum += softmax(eta).cwiseSqrt();
    }
    return sum / static_cast<double>(n_samples);
}

double hellinger_from_moments(const Vector& m_i, const Vector& m_j) {
    double dot = 0.0;
    for (Eigen::Index k = 0; k < m_i.size(); ++k) dot += m_i(k) * m_j(k);
    return std::clamp(2.0 - 2.0 * dot, 0.0, 2.0);
}

double expected_hellinger(const VariationalState& a, const VariationalState& b, int n_samples,
                          std::uint64_t seed) {
    return hellinger_from_moments(expected_sqrt_theta(a, n_samples, seed),
                                  expected_sqrt_theta(b, n_samples, seed));
}

std::vector<SimilarDocument> rank_similar_moments(std::size_t query, const std::vector<Vector>& moments,
                                                  std::size_t top_n) {
    if (query >= moments.size()) throw Error("query document out of range");
    std::vector<SimilarDocument> ranked;
    ranked.reserve(moments.size());
    for (std::size_t j = 0; j < moments.size(); ++j)
        if (j != query) ranked.push_back({j, hellinger_from_moments(moments[query], moments[j])});
    std::stable_sort(ranked.begin(), ranked.end(), [](const SimilarDocument& x, const SimilarDocument& y) {
        return x.distance < y.distance;
    });
    if (ranked.size() > top_n) ranked.resize(top_n);
    return ranked;
}

std::vector<SimilarDocument> rank_similar(std::size_t query, const std::vector<VariationalState>& states,
                                          std::size_t top_n, int n_samples, std::uint64_t seed,
                                          unsigned threads) {
    std::vector<Vector> moments(states.size());
    parallel_for(states.size(), threads,
                 [&](std::size_t j) { moments[j] = expected_sqrt_theta(states[j], n_samples, seed); });
    return rank_similar_moments(query, moments, top_n);
}

std::vector<int> partition_folds(std::size_t num_docs, int folds, std::uint64_t seed) {
    if (folds < 2) throw Error("need at least two folds");
    if (num_docs < static_cast<std::size_t>(folds)) throw Error("fewer documents than folds");
    std::vector<std::size_t> order(num_docs);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> fold_of(num_docs);
    for (std::size_t p = 0; p < num_docs; ++p) fold_of[order[p]] = static_cast<int>(p % static_cast<std::size_t>(folds));
    return fold_of;
}

SummaryStat summarize(const std::vector<double>& values) {
    SummaryStat s;
    if (values.empty()) return s;
    const double n = static_cast<double>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std_error = std::sqrt(ss / (n - 1.0) / n);
    }
    return s;
}

PerplexityResult predictive_perplexity(const std::vector<BowDocument>& docs, const CtmModel& model,
                                       const PerplexityOptions& options) {
    return perplexity_impl(docs, model, options, [&](const BowDocument& observed, std::uint64_t seed) {
        const auto state = infer_document(observed, model, options.inference);
        return expected_theta(state, options.theta_samples, seed);
    });
}

PerplexityResult predictive_perplexity(const std::vector<BowDocument>& docs, const LdaModel& model,
                                       const PerplexityOptions& options) {
    return perplexity_impl(docs, model, options, [&](const BowDocument& observed, std::uint64_t) {
        const auto state = lda_infer_document(observed, model, options.inference);
        return Vector(state.gamma / state.gamma.sum());
    });
}

EvalReport cross_validate(const Corpus& corpus, const CrossValidationConfig& config,
                          const IterationCallback& on_iteration) {
    corpus.validate();
    EvalReport report;
    report.folds = config.folds;
    report.n_samples = config.n_samples;
    report.theta_samples = config.theta_samples;
    report.seed = config.seed;
    report.fold_of_doc = partition_folds(corpus.num_docs(), config.folds, config.seed);
    const unsigned threads = config.fit.threads;

    for (int k : config.k_grid) {
        TopicCountResult tk;
        tk.num_topics = k;
        std::vector<double> pp_ctm(config.p_grid.size(), 0.0), pp_lda(config.p_grid.size(), 0.0);
        std::vector<std::int64_t> pp_words_ctm(config.p_grid.size(), 0), pp_words_lda(config.p_grid.size(), 0);

        for (int f = 0; f < config.folds; ++f) {
            FoldResult fr;
            fr.fold = f;
            std::vector<std::size_t> train;
            for (std::size_t d = 0; d < corpus.num_docs(); ++d)
                (report.fold_of_doc[d] == f ? fr.test_docs : train).push_back(d);
            try {
                FitConfig fc = config.fit;
                fc.num_topics = k;
                fc.seed = task_seed(config.seed, static_cast<std::uint64_t>(f) * 1000003u + static_cast<std::uint64_t>(k));
                const Corpus train_corpus = corpus.subset(train);
                const auto ctm_fit = fit(train_corpus, fc, on_iteration);
                const auto lda = lda_fit(train_corpus, fc, on_iteration);

                fr.ctm_log_probs.assign(fr.test_docs.size(), 0.0);
                fr.lda_log_probs.assign(fr.test_docs.size(), 0.0);
                parallel_for(fr.test_docs.size(), threads, [&](std::size_t i) {
                    const auto d = fr.test_docs[i];
                    const auto seed = task_seed(config.seed, d);
                    fr.ctm_log_probs[i] = heldout_log_prob(corpus.documents[d], ctm_fit.model, config.n_samples,
                                                           seed, fc.inference).log_prob;
                    fr.lda_log_probs[i] = heldout_log_prob(corpus.documents[d], lda.model, config.n_samples,
                                                           seed, fc.inference).log_prob;
                });
                for (std::size_t i = 0; i < fr.test_docs.size(); ++i) {
                    fr.ctm_total += fr.ctm_log_probs[i];
                    fr.lda_total += fr.lda_log_probs[i];
                }

                std::vector<BowDocument> test_docs;
                for (auto d : fr.test_docs) test_docs.push_back(corpus.documents[d]);
                for (std::size_t p = 0; p < config.p_grid.size(); ++p) {
                    PerplexityOptions po;
                    po.observed = config.p_grid[p];
                    po.theta_samples = config.theta_samples;
                    po.seed = task_seed(config.seed, 7919u * static_cast<std::uint64_t>(f) + static_cast<std::uint64_t>(p));
                    po.threads = threads;
                    po.inference = fc.inference;
                    const auto c = predictive_perplexity(test_docs, ctm_fit.model, po);
                    const auto l = predictive_perplexity(test_docs, lda.model, po);
                    pp_ctm[p] += c.log_prob;
                    pp_words_ctm[p] += c.heldout_words;
                    pp_lda[p] += l.log_prob;
                    pp_words_lda[p] += l.heldout_words;
                }
            } catch (const std::exception& e) {
                fr.ok = false;
                fr.error = e.what();
                tk.partial = true;
            }
            tk.folds.push_back(std::move(fr));
        }

        std::vector<double> ctm_totals, lda_totals, diffs;
        for (const auto& fr : tk.folds) {
            if (!fr.ok) continue;
            ctm_totals.push_back(fr.ctm_total);
            lda_totals.push_back(fr.lda_total);
            diffs.push_back(fr.ctm_total - fr.lda_total);
        }
        tk.ctm = summarize(ctm_totals);
        tk.lda = summarize(lda_totals);
        tk.difference = summarize(diffs);
        for (std::size_t p = 0; p < config.p_grid.size(); ++p) {
            PerplexityRow row;
            row.observed = config.p_grid[p];
            row.ctm = pp_words_ctm[p] ? std::exp(-pp_ctm[p] / static_cast<double>(pp_words_ctm[p])) : 0.0;
            row.lda = pp_words_lda[p] ? std::exp(-pp_lda[p] / static_cast<double>(pp_words_lda[p])) : 0.0;
            tk.perplexity.push_back(row);
        }
        report.results.push_back(std::move(tk));
    }
    return report;
}

} // namespace ctm
