#include "ctm/lda.hpp"

#include <chrono>
#include <cmath>

#include <boost/math/special_functions/digamma.hpp>

#include "ctm/numerics.hpp"
#include "ctm/parallel.hpp"

namespace ctm {

namespace {

double digamma(double x) { return boost::math::digamma(x); }

} // namespace

void LdaModel::validate() const {
    if (num_topics() < 1 || vocab_size() < 1) throw Error("LDA model has no topics or no terms");
    if (alpha.size() != num_topics() || (alpha.array() <= 0.0).any())
        throw Error("LDA alpha must be a positive K-vector");
    for (Eigen::Index i = 0; i < num_topics(); ++i)
        if (std::abs(log_beta.row(i).array().exp().sum() - 1.0) > 1e-8)
            throw Error("topic " + std::to_string(i) + " does not sum to 1");
}

double lda_elbo(const BowDocument& doc, const LdaModel& model, const LdaState& state) {
    const auto K = model.num_topics();
    const double gamma_sum = state.gamma.sum();
    const double psi_sum = digamma(gamma_sum);
    Vector elog(K);
    for (Eigen::Index i = 0; i < K; ++i) elog(i) = digamma(state.gamma(i)) - psi_sum;

    double value = std::lgamma(model.alpha.sum()) - std::lgamma(gamma_sum);
    for (Eigen::Index i = 0; i < K; ++i) {
        value += -std::lgamma(model.alpha(i)) + std::lgamma(state.gamma(i)) +
                 (model.alpha(i) - state.gamma(i)) * elog(i);
    }
    for (std::size_t n = 0; n < doc.entries.size(); ++n) {
        const auto w = doc.entries[n].term;
        double word = 0.0;
        for (Eigen::Index i = 0; i < K; ++i) {
            const double p = state.phi(static_cast<Eigen::Index>(n), i);
            if (p <= 0.0) continue;
            word += p * (elog(i) + model.log_beta(i, w) - std::log(p));
        }
        value += doc.entries[n].count * word;
    }
    if (std::isnan(value)) throw NumericError("LDA ELBO evaluated to NaN");
    return value;
}

LdaState lda_infer_document(const BowDocument& doc, const LdaModel& model,
                            const InferenceOptions& options, const LdaState* init) {
    const auto K = model.num_topics();
    const auto U = static_cast<Eigen::Index>(doc.entries.size());
    for (const auto& e : doc.entries)
        if (e.term < 0 || e.term >= model.vocab_size())
            throw Error("document '" + doc.doc_id + "' has term id outside the model vocabulary");

    LdaState s;
    if (init && init->gamma.size() == K && init->phi.rows() == U && init->phi.cols() == K) {
        s = *init;
        s.iterations = 0;
        s.converged = false;
    } else {
        s.phi = Matrix::Constant(U, K, 1.0 / static_cast<double>(K));
        s.gamma = model.alpha.array() + static_cast<double>(doc.total()) / static_cast<double>(K);
    }

    double previous = lda_elbo(doc, model, s);
    for (int iter = 1; iter <= options.max_iters; ++iter) {
        Vector elog(K);
        for (Eigen::Index i = 0; i < K; ++i) elog(i) = digamma(s.gamma(i));
        Vector gamma = model.alpha;
        for (Eigen::Index n = 0; n < U; ++n) {
            const auto& e = doc.entries[static_cast<std::size_t>(n)];
            Vector logp = elog + model.log_beta.col(e.term);
            const double norm = log_sum_exp_lenient(logp);
            if (!std::isfinite(norm))
                throw NumericError("term " + std::to_string(e.term) + " has zero probability under every topic");
            s.phi.row(n) = (logp.array() - norm).exp().matrix().transpose();
            gamma += e.count * s.phi.row(n).transpose();
        }
        s.gamma = std::move(gamma);
        const double current = lda_elbo(doc, model, s);
        s.iterations = iter;
        const double change = std::abs(current - previous) / std::max(std::abs(previous), 1e-300);
        previous = current;
        if (change < options.rel_tol) {
            s.converged = true;
            break;
        }
    }
    s.elbo = previous;
    return s;
}

namespace {

LdaFit lda_fit_once(const Corpus& corpus, LdaModel model, const FitConfig& config,
                    const IterationCallback& on_iteration) {
    const auto K = model.num_topics();
    LdaFit result;

    std::vector<LdaState> states;
    double previous = 0.0;
    for (int iter = 1; iter <= config.max_em_iters; ++iter) {
        const auto start = std::chrono::steady_clock::now();
        std::vector<LdaState> next(corpus.num_docs());
        parallel_for(corpus.num_docs(), config.threads, [&](std::size_t d) {
            next[d] = lda_infer_document(corpus.documents[d], model, config.inference,
                                         states.empty() ? nullptr : &states[d]);
        });
        states = std::move(next);

        IterationRecord rec;
        rec.iteration = iter;
        double total_iters = 0.0;
        for (const auto& s : states) {
            rec.elbo += s.elbo;
            total_iters += s.iterations;
            rec.unconverged_docs += s.converged ? 0 : 1;
        }
        rec.mean_inference_iters = total_iters / static_cast<double>(states.size());
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        result.trace.iterations.push_back(rec);
        if (on_iteration) on_iteration(rec);

        if (iter > 1) {
            const double change = (rec.elbo - previous) / std::abs(previous);
            if (change < -config.monotone_slack)
                throw Error("LDA corpus ELBO decreased at EM iteration " + std::to_string(iter));
            if (std::abs(change) < config.em_rel_tol) {
                result.trace.converged = true;
                break;
            }
        }
        previous = rec.elbo;
        if (iter == config.max_em_iters) break;

        std::vector<const Matrix*> phis;
        phis.reserve(states.size());
        for (const auto& s : states) phis.push_back(&s.phi);
        model.log_beta = estimate_log_topics(corpus, phis, K, config.topic_smoothing, &result.trace.warnings);
    }
    result.model = std::move(model);
    result.states = std::move(states);
    return result;
}

} // namespace

LdaFit lda_fit(const Corpus& corpus, const FitConfig& config, const IterationCallback& on_iteration) {
    config.validate();
    corpus.validate();
    const auto K = static_cast<Eigen::Index>(config.num_topics);
    const double alpha = config.lda_alpha > 0.0 ? config.lda_alpha : 1.0 / static_cast<double>(K);

    LdaFit best;
    std::vector<double> elbos;
    for (int r = 0; r < config.restarts; ++r) {
        FitConfig run = config;
        run.seed = restart_seed(config, r);
        LdaModel model;
        model.log_beta = initialize(corpus, run).log_beta;
        model.alpha = Vector::Constant(K, alpha);
        auto result = lda_fit_once(corpus, std::move(model), config, on_iteration);
        const double final_elbo = result.trace.iterations.back().elbo;
        elbos.push_back(final_elbo);
        if (r == 0 || final_elbo > best.trace.iterations.back().elbo) {
            best = std::move(result);
            best.trace.chosen_restart = r;
        }
    }
    best.trace.restart_elbos = std::move(elbos);
    return best;
}

} // namespace ctm
