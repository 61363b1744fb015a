#include "ctm/estimation.hpp"

#include <chrono>
#include <cmath>

#include "ctm/parallel.hpp"
#include "ctm/random.hpp"

namespace ctm {

void FitConfig::validate() const {
    if (num_topics < 2) throw Error("number of topics must be at least 2");
    if (!(em_rel_tol > 0.0) || !(inference.rel_tol > 0.0)) throw Error("tolerances must be positive");
    if (max_em_iters < 1) throw Error("max_em_iters must be positive");
    if (restarts < 1) throw Error("restarts must be positive");
    if (topic_smoothing < 0.0 || var_floor <= 0.0) throw Error("invalid smoothing or variance floor");
}

RowMatrix estimate_log_topics(const Corpus& corpus, const std::vector<const Matrix*>& phis,
                              Eigen::Index num_topics, double smoothing,
                              std::vector<std::string>* warnings) {
    const auto K = num_topics;
    const auto V = static_cast<Eigen::Index>(corpus.vocab_size());
    RowMatrix counts = RowMatrix::Zero(K, V);
    for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
        const auto& doc = corpus.documents[d];
        const Matrix& phi = *phis[d];
        for (std::size_t n = 0; n < doc.entries.size(); ++n) {
            const auto w = doc.entries[n].term;
            counts.col(w) += doc.entries[n].count * phi.row(static_cast<Eigen::Index>(n)).transpose();
        }
    }
    RowMatrix log_beta(K, V);
    for (Eigen::Index i = 0; i < K; ++i) {
        if (counts.row(i).sum() <= 0.0) {
            if (warnings) warnings->push_back("topic " + std::to_string(i) + " has no responsibility; reset to uniform");
            log_beta.row(i).setConstant(-std::log(static_cast<double>(V)));
            continue;
        }
        Eigen::RowVectorXd row = counts.row(i).array() + smoothing;
        log_beta.row(i) = (row / row.sum()).array().log();
    }
    return log_beta;
}

CtmModel m_step(const Corpus& corpus, const std::vector<VariationalState>& states,
                const FitConfig& config, std::vector<std::string>* warnings) {
    if (states.size() != corpus.num_docs()) throw Error("m_step needs one state per document");
    if (states.empty()) throw EmptyCorpusError("m_step on an empty corpus");
    const auto K = states.front().lambda.size();
    const double D = static_cast<double>(states.size());

    std::vector<const Matrix*> phis;
    phis.reserve(states.size());
    for (const auto& s : states) phis.push_back(&s.phi);

    CtmModel model;
    model.log_beta = estimate_log_topics(corpus, phis, K, config.topic_smoothing, warnings);

    Vector mu = Vector::Zero(K);
    for (const auto& s : states) mu += s.lambda;
    mu /= D;

    Matrix sigma = Matrix::Zero(K, K);
    for (const auto& s : states) {
        Vector diff = s.lambda - mu;
        sigma.noalias() += diff * diff.transpose();
        sigma.diagonal() += s.nu2;
    }
    sigma /= D;
    sigma = 0.5 * (sigma + sigma.transpose());
    for (Eigen::Index i = 0; i < K; ++i) sigma(i, i) = std::max(sigma(i, i), config.var_floor);

    model.mu = std::move(mu);
    model.sigma = SpdMatrix(std::move(sigma));
    return model;
}

CtmModel initialize(const Corpus& corpus, const FitConfig& config) {
    config.validate();
    const auto K = static_cast<Eigen::Index>(config.num_topics);
    const auto V = static_cast<Eigen::Index>(corpus.vocab_size());

    Eigen::RowVectorXd freq = Eigen::RowVectorXd::Zero(V);
    for (const auto& doc : corpus.documents)
        for (const auto& e : doc.entries) freq(e.term) += e.count;
    freq /= freq.sum();

    Rng rng(config.seed);
    std::gamma_distribution<double> gamma(1.0, 1.0);
    CtmModel model;
    model.log_beta.resize(K, V);
    for (Eigen::Index i = 0; i < K; ++i) {
        Eigen::RowVectorXd noise(V);
        for (Eigen::Index w = 0; w < V; ++w) noise(w) = gamma(rng);
        noise /= noise.sum();
        Eigen::RowVectorXd row = freq + config.init_noise * noise;
        model.log_beta.row(i) = (row / row.sum()).array().log();
    }
    model.mu = Vector::Zero(K);
    model.sigma = SpdMatrix::identity(K);
    return model;
}

std::vector<VariationalState> e_step(const Corpus& corpus, const CtmModel& model,
                                     const InferenceOptions& options, unsigned threads,
                                     const std::vector<VariationalState>* previous) {
    if (previous && previous->size() != corpus.num_docs())
        throw Error("warm start needs one state per document");
    std::vector<VariationalState> states(corpus.num_docs());
    parallel_for(corpus.num_docs(), threads, [&](std::size_t d) {
        states[d] = infer_document(corpus.documents[d], model, options,
                                   previous ? &(*previous)[d] : nullptr);
    });
    return states;
}

std::uint64_t restart_seed(const FitConfig& config, int r) {
    return r == 0 ? config.seed : task_seed(config.seed, static_cast<std::uint64_t>(r));
}

CtmFit fit(const Corpus& corpus, const FitConfig& config, const IterationCallback& on_iteration) {
    config.validate();
    CtmFit best;
    std::vector<double> elbos;
    for (int r = 0; r < config.restarts; ++r) {
        FitConfig run = config;
        run.seed = restart_seed(config, r);
        auto result = fit_from(corpus, initialize(corpus, run), config, on_iteration);
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

CtmFit fit_from(const Corpus& corpus, CtmModel model, const FitConfig& config,
                const IterationCallback& on_iteration) {
    config.validate();
    corpus.validate();
    model.validate();

    CtmFit result;
    std::vector<VariationalState> states;
    double previous = 0.0;
    for (int iter = 1; iter <= config.max_em_iters; ++iter) {
        const auto start = std::chrono::steady_clock::now();
        states = e_step(corpus, model, config.inference, config.threads, states.empty() ? nullptr : &states);

        IterationRecord rec;
        rec.iteration = iter;
        double total_iters = 0.0;
        for (const auto& s : states) {  // document order keeps the sum reproducible
            rec.elbo += s.elbo;
            total_iters += s.iterations;
            rec.unconverged_docs += s.converged ? 0 : 1;
            rec.degraded_docs += s.degraded ? 1 : 0;
            rec.max_update_decrease = std::max(rec.max_update_decrease, s.max_update_decrease);
        }
        rec.mean_inference_iters = total_iters / static_cast<double>(states.size());
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        result.trace.iterations.push_back(rec);
        if (on_iteration) on_iteration(rec);

        if (iter > 1) {
            const double change = (rec.elbo - previous) / std::abs(previous);
            if (change < -config.monotone_slack)
                throw Error("corpus ELBO decreased from " + std::to_string(previous) + " to " +
                            std::to_string(rec.elbo) + " at EM iteration " + std::to_string(iter));
            if (std::abs(change) < config.em_rel_tol) {
                result.trace.converged = true;
                break;
            }
        }
        previous = rec.elbo;
        if (iter == config.max_em_iters) break;
        model = m_step(corpus, states, config, &result.trace.warnings);
    }
    result.model = std::move(model);
    result.states = std::move(states);
    return result;
}

} // namespace ctm
