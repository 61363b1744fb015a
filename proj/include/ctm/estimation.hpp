#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ctm/corpus.hpp"
#include "ctm/inference.hpp"

namespace ctm {

struct FitConfig {
    int num_topics = 10;
    double em_rel_tol = 1e-5;
    int max_em_iters = 1000;
    std::uint64_t seed = 1;
    double topic_smoothing = 1e-8;
    double var_floor = 1e-6;
    /// Weight of the Dirichlet(1) perturbation mixed into the corpus term
    /// frequencies when seeding topics.
    double init_noise = 10.0;
    /// Relative ELBO decrease tolerated between EM iterations before aborting.
    double monotone_slack = 1e-6;
    /// Independent initializations; the run with the highest final bound is kept.
    int restarts = 1;
    unsigned threads = 1;
    /// Symmetric Dirichlet parameter for the LDA baseline; 0 means 1/K.
    double lda_alpha = 0.0;
    InferenceOptions inference;

    void validate() const;
};

struct IterationRecord {
    int iteration = 0;
    double elbo = 0.0;
    double seconds = 0.0;
    double mean_inference_iters = 0.0;
    int unconverged_docs = 0;
    int degraded_docs = 0;
    double max_update_decrease = 0.0;
};

struct FitTrace {
    std::vector<IterationRecord> iterations;
    bool converged = false;
    std::vector<std::string> warnings;
    /// Final bound of every restart, in restart order.
    std::vector<double> restart_elbos;
    int chosen_restart = 0;
};

struct CtmFit {
    CtmModel model;
    std::vector<VariationalState> states;
    FitTrace trace;
};

using IterationCallback = std::function<void(const IterationRecord&)>;

/// Expected-count topic estimate shared by the CTM and LDA M-steps: row i is
/// proportional to sum_d phi_{d,i} n_d plus `smoothing` per term, returned in
/// log domain. Zero-responsibility topics fall back to uniform with a warning.
RowMatrix estimate_log_topics(const Corpus& corpus, const std::vector<const Matrix*>& phis,
                              Eigen::Index num_topics, double smoothing,
                              std::vector<std::string>* warnings = nullptr);

/// Closed-form maximization of the corpus bound over (beta, mu, Sigma).
CtmModel m_step(const Corpus& corpus, const std::vector<VariationalState>& states,
                const FitConfig& config, std::vector<std::string>* warnings = nullptr);

/// Seeded starting model: topics from corpus frequencies plus Dirichlet noise,
/// mu = 0, Sigma = I.
CtmModel initialize(const Corpus& corpus, const FitConfig& config);

/// Runs inference on every document against a shared model. Warm-starts from
/// `previous` when given (must have one state per document).
std::vector<VariationalState> e_step(const Corpus& corpus, const CtmModel& model,
                                     const InferenceOptions& options, unsigned threads,
                                     const std::vector<VariationalState>* previous = nullptr);

/// Seed used for restart `r`; restart 0 uses config.seed itself.
std::uint64_t restart_seed(const FitConfig& config, int r);

/// Variational EM until the relative change of the corpus bound drops below
/// config.em_rel_tol, repeated over config.restarts initializations. The
/// returned states belong to the returned model.
CtmFit fit(const Corpus& corpus, const FitConfig& config, const IterationCallback& on_iteration = {});

/// A single EM run starting from a given model.
CtmFit fit_from(const Corpus& corpus, CtmModel model, const FitConfig& config,
                const IterationCallback& on_iteration = {});

} // namespace ctm
