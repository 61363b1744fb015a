#pragma once

#include <vector>

#include "ctm/corpus.hpp"
#include "ctm/estimation.hpp"

namespace ctm {

/// Latent Dirichlet allocation with a fixed Dirichlet prior `alpha`.
struct LdaModel {
    RowMatrix log_beta;
    Vector alpha;

    Eigen::Index num_topics() const noexcept { return log_beta.rows(); }
    Eigen::Index vocab_size() const noexcept { return log_beta.cols(); }
    void validate() const;
};

struct LdaState {
    Vector gamma;
    Matrix phi;  // one row per unique term
    double elbo = 0.0;
    int iterations = 0;
    bool converged = false;
};

double lda_elbo(const BowDocument& doc, const LdaModel& model, const LdaState& state);

/// Coordinate ascent: phi_{n,i} ~ beta_{i,w_n} exp(digamma(gamma_i)),
/// gamma = alpha + sum_n c_n phi_n.
LdaState lda_infer_document(const BowDocument& doc, const LdaModel& model,
                            const InferenceOptions& options = {}, const LdaState* init = nullptr);

struct LdaFit {
    LdaModel model;
    std::vector<LdaState> states;
    FitTrace trace;
};

/// Variational EM for the topics with alpha held at config.lda_alpha (1/K when 0).
LdaFit lda_fit(const Corpus& corpus, const FitConfig& config, const IterationCallback& on_iteration = {});

} // namespace ctm
