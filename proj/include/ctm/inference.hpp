#pragma once

#include <optional>

#include "ctm/common.hpp"
#include "ctm/corpus.hpp"
#include "ctm/numerics.hpp"

namespace ctm {

/// Correlated topic model parameters: K topics over V terms (stored as log
/// probabilities, one row per topic) and a Gaussian prior N(mu, sigma) on the
/// natural topic-proportion parameters.
struct CtmModel {
    RowMatrix log_beta;
    Vector mu;
    SpdMatrix sigma;

    Eigen::Index num_topics() const noexcept { return log_beta.rows(); }
    Eigen::Index vocab_size() const noexcept { return log_beta.cols(); }

    /// Throws Error if any row is off the simplex (1e-8) or dimensions disagree.
    void validate() const;
};

/// Per-document variational parameters. `phi` has one row per unique term of
/// the document (in entry order); token counts weight every sum over words.
struct VariationalState {
    Vector lambda;
    Vector nu2;
    Matrix phi;
    double zeta = 1.0;
    double elbo = 0.0;

    int iterations = 0;
    bool converged = false;
    /// Set when the lambda optimizer stopped short of its gradient tolerance.
    bool degraded = false;
    /// Largest relative ELBO decrease seen across single updates (only
    /// tracked when InferenceOptions::check_monotone is set).
    double max_update_decrease = 0.0;
};

struct InferenceOptions {
    double rel_tol = 1e-6;
    int max_iters = 500;
    double lambda_grad_tol = 1e-5;
    int lambda_max_iters = 1000;
    int max_line_search_steps = 200;
    double nu2_grad_tol = 1e-8;
    bool check_monotone = false;
};

struct LambdaResult {
    Vector lambda;
    bool converged = false;
    int iterations = 0;
};

/// Variational lower bound on log p(w | model) at `state`.
double elbo(const BowDocument& doc, const CtmModel& model, const VariationalState& state);

/// Closed-form optimum of the Taylor parameter: sum_i exp(lambda_i + nu2_i / 2).
double update_zeta(const Vector& lambda, const Vector& nu2);

/// phi_{n,i} proportional to exp(lambda_i) beta_{i,w_n}, one row per unique term.
Matrix update_phi(const Vector& lambda, const BowDocument& doc, const CtmModel& model);

/// Gradient of the bound with respect to lambda (zeta, phi, nu2 held fixed).
Vector lambda_gradient(const VariationalState& state, const BowDocument& doc, const CtmModel& model);

/// Gradient of the bound with respect to nu2 (per-coordinate partials).
Vector nu2_gradient(const VariationalState& state, const BowDocument& doc, const CtmModel& model);

/// Maximizes the bound over lambda by Polak-Ribiere conjugate gradient with
/// Armijo backtracking. Never returns a point with a lower bound than the input.
LambdaResult update_lambda(const VariationalState& state, const BowDocument& doc,
                           const CtmModel& model, const InferenceOptions& options = {});

/// Per-coordinate safeguarded Newton solve for the stationary nu2.
Vector update_nu2(const VariationalState& state, const BowDocument& doc, const CtmModel& model,
                  const InferenceOptions& options = {});

/// Prior-centred starting point: lambda = mu, nu2 = diag(sigma) clipped to
/// [1e-4, 10], uniform phi, zeta from its closed form.
VariationalState initial_state(const BowDocument& doc, const CtmModel& model);

/// Coordinate ascent (zeta, phi, zeta, lambda, zeta, nu2) until the relative
/// change in the bound drops below options.rel_tol. Non-convergence is
/// reported through the state flags, never by throwing.
VariationalState infer_document(const BowDocument& doc, const CtmModel& model,
                                const InferenceOptions& options = {},
                                const VariationalState* init = nullptr);

} // namespace ctm
