#include "ctm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ctm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836; // log(2*pi)
constexpr double kNu2Min = 1e-10;
constexpr double kNu2Max = 1e10;

Vector counts_of(const BowDocument& doc) {
    Vector c(static_cast<Eigen::Index>(doc.entries.size()));
    for (std::size_t n = 0; n < doc.entries.size(); ++n)
        c(static_cast<Eigen::Index>(n)) = doc.entries[n].count;
    return c;
}

void check_doc(const BowDocument& doc, const CtmModel& model) {
    for (const auto& e : doc.entries)
        if (e.term < 0 || e.term >= model.vocab_size())
            throw Error("document '" + doc.doc_id + "' has term id outside the model vocabulary");
}

/// Parts of the bound that depend on lambda, with zeta, phi and nu2 fixed.
struct LambdaObjective {
    const Matrix& precision;
    const Vector& mu;
    Vector phi_sum;  // sum_n c_n phi_n
    Vector half_nu2;
    double n_over_zeta;

    double value(const Vector& lambda) const {
        Vector diff = lambda - mu;
        return -0.5 * diff.dot(precision * diff) + lambda.dot(phi_sum) -
               n_over_zeta * (lambda + half_nu2).array().exp().sum();
    }
    Vector gradient(const Vector& lambda) const {
        return -precision * (lambda - mu) + phi_sum -
               n_over_zeta * (lambda + half_nu2).array().exp().matrix();
    }
    double curvature(const Vector& lambda, const Vector& d) const {
        Vector e = (lambda + half_nu2).array().exp().matrix();
        return d.dot(precision * d) + n_over_zeta * (e.array() * d.array().square()).sum();
    }
};

} // namespace

void CtmModel::validate() const {
    const auto K = num_topics();
    if (K < 1 || vocab_size() < 1) throw Error("model has no topics or no terms");
    if (mu.size() != K || sigma.dim() != K) throw Error("model prior dimension does not match K");
    for (Eigen::Index i = 0; i < K; ++i) {
        const double mass = log_beta.row(i).array().exp().sum();
        if (std::abs(mass - 1.0) > 1e-8)
            throw Error("topic " + std::to_string(i) + " does not sum to 1");
    }
}

double elbo(const BowDocument& doc, const CtmModel& model, const VariationalState& state) {
    check_doc(doc, model);
    const auto K = model.num_topics();
    const Matrix& precision = model.sigma.inverse();
    const Vector c = counts_of(doc);
    const double N = c.sum();

    // E_q[log p(eta | mu, Sigma)]
    const Vector diff = state.lambda - model.mu;
    double value = -0.5 * model.sigma.logdet() - 0.5 * static_cast<double>(K) * kLog2Pi -
                   0.5 * (precision.diagonal().dot(state.nu2) + diff.dot(precision * diff));

    // E_q[log p(z_n | eta)] under the Taylor bound, summed over tokens
    const double expected_norm =
        (state.lambda + 0.5 * state.nu2).array().exp().sum() / state.zeta - 1.0 +
        std::log(state.zeta);
    value -= N * expected_norm;

    for (std::size_t n = 0; n < doc.entries.size(); ++n) {
        const auto row = state.phi.row(static_cast<Eigen::Index>(n));
        const auto w = doc.entries[n].term;
        double word = 0.0;
        for (Eigen::Index i = 0; i < K; ++i) {
            const double p = row(i);
            if (p <= 0.0) continue;
            word += p * (state.lambda(i) + model.log_beta(i, w) - std::log(p));
        }
        value += c(static_cast<Eigen::Index>(n)) * word;
    }

    // Gaussian entropy
    value += 0.5 * (state.nu2.array().log() + kLog2Pi + 1.0).sum();

    if (std::isnan(value)) throw NumericError("ELBO evaluated to NaN");
    return value;
}

double update_zeta(const Vector& lambda, const Vector& nu2) {
    return std::exp(log_sum_exp(lambda + 0.5 * nu2));
}

Matrix update_phi(const Vector& lambda, const BowDocument& doc, const CtmModel& model) {
    check_doc(doc, model);
    const auto K = model.num_topics();
    Matrix phi(static_cast<Eigen::Index>(doc.entries.size()), K);
    for (std::size_t n = 0; n < doc.entries.size(); ++n) {
        Vector logp = lambda + model.log_beta.col(doc.entries[n].term);
        const double norm = log_sum_exp_lenient(logp);
        if (!std::isfinite(norm))
            throw NumericError("term " + std::to_string(doc.entries[n].term) +
                               " has zero probability under every topic");
        phi.row(static_cast<Eigen::Index>(n)) = (logp.array() - norm).exp().matrix().transpose();
    }
    return phi;
}

Vector lambda_gradient(const VariationalState& state, const BowDocument& doc, const CtmModel& model) {
    const Vector c = counts_of(doc);
    const double N = c.sum();
    Vector phi_sum = state.phi.transpose() * c;
    return -model.sigma.inverse() * (state.lambda - model.mu) + phi_sum -
           (N / state.zeta) * (state.lambda + 0.5 * state.nu2).array().exp().matrix();
}

Vector nu2_gradient(const VariationalState& state, const BowDocument& doc, const CtmModel& model) {
    const double N = static_cast<double>(doc.total());
    return (-0.5 * model.sigma.inverse().diagonal().array() -
            (N / (2.0 * state.zeta)) * (state.lambda + 0.5 * state.nu2).array().exp() +
            0.5 / state.nu2.array())
        .matrix();
}

LambdaResult update_lambda(const VariationalState& state, const BowDocument& doc,
                           const CtmModel& model, const InferenceOptions& options) {
    const auto K = model.num_topics();
    const Vector c = counts_of(doc);
    LambdaObjective f{model.sigma.inverse(), model.mu, state.phi.transpose() * c, 0.5 * state.nu2,
                      c.sum() / state.zeta};

    LambdaResult result;
    Vector x = state.lambda;
    double fx = f.value(x);
    Vector g = f.gradient(x);
    Vector d = g;
    int since_restart = 0;

    for (int iter = 0; iter < options.lambda_max_iters; ++iter) {
        result.iterations = iter;
        if (g.lpNorm<Eigen::Infinity>() <= options.lambda_grad_tol) {
            result.converged = true;
            break;
        }
        double slope = g.dot(d);
        if (!(slope > 0.0)) {
            d = g;
            slope = g.squaredNorm();
            since_restart = 0;
        }
        // Newton step length along d from the local curvature, then halve.
        double step = slope / f.curvature(x, d);
        if (!std::isfinite(step) || step <= 0.0) step = 1.0;
        bool accepted = false;
        Vector trial;
        double ftrial = fx;
        for (int ls = 0; ls < options.max_line_search_steps; ++ls) {
            trial = x + step * d;
            ftrial = f.value(trial);
            if (std::isfinite(ftrial) && ftrial >= fx + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        Vector g_new = f.gradient(trial);
        ++since_restart;
        double beta = 0.0;
        if (since_restart < K) beta = std::max(0.0, g_new.dot(g_new - g) / g.squaredNorm());
        else since_restart = 0;
        d = g_new + beta * d;
        x = std::move(trial);
        fx = ftrial;
        g = std::move(g_new);
    }
    if (!result.converged && g.lpNorm<Eigen::Infinity>() <= options.lambda_grad_tol)
        result.converged = true;
    result.lambda = std::move(x);
    return result;
}

Vector update_nu2(const VariationalState& state, const BowDocument& doc, const CtmModel& model,
                  const InferenceOptions& options) {
    const auto K = model.num_topics();
    const double N = static_cast<double>(doc.total());
    const Vector& precision_diag = model.sigma.inverse().diagonal();
    Vector out(K);

    for (Eigen::Index i = 0; i < K; ++i) {
        const double a = precision_diag(i);
        const double b = (N / state.zeta) * std::exp(state.lambda(i));
        // Strictly decreasing in v; positive near 0 and nonpositive at 1/a.
        auto grad = [&](double v) { return -0.5 * a - 0.5 * b * std::exp(0.5 * v) + 0.5 / v; };
        auto slope = [&](double v) { return -0.25 * b * std::exp(0.5 * v) - 0.5 / (v * v); };

        double lo = kNu2Min;
        double hi = std::min(kNu2Max, 1.0 / a);
        if (grad(lo) <= 0.0) {
            out(i) = lo;
            continue;
        }
        if (grad(hi) >= 0.0) {
            out(i) = hi;
            continue;
        }
        double v = std::clamp(state.nu2(i), lo, hi);
        if (v <= lo || v >= hi) v = std::sqrt(lo * hi);
        for (int iter = 0; iter < 200; ++iter) {
            const double gv = grad(v);
            if (std::abs(gv) <= options.nu2_grad_tol) break;
            if (gv > 0.0) lo = v;
            else hi = v;
            if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
            double next = v - gv / slope(v);
            if (!(next > lo && next < hi)) next = (hi > 4.0 * lo) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
            v = next;
        }
        out(i) = v;
    }
    return out;
}

VariationalState initial_state(const BowDocument& doc, const CtmModel& model) {
    const auto K = model.num_topics();
    VariationalState s;
    s.lambda = model.mu;
    s.nu2 = model.sigma.matrix().diagonal().cwiseMax(1e-4).cwiseMin(10.0);
    s.phi = Matrix::Constant(static_cast<Eigen::Index>(doc.entries.size()), K, 1.0 / static_cast<double>(K));
    s.zeta = update_zeta(s.lambda, s.nu2);
    return s;
}

VariationalState infer_document(const BowDocument& doc, const CtmModel& model,
                                const InferenceOptions& options, const VariationalState* init) {
    check_doc(doc, model);
    const auto K = model.num_topics();
    VariationalState s;
    if (init && init->lambda.size() == K && init->nu2.size() == K &&
        init->phi.rows() == static_cast<Eigen::Index>(doc.entries.size()) && init->phi.cols() == K) {
        s = *init;
        s.iterations = 0;
        s.converged = false;
        s.degraded = false;
        s.max_update_decrease = 0.0;
    } else {
        s = initial_state(doc, model);
    }

    double tracked = 0.0;
    auto track = [&](double& before) {
        if (!options.check_monotone) return;
        const double after = elbo(doc, model, s);
        const double drop = (before - after) / std::max(1.0, std::abs(before));
        s.max_update_decrease = std::max(s.max_update_decrease, drop);
        before = after;
    };

    s.zeta = update_zeta(s.lambda, s.nu2);
    double previous = elbo(doc, model, s);
    if (options.check_monotone && init) {
        // The refreshed zeta must not lower a warm-started bound either.
        const double before = elbo(doc, model, *init);
        s.max_update_decrease = std::max(0.0, (before - previous) / std::max(1.0, std::abs(before)));
    }
    for (int iter = 1; iter <= options.max_iters; ++iter) {
        tracked = previous;
        s.zeta = update_zeta(s.lambda, s.nu2);
        track(tracked);
        s.phi = update_phi(s.lambda, doc, model);
        track(tracked);
        s.zeta = update_zeta(s.lambda, s.nu2);
        track(tracked);
        auto lam = update_lambda(s, doc, model, options);
        s.lambda = std::move(lam.lambda);
        s.degraded = !lam.converged;
        track(tracked);
        s.zeta = update_zeta(s.lambda, s.nu2);
        track(tracked);
        s.nu2 = update_nu2(s, doc, model, options);
        track(tracked);
        s.zeta = update_zeta(s.lambda, s.nu2);
        track(tracked);

        const double current = elbo(doc, model, s);
        s.iterations = iter;
        const double change = std::abs(current - previous) / std::max(std::abs(previous), 1e-300);
        previous = current;
        if (change < options.rel_tol) {
            s.converged = true;
            break;
        }
    }
    s.elbo = previous;
    if (!std::isfinite(s.elbo)) throw NumericError("non-finite ELBO for document '" + doc.doc_id + "'");
    return s;
}

} // namespace ctm
