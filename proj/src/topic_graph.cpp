#include "ctm/topic_graph.hpp"

#include <algorithm>
#include <cmath>

#include "ctm/parallel.hpp"

namespace ctm {

std::string to_string(EdgeRule rule) { return rule == EdgeRule::And ? "and" : "or"; }

EdgeRule parse_edge_rule(const std::string& text) {
    std::string lower;
    for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "and") return EdgeRule::And;
    if (lower == "or") return EdgeRule::Or;
    throw Error("unknown edge rule '" + text + "' (expected and|or)");
}

bool TopicGraph::has_edge(Eigen::Index s, Eigen::Index t) const {
    if (s > t) std::swap(s, t);
    return std::any_of(edges.begin(), edges.end(),
                       [&](const TopicEdge& e) { return e.source == s && e.target == t; });
}

Matrix standardize(const Matrix& data) {
    const auto D = data.rows();
    if (D < 2) throw Error("standardize needs at least two rows");
    Matrix out(D, data.cols());
    for (Eigen::Index k = 0; k < data.cols(); ++k) {
        const double mean = data.col(k).mean();
        Vector centered = data.col(k).array() - mean;
        const double sd = std::sqrt(centered.squaredNorm() / static_cast<double>(D - 1));
        if (!(sd > 0.0) || !std::isfinite(sd))
            throw Error("topic " + std::to_string(k) + " has zero variance across documents");
        out.col(k) = centered / sd;
    }
    return out;
}

namespace {

double soft_threshold(double z, double rho) {
    if (z > rho) return z - rho;
    if (z < -rho) return z + rho;
    return 0.0;
}

/// Design matrix with column `target` replaced by ones.
Matrix design_for(const Matrix& x, Eigen::Index target) {
    Matrix design = x;
    design.col(target).setOnes();
    return design;
}

double kkt_violation(const Matrix& design, const Vector& residual, const Vector& coef,
                     Eigen::Index target, double rho) {
    Vector grad = design.transpose() * residual;
    double worst = 0.0;
    for (Eigen::Index j = 0; j < coef.size(); ++j) {
        double v;
        if (j == target) v = std::abs(grad(j));
        else if (coef(j) == 0.0) v = std::max(0.0, std::abs(grad(j)) - rho);
        else v = std::abs(grad(j) - rho * (coef(j) > 0.0 ? 1.0 : -1.0));
        worst = std::max(worst, v);
    }
    return worst;
}

} // namespace

double lasso_zero_threshold(const Matrix& standardized, Eigen::Index target) {
    const Vector y = standardized.col(target);
    const Vector r = y.array() - y.mean();  // residual after fitting the intercept alone
    double best = 0.0;
    for (Eigen::Index t = 0; t < standardized.cols(); ++t)
        if (t != target) best = std::max(best, std::abs(standardized.col(t).dot(r)));
    return best;
}

LassoFit lasso_regress(const Matrix& standardized, Eigen::Index target, double rho,
                       const LassoOptions& options) {
    const auto K = standardized.cols();
    if (target < 0 || target >= K) throw Error("lasso target out of range");
    if (!(rho >= 0.0)) throw Error("lasso penalty must be nonnegative");

    const Vector y = standardized.col(target);
    const Matrix design = design_for(standardized, target);
    const Vector col_sq = design.colwise().squaredNorm().transpose();

    LassoFit fit;
    fit.target = target;
    fit.rho = rho;
    fit.coefficients = Vector::Zero(K);
    Vector residual = y;

    for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < K; ++j) {
            if (col_sq(j) <= 0.0) continue;
            const double old = fit.coefficients(j);
            const double z = design.col(j).dot(residual) + col_sq(j) * old;
            const double updated = (j == target) ? z / col_sq(j) : soft_threshold(z, rho) / col_sq(j);
            if (updated != old) {
                residual.noalias() -= (updated - old) * design.col(j);
                fit.coefficients(j) = updated;
                max_change = std::max(max_change, std::abs(updated - old) * col_sq(j));
            }
        }
        fit.sweeps = sweep;
        if (max_change <= options.tol * std::max(1.0, static_cast<double>(y.size()))) {
            fit.converged = true;
            break;
        }
    }
    residual = y - design * fit.coefficients;
    fit.kkt_residual = kkt_violation(design, residual, fit.coefficients, target, rho);
    return fit;
}

std::vector<Eigen::Index> Neighborhoods::neighbors(Eigen::Index s) const {
    std::vector<Eigen::Index> out;
    const auto& fit = fits.at(static_cast<std::size_t>(s));
    for (Eigen::Index t = 0; t < fit.coefficients.size(); ++t)
        if (t != s && std::abs(fit.coefficients(t)) > kNeighborTolerance) out.push_back(t);
    return out;
}

Neighborhoods neighborhoods(const Matrix& standardized, double rho, unsigned threads,
                            const LassoOptions& options) {
    Neighborhoods hoods;
    hoods.rho = rho;
    hoods.fits.resize(static_cast<std::size_t>(standardized.cols()));
    parallel_for(hoods.fits.size(), threads, [&](std::size_t s) {
        hoods.fits[s] = lasso_regress(standardized, static_cast<Eigen::Index>(s), rho, options);
    });
    return hoods;
}

TopicGraph build_graph(const Neighborhoods& hoods, EdgeRule rule) {
    TopicGraph graph;
    graph.num_topics = static_cast<Eigen::Index>(hoods.fits.size());
    graph.rule = rule;
    graph.rho = hoods.rho;
    auto selected = [&](Eigen::Index s, Eigen::Index t) {
        return std::abs(hoods.fits[static_cast<std::size_t>(s)].coefficients(t)) > kNeighborTolerance;
    };
    for (Eigen::Index s = 0; s < graph.num_topics; ++s) {
        for (Eigen::Index t = s + 1; t < graph.num_topics; ++t) {
            const bool st = selected(s, t);
            const bool ts = selected(t, s);
            if (rule == EdgeRule::And ? (st && ts) : (st || ts)) {
                const double w = std::max(std::abs(hoods.fits[static_cast<std::size_t>(s)].coefficients(t)),
                                          std::abs(hoods.fits[static_cast<std::size_t>(t)].coefficients(s)));
                graph.edges.push_back({s, t, w});
            }
        }
    }
    return graph;
}

Matrix lambda_matrix(const std::vector<VariationalState>& states) {
    if (states.empty()) throw Error("no states");
    Matrix m(static_cast<Eigen::Index>(states.size()), states.front().lambda.size());
    for (std::size_t d = 0; d < states.size(); ++d) m.row(static_cast<Eigen::Index>(d)) = states[d].lambda.transpose();
    return m;
}

TopicGraph build_graph(const std::vector<VariationalState>& states, double rho, EdgeRule rule,
                       unsigned threads) {
    return build_graph(neighborhoods(standardize(lambda_matrix(states)), rho, threads), rule);
}

} // namespace ctm
