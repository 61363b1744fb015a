#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ctm/common.hpp"
#include "ctm/inference.hpp"

namespace ctm {

/// Lasso regression of one standardized column on the others.
///
/// Minimizes 0.5 * ||x_s - X_{\s} kappa||^2 + rho * sum_{t != s} |kappa_t|,
/// where X_{\s} is X with column s replaced by ones and kappa_s is the
/// unpenalized intercept. The residual sum of squares is not divided by the
/// number of rows, so a per-row penalty r corresponds to rho = D * r.
struct LassoFit {
    Eigen::Index target = 0;
    Vector coefficients;  // coefficients(target) is the intercept
    double rho = 0.0;
    bool converged = false;
    int sweeps = 0;
    /// Largest violation of the optimality conditions at the returned point.
    double kkt_residual = 0.0;
};

enum class EdgeRule { And, Or };

std::string to_string(EdgeRule rule);
EdgeRule parse_edge_rule(const std::string& text);

struct TopicEdge {
    Eigen::Index source = 0;  // source < target
    Eigen::Index target = 0;
    double weight = 0.0;      // max(|kappa_st|, |kappa_ts|)
    bool operator==(const TopicEdge&) const = default;
};

struct TopicGraph {
    Eigen::Index num_topics = 0;
    EdgeRule rule = EdgeRule::And;
    double rho = 0.0;
    std::vector<TopicEdge> edges;  // sorted by (source, target)

    bool has_edge(Eigen::Index s, Eigen::Index t) const;
};

/// Column-standardizes to mean 0 and sample (n - 1) standard deviation 1.
/// Throws Error naming the topic when a column has zero variance.
Matrix standardize(const Matrix& data);

struct LassoOptions {
    int max_sweeps = 10000;
    double tol = 1e-12;
};

LassoFit lasso_regress(const Matrix& standardized, Eigen::Index target, double rho,
                       const LassoOptions& options = {});

/// Smallest rho at which every penalized coefficient of `target` is zero.
double lasso_zero_threshold(const Matrix& standardized, Eigen::Index target);

/// Neighborhood estimates: fits[s] is the lasso fit for topic s; its nonzero
/// (|kappa| > 1e-10) non-intercept coefficients are the neighbors of s.
struct Neighborhoods {
    double rho = 0.0;
    std::vector<LassoFit> fits;

    std::vector<Eigen::Index> neighbors(Eigen::Index s) const;
};

inline constexpr double kNeighborTolerance = 1e-10;

Neighborhoods neighborhoods(const Matrix& standardized, double rho, unsigned threads = 1,
                            const LassoOptions& options = {});

TopicGraph build_graph(const Neighborhoods& hoods, EdgeRule rule);

/// D x K matrix of variational means, one row per document.
Matrix lambda_matrix(const std::vector<VariationalState>& states);

/// Standardizes the variational means, runs the regressions, applies the rule.
TopicGraph build_graph(const std::vector<VariationalState>& states, double rho, EdgeRule rule,
                       unsigned threads = 1);

} // namespace ctm
