#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ctm/corpus.hpp"
#include "ctm/estimation.hpp"
#include "ctm/evaluation.hpp"
#include "ctm/inference.hpp"
#include "ctm/lda.hpp"
#include "ctm/topic_graph.hpp"

namespace ctm {

/// Version stamped into every artifact; loaders reject anything else.
inline constexpr int kSchemaVersion = 1;

enum class ModelType { Ctm, Lda };

struct ModelMetadata {
    std::string vocabulary;  // path reference, may be empty
    FitConfig config;
    int em_iterations = 0;
    bool converged = false;
    double elbo = 0.0;
};

/// Model files are JSON with doubles written in shortest round-trip form, so
/// save followed by load reproduces every parameter bit for bit.
void save_model(const std::filesystem::path& path, const CtmModel& model, const ModelMetadata& meta);
void save_model(const std::filesystem::path& path, const LdaModel& model, const ModelMetadata& meta);
ModelType read_model_type(const std::filesystem::path& path);
CtmModel load_ctm_model(const std::filesystem::path& path, ModelMetadata* meta = nullptr);
LdaModel load_lda_model(const std::filesystem::path& path, ModelMetadata* meta = nullptr);

/// Per-document (lambda, nu2, zeta, elbo); phi is not persisted.
void save_states(const std::filesystem::path& path, const std::vector<VariationalState>& states,
                 const std::vector<std::string>& doc_ids);
std::vector<VariationalState> load_states(const std::filesystem::path& path,
                                          std::vector<std::string>* doc_ids = nullptr);

/// Indices of the `count` most probable terms of a topic, most probable first.
std::vector<Eigen::Index> top_terms(const RowMatrix& log_beta, Eigen::Index topic, std::size_t count);

void save_graph_json(const std::filesystem::path& path, const TopicGraph& graph, const Neighborhoods& hoods,
                     const RowMatrix& log_beta, const Vocabulary& vocab);
/// Reads back the neighborhoods stored with a graph; both edge rules can be rebuilt from them.
Neighborhoods load_graph_neighborhoods(const std::filesystem::path& path, TopicGraph* graph = nullptr);
void save_graph_dot(const std::filesystem::path& path, const TopicGraph& graph, const RowMatrix& log_beta,
                    const Vocabulary& vocab);

void save_eval_report(const std::filesystem::path& path, const EvalReport& report);
void save_eval_csv(const std::filesystem::path& path, const EvalReport& report);
/// Plain-text table: held-out log probability by K, then perplexity by P.
std::string format_eval_table(const EvalReport& report);

} // namespace ctm
