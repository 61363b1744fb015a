#include "ctm/persistence.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace ctm {

using nlohmann::json;

namespace {

void write_json(const std::filesystem::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << doc.dump(1) << '\n';
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

void check_header(const json& doc, const std::string& kind, const std::filesystem::path& path) {
    if (!doc.is_object() || !doc.contains("schema_version"))
        throw SchemaError(path.string() + ": missing schema_version");
    if (doc.at("schema_version") != kSchemaVersion)
        throw SchemaError(path.string() + ": schema version " + doc.at("schema_version").dump() +
                          " is not supported (expected " + std::to_string(kSchemaVersion) + ")");
    if (doc.value("kind", std::string{}) != kind)
        throw SchemaError(path.string() + ": expected kind '" + kind + "'");
}

json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

template <class M>
json matrix_to_json(const M& m) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) flat.push_back(m(i, j));
    return flat;
}

Vector vector_from(const json& j, Eigen::Index expected, const char* name) {
    auto v = j.get<std::vector<double>>();
    if (static_cast<Eigen::Index>(v.size()) != expected)
        throw SchemaError(std::string("field '") + name + "' has the wrong length");
    return Eigen::Map<Vector>(v.data(), expected);
}

template <class M>
M matrix_from(const json& j, Eigen::Index rows, Eigen::Index cols, const char* name) {
    auto v = j.get<std::vector<double>>();
    if (static_cast<Eigen::Index>(v.size()) != rows * cols)
        throw SchemaError(std::string("field '") + name + "' has the wrong length");
    M m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = v[static_cast<std::size_t>(i * cols + c)];
    return m;
}

json config_to_json(const FitConfig& c) {
    return {{"num_topics", c.num_topics},
            {"em_rel_tol", c.em_rel_tol},
            {"inference_rel_tol", c.inference.rel_tol},
            {"max_em_iters", c.max_em_iters},
            {"seed", c.seed},
            {"topic_smoothing", c.topic_smoothing},
            {"var_floor", c.var_floor},
            {"init_noise", c.init_noise},
            {"restarts", c.restarts},
            {"lda_alpha", c.lda_alpha}};
}

FitConfig config_from_json(const json& j) {
    FitConfig c;
    c.num_topics = j.value("num_topics", c.num_topics);
    c.em_rel_tol = j.value("em_rel_tol", c.em_rel_tol);
    c.inference.rel_tol = j.value("inference_rel_tol", c.inference.rel_tol);
    c.max_em_iters = j.value("max_em_iters", c.max_em_iters);
    c.seed = j.value("seed", c.seed);
    c.topic_smoothing = j.value("topic_smoothing", c.topic_smoothing);
    c.var_floor = j.value("var_floor", c.var_floor);
    c.init_noise = j.value("init_noise", c.init_noise);
    c.restarts = j.value("restarts", c.restarts);
    c.lda_alpha = j.value("lda_alpha", c.lda_alpha);
    return c;
}

json model_header(const char* type, Eigen::Index K, Eigen::Index V, const ModelMetadata& meta) {
    return {{"schema_version", kSchemaVersion},
            {"kind", "model"},
            {"model_type", type},
            {"num_topics", K},
            {"vocab_size", V},
            {"vocabulary", meta.vocabulary},
            {"config", config_to_json(meta.config)},
            {"fit", {{"em_iterations", meta.em_iterations}, {"converged", meta.converged}, {"elbo", meta.elbo}}}};
}

void read_meta(const json& doc, ModelMetadata* meta) {
    if (!meta) return;
    meta->vocabulary = doc.value("vocabulary", std::string{});
    if (doc.contains("config")) meta->config = config_from_json(doc.at("config"));
    if (doc.contains("fit")) {
        const auto& f = doc.at("fit");
        meta->em_iterations = f.value("em_iterations", 0);
        meta->converged = f.value("converged", false);
        meta->elbo = f.value("elbo", 0.0);
    }
}

json load_model_json(const std::filesystem::path& path, const char* type) {
    json doc = read_json(path);
    check_header(doc, "model", path);
    if (doc.value("model_type", std::string{}) != type)
        throw SchemaError(path.string() + ": expected a " + type + " model");
    return doc;
}

std::string top_words_label(const RowMatrix& log_beta, Eigen::Index topic, const Vocabulary& vocab, std::size_t n) {
    std::string label;
    for (auto w : top_terms(log_beta, topic, n)) {
        if (!label.empty()) label += ' ';
        label += static_cast<std::size_t>(w) < vocab.size() ? vocab.term(static_cast<TermId>(w)) : std::to_string(w);
    }
    return label;
}

} // namespace

void save_model(const std::filesystem::path& path, const CtmModel& model, const ModelMetadata& meta) {
    json doc = model_header("ctm", model.num_topics(), model.vocab_size(), meta);
    doc["log_beta"] = matrix_to_json(model.log_beta);
    doc["mu"] = to_json(model.mu);
    doc["sigma"] = matrix_to_json(model.sigma.matrix());
    write_json(path, doc);
}

void save_model(const std::filesystem::path& path, const LdaModel& model, const ModelMetadata& meta) {
    json doc = model_header("lda", model.num_topics(), model.vocab_size(), meta);
    doc["log_beta"] = matrix_to_json(model.log_beta);
    doc["alpha"] = to_json(model.alpha);
    write_json(path, doc);
}

ModelType read_model_type(const std::filesystem::path& path) {
    json doc = read_json(path);
    check_header(doc, "model", path);
    const auto type = doc.value("model_type", std::string{});
    if (type == "ctm") return ModelType::Ctm;
    if (type == "lda") return ModelType::Lda;
    throw SchemaError(path.string() + ": unknown model_type '" + type + "'");
}

CtmModel load_ctm_model(const std::filesystem::path& path, ModelMetadata* meta) {
    json doc = load_model_json(path, "ctm");
    try {
        const Eigen::Index K = doc.at("num_topics"), V = doc.at("vocab_size");
        CtmModel model;
        model.log_beta = matrix_from<RowMatrix>(doc.at("log_beta"), K, V, "log_beta");
        model.mu = vector_from(doc.at("mu"), K, "mu");
        model.sigma = SpdMatrix(matrix_from<Matrix>(doc.at("sigma"), K, K, "sigma"));
        model.validate();
        read_meta(doc, meta);
        return model;
    } catch (const json::exception& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

LdaModel load_lda_model(const std::filesystem::path& path, ModelMetadata* meta) {
    json doc = load_model_json(path, "lda");
    try {
        const Eigen::Index K = doc.at("num_topics"), V = doc.at("vocab_size");
        LdaModel model;
        model.log_beta = matrix_from<RowMatrix>(doc.at("log_beta"), K, V, "log_beta");
        model.alpha = vector_from(doc.at("alpha"), K, "alpha");
        model.validate();
        read_meta(doc, meta);
        return model;
    } catch (const json::exception& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

void save_states(const std::filesystem::path& path, const std::vector<VariationalState>& states,
                 const std::vector<std::string>& doc_ids) {
    if (states.size() != doc_ids.size()) throw Error("save_states needs one id per state");
    json docs = json::array();
    for (std::size_t d = 0; d < states.size(); ++d) {
        const auto& s = states[d];
        docs.push_back({{"doc_id", doc_ids[d]},
                        {"lambda", to_json(s.lambda)},
                        {"nu2", to_json(s.nu2)},
                        {"zeta", s.zeta},
                        {"elbo", s.elbo},
                        {"converged", s.converged}});
    }
    const auto K = states.empty() ? 0 : states.front().lambda.size();
    write_json(path, {{"schema_version", kSchemaVersion}, {"kind", "ctm_states"}, {"num_topics", K}, {"documents", docs}});
}

std::vector<VariationalState> load_states(const std::filesystem::path& path, std::vector<std::string>* doc_ids) {
    json doc = read_json(path);
    check_header(doc, "ctm_states", path);
    try {
        const Eigen::Index K = doc.at("num_topics");
        std::vector<VariationalState> states;
        if (doc_ids) doc_ids->clear();
        for (const auto& d : doc.at("documents")) {
            VariationalState s;
            s.lambda = vector_from(d.at("lambda"), K, "lambda");
            s.nu2 = vector_from(d.at("nu2"), K, "nu2");
            s.zeta = d.at("zeta");
            s.elbo = d.at("elbo");
            s.converged = d.value("converged", false);
            if ((s.nu2.array() <= 0.0).any()) throw SchemaError(path.string() + ": nonpositive nu2");
            if (doc_ids) doc_ids->push_back(d.at("doc_id"));
            states.push_back(std::move(s));
        }
        return states;
    } catch (const json::exception& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

std::vector<Eigen::Index> top_terms(const RowMatrix& log_beta, Eigen::Index topic, std::size_t count) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(log_beta.cols()));
    std::iota(idx.begin(), idx.end(), 0);
    count = std::min(count, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count), idx.end(),
                      [&](Eigen::Index a, Eigen::Index b) {
                          const double x = log_beta(topic, a), y = log_beta(topic, b);
                          return x > y || (x == y && a < b);
                      });
    idx.resize(count);
    return idx;
}

void save_graph_json(const std::filesystem::path& path, const TopicGraph& graph, const Neighborhoods& hoods,
                     const RowMatrix& log_beta, const Vocabulary& vocab) {
    json nodes = json::array();
    for (Eigen::Index k = 0; k < graph.num_topics; ++k) {
        json words = json::array();
        for (auto w : top_terms(log_beta, k, 10))
            words.push_back(static_cast<std::size_t>(w) < vocab.size() ? vocab.term(static_cast<TermId>(w)) : std::to_string(w));
        nodes.push_back({{"id", k}, {"top_words", words}});
    }
    json edges = json::array();
    for (const auto& e : graph.edges) edges.push_back({{"source", e.source}, {"target", e.target}, {"weight", e.weight}});
    json fits = json::array();
    for (const auto& f : hoods.fits)
        fits.push_back({{"topic", f.target},
                        {"coefficients", to_json(f.coefficients)},
                        {"converged", f.converged},
                        {"kkt_residual", f.kkt_residual}});
    write_json(path, {{"schema_version", kSchemaVersion},
                      {"kind", "topic_graph"},
                      {"num_topics", graph.num_topics},
                      {"rho", graph.rho},
                      {"rule", to_string(graph.rule)},
                      {"nodes", nodes},
                      {"edges", edges},
                      {"neighborhoods", fits}});
}

Neighborhoods load_graph_neighborhoods(const std::filesystem::path& path, TopicGraph* graph) {
    json doc = read_json(path);
    check_header(doc, "topic_graph", path);
    try {
        const Eigen::Index K = doc.at("num_topics");
        Neighborhoods hoods;
        hoods.rho = doc.at("rho");
        for (const auto& f : doc.at("neighborhoods")) {
            LassoFit fit;
            fit.target = f.at("topic");
            fit.rho = hoods.rho;
            fit.coefficients = vector_from(f.at("coefficients"), K, "coefficients");
            fit.converged = f.value("converged", false);
            fit.kkt_residual = f.value("kkt_residual", 0.0);
            hoods.fits.push_back(std::move(fit));
        }
        if (static_cast<Eigen::Index>(hoods.fits.size()) != K)
            throw SchemaError(path.string() + ": expected one neighborhood per topic");
        if (graph) *graph = build_graph(hoods, parse_edge_rule(doc.at("rule")));
        return hoods;
    } catch (const json::exception& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

void save_graph_dot(const std::filesystem::path& path, const TopicGraph& graph, const RowMatrix& log_beta,
                    const Vocabulary& vocab) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "graph topics {\n";
    out << "  // rule=" << to_string(graph.rule) << " rho=" << graph.rho << "\n";
    for (Eigen::Index k = 0; k < graph.num_topics; ++k)
        out << "  t" << k << " [label=\"" << k << ": " << top_words_label(log_beta, k, vocab, 5) << "\"];\n";
    for (const auto& e : graph.edges) {
        char w[32];
        std::snprintf(w, sizeof w, "%.6g", e.weight);
        out << "  t" << e.source << " -- t" << e.target << " [weight=" << w << "];\n";
    }
    out << "}\n";
}

void save_eval_report(const std::filesystem::path& path, const EvalReport& report) {
    auto stat = [](const SummaryStat& s) { return json{{"mean", s.mean}, {"std_error", s.std_error}}; };
    json results = json::array();
    for (const auto& r : report.results) {
        json folds = json::array();
        for (const auto& f : r.folds) {
            folds.push_back({{"fold", f.fold},
                             {"ok", f.ok},
                             {"error", f.error},
                             {"test_docs", f.test_docs},
                             {"ctm_log_probs", f.ctm_log_probs},
                             {"lda_log_probs", f.lda_log_probs},
                             {"ctm_total", f.ctm_total},
                             {"lda_total", f.lda_total}});
        }
        json pp = json::array();
        for (const auto& p : r.perplexity) pp.push_back({{"observed", p.observed}, {"ctm", p.ctm}, {"lda", p.lda}});
        results.push_back({{"num_topics", r.num_topics},
                           {"partial", r.partial},
                           {"ctm", stat(r.ctm)},
                           {"lda", stat(r.lda)},
                           {"difference", stat(r.difference)},
                           {"perplexity", pp},
                           {"folds", folds}});
    }
    write_json(path, {{"schema_version", kSchemaVersion},
                      {"kind", "eval_report"},
                      {"folds", report.folds},
                      {"n_samples", report.n_samples},
                      {"theta_samples", report.theta_samples},
                      {"seed", report.seed},
                      {"fold_of_doc", report.fold_of_doc},
                      {"results", results}});
}

void save_eval_csv(const std::filesystem::path& path, const EvalReport& report) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out.precision(17);
    out << "section,num_topics,observed,ctm,ctm_se,lda,lda_se,difference,difference_se\n";
    for (const auto& r : report.results) {
        out << "heldout," << r.num_topics << ",," << r.ctm.mean << ',' << r.ctm.std_error << ',' << r.lda.mean << ','
            << r.lda.std_error << ',' << r.difference.mean << ',' << r.difference.std_error << '\n';
        for (const auto& p : r.perplexity)
            out << "perplexity," << r.num_topics << ',' << p.observed << ',' << p.ctm << ",," << p.lda << ",,"
                << (p.ctm - p.lda) << ",\n";
    }
}

std::string format_eval_table(const EvalReport& report) {
    std::ostringstream out;
    char line[256];
    out << "held-out log probability (" << report.folds << "-fold, per-fold totals)\n";
    std::snprintf(line, sizeof line, "%6s %16s %10s %16s %10s %14s %10s\n", "K", "CTM", "se", "LDA", "se",
                  "CTM-LDA", "se");
    out << line;
    for (const auto& r : report.results) {
        std::snprintf(line, sizeof line, "%6d %16.3f %10.3f %16.3f %10.3f %14.3f %10.3f%s\n", r.num_topics,
                      r.ctm.mean, r.ctm.std_error, r.lda.mean, r.lda.std_error, r.difference.mean,
                      r.difference.std_error, r.partial ? "  (partial)" : "");
        out << line;
    }
    bool any_pp = false;
    for (const auto& r : report.results) any_pp = any_pp || !r.perplexity.empty();
    if (any_pp) {
        out << "predictive perplexity\n";
        std::snprintf(line, sizeof line, "%6s %6s %12s %12s %12s\n", "K", "P", "CTM", "LDA", "CTM-LDA");
        out << line;
        for (const auto& r : report.results)
            for (const auto& p : r.perplexity) {
                std::snprintf(line, sizeof line, "%6d %6lld %12.3f %12.3f %12.3f\n", r.num_topics,
                              static_cast<long long>(p.observed), p.ctm, p.lda, p.ctm - p.lda);
                out << line;
            }
    }
    return out.str();
}

} // namespace ctm
