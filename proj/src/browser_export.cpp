#include "ctm/browser_export.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "ctm/evaluation.hpp"
#include "ctm/parallel.hpp"
#include "ctm/persistence.hpp"
#include "json.hpp"

namespace ctm {

using nlohmann::json;

namespace {

void write_json(const std::filesystem::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << doc.dump(1) << '\n';
}

json edges_json(const TopicGraph& g) {
    json edges = json::array();
    for (const auto& e : g.edges) edges.push_back({{"source", e.source}, {"target", e.target}, {"weight", e.weight}});
    return edges;
}

} // namespace

void export_browser(const std::filesystem::path& dir, const CtmModel& model, const Corpus& corpus,
                    const std::vector<VariationalState>& states, const Neighborhoods& hoods,
                    const ExportOptions& options) {
    const auto K = model.num_topics();
    if (states.size() != corpus.num_docs()) throw Error("export needs one state per document");
    if (static_cast<Eigen::Index>(hoods.fits.size()) != K) throw Error("graph and model disagree on K");
    std::filesystem::create_directories(dir);

    std::vector<Vector> thetas(states.size()), moments(states.size());
    parallel_for(states.size(), options.threads, [&](std::size_t d) {
        thetas[d] = softmax(states[d].lambda);
        moments[d] = expected_sqrt_theta(states[d], options.moment_samples, options.seed);
    });

    Vector prevalence = Vector::Zero(K);
    for (const auto& t : thetas) prevalence += t;
    prevalence /= static_cast<double>(std::max<std::size_t>(1, thetas.size()));

    json topics = json::array();
    for (Eigen::Index k = 0; k < K; ++k) {
        json words = json::array();
        for (auto w : top_terms(model.log_beta, k, options.words_per_topic))
            words.push_back({{"term", corpus.vocabulary.term(static_cast<TermId>(w))},
                             {"prob", std::exp(model.log_beta(k, w))}});
        topics.push_back({{"id", k}, {"prevalence", prevalence(k)}, {"words", words}});
    }

    json documents = json::array();
    for (std::size_t d = 0; d < states.size(); ++d) {
        std::vector<Eigen::Index> order(static_cast<std::size_t>(K));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](Eigen::Index a, Eigen::Index b) { return thetas[d](a) > thetas[d](b); });
        order.resize(std::min<std::size_t>(3, order.size()));
        const auto& doc = corpus.documents[d];
        documents.push_back({{"index", d},
                             {"id", doc.doc_id},
                             {"title", doc.title},
                             {"year", doc.year},
                             {"theta", std::vector<double>(thetas[d].data(), thetas[d].data() + K)},
                             {"top_topics", order},
                             {"moments", std::vector<double>(moments[d].data(), moments[d].data() + K)}});
    }

    const auto and_graph = build_graph(hoods, EdgeRule::And);
    const auto or_graph = build_graph(hoods, EdgeRule::Or);

    write_json(dir / "manifest.json", {{"schema_version", kSchemaVersion},
                                       {"kind", "browser_export"},
                                       {"num_topics", K},
                                       {"num_documents", states.size()},
                                       {"moment_samples", options.moment_samples},
                                       {"seed", options.seed},
                                       {"files", {{"topics", "topics.json"}, {"graph", "graph.json"}, {"documents", "documents.json"}}}});
    write_json(dir / "topics.json", {{"schema_version", kSchemaVersion}, {"kind", "export_topics"}, {"topics", topics}});
    write_json(dir / "graph.json", {{"schema_version", kSchemaVersion},
                                    {"kind", "export_graph"},
                                    {"rho", hoods.rho},
                                    {"and_edges", edges_json(and_graph)},
                                    {"or_edges", edges_json(or_graph)}});
    write_json(dir / "documents.json",
               {{"schema_version", kSchemaVersion}, {"kind", "export_documents"}, {"documents", documents}});
}

std::vector<std::string> validate_export(const std::filesystem::path& dir) {
    std::vector<std::string> problems;
    auto load = [&](const std::string& name, const std::string& kind, json& out) {
        std::ifstream in(dir / name);
        if (!in) {
            problems.push_back(name + ": missing");
            return false;
        }
        try {
            out = json::parse(in);
        } catch (const std::exception& e) {
            problems.push_back(name + ": invalid JSON (" + e.what() + ")");
            return false;
        }
        if (!out.is_object() || out.value("schema_version", -1) != kSchemaVersion) {
            problems.push_back(name + ": schema_version is not " + std::to_string(kSchemaVersion));
            return false;
        }
        if (out.value("kind", std::string{}) != kind) {
            problems.push_back(name + ": kind is not '" + kind + "'");
            return false;
        }
        return true;
    };

    json manifest, topics, graph, documents;
    if (!load("manifest.json", "browser_export", manifest)) return problems;
    long long K = 0, D = 0;
    try {
        K = manifest.at("num_topics").get<long long>();
        D = manifest.at("num_documents").get<long long>();
    } catch (const std::exception&) {
        problems.push_back("manifest.json: missing num_topics or num_documents");
        return problems;
    }
    auto in_range = [&](const json& v) { return v.is_number_integer() && v.get<long long>() >= 0 && v.get<long long>() < K; };

    try {
        if (load("topics.json", "export_topics", topics)) {
            const auto& list = topics.at("topics");
            if (static_cast<long long>(list.size()) != K)
                problems.push_back("topics.json: expected " + std::to_string(K) + " topics, found " + std::to_string(list.size()));
            for (std::size_t i = 0; i < list.size(); ++i) {
                const auto& t = list[i];
                if (!t.contains("id") || t.at("id") != static_cast<long long>(i))
                    problems.push_back("topics.json: topic " + std::to_string(i) + " has a mismatched id");
                for (const auto& w : t.at("words")) {
                    const double p = w.at("prob");
                    if (!(p >= 0.0 && p <= 1.0))
                        problems.push_back("topics.json: topic " + std::to_string(i) + " has a word probability outside [0, 1]");
                }
            }
        }
    } catch (const std::exception& e) {
        problems.push_back(std::string("topics.json: malformed (") + e.what() + ")");
    }

    try {
        if (load("graph.json", "export_graph", graph)) {
            std::set<std::pair<long long, long long>> or_set;
            std::vector<std::pair<long long, long long>> and_list;
            for (const char* key : {"or_edges", "and_edges"}) {
                const auto& edges = graph.at(key);
                for (std::size_t i = 0; i < edges.size(); ++i) {
                    const auto& e = edges[i];
                    const std::string where = std::string("graph.json: ") + key + "[" + std::to_string(i) + "]";
                    bool ok = true;
                    for (const char* end : {"source", "target"}) {
                        if (!in_range(e.at(end))) {
                            problems.push_back(where + " references topic " + e.at(end).dump() +
                                               " outside [0, " + std::to_string(K) + ")");
                            ok = false;
                        }
                    }
                    if (!ok) continue;
                    const long long s = e.at("source"), t = e.at("target");
                    if (s == t) {
                        problems.push_back(where + " is a self-edge");
                        continue;
                    }
                    const double w = e.at("weight");
                    if (!(w >= 0.0) || !std::isfinite(w)) problems.push_back(where + " has an invalid weight");
                    auto key_pair = std::minmax(s, t);
                    if (std::string(key) == "or_edges") or_set.insert(key_pair);
                    else and_list.push_back(key_pair);
                }
            }
            for (const auto& p : and_list)
                if (!or_set.contains(p))
                    problems.push_back("graph.json: AND edge (" + std::to_string(p.first) + ", " +
                                       std::to_string(p.second) + ") missing from OR edges");
        }
    } catch (const std::exception& e) {
        problems.push_back(std::string("graph.json: malformed (") + e.what() + ")");
    }

    try {
        if (load("documents.json", "export_documents", documents)) {
            const auto& list = documents.at("documents");
            if (static_cast<long long>(list.size()) != D)
                problems.push_back("documents.json: expected " + std::to_string(D) + " documents, found " +
                                   std::to_string(list.size()));
            std::set<std::string> ids;
            for (std::size_t i = 0; i < list.size(); ++i) {
                const auto& doc = list[i];
                const std::string where = "documents.json: document " + std::to_string(i);
                const std::string id = doc.at("id");
                if (!ids.insert(id).second) problems.push_back(where + " repeats id '" + id + "'");
                const auto theta = doc.at("theta").get<std::vector<double>>();
                const auto moments = doc.at("moments").get<std::vector<double>>();
                if (static_cast<long long>(theta.size()) != K) problems.push_back(where + " theta has the wrong length");
                else {
                    const double sum = std::accumulate(theta.begin(), theta.end(), 0.0);
                    const bool nonneg = std::all_of(theta.begin(), theta.end(), [](double v) { return v >= 0.0; });
                    if (!nonneg || std::abs(sum - 1.0) > 1e-6)
                        problems.push_back(where + " theta is off the simplex (sum " + std::to_string(sum) + ")");
                }
                if (static_cast<long long>(moments.size()) != K) problems.push_back(where + " moments have the wrong length");
                else if (std::any_of(moments.begin(), moments.end(), [](double v) { return !(v >= 0.0); }))
                    problems.push_back(where + " has a negative moment");
                for (const auto& t : doc.at("top_topics"))
                    if (!in_range(t)) problems.push_back(where + " top topic " + t.dump() + " is out of range");
            }
        }
    } catch (const std::exception& e) {
        problems.push_back(std::string("documents.json: malformed (") + e.what() + ")");
    }
    return problems;
}

} // namespace ctm
