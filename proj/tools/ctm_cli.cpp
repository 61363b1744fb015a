// Command-line front end: prepare -> train -> infer -> graph -> similar -> eval -> export-browser.

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "ctm/browser_export.hpp"
#include "ctm/corpus.hpp"
#include "ctm/estimation.hpp"
#include "ctm/evaluation.hpp"
#include "ctm/lda.hpp"
#include "ctm/persistence.hpp"
#include "ctm/random.hpp"
#include "ctm/synthetic.hpp"
#include "ctm/topic_graph.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Runtime failure with a category for the machine-readable error line.
struct CliError : std::runtime_error {
    CliError(std::string kind, const std::string& what) : std::runtime_error(what), kind(std::move(kind)) {}
    std::string kind;
};

struct Globals {
    unsigned threads = 1;
    std::uint64_t seed = 1;
};

void echo_config(const std::string& command, json config, const Globals& g) {
    config["command"] = command;
    config["threads"] = g.threads;
    config["seed"] = g.seed;
    std::cerr << "config " << config.dump() << "\n";
}

void progress(const std::string& line) { std::cerr << line << "\n"; }

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

void require_file(const fs::path& p) {
    if (!fs::exists(p)) throw CliError("missing_file", p.string() + " does not exist");
}

std::unordered_set<std::string> load_stop_words(const std::string& spec) {
    if (spec == "default") return ctm::default_stop_words();
    if (spec == "none") return {};
    require_file(spec);
    std::ifstream in(spec);
    std::unordered_set<std::string> out;
    for (std::string line; std::getline(in, line);) {
        for (auto& t : ctm::tokenize(line)) out.insert(t);
    }
    return out;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw CliError("missing_file", "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Documents are the *.txt files of `dir`, id = file stem, in name order.
/// An optional metadata.tsv (id, title, year) supplies titles and years.
std::vector<ctm::RawDocument> read_raw_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw CliError("missing_file", dir.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::map<std::string, std::pair<std::string, std::string>> meta;
    if (fs::exists(dir / "metadata.tsv")) {
        std::ifstream in(dir / "metadata.tsv");
        for (std::string line; std::getline(in, line);) {
            std::vector<std::string> fields;
            std::stringstream ss(line);
            for (std::string f; std::getline(ss, f, '\t');) fields.push_back(f);
            fields.resize(3);
            meta[fields[0]] = {fields[1], fields[2]};
        }
    }
    std::vector<ctm::RawDocument> docs;
    for (const auto& f : files) {
        ctm::RawDocument d;
        d.doc_id = f.stem().string();
        d.text = read_file(f);
        if (auto it = meta.find(d.doc_id); it != meta.end()) std::tie(d.title, d.year) = it->second;
        docs.push_back(std::move(d));
    }
    if (docs.empty()) throw CliError("empty_corpus", dir.string() + " has no .txt documents");
    return docs;
}

ctm::Corpus load_corpus_dir(const fs::path& dir) {
    require_file(dir / "corpus.bow");
    return ctm::load_corpus(dir);
}

std::vector<std::string> doc_ids(const ctm::Corpus& c) {
    std::vector<std::string> ids;
    for (const auto& d : c.documents) ids.push_back(d.doc_id);
    return ids;
}

void check_states_match(const std::vector<ctm::VariationalState>& states, const std::vector<std::string>& ids,
                        const ctm::Corpus& corpus) {
    if (ids != doc_ids(corpus)) throw CliError("mismatch", "states file does not match the corpus documents");
    (void)states;
}

template <class T>
std::string join(const std::vector<T>& v) {
    std::ostringstream ss;
    for (std::size_t i = 0; i < v.size(); ++i) ss << (i ? "," : "") << v[i];
    return ss.str();
}

double total_rho(double rho, const std::string& scale, std::size_t docs) {
    return scale == "total" ? rho : rho * static_cast<double>(docs);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Correlated topic model toolkit"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->capture_default_str();
    app.add_option("--seed", g.seed, "Random seed")->capture_default_str();

    // prepare
    auto* prepare = app.add_subcommand("prepare", "Build a bag-of-words corpus from a directory of .txt files");
    std::string prep_in, prep_out, prep_stop = "default";
    std::int64_t prep_min = 1;
    prepare->add_option("--input", prep_in, "Directory of raw .txt documents")->required();
    prepare->add_option("--output", prep_out, "Corpus directory to write")->required();
    prepare->add_option("--min-count", prep_min, "Drop terms occurring fewer times in the corpus")->capture_default_str();
    prepare->add_option("--stop-words", prep_stop, "default | none | path to a word list")->capture_default_str();

    // synth
    auto* synth = app.add_subcommand("synth", "Sample a synthetic corpus from a correlated topic model");
    std::string synth_out, synth_raw;
    int synth_k = 5, synth_words = 80;
    std::size_t synth_docs = 200, synth_vocab = 60;
    double synth_scale = 4.0, synth_corr = 0.8, synth_conc = 0.1;
    synth->add_option("--output", synth_out, "Corpus directory to write")->required();
    synth->add_option("--raw", synth_raw, "Also write the documents as raw text here");
    synth->add_option("--k", synth_k, "Topics")->capture_default_str();
    synth->add_option("--docs", synth_docs, "Documents")->capture_default_str();
    synth->add_option("--words", synth_words, "Words per document")->capture_default_str();
    synth->add_option("--vocab", synth_vocab, "Vocabulary size")->capture_default_str();
    synth->add_option("--scale", synth_scale, "Prior variance of every topic")->capture_default_str();
    synth->add_option("--correlation", synth_corr, "Correlation between topics 0 and 1")->capture_default_str();
    synth->add_option("--concentration", synth_conc, "Dirichlet concentration of the topics")->capture_default_str();

    // train
    auto* train = app.add_subcommand("train", "Fit a CTM or LDA model");
    std::string train_corpus, train_out, train_states, train_model = "ctm";
    ctm::FitConfig fit_cfg;
    fit_cfg.num_topics = 10;
    train->add_option("--corpus", train_corpus, "Corpus directory")->required();
    train->add_option("--output", train_out, "Model JSON to write")->required();
    train->add_option("--states", train_states, "Also write the fitted per-document states (ctm only)");
    train->add_option("--model", train_model, "ctm | lda")->check(CLI::IsMember({"ctm", "lda"}))->capture_default_str();
    train->add_option("--k", fit_cfg.num_topics, "Topics")->capture_default_str();
    train->add_option("--tol", fit_cfg.em_rel_tol, "Relative EM convergence tolerance")->capture_default_str();
    train->add_option("--inference-tol", fit_cfg.inference.rel_tol, "Per-document tolerance")->capture_default_str();
    train->add_option("--max-iters", fit_cfg.max_em_iters, "EM iteration cap")->capture_default_str();
    train->add_option("--restarts", fit_cfg.restarts, "Random restarts; the best bound wins")->capture_default_str();
    train->add_option("--alpha", fit_cfg.lda_alpha, "LDA Dirichlet parameter (0 = 1/K)")->capture_default_str();

    // infer
    auto* infer = app.add_subcommand("infer", "Infer per-document variational states");
    std::string infer_model, infer_corpus, infer_out;
    infer->add_option("--model", infer_model, "CTM model JSON")->required();
    infer->add_option("--corpus", infer_corpus, "Corpus directory")->required();
    infer->add_option("--output", infer_out, "States JSON to write")->required();

    // graph
    auto* graph = app.add_subcommand("graph", "Topic graph by lasso neighborhood selection");
    std::string graph_states, graph_model, graph_corpus, graph_out, graph_dot, graph_rule = "and",
                                                                            graph_scale = "per-doc";
    double graph_rho = 0.1;
    std::vector<double> graph_grid;
    graph->add_option("--states", graph_states, "States JSON")->required();
    graph->add_option("--model", graph_model, "CTM model JSON (for topic words)")->required();
    graph->add_option("--corpus", graph_corpus, "Corpus directory (for the vocabulary)")->required();
    graph->add_option("--output", graph_out, "Graph JSON, or CSV in grid mode")->required();
    graph->add_option("--dot", graph_dot, "Also write Graphviz DOT");
    graph->add_option("--rho", graph_rho, "Lasso penalty")->capture_default_str();
    graph->add_option("--rho-scale", graph_scale,
                      "per-doc: penalty per document (multiplied by D); total: used as is")
        ->check(CLI::IsMember({"per-doc", "total"}))
        ->capture_default_str();
    graph->add_option("--rule", graph_rule, "and | or")->check(CLI::IsMember({"and", "or"}))->capture_default_str();
    graph->add_option("--rho-grid", graph_grid, "Comma-separated penalties; writes edge counts as CSV")
        ->delimiter(',');

    // similar
    auto* similar = app.add_subcommand("similar", "Documents closest to a query by expected Hellinger distance");
    std::string sim_states, sim_query, sim_out;
    std::size_t sim_top = 10;
    int sim_samples = 512;
    similar->add_option("--states", sim_states, "States JSON")->required();
    similar->add_option("--query", sim_query, "Query document id")->required();
    similar->add_option("--top", sim_top, "Results to list")->capture_default_str();
    similar->add_option("--samples", sim_samples, "Monte Carlo draws per moment vector")->capture_default_str();
    similar->add_option("--output", sim_out, "Write the list here instead of stdout");

    // eval
    auto* eval = app.add_subcommand("eval", "Cross-validated held-out likelihood and predictive perplexity");
    std::string eval_corpus, eval_out, eval_csv, eval_table;
    ctm::CrossValidationConfig cv;
    cv.k_grid = {5};
    eval->add_option("--corpus", eval_corpus, "Corpus directory")->required();
    eval->add_option("--output", eval_out, "Report JSON to write")->required();
    eval->add_option("--csv", eval_csv, "Also write CSV");
    eval->add_option("--table", eval_table, "Also write the text table to a file");
    eval->add_option("--folds", cv.folds, "Cross-validation folds")->capture_default_str();
    eval->add_option("--k-grid", cv.k_grid, "Comma-separated topic counts")->delimiter(',');
    eval->add_option("--p-grid", cv.p_grid, "Comma-separated observed-word counts for perplexity")->delimiter(',');
    eval->add_option("--samples", cv.n_samples, "Importance samples per document")->capture_default_str();
    eval->add_option("--theta-samples", cv.theta_samples, "Draws for E[theta]")->capture_default_str();
    eval->add_option("--tol", cv.fit.em_rel_tol, "Relative EM convergence tolerance")->capture_default_str();
    eval->add_option("--restarts", cv.fit.restarts, "Restarts per fit")->capture_default_str();

    // export-browser
    auto* exporter = app.add_subcommand("export-browser", "Write the static corpus-browser export");
    std::string ex_model, ex_corpus, ex_states, ex_graph, ex_out;
    ctm::ExportOptions ex_opt;
    exporter->add_option("--model", ex_model, "CTM model JSON")->required();
    exporter->add_option("--corpus", ex_corpus, "Corpus directory")->required();
    exporter->add_option("--states", ex_states, "States JSON")->required();
    exporter->add_option("--graph", ex_graph, "Graph JSON")->required();
    exporter->add_option("--output", ex_out, "Export directory")->required();
    exporter->add_option("--words", ex_opt.words_per_topic, "Words per topic")->capture_default_str();
    exporter->add_option("--samples", ex_opt.moment_samples, "Draws per moment vector")->capture_default_str();

    // validate-export
    auto* validate = app.add_subcommand("validate-export", "Check an export directory");
    std::string val_dir;
    validate->add_option("dir", val_dir, "Export directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << json{{"error", "usage"}, {"message", one_line(e.what())}}.dump() << "\n";
        return 2;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
        for (const std::string* out : {&train_out, &train_states, &infer_out, &graph_out, &graph_dot, &sim_out,
                                       &eval_out, &eval_csv, &eval_table}) {
            const fs::path parent = fs::path(*out).parent_path();
            if (!out->empty() && !parent.empty()) fs::create_directories(parent);
        }
        if (*prepare) {
            echo_config("prepare", {{"input", prep_in}, {"output", prep_out}, {"min_count", prep_min}, {"stop_words", prep_stop}}, g);
            const auto docs = read_raw_dir(prep_in);
            ctm::BuildReport report;
            const auto corpus = ctm::build_corpus(docs, load_stop_words(prep_stop), prep_min, &report, g.threads);
            for (const auto& id : report.dropped_documents) progress("warning: document " + id + " is empty after pruning");
            ctm::save_corpus(prep_out, corpus);
            progress("prepared " + std::to_string(corpus.num_docs()) + " documents, " + std::to_string(report.kept_terms) +
                     " of " + std::to_string(report.raw_terms) + " terms kept");
        } else if (*synth) {
            echo_config("synth", {{"output", synth_out}, {"raw", synth_raw}, {"k", synth_k}, {"docs", synth_docs},
                                  {"words", synth_words}, {"vocab", synth_vocab}, {"scale", synth_scale},
                                  {"correlation", synth_corr}, {"concentration", synth_conc}}, g);
            ctm::CtmModel truth;
            truth.log_beta = ctm::random_log_topics(synth_k, static_cast<Eigen::Index>(synth_vocab), synth_conc, g.seed);
            truth.mu = ctm::Vector::Zero(synth_k);
            truth.sigma = ctm::SpdMatrix(ctm::correlated_covariance(synth_k, synth_scale, {{0, 1}}, synth_corr));
            auto corpus = ctm::sample_ctm_corpus(truth, synth_docs, synth_words, ctm::task_seed(g.seed, 1));
            ctm::Corpus named;
            named.vocabulary = ctm::Vocabulary(ctm::pseudo_words(synth_vocab));
            named.documents = std::move(corpus.documents);
            ctm::save_corpus(synth_out, named);
            ctm::ModelMetadata meta;
            meta.vocabulary = (fs::path(synth_out) / "vocab.txt").string();
            meta.config.num_topics = synth_k;
            meta.config.seed = g.seed;
            ctm::save_model(fs::path(synth_out) / "truth.json", truth, meta);
            if (!synth_raw.empty()) {
                fs::create_directories(synth_raw);
                std::ofstream tsv(fs::path(synth_raw) / "metadata.tsv");
                for (const auto& d : ctm::render_raw_documents(named, ctm::task_seed(g.seed, 2))) {
                    std::ofstream(fs::path(synth_raw) / (d.doc_id + ".txt")) << d.text << "\n";
                    tsv << d.doc_id << '\t' << d.title << '\t' << d.year << '\n';
                }
            }
            progress("wrote " + std::to_string(named.num_docs()) + " documents to " + synth_out);
        } else if (*train) {
            fit_cfg.seed = g.seed;
            fit_cfg.threads = g.threads;
            echo_config("train", {{"corpus", train_corpus}, {"output", train_out}, {"model", train_model},
                                  {"k", fit_cfg.num_topics}, {"tol", fit_cfg.em_rel_tol},
                                  {"inference_tol", fit_cfg.inference.rel_tol}, {"max_iters", fit_cfg.max_em_iters},
                                  {"restarts", fit_cfg.restarts}, {"alpha", fit_cfg.lda_alpha}}, g);
            const auto corpus = load_corpus_dir(train_corpus);
            auto on_iter = [](const ctm::IterationRecord& r) {
                std::ostringstream ss;
                ss.precision(10);
                ss << "iteration " << r.iteration << " elbo " << r.elbo << " unconverged " << r.unconverged_docs;
                progress(ss.str());
            };
            ctm::ModelMetadata meta;
            meta.vocabulary = (fs::path(train_corpus) / "vocab.txt").string();
            meta.config = fit_cfg;
            if (train_model == "ctm") {
                const auto f = ctm::fit(corpus, fit_cfg, on_iter);
                meta.em_iterations = static_cast<int>(f.trace.iterations.size());
                meta.converged = f.trace.converged;
                meta.elbo = f.trace.iterations.back().elbo;
                for (const auto& w : f.trace.warnings) progress("warning: " + w);
                ctm::save_model(train_out, f.model, meta);
                if (!train_states.empty()) ctm::save_states(train_states, f.states, doc_ids(corpus));
            } else {
                if (!train_states.empty()) throw CliError("usage", "--states is only available for ctm models");
                const auto f = ctm::lda_fit(corpus, fit_cfg, on_iter);
                meta.em_iterations = static_cast<int>(f.trace.iterations.size());
                meta.converged = f.trace.converged;
                meta.elbo = f.trace.iterations.back().elbo;
                for (const auto& w : f.trace.warnings) progress("warning: " + w);
                ctm::save_model(train_out, f.model, meta);
            }
        } else if (*infer) {
            echo_config("infer", {{"model", infer_model}, {"corpus", infer_corpus}, {"output", infer_out}}, g);
            require_file(infer_model);
            const auto model = ctm::load_ctm_model(infer_model);
            const auto corpus = load_corpus_dir(infer_corpus);
            if (static_cast<Eigen::Index>(corpus.vocab_size()) != model.vocab_size())
                throw CliError("mismatch", "corpus vocabulary size differs from the model's");
            const auto states = ctm::e_step(corpus, model, {}, g.threads);
            const auto unconverged = std::count_if(states.begin(), states.end(), [](const auto& s) { return !s.converged; });
            if (unconverged) progress("warning: " + std::to_string(unconverged) + " documents did not converge");
            ctm::save_states(infer_out, states, doc_ids(corpus));
        } else if (*graph) {
            echo_config("graph", {{"states", graph_states}, {"model", graph_model}, {"corpus", graph_corpus},
                                  {"output", graph_out}, {"dot", graph_dot}, {"rho", graph_rho},
                                  {"rho_scale", graph_scale}, {"rule", graph_rule}, {"rho_grid", graph_grid}}, g);
            require_file(graph_states);
            require_file(graph_model);
            std::vector<std::string> ids;
            const auto states = ctm::load_states(graph_states, &ids);
            const auto model = ctm::load_ctm_model(graph_model);
            const auto vocab = ctm::read_vocabulary(fs::path(graph_corpus) / "vocab.txt");
            const ctm::Matrix x = ctm::standardize(ctm::lambda_matrix(states));
            if (!graph_grid.empty()) {
                std::ofstream csv(graph_out);
                if (!csv) throw CliError("io", "cannot write " + graph_out);
                csv << "rho,rho_total,and_edges,or_edges\n";
                csv.precision(17);
                for (double r : graph_grid) {
                    const double rt = total_rho(r, graph_scale, states.size());
                    const auto hoods = ctm::neighborhoods(x, rt, g.threads);
                    const auto a = ctm::build_graph(hoods, ctm::EdgeRule::And);
                    const auto o = ctm::build_graph(hoods, ctm::EdgeRule::Or);
                    csv << r << "," << rt << "," << a.edges.size() << "," << o.edges.size() << "\n";
                    progress("rho " + std::to_string(r) + ": " + std::to_string(a.edges.size()) + " and-edges, " +
                             std::to_string(o.edges.size()) + " or-edges");
                }
            } else {
                const double rt = total_rho(graph_rho, graph_scale, states.size());
                const auto hoods = ctm::neighborhoods(x, rt, g.threads);
                for (const auto& f : hoods.fits)
                    if (!f.converged) progress("warning: lasso for topic " + std::to_string(f.target) + " did not converge");
                const auto tg = ctm::build_graph(hoods, ctm::parse_edge_rule(graph_rule));
                ctm::save_graph_json(graph_out, tg, hoods, model.log_beta, vocab);
                if (!graph_dot.empty()) ctm::save_graph_dot(graph_dot, tg, model.log_beta, vocab);
                progress(std::to_string(tg.edges.size()) + " edges at rho " + std::to_string(rt));
            }
        } else if (*similar) {
            echo_config("similar", {{"states", sim_states}, {"query", sim_query}, {"top", sim_top},
                                    {"samples", sim_samples}, {"output", sim_out}}, g);
            require_file(sim_states);
            std::vector<std::string> ids;
            const auto states = ctm::load_states(sim_states, &ids);
            const auto it = std::find(ids.begin(), ids.end(), sim_query);
            if (it == ids.end()) throw CliError("unknown_document", "no document with id '" + sim_query + "'");
            const auto q = static_cast<std::size_t>(it - ids.begin());
            const auto ranked = ctm::rank_similar(q, states, sim_top, sim_samples, g.seed, g.threads);
            std::ostringstream out;
            out.precision(17);
            out << "rank\tdoc_id\tdistance\n";
            for (std::size_t r = 0; r < ranked.size(); ++r)
                out << r + 1 << '\t' << ids[ranked[r].index] << '\t' << ranked[r].distance << '\n';
            if (sim_out.empty()) std::cout << out.str();
            else std::ofstream(sim_out) << out.str();
        } else if (*eval) {
            cv.seed = g.seed;
            cv.fit.threads = g.threads;
            cv.fit.seed = g.seed;
            echo_config("eval", {{"corpus", eval_corpus}, {"output", eval_out}, {"folds", cv.folds},
                                 {"k_grid", cv.k_grid}, {"p_grid", cv.p_grid}, {"samples", cv.n_samples},
                                 {"theta_samples", cv.theta_samples}, {"tol", cv.fit.em_rel_tol},
                                 {"restarts", cv.fit.restarts}}, g);
            const auto corpus = load_corpus_dir(eval_corpus);
            const auto report = ctm::cross_validate(corpus, cv);
            for (const auto& r : report.results)
                if (r.partial) progress("warning: K=" + std::to_string(r.num_topics) + " has failed folds");
            ctm::save_eval_report(eval_out, report);
            if (!eval_csv.empty()) ctm::save_eval_csv(eval_csv, report);
            const auto table = ctm::format_eval_table(report);
            if (!eval_table.empty()) std::ofstream(eval_table) << table;
            std::cout << table;
        } else if (*exporter) {
            ex_opt.seed = g.seed;
            ex_opt.threads = g.threads;
            echo_config("export-browser", {{"model", ex_model}, {"corpus", ex_corpus}, {"states", ex_states},
                                           {"graph", ex_graph}, {"output", ex_out}, {"words", ex_opt.words_per_topic},
                                           {"samples", ex_opt.moment_samples}}, g);
            for (const auto& p : {ex_model, ex_states, ex_graph}) require_file(p);
            const auto model = ctm::load_ctm_model(ex_model);
            const auto corpus = load_corpus_dir(ex_corpus);
            std::vector<std::string> ids;
            const auto states = ctm::load_states(ex_states, &ids);
            check_states_match(states, ids, corpus);
            const auto hoods = ctm::load_graph_neighborhoods(ex_graph);
            ctm::export_browser(ex_out, model, corpus, states, hoods, ex_opt);
            const auto problems = ctm::validate_export(ex_out);
            if (!problems.empty()) throw CliError("invalid_export", problems.front());
        } else if (*validate) {
            echo_config("validate-export", {{"dir", val_dir}}, g);
            const auto problems = ctm::validate_export(val_dir);
            for (const auto& p : problems) std::cout << p << "\n";
            if (!problems.empty())
                throw CliError("invalid_export", std::to_string(problems.size()) + " violation(s) in " + val_dir);
            progress("export is valid");
        }
    } catch (const CliError& e) {
        std::cerr << json{{"error", e.kind}, {"message", one_line(e.what())}}.dump() << "\n";
        return 1;
    } catch (const ctm::SchemaError& e) {
        std::cerr << json{{"error", "schema"}, {"message", one_line(e.what())}}.dump() << "\n";
        return 1;
    } catch (const ctm::ParseError& e) {
        std::cerr << json{{"error", "parse"}, {"message", one_line(e.what())}}.dump() << "\n";
        return 1;
    } catch (const ctm::EmptyCorpusError& e) {
        std::cerr << json{{"error", "empty_corpus"}, {"message", one_line(e.what())}}.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "runtime"}, {"message", one_line(e.what())}}.dump() << "\n";
        return 1;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream ss;
    ss.precision(3);
    ss << "done in " << secs << " s";
    progress(ss.str());
    return 0;
}
