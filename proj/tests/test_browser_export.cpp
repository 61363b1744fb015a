#include <fstream>

#include "doctest.h"
#include "json.hpp"

#include "ctm/browser_export.hpp"
#include "ctm/estimation.hpp"
#include "ctm/evaluation.hpp"
#include "ctm/synthetic.hpp"
#include "ctm/topic_graph.hpp"
#include "support.hpp"

using namespace ctm;
using nlohmann::json;

namespace {

struct Fixture {
    Corpus corpus;
    CtmFit fitted;
    Neighborhoods hoods;
};

const Fixture& fixture() {
    static const Fixture f = [] {
        Fixture out;
        CtmModel truth;
        truth.log_beta = random_log_topics(4, 30, 0.2, 5);
        truth.mu = Vector::Zero(4);
        truth.sigma = SpdMatrix(correlated_covariance(4, 2.0, {{0, 1}}, 0.7));
        out.corpus = sample_ctm_corpus(truth, 40, 40, 6);
        FitConfig cfg;
        cfg.num_topics = 4;
        cfg.em_rel_tol = 1e-4;
        out.fitted = fit(out.corpus, cfg);
        out.hoods = neighborhoods(standardize(lambda_matrix(out.fitted.states)), 0.1 * 40.0);
        return out;
    }();
    return f;
}

json read_json(const std::filesystem::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

void write_json(const std::filesystem::path& p, const json& j) { std::ofstream(p) << j.dump(2); }

void export_to(const std::filesystem::path& dir, unsigned threads = 1) {
    const auto& f = fixture();
    ExportOptions opt;
    opt.threads = threads;
    export_browser(dir, f.fitted.model, f.corpus, f.fitted.states, f.hoods, opt);
}

} // namespace

TEST_CASE("fresh export validates") {
    testing::TempDir dir("export");
    export_to(dir.path());
    CHECK(validate_export(dir.path()).empty());
    const json topics = read_json(dir / "topics.json");
    REQUIRE(topics.at("topics").size() == 4);
    CHECK(topics.at("topics")[0].at("words").size() == 20);
    const json docs = read_json(dir / "documents.json");
    REQUIRE(docs.at("documents").size() == 40);
    CHECK(docs.at("documents")[0].at("top_topics").size() == 3);
}

TEST_CASE("exported moments reproduce engine similarity") {
    testing::TempDir dir("moments");
    export_to(dir.path());
    const json docs = read_json(dir / "documents.json");
    std::vector<Vector> moments;
    for (const auto& d : docs.at("documents")) {
        const auto m = d.at("moments").get<std::vector<double>>();
        moments.push_back(Eigen::Map<const Vector>(m.data(), static_cast<Eigen::Index>(m.size())));
    }
    const auto from_export = rank_similar_moments(3, moments, 10);
    const auto from_engine = rank_similar(3, fixture().fitted.states, 10, 512, 1);
    REQUIRE(from_export.size() == from_engine.size());
    for (std::size_t i = 0; i < from_export.size(); ++i) {
        CHECK(from_export[i].index == from_engine[i].index);
        CHECK(std::abs(from_export[i].distance - from_engine[i].distance) < 1e-9);
    }
}

TEST_CASE("an edge to a missing topic is the only violation") {
    testing::TempDir dir("badedge");
    export_to(dir.path());
    json g = read_json(dir / "graph.json");
    g["or_edges"].push_back({{"source", 0}, {"target", 5}, {"weight", 0.3}});
    write_json(dir / "graph.json", g);
    const auto problems = validate_export(dir.path());
    REQUIRE(problems.size() == 1);
    CHECK(problems[0].find("topic 5") != std::string::npos);
}

TEST_CASE("a theta summary off the simplex is reported") {
    testing::TempDir dir("badtheta");
    export_to(dir.path());
    json d = read_json(dir / "documents.json");
    auto theta = d["documents"][2]["theta"].get<std::vector<double>>();
    const double scale = 1.5 / std::accumulate(theta.begin(), theta.end(), 0.0);
    for (auto& v : theta) v *= scale;
    d["documents"][2]["theta"] = theta;
    write_json(dir / "documents.json", d);
    const auto problems = validate_export(dir.path());
    REQUIRE(problems.size() == 1);
    CHECK(problems[0].find("document 2") != std::string::npos);
    CHECK(problems[0].find("simplex") != std::string::npos);
}

TEST_CASE("other corruptions are caught") {
    testing::TempDir dir("corrupt");
    export_to(dir.path());
    json g = read_json(dir / "graph.json");
    g["and_edges"].push_back({{"source", 1}, {"target", 1}, {"weight", 0.3}});
    write_json(dir / "graph.json", g);
    json d = read_json(dir / "documents.json");
    d["documents"][1]["id"] = d["documents"][0]["id"];
    d["documents"][4]["moments"][0] = -0.1;
    write_json(dir / "documents.json", d);
    CHECK(validate_export(dir.path()).size() == 3);

    json m = read_json(dir / "manifest.json");
    m["schema_version"] = 99;
    write_json(dir / "manifest.json", m);
    const auto problems = validate_export(dir.path());
    REQUIRE(problems.size() == 1);
    CHECK(problems[0].find("schema_version") != std::string::npos);
    std::filesystem::remove(dir / "manifest.json");
    CHECK(validate_export(dir.path()).size() == 1);
}

TEST_CASE("an AND edge missing from the OR list is reported") {
    testing::TempDir dir("subset");
    export_to(dir.path());
    json g = read_json(dir / "graph.json");
    g["or_edges"] = json::array();
    g["and_edges"] = json::array({{{"source", 0}, {"target", 2}, {"weight", 0.5}}});
    write_json(dir / "graph.json", g);
    const auto problems = validate_export(dir.path());
    REQUIRE(problems.size() == 1);
    CHECK(problems[0].find("AND edge (0, 2)") != std::string::npos);
}

TEST_CASE("export is byte-identical across thread counts") {
    testing::TempDir a("export_a"), b("export_b");
    export_to(a.path(), 1);
    export_to(b.path(), 4);
    for (const char* name : {"manifest.json", "topics.json", "graph.json", "documents.json"}) {
        std::ifstream fa(a / name), fb(b / name);
        const std::string sa{std::istreambuf_iterator<char>(fa), {}}, sb{std::istreambuf_iterator<char>(fb), {}};
        CHECK_MESSAGE(sa == sb, name);
    }
}
