#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ctm/corpus.hpp"
#include "ctm/inference.hpp"
#include "ctm/topic_graph.hpp"

namespace ctm {

struct ExportOptions {
    std::size_t words_per_topic = 20;
    int moment_samples = 512;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

/// Writes a static export directory for the corpus browser:
///   manifest.json   counts, file names, sampling settings
///   topics.json     top words with probabilities and prevalence per topic
///   graph.json      AND and OR edge lists with weights
///   documents.json  metadata, theta = softmax(lambda), top-3 topics, and
///                   E_q[sqrt(theta)] so clients can compute Hellinger distances
void export_browser(const std::filesystem::path& dir, const CtmModel& model, const Corpus& corpus,
                    const std::vector<VariationalState>& states, const Neighborhoods& hoods,
                    const ExportOptions& options = {});

/// Schema and invariant checks over an export directory. Returns one message
/// per violation; empty when the export is valid.
std::vector<std::string> validate_export(const std::filesystem::path& dir);

} // namespace ctm
