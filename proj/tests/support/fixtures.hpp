#pragma once

#include <string>
#include <utility>
#include <vector>

#include "editgauge/corpus.hpp"
#include "editgauge/revision.hpp"
#include "editgauge/rng.hpp"

namespace editgauge::testing {

// 32-record corpus whose class is fully determined by a marker token in the
// edit and whose message is a fixed per-class phrase; split-assigned so that
// every class appears in the train split.
std::vector<CorpusRecord> separable_fixture_corpus();

// A (before, after) wikitext pair produced by a scripted mutation: sentence
// insert / delete / replace, or markup churn.
std::pair<std::string, std::string> random_mutation_pair(Rng& rng);

// Deterministic 200-revision single-page dump for the end-to-end pipeline.
std::vector<Revision> mini_dump_revisions(std::size_t n = 200);
void write_mini_dump(const std::string& path, std::size_t n = 200);

// Flat {"class": prob} ORES cache bodies for every revision of the mini
// dump, keyed the way OresClient expects.
void write_ores_cache(const std::string& dir, const std::string& wiki,
                      const std::vector<Revision>& revisions);

// Monthly revisions with linearly growing articles and constant-size edits
// (the Fig.-1 shape).
std::vector<Revision> growth_revisions(std::size_t months = 24);

}  // namespace editgauge::testing
