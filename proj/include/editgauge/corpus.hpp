#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "editgauge/edit.hpp"
#include "editgauge/ores.hpp"
#include "editgauge/revision.hpp"

namespace editgauge {

// Stable sort by (timestamp, rev_id), then consecutive pairs (v_{t-1}, v_t).
// Fewer than two revisions give an empty sequence.
std::vector<std::pair<Revision, Revision>> sort_and_pair(
    std::vector<Revision> revs);

struct BuildStats {
  std::size_t kept = 0;
  std::size_t dropped_no_message = 0;
  std::size_t dropped_too_small = 0;  // fewer than min_sentences edit-sentences
  std::size_t dropped_ws_pairs = 0;   // whitespace-only sentence pairs
};

// One record per revision pair whose edit has >= min_sentences edit-sentences
// and whose accompanying message is non-empty. The quality field stays empty
// until labeling. Pairs are extracted with up to `jobs` threads; output order
// stays the input (chronological) order.
std::vector<CorpusRecord> build_corpus(
    const std::vector<std::pair<Revision, Revision>>& pairs,
    const ExtractConfig& cfg, std::size_t min_sentences = 1,
    BuildStats* stats = nullptr, std::size_t jobs = 1);

// Deterministic shuffle under seed, then floor(0.7n) train / floor(0.1n)
// valid / remainder test. Throws DataError when n < 10.
void split_corpus(std::vector<CorpusRecord>& records, std::uint64_t seed);

struct SplitSizes {
  std::size_t train = 0, valid = 0, test = 0;
};
SplitSizes split_sizes(std::size_t n);

// Fills record.quality from the ORES client; failures propagate. Runs up to
// `parallelism` concurrent fetches, output order unchanged.
void label_corpus(std::vector<CorpusRecord>& records, OresClient& client,
                  std::size_t parallelism = 4);

// JSONL serialization: one object per line with fields rev_id, edit
// {sentences: [{tokens, labels}], n_hunks}, message, quality, gold, split.
std::string record_to_json(const CorpusRecord& rec);
CorpusRecord record_from_json(const std::string& line);

void write_corpus(std::ostream& out, const std::vector<CorpusRecord>& records);
void write_corpus_file(const std::string& path,
                       const std::vector<CorpusRecord>& records);
std::vector<CorpusRecord> read_corpus(std::istream& in);
std::vector<CorpusRecord> read_corpus_file(const std::string& path);

}  // namespace editgauge
