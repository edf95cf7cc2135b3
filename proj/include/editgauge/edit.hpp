#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "editgauge/diff.hpp"
#include "editgauge/text.hpp"

namespace editgauge {

struct SentencePair {
  std::string before;  // s-, empty for a full addition
  std::string after;   // s+, empty for a full deletion
  double similarity = 0.0;
};

// Interleaved token sequence with one {+,-,=} label per token.
struct EditSentence {
  std::vector<std::string> tokens;
  std::vector<DiffLabel> labels;

  std::vector<std::string> before_tokens() const;  // labels in {-, =}
  std::vector<std::string> after_tokens() const;   // labels in {+, =}
  std::string label_string() const;
};

struct Edit {
  std::vector<EditSentence> sentences;  // ordered by (hunk, position)
  std::size_t n_hunks = 0;
  std::size_t chars_added = 0;
  std::size_t chars_removed = 0;
  std::size_t dropped_pairs = 0;  // pairs whose both sides tokenized empty
};

struct ExtractConfig {
  Lang lang = Lang::en;
  double match_threshold = 0.5;
  bool pre_segmented = false;  // every line is one sentence
};

// Multiset cancellation of sentences present on both sides, compared after
// whitespace normalization.
std::pair<std::vector<std::string>, std::vector<std::string>> dedup_common(
    const std::vector<std::string>& removed_sents,
    const std::vector<std::string>& added_sents);

// Greedy best-first pairing on similarity_ratio; leftovers become one-sided
// pairs. Output order: removed sentences in order, then unmatched added.
std::vector<SentencePair> match_pairs(
    const std::vector<std::string>& removed_sents,
    const std::vector<std::string>& added_sents, double threshold);

// Token alignment of a sentence pair. Throws DataError when both sides
// tokenize to nothing.
EditSentence build_edit_sentence(const SentencePair& pair);

// line_diff -> per-hunk segmentation -> dedup -> match -> edit sentences.
Edit extract_edit(const std::string& prev_text, const std::string& curr_text,
                  const ExtractConfig& cfg = {});

}  // namespace editgauge
