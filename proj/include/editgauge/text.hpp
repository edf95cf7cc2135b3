#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace editgauge {

// UTF-8 code point helpers. Invalid bytes decode as single-byte code points
// so that no input can make tokenization throw.
std::vector<char32_t> utf8_decode(const std::string& s);
std::string utf8_encode(const std::vector<char32_t>& cps);

bool is_space_cp(char32_t c);
bool is_upper_cp(char32_t c);

// Collapse whitespace runs to one space and trim the ends.
std::string normalize_whitespace(const std::string& s);

// Remove all whitespace; used by content-preservation checks.
std::string strip_whitespace(const std::string& s);

// Split on LF, stripping a trailing CR from each line (diff operates on
// exact byte equality after this).
std::vector<std::string> split_lines(const std::string& text);

std::size_t count_codepoints(const std::string& s);

// Whitespace split with punctuation detached as separate tokens; the wikitext
// atoms [[ ]] {{ }} and runs of ' or = (length >= 2) stay single tokens.
std::vector<std::string> tokenize(const std::string& s);

enum class Lang { en, de, other };

Lang lang_from_string(const std::string& name);

// Sentence segmentation backend. The default splits on .!? followed by
// whitespace and an uppercase letter, guarded by a per-language abbreviation
// list. A line that never matches comes back as a single sentence.
class SentenceSegmenter {
 public:
  virtual ~SentenceSegmenter() = default;
  virtual std::vector<std::string> segment(const std::string& text) const = 0;
};

class RuleSegmenter : public SentenceSegmenter {
 public:
  explicit RuleSegmenter(Lang lang);
  std::vector<std::string> segment(const std::string& text) const override;

 private:
  std::vector<std::string> abbreviations_;
};

// Pre-segmented input mode: every line is one sentence.
class LineSegmenter : public SentenceSegmenter {
 public:
  std::vector<std::string> segment(const std::string& text) const override;
};

std::vector<std::string> segment_sentences(const std::string& text, Lang lang);

}  // namespace editgauge
