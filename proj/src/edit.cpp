#include "editgauge/edit.hpp"

#include <algorithm>
#include <map>

#include "editgauge/errors.hpp"

namespace editgauge {

std::vector<std::string> EditSentence::before_tokens() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (labels[i] != DiffLabel::Add) out.push_back(tokens[i]);
  return out;
}

std::vector<std::string> EditSentence::after_tokens() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (labels[i] != DiffLabel::Del) out.push_back(tokens[i]);
  return out;
}

std::string EditSentence::label_string() const {
  std::string s;
  s.reserve(labels.size());
  for (DiffLabel l : labels) s.push_back(diff_label_char(l));
  return s;
}

std::pair<std::vector<std::string>, std::vector<std::string>> dedup_common(
    const std::vector<std::string>& removed_sents,
    const std::vector<std::string>& added_sents) {
  std::map<std::string, int> added_count;
  for (const auto& s : added_sents) ++added_count[normalize_whitespace(s)];

  std::vector<std::string> removed_out;
  std::map<std::string, int> cancelled;
  for (const auto& s : removed_sents) {
    const std::string key = normalize_whitespace(s);
    auto it = added_count.find(key);
    if (it != added_count.end() && it->second > 0) {
      --it->second;
      ++cancelled[key];
    } else {
      removed_out.push_back(s);
    }
  }
  std::vector<std::string> added_out;
  for (const auto& s : added_sents) {
    const std::string key = normalize_whitespace(s);
    auto it = cancelled.find(key);
    if (it != cancelled.end() && it->second > 0)
      --it->second;
    else
      added_out.push_back(s);
  }
  return {std::move(removed_out), std::move(added_out)};
}

std::vector<SentencePair> match_pairs(
    const std::vector<std::string>& removed_sents,
    const std::vector<std::string>& added_sents, double threshold) {
  struct Cand {
    double ratio;
    std::size_t ri, ai;
  };
  std::vector<Cand> cands;
  cands.reserve(removed_sents.size() * added_sents.size());
  for (std::size_t ri = 0; ri < removed_sents.size(); ++ri)
    for (std::size_t ai = 0; ai < added_sents.size(); ++ai) {
      const double r = similarity_ratio(normalize_whitespace(removed_sents[ri]),
                                        normalize_whitespace(added_sents[ai]));
      if (r >= threshold) cands.push_back({r, ri, ai});
    }
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.ratio != b.ratio) return a.ratio > b.ratio;
    if (a.ri != b.ri) return a.ri < b.ri;
    return a.ai < b.ai;
  });

  std::vector<int> match_of_removed(removed_sents.size(), -1);
  std::vector<bool> added_used(added_sents.size(), false);
  std::vector<double> match_ratio(removed_sents.size(), 0.0);
  for (const auto& c : cands) {
    if (match_of_removed[c.ri] >= 0 || added_used[c.ai]) continue;
    match_of_removed[c.ri] = static_cast<int>(c.ai);
    match_ratio[c.ri] = c.ratio;
    added_used[c.ai] = true;
  }

  std::vector<SentencePair> pairs;
  for (std::size_t ri = 0; ri < removed_sents.size(); ++ri) {
    if (match_of_removed[ri] >= 0)
      pairs.push_back({removed_sents[ri],
                       added_sents[static_cast<std::size_t>(match_of_removed[ri])],
                       match_ratio[ri]});
    else
      pairs.push_back({removed_sents[ri], "", 0.0});
  }
  for (std::size_t ai = 0; ai < added_sents.size(); ++ai)
    if (!added_used[ai]) pairs.push_back({"", added_sents[ai], 0.0});
  return pairs;
}

EditSentence build_edit_sentence(const SentencePair& pair) {
  const auto before = tokenize(pair.before);
  const auto after = tokenize(pair.after);
  if (before.empty() && after.empty())
    throw DataError("edit sentence with no tokens on either side");
  const Alignment a = token_diff(before, after);
  EditSentence es;
  es.tokens.reserve(a.ops.size());
  es.labels.reserve(a.ops.size());
  for (const auto& op : a.ops) {
    es.tokens.push_back(op.token);
    es.labels.push_back(op.label);
  }
  return es;
}

Edit extract_edit(const std::string& prev_text, const std::string& curr_text,
                  const ExtractConfig& cfg) {
  Edit edit;
  const auto old_lines = split_lines(prev_text);
  const auto new_lines = split_lines(curr_text);
  const auto hunks = line_diff(old_lines, new_lines);
  edit.n_hunks = hunks.size();

  const RuleSegmenter rule(cfg.lang);
  const LineSegmenter pre;
  const SentenceSegmenter& seg =
      cfg.pre_segmented ? static_cast<const SentenceSegmenter&>(pre)
                        : static_cast<const SentenceSegmenter&>(rule);

  auto segment_side = [&](const std::vector<std::string>& lines) {
    // Sentences never span lines in wikitext; segment line by line so a
    // markup-only line stays one sentence.
    std::vector<std::string> sents;
    for (const auto& line : lines) {
      auto part = seg.segment(line);
      sents.insert(sents.end(), part.begin(), part.end());
    }
    return sents;
  };

  for (const auto& h : hunks) {
    for (const auto& l : h.removed_lines) edit.chars_removed += count_codepoints(l);
    for (const auto& l : h.added_lines) edit.chars_added += count_codepoints(l);

    auto [removed, added] =
        dedup_common(segment_side(h.removed_lines), segment_side(h.added_lines));
    for (const auto& pair : match_pairs(removed, added, cfg.match_threshold)) {
      if (strip_whitespace(pair.before).empty() &&
          strip_whitespace(pair.after).empty()) {
        ++edit.dropped_pairs;
        continue;
      }
      edit.sentences.push_back(build_edit_sentence(pair));
    }
  }
  return edit;
}

}  // namespace editgauge
