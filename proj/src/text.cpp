#include "editgauge/text.hpp"

#include <algorithm>
#include <cctype>

namespace editgauge {

std::vector<char32_t> utf8_decode(const std::string& s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  const std::size_t n = s.size();
  while (i < n) {
    const unsigned char b0 = static_cast<unsigned char>(s[i]);
    char32_t cp = b0;
    std::size_t len = 1;
    if (b0 >= 0xF0 && b0 <= 0xF4)
      len = 4, cp = b0 & 0x07u;
    else if (b0 >= 0xE0)
      len = 3, cp = b0 & 0x0Fu;
    else if (b0 >= 0xC2)
      len = 2, cp = b0 & 0x1Fu;
    else if (b0 >= 0x80)
      len = 1;  // stray continuation byte, keep as-is
    if (len > 1) {
      if (i + len > n) {
        out.push_back(b0);
        ++i;
        continue;
      }
      bool ok = true;
      char32_t acc = cp;
      for (std::size_t k = 1; k < len; ++k) {
        const unsigned char bk = static_cast<unsigned char>(s[i + k]);
        if ((bk & 0xC0u) != 0x80u) {
          ok = false;
          break;
        }
        acc = (acc << 6) | (bk & 0x3Fu);
      }
      if (!ok) {
        out.push_back(b0);
        ++i;
        continue;
      }
      out.push_back(acc);
      i += len;
    } else {
      out.push_back(cp);
      ++i;
    }
  }
  return out;
}

std::string utf8_encode(const std::vector<char32_t>& cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t c : cps) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

bool is_space_cp(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' ||
         c == U'\v' || c == 0x00A0 || c == 0x2028 || c == 0x2029;
}

bool is_upper_cp(char32_t c) {
  if (c < 0x80) return c >= U'A' && c <= U'Z';
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return true;  // Latin-1 capitals
  if (c >= 0x100 && c <= 0x17F) return (c % 2) == 0;     // Latin Extended-A pairs
  if (c >= 0x391 && c <= 0x3A9) return true;             // Greek capitals
  if (c >= 0x410 && c <= 0x42F) return true;             // Cyrillic capitals
  return false;
}

std::string normalize_whitespace(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  bool in_space = false;
  bool started = false;
  for (char32_t c : utf8_decode(s)) {
    if (is_space_cp(c)) {
      in_space = true;
      continue;
    }
    if (in_space && started) out.push_back(' ');
    in_space = false;
    started = true;
    out += utf8_encode({c});
  }
  return out;
}

std::string strip_whitespace(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t c : utf8_decode(s))
    if (!is_space_cp(c)) out += utf8_encode({c});
  return out;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    std::string line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = nl + 1;
  }
  return lines;
}

std::size_t count_codepoints(const std::string& s) {
  return utf8_decode(s).size();
}

namespace {

bool is_word_cp(char32_t c) {
  if (c < 0x80)
    return (c >= U'0' && c <= U'9') || (c >= U'A' && c <= U'Z') ||
           (c >= U'a' && c <= U'z') || c == U'_';
  // Non-ASCII, non-space code points count as word characters; detaching
  // only ASCII punctuation keeps multilingual text intact.
  return !is_space_cp(c);
}

// Wikitext atoms recognized at any position.
bool match_markup_atom(const std::vector<char32_t>& cps, std::size_t i,
                       std::size_t* len) {
  const char32_t c = cps[i];
  const auto left = cps.size() - i;
  auto pair = [&](char32_t a) { return left >= 2 && cps[i + 1] == a; };
  if (c == U'[' && pair(U'[')) return *len = 2, true;
  if (c == U']' && pair(U']')) return *len = 2, true;
  if (c == U'{' && pair(U'{')) return *len = 2, true;
  if (c == U'}' && pair(U'}')) return *len = 2, true;
  if ((c == U'\'' || c == U'=') && pair(c)) {
    std::size_t k = i;
    while (k < cps.size() && cps[k] == c) ++k;
    *len = k - i;
    return true;
  }
  return false;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& s) {
  const std::vector<char32_t> cps = utf8_decode(s);
  std::vector<std::string> tokens;
  std::vector<char32_t> cur;
  auto flush = [&]() {
    if (!cur.empty()) {
      tokens.push_back(utf8_encode(cur));
      cur.clear();
    }
  };
  std::size_t i = 0;
  while (i < cps.size()) {
    const char32_t c = cps[i];
    if (is_space_cp(c)) {
      flush();
      ++i;
      continue;
    }
    std::size_t atom_len = 0;
    if (match_markup_atom(cps, i, &atom_len)) {
      flush();
      tokens.push_back(utf8_encode({cps.begin() + static_cast<long>(i),
                                    cps.begin() + static_cast<long>(i + atom_len)}));
      i += atom_len;
      continue;
    }
    if (is_word_cp(c)) {
      cur.push_back(c);
      ++i;
      continue;
    }
    // ASCII punctuation: one token per character.
    flush();
    tokens.push_back(utf8_encode({c}));
    ++i;
  }
  flush();
  return tokens;
}

Lang lang_from_string(const std::string& name) {
  if (name == "en") return Lang::en;
  if (name == "de") return Lang::de;
  return Lang::other;
}

namespace {

const char* kAbbrevEn[] = {"Dr.",  "Mr.",   "Mrs.", "Ms.",  "Prof.", "St.",
                           "Jr.",  "Sr.",   "vs.",  "etc.", "e.g.",  "i.e.",
                           "No.",  "Vol.",  "Fig.", "al.",  "Inc.",  "Ltd.",
                           "Co.",  "Gen.",  "Col.", "Capt.", "approx.", "Mt."};
const char* kAbbrevDe[] = {"Dr.",  "Prof.", "Nr.",  "z.B.", "bzw.", "ca.",
                           "usw.", "vgl.",  "u.a.", "d.h.", "bzgl.", "St.",
                           "Abb.", "Jh.",   "geb.", "gest."};

}  // namespace

RuleSegmenter::RuleSegmenter(Lang lang) {
  switch (lang) {
    case Lang::en:
      abbreviations_.assign(std::begin(kAbbrevEn), std::end(kAbbrevEn));
      break;
    case Lang::de:
      abbreviations_.assign(std::begin(kAbbrevDe), std::end(kAbbrevDe));
      break;
    case Lang::other:
      break;
  }
}

std::vector<std::string> RuleSegmenter::segment(const std::string& text) const {
  const std::vector<char32_t> cps = utf8_decode(text);
  std::vector<std::string> sentences;
  std::size_t start = 0;

  auto trailing_word = [&](std::size_t end) {
    // The whitespace-delimited chunk ending at end (inclusive).
    std::size_t b = end + 1;
    while (b > start && !is_space_cp(cps[b - 1])) --b;
    return utf8_encode({cps.begin() + static_cast<long>(b),
                        cps.begin() + static_cast<long>(end + 1)});
  };

  std::size_t i = 0;
  while (i < cps.size()) {
    const char32_t c = cps[i];
    if (c == U'.' || c == U'!' || c == U'?') {
      std::size_t term_end = i;
      while (term_end + 1 < cps.size() &&
             (cps[term_end + 1] == U'.' || cps[term_end + 1] == U'!' ||
              cps[term_end + 1] == U'?'))
        ++term_end;
      std::size_t j = term_end + 1;
      std::size_t ws = 0;
      while (j < cps.size() && is_space_cp(cps[j])) ++j, ++ws;
      const bool boundary = ws > 0 && j < cps.size() && is_upper_cp(cps[j]);
      if (boundary) {
        const std::string word = trailing_word(term_end);
        const bool abbrev =
            std::find(abbreviations_.begin(), abbreviations_.end(), word) !=
            abbreviations_.end();
        if (!abbrev) {
          sentences.push_back(
              utf8_encode({cps.begin() + static_cast<long>(start),
                           cps.begin() + static_cast<long>(term_end + 1)}));
          start = j;
          i = j;
          continue;
        }
      }
      i = term_end + 1;
      continue;
    }
    ++i;
  }
  if (start < cps.size()) {
    std::string rest = utf8_encode(
        {cps.begin() + static_cast<long>(start), cps.end()});
    if (!strip_whitespace(rest).empty()) sentences.push_back(std::move(rest));
  }
  return sentences;
}

std::vector<std::string> LineSegmenter::segment(const std::string& text) const {
  std::vector<std::string> out;
  for (auto& line : split_lines(text))
    if (!strip_whitespace(line).empty()) out.push_back(line);
  return out;
}

std::vector<std::string> segment_sentences(const std::string& text, Lang lang) {
  return RuleSegmenter(lang).segment(text);
}

}  // namespace editgauge
