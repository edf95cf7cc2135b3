#include "doctest.h"
#include "editgauge/rng.hpp"
#include "editgauge/text.hpp"

using namespace editgauge;

TEST_CASE("tokenize detaches punctuation and keeps markup atoms") {
  CHECK(tokenize("A cat.") == std::vector<std::string>{"A", "cat", "."});
  CHECK(tokenize("the cat sat") ==
        std::vector<std::string>{"the", "cat", "sat"});
  CHECK(tokenize("[[Category:Foo]]") ==
        std::vector<std::string>{"[[", "Category", ":", "Foo", "]]"});
  CHECK(tokenize("{{cite web}}") ==
        std::vector<std::string>{"{{", "cite", "web", "}}"});
  CHECK(tokenize("''italic'' and ==Heading==") ==
        std::vector<std::string>{"''", "italic", "''", "and", "==", "Heading",
                                 "=="});
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("   \t\n ") == std::vector<std::string>{});
  CHECK(tokenize("don't stop") ==
        std::vector<std::string>{"don", "'", "t", "stop"});
}

TEST_CASE("tokenize handles UTF-8 text") {
  CHECK(tokenize("Köln ist schön.") ==
        std::vector<std::string>{"Köln", "ist", "schön", "."});
  const auto toks = tokenize("日本語 text");
  CHECK(toks.size() == 2);
  CHECK(toks[0] == "日本語");
}

TEST_CASE("tokenize content preservation (whitespace-insensitive)") {
  Rng rng(99);
  const std::string alphabet = "ab []{}'=.,!? XZ\t";
  for (int it = 0; it < 300; ++it) {
    std::string s;
    const std::size_t len = rng.below(40);
    for (std::size_t i = 0; i < len; ++i)
      s.push_back(alphabet[rng.below(alphabet.size())]);
    std::string joined;
    for (const auto& t : tokenize(s)) joined += t;
    CHECK(joined == strip_whitespace(s));
  }
}

TEST_CASE("sentence segmentation basics") {
  CHECK(segment_sentences("A cat. A dog.", Lang::en) ==
        std::vector<std::string>{"A cat.", "A dog."});
  CHECK(segment_sentences("Dr. Smith arrived.", Lang::en) ==
        std::vector<std::string>{"Dr. Smith arrived."});
  CHECK(segment_sentences("", Lang::en).empty());
  CHECK(segment_sentences("No terminator here", Lang::en) ==
        std::vector<std::string>{"No terminator here"});
  CHECK(segment_sentences("Really?! Yes.", Lang::en) ==
        std::vector<std::string>{"Really?!", "Yes."});
  // Lowercase after the terminator is not a boundary.
  CHECK(segment_sentences("v1.2 was released. Then v1.3.", Lang::en) ==
        std::vector<std::string>{"v1.2 was released.", "Then v1.3."});
  CHECK(segment_sentences("z.B. Berlin ist gross. Noch ein Satz.", Lang::de)
            .size() == 2);
}

TEST_CASE("segmentation preserves content up to inter-sentence whitespace") {
  const std::string inputs[] = {
      "A cat. A dog. A bird!",
      "Dr. Smith arrived. He left. Then Mrs. Jones came.",
      "One sentence only",
      "Markup [[link]] stays. Second one.",
  };
  for (const auto& input : inputs) {
    const auto sents = segment_sentences(input, Lang::en);
    std::string joined;
    for (const auto& s : sents) joined += s + " ";
    CHECK(normalize_whitespace(joined) == normalize_whitespace(input));
  }
}

TEST_CASE("line segmenter treats each line as a sentence") {
  LineSegmenter seg;
  CHECK(seg.segment("one line\nanother line\n\n  \nthird") ==
        std::vector<std::string>{"one line", "another line", "third"});
}

TEST_CASE("whitespace helpers") {
  CHECK(normalize_whitespace("  a \t b\n c  ") == "a b c");
  CHECK(strip_whitespace(" a b\tc\n") == "abc");
  CHECK(split_lines("a\nb\r\nc") == std::vector<std::string>{"a", "b", "c"});
  CHECK(split_lines("") == std::vector<std::string>{});
  CHECK(split_lines("x\n") == std::vector<std::string>{"x"});
  CHECK(count_codepoints("abc") == 3);
  CHECK(count_codepoints("äöü") == 3);
}
