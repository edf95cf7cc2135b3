#include "support/fixtures.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "editgauge/dump_parser.hpp"
#include "editgauge/errors.hpp"

namespace editgauge::testing {

namespace {

const std::vector<std::string>& classes() { return default_quality_classes(); }

const char* kMarkers[6] = {"mfa", "mga", "mb", "mc", "mstart", "mstub"};

const std::vector<std::vector<std::string>>& class_messages() {
  static const std::vector<std::vector<std::string>> k = {
      {"marked", "as", "featured", "article"},
      {"marked", "as", "good", "article"},
      {"bumped", "to", "b", "class"},
      {"moved", "to", "c", "class"},
      {"still", "a", "start", "page"},
      {"tagged", "as", "tiny", "stub"},
  };
  return k;
}

QualityDistribution concentrated(std::size_t cls, double peak) {
  QualityDistribution q;
  q.class_names = classes();
  const double rest = (1.0 - peak) / 5.0;
  q.probs.assign(6, rest);
  q.probs[cls] = peak;
  return q;
}

}  // namespace

std::vector<CorpusRecord> separable_fixture_corpus() {
  std::vector<CorpusRecord> records;
  for (std::size_t i = 0; i < 32; ++i) {
    const std::size_t cls = i % 6;
    CorpusRecord rec;
    rec.source_rev_id = static_cast<std::int64_t>(1000 + i);

    EditSentence es;
    es.tokens = {"the", "page", "r" + std::to_string(i), kMarkers[cls]};
    es.labels = {DiffLabel::Keep, DiffLabel::Keep, DiffLabel::Add,
                 DiffLabel::Add};
    rec.edit.sentences.push_back(std::move(es));
    rec.edit.n_hunks = 1;
    rec.edit.chars_added = 10 + 40 * ((i * 37) % 11);
    rec.edit.chars_removed = 5;

    rec.message = class_messages()[cls];
    rec.quality = concentrated(cls, 0.9);
    records.push_back(std::move(rec));
  }
  // Seed chosen so each class lands in the train split at least once.
  split_corpus(records, 7);
  return records;
}

std::pair<std::string, std::string> random_mutation_pair(Rng& rng) {
  static const char* kWords[] = {"alpha", "beta",  "gamma", "delta", "wiki",
                                 "page",  "river", "stone", "blue",  "old"};
  auto sentence = [&](std::size_t n) {
    std::ostringstream s;
    s << "The";
    for (std::size_t i = 0; i < n; ++i)
      s << " " << kWords[rng.below(std::size(kWords))];
    s << ".";
    return s.str();
  };

  std::vector<std::string> lines;
  const std::size_t n_lines = 2 + rng.below(4);
  for (std::size_t i = 0; i < n_lines; ++i) {
    std::ostringstream line;
    const std::size_t n_sents = 1 + rng.below(3);
    for (std::size_t s = 0; s < n_sents; ++s)
      line << (s ? " " : "") << sentence(2 + rng.below(5));
    lines.push_back(line.str());
  }

  std::vector<std::string> mutated = lines;
  const std::size_t kind = rng.below(4);
  const std::size_t at = rng.below(mutated.size());
  switch (kind) {
    case 0:  // insert a sentence into a line
      mutated[at] += " " + sentence(2 + rng.below(5));
      break;
    case 1:  // delete a line
      if (mutated.size() > 1) mutated.erase(mutated.begin() + static_cast<long>(at));
      break;
    case 2:  // replace a line's content
      mutated[at] = sentence(3 + rng.below(4));
      break;
    case 3:  // markup churn
      mutated[at] = "[[Category:" + std::string(kWords[rng.below(10)]) + "]]";
      break;
  }

  std::ostringstream before, after;
  for (const auto& l : lines) before << l << "\n";
  for (const auto& l : mutated) after << l << "\n";
  return {before.str(), after.str()};
}

std::vector<Revision> mini_dump_revisions(std::size_t n) {
  std::vector<Revision> revisions;
  Rng rng(20200608);
  std::vector<std::string> article = {
      "The town sits on a cold river.",
      "It was founded long ago by traders.",
  };
  Instant t = parse_timestamp("2018-01-05T10:00:00Z");
  static const char* kFill[] = {"market", "bridge", "chapel", "museum",
                                "harbor", "school", "quarry", "mill"};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cls = i % 6;
    t += 86400 * (1 + static_cast<Instant>(rng.below(5)));

    // Scripted growth with occasional replacements, marker token included
    // so the class stays learnable from the edit alone.
    const std::string word = kFill[rng.below(std::size(kFill))];
    std::ostringstream sent;
    sent << "The " << word << " " << i << " was noted " << kMarkers[cls]
         << ".";
    if (i % 7 == 3 && article.size() > 2) {
      article[1 + rng.below(article.size() - 1)] = sent.str();
    } else {
      article.push_back(sent.str());
    }

    Revision r;
    r.rev_id = static_cast<std::int64_t>(100000 + i * 3);
    if (i > 0) r.parent_id = revisions.back().rev_id;
    r.timestamp = t;
    std::ostringstream text;
    for (const auto& line : article) text << line << "\n";
    r.wikitext = text.str();
    // Every 13th revision carries no message and must be dropped downstream.
    if (i % 13 != 12) {
      std::ostringstream msg;
      msg << class_messages()[cls][0] << " " << class_messages()[cls][1] << " "
          << word;
      r.message = msg.str();
    }
    r.contributor = "editor" + std::to_string(i % 9);
    r.page_title = "Fixture Town";
    revisions.push_back(std::move(r));
  }
  return revisions;
}

void write_mini_dump(const std::string& path, std::size_t n) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write fixture dump: " + path);
  write_dump(out, mini_dump_revisions(n), "Fixture Town");
}

void write_ores_cache(const std::string& dir, const std::string& wiki,
                      const std::vector<Revision>& revisions) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < revisions.size(); ++i) {
    const QualityDistribution q = concentrated(i % 6, 0.75);
    std::ostringstream body;
    body << "{";
    for (std::size_t c = 0; c < q.class_names.size(); ++c)
      body << (c ? "," : "") << "\"" << q.class_names[c] << "\":" << q.probs[c];
    body << "}";
    const std::string path = dir + "/" + wiki + "_" +
                             std::to_string(revisions[i].rev_id) + ".json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write cache file: " + path);
    out << body.str();
  }
}

std::vector<Revision> growth_revisions(std::size_t months) {
  std::vector<Revision> revisions;
  std::string article = "Seed paragraph for the growth fixture.\n";
  for (std::size_t m = 0; m < months; ++m) {
    const int year = 2015 + static_cast<int>(m / 12);
    const int month = 1 + static_cast<int>(m % 12);
    char stamp[32];
    std::snprintf(stamp, sizeof(stamp), "%04d-%02d-15T12:00:00Z", year, month);

    // One fixed-size sentence appended per month: articles grow linearly,
    // edits stay constant-size.
    std::ostringstream grown;
    grown << article << "Month " << 100 + m
          << " added exactly one line of fixed length here......\n";
    article = grown.str();

    Revision r;
    r.rev_id = static_cast<std::int64_t>(500 + m);
    r.timestamp = parse_timestamp(stamp);
    r.wikitext = article;
    r.message = "monthly growth";
    revisions.push_back(std::move(r));
  }
  return revisions;
}

}  // namespace editgauge::testing
