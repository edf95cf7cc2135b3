#include "editgauge/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "editgauge/errors.hpp"
#include "editgauge/rng.hpp"
#include "json.hpp"

using nlohmann::json;

namespace editgauge {

std::vector<std::pair<Revision, Revision>> sort_and_pair(
    std::vector<Revision> revs) {
  std::stable_sort(revs.begin(), revs.end(),
                   [](const Revision& a, const Revision& b) {
                     if (a.timestamp != b.timestamp)
                       return a.timestamp < b.timestamp;
                     return a.rev_id < b.rev_id;
                   });
  std::vector<std::pair<Revision, Revision>> pairs;
  if (revs.size() < 2) return pairs;
  pairs.reserve(revs.size() - 1);
  for (std::size_t t = 1; t < revs.size(); ++t)
    pairs.emplace_back(revs[t - 1], revs[t]);
  return pairs;
}

std::vector<CorpusRecord> build_corpus(
    const std::vector<std::pair<Revision, Revision>>& pairs,
    const ExtractConfig& cfg, std::size_t min_sentences, BuildStats* stats,
    std::size_t jobs) {
  // Extraction is pure per pair; parallelize it, keep chronological order.
  std::vector<std::optional<Edit>> edits(pairs.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < pairs.size(); ++i)
      if (!pairs[i].second.message.empty())
        edits[i] = extract_edit(pairs[i].first.wikitext,
                                pairs[i].second.wikitext, cfg);
  } else {
    std::mutex mu;
    std::size_t next = 0;
    auto worker = [&]() {
      for (;;) {
        std::size_t i;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (next >= pairs.size()) return;
          i = next++;
        }
        if (!pairs[i].second.message.empty())
          edits[i] = extract_edit(pairs[i].first.wikitext,
                                  pairs[i].second.wikitext, cfg);
      }
    };
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < std::min(jobs, pairs.size()); ++t)
      threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  BuildStats st;
  std::vector<CorpusRecord> records;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Revision& curr = pairs[i].second;
    if (curr.message.empty()) {
      ++st.dropped_no_message;
      continue;
    }
    st.dropped_ws_pairs += edits[i]->dropped_pairs;
    if (edits[i]->sentences.size() < min_sentences) {
      ++st.dropped_too_small;
      continue;
    }
    CorpusRecord rec;
    rec.source_rev_id = curr.rev_id;
    rec.edit = std::move(*edits[i]);
    rec.message = tokenize(curr.message);
    if (rec.message.empty()) {
      ++st.dropped_no_message;
      continue;
    }
    records.push_back(std::move(rec));
    ++st.kept;
  }
  if (stats) *stats = st;
  return records;
}

SplitSizes split_sizes(std::size_t n) {
  SplitSizes s;
  s.train = n * 7 / 10;
  s.valid = n / 10;
  s.test = n - s.train - s.valid;
  return s;
}

void split_corpus(std::vector<CorpusRecord>& records, std::uint64_t seed) {
  const std::size_t n = records.size();
  if (n < 10)
    throw DataError("split requires at least 10 records, got " +
                    std::to_string(n));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  const SplitSizes sz = split_sizes(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    Split s = Split::test;
    if (pos < sz.train)
      s = Split::train;
    else if (pos < sz.train + sz.valid)
      s = Split::valid;
    records[order[pos]].split = s;
  }
}

void label_corpus(std::vector<CorpusRecord>& records, OresClient& client,
                  std::size_t parallelism) {
  if (parallelism == 0) parallelism = 1;
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr failure;

  auto worker = [&]() {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (failure || next >= records.size()) return;
        i = next++;
      }
      try {
        QualityDistribution q = client.fetch_quality(records[i].source_rev_id);
        std::lock_guard<std::mutex> lock(mu);
        records[i].quality = std::move(q);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> threads;
  const std::size_t n_threads = std::min(parallelism, std::max<std::size_t>(records.size(), 1));
  for (std::size_t i = 0; i < n_threads; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

json edit_to_json(const Edit& e) {
  json sentences = json::array();
  for (const auto& s : e.sentences)
    sentences.push_back({{"tokens", s.tokens}, {"labels", s.label_string()}});
  return {{"sentences", std::move(sentences)}, {"n_hunks", e.n_hunks}};
}

Edit edit_from_json(const json& j) {
  Edit e;
  e.n_hunks = j.value("n_hunks", std::size_t{0});
  for (const auto& s : j.at("sentences")) {
    EditSentence es;
    es.tokens = s.at("tokens").get<std::vector<std::string>>();
    const std::string labels = s.at("labels").get<std::string>();
    if (labels.size() != es.tokens.size())
      throw DataError("edit sentence labels/tokens length mismatch");
    for (char c : labels) {
      switch (c) {
        case '=': es.labels.push_back(DiffLabel::Keep); break;
        case '+': es.labels.push_back(DiffLabel::Add); break;
        case '-': es.labels.push_back(DiffLabel::Del); break;
        default: throw DataError(std::string("bad edit label '") + c + "'");
      }
    }
    e.sentences.push_back(std::move(es));
  }
  return e;
}

}  // namespace

std::string record_to_json(const CorpusRecord& rec) {
  json j;
  j["rev_id"] = rec.source_rev_id;
  j["edit"] = edit_to_json(rec.edit);
  j["message"] = rec.message;
  if (!rec.quality.class_names.empty()) {
    json q = json::object();
    for (std::size_t i = 0; i < rec.quality.class_names.size(); ++i)
      q[rec.quality.class_names[i]] = rec.quality.probs[i];
    j["quality"] = std::move(q);
  }
  j["gold"] = rec.gold;
  if (rec.split) j["split"] = split_name(*rec.split);
  return j.dump();
}

CorpusRecord record_from_json(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw DataError(std::string("bad corpus record: ") + e.what());
  }
  CorpusRecord rec;
  rec.source_rev_id = j.at("rev_id").get<std::int64_t>();
  rec.edit = edit_from_json(j.at("edit"));
  rec.message = j.at("message").get<std::vector<std::string>>();
  if (rec.message.empty()) throw DataError("corpus record with empty message");
  if (j.contains("quality")) {
    for (auto it = j["quality"].begin(); it != j["quality"].end(); ++it) {
      rec.quality.class_names.push_back(it.key());
      rec.quality.probs.push_back(it.value().get<double>());
    }
  }
  rec.gold = j.value("gold", false);
  if (j.contains("split")) rec.split = split_from_string(j["split"]);
  return rec;
}

void write_corpus(std::ostream& out, const std::vector<CorpusRecord>& records) {
  for (const auto& rec : records) out << record_to_json(rec) << '\n';
}

void write_corpus_file(const std::string& path,
                       const std::vector<CorpusRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write corpus file: " + path);
  write_corpus(out, records);
}

std::vector<CorpusRecord> read_corpus(std::istream& in) {
  std::vector<CorpusRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    records.push_back(record_from_json(line));
  }
  return records;
}

std::vector<CorpusRecord> read_corpus_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read corpus file: " + path);
  return read_corpus(in);
}

}  // namespace editgauge
