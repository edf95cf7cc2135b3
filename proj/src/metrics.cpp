#include "editgauge/metrics.hpp"

#include <cmath>
#include <map>

#include "editgauge/errors.hpp"
#include "json.hpp"

namespace editgauge {

namespace {

std::map<std::vector<std::string>, std::size_t> ngram_counts(
    const std::vector<std::string>& toks, std::size_t n) {
  std::map<std::vector<std::string>, std::size_t> counts;
  if (toks.size() < n) return counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i)
    ++counts[{toks.begin() + static_cast<long>(i),
              toks.begin() + static_cast<long>(i + n)}];
  return counts;
}

}  // namespace

double bleu4_sentence(const std::vector<std::string>& candidate,
                      const std::vector<std::string>& reference) {
  if (reference.empty()) throw DataError("BLEU reference must be non-empty");
  if (candidate.empty()) return 0.0;

  double log_precision = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto cand = ngram_counts(candidate, n);
    const auto ref = ngram_counts(reference, n);
    std::size_t matched = 0, total = 0;
    for (const auto& [gram, count] : cand) {
      total += count;
      auto it = ref.find(gram);
      if (it != ref.end()) matched += std::min(count, it->second);
    }
    double p;
    if (n == 1) {
      p = total == 0 ? 0.0
                     : static_cast<double>(matched) / static_cast<double>(total);
      if (p == 0.0) return 0.0;
    } else {
      p = (static_cast<double>(matched) + 1.0) /
          (static_cast<double>(total) + 1.0);
    }
    log_precision += std::log(p);
  }

  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_precision / 4.0);
}

EvalReport classification_report(const std::vector<std::size_t>& gold,
                                 const std::vector<std::size_t>& predicted,
                                 const std::vector<std::string>& class_names) {
  if (gold.size() != predicted.size())
    throw DataError("gold/prediction length mismatch");
  const std::size_t k = class_names.size();

  EvalReport rep;
  rep.class_names = class_names;
  rep.confusion.assign(k, std::vector<std::size_t>(k, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] >= k || predicted[i] >= k)
      throw DataError("class index out of range in report");
    ++rep.confusion[gold[i]][predicted[i]];
    if (gold[i] == predicted[i]) ++correct;
  }
  rep.accuracy = gold.empty()
                     ? 0.0
                     : static_cast<double>(correct) /
                           static_cast<double>(gold.size());

  double f1_sum = 0.0;
  rep.per_class.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t tp = rep.confusion[c][c], gold_n = 0, pred_n = 0;
    for (std::size_t j = 0; j < k; ++j) {
      gold_n += rep.confusion[c][j];
      pred_n += rep.confusion[j][c];
    }
    ClassScores& s = rep.per_class[c];
    s.precision = pred_n == 0 ? 0.0
                              : static_cast<double>(tp) /
                                    static_cast<double>(pred_n);
    s.recall = gold_n == 0 ? 0.0
                           : static_cast<double>(tp) /
                                 static_cast<double>(gold_n);
    s.f1 = (s.precision + s.recall) == 0.0
               ? 0.0
               : 2.0 * s.precision * s.recall / (s.precision + s.recall);
    s.absent = gold_n == 0 && pred_n == 0;
    f1_sum += s.f1;
  }
  rep.macro_f1 = k == 0 ? 0.0 : f1_sum / static_cast<double>(k);
  return rep;
}

std::string EvalReport::to_json() const {
  nlohmann::json per = nlohmann::json::array();
  for (std::size_t c = 0; c < per_class.size(); ++c)
    per.push_back({{"class", class_names[c]},
                   {"precision", per_class[c].precision},
                   {"recall", per_class[c].recall},
                   {"f1", per_class[c].f1},
                   {"absent", per_class[c].absent}});
  nlohmann::json j = {{"accuracy", accuracy},
                      {"macro_f1", macro_f1},
                      {"per_class", std::move(per)},
                      {"confusion", confusion}};
  if (bleu4) j["bleu4"] = *bleu4;
  return j.dump(2);
}

}  // namespace editgauge
