#pragma once

#include <optional>
#include <string>
#include <vector>

namespace editgauge {

// Sentence-level BLEU-4: geometric mean of modified n-gram precisions
// (add-1 smoothing on counts for n >= 2) times the brevity penalty
// min(1, e^{1-r/c}). Empty candidate scores 0; empty reference is an error.
double bleu4_sentence(const std::vector<std::string>& candidate,
                      const std::vector<std::string>& reference);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool absent = false;  // class in neither gold nor predictions; F1 := 0
};

struct EvalReport {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::optional<double> bleu4;
  std::vector<std::string> class_names;
  std::vector<ClassScores> per_class;
  std::vector<std::vector<std::size_t>> confusion;  // [gold][pred]

  std::string to_json() const;
};

// Builds accuracy / per-class PRF / macro-F1 from parallel gold and
// predicted class indices.
EvalReport classification_report(const std::vector<std::size_t>& gold,
                                 const std::vector<std::size_t>& predicted,
                                 const std::vector<std::string>& class_names);

}  // namespace editgauge
