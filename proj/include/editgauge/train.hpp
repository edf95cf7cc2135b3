#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "editgauge/corpus.hpp"
#include "editgauge/metrics.hpp"
#include "editgauge/model.hpp"

namespace editgauge {

enum class LossMode { kl_soft, ce_gold };

const char* loss_mode_name(LossMode m);
LossMode loss_mode_from_string(const std::string& name);

struct TrainConfig {
  double lambda = 0.9;
  std::size_t epochs = 30;
  std::size_t batch_size = 8;
  double lr = 1e-3;
  std::uint64_t seed = 1;
  LossMode loss_mode = LossMode::kl_soft;
  EncoderVariant encoder = EncoderVariant::edit_sentence;
  bool mean_pool = false;
  bool combine_message = false;
  std::size_t patience = 5;  // early stop on the validation metric
  double clip_norm = 5.0;
  std::size_t msg_min_freq = 2;

  // Model dimensions.
  std::size_t d_tok = 64;
  std::size_t d_lab = 8;
  std::size_t enc_hidden = 64;
  std::size_t dec_hidden = 128;
  std::size_t beam_width = 5;
  std::size_t max_steps = 30;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_cls_loss = 0.0;
  double train_gen_loss = 0.0;
  double train_joint_loss = 0.0;
  double val_accuracy = 0.0;
  double val_macro_f1 = 0.0;
  std::optional<double> val_bleu;
};

struct TrainResult {
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  std::vector<std::string> class_names;
};

struct TrainedModel {
  std::unique_ptr<EditQualityModel> model;
  TrainResult result;
};

// Trains on the train split (vocabularies from it alone), tracks the
// validation metric per epoch (accuracy, or BLEU when lambda = 0), and
// leaves the best-epoch parameters in the returned model.
TrainedModel train(std::vector<CorpusRecord> corpus, const TrainConfig& cfg,
                   std::ostream* log_stream = nullptr);

struct PerExample {
  // Characters across the edit's added and deleted tokens; derivable from a
  // serialized record, unlike the raw hunk character counts.
  std::size_t input_length = 0;
  bool correct = false;
};

std::size_t edit_input_length(const Edit& edit);

// Evaluates records of the given split (all records when nullopt). The
// corpus class set must match the checkpoint's. Classification metrics are
// filled when lambda > 0; BLEU when lambda < 1.
EvalReport evaluate(const std::vector<CorpusRecord>& records,
                    const EditQualityModel& model,
                    std::optional<Split> split = std::nullopt,
                    std::vector<PerExample>* per_example = nullptr);

struct SweepRow {
  double lambda = 0.0;
  std::optional<double> f1;
  std::optional<double> accuracy;
  std::optional<double> bleu;
};

// One train+evaluate run per lambda under a shared seed; validation metrics.
std::vector<SweepRow> sweep_lambda(const std::vector<CorpusRecord>& corpus,
                                   const std::vector<double>& lambdas,
                                   const TrainConfig& base,
                                   std::ostream* log_stream = nullptr);

std::string sweep_table_markdown(const std::vector<SweepRow>& rows);
std::string sweep_table_csv(const std::vector<SweepRow>& rows);

struct MonthlyLengthRow {
  int year = 0;
  int month = 0;
  std::size_t n_revisions = 0;
  double mean_article_chars = 0.0;
  std::size_t n_edits = 0;
  std::optional<double> mean_edit_chars;
};

// Fig.-1-style statistics: per calendar month, mean article length and mean
// edit length (characters added + removed across hunks of each consecutive
// pair, attributed to the later revision's month). The multi-page overload
// never pairs revisions across pages.
std::vector<MonthlyLengthRow> stats_lengths(std::vector<Revision> revisions);
std::vector<MonthlyLengthRow> stats_lengths(
    std::vector<std::vector<Revision>> pages);
std::string monthly_lengths_csv(const std::vector<MonthlyLengthRow>& rows);

struct LengthBucketRow {
  std::size_t lo = 0;
  std::size_t hi = 0;  // exclusive; 0 means open-ended
  std::size_t n = 0;
  double accuracy = 0.0;
};

// Accuracy per input-length bucket; default edges at powers of two starting
// at 256.
std::vector<LengthBucketRow> stats_len_vs_acc(
    const std::vector<PerExample>& pairs,
    std::vector<std::size_t> edges = {});
std::string length_buckets_csv(const std::vector<LengthBucketRow>& rows);

}  // namespace editgauge
