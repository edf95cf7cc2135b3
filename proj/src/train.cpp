#include "editgauge/train.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "editgauge/errors.hpp"
#include "editgauge/rng.hpp"

namespace editgauge {

const char* loss_mode_name(LossMode m) {
  return m == LossMode::kl_soft ? "kl" : "ce";
}

LossMode loss_mode_from_string(const std::string& name) {
  if (name == "kl") return LossMode::kl_soft;
  if (name == "ce") return LossMode::ce_gold;
  throw UsageError("unknown loss mode: " + name);
}

namespace {

// Canonical class order shared by every record of a corpus: the default
// ORES order when the class set matches it, alphabetical otherwise.
std::vector<std::string> canonical_classes(
    const std::vector<CorpusRecord>& records) {
  std::vector<std::string> names;
  for (const auto& rec : records) {
    if (rec.quality.class_names.empty()) continue;
    std::vector<std::string> sorted = rec.quality.class_names;
    std::sort(sorted.begin(), sorted.end());
    if (names.empty()) {
      names = sorted;
    } else if (names != sorted) {
      throw DataError("records disagree on the quality class set");
    }
  }
  if (names.empty()) throw DataError("corpus has no quality labels");
  std::vector<std::string> def = default_quality_classes();
  std::vector<std::string> def_sorted = def;
  std::sort(def_sorted.begin(), def_sorted.end());
  return names == def_sorted ? def : names;
}

std::vector<double> target_in_order(const CorpusRecord& rec,
                                    const std::vector<std::string>& order) {
  std::vector<double> out(order.size(), 0.0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto it = std::find(rec.quality.class_names.begin(),
                        rec.quality.class_names.end(), order[i]);
    if (it == rec.quality.class_names.end())
      throw DataError("record missing class " + order[i]);
    out[i] = rec.quality.probs[static_cast<std::size_t>(
        it - rec.quality.class_names.begin())];
  }
  return out;
}

std::vector<const CorpusRecord*> split_records(
    const std::vector<CorpusRecord>& corpus, Split split) {
  std::vector<const CorpusRecord*> out;
  for (const auto& rec : corpus)
    if (rec.split && *rec.split == split) out.push_back(&rec);
  return out;
}

struct ExampleLoss {
  double cls = 0.0;
  double gen = 0.0;
  double joint = 0.0;
};

ExampleLoss example_losses(const EditQualityModel& model,
                           const CorpusRecord& rec,
                           const std::vector<double>& target,
                           const TrainConfig& cfg, bool with_backward) {
  nn::Graph g;
  EncoderOutput enc = model.encode(g, rec.edit);

  nn::Var cls_loss, gen_loss;
  if (cfg.lambda > 0.0) {
    nn::Var logp = cfg.combine_message
                       ? model.classify_combined(g, enc, rec.message)
                       : model.classify(g, enc);
    if (cfg.loss_mode == LossMode::ce_gold) {
      if (!rec.gold)
        throw DataError("ce loss requires gold-labeled records (rev " +
                        std::to_string(rec.source_rev_id) + ")");
      const std::size_t gold = static_cast<std::size_t>(
          std::max_element(target.begin(), target.end()) - target.begin());
      cls_loss = g.nll(logp, gold);
    } else {
      if (rec.gold)
        throw DataError("kl loss expects soft labels but rev " +
                        std::to_string(rec.source_rev_id) +
                        " is gold-flagged; use the ce loss");
      cls_loss = g.kl_div(logp, target);
    }
  }
  if (cfg.lambda < 1.0) gen_loss = model.generation_loss(g, enc, rec.message);

  nn::Var joint;
  if (cls_loss && gen_loss)
    joint = g.add_scaled(cls_loss, cfg.lambda, gen_loss, 1.0 - cfg.lambda);
  else if (cls_loss)
    joint = g.scale(cls_loss, cfg.lambda);
  else
    joint = g.scale(gen_loss, 1.0 - cfg.lambda);

  if (with_backward) g.backward(joint);
  return {cls_loss ? cls_loss->val[0] : 0.0, gen_loss ? gen_loss->val[0] : 0.0,
          joint->val[0]};
}

std::vector<std::vector<double>> snapshot_params(const nn::ParamStore& store) {
  std::vector<std::vector<double>> snap;
  snap.reserve(store.all().size());
  for (const auto& p : store.all()) snap.push_back(p->val);
  return snap;
}

void restore_params(nn::ParamStore& store,
                    const std::vector<std::vector<double>>& snap) {
  for (std::size_t i = 0; i < snap.size(); ++i)
    store.all()[i]->val = snap[i];
}

}  // namespace

TrainedModel train(std::vector<CorpusRecord> corpus, const TrainConfig& cfg,
                   std::ostream* log_stream) {
  if (cfg.lambda < 0.0 || cfg.lambda > 1.0)
    throw UsageError("lambda must be in [0,1]");

  const std::vector<std::string> classes = canonical_classes(corpus);
  auto train_recs = split_records(corpus, Split::train);
  auto valid_recs = split_records(corpus, Split::valid);
  if (train_recs.empty()) throw DataError("train split is empty");
  if (valid_recs.empty()) throw DataError("valid split is empty");

  // Vocabularies from the train split only.
  std::vector<std::vector<std::string>> edit_token_seqs, message_seqs;
  for (const auto* rec : train_recs) {
    for (const auto& es : rec->edit.sentences) edit_token_seqs.push_back(es.tokens);
    message_seqs.push_back(rec->message);
  }
  Vocabulary tok_vocab = Vocabulary::build(edit_token_seqs, 1);
  Vocabulary msg_vocab = Vocabulary::build(message_seqs, cfg.msg_min_freq);

  ModelConfig mc;
  mc.d_tok = cfg.d_tok;
  mc.d_lab = cfg.d_lab;
  mc.enc_hidden = cfg.enc_hidden;
  mc.dec_hidden = cfg.dec_hidden;
  mc.class_names = classes;
  mc.encoder = cfg.encoder;
  mc.mean_pool = cfg.mean_pool;
  mc.lambda = cfg.lambda;
  mc.beam_width = cfg.beam_width;
  mc.max_steps = cfg.max_steps;
  mc.combine_message = cfg.combine_message;

  auto model = std::make_unique<EditQualityModel>(mc, tok_vocab, msg_vocab,
                                                  cfg.seed);
  nn::Adam adam(cfg.lr);

  TrainResult result;
  result.class_names = classes;
  // Model selection: best validation accuracy, ties broken by validation
  // BLEU when the generation head is trained; pure BLEU when lambda = 0.
  std::pair<double, double> best_metric{-1.0, -1.0};
  std::vector<std::vector<double>> best_snapshot =
      snapshot_params(model->params());
  std::size_t since_best = 0;

  std::vector<std::vector<double>> targets;
  targets.reserve(train_recs.size());
  for (const auto* rec : train_recs)
    targets.push_back(target_in_order(*rec, classes));

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(train_recs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng(cfg.seed + 0x9E3779B9u * epoch);
    shuffle_rng.shuffle(order);

    EpochLog log;
    log.epoch = epoch;
    model->params().zero_grad();
    std::size_t in_batch = 0;
    for (std::size_t step = 0; step < order.size(); ++step) {
      const std::size_t i = order[step];
      ExampleLoss loss = example_losses(*model, *train_recs[i], targets[i],
                                        cfg, /*with_backward=*/true);
      if (!std::isfinite(loss.joint))
        throw NumericError("non-finite loss at epoch " +
                           std::to_string(epoch) + ", example " +
                           std::to_string(step));
      log.train_cls_loss += loss.cls;
      log.train_gen_loss += loss.gen;
      log.train_joint_loss += loss.joint;
      if (++in_batch == cfg.batch_size || step + 1 == order.size()) {
        model->params().clip_grad_norm(cfg.clip_norm);
        adam.step(model->params().all());
        model->params().zero_grad();
        in_batch = 0;
      }
    }
    const double inv_n = 1.0 / static_cast<double>(train_recs.size());
    log.train_cls_loss *= inv_n;
    log.train_gen_loss *= inv_n;
    log.train_joint_loss *= inv_n;

    EvalReport val = evaluate(corpus, *model, Split::valid);
    log.val_accuracy = val.accuracy;
    log.val_macro_f1 = val.macro_f1;
    log.val_bleu = val.bleu4;

    const std::pair<double, double> metric =
        cfg.lambda > 0.0
            ? std::pair<double, double>{val.accuracy, val.bleu4.value_or(0.0)}
            : std::pair<double, double>{val.bleu4.value_or(0.0), 0.0};
    if (metric > best_metric) {
      best_metric = metric;
      best_snapshot = snapshot_params(model->params());
      result.best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
    }

    if (log_stream) {
      std::ostringstream line;
      line << "epoch " << epoch << " cls " << std::setprecision(6)
           << log.train_cls_loss << " gen " << log.train_gen_loss << " joint "
           << log.train_joint_loss << " val_acc " << log.val_accuracy
           << " val_f1 " << log.val_macro_f1;
      if (log.val_bleu) line << " val_bleu " << *log.val_bleu;
      *log_stream << line.str() << "\n";
    }
    result.log.push_back(log);

    if (since_best > cfg.patience) break;
  }

  restore_params(model->params(), best_snapshot);
  return {std::move(model), std::move(result)};
}

std::size_t edit_input_length(const Edit& edit) {
  std::size_t chars = 0;
  for (const auto& es : edit.sentences)
    for (std::size_t i = 0; i < es.tokens.size(); ++i)
      if (es.labels[i] != DiffLabel::Keep)
        chars += count_codepoints(es.tokens[i]);
  return chars;
}

EvalReport evaluate(const std::vector<CorpusRecord>& records,
                    const EditQualityModel& model, std::optional<Split> split,
                    std::vector<PerExample>* per_example) {
  std::vector<const CorpusRecord*> recs;
  for (const auto& rec : records)
    if (!split || (rec.split && *rec.split == *split)) recs.push_back(&rec);
  if (recs.empty()) throw DataError("no records to evaluate");

  const auto& classes = model.config().class_names;
  {
    // Checkpoint/corpus agreement on the class set.
    std::vector<std::string> a = classes, b = recs[0]->quality.class_names;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b)
      throw DataError(
          "checkpoint class set does not match corpus quality labels");
  }

  std::vector<std::size_t> gold, pred;
  double bleu_sum = 0.0;
  std::size_t bleu_n = 0;
  for (const auto* rec : recs) {
    const std::vector<double> target = target_in_order(*rec, classes);
    nn::Graph g;
    EncoderOutput enc = model.encode(g, rec->edit);
    nn::Var logp = model.config().combine_message
                       ? model.classify_combined(g, enc, rec->message)
                       : model.classify(g, enc);
    const std::size_t p = static_cast<std::size_t>(
        std::max_element(logp->val.begin(), logp->val.end()) -
        logp->val.begin());
    const std::size_t t = static_cast<std::size_t>(
        std::max_element(target.begin(), target.end()) - target.begin());
    gold.push_back(t);
    pred.push_back(p);
    if (per_example)
      per_example->push_back({edit_input_length(rec->edit), p == t});
    if (model.config().lambda < 1.0) {
      const auto hyp = model.beam_search(rec->edit);
      bleu_sum += bleu4_sentence(hyp, rec->message);
      ++bleu_n;
    }
  }
  EvalReport rep = classification_report(gold, pred, classes);
  if (bleu_n > 0) rep.bleu4 = bleu_sum / static_cast<double>(bleu_n);
  return rep;
}

std::vector<SweepRow> sweep_lambda(const std::vector<CorpusRecord>& corpus,
                                   const std::vector<double>& lambdas,
                                   const TrainConfig& base,
                                   std::ostream* log_stream) {
  std::vector<SweepRow> rows;
  for (double lambda : lambdas) {
    if (lambda < 0.0 || lambda > 1.0)
      throw UsageError("sweep lambda outside [0,1]");
    TrainConfig cfg = base;
    cfg.lambda = lambda;
    if (log_stream) *log_stream << "# lambda " << lambda << "\n";
    TrainedModel tm = train(corpus, cfg, log_stream);
    EvalReport val = evaluate(corpus, *tm.model, Split::valid);
    SweepRow row;
    row.lambda = lambda;
    if (lambda > 0.0) {
      row.f1 = val.macro_f1;
      row.accuracy = val.accuracy;
    }
    row.bleu = val.bleu4;
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::string cell(const std::optional<double>& v) {
  if (!v) return "-";
  std::ostringstream out;
  out << std::fixed << std::setprecision(4) << *v;
  return out.str();
}

}  // namespace

std::string sweep_table_markdown(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "| lambda | F1 | Acc | BLEU |\n|---|---|---|---|\n";
  for (const auto& r : rows) {
    out << "| " << (r.lambda == 0.0 ? std::string("0 (generation only)")
                                    : cell(r.lambda))
        << " | " << cell(r.f1) << " | " << cell(r.accuracy) << " | "
        << cell(r.bleu) << " |\n";
  }
  return out.str();
}

std::string sweep_table_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "lambda,f1,accuracy,bleu\n";
  for (const auto& r : rows) {
    out << cell(r.lambda) << "," << (r.f1 ? cell(r.f1) : "") << ","
        << (r.accuracy ? cell(r.accuracy) : "") << ","
        << (r.bleu ? cell(r.bleu) : "") << "\n";
  }
  return out.str();
}

namespace {

struct MonthAcc {
  std::size_t n_rev = 0;
  double article_chars = 0.0;
  std::size_t n_edit = 0;
  double edit_chars = 0.0;
};

void accumulate_page(std::vector<Revision> revisions,
                     std::map<std::pair<int, int>, MonthAcc>& months) {
  std::stable_sort(revisions.begin(), revisions.end(),
                   [](const Revision& a, const Revision& b) {
                     if (a.timestamp != b.timestamp)
                       return a.timestamp < b.timestamp;
                     return a.rev_id < b.rev_id;
                   });
  for (const auto& r : revisions) {
    MonthAcc& acc = months[year_month(r.timestamp)];
    ++acc.n_rev;
    acc.article_chars += static_cast<double>(count_codepoints(r.wikitext));
  }
  for (std::size_t t = 1; t < revisions.size(); ++t) {
    const auto hunks = line_diff(split_lines(revisions[t - 1].wikitext),
                                 split_lines(revisions[t].wikitext));
    std::size_t chars = 0;
    for (const auto& h : hunks) {
      for (const auto& l : h.removed_lines) chars += count_codepoints(l);
      for (const auto& l : h.added_lines) chars += count_codepoints(l);
    }
    MonthAcc& acc = months[year_month(revisions[t].timestamp)];
    ++acc.n_edit;
    acc.edit_chars += static_cast<double>(chars);
  }
}

std::vector<MonthlyLengthRow> months_to_rows(
    const std::map<std::pair<int, int>, MonthAcc>& months) {
  std::vector<MonthlyLengthRow> rows;
  for (const auto& [ym, acc] : months) {
    MonthlyLengthRow row;
    row.year = ym.first;
    row.month = ym.second;
    row.n_revisions = acc.n_rev;
    row.mean_article_chars = acc.article_chars / static_cast<double>(acc.n_rev);
    row.n_edits = acc.n_edit;
    if (acc.n_edit > 0)
      row.mean_edit_chars = acc.edit_chars / static_cast<double>(acc.n_edit);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::vector<MonthlyLengthRow> stats_lengths(std::vector<Revision> revisions) {
  if (revisions.empty()) throw DataError("stats_lengths needs >= 1 revision");
  std::map<std::pair<int, int>, MonthAcc> months;
  accumulate_page(std::move(revisions), months);
  return months_to_rows(months);
}

std::vector<MonthlyLengthRow> stats_lengths(
    std::vector<std::vector<Revision>> pages) {
  std::map<std::pair<int, int>, MonthAcc> months;
  std::size_t total = 0;
  for (auto& page : pages) {
    total += page.size();
    accumulate_page(std::move(page), months);
  }
  if (total == 0) throw DataError("stats_lengths needs >= 1 revision");
  return months_to_rows(months);
}

std::string monthly_lengths_csv(const std::vector<MonthlyLengthRow>& rows) {
  std::ostringstream out;
  out << "month,n_revisions,mean_article_chars,n_edits,mean_edit_chars\n";
  for (const auto& r : rows) {
    out << r.year << "-" << std::setw(2) << std::setfill('0') << r.month
        << std::setfill(' ') << "," << r.n_revisions << "," << std::fixed
        << std::setprecision(2) << r.mean_article_chars << "," << r.n_edits
        << ",";
    if (r.mean_edit_chars)
      out << std::fixed << std::setprecision(2) << *r.mean_edit_chars;
    out << "\n";
  }
  return out.str();
}

std::vector<LengthBucketRow> stats_len_vs_acc(
    const std::vector<PerExample>& pairs, std::vector<std::size_t> edges) {
  if (pairs.empty()) throw DataError("stats_len_vs_acc needs >= 1 pair");
  if (edges.empty()) {
    std::size_t max_len = 0;
    for (const auto& p : pairs) max_len = std::max(max_len, p.input_length);
    for (std::size_t e = 256; e <= max_len; e *= 2) edges.push_back(e);
    if (edges.empty() || edges.back() <= max_len)
      edges.push_back(edges.empty() ? 256 : edges.back() * 2);
  }
  std::sort(edges.begin(), edges.end());

  std::vector<LengthBucketRow> rows(edges.size() + 1);
  for (std::size_t b = 0; b <= edges.size(); ++b) {
    rows[b].lo = b == 0 ? 0 : edges[b - 1];
    rows[b].hi = b == edges.size() ? 0 : edges[b];
  }
  std::vector<std::size_t> correct(rows.size(), 0);
  for (const auto& p : pairs) {
    std::size_t b = 0;
    while (b < edges.size() && p.input_length >= edges[b]) ++b;
    ++rows[b].n;
    if (p.correct) ++correct[b];
  }
  std::vector<LengthBucketRow> out;
  for (std::size_t b = 0; b < rows.size(); ++b) {
    if (rows[b].n == 0) continue;
    rows[b].accuracy = static_cast<double>(correct[b]) /
                       static_cast<double>(rows[b].n);
    out.push_back(rows[b]);
  }
  return out;
}

std::string length_buckets_csv(const std::vector<LengthBucketRow>& rows) {
  std::ostringstream out;
  out << "bucket_lo,bucket_hi,n,accuracy\n";
  for (const auto& r : rows) {
    out << r.lo << ",";
    if (r.hi > 0) out << r.hi;
    out << "," << r.n << "," << std::fixed << std::setprecision(4)
        << r.accuracy << "\n";
  }
  return out.str();
}

}  // namespace editgauge
