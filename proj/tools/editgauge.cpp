#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "editgauge/corpus.hpp"
#include "editgauge/dump_parser.hpp"
#include "editgauge/errors.hpp"
#include "editgauge/train.hpp"
#include "json.hpp"

using namespace editgauge;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << content;
}

// Streams the dump one page at a time: dumps exceed memory, a single page's
// history does not. The sink fires on every page boundary.
void for_each_page(const std::string& dump, DumpStats* dstats,
                   const std::function<void(std::vector<Revision>&&)>& sink) {
  std::vector<Revision> page;
  std::optional<std::string> current_title;
  DumpStats st = parse_dump_file(dump, [&](Revision&& r) {
    if (current_title != r.page_title && !page.empty()) {
      sink(std::move(page));
      page.clear();
    }
    current_title = r.page_title;
    page.push_back(std::move(r));
  });
  if (!page.empty()) sink(std::move(page));
  if (dstats) *dstats = st;
}

int cmd_extract(const std::string& dump, const std::string& out_path,
                const std::string& lang, double threshold,
                std::size_t min_sentences, bool pre_segmented,
                std::size_t jobs) {
  ExtractConfig cfg;
  cfg.lang = lang_from_string(lang);
  cfg.match_threshold = threshold;
  cfg.pre_segmented = pre_segmented;

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + out_path);

  DumpStats dstats;
  BuildStats total;
  for_each_page(dump, &dstats, [&](std::vector<Revision>&& page) {
    BuildStats st;
    const auto recs = build_corpus(sort_and_pair(std::move(page)), cfg,
                                   min_sentences, &st, jobs);
    write_corpus(out, recs);
    total.kept += st.kept;
    total.dropped_no_message += st.dropped_no_message;
    total.dropped_too_small += st.dropped_too_small;
    total.dropped_ws_pairs += st.dropped_ws_pairs;
  });
  std::cerr << "extract: " << dstats.pages << " pages, " << dstats.revisions
            << " revisions (" << dstats.skipped_missing_id
            << " skipped w/o id), " << total.kept << " records kept, "
            << total.dropped_no_message << " dropped (no message), "
            << total.dropped_too_small << " dropped (empty edit), "
            << total.dropped_ws_pairs << " whitespace-only pairs skipped\n";
  return 0;
}

int cmd_label(const std::string& in_path, const std::string& out_path,
              OresConfig ores, std::size_t parallel) {
  auto records = read_corpus_file(in_path);
  OresClient client(std::move(ores));
  label_corpus(records, client, parallel);
  write_corpus_file(out_path, records);
  std::size_t renormalized = 0;
  for (const auto& r : records)
    if (r.quality.renormalized) ++renormalized;
  std::cerr << "label: " << records.size() << " records labeled, "
            << renormalized << " renormalized\n";
  return 0;
}

int cmd_split(const std::string& in_path, const std::string& out_path,
              std::uint64_t seed) {
  auto records = read_corpus_file(in_path);
  split_corpus(records, seed);
  write_corpus_file(out_path, records);
  const SplitSizes sz = split_sizes(records.size());
  std::cerr << "split: " << sz.train << " train / " << sz.valid << " valid / "
            << sz.test << " test\n";
  return 0;
}

int cmd_train(const std::string& in_path, const std::string& ckpt_path,
              const TrainConfig& cfg, const std::string& log_path) {
  auto records = read_corpus_file(in_path);
  std::ofstream log_file;
  std::ostream* log = &std::cerr;
  if (!log_path.empty()) {
    log_file.open(log_path);
    if (!log_file) throw DataError("cannot write log file: " + log_path);
    log = &log_file;
  }
  TrainedModel tm = train(std::move(records), cfg, log);
  tm.model->save(ckpt_path);
  std::cerr << "train: best epoch " << tm.result.best_epoch << ", checkpoint "
            << ckpt_path << "\n";
  return 0;
}

int cmd_eval(const std::string& in_path, const std::string& ckpt_path,
             const std::string& split_name_, const std::string& report_path,
             const std::string& per_example_path) {
  auto records = read_corpus_file(in_path);
  EditQualityModel model = EditQualityModel::load(ckpt_path);
  std::optional<Split> split;
  if (split_name_ != "all") split = split_from_string(split_name_);

  std::vector<PerExample> per_example;
  EvalReport rep = evaluate(records, model, split,
                            per_example_path.empty() ? nullptr : &per_example);
  const std::string report = rep.to_json();
  if (!report_path.empty()) write_file(report_path, report);
  std::cout << report << "\n";
  if (!per_example_path.empty()) {
    std::ostringstream csv;
    csv << "length,correct\n";
    for (const auto& pe : per_example)
      csv << pe.input_length << "," << (pe.correct ? 1 : 0) << "\n";
    write_file(per_example_path, csv.str());
  }
  return 0;
}

int cmd_sweep(const std::string& in_path, const std::string& lambdas_arg,
              const TrainConfig& base, const std::string& md_path,
              const std::string& csv_path) {
  std::vector<double> lambdas;
  std::stringstream ss(lambdas_arg);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) lambdas.push_back(std::stod(item));
  }
  if (lambdas.empty()) throw UsageError("no lambda values given");

  auto records = read_corpus_file(in_path);
  auto rows = sweep_lambda(records, lambdas, base, &std::cerr);
  const std::string md = sweep_table_markdown(rows);
  std::cout << md;
  if (!md_path.empty()) write_file(md_path, md);
  if (!csv_path.empty()) write_file(csv_path, sweep_table_csv(rows));
  return 0;
}

Edit edit_from_files(const std::string& before_path,
                     const std::string& after_path, const std::string& lang) {
  ExtractConfig cfg;
  cfg.lang = lang_from_string(lang);
  return extract_edit(read_file(before_path), read_file(after_path), cfg);
}

int cmd_predict(const std::string& ckpt_path, const std::string& before_path,
                const std::string& after_path, const std::string& lang) {
  EditQualityModel model = EditQualityModel::load(ckpt_path);
  if (model.config().combine_message)
    throw DataError(
        "checkpoint was trained with the message-combination head; predict "
        "has no edit message to feed it");
  Edit edit = edit_from_files(before_path, after_path, lang);
  if (edit.sentences.empty()) throw DataError("no edit between the two files");
  nn::Graph g;
  EncoderOutput enc = model.encode(g, edit);
  nn::Var logp = model.classify(g, enc);
  const auto& classes = model.config().class_names;
  std::size_t best = 0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (logp->val[c] > logp->val[best]) best = c;
    std::cout << classes[c] << "\t" << std::exp(logp->val[c]) << "\n";
  }
  std::cout << "prediction\t" << classes[best] << "\n";
  return 0;
}

int cmd_describe(const std::string& ckpt_path, const std::string& before_path,
                 const std::string& after_path, const std::string& lang,
                 std::size_t beam, std::size_t max_steps) {
  EditQualityModel model = EditQualityModel::load(ckpt_path);
  Edit edit = edit_from_files(before_path, after_path, lang);
  if (edit.sentences.empty()) throw DataError("no edit between the two files");
  const auto message = model.beam_search(
      edit, beam > 0 ? beam : model.config().beam_width,
      max_steps > 0 ? max_steps : model.config().max_steps);
  for (std::size_t i = 0; i < message.size(); ++i)
    std::cout << (i ? " " : "") << message[i];
  std::cout << "\n";
  return 0;
}

int cmd_stats_length(const std::string& dump, const std::string& out_path) {
  std::vector<std::vector<Revision>> pages;
  for_each_page(dump, nullptr,
                [&](std::vector<Revision>&& page) { pages.push_back(std::move(page)); });
  const std::string csv = monthly_lengths_csv(stats_lengths(std::move(pages)));
  if (out_path.empty())
    std::cout << csv;
  else
    write_file(out_path, csv);
  return 0;
}

int cmd_stats_lenacc(const std::string& in_path, const std::string& out_path,
                     const std::string& edges_arg) {
  std::vector<PerExample> pairs;
  std::ifstream in(in_path);
  if (!in) throw DataError("cannot read per-example file: " + in_path);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first && line.find("length") != std::string::npos) {
      first = false;
      continue;
    }
    first = false;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw DataError("bad per-example line: " + line);
    PerExample pe;
    pe.input_length = static_cast<std::size_t>(
        std::stoull(line.substr(0, comma)));
    pe.correct = line.substr(comma + 1) == "1";
    pairs.push_back(pe);
  }
  std::vector<std::size_t> edges;
  if (!edges_arg.empty()) {
    std::stringstream ss(edges_arg);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) edges.push_back(std::stoull(item));
  }
  const std::string csv = length_buckets_csv(stats_len_vs_acc(pairs, edges));
  if (out_path.empty())
    std::cout << csv;
  else
    write_file(out_path, csv);
  return 0;
}

int cmd_diff(const std::string& a_path, const std::string& b_path,
             bool tokens) {
  const std::string a = read_file(a_path), b = read_file(b_path);
  if (tokens) {
    const Alignment al = token_diff(tokenize(a), tokenize(b));
    for (const auto& op : al.ops)
      std::cout << diff_label_char(op.label) << " " << op.token << "\n";
  } else {
    for (const auto& h : line_diff(split_lines(a), split_lines(b))) {
      std::cout << "@@ -" << h.old_start + 1 << "," << h.removed_lines.size()
                << " +" << h.new_start + 1 << "," << h.added_lines.size()
                << " @@\n";
      for (const auto& l : h.removed_lines) std::cout << "- " << l << "\n";
      for (const auto& l : h.added_lines) std::cout << "+ " << l << "\n";
    }
  }
  return 0;
}

// TrainConfig defaults from an optional JSON config file; explicit flags
// override afterwards.
TrainConfig load_train_config(const std::string& path) {
  TrainConfig cfg;
  if (path.empty()) return cfg;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad config file: ") + e.what());
  }
  cfg.lambda = j.value("lambda", cfg.lambda);
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.lr = j.value("lr", cfg.lr);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("loss")) cfg.loss_mode = loss_mode_from_string(j["loss"]);
  if (j.contains("encoder"))
    cfg.encoder = encoder_variant_from_string(j["encoder"]);
  cfg.mean_pool = j.value("mean_pool", cfg.mean_pool);
  cfg.combine_message = j.value("combine_message", cfg.combine_message);
  cfg.patience = j.value("patience", cfg.patience);
  cfg.clip_norm = j.value("clip_norm", cfg.clip_norm);
  cfg.msg_min_freq = j.value("msg_min_freq", cfg.msg_min_freq);
  cfg.d_tok = j.value("d_tok", cfg.d_tok);
  cfg.d_lab = j.value("d_lab", cfg.d_lab);
  cfg.enc_hidden = j.value("enc_hidden", cfg.enc_hidden);
  cfg.dec_hidden = j.value("dec_hidden", cfg.dec_hidden);
  cfg.beam_width = j.value("beam_width", cfg.beam_width);
  cfg.max_steps = j.value("max_steps", cfg.max_steps);
  return cfg;
}

// Applies only the flags the user actually passed on top of config-file
// defaults.
void apply_train_flag_overrides(const CLI::App* cmd, const TrainConfig& flags,
                                TrainConfig& cfg) {
  if (cmd->count("--lambda")) cfg.lambda = flags.lambda;
  if (cmd->count("--epochs")) cfg.epochs = flags.epochs;
  if (cmd->count("--batch-size")) cfg.batch_size = flags.batch_size;
  if (cmd->count("--lr")) cfg.lr = flags.lr;
  if (cmd->count("--seed")) cfg.seed = flags.seed;
  if (cmd->count("--mean-pool")) cfg.mean_pool = flags.mean_pool;
  if (cmd->count("--combine-message"))
    cfg.combine_message = flags.combine_message;
  if (cmd->count("--patience")) cfg.patience = flags.patience;
  if (cmd->count("--clip-norm")) cfg.clip_norm = flags.clip_norm;
  if (cmd->count("--msg-min-freq")) cfg.msg_min_freq = flags.msg_min_freq;
  if (cmd->count("--d-tok")) cfg.d_tok = flags.d_tok;
  if (cmd->count("--d-lab")) cfg.d_lab = flags.d_lab;
  if (cmd->count("--enc-hidden")) cfg.enc_hidden = flags.enc_hidden;
  if (cmd->count("--dec-hidden")) cfg.dec_hidden = flags.dec_hidden;
  if (cmd->count("--beam")) cfg.beam_width = flags.beam_width;
  if (cmd->count("--max-steps")) cfg.max_steps = flags.max_steps;
}

void add_train_flags(CLI::App* cmd, TrainConfig& cfg, std::string& loss,
                     std::string& encoder) {
  cmd->add_option("--lambda", cfg.lambda,
                  "classification loss weight in [0,1]");
  cmd->add_option("--epochs", cfg.epochs, "training epochs");
  cmd->add_option("--batch-size", cfg.batch_size, "gradient accumulation size");
  cmd->add_option("--lr", cfg.lr, "Adam learning rate");
  cmd->add_option("--seed", cfg.seed, "RNG seed");
  cmd->add_option("--loss", loss, "loss mode: kl | ce");
  cmd->add_option("--encoder", encoder,
                  "encoder: edit-sentence | no-tags | regular");
  cmd->add_flag("--mean-pool", cfg.mean_pool, "mean pooling instead of max");
  cmd->add_flag("--combine-message", cfg.combine_message,
                "message-combination classifier baseline");
  cmd->add_option("--patience", cfg.patience, "early-stop patience");
  cmd->add_option("--clip-norm", cfg.clip_norm, "gradient clipping L2 norm");
  cmd->add_option("--msg-min-freq", cfg.msg_min_freq,
                  "message vocab min frequency");
  cmd->add_option("--d-tok", cfg.d_tok, "token embedding dim");
  cmd->add_option("--d-lab", cfg.d_lab, "label embedding dim");
  cmd->add_option("--enc-hidden", cfg.enc_hidden, "encoder hidden per direction");
  cmd->add_option("--dec-hidden", cfg.dec_hidden, "decoder hidden");
  cmd->add_option("--beam", cfg.beam_width, "beam width");
  cmd->add_option("--max-steps", cfg.max_steps, "decoder max steps");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"editgauge: edit-level Wikipedia article quality assessment"};
  app.require_subcommand(1);

  // extract
  std::string dump, out_path, lang = "en";
  double threshold = 0.5;
  std::size_t min_sentences = 1, jobs = 1;
  bool pre_segmented = false;
  auto* extract = app.add_subcommand(
      "extract", "revision pairs -> token-labeled edit records");
  extract->add_option("--dump", dump, "MediaWiki XML export (.xml/.gz/.bz2)")
      ->required();
  extract->add_option("--out", out_path, "output corpus JSONL")->required();
  extract->add_option("--lang", lang, "sentence splitter language: en|de|other");
  extract->add_option("--match-threshold", threshold,
                      "sentence pairing similarity threshold");
  extract->add_option("--min-sentences", min_sentences,
                      "minimum edit-sentences per record");
  extract->add_flag("--pre-segmented", pre_segmented,
                    "treat every line as one sentence");
  extract->add_option("--jobs", jobs, "parallel extraction threads");

  // label
  std::string in_path, wiki = "enwiki", endpoint, cache_dir, model_name =
      "articlequality", classes_arg;
  std::size_t parallel = 4;
  auto* label = app.add_subcommand("label", "fetch ORES quality labels");
  label->add_option("--in", in_path, "input corpus JSONL")->required();
  label->add_option("--out", out_path, "output corpus JSONL")->required();
  label->add_option("--wiki", wiki, "wiki id, e.g. enwiki");
  label->add_option("--endpoint", endpoint, "ORES endpoint URL");
  label->add_option("--ores-cache", cache_dir, "response cache directory")
      ->required();
  label->add_option("--model", model_name, "ORES model name");
  label->add_option("--parallel", parallel, "concurrent fetches");
  label->add_option("--classes", classes_arg,
                    "comma-separated quality classes (default ORES 6-class)");

  // split
  std::uint64_t seed = 1;
  auto* split = app.add_subcommand("split", "assign 70/10/20 splits");
  split->add_option("--in", in_path, "input corpus JSONL")->required();
  split->add_option("--out", out_path, "output corpus JSONL")->required();
  split->add_option("--seed", seed, "shuffle seed");

  // train
  std::string ckpt_path, log_path, config_path, loss_arg, encoder_arg;
  auto* train_cmd = app.add_subcommand("train", "train the joint model");
  train_cmd->add_option("--in", in_path, "corpus JSONL with splits")->required();
  train_cmd->add_option("--checkpoint", ckpt_path, "output checkpoint path")
      ->required();
  train_cmd->add_option("--config", config_path, "JSON config file");
  train_cmd->add_option("--log", log_path, "training log file");
  TrainConfig train_cfg;
  add_train_flags(train_cmd, train_cfg, loss_arg, encoder_arg);

  // eval
  std::string split_arg = "test", report_path, per_example_path;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  eval_cmd->add_option("--in", in_path, "corpus JSONL with splits")->required();
  eval_cmd->add_option("--checkpoint", ckpt_path, "checkpoint path")->required();
  eval_cmd->add_option("--split", split_arg, "train | valid | test | all");
  eval_cmd->add_option("--report", report_path, "write JSON report here");
  eval_cmd->add_option("--per-example", per_example_path,
                       "write per-example length,correct CSV");

  // sweep
  std::string lambdas_arg = "0,0.2,0.5,0.8,0.9,1.0", md_path, csv_path;
  auto* sweep_cmd = app.add_subcommand("sweep", "lambda ablation table");
  sweep_cmd->add_option("--in", in_path, "corpus JSONL with splits")->required();
  sweep_cmd->add_option("--lambdas", lambdas_arg, "comma-separated lambdas");
  sweep_cmd->add_option("--out", md_path, "Markdown table output");
  sweep_cmd->add_option("--csv", csv_path, "CSV table output");
  sweep_cmd->add_option("--config", config_path, "JSON config file");
  TrainConfig sweep_cfg;
  std::string sweep_loss_arg, sweep_encoder_arg;
  add_train_flags(sweep_cmd, sweep_cfg, sweep_loss_arg, sweep_encoder_arg);

  // predict
  std::string before_path, after_path;
  auto* predict = app.add_subcommand(
      "predict", "classify the edit between two revision text files");
  predict->add_option("--checkpoint", ckpt_path, "checkpoint path")->required();
  predict->add_option("--before", before_path, "old revision text file")
      ->required();
  predict->add_option("--after", after_path, "new revision text file")
      ->required();
  predict->add_option("--lang", lang, "sentence splitter language");

  // describe
  std::size_t beam = 0, max_steps = 0;
  auto* describe = app.add_subcommand(
      "describe", "beam-search an edit message for two revision text files");
  describe->add_option("--checkpoint", ckpt_path, "checkpoint path")->required();
  describe->add_option("--before", before_path, "old revision text file")
      ->required();
  describe->add_option("--after", after_path, "new revision text file")
      ->required();
  describe->add_option("--lang", lang, "sentence splitter language");
  describe->add_option("--beam", beam, "beam width (checkpoint default)");
  describe->add_option("--max-steps", max_steps,
                       "decoder max steps (checkpoint default)");

  // stats-length
  auto* stats_len = app.add_subcommand(
      "stats-length", "monthly article/edit length means (CSV)");
  stats_len->add_option("--dump", dump, "MediaWiki XML export")->required();
  stats_len->add_option("--out", out_path, "CSV output (stdout if omitted)");

  // stats-lenacc
  std::string edges_arg;
  auto* stats_acc = app.add_subcommand(
      "stats-lenacc", "accuracy per input-length bucket (CSV)");
  stats_acc->add_option("--in", in_path, "per-example CSV from eval")
      ->required();
  stats_acc->add_option("--out", out_path, "CSV output (stdout if omitted)");
  stats_acc->add_option("--edges", edges_arg, "comma-separated bucket edges");

  // diff
  std::string diff_a, diff_b;
  bool diff_tokens = false;
  auto* diff_cmd = app.add_subcommand("diff", "debug diff of two text files");
  diff_cmd->add_flag("--tokens", diff_tokens, "token-level labeled script");
  diff_cmd->add_option("a", diff_a, "old file")->required();
  diff_cmd->add_option("b", diff_b, "new file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*extract)
      return cmd_extract(dump, out_path, lang, threshold, min_sentences,
                         pre_segmented, jobs);
    if (*label) {
      OresConfig ores;
      ores.wiki = wiki;
      ores.model = model_name;
      ores.cache_dir = cache_dir;
      if (const char* env = std::getenv(kOresEndpointEnv); env && *env)
        ores.endpoint = env;
      if (!endpoint.empty()) ores.endpoint = endpoint;
      if (ores.endpoint.empty()) ores.endpoint = "https://ores.wikimedia.org";
      if (!classes_arg.empty()) {
        ores.class_names.clear();
        std::stringstream ss(classes_arg);
        std::string item;
        while (std::getline(ss, item, ','))
          if (!item.empty()) ores.class_names.push_back(item);
      }
      return cmd_label(in_path, out_path, std::move(ores), parallel);
    }
    if (*split) return cmd_split(in_path, out_path, seed);
    if (*train_cmd) {
      TrainConfig cfg = load_train_config(config_path);
      apply_train_flag_overrides(train_cmd, train_cfg, cfg);
      if (!loss_arg.empty()) cfg.loss_mode = loss_mode_from_string(loss_arg);
      if (!encoder_arg.empty())
        cfg.encoder = encoder_variant_from_string(encoder_arg);
      return cmd_train(in_path, ckpt_path, cfg, log_path);
    }
    if (*eval_cmd)
      return cmd_eval(in_path, ckpt_path, split_arg, report_path,
                      per_example_path);
    if (*sweep_cmd) {
      TrainConfig cfg = load_train_config(config_path);
      apply_train_flag_overrides(sweep_cmd, sweep_cfg, cfg);
      if (!sweep_loss_arg.empty())
        cfg.loss_mode = loss_mode_from_string(sweep_loss_arg);
      if (!sweep_encoder_arg.empty())
        cfg.encoder = encoder_variant_from_string(sweep_encoder_arg);
      return cmd_sweep(in_path, lambdas_arg, cfg, md_path, csv_path);
    }
    if (*predict)
      return cmd_predict(ckpt_path, before_path, after_path, lang);
    if (*describe)
      return cmd_describe(ckpt_path, before_path, after_path, lang, beam,
                          max_steps);
    if (*stats_len) return cmd_stats_length(dump, out_path);
    if (*stats_acc) return cmd_stats_lenacc(in_path, out_path, edges_arg);
    if (*diff_cmd) return cmd_diff(diff_a, diff_b, diff_tokens);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
