#include "editgauge/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "editgauge/errors.hpp"
#include "json.hpp"

using nlohmann::json;

namespace editgauge {

namespace {

const char* kSpecials[] = {"<pad>", "<unk>", "<s>", "</s>", "<sep>", "<mark>"};

// Label channel rows of E_L.
std::size_t label_row(DiffLabel l) {
  switch (l) {
    case DiffLabel::Keep: return 0;
    case DiffLabel::Add: return 1;
    case DiffLabel::Del: return 2;
  }
  return 0;
}

}  // namespace

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& seqs,
                             std::size_t min_freq) {
  // Deterministic id assignment: sorted by (-count, token).
  std::map<std::string, std::size_t> counts;
  for (const auto& seq : seqs)
    for (const auto& tok : seq) ++counts[tok];
  std::vector<std::pair<std::string, std::size_t>> entries(counts.begin(),
                                                           counts.end());
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });
  Vocabulary v;
  for (const char* s : kSpecials) v.tokens.emplace_back(s);
  for (const auto& [tok, n] : entries) {
    if (n < min_freq) continue;
    if (std::find(std::begin(kSpecials), std::end(kSpecials), tok) !=
        std::end(kSpecials))
      continue;
    v.tokens.push_back(tok);
  }
  for (std::size_t i = 0; i < v.tokens.size(); ++i) v.ids[v.tokens[i]] = i;
  return v;
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  Vocabulary v;
  v.tokens = std::move(tokens);
  for (std::size_t i = 0; i < v.tokens.size(); ++i) v.ids[v.tokens[i]] = i;
  return v;
}

std::size_t Vocabulary::id(const std::string& token) const {
  auto it = ids.find(token);
  return it == ids.end() ? UNK : it->second;
}

const std::string& Vocabulary::token(std::size_t id) const {
  return tokens.at(id);
}

const char* encoder_variant_name(EncoderVariant v) {
  switch (v) {
    case EncoderVariant::edit_sentence: return "edit-sentence";
    case EncoderVariant::edit_sentence_no_tags: return "no-tags";
    case EncoderVariant::regular: return "regular";
  }
  return "?";
}

EncoderVariant encoder_variant_from_string(const std::string& name) {
  if (name == "edit-sentence") return EncoderVariant::edit_sentence;
  if (name == "no-tags") return EncoderVariant::edit_sentence_no_tags;
  if (name == "regular") return EncoderVariant::regular;
  throw UsageError("unknown encoder variant: " + name);
}

double joint_loss(double cls_loss, double gen_loss, double lambda) {
  if (lambda < 0.0 || lambda > 1.0)
    throw UsageError("lambda must be in [0,1], got " + std::to_string(lambda));
  return lambda * cls_loss + (1.0 - lambda) * gen_loss;
}

EditQualityModel::EditQualityModel(ModelConfig cfg, Vocabulary tok_vocab,
                                   Vocabulary msg_vocab, std::uint64_t seed)
    : cfg_(std::move(cfg)),
      tok_vocab_(std::move(tok_vocab)),
      msg_vocab_(std::move(msg_vocab)) {
  build_params(seed);
}

void EditQualityModel::build_params(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t d_in = cfg_.d_tok + cfg_.d_lab;

  e_tok_ = store_.add("e_tok", tok_vocab_.size(), cfg_.d_tok);
  nn::init_uniform(e_tok_, rng, 0.1);
  e_lab_ = store_.add("e_lab", 3, cfg_.d_lab);
  nn::init_uniform(e_lab_, rng, 0.1);

  enc_fw_ = nn::make_lstm(store_, "enc_fw", d_in, cfg_.enc_hidden, rng);
  enc_bw_ = nn::make_lstm(store_, "enc_bw", d_in, cfg_.enc_hidden, rng);

  w_cls_ = store_.add("w_cls", cfg_.n_classes(), cfg_.d_enc());
  nn::init_fanin(w_cls_, rng);
  b_cls_ = store_.add("b_cls", cfg_.n_classes(), 1);

  w_init_ = store_.add("w_init", cfg_.dec_hidden, cfg_.d_enc());
  nn::init_fanin(w_init_, rng);
  b_init_ = store_.add("b_init", cfg_.dec_hidden, 1);

  e_msg_ = store_.add("e_msg", msg_vocab_.size(), cfg_.d_tok);
  nn::init_uniform(e_msg_, rng, 0.1);
  dec_ = nn::make_lstm(store_, "dec", cfg_.d_tok, cfg_.dec_hidden, rng);

  w_att_ = store_.add("w_att", cfg_.d_enc(), cfg_.dec_hidden);
  nn::init_fanin(w_att_, rng);
  w_comb_ = store_.add("w_comb", cfg_.dec_hidden,
                       cfg_.dec_hidden + cfg_.d_enc());
  nn::init_fanin(w_comb_, rng);
  b_comb_ = store_.add("b_comb", cfg_.dec_hidden, 1);
  w_out_ = store_.add("w_out", msg_vocab_.size(), cfg_.dec_hidden);
  nn::init_fanin(w_out_, rng);
  b_out_ = store_.add("b_out", msg_vocab_.size(), 1);

  if (cfg_.combine_message) {
    msg_fw_ = nn::make_lstm(store_, "msg_fw", cfg_.d_tok, cfg_.enc_hidden, rng);
    msg_bw_ = nn::make_lstm(store_, "msg_bw", cfg_.d_tok, cfg_.enc_hidden, rng);
    w_cmb_cls_ = store_.add("w_cmb_cls", cfg_.n_classes(), 2 * cfg_.d_enc());
    nn::init_fanin(w_cmb_cls_, rng);
    b_cmb_cls_ = store_.add("b_cmb_cls", cfg_.n_classes(), 1);
  }
}

std::vector<nn::Var> EditQualityModel::embed_edit(nn::Graph& g,
                                                  const Edit& edit) const {
  if (edit.sentences.empty())
    throw DataError("cannot encode an edit with no edit-sentences");

  // Token/label id sequence per encoder variant.
  std::vector<std::pair<std::size_t, std::optional<std::size_t>>> seq;
  const bool tags = cfg_.encoder == EncoderVariant::edit_sentence;
  if (cfg_.encoder == EncoderVariant::regular) {
    for (std::size_t si = 0; si < edit.sentences.size(); ++si) {
      if (si > 0) seq.emplace_back(Vocabulary::SEP, std::nullopt);
      const auto& es = edit.sentences[si];
      for (const auto& tok : es.before_tokens())
        seq.emplace_back(tok_vocab_.id(tok), std::nullopt);
      seq.emplace_back(Vocabulary::MARK, std::nullopt);
      for (const auto& tok : es.after_tokens())
        seq.emplace_back(tok_vocab_.id(tok), std::nullopt);
    }
  } else {
    for (std::size_t si = 0; si < edit.sentences.size(); ++si) {
      if (si > 0)
        seq.emplace_back(Vocabulary::SEP,
                         tags ? std::optional<std::size_t>{label_row(
                                    DiffLabel::Keep)}
                              : std::nullopt);
      const auto& es = edit.sentences[si];
      for (std::size_t i = 0; i < es.tokens.size(); ++i)
        seq.emplace_back(tok_vocab_.id(es.tokens[i]),
                         tags ? std::optional<std::size_t>{label_row(
                                    es.labels[i])}
                              : std::nullopt);
    }
  }

  std::vector<nn::Var> inputs;
  inputs.reserve(seq.size());
  for (const auto& [tok_id, lab] : seq) {
    nn::Var t = g.row(e_tok_, tok_id);
    nn::Var l = lab ? g.row(e_lab_, *lab) : g.zeros(cfg_.d_lab);
    inputs.push_back(g.concat(t, l));
  }
  return inputs;
}

EncoderOutput EditQualityModel::encode(nn::Graph& g, const Edit& edit) const {
  EncoderOutput out;
  out.states = nn::run_bilstm(g, enc_fw_, enc_bw_, embed_edit(g, edit));
  out.pooled = cfg_.mean_pool ? g.mean_over_time(out.states)
                              : g.max_over_time(out.states);
  return out;
}

nn::Var EditQualityModel::classify(nn::Graph& g,
                                   const EncoderOutput& enc) const {
  return g.log_softmax(g.affine(w_cls_, enc.pooled, b_cls_));
}

nn::Var EditQualityModel::classify_combined(
    nn::Graph& g, const EncoderOutput& enc,
    const std::vector<std::string>& message) const {
  if (!cfg_.combine_message)
    throw UsageError("model was built without the message-combination head");
  if (message.empty()) throw DataError("cannot combine an empty message");
  std::vector<nn::Var> inputs;
  inputs.reserve(message.size());
  for (const auto& tok : message)
    inputs.push_back(g.row(e_msg_, msg_vocab_.id(tok)));
  auto states = nn::run_bilstm(g, msg_fw_, msg_bw_, inputs);
  nn::Var msg_pooled = cfg_.mean_pool ? g.mean_over_time(states)
                                      : g.max_over_time(states);
  nn::Var combined = g.concat(enc.pooled, msg_pooled);
  return g.log_softmax(g.affine(w_cmb_cls_, combined, b_cmb_cls_));
}

nn::LstmState EditQualityModel::init_decoder(nn::Graph& g,
                                             const EncoderOutput& enc) const {
  nn::Var h0 = g.tanh_(g.affine(w_init_, enc.pooled, b_init_));
  return {h0, g.zeros(cfg_.dec_hidden)};
}

EditQualityModel::DecodeStep EditQualityModel::decode_step(
    nn::Graph& g, std::size_t prev_token, const nn::LstmState& state,
    const std::vector<nn::Var>& enc_states) const {
  if (enc_states.empty()) throw DataError("decode_step: no encoder states");
  nn::Var x = g.row(e_msg_, prev_token);
  nn::LstmState next = nn::lstm_cell(g, dec_, x, state);

  // Luong general score: enc_s . (W_att h)
  nn::Var query = g.matvec(w_att_, next.h);
  std::vector<nn::Var> scores;
  scores.reserve(enc_states.size());
  for (const auto& s : enc_states) scores.push_back(g.dot(s, query));
  nn::Var attn = g.softmax(g.gather_scalars(scores));
  nn::Var context = g.weighted_sum(attn, enc_states);

  nn::Var attn_h =
      g.tanh_(g.affine(w_comb_, g.concat(next.h, context), b_comb_));
  nn::Var logprobs = g.log_softmax(g.affine(w_out_, attn_h, b_out_));
  return {next, attn, logprobs};
}

nn::Var EditQualityModel::generation_loss(
    nn::Graph& g, const EncoderOutput& enc,
    const std::vector<std::string>& message) const {
  if (message.empty()) throw DataError("generation loss on empty message");
  std::vector<std::size_t> targets;
  targets.reserve(message.size() + 1);
  for (const auto& tok : message) targets.push_back(msg_vocab_.id(tok));
  targets.push_back(Vocabulary::EOS);

  nn::LstmState state = init_decoder(g, enc);
  std::size_t prev = Vocabulary::BOS;
  std::vector<nn::Var> losses;
  losses.reserve(targets.size());
  for (std::size_t tgt : targets) {
    DecodeStep step = decode_step(g, prev, state, enc.states);
    losses.push_back(g.nll(step.logprobs, tgt));
    state = step.state;
    prev = tgt;  // teacher forcing
  }
  nn::Var total = losses[0];
  for (std::size_t i = 1; i < losses.size(); ++i)
    total = g.add(total, losses[i]);
  return g.scale(total, 1.0 / static_cast<double>(losses.size()));
}

namespace {

struct Hypothesis {
  std::vector<std::size_t> ids;  // emitted tokens, EOS included when finished
  double logprob_sum = 0.0;
  nn::LstmState state;
  bool finished = false;

  double score() const {
    return ids.empty() ? 0.0
                       : logprob_sum / static_cast<double>(ids.size());
  }
};

bool better(const Hypothesis& a, const Hypothesis& b) {
  if (a.score() != b.score()) return a.score() > b.score();
  return a.ids < b.ids;  // deterministic tie-break by token ids
}

}  // namespace

std::vector<std::string> EditQualityModel::beam_search(
    const Edit& edit, std::size_t beam, std::size_t max_steps) const {
  if (beam < 1 || max_steps < 1)
    throw UsageError("beam search needs beam >= 1 and max_steps >= 1");

  nn::Graph g;
  EncoderOutput enc = encode(g, edit);

  std::vector<Hypothesis> live(1);
  live[0].state = init_decoder(g, enc);
  std::vector<Hypothesis> finished;

  for (std::size_t step = 0; step < max_steps && !live.empty(); ++step) {
    std::vector<Hypothesis> cands;
    for (const auto& hyp : live) {
      const std::size_t prev = hyp.ids.empty() ? Vocabulary::BOS : hyp.ids.back();
      DecodeStep out = decode_step(g, prev, hyp.state, enc.states);
      for (std::size_t v = 0; v < msg_vocab_.size(); ++v) {
        Hypothesis next = hyp;
        next.ids.push_back(v);
        next.logprob_sum += out.logprobs->val[v];
        next.state = out.state;
        next.finished = (v == Vocabulary::EOS);
        cands.push_back(std::move(next));
      }
    }
    std::sort(cands.begin(), cands.end(), better);
    if (cands.size() > beam) cands.resize(beam);
    live.clear();
    for (auto& c : cands) {
      if (c.finished)
        finished.push_back(std::move(c));
      else
        live.push_back(std::move(c));
    }
  }

  const std::vector<Hypothesis>& pool = finished.empty() ? live : finished;
  if (pool.empty()) return {};
  const Hypothesis* best = &pool[0];
  for (const auto& h : pool)
    if (better(h, *best)) best = &h;

  std::vector<std::string> out;
  for (std::size_t id : best->ids)
    if (id != Vocabulary::EOS) out.push_back(msg_vocab_.token(id));
  return out;
}

std::vector<std::string> EditQualityModel::beam_search(const Edit& edit) const {
  return beam_search(edit, cfg_.beam_width, cfg_.max_steps);
}

namespace {

json config_to_json(const ModelConfig& c) {
  return {{"d_tok", c.d_tok},
          {"d_lab", c.d_lab},
          {"enc_hidden", c.enc_hidden},
          {"dec_hidden", c.dec_hidden},
          {"class_names", c.class_names},
          {"encoder", encoder_variant_name(c.encoder)},
          {"mean_pool", c.mean_pool},
          {"lambda", c.lambda},
          {"beam_width", c.beam_width},
          {"max_steps", c.max_steps},
          {"combine_message", c.combine_message}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.d_tok = j.at("d_tok").get<std::size_t>();
  c.d_lab = j.at("d_lab").get<std::size_t>();
  c.enc_hidden = j.at("enc_hidden").get<std::size_t>();
  c.dec_hidden = j.at("dec_hidden").get<std::size_t>();
  c.class_names = j.at("class_names").get<std::vector<std::string>>();
  c.encoder = encoder_variant_from_string(j.at("encoder").get<std::string>());
  c.mean_pool = j.at("mean_pool").get<bool>();
  c.lambda = j.at("lambda").get<double>();
  c.beam_width = j.at("beam_width").get<std::size_t>();
  c.max_steps = j.at("max_steps").get<std::size_t>();
  c.combine_message = j.at("combine_message").get<bool>();
  return c;
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

}  // namespace

std::string EditQualityModel::config_hash() const {
  json j = {{"config", config_to_json(cfg_)},
            {"tok_vocab", tok_vocab_.tokens},
            {"msg_vocab", msg_vocab_.tokens}};
  return fnv1a_hex(j.dump());
}

void EditQualityModel::save(const std::string& path) const {
  json params = json::array();
  for (const auto& p : store_.all())
    params.push_back({{"name", p->name},
                      {"rows", p->rows},
                      {"cols", p->cols},
                      {"val", p->val}});
  json j = {{"format_version", 1},
            {"config", config_to_json(cfg_)},
            {"tok_vocab", tok_vocab_.tokens},
            {"msg_vocab", msg_vocab_.tokens},
            {"config_hash", config_hash()},
            {"params", std::move(params)}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out << j.dump();
}

EditQualityModel EditQualityModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read checkpoint: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad checkpoint: ") + e.what());
  }
  if (j.value("format_version", 0) != 1)
    throw DataError("unsupported checkpoint format version");

  EditQualityModel model(
      config_from_json(j.at("config")),
      Vocabulary::from_tokens(j.at("tok_vocab").get<std::vector<std::string>>()),
      Vocabulary::from_tokens(j.at("msg_vocab").get<std::vector<std::string>>()),
      /*seed=*/0);
  if (model.config_hash() != j.at("config_hash").get<std::string>())
    throw DataError("checkpoint config hash mismatch: " + path);

  std::size_t loaded = 0;
  for (const auto& pj : j.at("params")) {
    const std::string name = pj.at("name").get<std::string>();
    if (!model.store_.has(name))
      throw DataError("checkpoint has unknown parameter: " + name);
    nn::Var p = model.store_.get(name);
    if (p->rows != pj.at("rows").get<std::size_t>() ||
        p->cols != pj.at("cols").get<std::size_t>())
      throw DataError("checkpoint shape mismatch for parameter: " + name);
    p->val = pj.at("val").get<std::vector<double>>();
    if (p->val.size() != p->size())
      throw DataError("checkpoint value size mismatch for parameter: " + name);
    ++loaded;
  }
  if (loaded != model.store_.all().size())
    throw DataError("checkpoint is missing parameters");
  return model;
}

}  // namespace editgauge
