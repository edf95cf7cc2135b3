#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "editgauge/errors.hpp"
#include "editgauge/model.hpp"
#include "editgauge/rng.hpp"

using namespace editgauge;
using namespace editgauge::nn;

namespace {

Vocabulary tiny_tok_vocab() {
  return Vocabulary::build({{"the", "cat", "sat", "big", "mfa", "mstub"}}, 1);
}

Vocabulary tiny_msg_vocab() {
  return Vocabulary::build({{"fix", "typo", "add", "cite"}}, 1);
}

ModelConfig tiny_config(EncoderVariant variant = EncoderVariant::edit_sentence) {
  ModelConfig cfg;
  cfg.d_tok = 6;
  cfg.d_lab = 3;
  cfg.enc_hidden = 5;
  cfg.dec_hidden = 6;
  cfg.encoder = variant;
  cfg.lambda = 0.5;
  return cfg;
}

Edit one_sentence_edit(std::vector<std::string> tokens,
                       std::vector<DiffLabel> labels) {
  Edit e;
  EditSentence es;
  es.tokens = std::move(tokens);
  es.labels = std::move(labels);
  e.sentences.push_back(std::move(es));
  e.n_hunks = 1;
  return e;
}

Edit two_sentence_edit() {
  Edit e = one_sentence_edit({"the", "big", "cat"},
                             {DiffLabel::Keep, DiffLabel::Add, DiffLabel::Keep});
  EditSentence es2;
  es2.tokens = {"sat", "mfa"};
  es2.labels = {DiffLabel::Del, DiffLabel::Add};
  e.sentences.push_back(es2);
  return e;
}

// Greedy reference decoder, independent of beam_search.
std::vector<std::string> greedy_decode(const EditQualityModel& model,
                                       const Edit& edit,
                                       std::size_t max_steps) {
  Graph g;
  EncoderOutput enc = model.encode(g, edit);
  LstmState state = model.init_decoder(g, enc);
  std::size_t prev = Vocabulary::BOS;
  std::vector<std::string> out;
  for (std::size_t step = 0; step < max_steps; ++step) {
    auto ds = model.decode_step(g, prev, state, enc.states);
    std::size_t best = 0;
    for (std::size_t v = 1; v < ds.logprobs->size(); ++v)
      if (ds.logprobs->val[v] > ds.logprobs->val[best]) best = v;
    if (best == Vocabulary::EOS) break;
    out.push_back(model.msg_vocab().token(best));
    prev = best;
    state = ds.state;
  }
  return out;
}

}  // namespace

TEST_CASE("vocabulary ids are dense with specials first") {
  Vocabulary v = tiny_tok_vocab();
  CHECK(v.token(Vocabulary::PAD) == "<pad>");
  CHECK(v.token(Vocabulary::UNK) == "<unk>");
  CHECK(v.token(Vocabulary::SEP) == "<sep>");
  CHECK(v.token(Vocabulary::MARK) == "<mark>");
  CHECK(v.id("never-seen-token") == Vocabulary::UNK);
  CHECK(v.id("cat") >= 6);
  CHECK(v.size() == 6 + 6);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(v.ids.at(v.token(i)) == i);
}

TEST_CASE("vocabulary respects min frequency") {
  Vocabulary v = Vocabulary::build({{"a", "a", "b"}}, 2);
  CHECK(v.id("a") != Vocabulary::UNK);
  CHECK(v.id("b") == Vocabulary::UNK);
}

TEST_CASE("encode_edit single position: pooled equals the only state") {
  EditQualityModel model(tiny_config(), tiny_tok_vocab(), tiny_msg_vocab(), 1);
  Graph g;
  EncoderOutput enc =
      model.encode(g, one_sentence_edit({"cat"}, {DiffLabel::Add}));
  REQUIRE(enc.states.size() == 1);
  CHECK(enc.pooled->size() == 10);
  for (std::size_t i = 0; i < enc.pooled->size(); ++i)
    CHECK(enc.pooled->val[i] == doctest::Approx(enc.states[0]->val[i]));
}

TEST_CASE("encode_edit joins edit-sentences with SEP") {
  EditQualityModel model(tiny_config(), tiny_tok_vocab(), tiny_msg_vocab(), 1);
  Graph g;
  // Lengths 3 and 2 -> sequence length 6 (3 + SEP + 2).
  EncoderOutput enc = model.encode(g, two_sentence_edit());
  CHECK(enc.states.size() == 6);
}

TEST_CASE("encode rejects an empty edit") {
  EditQualityModel model(tiny_config(), tiny_tok_vocab(), tiny_msg_vocab(), 1);
  Graph g;
  CHECK_THROWS_AS(model.encode(g, Edit{}), DataError);
}

TEST_CASE("label embeddings are permutation symmetric") {
  // Swapping E_L rows for Add/Del while swapping the labels fed in gives
  // the identical encoding.
  EditQualityModel a(tiny_config(), tiny_tok_vocab(), tiny_msg_vocab(), 3);
  EditQualityModel b(tiny_config(), tiny_tok_vocab(), tiny_msg_vocab(), 3);
  Var e_lab = b.params().get("e_lab");
  for (std::size_t c = 0; c < e_lab->cols; ++c)
    std::swap(e_lab->at(1, c), e_lab->at(2, c));  // rows: keep, add, del

  const Edit edit_a = one_sentence_edit(
      {"the", "cat", "sat"}, {DiffLabel::Keep, DiffLabel::Add, DiffLabel::Del});
  const Edit edit_b = one_sentence_edit(
      {"the", "cat", "sat"}, {DiffLabel::Keep, DiffLabel::Del, DiffLabel::Add});

  Graph ga, gb;
  EncoderOutput ea = a.encode(ga, edit_a);
  EncoderOutput eb = b.encode(gb, edit_b);
  for (std::size_t i = 0; i < ea.pooled->size(); ++i)
    CHECK(ea.pooled->val[i] == doctest::Approx(eb.pooled->val[i]).epsilon(1e-12));
}

TEST_CASE("regular encoder builds s- MARK s+ sequences") {
  EditQualityModel model(tiny_config(EncoderVariant::regular), tiny_tok_vocab(),
                         tiny_msg_vocab(), 1);
  Graph g;
  // ("a b" -> "a c") as alignment: a=, b-, c+  gives [a, b, MARK, a, c].
  EncoderOutput enc = model.encode(
      g, one_sentence_edit({"the", "cat", "big"},
                           {DiffLabel::Keep, DiffLabel::Del, DiffLabel::Add}));
  CHECK(enc.states.size() == 5);

  // Full addition: [MARK, x].
  EncoderOutput enc2 =
      model.encode(g, one_sentence_edit({"big"}, {DiffLabel::Add}));
  CHECK(enc2.states.size() == 2);
}

TEST_CASE("encoder variants disagree where labels are informative") {
  EditQualityModel tagged(tiny_config(), tiny_tok_vocab(), tiny_msg_vocab(), 4);
  EditQualityModel no_tags(tiny_config(EncoderVariant::edit_sentence_no_tags),
                           tiny_tok_vocab(), tiny_msg_vocab(), 4);
  EditQualityModel regular(tiny_config(EncoderVariant::regular),
                           tiny_tok_vocab(), tiny_msg_vocab(), 4);
  const Edit edit = one_sentence_edit(
      {"the", "cat"}, {DiffLabel::Add, DiffLabel::Del});
  Graph g1, g2, g3;
  const auto p1 = tagged.encode(g1, edit).pooled;
  const auto p2 = no_tags.encode(g2, edit).pooled;
  const auto p3 = regular.encode(g3, edit).pooled;
  auto differs = [](const Var& a, const Var& b) {
    if (a->size() != b->size()) return true;
    for (std::size_t i = 0; i < a->size(); ++i)
      if (std::abs(a->val[i] - b->val[i]) > 1e-9) return true;
    return false;
  };
  CHECK(differs(p1, p2));
  CHECK(differs(p1, p3));
}

TEST_CASE("classify with zero weights is uniform") {
  EditQualityModel model(tiny_config(), tiny_tok_vocab(), tiny_msg_vocab(), 1);
  Var w = model.params().get("w_cls");
  std::fill(w->val.begin(), w->val.end(), 0.0);
  Graph g;
  Var logp = model.classify(
      g, model.encode(g, one_sentence_edit({"cat"}, {DiffLabel::Add})));
  for (std::size_t c = 0; c < 6; ++c)
    CHECK(logp->val[c] == doctest::Approx(-std::log(6.0)).epsilon(1e-9));
}

TEST_CASE("classify output exponentiates to a distribution") {
  EditQualityModel model(tiny_config(), tiny_tok_vocab(), tiny_msg_vocab(), 7);
  Graph g;
  Var logp = model.classify(
      g, model.encode(g, two_sentence_edit()));
  double sum = 0;
  for (double v : logp->val) sum += std::exp(v);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("decode_step attention over a single state is [1.0]") {
  EditQualityModel model(tiny_config(), tiny_tok_vocab(), tiny_msg_vocab(), 1);
  Graph g;
  EncoderOutput enc =
      model.encode(g, one_sentence_edit({"cat"}, {DiffLabel::Add}));
  auto step = model.decode_step(g, Vocabulary::BOS,
                                model.init_decoder(g, enc), enc.states);
  REQUIRE(step.attn_weights->size() == 1);
  CHECK(step.attn_weights->val[0] == doctest::Approx(1.0));
}

TEST_CASE("decode_step attention weights always sum to 1") {
  EditQualityModel model(tiny_config(), tiny_tok_vocab(), tiny_msg_vocab(), 8);
  Graph g;
  EncoderOutput enc = model.encode(g, two_sentence_edit());
  LstmState state = model.init_decoder(g, enc);
  std::size_t prev = Vocabulary::BOS;
  for (int step = 0; step < 4; ++step) {
    auto ds = model.decode_step(g, prev, state, enc.states);
    double sum = 0;
    for (double w : ds.attn_weights->val) {
      CHECK(w >= 0.0);
      sum += w;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    state = ds.state;
    prev = (prev + 1) % model.msg_vocab().size();
  }
}

TEST_CASE("joint_loss is the lambda-weighted combination") {
  CHECK(joint_loss(2.0, 4.0, 1.0) == doctest::Approx(2.0));
  CHECK(joint_loss(2.0, 4.0, 0.0) == doctest::Approx(4.0));
  CHECK(joint_loss(2.0, 4.0, 0.5) == doctest::Approx(3.0));
  CHECK_THROWS_AS(joint_loss(1.0, 1.0, 1.5), UsageError);
  CHECK_THROWS_AS(joint_loss(1.0, 1.0, -0.1), UsageError);
  // Exactly linear in lambda.
  Rng rng(11);
  for (int it = 0; it < 50; ++it) {
    const double cls = rng.symmetric(3.0), gen = rng.symmetric(3.0);
    const double l1 = rng.uniform(), l2 = rng.uniform();
    const double mid = joint_loss(cls, gen, 0.5 * (l1 + l2));
    const double avg =
        0.5 * (joint_loss(cls, gen, l1) + joint_loss(cls, gen, l2));
    CHECK(mid == doctest::Approx(avg).epsilon(1e-12));
  }
}

TEST_CASE("generation loss through attention is grad-correct") {
  EditQualityModel model(tiny_config(), tiny_tok_vocab(), tiny_msg_vocab(), 5);
  const Edit edit = one_sentence_edit(
      {"the", "cat"}, {DiffLabel::Keep, DiffLabel::Add});
  const std::vector<std::string> msg = {"fix", "typo"};
  auto f = [&](Graph& g) {
    return model.generation_loss(g, model.encode(g, edit), msg);
  };
  std::vector<Var> checked = {
      model.params().get("w_att"), model.params().get("w_comb"),
      model.params().get("dec.w"), model.params().get("w_init"),
      model.params().get("e_msg"), model.params().get("w_out")};
  CHECK(grad_check(f, checked, 1e-5, 16) < 1e-4);
}

TEST_CASE("beam width 1 equals greedy decoding") {
  Rng rng(21);
  for (int it = 0; it < 25; ++it) {
    EditQualityModel model(tiny_config(), tiny_tok_vocab(), tiny_msg_vocab(),
                           rng.bits());
    const Edit edit = two_sentence_edit();
    CHECK(model.beam_search(edit, 1, 6) == greedy_decode(model, edit, 6));
  }
}

TEST_CASE("beam search respects max_steps") {
  EditQualityModel model(tiny_config(), tiny_tok_vocab(), tiny_msg_vocab(), 9);
  const Edit edit = two_sentence_edit();
  CHECK(model.beam_search(edit, 3, 1).size() <= 1);
  CHECK_THROWS_AS(model.beam_search(edit, 0, 5), UsageError);
}

TEST_CASE("beam search is reproducible") {
  EditQualityModel model(tiny_config(), tiny_tok_vocab(), tiny_msg_vocab(), 31);
  const Edit edit = two_sentence_edit();
  CHECK(model.beam_search(edit, 4, 8) == model.beam_search(edit, 4, 8));
}

TEST_CASE("message combination baseline") {
  ModelConfig cfg = tiny_config();
  cfg.combine_message = true;
  EditQualityModel model(cfg, tiny_tok_vocab(), tiny_msg_vocab(), 13);
  const Edit edit = two_sentence_edit();

  Graph g;
  EncoderOutput enc = model.encode(g, edit);
  Var logp = model.classify_combined(g, enc, {"fix", "typo"});
  CHECK(logp->size() == 6);
  double sum = 0;
  for (double v : logp->val) sum += std::exp(v);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(model.classify_combined(g, enc, {}), DataError);

  // Classifier over combined features is grad-correct.
  auto f = [&](Graph& g2) {
    Var lp = model.classify_combined(g2, model.encode(g2, edit), {"fix"});
    return g2.nll(lp, 2);
  };
  std::vector<Var> checked = {model.params().get("w_cmb_cls"),
                              model.params().get("msg_fw.w"),
                              model.params().get("enc_fw.w")};
  CHECK(grad_check(f, checked, 1e-5, 16) < 1e-4);
}

TEST_CASE("combination head is absent unless configured") {
  EditQualityModel model(tiny_config(), tiny_tok_vocab(), tiny_msg_vocab(), 1);
  Graph g;
  EncoderOutput enc =
      model.encode(g, one_sentence_edit({"cat"}, {DiffLabel::Add}));
  CHECK_THROWS_AS(model.classify_combined(g, enc, {"fix"}), UsageError);
}

TEST_CASE("shared encoder receives gradients from both losses") {
  EditQualityModel model(tiny_config(), tiny_tok_vocab(), tiny_msg_vocab(), 17);
  const Edit edit = two_sentence_edit();
  const std::vector<std::string> msg = {"fix", "typo"};
  Var enc_w = model.params().get("enc_fw.w");

  auto grad_norm_from = [&](bool cls_only) {
    for (auto& p : model.params().all())
      std::fill(p->grad.begin(), p->grad.end(), 0.0);
    Graph g;
    EncoderOutput enc = model.encode(g, edit);
    Var loss;
    if (cls_only)
      loss = g.kl_div(model.classify(g, enc),
                      {0.1, 0.1, 0.2, 0.2, 0.2, 0.2});
    else
      loss = model.generation_loss(g, enc, msg);
    g.backward(loss);
    double n = 0;
    for (double v : enc_w->grad) n += v * v;
    return std::sqrt(n);
  };

  CHECK(grad_norm_from(true) > 1e-8);
  CHECK(grad_norm_from(false) > 1e-8);
}

TEST_CASE("full model gradient check at toy dimensions") {
  ModelConfig cfg;
  cfg.d_tok = 4;
  cfg.d_lab = 2;
  cfg.enc_hidden = 3;
  cfg.dec_hidden = 4;
  EditQualityModel model(cfg, tiny_tok_vocab(), tiny_msg_vocab(), 23);
  const Edit edit = two_sentence_edit();
  const std::vector<std::string> msg = {"fix", "typo"};

  auto f = [&](Graph& g) {
    EncoderOutput enc = model.encode(g, edit);
    Var cls = g.kl_div(model.classify(g, enc),
                       {0.05, 0.05, 0.1, 0.2, 0.3, 0.3});
    Var gen = model.generation_loss(g, enc, msg);
    return g.add_scaled(cls, 0.7, gen, 0.3);
  };
  CHECK(grad_check(f, model.params().all(), 1e-5, 8) < 1e-4);
}

TEST_CASE("checkpoint save/load round-trip") {
  const std::string path = "/tmp/editgauge_ckpt_test.json";
  ModelConfig cfg = tiny_config();
  cfg.lambda = 0.8;
  EditQualityModel model(cfg, tiny_tok_vocab(), tiny_msg_vocab(), 29);
  model.save(path);

  EditQualityModel loaded = EditQualityModel::load(path);
  CHECK(loaded.config().lambda == 0.8);
  CHECK(loaded.config_hash() == model.config_hash());
  CHECK(loaded.tok_vocab().tokens == model.tok_vocab().tokens);
  for (std::size_t i = 0; i < model.params().all().size(); ++i)
    CHECK(loaded.params().all()[i]->val == model.params().all()[i]->val);

  // Same edit, same outputs.
  const Edit edit = two_sentence_edit();
  Graph g1, g2;
  const auto p1 = model.classify(g1, model.encode(g1, edit));
  const auto p2 = loaded.classify(g2, loaded.encode(g2, edit));
  CHECK(p1->val == p2->val);
}

TEST_CASE("checkpoint load rejects a tampered config hash") {
  const std::string path = "/tmp/editgauge_ckpt_tamper.json";
  EditQualityModel model(tiny_config(), tiny_tok_vocab(), tiny_msg_vocab(), 29);
  model.save(path);

  std::ifstream in(path);
  std::string body((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  in.close();
  // Flip the stored lambda without updating the hash.
  const auto at = body.find("\"lambda\":0.5");
  REQUIRE(at != std::string::npos);
  body.replace(at, 12, "\"lambda\":0.9");
  std::ofstream out(path);
  out << body;
  out.close();

  CHECK_THROWS_AS(EditQualityModel::load(path), DataError);
}
