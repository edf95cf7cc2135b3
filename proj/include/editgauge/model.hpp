#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "editgauge/edit.hpp"
#include "editgauge/nn.hpp"
#include "editgauge/revision.hpp"

namespace editgauge {

struct Vocabulary {
  // Fixed special ids.
  static constexpr std::size_t PAD = 0, UNK = 1, BOS = 2, EOS = 3, SEP = 4,
                               MARK = 5;
  std::vector<std::string> tokens;  // id -> token, specials first
  std::unordered_map<std::string, std::size_t> ids;

  static Vocabulary build(const std::vector<std::vector<std::string>>& seqs,
                          std::size_t min_freq = 1);
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  std::size_t id(const std::string& token) const;  // UNK when absent
  const std::string& token(std::size_t id) const;
  std::size_t size() const { return tokens.size(); }
};

enum class EncoderVariant { edit_sentence, edit_sentence_no_tags, regular };

const char* encoder_variant_name(EncoderVariant v);
EncoderVariant encoder_variant_from_string(const std::string& name);

struct ModelConfig {
  std::size_t d_tok = 64;
  std::size_t d_lab = 8;
  std::size_t enc_hidden = 64;  // per direction
  std::size_t dec_hidden = 128;
  std::vector<std::string> class_names = default_quality_classes();
  EncoderVariant encoder = EncoderVariant::edit_sentence;
  bool mean_pool = false;
  double lambda = 0.9;
  std::size_t beam_width = 5;
  std::size_t max_steps = 30;
  bool combine_message = false;

  std::size_t d_enc() const { return 2 * enc_hidden; }
  std::size_t n_classes() const { return class_names.size(); }
};

// lambda*cls + (1-lambda)*gen; lambda outside [0,1] is an error.
double joint_loss(double cls_loss, double gen_loss, double lambda);

struct EncoderOutput {
  std::vector<nn::Var> states;  // T vectors of d_enc
  nn::Var pooled;
};

// Edit-sentence encoder with quality classifier and attention seq2seq
// message decoder sharing it.
class EditQualityModel {
 public:
  EditQualityModel(ModelConfig cfg, Vocabulary tok_vocab, Vocabulary msg_vocab,
                   std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  const Vocabulary& tok_vocab() const { return tok_vocab_; }
  const Vocabulary& msg_vocab() const { return msg_vocab_; }
  nn::ParamStore& params() { return store_; }
  const nn::ParamStore& params() const { return store_; }

  // Dispatches on cfg.encoder. Throws DataError for an empty edit.
  EncoderOutput encode(nn::Graph& g, const Edit& edit) const;

  nn::Var classify(nn::Graph& g, const EncoderOutput& enc) const;

  // Combination baseline: second BiLSTM over the message, concatenated
  // features, separate classifier head. Requires cfg.combine_message.
  nn::Var classify_combined(nn::Graph& g, const EncoderOutput& enc,
                            const std::vector<std::string>& message) const;

  struct DecodeStep {
    nn::LstmState state;
    nn::Var attn_weights;  // sums to 1 over encoder positions
    nn::Var logprobs;      // over the message vocabulary
  };
  nn::LstmState init_decoder(nn::Graph& g, const EncoderOutput& enc) const;
  DecodeStep decode_step(nn::Graph& g, std::size_t prev_token,
                         const nn::LstmState& state,
                         const std::vector<nn::Var>& enc_states) const;

  // Teacher-forced mean per-token NLL of message + EOS.
  nn::Var generation_loss(nn::Graph& g, const EncoderOutput& enc,
                          const std::vector<std::string>& message) const;

  // Length-normalized beam search; returns message tokens (EOS stripped).
  std::vector<std::string> beam_search(const Edit& edit, std::size_t beam,
                                       std::size_t max_steps) const;
  std::vector<std::string> beam_search(const Edit& edit) const;

  // Checkpoint container: config + vocabularies + parameters + config hash;
  // load rejects a hash mismatch.
  void save(const std::string& path) const;
  static EditQualityModel load(const std::string& path);
  std::string config_hash() const;

 private:
  std::vector<nn::Var> embed_edit(nn::Graph& g, const Edit& edit) const;
  void build_params(std::uint64_t seed);

  ModelConfig cfg_;
  Vocabulary tok_vocab_;
  Vocabulary msg_vocab_;
  nn::ParamStore store_;

  nn::Var e_tok_, e_lab_;
  nn::LstmParams enc_fw_, enc_bw_;
  nn::Var w_cls_, b_cls_;
  nn::Var w_init_, b_init_;
  nn::Var e_msg_;
  nn::LstmParams dec_;
  nn::Var w_att_;
  nn::Var w_comb_, b_comb_;
  nn::Var w_out_, b_out_;
  nn::LstmParams msg_fw_, msg_bw_;  // combine_message only
  nn::Var w_cmb_cls_, b_cmb_cls_;
};

}  // namespace editgauge
