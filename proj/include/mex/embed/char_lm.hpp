#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mex/nn/lstm.hpp"
#include "mex/nn/param.hpp"

namespace mex::embed {

enum class Direction { kForward, kBackward };

const char* direction_name(Direction d);

struct CharLmConfig {
  int hidden = 512;
  int tbptt = 256;
  int epochs = 10;
  double lr = 0.005;  // Adam
  double clip = 5.0;
  std::size_t max_alphabet = 512;  // including the unknown symbol
  double held_out = 0.1;
  std::uint64_t seed = 1;
};

struct CharLmStats {
  std::vector<double> train_loss;     // nats per character, per epoch
  std::vector<double> held_out_loss;  // nats per character, per epoch
};

// Character-level LSTM language model. The softmax shares its weights with
// the input character embeddings, so the embedding size equals the state
// size. Index 0 is the unknown character.
class CharLanguageModel {
 public:
  CharLanguageModel() = default;

  // `text` is given in reading order; a backward model reverses it first.
  static CharLanguageModel train(std::u32string_view text, Direction direction,
                                 const CharLmConfig& config, CharLmStats* stats = nullptr);

  Direction direction() const { return direction_; }
  int hidden_size() const { return static_cast<int>(lstm_.hidden_size()); }
  std::size_t alphabet_size() const { return alphabet_.size() + 1; }
  bool trained() const { return !alphabet_.empty(); }

  // Hidden state after each character, reading `text` as given from a
  // zero state. H x |text|.
  nn::Matrix read(std::u32string_view text) const;

  // Mean next-character cross-entropy (nats) over `text` read as given.
  double loss(std::u32string_view text) const;

  void write(BinaryWriter& w) const;
  static CharLanguageModel read_from(BinaryReader& r);

  // Binary file: MEXC container.
  void save(const std::string& path) const;
  static CharLanguageModel load(const std::string& path);

  nn::ParamRefs params() { return {&embedding_, &bias_, lstm_.params()[0], lstm_.params()[1], lstm_.params()[2]}; }

  // Loss and gradients for one chunk starting from the given state, for
  // gradient checking. Gradients accumulate into params().
  double chunk_loss(const std::vector<int>& ids, bool with_grad);

  std::vector<int> encode(std::u32string_view text) const;

 private:
  Direction direction_ = Direction::kForward;
  std::vector<char32_t> alphabet_;
  std::map<char32_t, int> index_;
  nn::Param embedding_;  // V x H
  nn::Param bias_;       // V x 1
  nn::Lstm lstm_;

  double run_chunk(const std::vector<int>& ids, std::size_t begin, std::size_t end, nn::Vector& h,
                   nn::Vector& c, bool with_grad);
};

// Token vectors from a forward and a backward model: forward state after
// the token's last character, backward state after the token's first
// character. The sentence is the tokens joined by single spaces.
nn::Matrix contextual_embed(const CharLanguageModel& fwd, const CharLanguageModel& bwd,
                            const std::vector<std::string>& tokens);

}  // namespace mex::embed
