#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mex/corpus/conll.hpp"
#include "mex/corpus/document.hpp"
#include "mex/embed/stack.hpp"
#include "mex/nn/lstm.hpp"
#include "mex/tagger/labels.hpp"

namespace mex::tagger {

struct TaggedSentence {
  std::vector<std::string> tokens;
  std::vector<std::string> labels;
};

// One sentence per document sentence, labelled with gold POS or with
// concept tags. Concept spans must not overlap (normalize first).
std::vector<TaggedSentence> tagged_sentences(const std::vector<corpus::AnnotatedDocument>& docs,
                                             TaggerTask task,
                                             corpus::TagScheme scheme = corpus::TagScheme::kBIOES);
std::vector<TaggedSentence> tagged_sentences(const std::vector<corpus::ConllDocument>& docs,
                                             TaggerTask task);

struct TaggerConfig {
  TaggerTask task = TaggerTask::kConcepts;
  corpus::TagScheme scheme = corpus::TagScheme::kBIOES;
  int hidden = 256;  // per direction
  int max_epochs = 100;
  int batch_size = 32;
  double lr = 0.1;
  double anneal_factor = 0.5;
  int patience = 3;
  double min_lr = 1e-3;
  double clip = 5.0;
  double locked_dropout = 0.5;
  double word_dropout = 0.05;
  std::uint64_t seed = 1;
  std::string log_path;  // per-epoch lines are appended when set

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double dev_score = 0.0;  // accuracy (POS) or strict micro F1 (concepts)
  bool best = false;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;  // 0: the initial model was kept
  double best_dev = 0.0;
  std::vector<std::string> warnings;
};

struct SpanPrediction {
  corpus::TokenSpan span;
  double confidence = 0.0;  // mean marginal of the decoded labels
};

// BiLSTM encoder, linear emissions and a CRF over frozen stacked
// embeddings. The model keeps the pooled-embedding memory built while
// reading its training data; every prediction run starts from a copy.
class TaggerModel {
 public:
  TaggerModel() = default;
  TaggerModel(std::shared_ptr<const embed::EmbeddingStack> stack, LabelVocab labels, TaggerTask task,
              corpus::TagScheme scheme, int hidden, Rng& rng);

  TaggerTask task() const { return task_; }
  corpus::TagScheme scheme() const { return scheme_; }
  const LabelVocab& labels() const { return labels_; }
  const embed::EmbeddingStack& stack() const { return *stack_; }
  std::shared_ptr<const embed::EmbeddingStack> stack_ptr() const { return stack_; }
  int hidden() const { return static_cast<int>(fwd_.hidden_size()); }
  const nn::Matrix& transitions() const { return transitions_.value; }

  embed::StackState fresh_state() const { return memory_; }
  void set_memory(embed::StackState memory) { memory_ = std::move(memory); }

  // Per-dimension standardization of the features, fitted on the training
  // tokens. Identity until fitted.
  void fit_standardization(const std::vector<nn::Matrix>& features);
  nn::Matrix standardize(const nn::Matrix& features) const;

  // L x T emission scores for a D x T feature matrix (no dropout).
  nn::Matrix emissions(const nn::Matrix& features) const;

  // Viterbi labels; empty input gives empty output.
  std::vector<std::string> predict_labels(const nn::Matrix& features) const;
  std::vector<std::string> predict_labels(const std::vector<std::string>& tokens,
                                          embed::StackState& state) const;

  // Concept spans with confidences, after BIOES repair.
  std::vector<SpanPrediction> predict_spans(const nn::Matrix& features) const;
  std::vector<SpanPrediction> predict_spans(const std::vector<std::string>& tokens,
                                            embed::StackState& state) const;

  // CRF loss of one sentence; accumulates gradients scaled by `weight`.
  // With `dropout` set, applies word and locked dropout drawn from it.
  double loss(const nn::Matrix& features, const std::vector<std::size_t>& gold, double weight,
              Rng* dropout, double word_dropout, double locked_dropout);

  nn::ParamRefs params();

  // Model and embedding stack, self-contained.
  void write(BinaryWriter& w) const;
  static TaggerModel read_from(BinaryReader& r);

 private:
  std::shared_ptr<const embed::EmbeddingStack> stack_;
  embed::StackState memory_;
  nn::Vector mean_, inv_std_;
  LabelVocab labels_;
  TaggerTask task_ = TaggerTask::kConcepts;
  corpus::TagScheme scheme_ = corpus::TagScheme::kBIOES;
  nn::Lstm fwd_, bwd_;
  nn::Param proj_w_, proj_b_;  // L x 2h, L x 1
  nn::Param transitions_;      // (L+2) x (L+2)
};

// Trains with SGD and decay-on-plateau, keeping the best dev checkpoint.
TaggerModel train_tagger(const std::vector<TaggedSentence>& train,
                         const std::vector<TaggedSentence>& dev,
                         std::shared_ptr<const embed::EmbeddingStack> stack,
                         const corpus::Schema& schema, const TaggerConfig& config,
                         TrainReport* report = nullptr);

// Accuracy (POS) or strict micro F1 over token spans (concepts).
double dev_score(const TaggerModel& model, const std::vector<nn::Matrix>& features,
                 const std::vector<TaggedSentence>& gold);

// Features of each sentence read in order through `state`.
std::vector<nn::Matrix> embed_sentences(const embed::EmbeddingStack& stack,
                                        const std::vector<TaggedSentence>& sentences,
                                        embed::StackState& state);

}  // namespace mex::tagger
