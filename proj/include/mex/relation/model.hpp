#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "mex/embed/subword.hpp"
#include "mex/eval/metrics.hpp"
#include "mex/nn/param.hpp"
#include "mex/relation/candidates.hpp"

namespace mex::relation {

struct RelationConfig {
  std::vector<int> windows{2, 3, 4, 5};
  int filters = 150;  // per window size
  int position_dim = 25;
  int concept_dim = 25;
  int clip = 30;  // relative offsets are clipped to [-clip, clip]
  double dropout = 0.5;
  bool use_concepts = true;
  int max_epochs = 30;
  int batch_size = 50;
  double lr = 1e-3;  // Adam
  int patience = 0;  // stop after this many epochs without dev gain; 0 = never
  std::uint64_t seed = 1;
  std::string log_path;

  void validate() const;
};

struct RelationEpoch {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_f1 = 0.0;
  bool best = false;
};

struct RelationReport {
  std::vector<RelationEpoch> epochs;
  int best_epoch = 0;
  double best_dev_f1 = 0.0;
  std::vector<std::string> warnings;
};

using WordCache = std::unordered_map<std::string, nn::Vector>;

// Convolution over token feature columns (word vector, two relative
// position vectors, concept type vector, argument role flags), max-pooled
// per filter, then a softmax layer over NO_RELATION and the schema
// relations.
class RelationModel {
 public:
  RelationModel() = default;
  RelationModel(std::shared_ptr<const embed::SubwordModel> words, const corpus::Schema& schema,
                const RelationConfig& config, Rng& rng);

  // Index 0 is NO_RELATION, then the schema relations in order.
  const std::vector<std::string>& classes() const { return classes_; }
  int class_index(const std::string& name) const;
  const RelationConfig& config() const { return config_; }
  Eigen::Index input_dim() const;
  int position_index(long offset) const;
  int sentinel_index() const { return 2 * config_.clip + 1; }
  int type_index(const std::string& type) const;  // NONE for "" or unknown
  int none_type() const { return static_cast<int>(concepts_.size()); }

  // Din x max(n, pad_to); columns past the sentence are zero.
  nn::Matrix featurize(const RelationCandidate& c, std::size_t pad_to = 0,
                       WordCache* cache = nullptr) const;

  // Class distribution; only the first `length` columns of x are read.
  nn::Vector forward(const nn::Matrix& x, std::size_t length) const;
  nn::Vector predict(const RelationCandidate& c) const;

  // Cross-entropy for one candidate; accumulates gradients (scaled by
  // `weight`) into the convolution, output and embedding tables.
  double loss(const RelationCandidate& c, const nn::Matrix& x, int gold, double weight, Rng* dropout);

  nn::ParamRefs params();

  void write(BinaryWriter& w) const;
  static RelationModel read_from(BinaryReader& r);

 private:
  struct Pass;
  Pass run(const nn::Matrix& x, std::size_t length, const nn::Vector* mask) const;

  RelationConfig config_;
  std::shared_ptr<const embed::SubwordModel> words_;
  std::vector<std::string> concepts_;
  std::vector<std::string> classes_;
  std::vector<nn::Param> conv_w_, conv_b_;  // per window: f x (w Din), f x 1
  nn::Param out_w_, out_b_;                 // C x (f |windows|), C x 1
  nn::Param pos1_, pos2_;                   // p x (2 clip + 2)
  nn::Param types_;                         // c x (|concepts| + 1)
};

// Micro counts over relation classes; NO_RELATION never counts.
eval::MatchCounts candidate_counts(const std::vector<std::string>& gold,
                                   const std::vector<std::string>& pred);

RelationModel train_relation_model(const std::vector<RelationCandidate>& train,
                                   const std::vector<RelationCandidate>& dev,
                                   std::shared_ptr<const embed::SubwordModel> words,
                                   const corpus::Schema& schema, const RelationConfig& config,
                                   RelationReport* report = nullptr);

// Argmax labels of the candidates.
std::vector<std::string> classify(const RelationModel& model, const std::vector<RelationCandidate>& cs);

struct PredictedRelation {
  std::size_t arg1 = 0;  // span index
  std::size_t arg2 = 0;
  std::string relation;
  double confidence = 0.0;
};

// Relations among `spans` of one sentence whose most likely class is not
// NO_RELATION and whose probability is at least `threshold`.
std::vector<PredictedRelation> predict_relations(const RelationModel& model,
                                                 const std::vector<std::string>& tokens,
                                                 const std::vector<corpus::TokenSpan>& spans,
                                                 const CandidatePolicy& policy,
                                                 const corpus::Schema& schema, double threshold = 0.5);

}  // namespace mex::relation
