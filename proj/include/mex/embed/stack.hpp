#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mex/embed/char_lm.hpp"
#include "mex/embed/subword.hpp"
#include "mex/nn/param.hpp"

namespace mex::embed {

enum class PoolingMode { kMin, kMax, kMean };

const char* pooling_name(PoolingMode m);
PoolingMode parse_pooling(const std::string& name);

// Running min/max/mean of every contextual vector seen per word.
class PooledMemory {
 public:
  explicit PooledMemory(PoolingMode mode = PoolingMode::kMean) : mode_(mode) {}

  // Adds `current` to the word's history and returns the aggregate.
  nn::Vector update(const std::string& word, const nn::Vector& current);
  bool contains(const std::string& word) const { return entries_.count(word) > 0; }
  std::size_t size() const { return entries_.size(); }
  std::size_t count(const std::string& word) const;
  PoolingMode mode() const { return mode_; }
  void clear() { entries_.clear(); }

  void write(BinaryWriter& w) const;
  static PooledMemory read_from(BinaryReader& r);

  bool operator==(const PooledMemory&) const = default;

 private:
  struct Entry {
    std::size_t count = 0;
    nn::Vector sum, min, max;
    bool operator==(const Entry&) const = default;
  };
  PoolingMode mode_;
  std::map<std::string, Entry> entries_;
};

// One column per token. `memory` is only used by pooled providers.
class TokenEmbedder {
 public:
  virtual ~TokenEmbedder() = default;
  virtual std::string kind() const = 0;
  virtual Eigen::Index dim() const = 0;
  virtual nn::Matrix embed(const std::vector<std::string>& tokens, PooledMemory* memory) const = 0;
  virtual bool uses_memory() const { return false; }
};

class WordEmbedder : public TokenEmbedder {
 public:
  explicit WordEmbedder(std::shared_ptr<const SubwordModel> model) : model_(std::move(model)) {}
  std::string kind() const override { return "word"; }
  Eigen::Index dim() const override { return model_->dim(); }
  nn::Matrix embed(const std::vector<std::string>& tokens, PooledMemory*) const override;
  const SubwordModel& model() const { return *model_; }

 private:
  std::shared_ptr<const SubwordModel> model_;
};

class ContextualEmbedder : public TokenEmbedder {
 public:
  ContextualEmbedder(std::shared_ptr<const CharLanguageModel> fwd,
                     std::shared_ptr<const CharLanguageModel> bwd)
      : fwd_(std::move(fwd)), bwd_(std::move(bwd)) {}
  std::string kind() const override { return "contextual"; }
  Eigen::Index dim() const override { return fwd_->hidden_size() + bwd_->hidden_size(); }
  nn::Matrix embed(const std::vector<std::string>& tokens, PooledMemory*) const override;
  const CharLanguageModel& forward() const { return *fwd_; }
  const CharLanguageModel& backward() const { return *bwd_; }

 private:
  std::shared_ptr<const CharLanguageModel> fwd_, bwd_;
};

// concat(current contextual vector, pooled aggregate including it).
class PooledEmbedder : public TokenEmbedder {
 public:
  explicit PooledEmbedder(std::shared_ptr<const ContextualEmbedder> inner, PoolingMode mode)
      : inner_(std::move(inner)), mode_(mode) {}
  std::string kind() const override { return "pooled"; }
  Eigen::Index dim() const override { return 2 * inner_->dim(); }
  nn::Matrix embed(const std::vector<std::string>& tokens, PooledMemory* memory) const override;
  bool uses_memory() const override { return true; }
  PoolingMode mode() const { return mode_; }
  const ContextualEmbedder& inner() const { return *inner_; }

 private:
  std::shared_ptr<const ContextualEmbedder> inner_;
  PoolingMode mode_;
};

// Pooled memories for one run, one per provider slot.
struct StackState {
  std::vector<PooledMemory> memories;
};

class EmbeddingStack {
 public:
  EmbeddingStack() = default;
  explicit EmbeddingStack(std::vector<std::shared_ptr<const TokenEmbedder>> providers);

  Eigen::Index dim() const;
  std::size_t size() const { return providers_.size(); }
  const TokenEmbedder& provider(std::size_t i) const { return *providers_[i]; }
  const std::vector<std::shared_ptr<const TokenEmbedder>>& providers() const { return providers_; }

  // Fresh (empty) memories.
  StackState fresh_state() const;

  // Rows are the providers' blocks in declared order.
  nn::Matrix embed(const std::vector<std::string>& tokens, StackState& state) const;

  // Serializes the providers (models included) and restores them.
  void write(BinaryWriter& w) const;
  static EmbeddingStack read_from(BinaryReader& r);

 private:
  std::vector<std::shared_ptr<const TokenEmbedder>> providers_;
};

}  // namespace mex::embed
