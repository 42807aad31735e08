#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mex/core/binary_io.hpp"

namespace mex::embed {

using Sentences = std::vector<std::vector<std::string>>;

struct CbowConfig {
  int dim = 100;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  double lr = 0.05;
  int min_count = 2;
  std::uint32_t buckets = 2'000'000;
  int minn = 3;
  int maxn = 6;
  std::uint64_t seed = 1;

  void validate() const;
};

// Bucket ids of the character n-grams of "<word>", n in [minn, maxn],
// counted in code points and hashed with FNV-1a 32 over UTF-8 bytes.
std::vector<std::uint32_t> ngram_buckets(std::string_view word, int minn, int maxn,
                                         std::uint32_t buckets);

// One CBOW training example with its negatives already drawn.
struct CbowExample {
  std::vector<int> context;  // vocabulary ids
  int target = 0;
  std::vector<int> negatives;
};

// Sparse gradient: (column, gradient column) pairs.
template <typename Scalar>
struct CbowGrads {
  using Col = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  std::vector<std::pair<int, Col>> word_in, bucket_in, output;
};

// Negative-sampling CBOW loss for one example. Columns of `word_in`,
// `bucket_in`, `output` are vectors. `buckets_of[w]` lists word w's bucket
// ids. Context vector = mean over context words of (word vector + mean
// bucket vector).
template <typename Scalar>
Scalar cbow_loss(const CbowExample& ex,
                 const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& word_in,
                 const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& bucket_in,
                 const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& output,
                 const std::vector<std::vector<std::uint32_t>>& buckets_of,
                 CbowGrads<Scalar>* grads) {
  using Col = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const auto d = word_in.rows();
  const Scalar inv_c = Scalar(1) / static_cast<Scalar>(ex.context.size());
  Col h = Col::Zero(d);
  for (const int w : ex.context) {
    h += word_in.col(w);
    const auto& b = buckets_of[w];
    if (!b.empty()) {
      Col m = Col::Zero(d);
      for (const auto id : b) m += bucket_in.col(id);
      h += m / static_cast<Scalar>(b.size());
    }
  }
  h *= inv_c;

  Scalar loss = 0;
  Col dh = Col::Zero(d);
  auto term = [&](int w, Scalar label) {
    const Scalar s = output.col(w).dot(h);
    const Scalar sig = Scalar(1) / (Scalar(1) + std::exp(-s));
    // -log sigmoid(s) for positives, -log sigmoid(-s) for negatives
    const Scalar x = label > 0 ? -s : s;
    loss += std::max(x, Scalar(0)) + std::log1p(std::exp(-std::abs(x)));
    if (grads) {
      const Scalar g = sig - label;
      dh += g * output.col(w);
      grads->output.emplace_back(w, g * h);
    }
  };
  term(ex.target, Scalar(1));
  for (const int n : ex.negatives) term(n, Scalar(0));

  if (grads) {
    const Col dctx = dh * inv_c;
    for (const int w : ex.context) {
      grads->word_in.emplace_back(w, dctx);
      const auto& b = buckets_of[w];
      if (b.empty()) continue;
      const Col db = dctx / static_cast<Scalar>(b.size());
      for (const auto id : b) grads->bucket_in.emplace_back(static_cast<int>(id), db);
    }
  }
  return loss;
}

struct CbowStats {
  int epochs_run = 0;
  std::vector<double> epoch_loss;  // mean loss per example
};

class SubwordModel {
 public:
  using MatrixF = Eigen::MatrixXf;

  SubwordModel() = default;

  static SubwordModel train(const Sentences& corpus, const CbowConfig& config,
                            CbowStats* stats = nullptr);

  // Continues training on a domain corpus, adding words that reach
  // min_count there. Zero epochs leave the model untouched.
  void fine_tune(const Sentences& corpus, int epochs, CbowStats* stats = nullptr);

  // Mean CBOW loss over the corpus with negatives drawn from `seed`.
  double evaluate_loss(const Sentences& corpus, std::uint64_t seed) const;

  Eigen::VectorXf embed_word(std::string_view word) const;
  Eigen::VectorXd embed_word_d(std::string_view word) const { return embed_word(word).cast<double>(); }

  int dim() const { return config_.dim; }
  const CbowConfig& config() const { return config_; }
  std::size_t vocab_size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  int word_index(std::string_view word) const;
  std::vector<std::uint32_t> buckets_of(std::string_view word) const;

  const MatrixF& word_vectors() const { return word_in_; }
  const MatrixF& bucket_vectors() const { return bucket_in_; }
  const MatrixF& output_vectors() const { return output_; }

  // Binary file: MEXE container.
  std::string serialize() const;
  static SubwordModel deserialize(std::string_view bytes, const std::string& what = "embeddings");
  void save(const std::string& path) const;
  static SubwordModel load(const std::string& path);

  // "V d" header, then one "word v1 ... vd" line per vocabulary word.
  std::string to_text() const;

  bool operator==(const SubwordModel& o) const;

 private:
  void add_words(const std::vector<std::pair<std::string, std::uint64_t>>& sorted, std::uint64_t seed);
  void rebuild_tables();
  double run_epochs(const Sentences& corpus, int epochs, std::uint64_t seed, CbowStats* stats);
  std::vector<std::vector<int>> to_ids(const Sentences& corpus) const;

  CbowConfig config_;
  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::vector<std::uint32_t>> word_buckets_;
  std::vector<int> negative_table_;
  MatrixF word_in_, bucket_in_, output_;
  std::uint64_t updates_ = 0;
};

inline constexpr std::uint32_t kEmbeddingFormatVersion = 1;

}  // namespace mex::embed
