#include "mex/embed/subword.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mex/core/error.hpp"
#include "mex/core/hash.hpp"
#include "mex/core/random.hpp"
#include "mex/core/utf8.hpp"

namespace mex::embed {

namespace {

constexpr std::size_t kNegativeTableSize = 1'000'000;

void fill_uniform(Eigen::MatrixXf& m, Rng& rng, float scale) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = static_cast<float>(rng.uniform(-scale, scale));
  }
}

void write_floats(BinaryWriter& w, const Eigen::MatrixXf& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) w.f32(m.data()[i]);
}

Eigen::MatrixXf read_floats(BinaryReader& r, Eigen::Index rows, Eigen::Index cols) {
  if (static_cast<std::size_t>(rows * cols) * 4 > r.remaining()) {
    throw FormatError("embedding matrix exceeds file size");
  }
  Eigen::MatrixXf m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.f32();
  return m;
}

}  // namespace

void CbowConfig::validate() const {
  if (dim <= 0) throw Error("embedding dimension must be positive");
  if (window <= 0) throw Error("window must be positive");
  if (negatives <= 0) throw Error("negative sample count must be positive");
  if (epochs < 0) throw Error("epoch count must not be negative");
  if (!(lr > 0)) throw Error("learning rate must be positive");
  if (min_count < 1) throw Error("min_count must be at least 1");
  if (buckets == 0) throw Error("bucket count must be positive");
  if (minn < 1 || maxn < minn) throw Error("invalid n-gram range");
}

std::vector<std::uint32_t> ngram_buckets(std::string_view word, int minn, int maxn,
                                         std::uint32_t buckets) {
  std::vector<std::uint32_t> out;
  if (word.empty()) return out;
  const auto cps = utf8::decode(word);
  std::u32string wrapped = U"<" + cps + U">";
  const auto n = static_cast<int>(wrapped.size());
  for (int len = minn; len <= maxn; ++len) {
    for (int i = 0; i + len <= n; ++i) {
      const auto gram = utf8::encode(std::u32string_view(wrapped).substr(i, len));
      out.push_back(fnv1a32(gram) % buckets);
    }
  }
  return out;
}

int SubwordModel::word_index(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  return it == index_.end() ? -1 : it->second;
}

std::vector<std::uint32_t> SubwordModel::buckets_of(std::string_view word) const {
  const int w = word_index(word);
  if (w >= 0) return word_buckets_[w];
  return ngram_buckets(word, config_.minn, config_.maxn, config_.buckets);
}

Eigen::VectorXf SubwordModel::embed_word(std::string_view word) const {
  Eigen::VectorXf v = Eigen::VectorXf::Zero(config_.dim);
  if (word.empty() || !utf8::is_valid(word)) return v;
  const int w = word_index(word);
  const auto buckets = buckets_of(word);
  if (!buckets.empty()) {
    for (const auto b : buckets) v += bucket_in_.col(b);
    v /= static_cast<float>(buckets.size());
  }
  if (w >= 0) v += word_in_.col(w);
  return v;
}

void SubwordModel::add_words(const std::vector<std::pair<std::string, std::uint64_t>>& sorted,
                             std::uint64_t seed) {
  const auto old_v = static_cast<Eigen::Index>(words_.size());
  for (const auto& [w, c] : sorted) {
    index_[w] = static_cast<int>(words_.size());
    words_.push_back(w);
    counts_.push_back(c);
    word_buckets_.push_back(ngram_buckets(w, config_.minn, config_.maxn, config_.buckets));
  }
  const auto new_v = static_cast<Eigen::Index>(words_.size());
  Rng rng(seed);
  Eigen::MatrixXf fresh(config_.dim, new_v - old_v);
  fill_uniform(fresh, rng, 1.0f / static_cast<float>(config_.dim));
  Eigen::MatrixXf word_in(config_.dim, new_v);
  Eigen::MatrixXf output = Eigen::MatrixXf::Zero(config_.dim, new_v);
  if (old_v > 0) {
    word_in.leftCols(old_v) = word_in_;
    output.leftCols(old_v) = output_;
  }
  word_in.rightCols(new_v - old_v) = fresh;
  word_in_ = std::move(word_in);
  output_ = std::move(output);
}

void SubwordModel::rebuild_tables() {
  negative_table_.clear();
  double z = 0;
  for (const auto c : counts_) z += std::pow(static_cast<double>(c), 0.75);
  for (std::size_t w = 0; w < counts_.size(); ++w) {
    const double share = std::pow(static_cast<double>(counts_[w]), 0.75) / z;
    const auto n = static_cast<std::size_t>(std::ceil(share * kNegativeTableSize));
    negative_table_.insert(negative_table_.end(), n, static_cast<int>(w));
  }
}

std::vector<std::vector<int>> SubwordModel::to_ids(const Sentences& corpus) const {
  std::vector<std::vector<int>> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus) {
    std::vector<int> ids;
    for (const auto& t : s) {
      const int w = word_index(t);
      if (w >= 0) ids.push_back(w);
    }
    if (ids.size() >= 2) out.push_back(std::move(ids));
  }
  return out;
}

double SubwordModel::run_epochs(const Sentences& corpus, int epochs, std::uint64_t seed,
                                CbowStats* stats) {
  const auto data = to_ids(corpus);
  std::size_t tokens = 0;
  for (const auto& s : data) tokens += s.size();
  if (tokens == 0) throw Error("corpus has no trainable tokens (after min_count filtering)");
  const double total = static_cast<double>(tokens) * epochs;
  double processed = 0, last_loss = 0;
  Rng rng(seed);
  CbowExample ex;
  CbowGrads<float> grads;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    double loss_sum = 0;
    std::size_t examples = 0;
    for (const auto& sent : data) {
      const auto n = static_cast<int>(sent.size());
      for (int t = 0; t < n; ++t) {
        const float lr = static_cast<float>(config_.lr * std::max(0.0, 1.0 - processed / total));
        processed += 1;
        const int b = 1 + static_cast<int>(rng.below(config_.window));
        ex.context.clear();
        for (int c = std::max(0, t - b); c <= std::min(n - 1, t + b); ++c) {
          if (c != t) ex.context.push_back(sent[c]);
        }
        if (ex.context.empty()) continue;
        ex.target = sent[t];
        ex.negatives.clear();
        while (static_cast<int>(ex.negatives.size()) < config_.negatives) {
          const int neg = negative_table_[rng.below(negative_table_.size())];
          if (neg != ex.target) ex.negatives.push_back(neg);
          else if (words_.size() == 1) break;
        }
        grads.word_in.clear();
        grads.bucket_in.clear();
        grads.output.clear();
        loss_sum += cbow_loss<float>(ex, word_in_, bucket_in_, output_, word_buckets_, &grads);
        ++examples;
        for (const auto& [w, g] : grads.output) output_.col(w) -= lr * g;
        for (const auto& [w, g] : grads.word_in) word_in_.col(w) -= lr * g;
        for (const auto& [b2, g] : grads.bucket_in) bucket_in_.col(b2) -= lr * g;
      }
    }
    last_loss = examples ? loss_sum / static_cast<double>(examples) : 0.0;
    if (stats) {
      ++stats->epochs_run;
      stats->epoch_loss.push_back(last_loss);
    }
  }
  ++updates_;
  return last_loss;
}

SubwordModel SubwordModel::train(const Sentences& corpus, const CbowConfig& config,
                                 CbowStats* stats) {
  config.validate();
  std::map<std::string, std::uint64_t> freq;
  for (const auto& s : corpus) {
    for (const auto& t : s) {
      if (!t.empty() && utf8::is_valid(t)) ++freq[t];
    }
  }
  if (freq.empty()) throw Error("cannot train embeddings on an empty corpus");
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (const auto& [w, c] : freq) {
    if (c >= static_cast<std::uint64_t>(config.min_count)) kept.emplace_back(w, c);
  }
  if (kept.empty()) throw Error("no word reaches min_count " + std::to_string(config.min_count));
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  SubwordModel m;
  m.config_ = config;
  Rng rng(derive_seed(config.seed, 0));
  m.bucket_in_.resize(config.dim, config.buckets);
  fill_uniform(m.bucket_in_, rng, 1.0f / static_cast<float>(config.dim));
  m.add_words(kept, derive_seed(config.seed, 1));
  m.rebuild_tables();
  if (config.epochs > 0) m.run_epochs(corpus, config.epochs, derive_seed(config.seed, 2), stats);
  return m;
}

void SubwordModel::fine_tune(const Sentences& corpus, int epochs, CbowStats* stats) {
  if (epochs < 0) throw Error("epoch count must not be negative");
  if (epochs == 0) return;
  std::map<std::string, std::uint64_t> freq;
  for (const auto& s : corpus) {
    for (const auto& t : s) {
      if (!t.empty() && utf8::is_valid(t)) ++freq[t];
    }
  }
  std::vector<std::pair<std::string, std::uint64_t>> fresh;
  for (const auto& [w, c] : freq) {
    const int idx = word_index(w);
    if (idx >= 0) {
      counts_[idx] += c;
    } else if (c >= static_cast<std::uint64_t>(config_.min_count)) {
      fresh.emplace_back(w, c);
    }
  }
  std::stable_sort(fresh.begin(), fresh.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  add_words(fresh, derive_seed(config_.seed, 100 + updates_));
  rebuild_tables();
  run_epochs(corpus, epochs, derive_seed(config_.seed, 200 + updates_), stats);
}

double SubwordModel::evaluate_loss(const Sentences& corpus, std::uint64_t seed) const {
  const auto data = to_ids(corpus);
  Rng rng(seed);
  CbowExample ex;
  double sum = 0;
  std::size_t n_ex = 0;
  for (const auto& sent : data) {
    const auto n = static_cast<int>(sent.size());
    for (int t = 0; t < n; ++t) {
      ex.context.clear();
      for (int c = std::max(0, t - config_.window); c <= std::min(n - 1, t + config_.window); ++c) {
        if (c != t) ex.context.push_back(sent[c]);
      }
      ex.target = sent[t];
      ex.negatives.clear();
      for (int k = 0; k < config_.negatives; ++k) {
        ex.negatives.push_back(negative_table_[rng.below(negative_table_.size())]);
      }
      sum += cbow_loss<float>(ex, word_in_, bucket_in_, output_, word_buckets_, nullptr);
      ++n_ex;
    }
  }
  return n_ex ? sum / static_cast<double>(n_ex) : 0.0;
}

std::string SubwordModel::serialize() const {
  BinaryWriter w;
  w.u32(static_cast<std::uint32_t>(config_.dim));
  w.i32(config_.window);
  w.i32(config_.negatives);
  w.i32(config_.epochs);
  w.f64(config_.lr);
  w.i32(config_.min_count);
  w.u32(config_.buckets);
  w.i32(config_.minn);
  w.i32(config_.maxn);
  w.u64(config_.seed);
  w.u64(updates_);
  w.u64(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    w.str(words_[i]);
    w.u64(counts_[i]);
  }
  write_floats(w, word_in_);
  write_floats(w, bucket_in_);
  write_floats(w, output_);
  return wrap_container("MEXE", kEmbeddingFormatVersion, w.bytes());
}

SubwordModel SubwordModel::deserialize(std::string_view bytes, const std::string& what) {
  const auto payload = unwrap_container(bytes, "MEXE", kEmbeddingFormatVersion, what);
  BinaryReader r(payload);
  SubwordModel m;
  m.config_.dim = static_cast<int>(r.u32());
  m.config_.window = r.i32();
  m.config_.negatives = r.i32();
  m.config_.epochs = r.i32();
  m.config_.lr = r.f64();
  m.config_.min_count = r.i32();
  m.config_.buckets = r.u32();
  m.config_.minn = r.i32();
  m.config_.maxn = r.i32();
  m.config_.seed = r.u64();
  m.config_.validate();
  m.updates_ = r.u64();
  const auto v = r.u64();
  std::vector<std::pair<std::string, std::uint64_t>> words;
  for (std::uint64_t i = 0; i < v; ++i) {
    auto word = r.str();
    const auto count = r.u64();
    words.emplace_back(std::move(word), count);
  }
  for (const auto& [word, count] : words) {
    m.index_[word] = static_cast<int>(m.words_.size());
    m.words_.push_back(word);
    m.counts_.push_back(count);
    m.word_buckets_.push_back(ngram_buckets(word, m.config_.minn, m.config_.maxn, m.config_.buckets));
  }
  const auto d = static_cast<Eigen::Index>(m.config_.dim);
  m.word_in_ = read_floats(r, d, static_cast<Eigen::Index>(v));
  m.bucket_in_ = read_floats(r, d, static_cast<Eigen::Index>(m.config_.buckets));
  m.output_ = read_floats(r, d, static_cast<Eigen::Index>(v));
  if (!r.at_end()) throw FormatError(what + ": trailing bytes after embedding matrices");
  m.rebuild_tables();
  return m;
}

void SubwordModel::save(const std::string& path) const { write_file(path, serialize()); }

SubwordModel SubwordModel::load(const std::string& path) { return deserialize(read_file(path), path); }

std::string SubwordModel::to_text() const {
  std::string out = std::to_string(words_.size()) + " " + std::to_string(config_.dim) + "\n";
  char buf[32];
  for (const auto& w : words_) {
    out += w;
    const auto v = embed_word(w);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      std::snprintf(buf, sizeof buf, " %.6g", static_cast<double>(v(i)));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

bool SubwordModel::operator==(const SubwordModel& o) const {
  return config_.dim == o.config_.dim && config_.buckets == o.config_.buckets &&
         config_.minn == o.config_.minn && config_.maxn == o.config_.maxn && words_ == o.words_ &&
         counts_ == o.counts_ && word_in_ == o.word_in_ && bucket_in_ == o.bucket_in_ &&
         output_ == o.output_;
}

}  // namespace mex::embed
