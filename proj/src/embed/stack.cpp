#include "mex/embed/stack.hpp"

#include "mex/core/error.hpp"

namespace mex::embed {

const char* pooling_name(PoolingMode m) {
  switch (m) {
    case PoolingMode::kMin: return "min";
    case PoolingMode::kMax: return "max";
    case PoolingMode::kMean: return "mean";
  }
  return "mean";
}

PoolingMode parse_pooling(const std::string& name) {
  if (name == "min") return PoolingMode::kMin;
  if (name == "max") return PoolingMode::kMax;
  if (name == "mean") return PoolingMode::kMean;
  throw Error("unknown pooling mode '" + name + "' (expected min, max or mean)");
}

nn::Vector PooledMemory::update(const std::string& word, const nn::Vector& current) {
  auto& e = entries_[word];
  if (e.count == 0) {
    e.sum = current;
    e.min = current;
    e.max = current;
  } else {
    if (e.sum.size() != current.size()) throw Error("pooled vector dimension changed for '" + word + "'");
    e.sum += current;
    e.min = e.min.cwiseMin(current);
    e.max = e.max.cwiseMax(current);
  }
  ++e.count;
  switch (mode_) {
    case PoolingMode::kMin: return e.min;
    case PoolingMode::kMax: return e.max;
    case PoolingMode::kMean: return e.sum / static_cast<double>(e.count);
  }
  return e.sum;
}

std::size_t PooledMemory::count(const std::string& word) const {
  const auto it = entries_.find(word);
  return it == entries_.end() ? 0 : it->second.count;
}

void PooledMemory::write(BinaryWriter& w) const {
  w.u8(static_cast<std::uint8_t>(mode_));
  w.u64(entries_.size());
  for (const auto& [word, e] : entries_) {
    w.str(word);
    w.u64(e.count);
    w.vector(e.sum);
    w.vector(e.min);
    w.vector(e.max);
  }
}

PooledMemory PooledMemory::read_from(BinaryReader& r) {
  const auto mode = r.u8();
  if (mode > 2) throw FormatError("unknown pooling mode in memory");
  PooledMemory m(static_cast<PoolingMode>(mode));
  const auto n = r.u64();
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto word = r.str();
    auto& e = m.entries_[word];
    e.count = r.u64();
    e.sum = r.vector();
    e.min = r.vector();
    e.max = r.vector();
  }
  return m;
}

nn::Matrix WordEmbedder::embed(const std::vector<std::string>& tokens, PooledMemory*) const {
  nn::Matrix out(model_->dim(), static_cast<Eigen::Index>(tokens.size()));
  for (std::size_t i = 0; i < tokens.size(); ++i) out.col(i) = model_->embed_word_d(tokens[i]);
  return out;
}

nn::Matrix ContextualEmbedder::embed(const std::vector<std::string>& tokens, PooledMemory*) const {
  return contextual_embed(*fwd_, *bwd_, tokens);
}

nn::Matrix PooledEmbedder::embed(const std::vector<std::string>& tokens, PooledMemory* memory) const {
  if (!memory) throw Error("pooled embeddings need a memory");
  const nn::Matrix current = inner_->embed(tokens, nullptr);
  const auto d = current.rows();
  nn::Matrix out(2 * d, current.cols());
  for (Eigen::Index i = 0; i < current.cols(); ++i) {
    out.col(i).head(d) = current.col(i);
    out.col(i).tail(d) = memory->update(tokens[i], current.col(i));
  }
  return out;
}

EmbeddingStack::EmbeddingStack(std::vector<std::shared_ptr<const TokenEmbedder>> providers)
    : providers_(std::move(providers)) {
  if (providers_.empty()) throw Error("embedding stack needs at least one provider");
}

Eigen::Index EmbeddingStack::dim() const {
  Eigen::Index d = 0;
  for (const auto& p : providers_) d += p->dim();
  return d;
}

StackState EmbeddingStack::fresh_state() const {
  StackState s;
  for (const auto& p : providers_) {
    const auto* pooled = dynamic_cast<const PooledEmbedder*>(p.get());
    s.memories.emplace_back(pooled ? pooled->mode() : PoolingMode::kMean);
  }
  return s;
}

nn::Matrix EmbeddingStack::embed(const std::vector<std::string>& tokens, StackState& state) const {
  if (state.memories.size() != providers_.size()) state = fresh_state();
  nn::Matrix out(dim(), static_cast<Eigen::Index>(tokens.size()));
  Eigen::Index row = 0;
  for (std::size_t k = 0; k < providers_.size(); ++k) {
    const auto& p = providers_[k];
    out.middleRows(row, p->dim()) = p->embed(tokens, &state.memories[k]);
    row += p->dim();
  }
  return out;
}

namespace {

void write_contextual(BinaryWriter& w, const ContextualEmbedder& c) {
  c.forward().write(w);
  c.backward().write(w);
}

std::shared_ptr<const ContextualEmbedder> read_contextual(BinaryReader& r) {
  auto f = std::make_shared<const CharLanguageModel>(CharLanguageModel::read_from(r));
  auto b = std::make_shared<const CharLanguageModel>(CharLanguageModel::read_from(r));
  return std::make_shared<const ContextualEmbedder>(f, b);
}

}  // namespace

void EmbeddingStack::write(BinaryWriter& w) const {
  w.u64(providers_.size());
  for (const auto& p : providers_) {
    w.str(p->kind());
    if (const auto* word = dynamic_cast<const WordEmbedder*>(p.get())) {
      w.str(word->model().serialize());
    } else if (const auto* ctx = dynamic_cast<const ContextualEmbedder*>(p.get())) {
      write_contextual(w, *ctx);
    } else if (const auto* pooled = dynamic_cast<const PooledEmbedder*>(p.get())) {
      w.u8(static_cast<std::uint8_t>(pooled->mode()));
      write_contextual(w, pooled->inner());
    } else {
      throw Error("cannot serialize embedding provider '" + p->kind() + "'");
    }
  }
}

EmbeddingStack EmbeddingStack::read_from(BinaryReader& r) {
  const auto n = r.u64();
  std::vector<std::shared_ptr<const TokenEmbedder>> providers;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto kind = r.str();
    if (kind == "word") {
      const auto bytes = r.str();
      providers.push_back(std::make_shared<WordEmbedder>(
          std::make_shared<const SubwordModel>(SubwordModel::deserialize(bytes))));
    } else if (kind == "contextual") {
      providers.push_back(read_contextual(r));
    } else if (kind == "pooled") {
      const auto mode = r.u8();
      if (mode > 2) throw FormatError("unknown pooling mode");
      providers.push_back(
          std::make_shared<PooledEmbedder>(read_contextual(r), static_cast<PoolingMode>(mode)));
    } else {
      throw FormatError("unknown embedding provider '" + kind + "'");
    }
  }
  return EmbeddingStack(std::move(providers));
}

}  // namespace mex::embed
