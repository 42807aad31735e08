#include "mex/embed/char_lm.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mex/core/error.hpp"
#include "mex/core/utf8.hpp"

namespace mex::embed {

const char* direction_name(Direction d) { return d == Direction::kForward ? "forward" : "backward"; }

std::vector<int> CharLanguageModel::encode(std::u32string_view text) const {
  std::vector<int> ids;
  ids.reserve(text.size());
  for (const char32_t ch : text) {
    const auto it = index_.find(ch);
    ids.push_back(it == index_.end() ? 0 : it->second);
  }
  return ids;
}

// Predicts ids[t+1] from the state after ids[t], for t in [begin, end-1).
double CharLanguageModel::run_chunk(const std::vector<int>& ids, std::size_t begin,
                                    std::size_t end, nn::Vector& h, nn::Vector& c,
                                    bool with_grad) {
  const auto n = static_cast<Eigen::Index>(end - begin);
  if (n < 2) return 0.0;
  const auto H = lstm_.hidden_size();
  nn::Matrix x(H, n - 1);
  for (Eigen::Index t = 0; t + 1 < n; ++t) x.col(t) = embedding_.value.row(ids[begin + t]).transpose();
  nn::Lstm::Cache cache;
  const nn::Matrix hs = lstm_.forward(x, h, c, &cache);
  nn::Matrix logits = embedding_.value * hs;
  logits.colwise() += bias_.value.col(0);
  double loss = 0.0;
  const double scale = 1.0 / static_cast<double>(n - 1);
  for (Eigen::Index t = 0; t + 1 < n; ++t) {
    auto col = logits.col(t);
    const double m = col.maxCoeff();
    col.array() = (col.array() - m).exp();
    const double z = col.sum();
    col /= z;
    const int target = ids[begin + t + 1];
    loss -= std::log(std::max(col(target), 1e-300));
    if (with_grad) {
      col(target) -= 1.0;
      col *= scale;
    }
  }
  if (with_grad) {
    // logits now hold d(loss)/d(logits)
    embedding_.grad.noalias() += logits * hs.transpose();
    bias_.grad.col(0) += logits.rowwise().sum();
    const nn::Matrix dh = embedding_.value.transpose() * logits;
    const nn::Matrix dx = lstm_.backward(cache, dh);
    for (Eigen::Index t = 0; t + 1 < n; ++t) embedding_.grad.row(ids[begin + t]) += dx.col(t).transpose();
  }
  h = hs.col(n - 2);
  c = cache.c.col(n - 2);
  return loss * scale;
}

double CharLanguageModel::chunk_loss(const std::vector<int>& ids, bool with_grad) {
  const auto H = lstm_.hidden_size();
  nn::Vector h = nn::Vector::Zero(H), c = nn::Vector::Zero(H);
  return run_chunk(ids, 0, ids.size(), h, c, with_grad);
}

CharLanguageModel CharLanguageModel::train(std::u32string_view input, Direction direction,
                                           const CharLmConfig& config, CharLmStats* stats) {
  if (config.hidden <= 0 || config.tbptt < 2 || config.epochs < 0) {
    throw Error("invalid character LM configuration");
  }
  if (input.size() < 2) throw Error("character LM needs at least two characters of text");
  std::u32string text(input);
  if (direction == Direction::kBackward) std::reverse(text.begin(), text.end());

  const auto held = static_cast<std::size_t>(std::floor(config.held_out * static_cast<double>(text.size())));
  const auto train_end = text.size() - held;

  CharLanguageModel m;
  m.direction_ = direction;
  std::set<char32_t> chars(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(train_end));
  if (chars.size() + 1 > config.max_alphabet) {
    throw Error("alphabet of " + std::to_string(chars.size() + 1) + " symbols exceeds the cap of " +
                std::to_string(config.max_alphabet));
  }
  m.alphabet_.assign(chars.begin(), chars.end());
  for (std::size_t i = 0; i < m.alphabet_.size(); ++i) m.index_[m.alphabet_[i]] = static_cast<int>(i + 1);

  const auto V = static_cast<Eigen::Index>(m.alphabet_size());
  const auto H = static_cast<Eigen::Index>(config.hidden);
  m.embedding_ = nn::Param("charlm.embedding", V, H);
  m.bias_ = nn::Param("charlm.bias", V, 1);
  m.lstm_ = nn::Lstm("charlm.lstm", H, H);
  Rng rng(config.seed);
  nn::uniform_init(m.embedding_, rng, 0.1);
  m.lstm_.init(rng);

  const auto ids = m.encode(text);
  const std::vector<int> train_ids(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(train_end));
  const std::vector<int> held_ids(ids.begin() + static_cast<std::ptrdiff_t>(train_end), ids.end());
  auto params = m.params();
  nn::Adam adam(config.lr);
  const auto K = static_cast<std::size_t>(config.tbptt);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    nn::Vector h = nn::Vector::Zero(H), c = nn::Vector::Zero(H);
    double sum = 0;
    std::size_t chunks = 0;
    // Chunks overlap by one character so every transition is predicted.
    for (std::size_t begin = 0; begin + 1 < train_ids.size(); begin += K) {
      const auto end = std::min(train_ids.size(), begin + K + 1);
      nn::zero_grads(params);
      sum += m.run_chunk(train_ids, begin, end, h, c, true);
      ++chunks;
      nn::clip_grad_norm(params, config.clip);
      adam.step(params);
    }
    if (stats) {
      stats->train_loss.push_back(chunks ? sum / static_cast<double>(chunks) : 0.0);
      stats->held_out_loss.push_back(held_ids.size() >= 2 ? m.chunk_loss(held_ids, false) : 0.0);
    }
  }
  if (!nn::all_finite(params)) throw Error("character LM training diverged");
  return m;
}

nn::Matrix CharLanguageModel::read(std::u32string_view text) const {
  if (!trained()) throw Error("character LM is not trained");
  const auto ids = encode(text);
  const auto H = lstm_.hidden_size();
  nn::Matrix x(H, static_cast<Eigen::Index>(ids.size()));
  for (std::size_t t = 0; t < ids.size(); ++t) x.col(t) = embedding_.value.row(ids[t]).transpose();
  return lstm_.forward(x, nullptr);
}

double CharLanguageModel::loss(std::u32string_view text) const {
  if (!trained()) throw Error("character LM is not trained");
  return const_cast<CharLanguageModel*>(this)->chunk_loss(encode(text), false);
}

void CharLanguageModel::write(BinaryWriter& w) const {
  w.u8(direction_ == Direction::kForward ? 0 : 1);
  w.u32(static_cast<std::uint32_t>(lstm_.hidden_size()));
  w.u64(alphabet_.size());
  for (const char32_t ch : alphabet_) w.u32(ch);
  auto* self = const_cast<CharLanguageModel*>(this);
  nn::write_params(w, self->params());
}

CharLanguageModel CharLanguageModel::read_from(BinaryReader& r) {
  CharLanguageModel m;
  m.direction_ = r.u8() == 0 ? Direction::kForward : Direction::kBackward;
  const auto H = static_cast<Eigen::Index>(r.u32());
  const auto n = r.u64();
  for (std::uint64_t i = 0; i < n; ++i) {
    m.alphabet_.push_back(static_cast<char32_t>(r.u32()));
    m.index_[m.alphabet_.back()] = static_cast<int>(i + 1);
  }
  const auto V = static_cast<Eigen::Index>(m.alphabet_size());
  m.embedding_ = nn::Param("charlm.embedding", V, H);
  m.bias_ = nn::Param("charlm.bias", V, 1);
  m.lstm_ = nn::Lstm("charlm.lstm", H, H);
  nn::read_params(r, m.params());
  return m;
}

nn::Matrix contextual_embed(const CharLanguageModel& fwd, const CharLanguageModel& bwd,
                            const std::vector<std::string>& tokens) {
  if (!fwd.trained() || !bwd.trained()) throw Error("contextual embedding needs trained models");
  if (fwd.direction() != Direction::kForward || bwd.direction() != Direction::kBackward) {
    throw Error("contextual embedding needs a forward and a backward model");
  }
  const auto Hf = fwd.hidden_size(), Hb = bwd.hidden_size();
  nn::Matrix out(Hf + Hb, static_cast<Eigen::Index>(tokens.size()));
  if (tokens.empty()) return out;
  // Documents are joined by newlines during training, so a sentence is
  // read as if it started one.
  std::u32string sentence = U"\n";
  std::vector<std::pair<std::size_t, std::size_t>> bounds;  // [first, last] char index
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) sentence += U' ';
    const auto cps = utf8::decode(tokens[i]);
    if (cps.empty()) throw Error("empty token in contextual embedding input");
    bounds.emplace_back(sentence.size(), sentence.size() + cps.size() - 1);
    sentence += cps;
  }
  sentence += U'\n';
  const auto n = sentence.size();
  const nn::Matrix f = fwd.read(sentence);
  std::u32string reversed(sentence.rbegin(), sentence.rend());
  const nn::Matrix b = bwd.read(reversed);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out.col(i).head(Hf) = f.col(bounds[i].second);
    out.col(i).tail(Hb) = b.col(n - 1 - bounds[i].first);
  }
  return out;
}

void CharLanguageModel::save(const std::string& path) const {
  BinaryWriter w;
  write(w);
  write_file(path, wrap_container("MEXC", 1, w.bytes()));
}

CharLanguageModel CharLanguageModel::load(const std::string& path) {
  const auto payload = unwrap_container(read_file(path), "MEXC", 1, path);
  BinaryReader r(payload);
  auto m = read_from(r);
  if (!r.at_end()) throw FormatError(path + ": trailing bytes after the model");
  return m;
}

}  // namespace mex::embed
