#include "mex/relation/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "mex/core/error.hpp"

namespace mex::relation {

void RelationConfig::validate() const {
  if (windows.empty()) throw Error("relation model needs at least one window size");
  for (const int w : windows) {
    if (w <= 0) throw Error("window sizes must be positive");
  }
  if (filters <= 0 || position_dim <= 0 || concept_dim <= 0 || clip <= 0) {
    throw Error("relation model dimensions must be positive");
  }
  if (dropout < 0 || dropout >= 1) throw Error("dropout must be in [0, 1)");
  if (max_epochs < 0) throw Error("epoch count must not be negative");
  if (batch_size <= 0) throw Error("batch size must be positive");
  if (!(lr > 0)) throw Error("learning rate must be positive");
  if (patience < 0) throw Error("patience must not be negative");
}

RelationModel::RelationModel(std::shared_ptr<const embed::SubwordModel> words,
                             const corpus::Schema& schema, const RelationConfig& config, Rng& rng)
    : config_(config), words_(std::move(words)) {
  config_.validate();
  if (!words_) throw Error("relation model needs word embeddings");
  concepts_ = schema.concept_names();
  classes_.push_back(eval::kNoRelation);
  for (const auto& r : schema.relation_names()) classes_.push_back(r);
  const auto Din = input_dim();
  const auto f = static_cast<Eigen::Index>(config_.filters);
  for (const int w : config_.windows) {
    conv_w_.emplace_back("relation.conv" + std::to_string(w) + ".w", f, w * Din);
    conv_b_.emplace_back("relation.conv" + std::to_string(w) + ".b", f, 1);
    nn::glorot_init(conv_w_.back(), rng, w * Din, f);
  }
  const auto C = static_cast<Eigen::Index>(classes_.size());
  out_w_ = nn::Param("relation.out.w", C, f * static_cast<Eigen::Index>(config_.windows.size()));
  out_b_ = nn::Param("relation.out.b", C, 1);
  nn::glorot_init(out_w_, rng, out_w_.value.cols(), C);
  pos1_ = nn::Param("relation.pos1", config_.position_dim, 2 * config_.clip + 2);
  pos2_ = nn::Param("relation.pos2", config_.position_dim, 2 * config_.clip + 2);
  types_ = nn::Param("relation.types", config_.concept_dim, static_cast<Eigen::Index>(concepts_.size()) + 1);
  nn::uniform_init(pos1_, rng, 0.5);
  nn::uniform_init(pos2_, rng, 0.5);
  nn::uniform_init(types_, rng, 0.5);
}

int RelationModel::class_index(const std::string& name) const {
  const auto it = std::find(classes_.begin(), classes_.end(), name);
  return it == classes_.end() ? -1 : static_cast<int>(it - classes_.begin());
}

Eigen::Index RelationModel::input_dim() const {
  return words_->dim() + 2 * config_.position_dim + (config_.use_concepts ? config_.concept_dim : 0) + 2;
}

int RelationModel::position_index(long offset) const {
  const long c = config_.clip;
  return static_cast<int>(std::clamp(offset, -c, c) + c);
}

int RelationModel::type_index(const std::string& type) const {
  const auto it = std::find(concepts_.begin(), concepts_.end(), type);
  return it == concepts_.end() ? none_type() : static_cast<int>(it - concepts_.begin());
}

nn::Matrix RelationModel::featurize(const RelationCandidate& c, std::size_t pad_to,
                                    WordCache* cache) const {
  const auto n = c.tokens.size();
  if (c.token_types.size() != n) throw Error("candidate token types do not match its tokens");
  if (c.arg1.end > n || c.arg2.end > n) throw Error("candidate argument outside the sentence");
  const auto Din = input_dim();
  const auto dw = words_->dim();
  const auto p = config_.position_dim;
  nn::Matrix x = nn::Matrix::Zero(Din, static_cast<Eigen::Index>(std::max(n, pad_to)));
  const long h1 = static_cast<long>(c.arg1.begin), h2 = static_cast<long>(c.arg2.begin);
  for (std::size_t i = 0; i < n; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    if (cache) {
      auto it = cache->find(c.tokens[i]);
      if (it == cache->end()) it = cache->emplace(c.tokens[i], words_->embed_word_d(c.tokens[i])).first;
      x.col(col).head(dw) = it->second;
    } else {
      x.col(col).head(dw) = words_->embed_word_d(c.tokens[i]);
    }
    Eigen::Index row = dw;
    x.col(col).segment(row, p) = pos1_.value.col(position_index(static_cast<long>(i) - h1));
    row += p;
    x.col(col).segment(row, p) = pos2_.value.col(position_index(static_cast<long>(i) - h2));
    row += p;
    if (config_.use_concepts) {
      x.col(col).segment(row, config_.concept_dim) = types_.value.col(type_index(c.token_types[i]));
      row += config_.concept_dim;
    }
    x(row, col) = i >= c.arg1.begin && i < c.arg1.end ? 1.0 : 0.0;
    x(row + 1, col) = i >= c.arg2.begin && i < c.arg2.end ? 1.0 : 0.0;
  }
  return x;
}

struct RelationModel::Pass {
  std::vector<nn::Matrix> cols;  // per window: (w Din) x positions
  std::vector<nn::Matrix> act;   // per window: f x positions, after tanh
  std::vector<std::vector<Eigen::Index>> arg;
  nn::Vector pooled;  // after dropout
  nn::Vector probs;
};

RelationModel::Pass RelationModel::run(const nn::Matrix& x, std::size_t length,
                                       const nn::Vector* mask) const {
  if (x.rows() != input_dim()) throw Error("feature dimension does not match the relation model");
  if (length == 0 || length > static_cast<std::size_t>(x.cols())) throw Error("bad candidate length");
  const auto Din = x.rows();
  const auto n = static_cast<Eigen::Index>(length);
  const auto f = static_cast<Eigen::Index>(config_.filters);
  Pass p;
  p.pooled.resize(f * static_cast<Eigen::Index>(config_.windows.size()));
  for (std::size_t k = 0; k < config_.windows.size(); ++k) {
    const Eigen::Index w = config_.windows[k];
    // Windows start in [0, max(0, n - w)]; columns at or past n are zero.
    const Eigen::Index P = std::max<Eigen::Index>(1, n - w + 1);
    nn::Matrix cols = nn::Matrix::Zero(w * Din, P);
    for (Eigen::Index t = 0; t < P; ++t) {
      for (Eigen::Index j = 0; j < w && t + j < n; ++j) cols.col(t).segment(j * Din, Din) = x.col(t + j);
    }
    nn::Matrix z = conv_w_[k].value * cols;
    z.colwise() += conv_b_[k].value.col(0);
    z = z.array().tanh().matrix();
    std::vector<Eigen::Index> arg(f);
    for (Eigen::Index r = 0; r < f; ++r) {
      z.row(r).maxCoeff(&arg[r]);
      p.pooled(static_cast<Eigen::Index>(k) * f + r) = z(r, arg[r]);
    }
    p.cols.push_back(std::move(cols));
    p.act.push_back(std::move(z));
    p.arg.push_back(std::move(arg));
  }
  if (mask) p.pooled = p.pooled.cwiseProduct(*mask);
  nn::Vector logits = out_w_.value * p.pooled + out_b_.value.col(0);
  logits.array() -= logits.maxCoeff();
  p.probs = logits.unaryExpr([](double v) { return std::exp(v); });
  p.probs /= p.probs.sum();
  if (!p.probs.allFinite()) throw Error("relation model produced a non-finite output");
  return p;
}

nn::Vector RelationModel::forward(const nn::Matrix& x, std::size_t length) const {
  return run(x, length, nullptr).probs;
}

nn::Vector RelationModel::predict(const RelationCandidate& c) const {
  return forward(featurize(c), c.tokens.size());
}

double RelationModel::loss(const RelationCandidate& c, const nn::Matrix& x, int gold, double weight,
                           Rng* dropout) {
  if (gold < 0 || gold >= static_cast<int>(classes_.size())) throw Error("gold class out of range");
  const auto n = c.tokens.size();
  const auto f = static_cast<Eigen::Index>(config_.filters);
  nn::Vector mask;
  if (dropout) {
    mask.resize(f * static_cast<Eigen::Index>(config_.windows.size()));
    const double keep = 1.0 - config_.dropout;
    for (Eigen::Index i = 0; i < mask.size(); ++i) mask(i) = dropout->bernoulli(keep) ? 1.0 / keep : 0.0;
  }
  const Pass p = run(x, n, dropout ? &mask : nullptr);
  const double l = -std::log(std::max(p.probs(gold), 1e-300));

  nn::Vector dlogits = p.probs;
  dlogits(gold) -= 1.0;
  dlogits *= weight;
  out_w_.grad.noalias() += dlogits * p.pooled.transpose();
  out_b_.grad.col(0) += dlogits;
  nn::Vector dpool = out_w_.value.transpose() * dlogits;
  if (dropout) dpool = dpool.cwiseProduct(mask);

  const auto Din = x.rows();
  const auto len = static_cast<Eigen::Index>(n);
  nn::Matrix dx = nn::Matrix::Zero(Din, len);
  for (std::size_t k = 0; k < config_.windows.size(); ++k) {
    const Eigen::Index w = config_.windows[k];
    const auto& act = p.act[k];
    nn::Matrix dz = nn::Matrix::Zero(f, act.cols());
    for (Eigen::Index r = 0; r < f; ++r) {
      const auto t = p.arg[k][r];
      const double a = act(r, t);
      dz(r, t) = dpool(static_cast<Eigen::Index>(k) * f + r) * (1.0 - a * a);
    }
    conv_w_[k].grad.noalias() += dz * p.cols[k].transpose();
    conv_b_[k].grad.col(0) += dz.rowwise().sum();
    const nn::Matrix dcols = conv_w_[k].value.transpose() * dz;
    for (Eigen::Index t = 0; t < dcols.cols(); ++t) {
      for (Eigen::Index j = 0; j < w && t + j < len; ++j) dx.col(t + j) += dcols.col(t).segment(j * Din, Din);
    }
  }

  const auto dw = words_->dim();
  const auto pd = config_.position_dim;
  const long h1 = static_cast<long>(c.arg1.begin), h2 = static_cast<long>(c.arg2.begin);
  for (Eigen::Index i = 0; i < len; ++i) {
    pos1_.grad.col(position_index(i - h1)) += dx.col(i).segment(dw, pd);
    pos2_.grad.col(position_index(i - h2)) += dx.col(i).segment(dw + pd, pd);
    if (config_.use_concepts) {
      types_.grad.col(type_index(c.token_types[static_cast<std::size_t>(i)])) +=
          dx.col(i).segment(dw + 2 * pd, config_.concept_dim);
    }
  }
  return l;
}

nn::ParamRefs RelationModel::params() {
  nn::ParamRefs p;
  for (std::size_t k = 0; k < conv_w_.size(); ++k) {
    p.push_back(&conv_w_[k]);
    p.push_back(&conv_b_[k]);
  }
  p.push_back(&out_w_);
  p.push_back(&out_b_);
  p.push_back(&pos1_);
  p.push_back(&pos2_);
  if (config_.use_concepts) p.push_back(&types_);
  return p;
}

void RelationModel::write(BinaryWriter& w) const {
  w.u64(config_.windows.size());
  for (const int k : config_.windows) w.i32(k);
  w.i32(config_.filters);
  w.i32(config_.position_dim);
  w.i32(config_.concept_dim);
  w.i32(config_.clip);
  w.f64(config_.dropout);
  w.u8(config_.use_concepts ? 1 : 0);
  w.u64(concepts_.size());
  for (const auto& c : concepts_) w.str(c);
  w.u64(classes_.size());
  for (const auto& c : classes_) w.str(c);
  w.str(words_->serialize());
  nn::write_params(w, const_cast<RelationModel*>(this)->params());
}

RelationModel RelationModel::read_from(BinaryReader& r) {
  RelationModel m;
  const auto nw = r.u64();
  if (nw > 64) throw FormatError("implausible window count in relation model");
  m.config_.windows.clear();
  for (std::uint64_t i = 0; i < nw; ++i) m.config_.windows.push_back(r.i32());
  m.config_.filters = r.i32();
  m.config_.position_dim = r.i32();
  m.config_.concept_dim = r.i32();
  m.config_.clip = r.i32();
  m.config_.dropout = r.f64();
  m.config_.use_concepts = r.u8() != 0;
  try {
    m.config_.validate();
  } catch (const Error& e) {
    throw FormatError(std::string("relation model: ") + e.what());
  }
  const auto nc = r.u64();
  for (std::uint64_t i = 0; i < nc; ++i) m.concepts_.push_back(r.str());
  const auto ncl = r.u64();
  for (std::uint64_t i = 0; i < ncl; ++i) m.classes_.push_back(r.str());
  if (m.classes_.empty() || m.classes_[0] != eval::kNoRelation) {
    throw FormatError("relation model classes must start with NO_RELATION");
  }
  m.words_ = std::make_shared<const embed::SubwordModel>(embed::SubwordModel::deserialize(r.str()));
  const auto Din = m.input_dim();
  const auto f = static_cast<Eigen::Index>(m.config_.filters);
  for (const int w : m.config_.windows) {
    m.conv_w_.emplace_back("relation.conv" + std::to_string(w) + ".w", f, w * Din);
    m.conv_b_.emplace_back("relation.conv" + std::to_string(w) + ".b", f, 1);
  }
  const auto C = static_cast<Eigen::Index>(m.classes_.size());
  m.out_w_ = nn::Param("relation.out.w", C, f * static_cast<Eigen::Index>(m.config_.windows.size()));
  m.out_b_ = nn::Param("relation.out.b", C, 1);
  m.pos1_ = nn::Param("relation.pos1", m.config_.position_dim, 2 * m.config_.clip + 2);
  m.pos2_ = nn::Param("relation.pos2", m.config_.position_dim, 2 * m.config_.clip + 2);
  m.types_ = nn::Param("relation.types", m.config_.concept_dim, static_cast<Eigen::Index>(nc) + 1);
  nn::read_params(r, m.params());
  return m;
}

eval::MatchCounts candidate_counts(const std::vector<std::string>& gold,
                                   const std::vector<std::string>& pred) {
  if (gold.size() != pred.size()) throw Error("gold and predicted label counts differ");
  eval::MatchCounts counts;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool g = gold[i] != eval::kNoRelation, p = pred[i] != eval::kNoRelation;
    if (g && p && gold[i] == pred[i]) {
      ++counts.per_class[gold[i]].tp;
      continue;
    }
    if (p) ++counts.per_class[pred[i]].fp;
    if (g) ++counts.per_class[gold[i]].fn;
  }
  return counts;
}

std::vector<std::string> classify(const RelationModel& model, const std::vector<RelationCandidate>& cs) {
  std::vector<std::string> out;
  out.reserve(cs.size());
  for (const auto& c : cs) {
    Eigen::Index best;
    model.predict(c).maxCoeff(&best);
    out.push_back(model.classes()[best]);
  }
  return out;
}

RelationModel train_relation_model(const std::vector<RelationCandidate>& train,
                                   const std::vector<RelationCandidate>& dev,
                                   std::shared_ptr<const embed::SubwordModel> words,
                                   const corpus::Schema& schema, const RelationConfig& config,
                                   RelationReport* report) {
  config.validate();
  RelationReport local;
  RelationReport& rep = report ? *report : local;
  rep = {};
  if (train.empty()) throw Error("no relation training candidates");
  std::set<std::string> seen;
  for (const auto& c : train) seen.insert(c.label);
  if (seen.size() < 2) throw Error("relation training set has a single class ('" + *seen.begin() + "')");

  Rng init(derive_seed(config.seed, 1));
  RelationModel model(std::move(words), schema, config, init);
  std::vector<int> gold;
  for (const auto& c : train) {
    const int g = model.class_index(c.label);
    if (g < 0) throw Error("unknown relation label '" + c.label + "'");
    gold.push_back(g);
  }
  std::vector<std::string> dev_gold;
  for (const auto& c : dev) dev_gold.push_back(c.label);

  if (config.max_epochs == 0) {
    rep.warnings.push_back("0 epochs requested; returning the randomly initialized model");
    return model;
  }
  if (dev.empty()) rep.warnings.push_back("no dev candidates; selecting the epoch with the lowest training loss");

  std::ofstream log;
  if (!config.log_path.empty()) {
    log.open(config.log_path, std::ios::app);
    if (!log) throw Error("cannot open training log " + config.log_path);
  }

  WordCache cache;
  auto params = model.params();
  nn::Adam adam(config.lr);
  double best = -std::numeric_limits<double>::infinity();
  auto best_values = nn::snapshot(params);
  int stale = 0;
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Rng rng(derive_seed(config.seed, 1000 + static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);
    double total = 0;
    const auto B = static_cast<std::size_t>(config.batch_size);
    for (std::size_t b = 0; b < order.size(); b += B) {
      const auto end = std::min(order.size(), b + B);
      const double weight = 1.0 / static_cast<double>(end - b);
      nn::zero_grads(params);
      for (std::size_t k = b; k < end; ++k) {
        const auto& c = train[order[k]];
        total += model.loss(c, model.featurize(c, 0, &cache), gold[order[k]], weight, &rng);
      }
      adam.step(params);
    }
    if (!nn::all_finite(params)) throw Error("relation training diverged at epoch " + std::to_string(epoch));
    RelationEpoch rec;
    rec.epoch = epoch;
    rec.train_loss = total / static_cast<double>(train.size());
    rec.dev_f1 = dev.empty() ? -rec.train_loss
                             : eval::scores(candidate_counts(dev_gold, classify(model, dev)).micro()).f1;
    if (rec.dev_f1 > best) {
      best = rec.dev_f1;
      best_values = nn::snapshot(params);
      rep.best_epoch = epoch;
      rep.best_dev_f1 = rec.dev_f1;
      rec.best = true;
      stale = 0;
    } else {
      ++stale;
    }
    rep.epochs.push_back(rec);
    if (log) {
      log << "epoch " << epoch << "\tloss " << rec.train_loss << "\tdev_f1 " << rec.dev_f1
          << (rec.best ? "\tbest" : "") << "\n";
      log.flush();
    }
    if (config.patience > 0 && stale >= config.patience) break;
  }
  nn::restore(params, best_values);
  return model;
}

std::vector<PredictedRelation> predict_relations(const RelationModel& model,
                                                 const std::vector<std::string>& tokens,
                                                 const std::vector<corpus::TokenSpan>& spans,
                                                 const CandidatePolicy& policy,
                                                 const corpus::Schema& schema, double threshold) {
  if (spans.size() < 2) return {};
  auto p = policy;
  p.negative_ratio = 1.0;
  const auto cands = generate_candidates(tokens, spans, {}, p, schema);
  auto span_of = [&](const Argument& a) {
    for (std::size_t i = 0; i < spans.size(); ++i) {
      if (spans[i].begin == a.begin && spans[i].end == a.end && spans[i].type == a.type) return i;
    }
    throw Error("candidate argument not found among the spans");
  };
  std::vector<PredictedRelation> out;
  for (const auto& c : cands) {
    const auto probs = model.predict(c);
    Eigen::Index best;
    const double conf = probs.maxCoeff(&best);
    if (best == 0 || conf < threshold) continue;
    out.push_back({span_of(c.arg1), span_of(c.arg2), model.classes()[best], std::clamp(conf, 0.0, 1.0)});
  }
  return out;
}

}  // namespace mex::relation
