#include "mex/tagger/tagger.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "mex/core/error.hpp"
#include "mex/eval/metrics.hpp"
#include "mex/tagger/crf.hpp"

namespace mex::tagger {

std::vector<TaggedSentence> tagged_sentences(const std::vector<corpus::AnnotatedDocument>& docs,
                                             TaggerTask task, corpus::TagScheme scheme) {
  std::vector<TaggedSentence> out;
  for (const auto& doc : docs) {
    for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
      const auto& sent = doc.sentences[s];
      TaggedSentence ts;
      for (const auto& tok : sent.tokens) ts.tokens.push_back(doc.substring_utf8(tok.start, tok.end));
      if (task == TaggerTask::kPos) {
        for (const auto& tok : sent.tokens) {
          if (tok.pos.empty()) {
            throw Error("document " + doc.doc_id + " has tokens without a POS tag");
          }
          ts.labels.push_back(tok.pos);
        }
      } else {
        ts.labels = corpus::encode_tags(sent.tokens.size(), corpus::sentence_token_spans(doc, s), scheme);
      }
      out.push_back(std::move(ts));
    }
  }
  return out;
}

std::vector<TaggedSentence> tagged_sentences(const std::vector<corpus::ConllDocument>& docs,
                                             TaggerTask task) {
  std::vector<TaggedSentence> out;
  for (const auto& doc : docs) {
    for (const auto& sent : doc.sentences) {
      TaggedSentence ts;
      for (const auto& tok : sent.tokens) {
        ts.tokens.push_back(tok.form);
        const auto& label = task == TaggerTask::kPos ? tok.pos : tok.tag;
        if (label.empty() || label == "_") {
          throw Error("document " + doc.doc_id + " has an untagged token '" + tok.form + "'");
        }
        ts.labels.push_back(label);
      }
      out.push_back(std::move(ts));
    }
  }
  return out;
}

void TaggerConfig::validate() const {
  if (hidden <= 0) throw Error("tagger hidden size must be positive");
  if (max_epochs < 0) throw Error("epoch count must not be negative");
  if (batch_size <= 0) throw Error("batch size must be positive");
  if (!(lr > 0) || !(min_lr > 0)) throw Error("learning rates must be positive");
  if (!(anneal_factor > 0 && anneal_factor < 1)) throw Error("anneal factor must be in (0, 1)");
  if (patience <= 0) throw Error("patience must be positive");
  if (!(clip > 0)) throw Error("gradient clip must be positive");
  if (locked_dropout < 0 || locked_dropout >= 1 || word_dropout < 0 || word_dropout >= 1) {
    throw Error("dropout rates must be in [0, 1)");
  }
}

TaggerModel::TaggerModel(std::shared_ptr<const embed::EmbeddingStack> stack, LabelVocab labels,
                         TaggerTask task, corpus::TagScheme scheme, int hidden, Rng& rng)
    : stack_(std::move(stack)), labels_(std::move(labels)), task_(task), scheme_(scheme) {
  if (!stack_) throw Error("tagger needs an embedding stack");
  if (labels_.size() == 0) throw Error("tagger needs at least one label");
  memory_ = stack_->fresh_state();
  const auto D = stack_->dim();
  mean_ = nn::Vector::Zero(D);
  inv_std_ = nn::Vector::Ones(D);
  const auto L = static_cast<Eigen::Index>(labels_.size());
  fwd_ = nn::Lstm("tagger.lstm.fwd", D, hidden);
  bwd_ = nn::Lstm("tagger.lstm.bwd", D, hidden);
  fwd_.init(rng);
  bwd_.init(rng);
  proj_w_ = nn::Param("tagger.proj.w", L, 2 * hidden);
  proj_b_ = nn::Param("tagger.proj.b", L, 1);
  nn::glorot_init(proj_w_, rng, 2 * hidden, L);
  transitions_ = nn::Param("tagger.crf.transitions", L + 2, L + 2);
  if (task_ == TaggerTask::kConcepts) {
    auto& tr = transitions_.value;
    const auto S = static_cast<Eigen::Index>(crf_start(tr));
    const auto E = static_cast<Eigen::Index>(crf_stop(tr));
    for (Eigen::Index j = 0; j < L; ++j) {
      if (!transition_allowed("", labels_.label(j), scheme_)) tr(S, j) = -10000.0;
      if (!transition_allowed(labels_.label(j), "", scheme_)) tr(j, E) = -10000.0;
      for (Eigen::Index i = 0; i < L; ++i) {
        if (!transition_allowed(labels_.label(i), labels_.label(j), scheme_)) tr(i, j) = -10000.0;
      }
    }
  }
}

void TaggerModel::fit_standardization(const std::vector<nn::Matrix>& features) {
  const auto D = mean_.size();
  nn::Vector sum = nn::Vector::Zero(D), sq = nn::Vector::Zero(D);
  double n = 0;
  for (const auto& x : features) {
    if (x.rows() != D) throw Error("feature dimension does not match the tagger");
    sum += x.rowwise().sum();
    sq += x.cwiseAbs2().rowwise().sum();
    n += static_cast<double>(x.cols());
  }
  if (n == 0) return;
  mean_ = sum / n;
  for (Eigen::Index i = 0; i < D; ++i) {
    const double var = sq(i) / n - mean_(i) * mean_(i);
    inv_std_(i) = var > 1e-12 ? 1.0 / std::sqrt(var) : 1.0;
  }
}

nn::Matrix TaggerModel::standardize(const nn::Matrix& x) const {
  if (x.rows() != mean_.size()) throw Error("feature dimension does not match the tagger");
  return inv_std_.asDiagonal() * (x.colwise() - mean_);
}

nn::ParamRefs TaggerModel::params() {
  nn::ParamRefs p = fwd_.params();
  for (auto* q : bwd_.params()) p.push_back(q);
  p.push_back(&proj_w_);
  p.push_back(&proj_b_);
  p.push_back(&transitions_);
  return p;
}

nn::Matrix TaggerModel::emissions(const nn::Matrix& features) const {
  const auto h = fwd_.hidden_size();
  const nn::Matrix x = standardize(features);
  nn::Matrix enc(2 * h, x.cols());
  enc.topRows(h) = fwd_.forward(x, nullptr);
  enc.bottomRows(h) = bwd_.forward(x.rowwise().reverse(), nullptr).rowwise().reverse();
  nn::Matrix e = proj_w_.value * enc;
  e.colwise() += proj_b_.value.col(0);
  return e;
}

double TaggerModel::loss(const nn::Matrix& features, const std::vector<std::size_t>& gold,
                         double weight, Rng* dropout, double word_dropout, double locked_dropout) {
  const auto T = features.cols();
  const auto h = fwd_.hidden_size();
  nn::Matrix x = standardize(features);
  nn::Vector mask = nn::Vector::Ones(2 * h);
  if (dropout) {
    for (Eigen::Index t = 0; t < T; ++t) {
      if (dropout->bernoulli(word_dropout)) x.col(t).setZero();
    }
    const double keep = 1.0 - locked_dropout;
    for (Eigen::Index i = 0; i < 2 * h; ++i) mask(i) = dropout->bernoulli(keep) ? 1.0 / keep : 0.0;
  }
  nn::Lstm::Cache cf, cb;
  nn::Matrix enc(2 * h, T);
  enc.topRows(h) = fwd_.forward(x, &cf);
  enc.bottomRows(h) = bwd_.forward(x.rowwise().reverse(), &cb).rowwise().reverse();
  enc = mask.asDiagonal() * enc;
  nn::Matrix e = proj_w_.value * enc;
  e.colwise() += proj_b_.value.col(0);

  nn::Matrix de = nn::Matrix::Zero(e.rows(), T);
  const double l = crf_nll(e, transitions_.value, gold, &de, &transitions_.grad, weight);
  proj_w_.grad.noalias() += de * enc.transpose();
  proj_b_.grad.col(0) += de.rowwise().sum();
  nn::Matrix denc = proj_w_.value.transpose() * de;
  denc = mask.asDiagonal() * denc;
  fwd_.backward(cf, denc.topRows(h));
  const nn::Matrix db = denc.bottomRows(h).rowwise().reverse();
  bwd_.backward(cb, db);
  return l;
}

std::vector<std::string> TaggerModel::predict_labels(const nn::Matrix& features) const {
  if (features.cols() == 0) return {};
  const auto path = viterbi_decode(emissions(features), transitions_.value).path;
  std::vector<std::string> out;
  for (const auto y : path) out.push_back(labels_.label(y));
  return out;
}

std::vector<std::string> TaggerModel::predict_labels(const std::vector<std::string>& tokens,
                                                     embed::StackState& state) const {
  if (tokens.empty()) return {};
  return predict_labels(stack_->embed(tokens, state));
}

std::vector<SpanPrediction> TaggerModel::predict_spans(const nn::Matrix& features) const {
  if (task_ != TaggerTask::kConcepts) throw Error("span prediction needs a concept tagger");
  if (features.cols() == 0) return {};
  const nn::Matrix e = emissions(features);
  const auto path = viterbi_decode(e, transitions_.value).path;
  const nn::Matrix mu = crf_marginals(e, transitions_.value);
  std::vector<std::string> tags;
  for (const auto y : path) tags.push_back(labels_.label(y));
  std::vector<SpanPrediction> out;
  for (auto& span : corpus::decode_tags(tags, scheme_)) {
    double sum = 0;
    for (std::size_t t = span.begin; t < span.end; ++t) sum += mu(path[t], t);
    const double conf = sum / static_cast<double>(span.end - span.begin);
    out.push_back({std::move(span), std::clamp(conf, 0.0, 1.0)});
  }
  return out;
}

std::vector<SpanPrediction> TaggerModel::predict_spans(const std::vector<std::string>& tokens,
                                                       embed::StackState& state) const {
  if (tokens.empty()) return {};
  return predict_spans(stack_->embed(tokens, state));
}

void TaggerModel::write(BinaryWriter& w) const {
  w.u8(task_ == TaggerTask::kPos ? 0 : 1);
  w.u8(scheme_ == corpus::TagScheme::kBIOES ? 0 : 1);
  labels_.write(w);
  w.u32(static_cast<std::uint32_t>(fwd_.hidden_size()));
  stack_->write(w);
  w.u64(memory_.memories.size());
  for (const auto& m : memory_.memories) m.write(w);
  w.vector(mean_);
  w.vector(inv_std_);
  nn::write_params(w, const_cast<TaggerModel*>(this)->params());
}

TaggerModel TaggerModel::read_from(BinaryReader& r) {
  TaggerModel m;
  m.task_ = r.u8() == 0 ? TaggerTask::kPos : TaggerTask::kConcepts;
  m.scheme_ = r.u8() == 0 ? corpus::TagScheme::kBIOES : corpus::TagScheme::kBIO;
  m.labels_ = LabelVocab::read_from(r);
  const auto h = static_cast<Eigen::Index>(r.u32());
  m.stack_ = std::make_shared<const embed::EmbeddingStack>(embed::EmbeddingStack::read_from(r));
  const auto n = r.u64();
  if (n != m.stack_->size()) throw FormatError("tagger memory does not match its embedding stack");
  for (std::uint64_t i = 0; i < n; ++i) m.memory_.memories.push_back(embed::PooledMemory::read_from(r));
  const auto D = m.stack_->dim();
  m.mean_ = r.vector();
  m.inv_std_ = r.vector();
  if (m.mean_.size() != D || m.inv_std_.size() != D) {
    throw FormatError("tagger standardization does not match its embedding stack");
  }
  const auto L = static_cast<Eigen::Index>(m.labels_.size());
  m.fwd_ = nn::Lstm("tagger.lstm.fwd", D, h);
  m.bwd_ = nn::Lstm("tagger.lstm.bwd", D, h);
  m.proj_w_ = nn::Param("tagger.proj.w", L, 2 * h);
  m.proj_b_ = nn::Param("tagger.proj.b", L, 1);
  m.transitions_ = nn::Param("tagger.crf.transitions", L + 2, L + 2);
  nn::read_params(r, m.params());
  return m;
}

std::vector<nn::Matrix> embed_sentences(const embed::EmbeddingStack& stack,
                                        const std::vector<TaggedSentence>& sentences,
                                        embed::StackState& state) {
  std::vector<nn::Matrix> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) {
    out.push_back(s.tokens.empty() ? nn::Matrix(stack.dim(), 0) : stack.embed(s.tokens, state));
  }
  return out;
}

namespace {

std::vector<eval::LabeledSpan> labeled(const std::vector<corpus::TokenSpan>& spans) {
  std::vector<eval::LabeledSpan> out;
  for (const auto& s : spans) out.push_back({s.begin, s.end, s.type});
  return out;
}

}  // namespace

double dev_score(const TaggerModel& model, const std::vector<nn::Matrix>& features,
                 const std::vector<TaggedSentence>& gold) {
  if (features.size() != gold.size()) throw Error("feature and sentence counts differ");
  if (model.task() == TaggerTask::kPos) {
    std::size_t correct = 0, total = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const auto pred = model.predict_labels(features[i]);
      for (std::size_t t = 0; t < pred.size(); ++t) correct += pred[t] == gold[i].labels[t];
      total += pred.size();
    }
    return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  }
  eval::MatchCounts counts;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto pred = model.predict_labels(features[i]);
    counts += eval::match_spans(labeled(corpus::decode_tags(gold[i].labels, model.scheme())),
                                labeled(corpus::decode_tags(pred, model.scheme())),
                                eval::MatchMode::kStrict);
  }
  return eval::scores(counts.micro()).f1;
}

TaggerModel train_tagger(const std::vector<TaggedSentence>& train,
                         const std::vector<TaggedSentence>& dev_in,
                         std::shared_ptr<const embed::EmbeddingStack> stack,
                         const corpus::Schema& schema, const TaggerConfig& config,
                         TrainReport* report) {
  config.validate();
  TrainReport local;
  TrainReport& rep = report ? *report : local;
  rep = {};
  std::size_t train_tokens = 0;
  for (const auto& s : train) {
    if (s.tokens.size() != s.labels.size()) throw Error("sentence has differing token and label counts");
    train_tokens += s.tokens.size();
  }
  if (train_tokens == 0) throw Error("training corpus is empty");

  std::vector<std::vector<std::string>> label_seqs;
  for (const auto& s : train) label_seqs.push_back(s.labels);
  const LabelVocab labels = config.task == TaggerTask::kConcepts
                                ? LabelVocab::for_concepts(schema, config.scheme)
                                : LabelVocab::observed(label_seqs);
  std::string fallback = "O";
  if (config.task == TaggerTask::kPos) {
    std::map<std::string, std::size_t> freq;
    for (const auto& s : train) {
      for (const auto& l : s.labels) ++freq[l];
    }
    fallback = std::max_element(freq.begin(), freq.end(), [](const auto& a, const auto& b) {
                 return a.second < b.second;
               })->first;
  }
  for (const auto& s : train) {
    for (const auto& l : s.labels) {
      if (!labels.contains(l)) throw Error("training label '" + l + "' is not in the label set");
    }
  }
  // Unseen dev labels are mapped to the fallback.
  std::vector<TaggedSentence> dev = dev_in;
  std::set<std::string> unseen;
  for (auto& s : dev) {
    if (s.tokens.size() != s.labels.size()) throw Error("sentence has differing token and label counts");
    for (auto& l : s.labels) {
      if (!labels.contains(l)) {
        unseen.insert(l);
        l = fallback;
      }
    }
  }
  for (const auto& l : unseen) {
    rep.warnings.push_back("dev label '" + l + "' does not occur in training; scored as '" + fallback + "'");
  }

  Rng init_rng(derive_seed(config.seed, 1));
  TaggerModel model(stack, labels, config.task, config.scheme, config.hidden, init_rng);
  auto state = stack->fresh_state();
  const auto train_x = embed_sentences(*stack, train, state);
  model.set_memory(state);
  model.fit_standardization(train_x);
  auto dev_state = model.fresh_state();
  const auto dev_x = embed_sentences(*stack, dev, dev_state);

  std::vector<std::vector<std::size_t>> gold(train.size());
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < train.size(); ++i) {
    for (const auto& l : train[i].labels) gold[i].push_back(static_cast<std::size_t>(labels.index(l)));
    if (!train[i].tokens.empty()) order.push_back(i);
  }

  if (config.max_epochs == 0) {
    rep.warnings.push_back("0 epochs requested; returning the randomly initialized model");
    return model;
  }
  if (dev.empty()) rep.warnings.push_back("no dev data; selecting the epoch with the lowest training loss");

  std::ofstream log;
  if (!config.log_path.empty()) {
    log.open(config.log_path, std::ios::app);
    if (!log) throw Error("cannot open training log " + config.log_path);
  }

  auto params = model.params();
  nn::Sgd sgd(config.lr);
  double best = -std::numeric_limits<double>::infinity();
  std::vector<nn::Matrix> best_values = nn::snapshot(params);
  int stagnant = 0;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Rng rng(derive_seed(config.seed, 1000 + static_cast<std::uint64_t>(epoch)));
    auto shuffled = order;
    rng.shuffle(shuffled);
    double total = 0;
    const auto B = static_cast<std::size_t>(config.batch_size);
    for (std::size_t b = 0; b < shuffled.size(); b += B) {
      const auto end = std::min(shuffled.size(), b + B);
      const double weight = 1.0 / static_cast<double>(end - b);
      nn::zero_grads(params);
      for (std::size_t k = b; k < end; ++k) {
        const auto i = shuffled[k];
        total += model.loss(train_x[i], gold[i], weight, &rng, config.word_dropout, config.locked_dropout);
      }
      nn::clip_grad_norm(params, config.clip);
      sgd.step(params);
    }
    if (!nn::all_finite(params)) throw Error("tagger training diverged at epoch " + std::to_string(epoch));

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = sgd.lr();
    rec.train_loss = total / static_cast<double>(order.size());
    rec.dev_score = dev.empty() ? -rec.train_loss : dev_score(model, dev_x, dev);
    if (rec.dev_score > best) {
      best = rec.dev_score;
      best_values = nn::snapshot(params);
      rep.best_epoch = epoch;
      rep.best_dev = rec.dev_score;
      rec.best = true;
      stagnant = 0;
    } else if (++stagnant >= config.patience) {
      sgd.set_lr(sgd.lr() * config.anneal_factor);
      stagnant = 0;
    }
    rep.epochs.push_back(rec);
    if (log) {
      log << "epoch " << epoch << "\tlr " << rec.lr << "\tloss " << rec.train_loss << "\tdev "
          << rec.dev_score << (rec.best ? "\tbest" : "") << "\n";
      log.flush();
    }
    if (sgd.lr() < config.min_lr) break;
  }
  nn::restore(params, best_values);
  return model;
}

}  // namespace mex::tagger
