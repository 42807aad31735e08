#include "mex/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "mex/core/error.hpp"

namespace mex::eval {

const char* mode_name(MatchMode m) { return m == MatchMode::kStrict ? "strict" : "lenient"; }

MatchMode parse_mode(const std::string& name) {
  if (name == "strict") return MatchMode::kStrict;
  if (name == "lenient") return MatchMode::kLenient;
  throw Error("unknown match mode '" + name + "' (expected strict or lenient)");
}

ClassCounts& ClassCounts::operator+=(const ClassCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  return *this;
}

ClassCounts MatchCounts::micro() const {
  ClassCounts total;
  for (const auto& [name, c] : per_class) total += c;
  return total;
}

MatchCounts& MatchCounts::operator+=(const MatchCounts& o) {
  for (const auto& [name, c] : o.per_class) per_class[name] += c;
  return *this;
}

namespace {

std::size_t overlap(const LabeledSpan& a, const LabeledSpan& b) {
  const auto lo = std::max(a.start, b.start), hi = std::min(a.end, b.end);
  return hi > lo ? hi - lo : 0;
}

MatchCounts strict_match(std::vector<LabeledSpan> gold, std::vector<LabeledSpan> pred) {
  std::sort(gold.begin(), gold.end());
  std::sort(pred.begin(), pred.end());
  MatchCounts out;
  for (const auto& g : gold) out.per_class[g.type];
  for (const auto& p : pred) out.per_class[p.type];
  std::size_t i = 0, j = 0;
  while (i < gold.size() || j < pred.size()) {
    if (j == pred.size() || (i < gold.size() && gold[i] < pred[j])) {
      ++out.per_class[gold[i++].type].fn;
    } else if (i == gold.size() || pred[j] < gold[i]) {
      ++out.per_class[pred[j++].type].fp;
    } else {
      ++out.per_class[gold[i].type].tp;
      ++i;
      ++j;
    }
  }
  return out;
}

MatchCounts lenient_match(const std::vector<LabeledSpan>& gold,
                          const std::vector<LabeledSpan>& pred, const MatchOptions& options) {
  const auto ng = gold.size(), np = pred.size();
  std::vector<std::vector<std::size_t>> adj(ng);
  struct Candidate {
    std::size_t overlap, g, p;
  };
  std::vector<Candidate> candidates;
  for (std::size_t g = 0; g < ng; ++g) {
    for (std::size_t p = 0; p < np; ++p) {
      if (options.require_same_type && gold[g].type != pred[p].type) continue;
      const auto ov = overlap(gold[g], pred[p]);
      if (ov == 0) continue;
      adj[g].push_back(p);
      candidates.push_back({ov, g, p});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.overlap != b.overlap) return a.overlap > b.overlap;
    if (gold[a.g].start != gold[b.g].start) return gold[a.g].start < gold[b.g].start;
    if (pred[a.p].start != pred[b.p].start) return pred[a.p].start < pred[b.p].start;
    return std::tie(a.g, a.p) < std::tie(b.g, b.p);
  });

  constexpr auto kFree = static_cast<std::size_t>(-1);
  std::vector<std::size_t> gold_to(ng, kFree), pred_to(np, kFree);
  for (const auto& c : candidates) {
    if (gold_to[c.g] == kFree && pred_to[c.p] == kFree) {
      gold_to[c.g] = c.p;
      pred_to[c.p] = c.g;
    }
  }

  if (options.algorithm == LenientAlgorithm::kMaximum) {
    // Augmenting paths (Kuhn) from every unmatched gold span.
    std::vector<char> visited;
    std::function<bool(std::size_t)> augment = [&](std::size_t g) {
      for (const auto p : adj[g]) {
        if (visited[p]) continue;
        visited[p] = 1;
        if (pred_to[p] == kFree || augment(pred_to[p])) {
          gold_to[g] = p;
          pred_to[p] = g;
          return true;
        }
      }
      return false;
    };
    for (std::size_t g = 0; g < ng; ++g) {
      if (gold_to[g] != kFree) continue;
      visited.assign(np, 0);
      augment(g);
    }
  }

  MatchCounts out;
  for (const auto& p : pred) out.per_class[p.type];
  for (std::size_t g = 0; g < ng; ++g) {
    auto& c = out.per_class[gold[g].type];
    if (gold_to[g] == kFree) {
      ++c.fn;
    } else {
      ++c.tp;
    }
  }
  for (std::size_t p = 0; p < np; ++p) {
    if (pred_to[p] == kFree) ++out.per_class[pred[p].type].fp;
  }
  return out;
}

}  // namespace

MatchCounts match_spans(const std::vector<LabeledSpan>& gold,
                        const std::vector<LabeledSpan>& pred, const MatchOptions& options) {
  if (options.mode == MatchMode::kStrict) return strict_match(gold, pred);
  return lenient_match(gold, pred, options);
}

MatchCounts match_spans(const std::vector<LabeledSpan>& gold,
                        const std::vector<LabeledSpan>& pred, MatchMode mode) {
  MatchOptions options;
  options.mode = mode;
  return match_spans(gold, pred, options);
}

std::vector<LabeledSpan> concept_spans(const corpus::AnnotatedDocument& doc) {
  std::vector<LabeledSpan> out;
  out.reserve(doc.spans.size());
  for (const auto& s : doc.spans) out.push_back({s.start(), s.end(), s.type});
  return out;
}

MatchCounts match_documents(const std::vector<corpus::AnnotatedDocument>& gold,
                            const std::vector<corpus::AnnotatedDocument>& pred,
                            const MatchOptions& options) {
  std::map<std::string, const corpus::AnnotatedDocument*> by_id;
  for (const auto& d : pred) by_id[d.doc_id] = &d;
  MatchCounts total;
  for (const auto& g : gold) {
    const auto it = by_id.find(g.doc_id);
    const auto pred_spans = it == by_id.end() ? std::vector<LabeledSpan>{} : concept_spans(*it->second);
    total += match_spans(concept_spans(g), pred_spans, options);
  }
  return total;
}

Scores scores(const ClassCounts& c) {
  Scores s;
  if (c.tp + c.fp > 0) s.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) s.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  // 2PR/(P+R) written over integer counts: 2TP / (2TP + FP + FN).
  const auto denom = 2 * c.tp + c.fp + c.fn;
  if (c.tp > 0) s.f1 = static_cast<double>(2 * c.tp) / static_cast<double>(denom);
  return s;
}

EvalReport prf_scores(const MatchCounts& counts, const std::vector<std::string>& classes) {
  auto all = counts.per_class;
  for (const auto& name : classes) all[name];
  EvalReport report;
  double macro_p = 0, macro_r = 0, macro_f = 0;
  std::size_t n_macro = 0;
  for (const auto& [name, c] : all) {
    ClassRow row{name, c, scores(c), c.support()};
    if (row.support > 0) {
      macro_p += row.scores.precision;
      macro_r += row.scores.recall;
      macro_f += row.scores.f1;
      ++n_macro;
    }
    report.micro_counts += c;
    report.classes.push_back(std::move(row));
  }
  report.micro = scores(report.micro_counts);
  if (n_macro > 0) {
    report.macro = {macro_p / static_cast<double>(n_macro), macro_r / static_cast<double>(n_macro),
                    macro_f / static_cast<double>(n_macro)};
  }
  return report;
}

MeanStd mean_std(const std::vector<double>& values) {
  if (values.empty()) return {};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (const double v : values) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / n)};
}

CrossValidationReport summarize_folds(const std::vector<MatchCounts>& per_fold,
                                      const std::vector<std::string>& classes) {
  CrossValidationReport out;
  std::vector<double> micro, macro;
  std::map<std::string, std::vector<double>> per_class;
  for (const auto& counts : per_fold) {
    out.folds.push_back(prf_scores(counts, classes));
    micro.push_back(out.folds.back().micro.f1);
    macro.push_back(out.folds.back().macro.f1);
    for (const auto& row : out.folds.back().classes) per_class[row.name].push_back(row.scores.f1);
  }
  out.micro_f1 = mean_std(micro);
  out.macro_f1 = mean_std(macro);
  for (const auto& [name, values] : per_class) out.class_f1[name] = mean_std(values);
  return out;
}

double token_accuracy(const std::vector<std::string>& gold, const std::vector<std::string>& pred) {
  if (gold.size() != pred.size()) {
    throw Error("token_accuracy: " + std::to_string(gold.size()) + " gold tags vs " +
                std::to_string(pred.size()) + " predicted");
  }
  if (gold.empty()) return 1.0;
  std::size_t equal = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) equal += gold[i] == pred[i];
  return static_cast<double>(equal) / static_cast<double>(gold.size());
}

std::vector<RelationTriple> relation_triples(const corpus::AnnotatedDocument& doc) {
  std::vector<RelationTriple> out;
  for (const auto& r : doc.relations) {
    const auto* a1 = doc.find_span(r.arg1);
    const auto* a2 = doc.find_span(r.arg2);
    if (!a1 || !a2) throw Error("relation " + r.id + " in " + doc.doc_id + " has a missing argument");
    out.push_back({doc.doc_id, a1->envelope(), a2->envelope(), r.relation});
  }
  return out;
}

MatchCounts evaluate_relations(const std::vector<RelationTriple>& gold,
                               const std::vector<RelationTriple>& pred) {
  std::vector<RelationTriple> g = gold, p;
  for (const auto& t : pred) {
    if (t.type != kNoRelation) p.push_back(t);
  }
  std::sort(g.begin(), g.end());
  std::sort(p.begin(), p.end());
  MatchCounts out;
  for (const auto& t : g) out.per_class[t.type];
  for (const auto& t : p) out.per_class[t.type];
  std::size_t i = 0, j = 0;
  while (i < g.size() || j < p.size()) {
    if (j == p.size() || (i < g.size() && g[i] < p[j])) {
      ++out.per_class[g[i++].type].fn;
    } else if (i == g.size() || p[j] < g[i]) {
      ++out.per_class[p[j++].type].fp;
    } else {
      ++out.per_class[g[i].type].tp;
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace mex::eval
