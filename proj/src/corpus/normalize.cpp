#include "mex/corpus/normalize.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "mex/core/error.hpp"

namespace mex::corpus {
namespace {

// Global token index range [first, last] overlapped by a fragment, or
// {1, 0} when no token overlaps.
std::pair<std::size_t, std::size_t> token_range(const AnnotatedDocument& doc, Fragment f) {
  std::size_t idx = 0, first = 1, last = 0;
  bool found = false;
  for (const auto& sent : doc.sentences) {
    for (const auto& tok : sent.tokens) {
      if (tok.start < f.end && f.start < tok.end) {
        if (!found) first = idx;
        last = idx;
        found = true;
      }
      ++idx;
    }
  }
  return {first, last};
}

bool within_one_sentence(const AnnotatedDocument& doc, Fragment f) {
  for (const auto& sent : doc.sentences) {
    if (sent.start <= f.start && f.end <= sent.end) return true;
  }
  return false;
}

// Collapses or drops discontinuous spans; returns survivors.
std::vector<SpanAnnotation> contiguous_spans(const AnnotatedDocument& doc,
                                             DiscontinuousPolicy policy,
                                             NormalizationReport* report) {
  std::vector<SpanAnnotation> out;
  for (const auto& s : doc.spans) {
    if (!s.discontinuous()) {
      out.push_back(s);
      continue;
    }
    if (policy == DiscontinuousPolicy::kDrop) {
      if (report) ++report->dropped_discontinuous;
      continue;
    }
    SpanAnnotation c = s;
    c.fragments = {s.envelope()};
    c.surface = doc.surface_of(c.fragments);
    out.push_back(std::move(c));
    if (report) ++report->collapsed_discontinuous;
  }
  return out;
}

}  // namespace

std::string NormalizationPolicy::describe() const {
  std::ostringstream os;
  os << "drop_cross_sentence=" << (drop_cross_sentence ? 1 : 0)
     << " nested=longest-span"
     << " multi_label=corpus-frequency"
     << " discontinuous="
     << (collapse_discontinuous == DiscontinuousPolicy::kEnvelope ? "envelope" : "drop");
  return os.str();
}

NormalizationReport& NormalizationReport::operator+=(const NormalizationReport& o) {
  collapsed_discontinuous += o.collapsed_discontinuous;
  dropped_discontinuous += o.dropped_discontinuous;
  cross_sentence += o.cross_sentence;
  no_token += o.no_token;
  nested += o.nested;
  multi_label += o.multi_label;
  relations_dropped += o.relations_dropped;
  attributes_dropped += o.attributes_dropped;
  return *this;
}

std::string NormalizationReport::to_string() const {
  std::ostringstream os;
  os << "collapsed_discontinuous=" << collapsed_discontinuous
     << " dropped_discontinuous=" << dropped_discontinuous
     << " cross_sentence=" << cross_sentence << " no_token=" << no_token
     << " nested=" << nested << " multi_label=" << multi_label
     << " relations_dropped=" << relations_dropped
     << " attributes_dropped=" << attributes_dropped;
  return os.str();
}

ConceptFrequency concept_frequencies(const std::vector<AnnotatedDocument>& docs) {
  ConceptFrequency freq;
  for (const auto& doc : docs) {
    for (const auto& s : contiguous_spans(doc, DiscontinuousPolicy::kEnvelope, nullptr)) {
      if (within_one_sentence(doc, s.fragments.front())) ++freq[s.type];
    }
  }
  return freq;
}

NormalizeResult normalize_document(const AnnotatedDocument& doc,
                                   const NormalizationPolicy& policy,
                                   const ConceptFrequency& freq) {
  if (doc.sentences.empty() && !doc.text.empty() && !doc.spans.empty()) {
    throw Error("normalize_document: document " + doc.doc_id + " is not tokenized");
  }
  NormalizeResult result{doc, {}};
  auto& report = result.report;
  auto spans = contiguous_spans(doc, policy.collapse_discontinuous, &report);

  struct Candidate {
    SpanAnnotation span;
    std::size_t first_token, last_token;
  };
  std::vector<Candidate> cands;
  for (auto& s : spans) {
    const auto f = s.fragments.front();
    if (policy.drop_cross_sentence && !within_one_sentence(doc, f)) {
      ++report.cross_sentence;
      continue;
    }
    const auto [first, last] = token_range(doc, f);
    if (first > last) {
      ++report.no_token;
      continue;
    }
    cands.push_back({std::move(s), first, last});
  }

  // Longest span wins over anything it strictly contains.
  std::vector<bool> keep(cands.size(), true);
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const auto a = cands[i].span.fragments.front();
    for (std::size_t j = 0; j < cands.size(); ++j) {
      const auto b = cands[j].span.fragments.front();
      if (i != j && b.start <= a.start && a.end <= b.end && b.length() > a.length()) {
        keep[i] = false;
        break;
      }
    }
  }
  std::vector<Candidate> survivors;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (keep[i]) survivors.push_back(std::move(cands[i]));
    else ++report.nested;
  }

  // Remaining token-level conflicts: more frequent type first, then
  // lexicographic type, then longer, earlier, smaller id.
  auto frequency = [&](const std::string& type) {
    const auto it = freq.find(type);
    return it == freq.end() ? std::size_t{0} : it->second;
  };
  std::vector<std::size_t> rank(survivors.size());
  for (std::size_t i = 0; i < rank.size(); ++i) rank[i] = i;
  std::sort(rank.begin(), rank.end(), [&](std::size_t x, std::size_t y) {
    const auto& a = survivors[x].span;
    const auto& b = survivors[y].span;
    const auto fa = frequency(a.type), fb = frequency(b.type);
    if (fa != fb) return fa > fb;
    if (a.type != b.type) return a.type < b.type;
    if (a.envelope().length() != b.envelope().length()) {
      return a.envelope().length() > b.envelope().length();
    }
    if (a.start() != b.start()) return a.start() < b.start();
    return a.id < b.id;
  });
  std::vector<bool> accepted(survivors.size(), false);
  for (const auto i : rank) {
    bool clash = false;
    for (std::size_t j = 0; j < survivors.size() && !clash; ++j) {
      clash = accepted[j] && survivors[i].first_token <= survivors[j].last_token &&
              survivors[j].first_token <= survivors[i].last_token;
    }
    if (clash) ++report.multi_label;
    else accepted[i] = true;
  }

  auto& out = result.doc;
  out.spans.clear();
  std::set<std::string> kept_ids;
  for (std::size_t i = 0; i < survivors.size(); ++i) {
    if (!accepted[i]) continue;
    kept_ids.insert(survivors[i].span.id);
    out.spans.push_back(std::move(survivors[i].span));
  }
  std::vector<RelationAnnotation> relations;
  for (const auto& r : doc.relations) {
    if (kept_ids.count(r.arg1) && kept_ids.count(r.arg2)) relations.push_back(r);
    else ++report.relations_dropped;
  }
  out.relations = std::move(relations);
  std::vector<AttributeAssignment> attributes;
  for (const auto& a : doc.attributes) {
    if (kept_ids.count(a.target)) attributes.push_back(a);
    else ++report.attributes_dropped;
  }
  out.attributes = std::move(attributes);
  out.prune_order();
  out.provenance = policy.describe();
  return result;
}

MergeResult merge_annotators(const std::vector<AnnotatedDocument>& versions,
                             const std::map<std::string, std::size_t>& counts) {
  std::map<std::string, std::vector<const AnnotatedDocument*>> by_id;
  for (const auto& v : versions) by_id[v.doc_id].push_back(&v);

  auto count_of = [&](const std::string& annotator) {
    const auto it = counts.find(annotator);
    return it == counts.end() ? std::size_t{0} : it->second;
  };

  MergeResult result;
  for (const auto& [doc_id, group] : by_id) {
    const AnnotatedDocument* best = nullptr;
    MergeDecision decision{doc_id, {}, {}};
    for (const auto* v : group) {
      decision.candidates.push_back(v->annotator_id);
      if (v->text != group.front()->text) {
        throw Error("merge: document " + doc_id + " has differing text between annotators " +
                    group.front()->annotator_id + " and " + v->annotator_id);
      }
      if (!best) {
        best = v;
        continue;
      }
      const auto cv = count_of(v->annotator_id), cb = count_of(best->annotator_id);
      if (cv > cb || (cv == cb && v->annotator_id < best->annotator_id)) best = v;
    }
    decision.chosen = best->annotator_id;
    std::sort(decision.candidates.begin(), decision.candidates.end());
    result.docs.push_back(*best);
    result.log.push_back(std::move(decision));
  }
  return result;
}

MergeResult merge_annotators(const std::vector<AnnotatedDocument>& versions) {
  std::map<std::string, std::size_t> counts;
  for (const auto& v : versions) ++counts[v.annotator_id];
  return merge_annotators(versions, counts);
}

}  // namespace mex::corpus
