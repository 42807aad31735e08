#include "mex/eval/iaa.hpp"

#include <algorithm>
#include <tuple>

#include "mex/core/error.hpp"

namespace mex::eval {

namespace {

using Item = std::tuple<std::string, std::size_t, std::size_t>;

std::vector<std::size_t> characters(const corpus::SpanAnnotation& s) {
  std::vector<std::size_t> out;
  for (const auto& f : s.fragments) {
    for (auto i = f.start; i < f.end; ++i) out.push_back(i);
  }
  return out;
}

std::vector<Item> items(const corpus::AnnotatedDocument& doc, IaaTarget target) {
  std::vector<Item> out;
  if (target == IaaTarget::kConcepts) {
    for (const auto& s : doc.spans) {
      for (const auto i : characters(s)) out.emplace_back(s.type, i, 0);
    }
  } else {
    for (const auto& r : doc.relations) {
      const auto* a1 = doc.find_span(r.arg1);
      const auto* a2 = doc.find_span(r.arg2);
      if (!a1 || !a2) continue;
      const auto c1 = characters(*a1), c2 = characters(*a2);
      for (const auto i : c1) {
        for (const auto j : c2) out.emplace_back(r.relation, i, j);
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

ClassCounts char_level_counts(const corpus::AnnotatedDocument& reference,
                              const corpus::AnnotatedDocument& other, IaaTarget target) {
  if (reference.text != other.text) {
    throw Error("document " + reference.doc_id + " has different text for annotators " +
                reference.annotator_id + " and " + other.annotator_id);
  }
  const auto a = items(reference, target), b = items(other, target);
  std::vector<Item> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  return {common.size(), b.size() - common.size(), a.size() - common.size()};
}

IaaReport char_level_iaa(const std::map<std::string, std::vector<corpus::AnnotatedDocument>>& versions,
                         IaaTarget target) {
  IaaReport report;
  std::vector<std::string> names;
  std::map<std::string, std::map<std::string, const corpus::AnnotatedDocument*>> index;
  for (const auto& [annotator, docs] : versions) {
    names.push_back(annotator);
    for (const auto& d : docs) index[annotator][d.doc_id] = &d;
  }
  for (std::size_t x = 0; x < names.size(); ++x) {
    for (std::size_t y = x + 1; y < names.size(); ++y) {
      PairAgreement pair{names[x], names[y], 0, {}, 0.0};
      for (const auto& [doc_id, doc] : index[names[x]]) {
        const auto it = index[names[y]].find(doc_id);
        if (it == index[names[y]].end()) continue;
        ++pair.shared_docs;
        pair.counts += char_level_counts(*doc, *it->second, target);
      }
      if (pair.shared_docs == 0) {
        report.notices.push_back("annotators " + names[x] + " and " + names[y] +
                                 " share no documents; pair omitted");
        continue;
      }
      pair.f1 = scores(pair.counts).f1;
      report.pairs.push_back(pair);
    }
  }
  if (report.pairs.empty()) {
    throw Error("inter-annotator agreement needs two annotators with a shared document");
  }
  double sum = 0.0;
  for (const auto& p : report.pairs) sum += p.f1;
  report.mean_f1 = sum / static_cast<double>(report.pairs.size());
  return report;
}

}  // namespace mex::eval
