#include "mex/eval/report.hpp"

#include <algorithm>
#include <cstdio>

namespace mex::eval {

namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%6.2f", 100.0 * v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::size_t name_width(const EvalReport& r) {
  std::size_t w = 5;
  for (const auto& row : r.classes) w = std::max(w, row.name.size());
  return w + 2;
}

nlohmann::ordered_json scores_json(const Scores& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

}  // namespace

std::string format_table(const EvalReport& report, const std::string& title) {
  const auto w = name_width(report);
  std::string out;
  if (!title.empty()) out += title + "\n";
  out += pad("class", w) + "     P       R      F1       #\n";
  auto line = [&](const std::string& name, const Scores& s, std::size_t support) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%8zu", support);
    out += pad(name, w) + pct(s.precision) + "  " + pct(s.recall) + "  " + pct(s.f1) + buf + "\n";
  };
  for (const auto& row : report.classes) line(row.name, row.scores, row.support);
  line("micro", report.micro, report.micro_counts.support());
  line("macro", report.macro, report.micro_counts.support());
  return out;
}

std::string format_table(const CrossValidationReport& report, const std::string& title) {
  std::string out;
  if (!title.empty()) out += title + "\n";
  std::size_t w = 7;
  for (const auto& [name, ms] : report.class_f1) w = std::max(w, name.size() + 2);
  out += pad("class", w) + "  F1 mean    std\n";
  auto line = [&](const std::string& name, const MeanStd& ms) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "  %7.2f  %5.2f\n", 100.0 * ms.mean, 100.0 * ms.std);
    out += pad(name, w) + buf;
  };
  for (const auto& [name, ms] : report.class_f1) line(name, ms);
  line("micro", report.micro_f1);
  line("macro", report.macro_f1);
  return out;
}

std::string format_iaa(const IaaReport& report) {
  std::string out;
  for (const auto& p : report.pairs) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s / %s  docs=%zu  F1=%.4f\n", p.annotator_a.c_str(),
                  p.annotator_b.c_str(), p.shared_docs, p.f1);
    out += buf;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "mean F1=%.4f over %zu pairs\n", report.mean_f1,
                report.pairs.size());
  out += buf;
  for (const auto& n : report.notices) out += "note: " + n + "\n";
  return out;
}

nlohmann::ordered_json to_json(const EvalReport& report) {
  nlohmann::ordered_json classes = nlohmann::ordered_json::array();
  for (const auto& row : report.classes) {
    classes.push_back({{"name", row.name},
                       {"precision", row.scores.precision},
                       {"recall", row.scores.recall},
                       {"f1", row.scores.f1},
                       {"support", row.support},
                       {"tp", row.counts.tp},
                       {"fp", row.counts.fp},
                       {"fn", row.counts.fn}});
  }
  return {{"classes", classes}, {"micro", scores_json(report.micro)},
          {"macro", scores_json(report.macro)}};
}

nlohmann::ordered_json to_json(const CrossValidationReport& report) {
  nlohmann::ordered_json folds = nlohmann::ordered_json::array();
  for (const auto& f : report.folds) folds.push_back(to_json(f));
  nlohmann::ordered_json classes = nlohmann::ordered_json::array();
  for (const auto& [name, ms] : report.class_f1) {
    classes.push_back({{"name", name}, {"f1_mean", ms.mean}, {"f1_std", ms.std}});
  }
  return {{"folds", folds},
          {"classes", classes},
          {"micro_f1", {{"mean", report.micro_f1.mean}, {"std", report.micro_f1.std}}},
          {"macro_f1", {{"mean", report.macro_f1.mean}, {"std", report.macro_f1.std}}}};
}

nlohmann::ordered_json to_json(const IaaReport& report) {
  nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
  for (const auto& p : report.pairs) {
    pairs.push_back({{"a", p.annotator_a},
                     {"b", p.annotator_b},
                     {"shared_docs", p.shared_docs},
                     {"tp", p.counts.tp},
                     {"fp", p.counts.fp},
                     {"fn", p.counts.fn},
                     {"f1", p.f1}});
  }
  return {{"pairs", pairs}, {"mean_f1", report.mean_f1}, {"notices", report.notices}};
}

}  // namespace mex::eval
