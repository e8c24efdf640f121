#include "reversener/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace reversener {

namespace {

void finish(TypeScore& s) {
  double p = (s.tp + s.fp) > 0 ? 100.0 * s.tp / (s.tp + s.fp) : 0.0;
  double r = (s.tp + s.fn) > 0 ? 100.0 * s.tp / (s.tp + s.fn) : 0.0;
  s.precision = p;
  s.recall = r;
  s.f1 = (p + r) > 0 ? 2 * p * r / (p + r) : 0.0;
}

}  // namespace

EvaluationReport micro_f1(const std::map<int, std::vector<EntityMention>>& pred,
                          const std::map<int, std::vector<EntityMention>>& gold,
                          std::size_t n_sentences) {
  for (const auto& [id, _] : pred)
    if (id < 0 || static_cast<std::size_t>(id) >= n_sentences)
      throw std::invalid_argument("micro_f1: unknown sentence id " +
                                  std::to_string(id));

  EvaluationReport report;
  report.n_sentences = n_sentences;

  auto set_of = [](const std::map<int, std::vector<EntityMention>>& m, int id) {
    std::set<EntityMention> out;
    auto it = m.find(id);
    if (it != m.end()) out.insert(it->second.begin(), it->second.end());
    return out;
  };

  for (std::size_t i = 0; i < n_sentences; ++i) {
    int id = static_cast<int>(i);
    auto p = set_of(pred, id);
    auto g = set_of(gold, id);
    report.total_predicted += static_cast<long>(p.size());
    report.total_gold += static_cast<long>(g.size());
    for (const auto& m : p) {
      bool hit = g.count(m) > 0;
      auto& t = report.per_type[m.entity_label];
      if (hit) {
        ++t.tp;
        ++report.overall.tp;
      } else {
        ++t.fp;
        ++report.overall.fp;
      }
    }
    for (const auto& m : g) {
      if (p.count(m)) continue;
      ++report.per_type[m.entity_label].fn;
      ++report.overall.fn;
    }
  }

  for (auto& [_, t] : report.per_type) finish(t);
  finish(report.overall);
  return report;
}

double ahs(const std::vector<EmbeddingVector>& task_vecs,
           const std::vector<EmbeddingVector>& lib_vecs) {
  if (task_vecs.empty()) throw std::invalid_argument("ahs: empty task set");
  if (lib_vecs.empty()) throw std::invalid_argument("ahs: empty library");
  double sum = 0;
  for (const auto& t : task_vecs) {
    double best = -1.0;
    for (const auto& e : lib_vecs)
      best = std::max(best, cosine_similarity(t, e));
    sum += best;
  }
  return sum / task_vecs.size();
}

std::optional<double> entity_diversity(const std::vector<std::string>& entities,
                                       EmbeddingProvider& embedder) {
  std::vector<std::string> unique;
  for (const auto& e : entities)
    if (std::find(unique.begin(), unique.end(), e) == unique.end())
      unique.push_back(e);
  const std::size_t n = unique.size();
  if (n < 2) return std::nullopt;

  auto vecs = embedder.embed_batch(unique);
  double sum = 0;
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      sum += 1.0 - cosine_similarity(vecs[i], vecs[j]);
  return 2.0 * sum / (static_cast<double>(n) * (n - 1));
}

LibraryQualityReport library_quality(
    const ExampleLibrary& library, const TaskSet& task,
    const std::vector<EmbeddingVector>& task_vecs,
    EmbeddingProvider& embedder) {
  LibraryQualityReport report;
  report.ahs = ahs(task_vecs, library.embeddings);

  std::map<std::string, std::vector<std::string>> lib_pool, task_pool;
  for (const auto& ex : library.examples)
    for (const auto& m : ex.entities)
      lib_pool[m.entity_label].push_back(m.entity_text);
  for (const auto& [_, mentions] : task.gold)
    for (const auto& m : mentions)
      task_pool[m.entity_label].push_back(m.entity_text);

  std::set<std::string> labels;
  for (const auto& [l, _] : lib_pool) labels.insert(l);
  for (const auto& [l, _] : task_pool) labels.insert(l);

  for (const auto& label : labels) {
    auto ed_lib = entity_diversity(lib_pool[label], embedder);
    auto ed_task = entity_diversity(task_pool[label], embedder);
    if (ed_lib) report.ed_library[label] = *ed_lib;
    if (ed_task) report.ed_task[label] = *ed_task;
    if (ed_lib && ed_task && *ed_task > 0) {
      report.edr[label] = *ed_lib / *ed_task;
    } else {
      report.skipped_types.push_back(label);
      std::cerr << "note: EDR unavailable for type " << label
                << " (needs >= 2 unique entities on both sides)\n";
    }
  }
  return report;
}

std::string report_table(const EvaluationReport& report) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(2);
  out << "Label      Precision     Recall         F1         TP     FP     FN\n";
  auto row = [&](const std::string& label, const TypeScore& t) {
    out.width(8);
    out << std::left << label << std::right;
    out.width(11);
    out << t.precision;
    out.width(11);
    out << t.recall;
    out.width(11);
    out << t.f1;
    out.width(11);
    out << t.tp;
    out.width(7);
    out << t.fp;
    out.width(7);
    out << t.fn;
    out << "\n";
  };
  for (const auto& [label, t] : report.per_type) row(label, t);
  row("Overall", report.overall);
  return out.str();
}

}  // namespace reversener
