#include "sapar/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

namespace sapar {

namespace {

std::size_t collect(const Tree& t, std::size_t begin, std::vector<Bracket>& out) {
  if (t.is_leaf()) return begin + 1;
  std::size_t end = begin;
  for (const auto& c : t.children) end = collect(c, end, out);
  out.push_back({begin, end, t.label});
  return end;
}

}  // namespace

std::vector<Bracket> brackets(const Tree& t) {
  std::vector<Bracket> out;
  collect(t, 0, out);
  std::sort(out.begin(), out.end());
  return out;
}

EvalResult make_result(std::size_t sentences, std::size_t matched, std::size_t predicted, std::size_t gold) {
  EvalResult r{sentences, matched, predicted, gold};
  r.recall = gold ? 100.0 * static_cast<double>(matched) / static_cast<double>(gold) : 0.0;
  r.precision = predicted ? 100.0 * static_cast<double>(matched) / static_cast<double>(predicted) : 0.0;
  r.f1 = r.recall + r.precision > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

EvalResult score(std::span<const Tree> predicted, std::span<const Tree> gold) {
  if (predicted.size() != gold.size())
    throw std::invalid_argument("evaluation: " + std::to_string(predicted.size()) + " predicted trees for " +
                                std::to_string(gold.size()) + " gold trees");
  std::size_t matched = 0, npred = 0, ngold = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (predicted[s].num_leaves() != gold[s].num_leaves())
      throw std::invalid_argument("evaluation: sentence " + std::to_string(s) + " has " +
                                  std::to_string(predicted[s].num_leaves()) + " predicted words and " +
                                  std::to_string(gold[s].num_leaves()) + " gold words");
    const auto p = brackets(predicted[s]);
    const auto g = brackets(gold[s]);
    std::vector<Bracket> common;
    std::set_intersection(p.begin(), p.end(), g.begin(), g.end(), std::back_inserter(common));
    matched += common.size();
    npred += p.size();
    ngold += g.size();
  }
  return make_result(gold.size(), matched, npred, ngold);
}

std::string report(const EvalResult& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "sentences        %zu\n"
                "gold brackets    %zu\n"
                "test brackets    %zu\n"
                "matched          %zu\n"
                "recall (LR)      %.2f\n"
                "precision (LP)   %.2f\n"
                "F1               %.2f\n",
                r.sentences, r.gold, r.predicted, r.matched, r.recall, r.precision, r.f1);
  return buf;
}

std::string machine_line(const EvalResult& r) {
  nlohmann::json j = {{"sentences", r.sentences}, {"matched", r.matched}, {"predicted", r.predicted},
                      {"gold", r.gold},           {"recall", r.recall},   {"precision", r.precision},
                      {"f1", r.f1}};
  return j.dump();
}

}  // namespace sapar
