#include "sapar/analysis.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace sapar {

std::vector<std::size_t> parse_distances(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    if (item == "inf" || item == "none") {
      out.push_back(kUnboundedDistance);
      continue;
    }
    std::size_t used = 0;
    unsigned long long d = 0;
    try {
      d = std::stoull(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || item[0] == '-') throw std::invalid_argument("bad window distance '" + item + "'");
    out.push_back(static_cast<std::size_t>(d));
  }
  if (out.empty()) throw std::invalid_argument("no window distances given");
  return out;
}

std::string distance_name(std::size_t distance) {
  return distance == kUnboundedDistance ? "inf" : std::to_string(distance);
}

AttentionControl parse_disable_spec(const std::string& spec, std::size_t num_layers) {
  AttentionControl control;
  control.layers.assign(num_layers, {});
  if (spec.empty() || spec == "baseline" || spec == "none") return control;
  std::stringstream ss(spec);
  std::string term;
  while (std::getline(ss, term, '+')) {
    const auto colon = term.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("disable spec term '" + term + "' lacks ':'");
    const std::string kind = term.substr(0, colon);
    const std::string which = term.substr(colon + 1);
    if (kind != "content" && kind != "position")
      throw std::invalid_argument("disable spec kind must be content or position, got '" + kind + "'");
    std::size_t keep_begin = 0, keep_end = num_layers;
    if (which == "all") {
    } else if (which == "none") {
      keep_end = 0;
    } else if (which.rfind("first", 0) == 0 || which.rfind("last", 0) == 0) {
      const bool first = which[0] == 'f';
      const std::string digits = which.substr(first ? 5 : 4);
      if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit))
        throw std::invalid_argument("bad layer count in '" + term + "'");
      const std::size_t k = std::stoul(digits);
      if (k > num_layers)
        throw std::invalid_argument("'" + term + "' names " + std::to_string(k) + " layers, model has " +
                                    std::to_string(num_layers));
      if (first) keep_end = k;
      else keep_begin = num_layers - k;
    } else {
      throw std::invalid_argument("disable spec layers must be all, none, firstK or lastK, got '" + which + "'");
    }
    for (std::size_t l = 0; l < num_layers; ++l) {
      const bool keep = l >= keep_begin && l < keep_end;
      if (kind == "content") control.layers[l].disable_content = !keep;
      else control.layers[l].disable_position = !keep;
    }
  }
  return control;
}

std::vector<std::string> default_disable_specs(std::size_t num_layers) {
  std::vector<std::string> specs = {"baseline", "position:none", "content:none"};
  std::vector<std::size_t> ks;
  for (std::size_t k : {num_layers / 2, (3 * num_layers) / 4})
    if (k > 0 && k < num_layers && std::find(ks.begin(), ks.end(), k) == ks.end()) ks.push_back(k);
  for (std::size_t k : ks) {
    specs.push_back("content:first" + std::to_string(k));
    specs.push_back("content:last" + std::to_string(k));
  }
  return specs;
}

namespace {

EvalResult evaluate(const ParserModel& model, std::span<const Sentence> sentences, std::span<const Tree> gold,
                    const AttentionControl& control, std::size_t threads) {
  return score(model.parse_trees(sentences, control, threads), gold);
}

}  // namespace

std::vector<WindowRow> analyze_window(const ParserModel& model, std::span<const Sentence> sentences,
                                      std::span<const Tree> gold, std::vector<std::size_t> distances,
                                      std::span<const WindowMode> modes, std::size_t threads) {
  std::sort(distances.begin(), distances.end());
  distances.erase(std::unique(distances.begin(), distances.end()), distances.end());
  std::vector<WindowRow> rows;
  for (std::size_t d : distances)
    for (WindowMode mode : modes) {
      AttentionControl control;
      control.window = std::make_pair(d, mode);
      rows.push_back({d, mode, evaluate(model, sentences, gold, control, threads)});
    }
  return rows;
}

std::vector<DisableRow> analyze_disable(const ParserModel& model, std::span<const Sentence> sentences,
                                        std::span<const Tree> gold, std::span<const std::string> specs,
                                        std::size_t threads) {
  const std::size_t layers = model.config().encoder.num_layers;
  std::vector<AttentionControl> controls;
  for (const auto& s : specs) controls.push_back(parse_disable_spec(s, layers));
  std::vector<DisableRow> rows;
  for (std::size_t i = 0; i < specs.size(); ++i)
    rows.push_back({specs[i], evaluate(model, sentences, gold, controls[i], threads)});
  return rows;
}

std::string window_table(std::span<const WindowRow> rows) {
  std::string out = "distance\tmode\tf1\trecall\tprecision\tmatched\tpredicted\tgold\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s\t%s\t%.4f\t%.4f\t%.4f\t%zu\t%zu\t%zu\n", distance_name(r.distance).c_str(),
                  to_string(r.mode).c_str(), r.result.f1, r.result.recall, r.result.precision, r.result.matched,
                  r.result.predicted, r.result.gold);
    out += buf;
  }
  return out;
}

std::string disable_table(std::span<const DisableRow> rows) {
  std::string out = "spec\tf1\trecall\tprecision\tmatched\tpredicted\tgold\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s\t%.4f\t%.4f\t%.4f\t%zu\t%zu\t%zu\n", r.spec.c_str(), r.result.f1,
                  r.result.recall, r.result.precision, r.result.matched, r.result.predicted, r.result.gold);
    out += buf;
  }
  return out;
}

std::string attention_table(const AttentionTrace& trace) {
  std::string out = "layer\thead\tquery\tkey\tprob\n";
  char buf[128];
  for (std::size_t l = 0; l < trace.size(); ++l)
    for (std::size_t h = 0; h < trace[l].size(); ++h) {
      const auto& m = trace[l][h];
      std::size_t t = 0;
      while (t * t < m.size()) ++t;
      for (std::size_t q = 0; q < t; ++q)
        for (std::size_t k = 0; k < t; ++k) {
          std::snprintf(buf, sizeof buf, "%zu\t%zu\t%zu\t%zu\t%.17g\n", l, h, q, k, m[q * t + k]);
          out += buf;
        }
    }
  return out;
}

}  // namespace sapar
