#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sapar/analysis.hpp"
#include "sapar/chart.hpp"
#include "sapar/checkpoint.hpp"
#include "sapar/cli.hpp"
#include "sapar/config.hpp"
#include "sapar/evaluation.hpp"
#include "sapar/model.hpp"
#include "sapar/synth.hpp"
#include "sapar/trainer.hpp"
#include "sapar/tree.hpp"

namespace py = pybind11;
using namespace sapar;

namespace {

std::vector<std::string> render_all(const std::vector<Tree>& trees) {
  std::vector<std::string> out;
  out.reserve(trees.size());
  for (const auto& t : trees) out.push_back(render_bracketed(t));
  return out;
}

std::vector<Tree> parse_all_text(const std::vector<std::string>& texts) {
  std::vector<Tree> out;
  for (const auto& text : texts)
    for (auto& t : parse_bracketed(text)) out.push_back(std::move(t));
  return out;
}

py::dict result_dict(const EvalResult& r) {
  py::dict d;
  d["sentences"] = r.sentences;
  d["matched"] = r.matched;
  d["predicted"] = r.predicted;
  d["gold"] = r.gold;
  d["recall"] = r.recall;
  d["precision"] = r.precision;
  d["f1"] = r.f1;
  return d;
}

Sentence make_sentence(std::vector<std::string> words, std::optional<std::vector<std::string>> tags) {
  Sentence s;
  s.words = std::move(words);
  if (tags) {
    if (tags->size() != s.words.size()) throw std::invalid_argument("tags and words differ in length");
    s.tags = std::move(*tags);
  }
  return s;
}

AttentionControl control_for(std::optional<std::string> window, const std::string& mode) {
  AttentionControl c;
  if (window) {
    const auto d = parse_distances(*window);
    if (d.size() != 1) throw std::invalid_argument("window takes a single distance");
    c.window = std::make_pair(d[0], window_mode_from_string(mode));
  }
  return c;
}

/// Dense [n+1, n+1, labels] array; entry [i, j, l] scores span (i, j) with
/// label l. Label 0 and entries with j <= i are ignored.
ScoreChart chart_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 3 || a.shape(0) != a.shape(1) || a.shape(0) < 2 || a.shape(2) < 2)
    throw std::invalid_argument("scores must have shape (n + 1, n + 1, labels) with n >= 1 and labels >= 2");
  const auto n = static_cast<std::size_t>(a.shape(0) - 1);
  const auto labels = static_cast<std::size_t>(a.shape(2));
  auto v = a.unchecked<3>();
  ScoreChart chart(n, labels);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j <= n; ++j)
      for (LabelId l = 1; l < labels; ++l) chart.set(i, j, l, v(i, j, l));
  return chart;
}

py::list span_list(const BinaryTree& t) {
  py::list out;
  for (const auto& s : gold_spans(t)) out.append(py::make_tuple(s.begin, s.end, s.label));
  return out;
}

class Parser {
 public:
  explicit Parser(std::unique_ptr<ParserModel> model) : model_(std::move(model)) {}

  static Parser load(const std::string& path) { return Parser(load_checkpoint(path)); }

  std::string parse(std::vector<std::string> words, std::optional<std::vector<std::string>> tags,
                    std::optional<std::string> window, const std::string& window_mode) const {
    const Sentence s = make_sentence(std::move(words), std::move(tags));
    const auto control = control_for(std::move(window), window_mode);
    py::gil_scoped_release release;
    return render_bracketed(model_->parse(s, control));
  }

  std::vector<std::string> parse_many(const std::vector<std::vector<std::string>>& sentences,
                                      std::size_t threads) const {
    std::vector<Sentence> batch;
    for (const auto& words : sentences) batch.push_back(make_sentence(words, std::nullopt));
    std::vector<Tree> trees;
    {
      py::gil_scoped_release release;
      trees = model_->parse_trees(batch, {}, threads);
    }
    return render_all(trees);
  }

  py::array_t<double> attention(std::vector<std::string> words, std::optional<std::vector<std::string>> tags,
                                std::optional<std::string> window, const std::string& window_mode) const {
    const Sentence s = make_sentence(std::move(words), std::move(tags));
    const AttentionTrace trace = model_->attention(s, control_for(std::move(window), window_mode));
    const std::size_t layers = trace.size(), heads = layers ? trace[0].size() : 0, t = s.size() + 2;
    py::array_t<double> out({layers, heads, t, t});
    auto view = out.mutable_unchecked<4>();
    for (std::size_t l = 0; l < layers; ++l)
      for (std::size_t h = 0; h < heads; ++h)
        for (std::size_t q = 0; q < t; ++q)
          for (std::size_t k = 0; k < t; ++k) view(l, h, q, k) = trace[l][h][q * t + k];
    return out;
  }

  py::dict evaluate(const std::string& gold_text, std::optional<std::string> window,
                    const std::string& window_mode, std::size_t threads) const {
    const auto gold = parse_bracketed(gold_text);
    std::vector<Sentence> sentences;
    for (const auto& t : gold) sentences.push_back(sentence_of(t));
    const auto control = control_for(std::move(window), window_mode);
    EvalResult r;
    {
      py::gil_scoped_release release;
      r = score(model_->parse_trees(sentences, control, threads), gold);
    }
    return result_dict(r);
  }

  std::size_t num_parameters() const { return model_->parameters().count(); }
  std::vector<std::string> labels() const { return model_->labels().names(); }
  std::string config() const { return to_json(model_->config()).dump(); }

 private:
  std::unique_ptr<ParserModel> model_;
};

py::dict train_model(const std::string& config_json, const std::string& train_text, const std::string& dev_text,
                     const std::string& checkpoint, std::size_t threads) {
  const RunConfig config = run_config_from_json(nlohmann::json::parse(config_json));
  const auto train_trees = parse_bracketed(train_text);
  const auto dev_trees = parse_bracketed(dev_text);
  TrainResult result;
  {
    py::gil_scoped_release release;
    auto model = ParserModel::from_treebank(config.model, train_trees);
    TrainOptions options;
    options.threads = threads;
    options.on_improvement = [&](const ParserModel& m, const EvalRecord& rec) {
      save_checkpoint(checkpoint, m, {{"dev_f1", rec.dev_f1}, {"batches", rec.batches}});
    };
    result = train(model, train_trees, dev_trees, config.train, options);
  }
  py::list history;
  for (const auto& r : result.history) {
    py::dict d;
    d["batches"] = r.batches;
    d["epoch"] = r.epoch;
    d["lr"] = r.lr;
    d["train_loss"] = r.train_loss;
    d["dev_f1"] = r.dev_f1;
    d["improved"] = r.improved;
    d["halvings"] = r.halvings;
    history.append(d);
  }
  py::dict out;
  out["best_dev_f1"] = result.best_dev_f1;
  out["batches"] = result.batches;
  out["epochs"] = result.epochs;
  out["halvings"] = result.halvings;
  out["history"] = history;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Self-attentive constituency parser";

  py::register_exception<ParseError>(m, "TreebankError", PyExc_ValueError);
  py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_IOError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);

  m.def("read_trees", [](const std::string& text) { return render_all(parse_bracketed(text)); }, py::arg("text"),
        "Normalised one-line renderings of every tree in a bracketed text.");
  m.def(
      "collapse_unary", [](const std::string& tree) { return render_bracketed(collapse_unary(parse_bracketed(tree).at(0))); },
      py::arg("tree"));
  m.def("expand_unary", [](const std::string& tree) { return render_bracketed(expand_unary(parse_bracketed(tree).at(0))); },
        py::arg("tree"));
  m.def(
      "brackets",
      [](const std::string& tree) {
        std::vector<std::tuple<std::size_t, std::size_t, std::string>> out;
        for (auto& b : brackets(parse_bracketed(tree).at(0))) out.emplace_back(b.begin, b.end, b.label);
        return out;
      },
      py::arg("tree"));
  m.def(
      "evaluate",
      [](const std::vector<std::string>& predicted, const std::vector<std::string>& gold) {
        return result_dict(score(parse_all_text(predicted), parse_all_text(gold)));
      },
      py::arg("predicted"), py::arg("gold"), "Labeled bracket recall, precision and F1 in percent.");
  m.def(
      "synthetic_treebank",
      [](std::size_t count, std::uint64_t seed, std::size_t min_length, std::size_t max_length) {
        return render_all(synthetic_treebank({count, seed, min_length, max_length}));
      },
      py::arg("count") = 50, py::arg("seed") = 1, py::arg("min_length") = 1, py::arg("max_length") = 20);

  m.def(
      "cky_decode",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& scores) {
        const auto d = cky_decode_scored(chart_from_array(scores));
        return py::make_tuple(span_list(d.tree), d.objective);
      },
      py::arg("scores"), "Best tree as (begin, end, label) spans in pre-order, and its score.");
  m.def(
      "loss_augmented_decode",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& scores,
         const std::vector<std::tuple<std::size_t, std::size_t, LabelId>>& gold) {
        std::vector<LabeledSpan> g;
        for (auto [i, j, l] : gold) g.push_back({i, j, l});
        const auto d = loss_augmented_decode(chart_from_array(scores), g);
        return py::make_tuple(span_list(d.tree), d.objective);
      },
      py::arg("scores"), py::arg("gold"));

  m.def(
      "window_mask",
      [](std::size_t length, const std::string& distance, const std::string& mode) {
        const auto d = parse_distances(distance);
        if (d.size() != 1) throw std::invalid_argument("window_mask takes a single distance");
        const auto mask = build_window_mask(length, d[0], window_mode_from_string(mode));
        py::array_t<bool> out({length, length});
        auto view = out.mutable_unchecked<2>();
        for (std::size_t i = 0; i < length; ++i)
          for (std::size_t j = 0; j < length; ++j) view(i, j) = mask.allowed(i, j);
        return out;
      },
      py::arg("length"), py::arg("distance"), py::arg("mode") = "strict");

  m.def(
      "lr_schedule",
      [](std::size_t batches, std::size_t halvings, double base_lr, std::size_t warmup, double factor) {
        TrainConfig c;
        c.base_lr = base_lr;
        c.warmup_batches = warmup;
        c.halving_factor = factor;
        return lr_schedule(batches, halvings, c);
      },
      py::arg("batches"), py::arg("halvings") = 0, py::arg("base_lr") = 0.0008, py::arg("warmup") = 160,
      py::arg("factor") = 0.5);

  m.def("default_config", [] { return to_json(RunConfig{}).dump(); }, "Default run configuration as JSON text.");

  m.def("train", &train_model, py::arg("config"), py::arg("train"), py::arg("dev"), py::arg("checkpoint"),
        py::arg("threads") = 1,
        "Trains from JSON configuration text and bracketed treebank texts, saving the best model to checkpoint.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int status;
        {
          py::gil_scoped_release release;
          status = run_cli(args, out, err);
        }
        return py::make_tuple(status, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in process; returns (status, stdout, stderr).");

  py::class_<Parser>(m, "Parser")
      .def_static("load", &Parser::load, py::arg("path"))
      .def("parse", &Parser::parse, py::arg("words"), py::arg("tags") = py::none(), py::arg("window") = py::none(),
           py::arg("window_mode") = "strict")
      .def("parse_many", &Parser::parse_many, py::arg("sentences"), py::arg("threads") = 1)
      .def("attention", &Parser::attention, py::arg("words"), py::arg("tags") = py::none(),
           py::arg("window") = py::none(), py::arg("window_mode") = "strict",
           "Attention probabilities with shape (layers, heads, n + 2, n + 2).")
      .def("evaluate", &Parser::evaluate, py::arg("gold"), py::arg("window") = py::none(),
           py::arg("window_mode") = "strict", py::arg("threads") = 1)
      .def_property_readonly("num_parameters", &Parser::num_parameters)
      .def_property_readonly("labels", &Parser::labels)
      .def_property_readonly("config", &Parser::config);
}
