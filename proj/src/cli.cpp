#include "sapar/cli.hpp"

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sapar/analysis.hpp"
#include "sapar/checkpoint.hpp"
#include "sapar/evaluation.hpp"
#include "sapar/lexical.hpp"
#include "sapar/model.hpp"
#include "sapar/trainer.hpp"
#include "sapar/vocabulary.hpp"

namespace sapar {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Input {
  std::vector<Sentence> sentences;
  std::vector<Tree> trees;  // filled for treebank input
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string detect_format(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (line[first] == '(') return "tree";
    std::istringstream tokens(line);
    std::string tok;
    bool all_tagged = true;
    while (tokens >> tok) {
      const auto us = tok.rfind('_');
      if (us == std::string::npos || us == 0 || us + 1 == tok.size()) all_tagged = false;
    }
    return all_tagged ? "tagged" : "plain";
  }
  return "plain";
}

Input read_input(const fs::path& path, std::string format) {
  const std::string text = slurp(path);
  if (format == "auto") format = detect_format(text);
  Input input;
  if (format == "tree") {
    input.trees = parse_bracketed(text);
    for (const auto& t : input.trees) input.sentences.push_back(sentence_of(t));
  } else if (format == "tagged" || format == "plain") {
    input.sentences = read_sentences(path, format == "tagged");
  } else {
    throw UsageError("unknown input format '" + format + "'");
  }
  return input;
}

std::vector<Tree> read_trees(const fs::path& path) { return parse_bracketed(slurp(path)); }

void attach_vectors(std::vector<Sentence>& sentences, const std::string& path) {
  if (!path.empty()) attach_external_vectors(sentences, read_external_vectors(path));
}

std::unique_ptr<ParserModel> load_model(const std::string& path) { return load_checkpoint(path); }

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << text;
}

std::string header(const std::string& command, const std::vector<std::pair<std::string, std::string>>& fields) {
  std::string h = "# sapar " + command + "\n";
  for (const auto& [k, v] : fields) h += "# " + k + ": " + v + "\n";
  return h;
}

AttentionControl window_control(const std::optional<std::string>& distance, const std::string& mode) {
  AttentionControl control;
  if (distance) {
    const auto d = parse_distances(*distance);
    if (d.size() != 1) throw UsageError("--window takes a single distance");
    control.window = std::make_pair(d[0], window_mode_from_string(mode));
  }
  return control;
}

struct TrainArgs {
  std::string config, train, dev, out, log, train_vectors, dev_vectors;
  std::vector<std::string> overrides;
  std::size_t threads = 1;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  json j = a.config.empty() ? to_json(RunConfig{}) : read_json_file(a.config);
  apply_overrides(j, a.overrides);
  const RunConfig config = run_config_from_json(j);
  const auto train_trees = read_trees(a.train);
  const auto dev_trees = read_trees(a.dev);
  if (train_trees.empty()) throw UsageError("training treebank '" + a.train + "' has no trees");
  if (dev_trees.empty()) throw UsageError("development treebank '" + a.dev + "' has no trees");
  std::optional<ExternalVectors> train_vectors, dev_vectors;
  if (config.model.lexical.mode == LexicalMode::External) {
    if (a.train_vectors.empty() || a.dev_vectors.empty())
      throw UsageError("the external lexical mode needs --train-vectors and --dev-vectors");
    train_vectors = read_external_vectors(a.train_vectors);
    dev_vectors = read_external_vectors(a.dev_vectors);
  }

  std::ofstream log_file;
  std::ostream* log = &out;
  if (!a.log.empty() && a.log != "-") {
    log_file.open(a.log);
    if (!log_file) throw std::runtime_error("cannot write log '" + a.log + "'");
    log = &log_file;
  }

  auto model = ParserModel::from_treebank(config.model, train_trees);
  std::vector<std::pair<std::string, std::string>> fields = {{"config", to_json(config).dump()}};
  for (const auto& o : a.overrides) fields.emplace_back("set", o);
  fields.emplace_back("train", a.train + " (" + std::to_string(train_trees.size()) + " trees)");
  fields.emplace_back("dev", a.dev + " (" + std::to_string(dev_trees.size()) + " trees)");
  fields.emplace_back("labels", std::to_string(model.labels().size()));
  fields.emplace_back("parameters", std::to_string(model.parameters().count()));
  *log << header("train", fields) << std::flush;

  TrainOptions options;
  options.log = log;
  options.threads = a.threads;
  options.train_vectors = train_vectors ? &*train_vectors : nullptr;
  options.dev_vectors = dev_vectors ? &*dev_vectors : nullptr;
  const json extra = {{"overrides", a.overrides}, {"train_file", a.train}, {"dev_file", a.dev}};
  options.on_improvement = [&](const ParserModel& m, const EvalRecord& rec) {
    json e = extra;
    e["dev_f1"] = rec.dev_f1;
    e["batches"] = rec.batches;
    save_checkpoint(a.out, m, e);
  };
  const TrainResult result = train(model, train_trees, dev_trees, config.train, options);
  *log << "# best_dev_f1: " << result.best_dev_f1 << "\n# batches: " << result.batches
       << "\n# halvings: " << result.halvings << "\n# checkpoint: " << a.out << "\n";
  return kExitOk;
}

struct ParseArgs {
  std::string model, input, output, format = "auto", vectors, window_mode = "strict";
  std::optional<std::string> window;
  std::size_t threads = 1;
};

int cmd_parse(const ParseArgs& a, std::ostream& out, std::ostream& err) {
  Input input = read_input(a.input, a.format);
  attach_vectors(input.sentences, a.vectors);
  const auto control = window_control(a.window, a.window_mode);
  const auto model = load_model(a.model);
  const auto outcomes = model->parse_all(input.sentences, control, a.threads);
  std::string text;
  std::size_t failures = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].tree) {
      text += render_bracketed(*outcomes[i].tree) + "\n";
    } else {
      ++failures;
      text += "# error: sentence " + std::to_string(i) + ": " + outcomes[i].error + "\n";
      err << "sentence " << i << ": " << outcomes[i].error << "\n";
    }
  }
  write_output(a.output, text, out);
  if (failures) {
    err << failures << " of " << outcomes.size() << " sentences failed\n";
    return kExitRuntime;
  }
  return kExitOk;
}

struct EvalArgs {
  std::string gold, pred, model, vectors;
  bool json_line = false;
  std::size_t threads = 1;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const auto gold = read_trees(a.gold);
  std::vector<Tree> predicted;
  if (!a.pred.empty() == !a.model.empty()) throw UsageError("eval needs exactly one of --pred and --model");
  if (!a.pred.empty()) {
    predicted = read_trees(a.pred);
  } else {
    std::vector<Sentence> sentences;
    for (const auto& t : gold) sentences.push_back(sentence_of(t));
    attach_vectors(sentences, a.vectors);
    predicted = load_model(a.model)->parse_trees(sentences, {}, a.threads);
  }
  const EvalResult r = score(predicted, gold);
  out << report(r);
  if (a.json_line) out << machine_line(r) << "\n";
  return kExitOk;
}

struct WindowArgs {
  std::string model, dev, output, vectors, distances = "0,1,2,3,4,6,8,inf", mode = "both";
  std::size_t threads = 1;
};

int cmd_analyze_window(const WindowArgs& a, std::ostream& out) {
  const auto gold = read_trees(a.dev);
  std::vector<Sentence> sentences;
  for (const auto& t : gold) sentences.push_back(sentence_of(t));
  attach_vectors(sentences, a.vectors);
  std::vector<WindowMode> modes;
  if (a.mode == "both") modes = {WindowMode::Strict, WindowMode::Relaxed};
  else modes = {window_mode_from_string(a.mode)};
  const auto distances = parse_distances(a.distances);
  const auto model = load_model(a.model);
  const auto rows = analyze_window(*model, sentences, gold, distances, modes, a.threads);
  write_output(a.output,
               header("analyze-window", {{"model", a.model}, {"dev", a.dev},
                                         {"sentences", std::to_string(gold.size())}}) +
                   window_table(rows),
               out);
  return kExitOk;
}

struct DisableArgs {
  std::string model, dev, output, vectors;
  std::vector<std::string> specs;
  std::size_t threads = 1;
};

int cmd_analyze_disable(const DisableArgs& a, std::ostream& out) {
  const auto gold = read_trees(a.dev);
  std::vector<Sentence> sentences;
  for (const auto& t : gold) sentences.push_back(sentence_of(t));
  attach_vectors(sentences, a.vectors);
  const auto model = load_model(a.model);
  const auto specs = a.specs.empty() ? default_disable_specs(model->config().encoder.num_layers) : a.specs;
  for (const auto& s : specs) parse_disable_spec(s, model->config().encoder.num_layers);
  const auto rows = analyze_disable(*model, sentences, gold, specs, a.threads);
  write_output(a.output,
               header("analyze-disable", {{"model", a.model}, {"dev", a.dev},
                                          {"layers", std::to_string(model->config().encoder.num_layers)},
                                          {"sentences", std::to_string(gold.size())}}) +
                   disable_table(rows),
               out);
  return kExitOk;
}

struct DumpArgs {
  std::string model, sentence, input, output, format = "auto", vectors, disable, window_mode = "strict";
  std::optional<std::string> window;
  std::size_t index = 0;
  bool tagged = false;
};

int cmd_dump_attention(const DumpArgs& a, std::ostream& out) {
  if (a.sentence.empty() == a.input.empty()) throw UsageError("dump-attention needs exactly one of --sentence and --input");
  Sentence s;
  if (!a.sentence.empty()) {
    s = a.tagged ? parse_tagged_line(a.sentence) : parse_plain_line(a.sentence);
    if (!a.vectors.empty()) {
      std::vector<Sentence> one{s};
      attach_vectors(one, a.vectors);
      s = one[0];
    }
  } else {
    Input input = read_input(a.input, a.format);
    attach_vectors(input.sentences, a.vectors);
    if (a.index >= input.sentences.size())
      throw UsageError("--index " + std::to_string(a.index) + " but the input has " +
                       std::to_string(input.sentences.size()) + " sentences");
    s = input.sentences[a.index];
  }
  if (s.size() == 0) throw UsageError("empty sentence");
  const auto model = load_model(a.model);
  AttentionControl control = parse_disable_spec(a.disable, model->config().encoder.num_layers);
  control.window = window_control(a.window, a.window_mode).window;
  const auto trace = model->attention(s, control);
  std::string words;
  for (const auto& w : s.words) words += (words.empty() ? "" : " ") + w;
  write_output(a.output,
               header("dump-attention", {{"model", a.model}, {"sentence", words},
                                         {"tokens", std::to_string(s.size() + 2) + " (start, words, stop)"}}) +
                   attention_table(trace),
               out);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"sapar: self-attentive constituency parser"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a parser and write the best checkpoint");
  train_cmd->add_option("--config", train_args.config, "JSON configuration file")->check(CLI::ExistingFile);
  train_cmd->add_option("--train", train_args.train, "Training treebank")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--dev", train_args.dev, "Development treebank")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train_args.out, "Checkpoint to write")->required();
  train_cmd->add_option("--set", train_args.overrides, "Override a config value, e.g. --set train.base_lr=0.001");
  train_cmd->add_option("--log", train_args.log, "Training log file (default: stdout)");
  train_cmd->add_option("--train-vectors", train_args.train_vectors, "External vectors for the training set")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--dev-vectors", train_args.dev_vectors, "External vectors for the development set")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--threads", train_args.threads, "Threads for development-set parsing")
      ->check(CLI::PositiveNumber);

  ParseArgs parse_args;
  auto* parse_cmd = app.add_subcommand("parse", "Parse sentences with a trained checkpoint");
  parse_cmd->add_option("--model", parse_args.model, "Checkpoint")->required()->check(CLI::ExistingFile);
  parse_cmd->add_option("--input", parse_args.input, "Sentences, tagged sentences or trees")
      ->required()
      ->check(CLI::ExistingFile);
  parse_cmd->add_option("--output", parse_args.output, "Output treebank (default: stdout)");
  parse_cmd->add_option("--format", parse_args.format, "auto, tree, tagged or plain")
      ->check(CLI::IsMember({"auto", "tree", "tagged", "plain"}));
  parse_cmd->add_option("--vectors", parse_args.vectors, "External vectors for the input")->check(CLI::ExistingFile);
  parse_cmd->add_option("--window", parse_args.window, "Attention window distance (or inf)");
  parse_cmd->add_option("--window-mode", parse_args.window_mode, "strict or relaxed")
      ->check(CLI::IsMember({"strict", "relaxed"}));
  parse_cmd->add_option("--threads", parse_args.threads, "Worker threads")->check(CLI::PositiveNumber);

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Labeled bracket precision, recall and F1");
  eval_cmd->add_option("--gold", eval_args.gold, "Gold treebank")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--pred", eval_args.pred, "Predicted treebank")->check(CLI::ExistingFile);
  eval_cmd->add_option("--model", eval_args.model, "Parse the gold sentences with this checkpoint")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--vectors", eval_args.vectors, "External vectors for the gold sentences")
      ->check(CLI::ExistingFile);
  eval_cmd->add_flag("--json", eval_args.json_line, "Also print a JSON line");
  eval_cmd->add_option("--threads", eval_args.threads, "Worker threads")->check(CLI::PositiveNumber);

  WindowArgs window_args;
  auto* window_cmd = app.add_subcommand("analyze-window", "Dev F1 under test-time attention windows");
  window_cmd->add_option("--model", window_args.model, "Checkpoint")->required()->check(CLI::ExistingFile);
  window_cmd->add_option("--dev", window_args.dev, "Development treebank")->required()->check(CLI::ExistingFile);
  window_cmd->add_option("--distances", window_args.distances, "Comma-separated distances, 'inf' for none");
  window_cmd->add_option("--mode", window_args.mode, "strict, relaxed or both")
      ->check(CLI::IsMember({"strict", "relaxed", "both"}));
  window_cmd->add_option("--vectors", window_args.vectors, "External vectors")->check(CLI::ExistingFile);
  window_cmd->add_option("--output", window_args.output, "Output table (default: stdout)");
  window_cmd->add_option("--threads", window_args.threads, "Worker threads")->check(CLI::PositiveNumber);

  DisableArgs disable_args;
  auto* disable_cmd =
      app.add_subcommand("analyze-disable", "Dev F1 with content or position attention switched off per layer");
  disable_cmd->add_option("--model", disable_args.model, "Checkpoint")->required()->check(CLI::ExistingFile);
  disable_cmd->add_option("--dev", disable_args.dev, "Development treebank")->required()->check(CLI::ExistingFile);
  disable_cmd->add_option("--spec", disable_args.specs, "e.g. baseline, content:none, content:last4+position:all");
  disable_cmd->add_option("--vectors", disable_args.vectors, "External vectors")->check(CLI::ExistingFile);
  disable_cmd->add_option("--output", disable_args.output, "Output table (default: stdout)");
  disable_cmd->add_option("--threads", disable_args.threads, "Worker threads")->check(CLI::PositiveNumber);

  DumpArgs dump_args;
  auto* dump_cmd = app.add_subcommand("dump-attention", "Attention probabilities of every layer and head");
  dump_cmd->add_option("--model", dump_args.model, "Checkpoint")->required()->check(CLI::ExistingFile);
  dump_cmd->add_option("--sentence", dump_args.sentence, "Whitespace-separated words");
  dump_cmd->add_flag("--tagged", dump_args.tagged, "--sentence tokens are word_tag");
  dump_cmd->add_option("--input", dump_args.input, "Read the sentence from a file")->check(CLI::ExistingFile);
  dump_cmd->add_option("--index", dump_args.index, "Sentence index within --input");
  dump_cmd->add_option("--format", dump_args.format, "auto, tree, tagged or plain")
      ->check(CLI::IsMember({"auto", "tree", "tagged", "plain"}));
  dump_cmd->add_option("--vectors", dump_args.vectors, "External vectors")->check(CLI::ExistingFile);
  dump_cmd->add_option("--disable", dump_args.disable, "Disable spec as in analyze-disable");
  dump_cmd->add_option("--window", dump_args.window, "Attention window distance (or inf)");
  dump_cmd->add_option("--window-mode", dump_args.window_mode, "strict or relaxed")
      ->check(CLI::IsMember({"strict", "relaxed"}));
  dump_cmd->add_option("--output", dump_args.output, "Output table (default: stdout)");

  std::vector<std::string> argv_store{"sapar"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train_args, out);
    if (*parse_cmd) return cmd_parse(parse_args, out, err);
    if (*eval_cmd) return cmd_eval(eval_args, out);
    if (*window_cmd) return cmd_analyze_window(window_args, out);
    if (*disable_cmd) return cmd_analyze_disable(disable_args, out);
    if (*dump_cmd) return cmd_dump_attention(dump_args, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace sapar
