#include <iostream>

#include <CLI11.hpp>

#include "sapar/synth.hpp"
#include "sapar/tree.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write a synthetic treebank"};
  sapar::SynthOptions options;
  std::string output;
  app.add_option("--count", options.count, "Number of trees");
  app.add_option("--seed", options.seed, "Random seed");
  app.add_option("--min-length", options.min_length, "Shortest sentence");
  app.add_option("--max-length", options.max_length, "Longest sentence");
  app.add_option("--output", output, "Output file")->required();
  CLI11_PARSE(app, argc, argv);
  try {
    const auto trees = sapar::synthetic_treebank(options);
    sapar::write_treebank(output, trees);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
