#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sapar/encoder.hpp"
#include "sapar/evaluation.hpp"
#include "sapar/model.hpp"

namespace sapar {

/// Comma-separated distances; "inf" (or "none") means no window.
std::vector<std::size_t> parse_distances(const std::string& text);
std::string distance_name(std::size_t distance);

/// Terms "kind:layers" joined by '+', where kind is content or position and
/// layers is all, none, firstK or lastK: the layers that keep that kind of
/// attention. Unmentioned kinds stay on everywhere. "baseline" disables nothing.
AttentionControl parse_disable_spec(const std::string& spec, std::size_t num_layers);

/// Baseline, each kind off everywhere, and content kept only in the first or
/// last half and three quarters of the layers.
std::vector<std::string> default_disable_specs(std::size_t num_layers);

struct WindowRow {
  std::size_t distance = kUnboundedDistance;
  WindowMode mode = WindowMode::Strict;
  EvalResult result;
};

/// One row per (distance, mode), distances ascending.
std::vector<WindowRow> analyze_window(const ParserModel& model, std::span<const Sentence> sentences,
                                      std::span<const Tree> gold, std::vector<std::size_t> distances,
                                      std::span<const WindowMode> modes, std::size_t threads = 1);

struct DisableRow {
  std::string spec;
  EvalResult result;
};

std::vector<DisableRow> analyze_disable(const ParserModel& model, std::span<const Sentence> sentences,
                                        std::span<const Tree> gold, std::span<const std::string> specs,
                                        std::size_t threads = 1);

std::string window_table(std::span<const WindowRow> rows);
std::string disable_table(std::span<const DisableRow> rows);
/// Long format: layer, head, query, key, prob; one line per matrix entry.
std::string attention_table(const AttentionTrace& trace);

}  // namespace sapar
