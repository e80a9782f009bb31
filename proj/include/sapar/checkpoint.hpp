#pragma once

#include <filesystem>
#include <memory>
#include <stdexcept>

#include <json.hpp>

#include "sapar/model.hpp"

namespace sapar {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr char kCheckpointMagic[8] = {'S', 'A', 'P', 'A', 'R', 'S', 'E', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Model configuration, vocabulary, labels and `extra` as metadata, followed
/// by every parameter as little-endian 64-bit floats. See docs/formats.md.
void save_checkpoint(const std::filesystem::path& path, const ParserModel& model,
                     const nlohmann::json& extra = nlohmann::json::object());

std::unique_ptr<ParserModel> load_checkpoint(const std::filesystem::path& path);

/// Only the metadata block.
nlohmann::json read_checkpoint_metadata(const std::filesystem::path& path);

}  // namespace sapar
