#include "sapar/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>

namespace sapar {

using nlohmann::json;

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int k = 0; k < 4; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xff);
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xff);
  out.write(b, 8);
}

class Reader {
 public:
  Reader(std::istream& in, const std::filesystem::path& path) : in_(in), path_(path) {}

  void bytes(char* dst, std::size_t n, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw CheckpointError(path_.string() + ": truncated while reading " + what);
  }
  std::uint64_t u(int width, const char* what) {
    unsigned char b[8];
    bytes(reinterpret_cast<char*>(b), static_cast<std::size_t>(width), what);
    std::uint64_t v = 0;
    for (int k = width - 1; k >= 0; --k) v = (v << 8) | b[k];
    return v;
  }
  std::uint32_t u32(const char* what) { return static_cast<std::uint32_t>(u(4, what)); }
  std::uint64_t u64(const char* what) { return u(8, what); }
  std::string str(std::size_t n, const char* what) {
    std::string s(n, '\0');
    bytes(s.data(), n, what);
    return s;
  }

 private:
  std::istream& in_;
  const std::filesystem::path& path_;
};

json vocabulary_json(const Vocabulary& v) {
  return {{"words", v.words.symbols()}, {"tags", v.tags.symbols()}, {"chars", v.chars.symbols()}};
}

json read_header(Reader& r, const std::filesystem::path& path) {
  char magic[8];
  r.bytes(magic, 8, "magic");
  if (std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw CheckpointError(path.string() + ": not a checkpoint file (bad magic)");
  const auto version = r.u32("version");
  if (version != kCheckpointVersion)
    throw CheckpointError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  const auto length = r.u64("metadata length");
  if (length > (std::uint64_t{1} << 32)) throw CheckpointError(path.string() + ": implausible metadata length");
  json meta = json::parse(r.str(length, "metadata"), nullptr, false);
  if (meta.is_discarded() || !meta.is_object()) throw CheckpointError(path.string() + ": corrupt metadata");
  return meta;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ParserModel& model, const json& extra) {
  json meta = {{"config", to_json(model.config())},
               {"vocabulary", vocabulary_json(model.vocabulary())},
               {"labels", model.labels().names()},
               {"extra", extra}};
  const std::string text = meta.dump();
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write checkpoint '" + path.string() + "'");
    out.write(kCheckpointMagic, 8);
    put_u32(out, kCheckpointVersion);
    put_u64(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    const auto& params = model.parameters().all();
    put_u64(out, params.size());
    for (const auto& p : params) {
      put_u32(out, static_cast<std::uint32_t>(p.name.size()));
      out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
      put_u32(out, 2);
      put_u64(out, p.tensor.rows());
      put_u64(out, p.tensor.cols());
      for (double x : p.tensor.values()) {
        std::uint64_t bits;
        std::memcpy(&bits, &x, 8);
        put_u64(out, bits);
      }
    }
    if (!out) throw CheckpointError("failed writing checkpoint '" + path.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

json read_checkpoint_metadata(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint '" + path.string() + "'");
  Reader r(in, path);
  return read_header(r, path);
}

std::unique_ptr<ParserModel> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint '" + path.string() + "'");
  Reader r(in, path);
  const json meta = read_header(r, path);

  std::unique_ptr<ParserModel> model;
  try {
    const ModelConfig config = model_config_from_json(meta.at("config"));
    Vocabulary vocab;
    const auto& v = meta.at("vocabulary");
    vocab.words = SymbolTable(v.at("words").get<std::vector<std::string>>());
    vocab.tags = SymbolTable(v.at("tags").get<std::vector<std::string>>());
    vocab.chars = SymbolTable(v.at("chars").get<std::vector<std::string>>());
    const auto names = meta.at("labels").get<std::vector<std::string>>();
    if (names.empty() || names[0] != LabelInventory::null_name)
      throw CheckpointError(path.string() + ": label list must start with the dummy label");
    LabelInventory labels;
    for (std::size_t i = 1; i < names.size(); ++i) labels.add(names[i]);
    model = std::make_unique<ParserModel>(config, std::move(vocab), std::move(labels));
  } catch (const json::exception& e) {
    throw CheckpointError(path.string() + ": malformed metadata: " + e.what());
  } catch (const ConfigError& e) {
    throw CheckpointError(path.string() + ": invalid stored configuration: " + e.what());
  }

  auto& store = model->parameters();
  const auto count = r.u64("parameter count");
  if (count != store.all().size())
    throw CheckpointError(path.string() + ": " + std::to_string(count) + " parameters stored, model has " +
                          std::to_string(store.all().size()));
  std::map<std::string, bool> loaded;
  for (std::uint64_t k = 0; k < count; ++k) {
    const std::string name = r.str(r.u32("name length"), "parameter name");
    if (!store.contains(name)) throw CheckpointError(path.string() + ": unexpected parameter '" + name + "'");
    if (loaded[name]) throw CheckpointError(path.string() + ": duplicate parameter '" + name + "'");
    loaded[name] = true;
    const auto rank = r.u32("rank");
    if (rank != 2) throw CheckpointError(path.string() + ": parameter '" + name + "' has rank " + std::to_string(rank));
    const auto rows = r.u64("shape");
    const auto cols = r.u64("shape");
    auto& tensor = store.get(name).tensor;
    if (rows != tensor.rows() || cols != tensor.cols())
      throw CheckpointError(path.string() + ": parameter '" + name + "' stored as " + std::to_string(rows) + "x" +
                            std::to_string(cols) + ", model expects " + std::to_string(tensor.rows()) + "x" +
                            std::to_string(tensor.cols()));
    auto& values = tensor.mutable_values();
    for (auto& x : values) {
      const std::uint64_t bits = r.u64("parameter values");
      std::memcpy(&x, &bits, 8);
    }
  }
  return model;
}

}  // namespace sapar
