#include "pshape/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>

#include "pshape/config.hpp"
#include "pshape/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint blob I/O assumes a little-endian host");

namespace pshape {

using nlohmann::json;

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw CorruptionError("checkpoint truncated while reading a 32-bit field");
  return v;
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw CorruptionError("checkpoint truncated while reading a 64-bit field");
  return v;
}

std::uint32_t blob_crc(const std::vector<char>& blob) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(blob.data()), static_cast<uInt>(blob.size())));
}

}  // namespace

void save_checkpoint(Model& model, const std::string& path, int epoch) {
  json header;
  header["kind"] = to_string(model.config().kind);
  header["config"] = to_json(model.config());
  header["epoch"] = epoch;
  json manifest = json::array();
  std::size_t blob_doubles = 0;
  for (const auto* p : model.parameters()) {
    manifest.push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}});
    blob_doubles += static_cast<std::size_t>(p->value.size());
  }
  header["params"] = std::move(manifest);
  const std::string header_str = header.dump();

  std::vector<char> blob(blob_doubles * sizeof(double));
  std::size_t offset = 0;
  for (const auto* p : model.parameters()) {
    const std::size_t bytes = static_cast<std::size_t>(p->value.size()) * sizeof(double);
    std::memcpy(blob.data() + offset, p->value.data(), bytes);
    offset += bytes;
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open checkpoint '" + path + "' for writing");
  out.write(kCheckpointMagic, 4);
  write_u32(out, kCheckpointVersion);
  write_u64(out, header_str.size());
  out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
  write_u64(out, blob.size());
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  write_u32(out, blob_crc(blob));
  if (!out) throw DataError("failed writing checkpoint '" + path + "'");
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path + "'");

  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    throw CorruptionError("'" + path + "' is not a model checkpoint (bad magic)");
  }
  const std::uint32_t version = read_u32(in);
  if (version != kCheckpointVersion) {
    throw CorruptionError("unsupported checkpoint version " + std::to_string(version) +
                          " (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const std::uint64_t header_len = read_u64(in);
  std::string header_str(header_len, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw CorruptionError("checkpoint truncated inside the header");

  json header;
  try {
    header = json::parse(header_str);
  } catch (const json::parse_error& e) {
    throw CorruptionError("checkpoint header is not valid JSON: " + std::string(e.what()));
  }

  ModelConfig config;
  int epoch = 0;
  try {
    config = model_config_from_json(header.at("config"));
    epoch = header.at("epoch").get<int>();
  } catch (const json::exception& e) {
    throw CorruptionError("checkpoint header is missing required fields: " + std::string(e.what()));
  }

  const std::uint64_t blob_len = read_u64(in);
  std::vector<char> blob(blob_len);
  in.read(blob.data(), static_cast<std::streamsize>(blob_len));
  if (!in) throw CorruptionError("checkpoint truncated inside the parameter blob");
  const std::uint32_t stored_crc = read_u32(in);
  if (stored_crc != blob_crc(blob)) {
    throw CorruptionError("checkpoint blob checksum mismatch; file is corrupted");
  }

  LoadedCheckpoint result;
  result.model = std::make_unique<Model>(config);
  result.epoch = epoch;

  // Validate the declared manifest against the rebuilt architecture, then
  // copy the blob into the parameters.
  const auto& manifest = header.at("params");
  auto& params = result.model->parameters();
  if (manifest.size() != params.size()) {
    throw ConfigError("checkpoint declares " + std::to_string(manifest.size()) +
                      " parameters but the architecture has " + std::to_string(params.size()));
  }
  std::size_t declared_doubles = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& entry = manifest.at(i);
    const Index rows = entry.at("rows").get<Index>();
    const Index cols = entry.at("cols").get<Index>();
    if (entry.at("name").get<std::string>() != params[i]->name || rows != params[i]->value.rows() ||
        cols != params[i]->value.cols()) {
      throw ConfigError("checkpoint parameter '" + entry.at("name").get<std::string>() + "' (" +
                        std::to_string(rows) + "x" + std::to_string(cols) +
                        ") does not match architecture parameter '" + params[i]->name + "' (" +
                        params[i]->value.shape_str() + ")");
    }
    declared_doubles += static_cast<std::size_t>(rows * cols);
  }
  if (declared_doubles * sizeof(double) != blob.size()) {
    throw CorruptionError("checkpoint blob holds " + std::to_string(blob.size() / sizeof(double)) +
                          " doubles but the header declares " + std::to_string(declared_doubles));
  }
  std::size_t offset = 0;
  for (auto* p : params) {
    const std::size_t bytes = static_cast<std::size_t>(p->value.size()) * sizeof(double);
    std::memcpy(p->value.data(), blob.data() + offset, bytes);
    offset += bytes;
    if (!all_finite(p->value)) {
      throw CorruptionError("checkpoint parameter '" + p->name + "' contains non-finite values");
    }
  }
  return result;
}

LoadedCheckpoint load_checkpoint(const std::string& path, const ModelConfig& expected) {
  LoadedCheckpoint loaded = load_checkpoint(path);
  if (!same_architecture(loaded.model->config(), expected)) {
    throw ConfigError("checkpoint architecture " + to_json(loaded.model->config()).dump() +
                      " conflicts with requested architecture " + to_json(expected).dump());
  }
  return loaded;
}

}  // namespace pshape
