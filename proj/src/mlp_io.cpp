#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "por/mlp.hpp"

namespace por::nn {

// Model record ("PORM"): see docs/formats.md for the byte layout.
namespace {
constexpr char kModelMagic[4] = {'P', 'O', 'R', 'M'};
constexpr char kBundleMagic[4] = {'P', 'O', 'R', 'B'};
constexpr uint16_t kVersion = 1;

void check_crc_footer(const std::vector<uint8_t>& bytes, const std::string& what) {
  if (bytes.size() < 8) throw Error::data(what + ": file too short");
  uint32_t stored;
  std::memcpy(&stored, bytes.data() + bytes.size() - 4, 4);
  uint32_t actual = crc32(bytes.data(), bytes.size() - 4);
  if (stored != actual)
    throw Error::data(what + ": CRC mismatch at offset " + std::to_string(bytes.size() - 4) +
                      " (file corrupt)");
}
}  // namespace

std::vector<uint8_t> serialize_model(const MlpModel& model) {
  ByteWriter w;
  w.bytes(kModelMagic, 4);
  w.u16(kVersion);
  w.u8(static_cast<uint8_t>(model.spec.head));
  w.u8(model.spec.layer_norm ? 1 : 0);
  w.f64(model.spec.log_std_min);
  w.f64(model.spec.log_std_max);
  w.u32(static_cast<uint32_t>(model.spec.layer_sizes.size()));
  for (int s : model.spec.layer_sizes) w.u32(static_cast<uint32_t>(s));
  Eigen::VectorXd flat = model.flatten();
  w.u64(static_cast<uint64_t>(flat.size()));
  for (int i = 0; i < flat.size(); ++i) w.f64(flat[i]);
  return w.data();
}

MlpModel deserialize_model(ByteReader& r) {
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kModelMagic, 4) != 0)
    throw Error::data("model record: bad magic at offset " + std::to_string(r.offset() - 4));
  uint16_t version = r.u16();
  if (version != kVersion)
    throw Error::data("model record: unsupported version " + std::to_string(version));
  MlpSpec spec;
  spec.head = static_cast<HeadKind>(r.u8());
  spec.layer_norm = r.u8() != 0;
  spec.log_std_min = r.f64();
  spec.log_std_max = r.f64();
  uint32_t n_sizes = r.u32();
  for (uint32_t i = 0; i < n_sizes; ++i) spec.layer_sizes.push_back(static_cast<int>(r.u32()));
  spec.validate();
  MlpModel model = MlpModel::zeros(spec);
  uint64_t n_params = r.u64();
  if (n_params != static_cast<uint64_t>(model.param_count()))
    throw Error::data("model record: parameter count mismatch at offset " +
                      std::to_string(r.offset()));
  Eigen::VectorXd flat(n_params);
  for (uint64_t i = 0; i < n_params; ++i) flat[static_cast<long>(i)] = r.f64();
  model.unflatten(flat);
  return model;
}

void save_model(const MlpModel& model, const std::string& path) {
  std::vector<uint8_t> body = serialize_model(model);
  ByteWriter w;
  w.bytes(body.data(), body.size());
  w.u32(crc32(body.data(), body.size()));
  write_file_bytes(path, w.data());
}

MlpModel load_model(const std::string& path) {
  std::vector<uint8_t> bytes = read_file_bytes(path);
  check_crc_footer(bytes, "model checkpoint " + path);
  ByteReader r(bytes.data(), bytes.size() - 4);
  return deserialize_model(r);
}

void save_bundle(const std::map<std::string, const MlpModel*>& models, const std::string& path) {
  ByteWriter w;
  w.bytes(kBundleMagic, 4);
  w.u16(kVersion);
  w.u32(static_cast<uint32_t>(models.size()));
  for (const auto& [name, model] : models) {
    w.str(name);
    std::vector<uint8_t> rec = serialize_model(*model);
    w.u64(rec.size());
    w.bytes(rec.data(), rec.size());
  }
  ByteWriter out;
  out.bytes(w.data().data(), w.data().size());
  out.u32(crc32(w.data().data(), w.data().size()));
  write_file_bytes(path, out.data());
}

std::map<std::string, MlpModel> load_bundle(const std::string& path) {
  std::vector<uint8_t> bytes = read_file_bytes(path);
  check_crc_footer(bytes, "checkpoint bundle " + path);
  ByteReader r(bytes.data(), bytes.size() - 4);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kBundleMagic, 4) != 0)
    throw Error::data("checkpoint bundle " + path + ": bad magic");
  uint16_t version = r.u16();
  if (version != kVersion)
    throw Error::data("checkpoint bundle " + path + ": unsupported version");
  uint32_t count = r.u32();
  std::map<std::string, MlpModel> out;
  for (uint32_t i = 0; i < count; ++i) {
    std::string name = r.str();
    uint64_t len = r.u64();
    (void)len;
    out.emplace(name, deserialize_model(r));
  }
  return out;
}

void export_text(const MlpModel& model, std::ostream& os) {
  os << "mlp v1\n";
  os << "head " << static_cast<int>(model.spec.head) << "\n";
  os << "layer_norm " << (model.spec.layer_norm ? 1 : 0) << "\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a %a", model.spec.log_std_min, model.spec.log_std_max);
  os << "log_std_range " << buf << "\n";
  os << "sizes";
  for (int s : model.spec.layer_sizes) os << " " << s;
  os << "\n";
  Eigen::VectorXd flat = model.flatten();
  os << "params " << flat.size() << "\n";
  for (int i = 0; i < flat.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%a", flat[i]);
    os << buf << "\n";
  }
}

MlpModel import_text(std::istream& is) {
  auto expect = [&](const std::string& tag) {
    std::string tok;
    if (!(is >> tok) || tok != tag) throw Error::data("model text: expected '" + tag + "'");
  };
  expect("mlp");
  std::string ver;
  is >> ver;
  if (ver != "v1") throw Error::data("model text: unsupported version " + ver);
  MlpSpec spec;
  expect("head");
  int head;
  is >> head;
  spec.head = static_cast<HeadKind>(head);
  expect("layer_norm");
  int ln;
  is >> ln;
  spec.layer_norm = ln != 0;
  expect("log_std_range");
  std::string lo, hi;
  is >> lo >> hi;
  spec.log_std_min = std::strtod(lo.c_str(), nullptr);
  spec.log_std_max = std::strtod(hi.c_str(), nullptr);
  expect("sizes");
  std::string line;
  std::getline(is, line);
  std::istringstream sizes(line);
  int s;
  while (sizes >> s) spec.layer_sizes.push_back(s);
  spec.validate();
  MlpModel model = MlpModel::zeros(spec);
  expect("params");
  long n;
  is >> n;
  if (n != model.param_count()) throw Error::data("model text: parameter count mismatch");
  Eigen::VectorXd flat(n);
  for (long i = 0; i < n; ++i) {
    std::string tok;
    if (!(is >> tok)) throw Error::data("model text: truncated parameter list");
    flat[i] = std::strtod(tok.c_str(), nullptr);
  }
  model.unflatten(flat);
  return model;
}

}  // namespace por::nn
