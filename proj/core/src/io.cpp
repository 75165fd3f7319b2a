#include "pnsr/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

#include "pnsr/error.hpp"

namespace pnsr::io {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error while reading '" + path.string() + "'");
  return bytes;
}

void write_file(const fs::path& path, const Bytes& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("error while writing '" + path.string() + "'");
}

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, Bytes(text.begin(), text.end()));
}

namespace {

std::string as_text(const Bytes& b) { return {b.begin(), b.end()}; }

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(what + ": malformed JSON: " + e.what(), e.byte);
  }
}

template <typename F>
auto with_json_context(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw FormatError(what + ": " + e.what());
  }
}

// ---- portable anymap ------------------------------------------------------

struct PnmHeader {
  int width = 0;
  int height = 0;
  std::size_t data_offset = 0;
};

bool is_space(std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

PnmHeader parse_pnm_header(const Bytes& b, char kind, const std::string& what) {
  if (b.size() < 2 || b[0] != 'P' || b[1] != static_cast<std::uint8_t>(kind)) {
    throw FormatError(what + ": expected magic 'P" + std::string(1, kind) + "'", 0);
  }
  std::size_t pos = 2;
  const auto next_int = [&](const char* field) {
    for (;;) {
      while (pos < b.size() && is_space(b[pos])) ++pos;
      if (pos < b.size() && b[pos] == '#') {
        while (pos < b.size() && b[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    const std::size_t start = pos;
    long long value = 0;
    while (pos < b.size() && b[pos] >= '0' && b[pos] <= '9') {
      value = value * 10 + (b[pos] - '0');
      if (value > 1'000'000'000) throw FormatError(what + ": " + field + " too large", start);
      ++pos;
    }
    if (pos == start) throw FormatError(what + ": expected " + std::string(field), start);
    return value;
  };
  PnmHeader h;
  h.width = static_cast<int>(next_int("width"));
  h.height = static_cast<int>(next_int("height"));
  const std::size_t maxval_at = pos;
  const long long maxval = next_int("maxval");
  if (maxval != 65535) throw FormatError(what + ": maxval must be 65535", maxval_at);
  if (h.width < 1 || h.height < 1) throw FormatError(what + ": empty image", maxval_at);
  if (pos >= b.size() || !is_space(b[pos])) {
    throw FormatError(what + ": expected single whitespace after header", pos);
  }
  h.data_offset = pos + 1;
  return h;
}

void check_payload_size(const Bytes& b, const PnmHeader& h, std::size_t bytes_per_pixel,
                        const std::string& what) {
  const std::size_t expected =
      h.data_offset + static_cast<std::size_t>(h.width) * static_cast<std::size_t>(h.height) * bytes_per_pixel;
  if (b.size() < expected) throw FormatError(what + ": truncated pixel data", b.size());
  if (b.size() > expected) throw FormatError(what + ": trailing bytes after pixel data", expected);
}

void append_header(Bytes& out, char kind, int w, int h) {
  const std::string header =
      std::string("P") + kind + "\n" + std::to_string(w) + " " + std::to_string(h) + "\n65535\n";
  out.insert(out.end(), header.begin(), header.end());
}

void put_u16_be(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

std::uint16_t get_u16_be(const Bytes& b, std::size_t at) {
  return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

}  // namespace

// ---- DEPTH16 ----------------------------------------------------------------

Bytes encode_depth16(const DepthMap& d, double unit_scale) {
  if (!(unit_scale > 0.0)) throw ArgumentError("depth16: unit scale must be positive");
  d.validate();
  if (d.width < 1 || d.height < 1) throw ArgumentError("depth16: empty depth map");
  Bytes out;
  append_header(out, '5', d.width, d.height);
  out.reserve(out.size() + 2 * d.pixel_count());
  for (int v = 0; v < d.height; ++v) {
    for (int u = 0; u < d.width; ++u) {
      std::uint16_t count = 0;
      if (d.is_valid(u, v)) {
        const double q = std::round(d.at(u, v) / unit_scale);
        if (q < 1.0 || q > 65535.0) {
          throw RangeError("depth16: pixel (" + std::to_string(u) + ", " + std::to_string(v) +
                           ") depth " + format_double(d.at(u, v)) +
                           " m is not representable with unit " + format_double(unit_scale) + " m");
        }
        count = static_cast<std::uint16_t>(q);
      }
      put_u16_be(out, count);
    }
  }
  return out;
}

DepthMap decode_depth16(const Bytes& bytes, double unit_scale) {
  if (!(unit_scale > 0.0)) throw ArgumentError("depth16: unit scale must be positive");
  const PnmHeader h = parse_pnm_header(bytes, '5', "depth16");
  check_payload_size(bytes, h, 2, "depth16");
  DepthMap d(h.width, h.height);
  for (std::size_t i = 0; i < d.pixel_count(); ++i) {
    const std::uint16_t count = get_u16_be(bytes, h.data_offset + 2 * i);
    if (count == 0) continue;
    d.depth[i] = count * unit_scale;
    d.valid[i] = 1;
  }
  return d;
}

void write_depth16(const fs::path& path, const DepthMap& d, double unit_scale) {
  write_file(path, encode_depth16(d, unit_scale));
}

DepthMap read_depth16(const fs::path& path, double unit_scale) {
  return decode_depth16(read_file(path), unit_scale);
}

// ---- PNCC48 -----------------------------------------------------------------

fs::path pncc_sidecar_path(const fs::path& image_path) {
  return fs::path(image_path.string() + ".json");
}

namespace {

json norm_to_json(const NormalizationParams& n) {
  json j;
  j["offset"] = n.offset;
  j["scale"] = n.scale;
  j["s"] = n.s;
  j["degenerate"] = n.degenerate;
  return j;
}

NormalizationParams norm_from_json(const json& j) {
  NormalizationParams n;
  n.offset = j.at("offset").get<std::array<double, 3>>();
  n.scale = j.at("scale").get<double>();
  n.s = j.at("s").get<double>();
  n.degenerate = j.at("degenerate").get<bool>();
  n.validate();
  return n;
}

// Alternating run lengths in row-major order, starting with an invalid run.
json encode_rle(const std::vector<std::uint8_t>& mask) {
  json runs = json::array();
  std::uint8_t current = 0;
  std::size_t run = 0;
  for (auto m : mask) {
    const std::uint8_t bit = m ? 1 : 0;
    if (bit != current) {
      runs.push_back(run);
      current = bit;
      run = 0;
    }
    ++run;
  }
  runs.push_back(run);
  return runs;
}

std::vector<std::uint8_t> decode_rle(const json& runs, std::size_t n) {
  std::vector<std::uint8_t> mask;
  mask.reserve(n);
  std::uint8_t current = 0;
  for (const auto& r : runs) {
    const auto len = r.get<std::size_t>();
    if (len > n - mask.size()) throw FormatError("pncc48 sidecar: mask runs exceed image size");
    mask.insert(mask.end(), len, current);
    current ^= 1;
  }
  if (mask.size() != n) throw FormatError("pncc48 sidecar: mask runs do not cover the image");
  return mask;
}

}  // namespace

void write_pncc48(const fs::path& path, const PnccImage& p) {
  if (p.width < 1 || p.height < 1) throw ArgumentError("pncc48: empty image");
  Bytes out;
  append_header(out, '6', p.width, p.height);
  out.reserve(out.size() + 6 * p.plane_size());
  for (std::size_t i = 0; i < p.plane_size(); ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      const double v = p.channels[c * p.plane_size() + i];
      if (!(v >= 0.0 && v <= 1.0)) {
        throw RangeError("pncc48: pixel " + std::to_string(i) + " channel " + std::to_string(c) +
                         " value " + format_double(v) + " outside [0, 1]");
      }
      put_u16_be(out, static_cast<std::uint16_t>(std::lround(v * 65535.0)));
    }
  }

  json side;
  side["format"] = "pncc48";
  side["version"] = 1;
  side["width"] = p.width;
  side["height"] = p.height;
  side["normalization"] = p.norm ? norm_to_json(*p.norm) : json(nullptr);
  side["valid_rle"] = encode_rle(p.valid);

  write_file(path, out);
  write_text(pncc_sidecar_path(path), side.dump() + "\n");
}

PnccImage read_pncc48(const fs::path& path) {
  const Bytes bytes = read_file(path);
  const PnmHeader h = parse_pnm_header(bytes, '6', "pncc48");
  check_payload_size(bytes, h, 6, "pncc48");

  const fs::path side_path = pncc_sidecar_path(path);
  if (!fs::exists(side_path)) {
    throw FormatError("pncc48: missing sidecar '" + side_path.string() + "'");
  }
  const json side = parse_json(as_text(read_file(side_path)), "pncc48 sidecar");

  PnccImage p(h.width, h.height);
  with_json_context("pncc48 sidecar", [&] {
    if (side.at("format").get<std::string>() != "pncc48") throw FormatError("pncc48 sidecar: wrong format tag");
    if (side.at("version").get<int>() != 1) {
      throw UnsupportedVersionError("pncc48 sidecar: unsupported version " + side.at("version").dump());
    }
    if (side.at("width").get<int>() != h.width || side.at("height").get<int>() != h.height) {
      throw FormatError("pncc48 sidecar: dimensions disagree with the image");
    }
    if (!side.at("normalization").is_null()) p.norm = norm_from_json(side.at("normalization"));
    p.valid = decode_rle(side.at("valid_rle"), p.plane_size());
    return 0;
  });
  for (std::size_t i = 0; i < p.plane_size(); ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      p.channels[c * p.plane_size() + i] = get_u16_be(bytes, h.data_offset + 6 * i + 2 * c) / 65535.0;
    }
  }
  return p;
}

// ---- PLY --------------------------------------------------------------------

std::string encode_ply(const PointCloud& pc) {
  std::string out = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(pc.size()) +
                    "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  for (const auto& p : pc.points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw RangeError("ply: non-finite point");
    }
    out += format_double(p.x);
    out += ' ';
    out += format_double(p.y);
    out += ' ';
    out += format_double(p.z);
    out += '\n';
  }
  return out;
}

PointCloud decode_ply(const std::string& text) {
  std::size_t pos = 0;
  const auto next_line = [&]() -> std::string {
    if (pos >= text.size()) throw FormatError("ply: unexpected end of header", pos);
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) throw FormatError("ply: unterminated header line", pos);
    std::string line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = nl + 1;
    return line;
  };

  if (next_line() != "ply") throw FormatError("ply: missing 'ply' magic", 0);
  std::size_t at = pos;
  if (next_line() != "format ascii 1.0") throw FormatError("ply: only 'format ascii 1.0' is supported", at);

  long long n_vertices = -1;
  std::vector<std::string> props;
  for (;;) {
    at = pos;
    const std::string line = next_line();
    if (line == "end_header") break;
    if (line.rfind("comment", 0) == 0 || line.rfind("obj_info", 0) == 0) continue;
    if (line.rfind("element vertex ", 0) == 0) {
      const std::string count = line.substr(15);
      long long n = 0;
      const auto res = std::from_chars(count.data(), count.data() + count.size(), n);
      if (res.ec != std::errc() || res.ptr != count.data() + count.size() || n < 0) {
        throw FormatError("ply: bad vertex count", at);
      }
      n_vertices = n;
      continue;
    }
    if (line.rfind("property ", 0) == 0) {
      const std::size_t sp = line.rfind(' ');
      const std::string type = line.substr(9, sp - 9);
      if (type != "double" && type != "float" && type != "float32" && type != "float64") {
        throw FormatError("ply: unsupported property type '" + type + "'", at);
      }
      props.push_back(line.substr(sp + 1));
      continue;
    }
    throw FormatError("ply: unsupported header line '" + line + "'", at);
  }
  if (n_vertices < 0) throw FormatError("ply: missing 'element vertex'", pos);
  if (props != std::vector<std::string>{"x", "y", "z"}) {
    throw FormatError("ply: expected vertex properties x, y, z", pos);
  }

  PointCloud pc;
  pc.points.reserve(static_cast<std::size_t>(n_vertices));
  const auto skip_blanks = [&] {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  };
  for (long long i = 0; i < n_vertices; ++i) {
    double xyz[3];
    for (double& v : xyz) {
      skip_blanks();
      const auto res = std::from_chars(text.data() + pos, text.data() + text.size(), v);
      if (res.ec != std::errc()) throw FormatError("ply: bad vertex value", pos);
      pos = static_cast<std::size_t>(res.ptr - text.data());
    }
    skip_blanks();
    if (pos < text.size() && text[pos] == '\r') ++pos;
    if (pos >= text.size() || text[pos] != '\n') throw FormatError("ply: expected end of vertex line", pos);
    ++pos;
    pc.points.push_back({xyz[0], xyz[1], xyz[2]});
  }
  if (pos != text.size()) throw FormatError("ply: trailing data after vertices", pos);
  return pc;
}

void write_ply(const fs::path& path, const PointCloud& pc) { write_text(path, encode_ply(pc)); }

PointCloud read_ply(const fs::path& path) { return decode_ply(as_text(read_file(path))); }

// ---- intrinsics -------------------------------------------------------------

std::string encode_intrinsics(const Intrinsics& intr) {
  intr.validate();
  json j;
  j["f_x"] = intr.fx;
  j["f_y"] = intr.fy;
  j["c_x"] = intr.cx;
  j["c_y"] = intr.cy;
  j["width"] = intr.width;
  j["height"] = intr.height;
  return j.dump() + "\n";
}

Intrinsics decode_intrinsics(const std::string& text) {
  const json j = parse_json(text, "intrinsics");
  Intrinsics intr = with_json_context("intrinsics", [&] {
    Intrinsics i;
    i.fx = j.at("f_x").get<double>();
    i.fy = j.at("f_y").get<double>();
    i.cx = j.at("c_x").get<double>();
    i.cy = j.at("c_y").get<double>();
    i.width = j.at("width").get<int>();
    i.height = j.at("height").get<int>();
    return i;
  });
  intr.validate();
  return intr;
}

void write_intrinsics(const fs::path& path, const Intrinsics& intr) {
  write_text(path, encode_intrinsics(intr));
}

Intrinsics read_intrinsics(const fs::path& path) {
  return decode_intrinsics(as_text(read_file(path)));
}

// ---- checkpoint -------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'P', 'N', 'S', 'R'};

json train_config_to_json(const TrainConfig& c) {
  json j;
  j["learning_rate"] = c.learning_rate;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  j["charbonnier_eps"] = c.charbonnier_eps;
  j["scale"] = c.scale;
  j["head"] = to_string(c.head);
  j["input"] = to_string(c.input);
  j["patch_size"] = c.patch_size;
  j["patches_per_scene"] = c.patches_per_scene;
  return j;
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.learning_rate = j.at("learning_rate").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.charbonnier_eps = j.at("charbonnier_eps").get<double>();
  c.scale = j.at("scale").get<int>();
  c.head = parse_head_mode(j.at("head").get<std::string>());
  c.input = parse_input_mode(j.at("input").get<std::string>());
  c.patch_size = j.at("patch_size").get<int>();
  c.patches_per_scene = j.at("patches_per_scene").get<int>();
  return c;
}

void put_f32(Bytes& out, double v) {
  const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(bits >> (8 * k)));
}

double get_f32(const Bytes& b, std::size_t at) {
  std::uint32_t bits = 0;
  for (int k = 0; k < 4; ++k) bits |= static_cast<std::uint32_t>(b[at + static_cast<std::size_t>(k)]) << (8 * k);
  return static_cast<double>(std::bit_cast<float>(bits));
}

}  // namespace

Bytes encode_checkpoint(const SrModel& model, const TrainConfig& train) {
  const ModelConfig& cfg = model.config();
  const auto params = model.flat_params();
  const AdamState& adam = model.optimizer();
  const bool has_moments = !adam.m.empty();

  json header;
  header["architecture"] = {{"head", to_string(cfg.head)},
                            {"input", to_string(cfg.input)},
                            {"features", cfg.features},
                            {"num_layers", cfg.num_layers},
                            {"kernel", cfg.kernel},
                            {"scale", cfg.scale},
                            {"residual_scale", cfg.residual_scale},
                            {"param_count", model.param_count()}};
  header["train_config"] = train_config_to_json(train);
  header["normalization_policy"] = "per-image; LR/HR pairs share parameters fitted to both extents";
  const AdamHyper hyper;
  header["optimizer"] = {{"name", "adam"},
                         {"beta1", hyper.beta1},
                         {"beta2", hyper.beta2},
                         {"eps", hyper.eps},
                         {"step", adam.step},
                         {"has_moments", has_moments}};
  header["blob"] = {{"dtype", "f32le"},
                    {"count", params.size() * (has_moments ? 3 : 1)}};
  const std::string text = header.dump();

  Bytes out(kMagic, kMagic + 4);
  out.push_back(static_cast<std::uint8_t>(kCheckpointVersion & 0xFF));
  out.push_back(static_cast<std::uint8_t>(kCheckpointVersion >> 8));
  const auto len = static_cast<std::uint32_t>(text.size());
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(len >> (8 * k)));
  out.insert(out.end(), text.begin(), text.end());
  for (double p : params) put_f32(out, p);
  if (has_moments) {
    for (double m : adam.m) put_f32(out, m);
    for (double v : adam.v) put_f32(out, v);
  }
  return out;
}

Checkpoint decode_checkpoint(const Bytes& b) {
  if (b.size() < 4 || std::memcmp(b.data(), kMagic, 4) != 0) {
    throw FormatError("checkpoint: missing 'PNSR' magic", 0);
  }
  if (b.size() < 10) throw FormatError("checkpoint: truncated preamble", b.size());
  const auto version = static_cast<std::uint16_t>(b[4] | (b[5] << 8));
  if (version != kCheckpointVersion) {
    throw UnsupportedVersionError("checkpoint: unsupported version " + std::to_string(version) +
                                      " (this build reads version " +
                                      std::to_string(kCheckpointVersion) + ")",
                                  4);
  }
  std::uint32_t len = 0;
  for (int k = 0; k < 4; ++k) len |= static_cast<std::uint32_t>(b[6 + static_cast<std::size_t>(k)]) << (8 * k);
  const std::size_t header_end = 10 + static_cast<std::size_t>(len);
  if (b.size() < header_end) throw FormatError("checkpoint: truncated header", b.size());
  const json header = parse_json(std::string(b.begin() + 10, b.begin() + static_cast<std::ptrdiff_t>(header_end)),
                                 "checkpoint header");

  ModelConfig cfg;
  TrainConfig train;
  long long step = 0;
  bool has_moments = false;
  std::size_t count = 0;
  with_json_context("checkpoint header", [&] {
    const json& a = header.at("architecture");
    cfg.head = parse_head_mode(a.at("head").get<std::string>());
    cfg.input = parse_input_mode(a.at("input").get<std::string>());
    cfg.features = a.at("features").get<int>();
    cfg.num_layers = a.at("num_layers").get<int>();
    cfg.kernel = a.at("kernel").get<int>();
    cfg.scale = a.at("scale").get<int>();
    cfg.residual_scale = a.at("residual_scale").get<double>();
    train = train_config_from_json(header.at("train_config"));
    step = header.at("optimizer").at("step").get<long long>();
    has_moments = header.at("optimizer").at("has_moments").get<bool>();
    if (header.at("blob").at("dtype").get<std::string>() != "f32le") {
      throw FormatError("checkpoint: unsupported blob dtype");
    }
    count = header.at("blob").at("count").get<std::size_t>();
    if (a.at("param_count").get<long long>() != param_count(cfg)) {
      throw FormatError("checkpoint: parameter count disagrees with the architecture");
    }
    return 0;
  });
  cfg.validate();

  const auto n_params = static_cast<std::size_t>(param_count(cfg));
  if (count != n_params * (has_moments ? 3 : 1)) {
    throw FormatError("checkpoint: blob count disagrees with the architecture", 10);
  }
  const std::size_t expected = header_end + 4 * count;
  if (b.size() < expected) throw FormatError("checkpoint: truncated parameter blob", b.size());
  if (b.size() > expected) throw FormatError("checkpoint: trailing bytes after parameter blob", expected);

  Checkpoint ck{SrModel(cfg, 0), train};
  std::vector<double> values(n_params);
  std::size_t at = header_end;
  for (double& v : values) {
    v = get_f32(b, at);
    at += 4;
  }
  ck.model.set_flat_params(values);
  AdamState& adam = ck.model.optimizer();
  adam.step = step;
  if (has_moments) {
    adam.m.resize(n_params);
    adam.v.resize(n_params);
    for (double& m : adam.m) {
      m = get_f32(b, at);
      at += 4;
    }
    for (double& v : adam.v) {
      v = get_f32(b, at);
      at += 4;
    }
  }
  return ck;
}

void write_checkpoint(const fs::path& path, const SrModel& model, const TrainConfig& train) {
  write_file(path, encode_checkpoint(model, train));
}

Checkpoint read_checkpoint(const fs::path& path) { return decode_checkpoint(read_file(path)); }

// ---- dataset manifest -------------------------------------------------------

namespace {

json geometry_to_json(const SceneGeometry& g) {
  json p;
  if (const auto* s = std::get_if<SlantedPlane>(&g)) {
    p = {{"depth", s->depth}, {"slope_x", s->slope_x}, {"slope_y", s->slope_y}};
  } else if (const auto* s = std::get_if<Sphere>(&g)) {
    p = {{"center_x", s->center_x}, {"center_y", s->center_y}, {"center_z", s->center_z},
         {"radius", s->radius}, {"background", s->background}};
  } else if (const auto* s = std::get_if<StepEdge>(&g)) {
    p = {{"edge_u", s->edge_u}, {"edge_v", s->edge_v}, {"angle", s->angle},
         {"near", s->near}, {"far", s->far}};
  } else {
    const auto& c = std::get<Composite>(g);
    p = {{"depth", c.plane.depth}, {"slope_x", c.plane.slope_x}, {"slope_y", c.plane.slope_y},
         {"edge_u", c.edge.edge_u}, {"edge_v", c.edge.edge_v}, {"angle", c.edge.angle},
         {"offset", c.offset}};
  }
  return p;
}

SceneGeometry geometry_from_json(const std::string& kind, const json& p) {
  if (kind == "slanted_plane") {
    return SlantedPlane{p.at("depth").get<double>(), p.at("slope_x").get<double>(),
                        p.at("slope_y").get<double>()};
  }
  if (kind == "sphere") {
    return Sphere{p.at("center_x").get<double>(), p.at("center_y").get<double>(),
                  p.at("center_z").get<double>(), p.at("radius").get<double>(),
                  p.at("background").get<double>()};
  }
  if (kind == "step_edge") {
    return StepEdge{p.at("edge_u").get<double>(), p.at("edge_v").get<double>(),
                    p.at("angle").get<double>(), p.at("near").get<double>(), p.at("far").get<double>()};
  }
  if (kind == "composite") {
    Composite c;
    c.plane = {p.at("depth").get<double>(), p.at("slope_x").get<double>(), p.at("slope_y").get<double>()};
    c.edge.edge_u = p.at("edge_u").get<double>();
    c.edge.edge_v = p.at("edge_v").get<double>();
    c.edge.angle = p.at("angle").get<double>();
    c.offset = p.at("offset").get<double>();
    return c;
  }
  throw FormatError("manifest: unknown scene kind '" + kind + "'");
}

}  // namespace

std::string encode_manifest(const Manifest& m) {
  json j;
  j["format"] = "pnsr-manifest";
  j["version"] = 1;
  j["seed"] = m.seed;
  j["options"] = {{"width", m.options.width},
                  {"height", m.options.height},
                  {"dropout_rate", m.options.dropout_rate},
                  {"s", m.options.s}};
  json scenes = json::array();
  for (std::size_t i = 0; i < m.scenes.size(); ++i) {
    const auto& e = m.scenes[i];
    scenes.push_back({{"index", i},
                      {"kind", e.spec.kind()},
                      {"params", geometry_to_json(e.spec.geometry)},
                      {"width", e.spec.width},
                      {"height", e.spec.height},
                      {"dropout_rate", e.spec.dropout_rate},
                      {"seed", e.spec.seed},
                      {"files", {{"depth", e.depth_file}, {"intrinsics", e.intrinsics_file}}}});
  }
  j["scenes"] = std::move(scenes);
  return j.dump(2) + "\n";
}

Manifest decode_manifest(const std::string& text) {
  const json j = parse_json(text, "manifest");
  return with_json_context("manifest", [&] {
    if (j.at("format").get<std::string>() != "pnsr-manifest") throw FormatError("manifest: wrong format tag");
    if (j.at("version").get<int>() != 1) {
      throw UnsupportedVersionError("manifest: unsupported version " + j.at("version").dump());
    }
    Manifest m;
    m.seed = j.at("seed").get<std::uint64_t>();
    const json& o = j.at("options");
    m.options.width = o.at("width").get<int>();
    m.options.height = o.at("height").get<int>();
    m.options.dropout_rate = o.at("dropout_rate").get<double>();
    m.options.s = o.at("s").get<double>();
    for (const auto& s : j.at("scenes")) {
      ManifestEntry e;
      e.spec.geometry = geometry_from_json(s.at("kind").get<std::string>(), s.at("params"));
      e.spec.width = s.at("width").get<int>();
      e.spec.height = s.at("height").get<int>();
      e.spec.dropout_rate = s.at("dropout_rate").get<double>();
      e.spec.seed = s.at("seed").get<std::uint64_t>();
      e.spec.validate();
      e.depth_file = s.at("files").at("depth").get<std::string>();
      e.intrinsics_file = s.at("files").at("intrinsics").get<std::string>();
      m.scenes.push_back(std::move(e));
    }
    return m;
  });
}

void write_manifest(const fs::path& path, const Manifest& m) { write_text(path, encode_manifest(m)); }

Manifest read_manifest(const fs::path& path) { return decode_manifest(as_text(read_file(path))); }

}  // namespace pnsr::io
