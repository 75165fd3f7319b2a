#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include "pnsr/error.hpp"
#include "pnsr/io.hpp"
#include "pnsr/pncc.hpp"
#include "test_util.hpp"

using namespace pnsr;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            ("pnsr_" + std::string(info->test_suite_name()) + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::size_t format_offset(const std::function<void()>& f) {
  try {
    f();
  } catch (const FormatError& e) {
    return e.offset();
  }
  ADD_FAILURE() << "expected FormatError";
  return 0;
}

/// Depth map whose values sit exactly on the millimetre grid.
DepthMap quantized_depth(Rng& rng, int w, int h) {
  DepthMap d(w, h);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u)
      if (rng.bernoulli(0.8)) d.set(u, v, double(1 + rng.below(65535)) * 0.001);
  return d;
}

SrModel small_model(std::uint64_t seed) {
  ModelConfig cfg;
  cfg.features = 4;
  cfg.num_layers = 3;
  cfg.scale = 4;
  return SrModel(cfg, seed);
}

}  // namespace

TEST(Depth16, RoundTripOnTheQuantizationGrid) {
  Rng rng(1);
  const DepthMap d = quantized_depth(rng, 13, 7);
  const DepthMap back = io::decode_depth16(io::encode_depth16(d));
  ASSERT_EQ(back.valid, d.valid);
  for (std::size_t i = 0; i < d.pixel_count(); ++i) EXPECT_NEAR(back.depth[i], d.depth[i], 1e-12);
}

TEST(Depth16, HeaderAndSampleOrder) {
  DepthMap d(2, 1);
  d.set(0, 0, 0.258);  // 258 = 0x0102
  const io::Bytes b = io::encode_depth16(d);
  const std::string header = "P5\n2 1\n65535\n";
  ASSERT_EQ(b.size(), header.size() + 4);
  EXPECT_EQ(std::string(b.begin(), b.begin() + header.size()), header);
  EXPECT_EQ(b[header.size()], 0x01);
  EXPECT_EQ(b[header.size() + 1], 0x02);
  EXPECT_EQ(b[header.size() + 2], 0x00);
  EXPECT_EQ(b[header.size() + 3], 0x00);
}

TEST(Depth16, OutOfRangeDepthIsRejected) {
  DepthMap d(2, 2);
  d.set(1, 1, 70.0);
  EXPECT_THROW(io::encode_depth16(d), RangeError);
  DepthMap tiny(1, 1);
  tiny.set(0, 0, 0.0001);
  EXPECT_THROW(io::encode_depth16(tiny), RangeError);
}

TEST(Depth16, TrailingAndTruncatedBytesCarryOffsets) {
  Rng rng(2);
  const io::Bytes good = io::encode_depth16(quantized_depth(rng, 5, 4));
  io::Bytes longer = good;
  longer.push_back(0);
  EXPECT_EQ(format_offset([&] { io::decode_depth16(longer); }), good.size());
  io::Bytes shorter(good.begin(), good.end() - 3);
  EXPECT_EQ(format_offset([&] { io::decode_depth16(shorter); }), shorter.size());
  io::Bytes bad_magic = good;
  bad_magic[1] = '6';
  EXPECT_EQ(format_offset([&] { io::decode_depth16(bad_magic); }), 0u);
}

TEST(Depth16, CommentsInHeaderAreAccepted) {
  const std::string text = "P5\n# made by hand\n1 1\n65535\n";
  io::Bytes b(text.begin(), text.end());
  b.push_back(0x03);
  b.push_back(0xE8);
  const DepthMap d = io::decode_depth16(b);
  EXPECT_NEAR(d.at(0, 0), 1.0, 1e-15);
}

TEST(Pncc48, RoundTripWithinOneCount) {
  TempDir tmp;
  Rng rng(3);
  const DepthMap d = testutil::random_depth(rng, 19, 11, 0.7);
  const PnccImage p = encode(d, testutil::random_intrinsics(rng, 19, 11));
  io::write_pncc48(tmp.path() / "x.ppm", p);
  EXPECT_TRUE(fs::exists(tmp.path() / "x.ppm.json"));
  const PnccImage back = io::read_pncc48(tmp.path() / "x.ppm");
  EXPECT_EQ(back.valid, p.valid);
  EXPECT_EQ(back.norm, p.norm);
  ASSERT_EQ(back.channels.size(), p.channels.size());
  for (std::size_t i = 0; i < p.channels.size(); ++i)
    EXPECT_LE(std::abs(back.channels[i] - p.channels[i]), 0.5 / 65535 + 1e-15);
}

TEST(Pncc48, MissingSidecarIsAFormatError) {
  TempDir tmp;
  Rng rng(4);
  const PnccImage p = encode(testutil::random_depth(rng, 6, 5, 0.9), testutil::random_intrinsics(rng, 6, 5));
  io::write_pncc48(tmp.path() / "y.ppm", p);
  fs::remove(tmp.path() / "y.ppm.json");
  EXPECT_THROW(io::read_pncc48(tmp.path() / "y.ppm"), FormatError);
}

TEST(Ply, ExactRoundTrip) {
  Rng rng(5);
  PointCloud pc;
  for (int i = 0; i < 100; ++i) pc.points.push_back({rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0.1, 9)});
  pc.points.push_back({1e-300, -0.0, 123456789.125});
  const PointCloud back = io::decode_ply(io::encode_ply(pc));
  EXPECT_EQ(back.points, pc.points);
}

TEST(Ply, EmptyCloud) {
  const std::string text = io::encode_ply(PointCloud{});
  EXPECT_NE(text.find("element vertex 0\n"), std::string::npos);
  EXPECT_TRUE(io::decode_ply(text).empty());
}

TEST(Ply, StrictParsing) {
  PointCloud pc;
  pc.points.push_back({1, 2, 3});
  const std::string good = io::encode_ply(pc);
  EXPECT_EQ(format_offset([&] { io::decode_ply(good + "4 5 6\n"); }), good.size());
  EXPECT_THROW(io::decode_ply(good.substr(0, good.size() - 3)), FormatError);
  EXPECT_THROW(io::decode_ply("ply\nformat binary_little_endian 1.0\nend_header\n"), FormatError);
}

TEST(Intrinsics, RoundTrip) {
  const Intrinsics intr{525.0 / 3.0, 0.1 + 0.2, 319.5, 239.5, 640, 480};
  EXPECT_EQ(io::decode_intrinsics(io::encode_intrinsics(intr)), intr);
  EXPECT_THROW(io::decode_intrinsics("{\"f_x\": 1"), FormatError);
  EXPECT_THROW(io::decode_intrinsics("{\"f_x\": -1, \"f_y\": 1, \"c_x\": 0, \"c_y\": 0, \"width\": 2, \"height\": 2}"),
               Error);
}

TEST(Checkpoint, RoundTripIsExactAfterF32Rounding) {
  SrModel m = small_model(7);
  // Make the parameters exactly representable in f32 so equality is meaningful.
  std::vector<double> params = m.flat_params();
  for (double& p : params) p = static_cast<float>(p);
  m.set_flat_params(params);
  TrainConfig tc;
  tc.epochs = 3;
  tc.learning_rate = 5e-4;
  const io::Bytes bytes = io::encode_checkpoint(m, tc);
  const io::Checkpoint ck = io::decode_checkpoint(bytes);
  EXPECT_EQ(ck.model.config(), m.config());
  EXPECT_EQ(ck.model.flat_params(), m.flat_params());
  EXPECT_EQ(ck.train.epochs, 3);
  EXPECT_EQ(ck.train.learning_rate, 5e-4);
  EXPECT_EQ(io::encode_checkpoint(ck.model, ck.train), bytes);
}

TEST(Checkpoint, EveryTruncationIsRejected) {
  const io::Bytes bytes = io::encode_checkpoint(small_model(8), TrainConfig{});
  for (std::size_t n = 0; n < bytes.size(); n += (n < 64 ? 1 : 97)) {
    const io::Bytes cut(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(n));
    EXPECT_THROW(io::decode_checkpoint(cut), FormatError) << "length " << n;
  }
  io::Bytes extra = bytes;
  extra.push_back(0);
  EXPECT_EQ(format_offset([&] { io::decode_checkpoint(extra); }), bytes.size());
}

TEST(Checkpoint, WrongVersion) {
  io::Bytes bytes = io::encode_checkpoint(small_model(9), TrainConfig{});
  bytes[4] = 99;
  try {
    io::decode_checkpoint(bytes);
    FAIL() << "expected UnsupportedVersionError";
  } catch (const UnsupportedVersionError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }
}

TEST(Checkpoint, CorruptHeaderIsAFormatError) {
  io::Bytes bytes = io::encode_checkpoint(small_model(10), TrainConfig{});
  bytes[12] = '#';
  EXPECT_THROW(io::decode_checkpoint(bytes), FormatError);
}

TEST(Manifest, RoundTrip) {
  io::Manifest m;
  m.seed = 77;
  m.options.width = 64;
  m.options.height = 48;
  m.options.dropout_rate = 0.01;
  int i = 0;
  for (const auto& spec : dataset_specs(12, 77, m.options)) {
    m.scenes.push_back({spec, "scene_" + std::to_string(i) + ".pgm", "scene_" + std::to_string(i) + ".json"});
    ++i;
  }
  const std::string text = io::encode_manifest(m);
  const io::Manifest back = io::decode_manifest(text);
  ASSERT_EQ(back.scenes.size(), m.scenes.size());
  EXPECT_EQ(back.seed, 77u);
  for (std::size_t k = 0; k < m.scenes.size(); ++k) {
    EXPECT_EQ(back.scenes[k].spec.kind(), m.scenes[k].spec.kind());
    EXPECT_EQ(back.scenes[k].spec.seed, m.scenes[k].spec.seed);
    EXPECT_EQ(back.scenes[k].depth_file, m.scenes[k].depth_file);
    // Rendering the decoded spec reproduces the original exactly.
    const Intrinsics intr = default_intrinsics(64, 48);
    EXPECT_EQ(render(back.scenes[k].spec, intr), render(m.scenes[k].spec, intr));
  }
  EXPECT_EQ(io::encode_manifest(back), text);
}

TEST(Files, WritesAreByteDeterministic) {
  TempDir tmp;
  Rng rng(11);
  const DepthMap d = quantized_depth(rng, 9, 9);
  io::write_depth16(tmp.path() / "a.pgm", d);
  io::write_depth16(tmp.path() / "b.pgm", d);
  EXPECT_EQ(io::read_file(tmp.path() / "a.pgm"), io::read_file(tmp.path() / "b.pgm"));
  EXPECT_THROW(io::read_file(tmp.path() / "nope.pgm"), IoError);
}
