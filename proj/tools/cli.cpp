#include "cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>
#include <sstream>

#include "pnsr/error.hpp"
#include "pnsr/io.hpp"
#include "pnsr/metrics.hpp"
#include "pnsr/parallel.hpp"
#include "pnsr/pipeline.hpp"
#include "pnsr/resample.hpp"
#include "pnsr/sr_model.hpp"
#include "pnsr/synthdata.hpp"

namespace pnsr::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

const std::vector<std::string> kCommands = {"synth", "make-lr",  "encode", "decode-depth", "decode-cloud",
                                            "train", "eval",     "bench",  "ablate"};

// Option storage shared by every subcommand; each subcommand binds the
// fields it understands.
struct Options {
  std::uint64_t seed = 0;
  int threads = 1;
  int scale = 4;
  double s = kDefaultScaleFactor;
  std::string head = "z";
  std::string input = "pncc";
  std::string out;

  int scenes = 8;
  int width = 128;
  int height = 96;
  double dropout = 0.002;
  double unit = io::kDefaultUnitScale;
  std::string manifest;

  std::string depth;
  std::string intrinsics;
  std::string pncc;

  int epochs = 20;
  double lr = 1e-3;
  int batch = 8;
  int patch = 64;
  int patches_per_scene = 1;

  std::string checkpoint;
  std::string baseline;
  bool no_timing = false;

  int warmup = 2;
  int reps = 10;

  int train_scenes = 16;
  int test_scenes = 8;
};

const CLI::Validator kScaleCheck(
    [](std::string& value) -> std::string {
      if (value == "4" || value == "8" || value == "16") return {};
      return "unsupported scale '" + value +
             "': only 4, 8 and 16 are accepted (see README.md, section 'Scale factors')";
    },
    "{4|8|16}", "SCALE");

CLI::Option* add_seed(CLI::App* app, Options& o, const std::string& what) {
  return app->add_option("--seed", o.seed, what)->capture_default_str();
}
void add_threads(CLI::App* app, Options& o) {
  app->add_option("--threads", o.threads, "Worker thread cap; results do not depend on it")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();
}
void add_scale(CLI::App* app, Options& o) {
  app->add_option("--scale", o.scale, "Upscale factor r (4, 8 or 16)")->check(kScaleCheck)->capture_default_str();
}
void add_s(CLI::App* app, Options& o) {
  app->add_option("--s", o.s, "PNCC scale factor s in metres")->check(CLI::PositiveNumber)->capture_default_str();
}
void add_head_input(CLI::App* app, Options& o) {
  app->add_option("--head", o.head, "Predicted channels: xyz or z")
      ->check(CLI::IsMember({"xyz", "z"}))
      ->capture_default_str();
  app->add_option("--input", o.input, "Network input: pncc or depth (Z channel only)")
      ->check(CLI::IsMember({"pncc", "depth"}))
      ->capture_default_str();
}
void add_dataset(CLI::App* app, Options& o, const std::string& scenes_help) {
  app->add_option("--scenes", o.scenes, scenes_help)->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--width", o.width, "HR width of generated scenes")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--height", o.height, "HR height of generated scenes")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--dropout", o.dropout, "Per-pixel dropout probability of generated scenes")
      ->check(CLI::Range(0.0, 0.999))
      ->capture_default_str();
  app->add_option("--manifest", o.manifest, "Take scene specs from a synth manifest instead of --scenes/--seed")
      ->check(CLI::ExistingFile);
}
void add_unit(CLI::App* app, Options& o) {
  app->add_option("--unit", o.unit, "Metres per DEPTH16 count")->check(CLI::PositiveNumber)->capture_default_str();
}
void add_train_knobs(CLI::App* app, Options& o) {
  app->add_option("--epochs", o.epochs, "Training epochs")->check(CLI::NonNegativeNumber)->capture_default_str();
  app->add_option("--lr", o.lr, "Adam learning rate")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--batch", o.batch, "Minibatch size")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--patch", o.patch, "LR training patch side in pixels")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--patches-per-scene", o.patches_per_scene, "Random patches drawn per scene and epoch")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

std::unique_ptr<CLI::App> build_app(Options& o) {
  auto app = std::make_unique<CLI::App>("Depth super-resolution through projected normalized coordinate codes",
                                        "pnsr");
  app->get_formatter()->column_width(36);
  app->require_subcommand(1);
  app->set_help_all_flag("--help-all", "Print help for every subcommand and exit");

  auto* synth = app->add_subcommand("synth", "Generate a synthetic HR dataset (DEPTH16 + intrinsics + manifest)");
  add_dataset(synth, o, "Number of scenes to generate");
  add_seed(synth, o, "Dataset seed");
  add_unit(synth, o);
  add_s(synth, o);
  add_threads(synth, o);
  synth->add_option("--out", o.out, "Output directory")->required();

  auto* make_lr = app->add_subcommand("make-lr", "Degrade an HR depth map to LR (fill, cubic downsample, min-pool mask)");
  make_lr->add_option("--depth", o.depth, "HR DEPTH16 file")->required()->check(CLI::ExistingFile);
  make_lr->add_option("--intrinsics", o.intrinsics, "HR intrinsics JSON")->required()->check(CLI::ExistingFile);
  add_scale(make_lr, o);
  add_unit(make_lr, o);
  add_threads(make_lr, o);
  make_lr->add_option("--out", o.out, "Output directory for lr.pgm and lr.json")->required();

  auto* encode = app->add_subcommand("encode", "Encode a depth map as a PNCC48 image with JSON sidecar");
  encode->add_option("--depth", o.depth, "DEPTH16 file")->required()->check(CLI::ExistingFile);
  encode->add_option("--intrinsics", o.intrinsics, "Intrinsics JSON")->required()->check(CLI::ExistingFile);
  add_s(encode, o);
  add_unit(encode, o);
  encode->add_option("--out", o.out, "Output PNCC48 path (sidecar written next to it)")->required();

  auto* decode_depth = app->add_subcommand("decode-depth", "Decode a PNCC48 image back to DEPTH16");
  decode_depth->add_option("--pncc", o.pncc, "PNCC48 file")->required()->check(CLI::ExistingFile);
  add_unit(decode_depth, o);
  decode_depth->add_option("--out", o.out, "Output DEPTH16 path")->required();

  auto* decode_cloud = app->add_subcommand("decode-cloud", "Decode a PNCC48 image to an ASCII PLY point cloud");
  decode_cloud->add_option("--pncc", o.pncc, "PNCC48 file")->required()->check(CLI::ExistingFile);
  decode_cloud->add_option("--out", o.out, "Output PLY path")->required();

  auto* train = app->add_subcommand("train", "Train the super-resolution network on synthetic scenes");
  add_dataset(train, o, "Number of training scenes");
  add_seed(train, o, "Seed for the training set, initialization and batching");
  add_scale(train, o);
  add_head_input(train, o);
  add_s(train, o);
  add_train_knobs(train, o);
  add_threads(train, o);
  train->add_option("--out", o.out, "Output directory for model.pnsr and loss.csv")->required();

  auto* eval = app->add_subcommand("eval", "Evaluate a checkpoint or the bicubic baseline; prints EvalReport JSON lines");
  auto* ck = eval->add_option("--checkpoint", o.checkpoint, "Model checkpoint to evaluate")->check(CLI::ExistingFile);
  auto* bl = eval->add_option("--baseline", o.baseline, "Evaluate a baseline instead of a model (bicubic)")
                 ->check(CLI::IsMember({"bicubic"}));
  ck->excludes(bl);
  add_dataset(eval, o, "Number of held-out scenes");
  add_seed(eval, o, "Held-out set seed");
  eval->add_option("--scale", o.scale, "Upscale factor r for the baseline (a checkpoint fixes its own)")
      ->check(kScaleCheck)
      ->capture_default_str();
  add_s(eval, o);
  eval->add_flag("--no-timing", o.no_timing, "Report every time field as 0 (byte-stable output)");
  add_threads(eval, o);
  eval->add_option("--out", o.out, "Write the JSON lines to this file instead of stdout");

  auto* bench = app->add_subcommand("bench", "Time inference per frame and report the parameter count");
  bench->add_option("--checkpoint", o.checkpoint, "Model checkpoint; default is a freshly initialized model")
      ->check(CLI::ExistingFile);
  add_dataset(bench, o, "Number of frames to time");
  add_seed(bench, o, "Seed for frames and fresh model");
  add_scale(bench, o);
  add_head_input(bench, o);
  add_s(bench, o);
  bench->add_option("--warmup", o.warmup, "Untimed warmup runs per frame")->check(CLI::NonNegativeNumber)->capture_default_str();
  bench->add_option("--reps", o.reps, "Timed runs per frame")->check(CLI::PositiveNumber)->capture_default_str();
  add_threads(bench, o);
  bench->add_option("--out", o.out, "Write the JSON lines to this file instead of stdout");

  auto* ablate = app->add_subcommand("ablate", "Train and evaluate the {XYZ,Z} x {PNCC,DEPTH} grid");
  ablate->add_option("--train-scenes", o.train_scenes, "Training scenes (dataset seed = --seed)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ablate->add_option("--test-scenes", o.test_scenes, "Held-out scenes (dataset seed = --seed + 1)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ablate->add_option("--width", o.width, "HR width of generated scenes")->check(CLI::PositiveNumber)->capture_default_str();
  ablate->add_option("--height", o.height, "HR height of generated scenes")->check(CLI::PositiveNumber)->capture_default_str();
  ablate->add_option("--dropout", o.dropout, "Per-pixel dropout probability of generated scenes")
      ->check(CLI::Range(0.0, 0.999))
      ->capture_default_str();
  add_seed(ablate, o, "Seed for data, initialization and batching");
  add_scale(ablate, o);
  add_s(ablate, o);
  add_train_knobs(ablate, o);
  ablate->add_flag("--no-timing", o.no_timing, "Report every time field as 0 (byte-stable output)");
  add_threads(ablate, o);
  ablate->add_option("--out", o.out, "Also write the table to this file");

  return app;
}

std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

std::string scene_stem(std::size_t i) {
  std::ostringstream ss;
  ss << "scene_" << std::setw(4) << std::setfill('0') << i;
  return ss.str();
}

DatasetOptions dataset_options(const Options& o) {
  DatasetOptions d;
  d.width = o.width;
  d.height = o.height;
  d.dropout_rate = o.dropout;
  d.s = o.s;
  return d;
}

std::vector<DatasetItem> load_dataset(const Options& o, int scale, std::uint64_t seed, int n_scenes) {
  if (!o.manifest.empty()) {
    const io::Manifest m = io::read_manifest(o.manifest);
    std::vector<SceneSpec> specs;
    for (const auto& e : m.scenes) specs.push_back(e.spec);
    spdlog::info("loaded {} scene specs from {}", specs.size(), o.manifest);
    return build_dataset(specs, scale, o.s);
  }
  return build_dataset(n_scenes, scale, seed, dataset_options(o));
}

void write_or_print(const Options& o, const std::string& text, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
  } else {
    const fs::path p(o.out);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    io::write_text(p, text);
    spdlog::info("wrote {}", o.out);
  }
}

void cmd_synth(const Options& o, std::ostream& out) {
  const DatasetOptions opts = dataset_options(o);
  fs::create_directories(o.out);
  io::Manifest m;
  m.seed = o.seed;
  m.options = opts;
  const auto specs = dataset_specs(o.scenes, o.seed, opts);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const Intrinsics intr = default_intrinsics(specs[i].width, specs[i].height);
    const DepthMap d = render(specs[i], intr);
    const std::string stem = scene_stem(i);
    io::write_depth16(fs::path(o.out) / (stem + ".pgm"), d, o.unit);
    io::write_intrinsics(fs::path(o.out) / (stem + ".json"), intr);
    m.scenes.push_back({specs[i], stem + ".pgm", stem + ".json"});
    spdlog::debug("{}: {} ({} valid pixels)", stem, specs[i].kind(), d.valid_count());
  }
  io::write_manifest(fs::path(o.out) / "manifest.json", m);
  out << "wrote " << specs.size() << " scenes to " << o.out << "\n";
}

void cmd_make_lr(const Options& o, std::ostream& out) {
  require_supported_scale(o.scale);
  const Intrinsics intr = io::read_intrinsics(o.intrinsics);
  const DepthMap hr = io::read_depth16(o.depth, o.unit);
  require_matching_resolution(hr, intr);
  const LrPair lr = make_lr_pair(hr, intr, o.scale);
  fs::create_directories(o.out);
  io::write_depth16(fs::path(o.out) / "lr.pgm", lr.depth, o.unit);
  io::write_intrinsics(fs::path(o.out) / "lr.json", lr.intrinsics);
  out << "LR " << lr.depth.width << "x" << lr.depth.height << ", " << lr.depth.valid_count()
      << " valid pixels\n";
}

void cmd_encode(const Options& o, std::ostream& out) {
  const Intrinsics intr = io::read_intrinsics(o.intrinsics);
  const DepthMap d = io::read_depth16(o.depth, o.unit);
  require_matching_resolution(d, intr);
  const PnccImage p = encode(d, intr, o.s);
  const fs::path path(o.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  io::write_pncc48(path, p);
  out << "encoded " << p.valid_count() << " valid pixels to " << o.out << "\n";
}

void cmd_decode_depth(const Options& o, std::ostream& out) {
  const DepthMap d = decode_depth(io::read_pncc48(o.pncc));
  const fs::path path(o.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  io::write_depth16(path, d, o.unit);
  out << "decoded " << d.valid_count() << " depth samples to " << o.out << "\n";
}

void cmd_decode_cloud(const Options& o, std::ostream& out) {
  const PointCloud pc = decode_pointcloud(io::read_pncc48(o.pncc));
  const fs::path path(o.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  io::write_ply(path, pc);
  out << "decoded " << pc.size() << " points to " << o.out << "\n";
}

TrainConfig train_config(const Options& o) {
  TrainConfig tc;
  tc.learning_rate = o.lr;
  tc.epochs = o.epochs;
  tc.batch_size = o.batch;
  tc.seed = o.seed;
  tc.scale = o.scale;
  tc.head = parse_head_mode(o.head);
  tc.input = parse_input_mode(o.input);
  tc.patch_size = o.patch;
  tc.patches_per_scene = o.patches_per_scene;
  return tc;
}

ModelConfig model_config(const Options& o) {
  ModelConfig mc;
  mc.head = parse_head_mode(o.head);
  mc.input = parse_input_mode(o.input);
  mc.scale = o.scale;
  return mc;
}

void cmd_train(const Options& o, std::ostream& out) {
  const TrainConfig tc = train_config(o);
  tc.validate();
  const auto items = load_dataset(o, o.scale, o.seed, o.scenes);
  const auto samples = to_train_samples(items);
  SrModel model(model_config(o), o.seed);
  spdlog::info("training {} parameters on {} scenes for {} epochs", model.param_count(), items.size(), tc.epochs);

  std::string csv = "epoch,loss\n";
  const TrainResult tr = train(model, samples, tc, [&](int epoch, double loss) {
    spdlog::info("epoch {:>4}  loss {:.6g}", epoch, loss);
    csv += std::to_string(epoch) + "," + fmt_double(loss) + "\n";
  });

  fs::create_directories(o.out);
  io::write_checkpoint(fs::path(o.out) / "model.pnsr", model, tc);
  io::write_text(fs::path(o.out) / "loss.csv", csv);
  out << "trained " << tr.epoch_loss.size() << " epochs; final loss "
      << (tr.epoch_loss.empty() ? std::string("n/a") : fmt_double(tr.epoch_loss.back())) << "\n";
}

void cmd_eval(const Options& o, std::ostream& out) {
  if (o.checkpoint.empty() == o.baseline.empty()) {
    throw ArgumentError("eval: pass exactly one of --checkpoint or --baseline");
  }
  EvalOptions eo;
  eo.timing = !o.no_timing;
  std::vector<EvalReport> frames;
  if (!o.checkpoint.empty()) {
    const io::Checkpoint ck = io::read_checkpoint(o.checkpoint);
    const auto items = load_dataset(o, ck.model.config().scale, o.seed, o.scenes);
    frames = evaluate_model(ck.model, items, eo);
  } else {
    require_supported_scale(o.scale);
    const auto items = load_dataset(o, o.scale, o.seed, o.scenes);
    frames = evaluate_bicubic(items, o.scale, eo);
  }
  write_or_print(o, eval_report_jsonl(frames, aggregate(frames)), out);
}

void cmd_bench(const Options& o, std::ostream& out) {
  std::optional<io::Checkpoint> ck;
  if (!o.checkpoint.empty()) ck.emplace(io::read_checkpoint(o.checkpoint));
  const SrModel model = ck ? ck->model : SrModel(model_config(o), o.seed);
  const int scale = model.config().scale;
  const auto items = load_dataset(o, scale, o.seed, o.scenes);

  std::string text;
  std::vector<double> medians;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& item = items[i];
    const TimingStats t = bench(
        [&] {
          const PnccImage lr = encode_with(item.lr_depth, item.lr_intrinsics, item.lr.require_norm());
          const Prediction p = predict(model, lr, item.hr_intrinsics);
          if (p.depth.width == 0) throw StateError("bench: empty prediction");
        },
        o.warmup, o.reps);
    medians.push_back(t.median_s);
    json j;
    j["frame"] = i;
    j["time_s"] = t.median_s;
    j["mean_s"] = t.mean_s;
    j["cv"] = t.cv;
    j["params"] = model.param_count();
    text += j.dump() + "\n";
  }
  json total;
  total["aggregate"] = true;
  total["time_s"] = pairwise_sum(medians) / static_cast<double>(medians.size());
  total["time_total_s"] = pairwise_sum(medians);
  total["params"] = model.param_count();
  total["frames"] = items.size();
  text += total.dump() + "\n";
  write_or_print(o, text, out);
}

void cmd_ablate(const Options& o, std::ostream& out) {
  TrainConfig tc = train_config(o);
  tc.validate();
  DatasetOptions dopts = dataset_options(o);
  const auto train_items = build_dataset(o.train_scenes, o.scale, o.seed, dopts);
  const auto test_items = build_dataset(o.test_scenes, o.scale, o.seed + 1, dopts);
  EvalOptions eo;
  eo.timing = !o.no_timing;
  const auto rows = run_ablation(train_items, test_items, tc, eo);

  std::string table = "| head | input | params | final_loss | rmse_cm | chamfer | time_s |\n"
                      "|------|-------|--------|------------|---------|---------|--------|\n";
  for (const auto& r : rows) {
    std::string head = to_string(r.head);
    std::string input = to_string(r.input);
    for (auto& c : head) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (auto& c : input) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    table += "| " + head + " | " + input + " | " + std::to_string(r.param_count) + " | " +
             fmt_double(r.final_loss) + " | " + fmt_double(r.report.rmse_cm) + " | " +
             fmt_double(r.report.chamfer) + " | " + fmt_double(r.report.time_per_frame_s) + " |\n";
  }
  out << table;
  if (!o.out.empty()) {
    const fs::path p(o.out);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    io::write_text(p, table);
  }
}

void configure_logging(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("pnsr", sink);
  logger->set_pattern("[%l] %v");
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("PNSR_LOG")) {
    const std::string v = env;
    if (v == "error") level = spdlog::level::err;
    else if (v == "warn") level = spdlog::level::warn;
    else if (v == "info") level = spdlog::level::info;
    else if (v == "debug") level = spdlog::level::debug;
    else err << "pnsr: ignoring unknown PNSR_LOG value '" << v << "'\n";
  }
  logger->set_level(level);
  spdlog::set_default_logger(logger);
}

}  // namespace

std::vector<std::string> subcommands() { return kCommands; }

std::string help_text(const std::string& subcommand) {
  Options o;
  auto app = build_app(o);
  if (subcommand.empty()) return app->help();
  return app->get_subcommand(subcommand)->help();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  configure_logging(err);
  Options o;
  auto app = build_app(o);
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app->parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app->exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  const auto* sub = app->get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    set_max_threads(o.threads);
    if (name == "synth") cmd_synth(o, out);
    else if (name == "make-lr") cmd_make_lr(o, out);
    else if (name == "encode") cmd_encode(o, out);
    else if (name == "decode-depth") cmd_decode_depth(o, out);
    else if (name == "decode-cloud") cmd_decode_cloud(o, out);
    else if (name == "train") cmd_train(o, out);
    else if (name == "eval") cmd_eval(o, out);
    else if (name == "bench") cmd_bench(o, out);
    else if (name == "ablate") cmd_ablate(o, out);
    else throw ArgumentError("unknown command '" + name + "'");
  } catch (const NumericError& e) {
    err << "pnsr " << name << ": numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const ArgumentError& e) {
    err << "pnsr " << name << ": " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "pnsr " << name << ": " << e.what() << "\n";
    return kData;
  } catch (const fs::filesystem_error& e) {
    err << "pnsr " << name << ": " << e.what() << "\n";
    return kData;
  }
  return kOk;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace pnsr::cli
