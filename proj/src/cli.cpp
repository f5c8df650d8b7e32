#include "prle/cli.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "prle/cam.hpp"
#include "prle/config.hpp"
#include "prle/exploitation.hpp"
#include "prle/fusion.hpp"
#include "prle/png_io.hpp"
#include "prle/tensor_io.hpp"
#include "prle/trainer.hpp"

namespace prle {

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;

struct CommonFlags {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

PipelineConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return default_pipeline_config();
  return load_pipeline_config(path);
}

// Deterministic per-run seed layout: the data stream, the trainer stream,
// the held-out stream and each zoo member get distinct fixed offsets from
// the base seed.
void apply_base_seed(PipelineConfig& cfg, std::uint64_t seed) {
  cfg.data.seed = seed;
  cfg.train.seed = seed + 1;
  cfg.eval_seed = seed + 2;
  for (std::size_t t = 0; t < cfg.zoo.members.size(); ++t)
    cfg.zoo.members[t].seed = seed + 1000 * (t + 1);
}

std::string zero_padded(int value, int width) {
  std::string s = std::to_string(value);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

Map2D load_map(const fs::path& path) {
  return map_from_tensor(read_tensor(path));
}

void write_map_png(const fs::path& path, const Map2D& map) {
  Image img(map.rows(), map.cols(), 1);
  for (std::size_t i = 0; i < map.size(); ++i)
    img.values()[i] = map.values()[i];
  write_image_png(path, img);
}

SyntheticDatasetConfig eval_data_config(const PipelineConfig& cfg) {
  SyntheticDatasetConfig eval = cfg.data;
  eval.n_examples = cfg.eval_examples;
  eval.patch_correlation = cfg.eval_patch_correlation;
  eval.seed = cfg.eval_seed;
  return eval;
}

// ---------------------------------------------------------------------------
// zoo-train

int run_zoo_train(const CommonFlags& flags, const std::string& out_dir,
                  int members) {
  PipelineConfig cfg = load_config_or_default(flags.config_path);
  if (members > 0) {
    const std::size_t old = cfg.zoo.members.size();
    cfg.zoo.members.resize(members);
    for (std::size_t t = old; t < cfg.zoo.members.size(); ++t)
      cfg.zoo.members[t] = {.seed = 11 * (t + 1),
                            .channels = static_cast<int>(2 + t % 3)};
  }
  if (flags.seed_given) apply_base_seed(cfg, flags.seed);
  if (cfg.zoo.members.empty())
    throw std::invalid_argument("zoo-train: zoo has no members");

  const auto data = generate_synthetic_dataset(cfg.data);
  const int side = cfg.data.side;

  fs::create_directories(out_dir);
  nlohmann::json manifest;
  manifest["members"] = nlohmann::json::array();

  for (std::size_t t = 0; t < cfg.zoo.members.size(); ++t) {
    const ZooMemberConfig& member = cfg.zoo.members[t];
    Rng rng(member.seed);
    ToyDetectorParams params = init_params(member.channels, side, rng);
    train_detector(params, data, cfg.zoo.epochs, cfg.zoo.learning_rate,
                   cfg.zoo.batch_size);

    const std::string name = "member_" + zero_padded(static_cast<int>(t), 2);
    save_detector(fs::path(out_dir) / name, params);
    manifest["members"].push_back(
        {{"dir", name},
         {"seed", member.seed},
         {"channels", member.channels}});
    const EvalResult train_eval = evaluate(params, data);
    std::cout << name << " trained: acc=" << train_eval.accuracy << "\n";
  }

  std::ofstream f(fs::path(out_dir) / "zoo.json", std::ios::trunc);
  if (!f) throw IoError("zoo-train: cannot write zoo manifest");
  f << manifest.dump(2) << '\n';
  return kExitOk;
}

std::vector<ToyDetectorParams> load_zoo(const fs::path& zoo_dir) {
  std::ifstream f(zoo_dir / "zoo.json");
  if (!f) throw IoError("cam: missing zoo manifest in " + zoo_dir.string());
  nlohmann::json manifest;
  try {
    f >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("cam: bad zoo manifest: " + std::string(e.what()));
  }
  std::vector<ToyDetectorParams> zoo;
  for (const auto& entry : manifest.at("members"))
    zoo.push_back(load_detector(zoo_dir / entry.at("dir").get<std::string>()));
  if (zoo.empty()) throw IoError("cam: zoo manifest lists no members");
  return zoo;
}

// ---------------------------------------------------------------------------
// cam

int run_cam(const std::string& zoo_dir, const std::string& out_dir,
            const std::vector<std::string>& images) {
  const std::vector<ToyDetectorParams> zoo = load_zoo(zoo_dir);
  fs::create_directories(out_dir);

  for (const std::string& image_path : images) {
    const Image img = read_image_png(image_path);
    if (img.channels() != 1)
      throw std::invalid_argument(
          "cam: detector input must be grayscale: " + image_path);
    const std::string stem = fs::path(image_path).stem().string();
    for (std::size_t t = 0; t < zoo.size(); ++t) {
      auto [features, grads] = extract_cam_inputs(zoo[t], img);
      const AttentionMap attention =
          normalize_minmax(compute_cam(features, grads));
      const std::string base =
          stem + "_m" + std::to_string(t);
      write_tensor(fs::path(out_dir) / (base + ".prle"),
                   tensor_from_map(attention));
      write_map_png(fs::path(out_dir) / (base + ".png"), attention);
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fuse

int run_fuse(const std::vector<std::string>& map_paths,
             const FusionConfig& fusion, const std::string& out_path,
             const std::string& png_path) {
  ModelZooMaps zoo;
  for (const std::string& path : map_paths) {
    zoo.maps.push_back(load_map(path));
    zoo.model_ids.push_back(fs::path(path).stem().string());
  }
  const FusedMap fused = fuse(zoo, fusion);
  write_tensor(out_path, tensor_from_map(fused));
  if (!png_path.empty()) write_map_png(png_path, fused);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// mask

int run_mask(const std::string& fused_path, double alpha,
             const std::string& out_path, const std::string& out_tensor) {
  const FusedMap fused = load_map(fused_path);
  const SelectionSet selection =
      select_top_alpha(rank_pixels(fused), alpha);
  const BinaryMask effective =
      apply_selection(selection, to_binary_mask(fused));
  write_mask_png(out_path, effective);
  if (!out_tensor.empty()) write_tensor(out_tensor, tensor_from_mask(effective));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// augment

int run_augment(const std::vector<std::string>& images,
                const std::vector<std::string>& maps, double alpha,
                const std::string& out_dir) {
  if (images.size() != maps.size())
    throw std::invalid_argument(
        "augment: need exactly one fused map per image");
  fs::create_directories(out_dir);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Image img = read_image_png(images[i]);
    const FusedMap fused = load_map(maps[i]);
    const AugmentedImage aug = dynamic_augment(img, fused, alpha);
    const std::string stem = fs::path(images[i]).stem().string();
    write_image_png(fs::path(out_dir) / (stem + ".png"), aug.image);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train-demo

int run_train_demo(const CommonFlags& flags, const std::string& prle_mode,
                   const std::string& out_csv, const std::string& out_model) {
  PipelineConfig cfg = load_config_or_default(flags.config_path);
  if (flags.seed_given) apply_base_seed(cfg, flags.seed);
  cfg.train.prle_enabled = prle_mode == "on";

  const auto train_set = generate_synthetic_dataset(cfg.data);
  const auto eval_set = generate_synthetic_dataset(eval_data_config(cfg));

  const FitResult result = fit(cfg.fit_config(), train_set, {eval_set});

  std::ofstream f(out_csv, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("train-demo: cannot write " + out_csv);
  f << epoch_stats_csv(result.stats);

  if (!out_model.empty()) save_detector(out_model, result.model);

  const int n_probes = std::min(200, cfg.eval_examples);
  const auto probes =
      generate_probe_images(cfg.data, n_probes, cfg.eval_seed + 1);
  const double dependence =
      patch_dependence_score(result.model, probes, cfg.data.patch_row,
                             cfg.data.patch_col, cfg.data.patch_side);

  const EvalResult final_eval = evaluate(result.model, eval_set);
  std::cout << "prle=" << prle_mode << " eval_acc=" << final_eval.accuracy
            << " eval_auc="
            << (final_eval.auc ? std::to_string(*final_eval.auc) : "n/a")
            << " patch_dependence=" << dependence << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// stats

int run_stats(const std::vector<std::string>& mask_paths,
              const std::string& out_path) {
  std::string report;
  for (const std::string& path : mask_paths) {
    BinaryMask mask = fs::path(path).extension() == ".prle"
                          ? mask_from_tensor(read_tensor(path))
                          : read_mask_png(path);
    report += path;
    report += '\t';
    report += format_ratio(primary_region_ratio(mask));
    report += '\n';
  }
  std::cout << report;
  if (!out_path.empty()) {
    std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("stats: cannot write " + out_path);
    f << report;
  }
  return kExitOk;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args) {
  CLI::App app{"Primary-region localization and exploitation pipeline"};
  app.require_subcommand(1);

  CommonFlags flags;

  // zoo-train
  auto* zoo_train =
      app.add_subcommand("zoo-train", "Train the detector zoo on synthetic data");
  std::string zt_out;
  int zt_members = 0;
  zoo_train->add_option("--out", zt_out, "Output directory")->required();
  zoo_train->add_option("--members", zt_members,
                        "Zoo size (overrides config)");
  zoo_train->add_option("--seed", flags.seed, "Base seed for all randomness");
  zoo_train->add_option("--config", flags.config_path, "Pipeline config JSON");

  // cam
  auto* cam = app.add_subcommand(
      "cam", "Per-image attention maps from every zoo member");
  std::string cam_zoo, cam_out;
  std::vector<std::string> cam_images;
  cam->add_option("--zoo", cam_zoo, "Zoo directory from zoo-train")->required();
  cam->add_option("--out", cam_out, "Output directory")->required();
  cam->add_option("images", cam_images, "Grayscale PNG images")
      ->required()
      ->expected(-1);

  // fuse
  auto* fuse_cmd =
      app.add_subcommand("fuse", "Fuse per-model attention maps into one map");
  std::vector<std::string> fuse_maps;
  std::string fuse_strategy = "neighboring";
  FusionConfig fusion_cfg;
  int fuse_neighborhood = 8;
  std::string fuse_out, fuse_png;
  fuse_cmd->add_option("maps", fuse_maps, "Attention map tensors (.prle)")
      ->required()
      ->expected(-1);
  fuse_cmd->add_option("--strategy", fuse_strategy, "average or neighboring")
      ->check(CLI::IsMember({"average", "neighboring"}));
  fuse_cmd->add_option("--tau1", fusion_cfg.tau1,
                       "Average-fusion threshold (default 0.3)");
  fuse_cmd->add_option("--lambda", fusion_cfg.lambda,
                       "Neighbor-contrast threshold (default 0.15)");
  fuse_cmd->add_option("--neighborhood", fuse_neighborhood, "4 or 8")
      ->check(CLI::IsMember({4, 8}));
  fuse_cmd->add_flag("--exclude-center",
                     "Leave the center pixel out of the value max");
  fuse_cmd->add_option("--out", fuse_out, "Fused map tensor path")->required();
  fuse_cmd->add_option("--png", fuse_png, "Optional grayscale PNG rendering");

  // mask
  auto* mask_cmd = app.add_subcommand(
      "mask", "Top-alpha binary mask from a fused map");
  std::string mask_fused, mask_out, mask_out_tensor;
  double mask_alpha = 1.0;
  mask_cmd->add_option("--fused", mask_fused, "Fused map tensor")->required();
  mask_cmd->add_option("--alpha", mask_alpha, "Retained ranked fraction, (0,1]")
      ->required();
  mask_cmd->add_option("--out", mask_out, "Mask PNG path")->required();
  mask_cmd->add_option("--out-tensor", mask_out_tensor,
                       "Optional mask tensor path");

  // augment
  auto* augment_cmd =
      app.add_subcommand("augment", "Write masked copies of images");
  std::vector<std::string> aug_images, aug_maps;
  double aug_alpha = 1.0;
  std::string aug_out_dir;
  augment_cmd->add_option("images", aug_images, "PNG images")
      ->required()
      ->expected(-1);
  augment_cmd->add_option("--maps", aug_maps, "Fused map per image")
      ->required()
      ->expected(-1);
  augment_cmd->add_option("--alpha", aug_alpha, "Retained ranked fraction")
      ->required();
  augment_cmd->add_option("--out-dir", aug_out_dir, "Output directory")
      ->required();

  // train-demo
  auto* demo = app.add_subcommand(
      "train-demo", "Full pipeline on synthetic data with per-epoch CSV");
  std::string demo_prle = "on";
  std::string demo_csv, demo_model;
  demo->add_option("--prle", demo_prle, "on or off")
      ->check(CLI::IsMember({"on", "off"}));
  demo->add_option("--out-csv", demo_csv, "Per-epoch stats CSV path")
      ->required();
  demo->add_option("--out-model", demo_model, "Optional trained-model dir");
  demo->add_option("--seed", flags.seed, "Base seed for all randomness");
  demo->add_option("--config", flags.config_path, "Pipeline config JSON");

  // stats
  auto* stats_cmd = app.add_subcommand(
      "stats", "Primary-region ratios of binary masks");
  std::vector<std::string> stats_masks;
  std::string stats_out;
  stats_cmd->add_option("masks", stats_masks, "Mask files (.png or .prle)")
      ->required()
      ->expected(-1);
  stats_cmd->add_option("--out", stats_out, "Optional report file");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("prle");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  flags.seed_given =
      zoo_train->count("--seed") > 0 || demo->count("--seed") > 0;

  try {
    if (*zoo_train) return run_zoo_train(flags, zt_out, zt_members);
    if (*cam) return run_cam(cam_zoo, cam_out, cam_images);
    if (*fuse_cmd) {
      fusion_cfg.strategy = fuse_strategy == "average"
                                ? FusionStrategy::kAverage
                                : FusionStrategy::kNeighboring;
      fusion_cfg.neighborhood = fuse_neighborhood == 4
                                    ? Neighborhood::kFourConnected
                                    : Neighborhood::kEightConnected;
      fusion_cfg.include_center_in_value_max =
          fuse_cmd->count("--exclude-center") == 0;
      return run_fuse(fuse_maps, fusion_cfg, fuse_out, fuse_png);
    }
    if (*mask_cmd)
      return run_mask(mask_fused, mask_alpha, mask_out, mask_out_tensor);
    if (*augment_cmd)
      return run_augment(aug_images, aug_maps, aug_alpha, aug_out_dir);
    if (*demo) return run_train_demo(flags, demo_prle, demo_csv, demo_model);
    if (*stats_cmd) return run_stats(stats_masks, stats_out);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}

}  // namespace prle
