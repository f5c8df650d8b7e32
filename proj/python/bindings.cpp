#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prle/cam.hpp"
#include "prle/config.hpp"
#include "prle/dataset.hpp"
#include "prle/detector.hpp"
#include "prle/exploitation.hpp"
#include "prle/fusion.hpp"
#include "prle/tensor_io.hpp"
#include "prle/trainer.hpp"

namespace py = pybind11;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using ByteArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

prle::Map2D map_from_array(const DoubleArray& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
  prle::Map2D m(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.values().begin());
  return m;
}

py::array_t<double> array_from_map(const prle::Map2D& m) {
  py::array_t<double> a({m.rows(), m.cols()});
  std::copy(m.values().begin(), m.values().end(), a.mutable_data());
  return a;
}

prle::ChannelStack stack_from_array(const DoubleArray& a) {
  if (a.ndim() != 3) throw std::invalid_argument("expected a 3-D array");
  prle::ChannelStack s(static_cast<int>(a.shape(0)),
                       static_cast<int>(a.shape(1)),
                       static_cast<int>(a.shape(2)));
  std::copy(a.data(), a.data() + a.size(), s.values().begin());
  return s;
}

prle::BinaryMask mask_from_array(const ByteArray& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
  prle::BinaryMask m(static_cast<int>(a.shape(0)),
                     static_cast<int>(a.shape(1)));
  const auto* p = a.data();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c)
      m.set(r, c, p[static_cast<std::size_t>(r) * m.cols() + c]);
  return m;
}

py::array_t<std::uint8_t> array_from_mask(const prle::BinaryMask& m) {
  py::array_t<std::uint8_t> a({m.rows(), m.cols()});
  std::copy(m.values().begin(), m.values().end(), a.mutable_data());
  return a;
}

// Images arrive as HxW or HxWxC arrays.
prle::Image image_from_array(const DoubleArray& a) {
  if (a.ndim() == 2) {
    prle::Image img(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
                    1);
    std::copy(a.data(), a.data() + a.size(), img.values().begin());
    return img;
  }
  if (a.ndim() == 3) {
    prle::Image img(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
                    static_cast<int>(a.shape(2)));
    std::copy(a.data(), a.data() + a.size(), img.values().begin());
    return img;
  }
  throw std::invalid_argument("expected a 2-D or 3-D image array");
}

py::array_t<double> array_from_image(const prle::Image& img) {
  if (img.channels() == 1) {
    py::array_t<double> a({img.rows(), img.cols()});
    std::copy(img.values().begin(), img.values().end(), a.mutable_data());
    return a;
  }
  py::array_t<double> a({img.rows(), img.cols(), img.channels()});
  std::copy(img.values().begin(), img.values().end(), a.mutable_data());
  return a;
}

prle::ModelZooMaps zoo_from_list(const std::vector<DoubleArray>& maps) {
  prle::ModelZooMaps zoo;
  for (const auto& m : maps) zoo.maps.push_back(map_from_array(m));
  return zoo;
}

prle::FusionConfig fusion_config(double tau1, double lambda, int neighborhood,
                                 bool include_center,
                                 bool pairs_include_same_model) {
  prle::FusionConfig cfg;
  cfg.tau1 = tau1;
  cfg.lambda = lambda;
  if (neighborhood != 4 && neighborhood != 8)
    throw std::invalid_argument("neighborhood must be 4 or 8");
  cfg.neighborhood = neighborhood == 4 ? prle::Neighborhood::kFourConnected
                                       : prle::Neighborhood::kEightConnected;
  cfg.include_center_in_value_max = include_center;
  cfg.pairs_include_same_model = pairs_include_same_model;
  return cfg;
}

std::vector<prle::TrainingExample> examples_from_arrays(
    const DoubleArray& images, const py::array_t<std::int64_t>& labels) {
  if (images.ndim() != 3)
    throw std::invalid_argument("images must be an N x H x W array");
  if (labels.ndim() != 1 || labels.shape(0) != images.shape(0))
    throw std::invalid_argument("labels must be a length-N 1-D array");
  const int n = static_cast<int>(images.shape(0));
  const int h = static_cast<int>(images.shape(1));
  const int w = static_cast<int>(images.shape(2));
  std::vector<prle::TrainingExample> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    prle::TrainingExample ex;
    ex.label = static_cast<int>(labels.at(i));
    ex.image = prle::Image(h, w, 1);
    const double* src = images.data() + static_cast<std::size_t>(i) * h * w;
    std::copy(src, src + static_cast<std::size_t>(h) * w,
              ex.image.values().begin());
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_prle, m) {
  m.doc() = "Attention-map fusion and primary-region masking pipeline";

  m.def(
      "compute_cam",
      [](const DoubleArray& features, const DoubleArray& grads) {
        return array_from_map(
            prle::compute_cam(stack_from_array(features), stack_from_array(grads)));
      },
      py::arg("features"), py::arg("grads"),
      "Gradient-weighted class activation map from K x H x W stacks.");

  m.def(
      "normalize_minmax",
      [](const DoubleArray& cam) {
        return array_from_map(prle::normalize_minmax(map_from_array(cam)));
      },
      py::arg("cam"));

  m.def(
      "upsample_nearest",
      [](const DoubleArray& map, int rows, int cols) {
        return array_from_map(
            prle::upsample_nearest(map_from_array(map), rows, cols));
      },
      py::arg("map"), py::arg("rows"), py::arg("cols"));

  m.def(
      "average_fuse",
      [](const std::vector<DoubleArray>& maps, double tau1) {
        return array_from_map(prle::average_fuse(zoo_from_list(maps), tau1));
      },
      py::arg("maps"), py::arg("tau1") = 0.3);

  m.def(
      "neighboring_fuse",
      [](const std::vector<DoubleArray>& maps, double tau1, double lambda,
         int neighborhood, bool include_center, bool pairs_include_same_model) {
        return array_from_map(prle::neighboring_fuse(
            zoo_from_list(maps),
            fusion_config(tau1, lambda, neighborhood, include_center,
                          pairs_include_same_model)));
      },
      py::arg("maps"), py::arg("tau1") = 0.3, py::arg("lambda") = 0.15,
      py::arg("neighborhood") = 8, py::arg("include_center") = true,
      py::arg("pairs_include_same_model") = true);

  m.def(
      "to_binary_mask",
      [](const DoubleArray& fused) {
        return array_from_mask(prle::to_binary_mask(map_from_array(fused)));
      },
      py::arg("fused"));

  m.def(
      "complement",
      [](const ByteArray& mask) {
        return array_from_mask(prle::complement(mask_from_array(mask)));
      },
      py::arg("mask"));

  m.def(
      "primary_region_ratio",
      [](const ByteArray& mask) {
        return prle::primary_region_ratio(mask_from_array(mask));
      },
      py::arg("mask"), "Percentage of mask pixels set to one.");

  m.def(
      "rank_pixels",
      [](const DoubleArray& fused) {
        py::list out;
        for (const auto& rp : prle::rank_pixels(map_from_array(fused)))
          out.append(py::make_tuple(rp.pos.row, rp.pos.col, rp.value));
        return out;
      },
      py::arg("fused"),
      "Strictly positive pixels as (row, col, value), descending by value.");

  m.def(
      "top_alpha_mask",
      [](const DoubleArray& fused, double alpha) {
        const prle::Map2D map = map_from_array(fused);
        const auto selection =
            prle::select_top_alpha(prle::rank_pixels(map), alpha);
        return array_from_mask(
            prle::apply_selection(selection, prle::to_binary_mask(map)));
      },
      py::arg("fused"), py::arg("alpha"),
      "Binary mask of the retained top-alpha ranked pixels.");

  m.def(
      "dynamic_augment",
      [](const DoubleArray& image, const DoubleArray& fused, double alpha) {
        return array_from_image(
            prle::dynamic_augment(image_from_array(image),
                                  map_from_array(fused), alpha)
                .image);
      },
      py::arg("image"), py::arg("fused"), py::arg("alpha"),
      "Image with the top-alpha primary region zeroed out.");

  m.def("bce_loss", &prle::bce_loss, py::arg("score"), py::arg("label"));

  m.def(
      "generate_synthetic_dataset",
      [](int n_examples, int side, int patch_side, int patch_row, int patch_col,
         double patch_correlation, double global_signal_strength,
         double noise_amplitude, std::uint64_t seed) {
        prle::SyntheticDatasetConfig cfg;
        cfg.n_examples = n_examples;
        cfg.side = side;
        cfg.patch_side = patch_side;
        cfg.patch_row = patch_row;
        cfg.patch_col = patch_col;
        cfg.patch_correlation = patch_correlation;
        cfg.global_signal_strength = global_signal_strength;
        cfg.noise_amplitude = noise_amplitude;
        cfg.seed = seed;
        const auto data = prle::generate_synthetic_dataset(cfg);
        py::array_t<double> images({n_examples, side, side});
        py::array_t<std::int64_t> labels({n_examples});
        for (int i = 0; i < n_examples; ++i) {
          std::copy(data[i].image.values().begin(),
                    data[i].image.values().end(),
                    images.mutable_data() +
                        static_cast<std::size_t>(i) * side * side);
          labels.mutable_at(i) = data[i].label;
        }
        return py::make_tuple(images, labels);
      },
      py::arg("n_examples"), py::arg("side") = 32, py::arg("patch_side") = 6,
      py::arg("patch_row") = 4, py::arg("patch_col") = 4,
      py::arg("patch_correlation") = 1.0,
      py::arg("global_signal_strength") = 0.3,
      py::arg("noise_amplitude") = 0.25, py::arg("seed") = 0,
      "Planted-shortcut dataset as (images, labels) arrays.");

  py::class_<prle::ToyDetectorParams>(m, "ToyDetector")
      .def_static(
          "init",
          [](int channels, int input_side, std::uint64_t seed) {
            prle::Rng rng(seed);
            return prle::init_params(channels, input_side, rng);
          },
          py::arg("channels"), py::arg("input_side") = 32, py::arg("seed") = 0)
      .def_static(
          "load",
          [](const std::string& dir) { return prle::load_detector(dir); },
          py::arg("dir"))
      .def("save",
           [](const prle::ToyDetectorParams& p, const std::string& dir) {
             prle::save_detector(dir, p);
           },
           py::arg("dir"))
      .def_readonly("channels", &prle::ToyDetectorParams::channels)
      .def_readonly("input_side", &prle::ToyDetectorParams::input_side)
      .def(
          "forward",
          [](const prle::ToyDetectorParams& p, const DoubleArray& image) {
            return prle::forward(p, image_from_array(image)).score;
          },
          py::arg("image"), "Sigmoid score in (0,1).")
      .def(
          "attention",
          [](const prle::ToyDetectorParams& p, const DoubleArray& image) {
            auto [features, grads] =
                prle::extract_cam_inputs(p, image_from_array(image));
            return array_from_map(
                prle::normalize_minmax(prle::compute_cam(features, grads)));
          },
          py::arg("image"), "Normalized attention map at image resolution.")
      .def(
          "train",
          [](prle::ToyDetectorParams& p, const DoubleArray& images,
             const py::array_t<std::int64_t>& labels, int epochs,
             double learning_rate, int batch_size) {
            prle::train_detector(p, examples_from_arrays(images, labels),
                                 epochs, learning_rate, batch_size);
          },
          py::arg("images"), py::arg("labels"), py::arg("epochs") = 10,
          py::arg("learning_rate") = 0.5, py::arg("batch_size") = 32,
          "Plain mini-batch BCE training, in place.")
      .def(
          "evaluate",
          [](const prle::ToyDetectorParams& p, const DoubleArray& images,
             const py::array_t<std::int64_t>& labels) {
            const auto res =
                prle::evaluate(p, examples_from_arrays(images, labels));
            return py::make_tuple(res.accuracy,
                                  res.auc ? py::cast(*res.auc)
                                          : py::none().cast<py::object>());
          },
          py::arg("images"), py::arg("labels"),
          "(accuracy, auc); auc is None for single-class data.");

  m.def(
      "fit_demo",
      [](const DoubleArray& images, const py::array_t<std::int64_t>& labels,
         const DoubleArray& eval_images,
         const py::array_t<std::int64_t>& eval_labels, bool prle_on,
         const std::string& config_json) {
        prle::PipelineConfig cfg =
            config_json.empty() ? prle::default_pipeline_config()
                                : prle::pipeline_config_from_json(config_json);
        cfg.train.prle_enabled = prle_on;
        const auto train_set = examples_from_arrays(images, labels);
        const auto eval_set = examples_from_arrays(eval_images, eval_labels);
        const prle::FitResult res =
            prle::fit(cfg.fit_config(), train_set, {eval_set});
        py::dict out;
        out["csv"] = prle::epoch_stats_csv(res.stats);
        const auto final_eval = prle::evaluate(res.model, eval_set);
        out["eval_acc"] = final_eval.accuracy;
        out["eval_auc"] = final_eval.auc ? py::cast(*final_eval.auc)
                                         : py::none().cast<py::object>();
        out["model"] = res.model;
        return out;
      },
      py::arg("images"), py::arg("labels"), py::arg("eval_images"),
      py::arg("eval_labels"), py::arg("prle_on") = true,
      py::arg("config_json") = std::string(),
      "Full pipeline run; returns the per-epoch CSV and final metrics.");

#ifdef VERSION_INFO
  m.attr("__version__") = VERSION_INFO;
#else
  m.attr("__version__") = "dev";
#endif
}
