#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>

#include "wagi/corpus.hpp"
#include "wagi/errors.hpp"
#include "wagi/imageio.hpp"
#include "wagi/inversion.hpp"
#include "wagi/metrics.hpp"
#include "wagi/spectrum.hpp"
#include "wagi/synthesis.hpp"
#include "wagi/theory.hpp"
#include "wagi/version.hpp"
#include "wagi/wavelet.hpp"

namespace py = pybind11;
using namespace wagi;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Accepts (H, W) or (C, H, W) float arrays.
Tensor to_tensor(const Array& a) {
  if (a.ndim() != 2 && a.ndim() != 3) throw DimensionError("expected a (C, H, W) or (H, W) array");
  const int c = a.ndim() == 3 ? static_cast<int>(a.shape(0)) : 1;
  const int h = static_cast<int>(a.shape(a.ndim() - 2));
  const int w = static_cast<int>(a.shape(a.ndim() - 1));
  Tensor t(Shape{c, h, w});
  std::copy(a.data(), a.data() + a.size(), t.values().begin());
  return t;
}

Array to_array(const Tensor& t) {
  Array a({t.channels(), t.height(), t.width()});
  std::copy(t.values().begin(), t.values().end(), a.mutable_data());
  return a;
}

py::tuple quad_to_tuple(const BandQuad& q) {
  return py::make_tuple(to_array(q.ll), to_array(q.lh), to_array(q.hl), to_array(q.hh));
}

py::dict spectrum_dict(const ReducedSpectrum& s) {
  py::dict d;
  d["bins"] = s.bins;
  d["radii"] = s.bin_radii;
  d["nyquist"] = s.nyquist;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Haar wavelet analysis, sub-band losses and latent regression.";
  m.attr("__version__") = kVersion;

  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  // wavelet
  m.def(
      "haar_forward",
      [](const Array& img, const std::string& mode) {
        return quad_to_tuple(haar_forward(to_tensor(img), FilterBank::for_mode(parse_scale_mode(mode))));
      },
      py::arg("img"), py::arg("mode") = "orthonormal", "One analysis step; returns (LL, LH, HL, HH).");
  m.def(
      "haar_inverse",
      [](const Array& ll, const Array& lh, const Array& hl, const Array& hh, const std::string& mode) {
        const BandQuad q{to_tensor(ll), to_tensor(lh), to_tensor(hl), to_tensor(hh)};
        return to_array(haar_inverse(q, FilterBank::for_mode(parse_scale_mode(mode))));
      },
      py::arg("ll"), py::arg("lh"), py::arg("hl"), py::arg("hh"), py::arg("mode") = "orthonormal");
  m.def(
      "decompose",
      [](const Array& img, int levels, const std::string& mode) {
        const WaveletPyramid p = decompose(to_tensor(img), levels, FilterBank::for_mode(parse_scale_mode(mode)));
        py::list lv;
        for (const BandTriple& t : p.levels) lv.append(py::make_tuple(to_array(t.lh), to_array(t.hl), to_array(t.hh)));
        return py::make_tuple(lv, to_array(p.approx));
      },
      py::arg("img"), py::arg("levels"), py::arg("mode") = "orthonormal",
      "Returns ([(LH, HL, HH) per level, finest first], approximation).");
  m.def(
      "reconstruct",
      [](const std::vector<std::tuple<Array, Array, Array>>& levels, const Array& approx, const std::string& mode) {
        WaveletPyramid p;
        p.scale_mode = parse_scale_mode(mode);
        for (const auto& [lh, hl, hh] : levels) p.levels.push_back({to_tensor(lh), to_tensor(hl), to_tensor(hh)});
        p.approx = to_tensor(approx);
        return to_array(reconstruct(p, FilterBank::for_mode(p.scale_mode)));
      },
      py::arg("levels"), py::arg("approx"), py::arg("mode") = "orthonormal");

  // metrics
  m.def(
      "pixel_loss", [](const Array& a, const Array& b, int p) { return pixel_loss(to_tensor(a), to_tensor(b), p); },
      py::arg("a"), py::arg("b"), py::arg("p") = 2);
  m.def(
      "subband_loss",
      [](const Array& a, const Array& b, const std::string& band, int level, int p, const std::string& mode) {
        return subband_loss(to_tensor(a), to_tensor(b), parse_band(band), level, p, parse_scale_mode(mode));
      },
      py::arg("a"), py::arg("b"), py::arg("band"), py::arg("level") = 0, py::arg("p") = 2,
      py::arg("mode") = "orthonormal");
  m.def(
      "wavelet_loss",
      [](const Array& a, const Array& b, int K, const std::string& mode) {
        return wavelet_loss_k(to_tensor(a), to_tensor(b), K, parse_scale_mode(mode));
      },
      py::arg("a"), py::arg("b"), py::arg("K") = 0, py::arg("mode") = "orthonormal");
  m.def(
      "ssim", [](const Array& a, const Array& b) { return ssim(to_tensor(a), to_tensor(b)); }, py::arg("a"),
      py::arg("b"));

  // theory
  m.def(
      "verify_theorem1",
      [](const Array& a, const Array& b) {
        const Theorem1Report r = verify_theorem1(to_tensor(a), to_tensor(b));
        py::dict d;
        d["l2"] = r.l2;
        d["subband_sum_raw"] = r.subband_sum_raw;
        d["subband_sum_orthonormal_quarter"] = r.subband_sum_orthonormal_quarter;
        d["ratio_raw"] = r.ratio_raw;
        return d;
      },
      py::arg("a"), py::arg("b"));
  m.def("half_normal_mean", &half_normal_mean, py::arg("mu"), py::arg("sigma"));
  m.def(
      "verify",
      [](std::int64_t samples, std::uint64_t seed, int pairs) {
        VerifyOptions o;
        o.samples = samples;
        o.seed = seed;
        o.theorem_pairs = pairs;
        py::list out;
        for (const Verdict& v : verify_suite(o)) {
          py::dict d;
          d["check"] = v.check;
          d["status"] = std::string(to_string(v.status));
          d["observed"] = v.observed;
          d["bound"] = v.bound;
          d["detail"] = v.detail;
          out.append(d);
        }
        return out;
      },
      py::arg("samples") = 1000000, py::arg("seed") = 0, py::arg("pairs") = 100);

  // spectrum
  m.def(
      "reduced_spectrum", [](const Array& img) { return spectrum_dict(reduced_spectrum(to_tensor(img))); },
      py::arg("img"));
  m.def(
      "spectral_loss", [](const Array& a, const Array& b) { return spectral_loss(to_tensor(a), to_tensor(b)); },
      py::arg("a"), py::arg("b"));

  // image io
  m.def(
      "read_pnm", [](const py::bytes& b) { return to_array(read_pnm(std::string(b))); }, py::arg("data"));
  m.def(
      "write_pnm", [](const Array& img, int maxval) { return py::bytes(write_pnm(to_tensor(img), maxval)); },
      py::arg("img"), py::arg("maxval") = 255);
  m.def(
      "read_raw", [](const py::bytes& b) { return to_array(read_raw(std::string(b))); }, py::arg("data"));
  m.def(
      "write_raw", [](const Array& t) { return py::bytes(write_raw(to_tensor(t))); }, py::arg("tensor"));
  m.def(
      "load_image", [](const std::string& path) { return to_array(load_image(path)); }, py::arg("path"));

  // corpus
  m.def(
      "procedural_texture", [](int size, std::uint64_t seed, int channels) {
        return to_array(procedural_texture(size, seed, channels));
      },
      py::arg("size"), py::arg("seed") = 0, py::arg("channels") = 3);
  m.def(
      "gaussian_blur", [](const Array& img, double sigma) { return to_array(gaussian_blur(to_tensor(img), sigma)); },
      py::arg("img"), py::arg("sigma"));

  // synthesis and inversion
  m.def(
      "synthesize",
      [](int resolution, int width, std::uint64_t seed, std::uint64_t latent_seed, const std::string& gen) {
        SynthConfig cfg = SynthConfig::for_resolution(resolution, width);
        cfg.seed = seed;
        const GeneratorKind kind = parse_generator_kind(gen);
        const ParameterSet p = init_generator(cfg, kind);
        const LatentStack w = random_latents(cfg, latent_seed);
        return to_array(kind == GeneratorKind::wavelet ? synthesize(cfg, p, w).image : pixel_synthesize(cfg, p, w));
      },
      py::arg("resolution") = 32, py::arg("width") = 16, py::arg("seed") = 0, py::arg("latent_seed") = 0,
      py::arg("gen") = "wavelet", "Image from a seeded random generator and random latents.");
  m.def(
      "regress",
      [](const Array& target, const std::string& gen, const std::string& loss, int steps, std::uint64_t seed,
         double lr, int width) {
        RegressionJob job;
        job.target = to_tensor(target);
        job.generator = parse_generator_kind(gen);
        job.loss_terms = parse_loss_terms(loss);
        job.steps = steps;
        job.seed = seed;
        job.lr = lr;
        job.synth = SynthConfig::for_resolution(job.target.height(), width);
        job.synth.image_channels = job.target.channels();
        RegressionResult r;
        {
          py::gil_scoped_release release;
          r = latent_optimize(job);
        }
        py::dict d;
        d["image"] = to_array(r.final_image);
        d["columns"] = r.columns;
        d["trace"] = r.trace;
        d["final_l2"] = r.final_l2;
        d["final_spectral_distance"] = r.final_spectral_distance;
        d["high_bin_deficit"] = high_bin_deficit(r.target_spectrum, r.result_spectrum);
        d["target_spectrum"] = spectrum_dict(r.target_spectrum);
        d["result_spectrum"] = spectrum_dict(r.result_spectrum);
        return d;
      },
      py::arg("target"), py::arg("gen") = "wavelet", py::arg("loss") = "l2", py::arg("steps") = 2000,
      py::arg("seed") = 0, py::arg("lr") = 0.05, py::arg("width") = 32,
      "Fits generator latents to `target` with Adam.");
  m.def(
      "ada_demo",
      [](int count, int size, int epochs, double lambda_wave_ada, std::uint64_t seed, double blur) {
        const std::vector<AdaPair> pairs = synthetic_ada_pairs(count, size, seed, blur);
        DistortionSpec spec;
        spec.seed = seed;
        AdaTrainConfig cfg;
        cfg.epochs = epochs;
        cfg.seed = seed;
        LossWeights w;
        w.lambda_wave_ada = lambda_wave_ada;
        AdaMetrics mt;
        {
          py::gil_scoped_release release;
          mt = ada_train(pairs, spec, w, cfg).metrics;
        }
        py::dict d;
        d["heldout_l1"] = mt.heldout_l1;
        d["heldout_wave"] = mt.heldout_wave;
        d["baseline_l1"] = mt.baseline_l1;
        d["baseline_wave"] = mt.baseline_wave;
        d["epoch_loss"] = mt.epoch_loss;
        return d;
      },
      py::arg("count") = 20, py::arg("size") = 32, py::arg("epochs") = 30, py::arg("lambda_wave_ada") = 0.1,
      py::arg("seed") = 0, py::arg("blur") = 1.5, "Trains the ADA model on synthetic pairs; held-out metrics.");
}
