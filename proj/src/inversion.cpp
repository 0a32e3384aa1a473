#include "wagi/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "wagi/corpus.hpp"
#include "wagi/errors.hpp"
#include "wagi/rng.hpp"

namespace wagi {

namespace {

int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

std::vector<int> shuffled(int n, CounterRng rng) {
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(rng.uniform_int(0, i))]);
  return order;
}

// Distortion drawn for (stream, index); training and evaluation use different streams.
DistortionSpec distortion_for(const DistortionSpec& spec, std::uint64_t stream, std::uint64_t index) {
  DistortionSpec s = spec;
  s.seed = mix64(spec.seed ^ mix64(stream * 0x100000001b3ull + index));
  return s;
}

constexpr std::uint64_t kEvalStream = 0xe7a1;

double cosine_lr(double base, long long step, long long total, bool enabled) {
  if (!enabled || total <= 1) return base;
  return 0.5 * base * (1 + std::cos(std::numbers::pi * static_cast<double>(step) / static_cast<double>(total)));
}

std::vector<ad::Var> latent_vars(ad::Graph& g, const LatentStack& latents, bool trainable) {
  std::vector<ad::Var> out;
  for (const Tensor& t : latents.styles) out.push_back(trainable ? g.parameter(t, true) : g.constant(t));
  return out;
}

Tensor generate(const SynthConfig& cfg, GeneratorKind kind, const ParameterSet& params, const LatentStack& w) {
  return kind == GeneratorKind::wavelet ? synthesize(cfg, params, w).image : pixel_synthesize(cfg, params, w);
}

void check_image(const Tensor& img, const Shape& want, const char* what) {
  if (!(img.shape() == want)) throw ShapeError(std::string(what) + " has shape " + img.shape().str() + ", expected " + want.str());
}

}  // namespace

// ---------------------------------------------------------------------------
// latent regression

std::string LossTerm::name() const {
  switch (kind) {
    case Kind::l2:
      return "l2";
    case Kind::wavelet:
      return "wavelet_k" + std::to_string(K);
    case Kind::spectral:
      return "spectral";
  }
  return "?";
}

std::vector<LossTerm> parse_loss_terms(std::string_view spec) {
  std::vector<LossTerm> out;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t end = std::min(spec.find(',', start), spec.size());
    const std::string_view item = spec.substr(start, end - start);
    const std::size_t colon = item.find(':');
    const std::string_view head = item.substr(0, colon);
    const std::string arg = colon == std::string_view::npos ? std::string() : std::string(item.substr(colon + 1));
    LossTerm t;
    try {
      if (head == "l2" && arg.empty()) {
        t.kind = LossTerm::Kind::l2;
      } else if (head == "wavelet") {
        t.kind = LossTerm::Kind::wavelet;
        std::size_t used = 0;
        t.K = arg.empty() ? 2 : std::stoi(arg, &used);
        if (!arg.empty() && used != arg.size()) throw ArgumentError("bad K");
        if (t.K < 0) throw ArgumentError("negative K");
      } else if (head == "spectral") {
        t.kind = LossTerm::Kind::spectral;
        std::size_t used = 0;
        t.weight = arg.empty() ? 0.1 : std::stod(arg, &used);
        if (!arg.empty() && used != arg.size()) throw ArgumentError("bad weight");
        if (!(t.weight >= 0) || !std::isfinite(t.weight)) throw ArgumentError("bad weight");
      } else {
        throw ArgumentError("unknown term");
      }
    } catch (const std::logic_error&) {
      throw ArgumentError("bad loss term '" + std::string(item) + "' (expected l2, wavelet:K or spectral:W)");
    }
    out.push_back(t);
    start = end + 1;
  }
  return out;
}

void RegressionJob::validate() const {
  synth.validate();
  if (steps < 0) throw ArgumentError("steps must be >= 0");
  if (loss_terms.empty()) throw ArgumentError("regression needs at least one loss term");
  if (!(lr > 0)) throw ArgumentError("lr must be positive");
  const int r = synth.output_resolution();
  if (target.height() != target.width() || !is_power_of_two(target.height()) || target.height() > 128) {
    throw DimensionError("target must be square, a power of two and at most 128, got " + target.shape().str());
  }
  if (target.height() != r || target.channels() != synth.image_channels) {
    throw DimensionError("target " + target.shape().str() + " does not match generator output " +
                         Shape{synth.image_channels, r, r}.str());
  }
  if (!init_latents.styles.empty()) {
    if (static_cast<int>(init_latents.styles.size()) != synth.levels) throw ArgumentError("init_latents has wrong depth");
    for (const Tensor& s : init_latents.styles) {
      if (!(s.shape() == Shape{synth.style_dim, 1, 1})) throw ShapeError("init latent has shape " + s.shape().str());
    }
  }
}

RegressionResult latent_optimize(const RegressionJob& job) {
  job.validate();
  SynthConfig cfg = job.synth;
  cfg.seed = job.seed;
  ParameterSet params = init_generator(cfg, job.generator);

  RegressionResult res;
  res.latents = job.init_latents.styles.empty() ? zero_latents(cfg) : job.init_latents;
  res.initial_image = generate(cfg, job.generator, params, res.latents);
  res.target_spectrum = reduced_spectrum(job.target);
  res.columns.push_back("step");
  for (const LossTerm& t : job.loss_terms) res.columns.push_back(t.name());
  res.columns.push_back("total");

  AdamConfig lat_cfg;
  lat_cfg.lr = job.lr;
  AdamConfig gen_cfg;
  gen_cfg.lr = job.lr * job.generator_lr_scale;
  AdamState lat_state;
  AdamState gen_state;

  for (int step = 0; step < job.steps; ++step) {
    ad::Graph g;
    const BoundParameters bound(g, params, job.train_generator);
    const std::vector<ad::Var> w = latent_vars(g, res.latents, true);
    const ad::Var img = job.generator == GeneratorKind::wavelet ? synthesize_graph(cfg, bound, w).image
                                                                 : pixel_synthesize_graph(cfg, bound, w);
    const ad::Var target = g.constant(job.target);

    std::vector<double> row{static_cast<double>(step)};
    ad::Var total;
    for (const LossTerm& t : job.loss_terms) {
      ad::Var term;
      switch (t.kind) {
        case LossTerm::Kind::l2:
          term = ad::mse(img, target);
          break;
        case LossTerm::Kind::wavelet:
          term = ad::wavelet_loss_k(img, target, t.K);
          break;
        case LossTerm::Kind::spectral:
          term = ad::spectral_loss(img, res.target_spectrum);
          break;
      }
      row.push_back(term.value().item());
      const ad::Var weighted = t.weight == 1.0 ? term : ad::scalar_mul(term, t.weight);
      total = total.valid() ? ad::add(total, weighted) : weighted;
    }
    row.push_back(total.value().item());
    res.trace.push_back(std::move(row));

    g.backward(total);
    std::vector<Tensor> lat_grads;
    for (const ad::Var& v : w) lat_grads.push_back(*g.grad(v));
    adam_step(res.latents.styles, lat_grads, lat_state, lat_cfg);
    if (job.train_generator) adam_step(params.tensors(), bound.grads(), gen_state, gen_cfg);
  }

  res.final_image = generate(cfg, job.generator, params, res.latents);
  res.result_spectrum = reduced_spectrum(res.final_image);
  res.final_l2 = pixel_loss(res.final_image, job.target, 2);
  res.final_spectral_distance = spectral_distance(res.target_spectrum, res.result_spectrum);
  return res;
}

std::string trace_to_csv(const RegressionResult& r, const std::string& header) {
  std::ostringstream out;
  out.precision(17);
  if (!header.empty()) out << "# " << header << "\n";
  for (std::size_t i = 0; i < r.columns.size(); ++i) out << (i ? "," : "") << r.columns[i];
  out << "\n";
  for (const auto& row : r.trace) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ",";
      if (i == 0) {
        out << static_cast<long long>(row[i]);
      } else {
        out << row[i];
      }
    }
    out << "\n";
  }
  return out.str();
}

std::vector<double> best_so_far(std::span<const double> values) {
  std::vector<double> out(values.begin(), values.end());
  for (std::size_t i = 1; i < out.size(); ++i) out[i] = std::min(out[i], out[i - 1]);
  return out;
}

std::vector<int> envelope_violations(std::span<const double> values, int window, double rel, double tolerance) {
  const std::vector<double> best = best_so_far(values);
  std::vector<int> bad;
  for (std::size_t t = 0; t + static_cast<std::size_t>(window) < best.size(); ++t) {
    if (best[t] <= tolerance) break;
    if (best[t + static_cast<std::size_t>(window)] > (1.0 - rel) * best[t]) bad.push_back(static_cast<int>(t));
  }
  return bad;
}

// ---------------------------------------------------------------------------
// distortion

void DistortionSpec::validate() const {
  if (!(max_translate_frac >= 0) || !(max_rotate_deg >= 0)) throw ArgumentError("distortion ranges must be nonnegative");
  if (!(scale_min > 0) || !(scale_max >= scale_min)) throw ArgumentError("distortion scale range must satisfy 0 < min <= max");
  if (erase_patches < 0) throw ArgumentError("erase_patches must be nonnegative");
  if (!(max_erase_frac >= 0) || max_erase_frac > 1) throw ArgumentError("max_erase_frac must lie in [0, 1]");
}

DistortionSpec DistortionSpec::identity() {
  DistortionSpec s;
  s.max_translate_frac = 0;
  s.max_rotate_deg = 0;
  s.scale_min = 1;
  s.scale_max = 1;
  s.erase_patches = 0;
  return s;
}

Tensor warp_similarity(const Tensor& img, double dx, double dy, double angle_deg, double scale) {
  if (!(scale > 0)) throw ArgumentError("warp scale must be positive");
  if (dx == 0 && dy == 0 && angle_deg == 0 && scale == 1) return img;
  const int h = img.height();
  const int w = img.width();
  const double cy = 0.5 * (h - 1);
  const double cx = 0.5 * (w - 1);
  const double a = angle_deg * std::numbers::pi / 180.0;
  const double ca = std::cos(a);
  const double sa = std::sin(a);
  Tensor out(img.shape());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double px = x - cx - dx;
      const double py = y - cy - dy;
      // Inverse rotation, then inverse scale.
      const double sx = cx + (ca * px + sa * py) / scale;
      const double sy = cy + (-sa * px + ca * py) / scale;
      const double fx = std::floor(sx);
      const double fy = std::floor(sy);
      const double tx = sx - fx;
      const double ty = sy - fy;
      const int x0 = reflect(static_cast<int>(fx), w);
      const int x1 = reflect(static_cast<int>(fx) + 1, w);
      const int y0 = reflect(static_cast<int>(fy), h);
      const int y1 = reflect(static_cast<int>(fy) + 1, h);
      for (int c = 0; c < img.channels(); ++c) {
        const double top = (1 - tx) * img(c, y0, x0) + tx * img(c, y0, x1);
        const double bottom = (1 - tx) * img(c, y1, x0) + tx * img(c, y1, x1);
        out(c, y, x) = (1 - ty) * top + ty * bottom;
      }
    }
  }
  return out;
}

Tensor random_distort(const Tensor& delta, const DistortionSpec& spec) {
  spec.validate();
  CounterRng rng(spec.seed, 0xd157);
  const double tx = rng.uniform(-1, 1) * spec.max_translate_frac * delta.width();
  const double ty = rng.uniform(-1, 1) * spec.max_translate_frac * delta.height();
  const double angle = rng.uniform(-1, 1) * spec.max_rotate_deg;
  const double scale = rng.uniform(spec.scale_min, spec.scale_max);
  Tensor out = warp_similarity(delta, tx, ty, angle, scale);
  for (int p = 0; p < spec.erase_patches; ++p) {
    const int ph = std::max(1, static_cast<int>(rng.uniform(0, spec.max_erase_frac) * delta.height()));
    const int pw = std::max(1, static_cast<int>(rng.uniform(0, spec.max_erase_frac) * delta.width()));
    const int y0 = rng.uniform_int(0, std::max(0, delta.height() - ph));
    const int x0 = rng.uniform_int(0, std::max(0, delta.width() - pw));
    for (int c = 0; c < out.channels(); ++c) {
      for (int y = y0; y < std::min(delta.height(), y0 + ph); ++y) {
        for (int x = x0; x < std::min(delta.width(), x0 + pw); ++x) out(c, y, x) = 0.0;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// alignment module

AdaModel init_ada(int image_channels, int width, std::uint64_t seed) {
  if (image_channels < 1 || width < 1) throw ArgumentError("ADA channel counts must be positive");
  CounterRng rng(seed, 0xada);
  const auto weight = [&](int o, int i) {
    return normal_tensor(Shape{o, i, 9}, rng, 0.0, 1.0 / std::sqrt(9.0 * i));
  };
  AdaModel m;
  m.image_channels = image_channels;
  m.width = width;
  m.params.add("c1.weight", weight(width, 2 * image_channels));
  m.params.add("c1.bias", Tensor(width, 1, 1));
  m.params.add("c2.weight", weight(width, width));
  m.params.add("c2.bias", Tensor(width, 1, 1));
  m.params.add("c3.weight", weight(image_channels, width));
  m.params.add("c3.bias", Tensor(image_channels, 1, 1));
  return m;
}

ad::Var ada_forward(const BoundParameters& p, ad::Var x_hat0, ad::Var delta_tilde) {
  if (x_hat0.shape() != delta_tilde.shape()) {
    throw ShapeError("ADA inputs differ: " + x_hat0.shape().str() + " vs " + delta_tilde.shape().str());
  }
  const std::array<ad::Var, 2> in{x_hat0, delta_tilde};
  ad::Var h = ad::leaky_relu(ad::conv2d(ad::concat_channels(in), p["c1.weight"], p["c1.bias"]));
  h = ad::leaky_relu(ad::conv2d(h, p["c2.weight"], p["c2.bias"]));
  return ad::conv2d(h, p["c3.weight"], p["c3.bias"]);
}

Tensor ada_apply(const AdaModel& model, const Tensor& x_hat0, const Tensor& delta_tilde) {
  ad::Graph g;
  const BoundParameters p(g, model.params, false);
  return ada_forward(p, g.constant(x_hat0), g.constant(delta_tilde)).value();
}

AdaMetrics ada_evaluate(const AdaModel& model, std::span<const AdaPair> pairs, const DistortionSpec& spec,
                        const LossWeights& weights) {
  AdaMetrics m;
  if (pairs.empty()) return m;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const AdaPair& pr = pairs[i];
    const Tensor dt = random_distort(pr.delta, distortion_for(spec, kEvalStream, i));
    const Tensor dh = ada_apply(model, pr.x_hat0, dt);
    m.heldout_l1 += pixel_loss(pr.delta, dh, 1);
    m.heldout_wave += wavelet_loss_k(pr.delta, dh, weights.K);
    m.baseline_l1 += pixel_loss(pr.delta, dt, 1);
    m.baseline_wave += wavelet_loss_k(pr.delta, dt, weights.K);
  }
  const double n = static_cast<double>(pairs.size());
  m.heldout_l1 /= n;
  m.heldout_wave /= n;
  m.baseline_l1 /= n;
  m.baseline_wave /= n;
  return m;
}

AdaResult ada_train(std::span<const AdaPair> dataset, const DistortionSpec& spec, const LossWeights& weights,
                    const AdaTrainConfig& cfg) {
  if (dataset.empty()) throw ArgumentError("ADA training needs a nonempty dataset");
  if (cfg.holdout < 0 || cfg.holdout >= static_cast<int>(dataset.size())) {
    throw ArgumentError("holdout must leave at least one training pair");
  }
  if (cfg.epochs < 0) throw ArgumentError("epochs must be >= 0");
  spec.validate();
  weights.validate();
  const Shape shape = dataset[0].delta.shape();
  for (const AdaPair& p : dataset) {
    check_image(p.delta, shape, "ADA residual");
    check_image(p.x_hat0, shape, "ADA base image");
  }
  require_divisible(shape, weights.K + 1, "ADA residual");

  const std::size_t n_train = dataset.size() - static_cast<std::size_t>(cfg.holdout);
  const long long total_steps = static_cast<long long>(cfg.epochs) * static_cast<long long>(n_train);
  long long step = 0;
  const std::span<const AdaPair> train = dataset.first(n_train);
  const std::span<const AdaPair> held = cfg.holdout > 0 ? dataset.subspan(n_train) : train;

  AdaResult res;
  res.model = init_ada(shape.c, cfg.width, cfg.seed);
  AdamConfig acfg;
  acfg.lr = cfg.lr;
  AdamState state;
  const CounterRng order_rng(cfg.seed, 0x0de7);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0;
    for (int idx : shuffled(static_cast<int>(n_train), order_rng.split(static_cast<std::uint64_t>(epoch)))) {
      const AdaPair& pr = train[static_cast<std::size_t>(idx)];
      const Tensor dt =
          random_distort(pr.delta, distortion_for(spec, static_cast<std::uint64_t>(epoch) + 1, static_cast<std::uint64_t>(idx)));
      ad::Graph g;
      const BoundParameters p(g, res.model.params, true);
      const ad::Var delta = g.constant(pr.delta);
      const ad::Var dh = ada_forward(p, g.constant(pr.x_hat0), g.constant(dt));
      ad::Var loss = ad::l1(delta, dh);
      if (weights.lambda_wave_ada != 0) {
        loss = ad::add(loss, ad::scalar_mul(ad::wavelet_loss_k(delta, dh, weights.K), weights.lambda_wave_ada));
      }
      epoch_loss += loss.value().item();
      g.backward(loss);
      acfg.lr = cosine_lr(cfg.lr, step++, total_steps, cfg.cosine);
      adam_step(res.model.params.tensors(), p.grads(), state, acfg);
    }
    res.metrics.epoch_loss.push_back(epoch_loss / static_cast<double>(n_train));
  }
  const std::vector<double> trace = std::move(res.metrics.epoch_loss);
  res.metrics = ada_evaluate(res.model, held, spec, weights);
  res.metrics.epoch_loss = trace;
  return res;
}

std::vector<AdaPair> synthetic_ada_pairs(int count, int size, std::uint64_t seed, double blur_sigma) {
  std::vector<AdaPair> out;
  for (const Tensor& x : texture_corpus(count, size, seed)) {
    Tensor x0 = gaussian_blur(x, blur_sigma);
    Tensor delta = x - x0;
    out.push_back({std::move(x0), std::move(delta)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// fusion pipeline

namespace {

std::vector<FusionVars> select_fusion(ad::Graph& g, const SynthConfig& cfg, std::vector<FusionVars> extracted,
                                      const FusionOptions& opts) {
  std::vector<FusionVars> out;
  for (FusionVars& f : extracted) {
    const bool keep = f.target == FusionTarget::feature ? opts.feature : opts.wavelet;
    if (!keep) continue;
    if (opts.force_identity) {
      const Shape s = fusion_shape(cfg, f.target, f.level);
      f.g = g.constant(Tensor(s, 1.0));
      f.h = g.constant(Tensor(s));
    }
    out.push_back(f);
  }
  return out;
}

struct PipelineOut {
  ad::Var delta_hat;
  ad::Var x_hat;
};

PipelineOut run_pipeline(ad::Graph& g, const SynthConfig& cfg, const BoundParameters& gen, const BoundParameters& ada,
                         const BoundParameters& ext, const Tensor& x_hat0, const Tensor& delta_tilde,
                         const LatentStack& latents, const FusionOptions& opts) {
  PipelineOut out;
  out.delta_hat = ada_forward(ada, g.constant(x_hat0), g.constant(delta_tilde));
  std::vector<FusionVars> fusion;
  if (opts.feature || opts.wavelet) fusion = select_fusion(g, cfg, fusion_extract_graph(cfg, ext, out.delta_hat), opts);
  const std::vector<ad::Var> w = latent_vars(g, latents, false);
  out.x_hat = synthesize_graph(cfg, gen, w, fusion).image;
  return out;
}

}  // namespace

FusionReport invert_with_fusion(const Tensor& target, const LatentStack& base, const FusionModels& models,
                                const DistortionSpec& spec, const LossWeights& weights, const FusionOptions& opts) {
  weights.validate();
  const SynthConfig& cfg = models.cfg;
  const int r = cfg.output_resolution();
  check_image(target, Shape{cfg.image_channels, r, r}, "target");

  FusionReport rep;
  rep.x_hat0 = synthesize(cfg, models.generator, base).image;
  rep.delta = target - rep.x_hat0;
  rep.delta_tilde = random_distort(rep.delta, spec);

  ad::Graph g;
  const BoundParameters gen(g, models.generator, false);
  const BoundParameters ada(g, models.ada.params, false);
  const BoundParameters ext(g, models.extractor, false);
  const PipelineOut out = run_pipeline(g, cfg, gen, ada, ext, rep.x_hat0, rep.delta_tilde, base, opts);
  rep.delta_hat = out.delta_hat.value();
  rep.x_hat = out.x_hat.value();

  rep.l_ada_l1 = pixel_loss(rep.delta, rep.delta_hat, 1);
  rep.l_ada_wave = wavelet_loss_k(rep.delta, rep.delta_hat, weights.K);
  rep.l_ada = rep.l_ada_l1 + weights.lambda_wave_ada * rep.l_ada_wave;
  rep.l2 = pixel_loss(target, rep.x_hat, 2);
  rep.l_image = image_loss(target, rep.x_hat, weights);
  rep.l_wave = wavelet_loss_k(target, rep.x_hat, weights.K);
  rep.wave_term = weights.lambda_wave * rep.l_wave;
  rep.total = rep.l_ada + rep.l_image + rep.wave_term;
  rep.ssim = target.height() >= kSsimWindow && target.width() >= kSsimWindow ? ssim(target, rep.x_hat) : 0.0;
  return rep;
}

FuseTrainResult fuse_train(const SynthConfig& cfg, const ParameterSet& generator, std::span<const FuseSample> samples,
                           const DistortionSpec& spec, const LossWeights& weights, const FuseTrainConfig& tcfg) {
  if (samples.empty()) throw ArgumentError("fusion training needs at least one sample");
  if (tcfg.epochs < 0) throw ArgumentError("epochs must be >= 0");
  spec.validate();
  weights.validate();
  const int r = cfg.output_resolution();
  std::vector<Tensor> x0s;
  std::vector<Tensor> deltas;
  for (const FuseSample& s : samples) {
    check_image(s.target, Shape{cfg.image_channels, r, r}, "fusion target");
    x0s.push_back(synthesize(cfg, generator, s.latents).image);
    deltas.push_back(s.target - x0s.back());
  }

  FuseTrainResult res;
  res.ada = init_ada(cfg.image_channels, tcfg.ada_width, tcfg.seed);
  res.extractor = init_extractor(cfg, tcfg.extractor, mix64(tcfg.seed ^ 0xe47));
  // Adam is per-parameter, so two calls with one config are one optimizer.
  AdamConfig acfg;
  acfg.lr = tcfg.lr;
  AdamState ada_state;
  AdamState ext_state;
  const CounterRng order_rng(tcfg.seed, 0xf05e);
  const int n = static_cast<int>(samples.size());
  const long long total_steps = static_cast<long long>(tcfg.epochs) * n;
  long long step = 0;
  for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
    double epoch_loss = 0;
    for (int idx : shuffled(n, order_rng.split(static_cast<std::uint64_t>(epoch)))) {
      const auto i = static_cast<std::size_t>(idx);
      const Tensor dt =
          random_distort(deltas[i], distortion_for(spec, static_cast<std::uint64_t>(epoch) + 1, static_cast<std::uint64_t>(idx)));
      ad::Graph g;
      const BoundParameters gen(g, generator, false);
      const BoundParameters ada(g, res.ada.params, true);
      const BoundParameters ext(g, res.extractor, true);
      const PipelineOut out = run_pipeline(g, cfg, gen, ada, ext, x0s[i], dt, samples[i].latents, tcfg.fusion);
      const ad::Var delta = g.constant(deltas[i]);
      const ad::Var target = g.constant(samples[i].target);
      ad::Var loss = ad::l1(delta, out.delta_hat);
      if (weights.lambda_wave_ada != 0) {
        loss = ad::add(loss, ad::scalar_mul(ad::wavelet_loss_k(delta, out.delta_hat, weights.K), weights.lambda_wave_ada));
      }
      loss = ad::add(loss, ad::scalar_mul(ad::mse(target, out.x_hat), weights.lambda_l2));
      if (weights.lambda_wave != 0) {
        loss = ad::add(loss, ad::scalar_mul(ad::wavelet_loss_k(target, out.x_hat, weights.K), weights.lambda_wave));
      }
      epoch_loss += loss.value().item();
      g.backward(loss);
      acfg.lr = cosine_lr(tcfg.lr, step++, total_steps, tcfg.cosine);
      adam_step(res.ada.params.tensors(), ada.grads(), ada_state, acfg);
      adam_step(res.extractor.tensors(), ext.grads(), ext_state, acfg);
    }
    res.epoch_loss.push_back(epoch_loss / n);
  }
  return res;
}

std::vector<FuseSample> synthetic_fuse_samples(const SynthConfig& cfg, const ParameterSet& generator, int count,
                                               std::uint64_t seed, double detail_gain) {
  const int r = cfg.output_resolution();
  std::vector<FuseSample> out;
  const std::vector<Tensor> textures = texture_corpus(count, r, seed, cfg.image_channels);
  for (int i = 0; i < count; ++i) {
    FuseSample s;
    s.latents = random_latents(cfg, mix64(seed + 0x1000 + static_cast<std::uint64_t>(i)));
    const Tensor& tex = textures[static_cast<std::size_t>(i)];
    const Tensor detail = tex - gaussian_blur(tex, 1.0);
    s.target = synthesize(cfg, generator, s.latents).image + detail * detail_gain;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace wagi
