#include "wagi/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "binio.hpp"
#include "wagi/errors.hpp"
#include "wagi/rng.hpp"

namespace wagi {

namespace {

constexpr char kCheckpointMagic[4] = {'W', 'G', 'C', 'K'};
constexpr std::uint32_t kCheckpointVersion = 1;

std::string level_name(int level, const char* suffix) { return "l" + std::to_string(level) + "." + suffix; }

struct ParamSpec {
  std::string name;
  Shape shape;
  int fan_in = 0;  // 0: not a Gaussian weight
  double fill = 0.0;
};

std::vector<ParamSpec> generator_specs(const SynthConfig& cfg, GeneratorKind kind) {
  std::vector<ParamSpec> specs;
  const int b = cfg.base_resolution;
  const int img = cfg.image_channels;
  specs.push_back({"input", Shape{cfg.channels[0], b, b}, 0, 1.0});
  for (int l = 0; l < cfg.levels; ++l) {
    const int c = cfg.channels[static_cast<std::size_t>(l)];
    specs.push_back({level_name(l, "affine.weight"), Shape{1, c, cfg.style_dim}, cfg.style_dim, 0.0});
    specs.push_back({level_name(l, "affine.bias"), Shape{c, 1, 1}, 0, 1.0});
    specs.push_back({level_name(l, "conv.weight"), Shape{c, c, 9}, 9 * c, 0.0});
    specs.push_back({level_name(l, "conv.bias"), Shape{c, 1, 1}, 0, 0.0});
    if (kind == GeneratorKind::wavelet) {
      specs.push_back({level_name(l, "twav.weight"), Shape{4 * img, c, 1}, c, 0.0});
      specs.push_back({level_name(l, "twav.bias"), Shape{4 * img, 1, 1}, 0, 0.0});
    } else {
      specs.push_back({level_name(l, "torgb.weight"), Shape{img, c, 9}, 9 * c, 0.0});
      specs.push_back({level_name(l, "torgb.bias"), Shape{img, 1, 1}, 0, 0.0});
    }
    if (l + 1 < cfg.levels) {
      const int next = cfg.channels[static_cast<std::size_t>(l + 1)];
      specs.push_back({level_name(l, "up.weight"), Shape{next, c, 9}, 9 * c, 0.0});
      specs.push_back({level_name(l, "up.bias"), Shape{next, 1, 1}, 0, 0.0});
    }
  }
  return specs;
}

void check_params(const SynthConfig& cfg, GeneratorKind kind, const ParameterSet& params) {
  for (const ParamSpec& s : generator_specs(cfg, kind)) {
    if (!params.contains(s.name)) throw ShapeError("generator parameters lack '" + s.name + "'");
    const Shape& got = params[s.name].shape();
    if (!(got == s.shape)) {
      throw ShapeError("generator parameter '" + s.name + "' has shape " + got.str() + ", expected " + s.shape.str());
    }
  }
}

void check_latents(const SynthConfig& cfg, std::span<const ad::Var> latents) {
  if (static_cast<int>(latents.size()) != cfg.levels) {
    throw ArgumentError("expected " + std::to_string(cfg.levels) + " style vectors, got " +
                        std::to_string(latents.size()));
  }
  const Shape want{cfg.style_dim, 1, 1};
  for (const ad::Var& w : latents) {
    if (!(w.shape() == want)) throw ShapeError("style vector has shape " + w.shape().str() + ", expected " + want.str());
  }
}

void check_fusion(const SynthConfig& cfg, std::span<const FusionVars> fusion) {
  for (const FusionVars& f : fusion) {
    if (f.level < 0 || f.level >= cfg.levels) {
      throw ArgumentError("fusion level " + std::to_string(f.level) + " out of range [0, " + std::to_string(cfg.levels) +
                          ")");
    }
    const Shape want = fusion_shape(cfg, f.target, f.level);
    if (!(f.g.shape() == want) || !(f.h.shape() == want)) {
      throw ShapeError("fusion maps at level " + std::to_string(f.level) + " have shapes " + f.g.shape().str() + " / " +
                       f.h.shape().str() + ", expected " + want.str());
    }
  }
}

ad::Var apply_fusion(ad::Var x, std::span<const FusionVars> fusion, FusionTarget target, int level) {
  for (const FusionVars& f : fusion) {
    if (f.target == target && f.level == level) x = ad::add(ad::hadamard(f.g, x), f.h);
  }
  return x;
}

// Feature path shared by both generators; calls `emit` with F'_ℓ for each
// level and returns nothing. The image path lives in `emit`.
template <typename Emit>
void run_features(const SynthConfig& cfg, const BoundParameters& p, std::span<const ad::Var> latents,
                  std::span<const FusionVars> fusion, Emit&& emit) {
  ad::Var f = p["input"];
  for (int l = 0; l < cfg.levels; ++l) {
    const ad::Var style =
        ad::linear(p[level_name(l, "affine.weight")], latents[static_cast<std::size_t>(l)], p[level_name(l, "affine.bias")]);
    ad::Var fp = ad::leaky_relu(
        ad::modulated_conv2d(f, p[level_name(l, "conv.weight")], style, p[level_name(l, "conv.bias")], true));
    fp = apply_fusion(fp, fusion, FusionTarget::feature, l);
    emit(l, fp);
    if (l + 1 < cfg.levels) {
      f = ad::conv2d(ad::nearest_upsample(fp), p[level_name(l, "up.weight")], p[level_name(l, "up.bias")]);
    }
  }
}

std::vector<ad::Var> bind_latents(ad::Graph& g, const LatentStack& latents) {
  std::vector<ad::Var> out;
  out.reserve(latents.styles.size());
  for (const Tensor& t : latents.styles) out.push_back(g.constant(t));
  return out;
}

std::vector<FusionVars> bind_fusion(ad::Graph& g, std::span<const FusionParams> fusion) {
  std::vector<FusionVars> out;
  out.reserve(fusion.size());
  for (const FusionParams& f : fusion) out.push_back({g.constant(f.g), g.constant(f.h), f.target, f.level});
  return out;
}

BandQuad quad_from(const Tensor& t) {
  const int c = t.channels() / 4;
  return {t.slice_channels(0, c), t.slice_channels(c, c), t.slice_channels(2 * c, c), t.slice_channels(3 * c, c)};
}

}  // namespace

std::string_view to_string(GeneratorKind k) { return k == GeneratorKind::wavelet ? "wavelet" : "pixel"; }

GeneratorKind parse_generator_kind(std::string_view s) {
  if (s == "wavelet") return GeneratorKind::wavelet;
  if (s == "pixel") return GeneratorKind::pixel;
  throw ArgumentError("unknown generator '" + std::string(s) + "' (expected wavelet or pixel)");
}

void SynthConfig::validate() const {
  if (levels < 2) throw ArgumentError("levels must be >= 2, got " + std::to_string(levels));
  if (base_resolution < 1) throw ArgumentError("base_resolution must be positive");
  if (image_channels < 1 || style_dim < 1) throw ArgumentError("image_channels and style_dim must be positive");
  if (static_cast<int>(channels.size()) != levels) {
    throw ArgumentError("channels lists " + std::to_string(channels.size()) + " widths for " + std::to_string(levels) +
                        " levels");
  }
  for (int c : channels) {
    if (c < 1) throw ArgumentError("channel widths must be positive");
  }
  if (fusion_wavelet_level < 0 || fusion_wavelet_level >= levels) {
    throw ArgumentError("fusion_wavelet_level " + std::to_string(fusion_wavelet_level) + " out of range");
  }
  for (int l : fusion_feature_levels) {
    if (l < 0 || l >= levels) throw ArgumentError("fusion feature level " + std::to_string(l) + " out of range");
    if (l >= fusion_wavelet_level) {
      throw ArgumentError("fusion_wavelet_level must exceed every fusion feature level");
    }
  }
}

SynthConfig SynthConfig::for_resolution(int resolution, int width, int min_width) {
  SynthConfig cfg;
  int levels = 0;
  while ((cfg.base_resolution << levels) < resolution) ++levels;
  if ((cfg.base_resolution << levels) != resolution || levels < 3) {
    throw DimensionError("resolution " + std::to_string(resolution) + " is not 4 * 2^L with L >= 3");
  }
  cfg.levels = levels;
  cfg.channels.clear();
  int c = width;
  for (int l = 0; l < levels; ++l) {
    cfg.channels.push_back(std::max(c, min_width));
    if (l >= 1) c /= 2;
  }
  cfg.fusion_feature_levels = {levels - 3, levels - 2};
  cfg.fusion_wavelet_level = levels - 1;
  return cfg;
}

LatentStack zero_latents(const SynthConfig& cfg) {
  LatentStack s;
  for (int l = 0; l < cfg.levels; ++l) s.styles.emplace_back(cfg.style_dim, 1, 1);
  return s;
}

LatentStack random_latents(const SynthConfig& cfg, std::uint64_t seed, double stddev) {
  CounterRng rng(seed, 0x1a7e);
  LatentStack s;
  for (int l = 0; l < cfg.levels; ++l) s.styles.push_back(normal_tensor(Shape{cfg.style_dim, 1, 1}, rng, 0.0, stddev));
  return s;
}

ParameterSet init_generator(const SynthConfig& cfg, GeneratorKind kind) {
  cfg.validate();
  CounterRng rng(cfg.seed, kind == GeneratorKind::wavelet ? 0x9e11 : 0x9e12);
  ParameterSet set;
  for (const ParamSpec& s : generator_specs(cfg, kind)) {
    if (s.fan_in > 0) {
      set.add(s.name, normal_tensor(s.shape, rng, 0.0, 1.0 / std::sqrt(static_cast<double>(s.fan_in))));
    } else {
      set.add(s.name, Tensor(s.shape, s.fill));
    }
  }
  return set;
}

Shape fusion_shape(const SynthConfig& cfg, FusionTarget target, int level) {
  if (level < 0 || level >= cfg.levels) throw ArgumentError("fusion level " + std::to_string(level) + " out of range");
  const int r = cfg.feature_resolution(level);
  const int c = target == FusionTarget::feature ? cfg.channels[static_cast<std::size_t>(level)] : 4 * cfg.image_channels;
  return Shape{c, r, r};
}

std::vector<FusionParams> identity_fusion(const SynthConfig& cfg) {
  std::vector<FusionParams> out;
  for (int l : cfg.fusion_feature_levels) {
    const Shape s = fusion_shape(cfg, FusionTarget::feature, l);
    out.push_back({Tensor(s, 1.0), Tensor(s), FusionTarget::feature, l});
  }
  const Shape s = fusion_shape(cfg, FusionTarget::wavelet, cfg.fusion_wavelet_level);
  out.push_back({Tensor(s, 1.0), Tensor(s), FusionTarget::wavelet, cfg.fusion_wavelet_level});
  return out;
}

SynthGraph synthesize_graph(const SynthConfig& cfg, const BoundParameters& params, std::span<const ad::Var> latents,
                            std::span<const FusionVars> fusion) {
  cfg.validate();
  check_latents(cfg, latents);
  check_fusion(cfg, fusion);
  const ad::Var input = params["input"];
  ad::Graph& g = *input.graph();

  SynthGraph out;
  const int b = cfg.base_resolution;
  ad::Var image = g.constant(Tensor(cfg.image_channels, b, b));
  run_features(cfg, params, latents, fusion, [&](int l, ad::Var fp) {
    out.features.push_back(fp);
    ad::Var w = ad::conv2d(fp, params[level_name(l, "twav.weight")], params[level_name(l, "twav.bias")]);
    w = apply_fusion(w, fusion, FusionTarget::wavelet, l);
    out.coefficients.push_back(w);
    const auto bands = ad::split_bands(w);
    // 2·I is the orthonormal LL band of the nearest-upsampled image.
    const ad::Var ll = ad::add(ad::scalar_mul(image, 2.0), bands[0]);
    image = ad::haar_synthesis(ll, bands[1], bands[2], bands[3], ScaleMode::orthonormal);
  });
  out.image = image;
  return out;
}

SynthTrace synthesize(const SynthConfig& cfg, const ParameterSet& params, const LatentStack& latents,
                      std::span<const FusionParams> fusion) {
  cfg.validate();
  check_params(cfg, GeneratorKind::wavelet, params);
  ad::Graph g;
  const BoundParameters bound(g, params, false);
  const std::vector<ad::Var> w = bind_latents(g, latents);
  const std::vector<FusionVars> fv = bind_fusion(g, fusion);
  const SynthGraph sg = synthesize_graph(cfg, bound, w, fv);

  SynthTrace trace;
  for (const ad::Var& f : sg.features) trace.features.push_back(f.value());
  for (const ad::Var& c : sg.coefficients) trace.coefficients.push_back(quad_from(c.value()));
  trace.image = sg.image.value();
  return trace;
}

ad::Var pixel_synthesize_graph(const SynthConfig& cfg, const BoundParameters& params, std::span<const ad::Var> latents) {
  cfg.validate();
  check_latents(cfg, latents);
  ad::Graph& g = *params["input"].graph();
  const int b = cfg.base_resolution;
  ad::Var image = g.constant(Tensor(cfg.image_channels, b, b));
  run_features(cfg, params, latents, {}, [&](int l, ad::Var fp) {
    const ad::Var rgb = ad::conv2d(fp, params[level_name(l, "torgb.weight")], params[level_name(l, "torgb.bias")]);
    image = ad::upsample_smooth(ad::add(image, rgb));
  });
  return image;
}

Tensor pixel_synthesize(const SynthConfig& cfg, const ParameterSet& params, const LatentStack& latents) {
  cfg.validate();
  check_params(cfg, GeneratorKind::pixel, params);
  ad::Graph g;
  const BoundParameters bound(g, params, false);
  const std::vector<ad::Var> w = bind_latents(g, latents);
  return pixel_synthesize_graph(cfg, bound, w).value();
}

BandQuad t_wavelets(const Tensor& feature, const Tensor& weight, const Tensor& bias) {
  if (weight.width() != 1 || weight.channels() % 4 != 0) {
    throw ShapeError("tWavelets weight must be (4k) x C x 1, got " + weight.shape().str());
  }
  if (weight.height() != feature.channels()) {
    throw ShapeError("tWavelets weight expects " + std::to_string(weight.height()) + " feature channels, got " +
                     std::to_string(feature.channels()));
  }
  if (!(bias.shape() == Shape{weight.channels(), 1, 1})) {
    throw ShapeError("tWavelets bias has shape " + bias.shape().str());
  }
  ad::Graph g;
  const ad::Var out = ad::conv2d(g.constant(feature), g.constant(weight), g.constant(bias));
  return quad_from(out.value());
}

ParameterSet init_extractor(const SynthConfig& cfg, const ExtractorConfig& ecfg, std::uint64_t seed, bool zero) {
  cfg.validate();
  if (ecfg.width < 1) throw ArgumentError("extractor width must be positive");
  CounterRng rng(seed, 0xe7c);
  const auto weight = [&](Shape s, int fan_in) {
    return zero ? Tensor(s) : normal_tensor(s, rng, 0.0, 1.0 / std::sqrt(static_cast<double>(fan_in)));
  };
  const int e = ecfg.width;
  ParameterSet set;
  set.add("trunk.weight", weight(Shape{e, cfg.image_channels, 9}, 9 * cfg.image_channels));
  set.add("trunk.bias", Tensor(e, 1, 1));
  for (int l : cfg.fusion_feature_levels) {
    const int c = cfg.channels[static_cast<std::size_t>(l)];
    set.add("feat" + std::to_string(l) + ".weight", weight(Shape{2 * c, e, 9}, 9 * e));
    set.add("feat" + std::to_string(l) + ".bias", Tensor(2 * c, 1, 1));
  }
  const int cw = 4 * cfg.image_channels;
  set.add("wave.weight", weight(Shape{2 * cw, e, 9}, 9 * e));
  set.add("wave.bias", Tensor(2 * cw, 1, 1));
  return set;
}

std::vector<FusionVars> fusion_extract_graph(const SynthConfig& cfg, const BoundParameters& extractor, ad::Var delta_hat) {
  cfg.validate();
  const int r = cfg.output_resolution();
  const Shape want{cfg.image_channels, r, r};
  if (!(delta_hat.shape() == want)) {
    throw DimensionError("residual has shape " + delta_hat.shape().str() + "; fusion sites are reachable by factor-2 "
                         "pooling only from " + want.str());
  }
  const ad::Var trunk = ad::leaky_relu(ad::conv2d(delta_hat, extractor["trunk.weight"], extractor["trunk.bias"]));

  // pooled[k] has resolution r / 2^k.
  std::vector<ad::Var> pooled{trunk};
  const auto at_level = [&](int level) {
    const int steps = cfg.levels - level;
    while (static_cast<int>(pooled.size()) <= steps) pooled.push_back(ad::avg_pool2(pooled.back()));
    return pooled[static_cast<std::size_t>(steps)];
  };
  const auto head = [&](const std::string& prefix, int level, FusionTarget target) {
    const ad::Var out = ad::conv2d(at_level(level), extractor[prefix + ".weight"], extractor[prefix + ".bias"]);
    const int c = out.shape().c / 2;
    return FusionVars{ad::sigmoid(ad::slice_channels(out, 0, c)), ad::slice_channels(out, c, c), target, level};
  };

  std::vector<FusionVars> out;
  for (int l : cfg.fusion_feature_levels) out.push_back(head("feat" + std::to_string(l), l, FusionTarget::feature));
  out.push_back(head("wave", cfg.fusion_wavelet_level, FusionTarget::wavelet));
  return out;
}

std::vector<FusionParams> fusion_extract(const SynthConfig& cfg, const ParameterSet& extractor, const Tensor& delta_hat) {
  ad::Graph g;
  const BoundParameters bound(g, extractor, false);
  const std::vector<FusionVars> vars = fusion_extract_graph(cfg, bound, g.constant(delta_hat));
  std::vector<FusionParams> out;
  for (const FusionVars& v : vars) out.push_back({v.g.value(), v.h.value(), v.target, v.level});
  return out;
}

std::string save_checkpoint(const SynthConfig& cfg, GeneratorKind kind, const ParameterSet& params) {
  cfg.validate();
  check_params(cfg, kind, params);
  using detail::put_f64;
  using detail::put_u32;
  using detail::put_u64;
  std::string out(kCheckpointMagic, 4);
  put_u32(out, kCheckpointVersion);
  put_u32(out, kind == GeneratorKind::wavelet ? 0u : 1u);
  put_u32(out, static_cast<std::uint32_t>(cfg.base_resolution));
  put_u32(out, static_cast<std::uint32_t>(cfg.levels));
  put_u32(out, static_cast<std::uint32_t>(cfg.image_channels));
  put_u32(out, static_cast<std::uint32_t>(cfg.style_dim));
  put_u64(out, cfg.seed);
  for (int c : cfg.channels) put_u32(out, static_cast<std::uint32_t>(c));
  put_u32(out, static_cast<std::uint32_t>(cfg.fusion_feature_levels.size()));
  for (int l : cfg.fusion_feature_levels) put_u32(out, static_cast<std::uint32_t>(l));
  put_u32(out, static_cast<std::uint32_t>(cfg.fusion_wavelet_level));

  put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const std::string& name = params.names()[k];
    const Tensor& t = params.tensors()[k];
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_u32(out, static_cast<std::uint32_t>(t.channels()));
    put_u32(out, static_cast<std::uint32_t>(t.height()));
    put_u32(out, static_cast<std::uint32_t>(t.width()));
  }
  for (const Tensor& t : params.tensors()) {
    for (double v : t.values()) put_f64(out, v);
  }
  return out;
}

Checkpoint load_checkpoint(std::string_view bytes) {
  detail::ByteReader in(bytes);
  if (in.remaining() < 4 || bytes.substr(0, 4) != std::string_view(kCheckpointMagic, 4)) {
    throw BadMagicError("not a checkpoint (magic 'WGCK' missing)");
  }
  in.take(4, "magic");
  const std::uint32_t version = in.u32("version");
  if (version != kCheckpointVersion) {
    throw UnsupportedFormatError("checkpoint version " + std::to_string(version) + " is not supported");
  }
  constexpr std::uint32_t kMaxSmall = 1u << 16;
  const auto small = [&](const char* what) {
    const std::uint32_t v = in.u32(what);
    if (v > kMaxSmall) throw DimensionOverflowError(std::string("checkpoint ") + what + " out of range");
    return static_cast<int>(v);
  };

  Checkpoint ck;
  const std::uint32_t kind = in.u32("generator kind");
  if (kind > 1) throw MalformedHeaderError("unknown generator kind in checkpoint");
  ck.kind = kind == 0 ? GeneratorKind::wavelet : GeneratorKind::pixel;
  SynthConfig& cfg = ck.cfg;
  cfg.base_resolution = small("base resolution");
  cfg.levels = small("level count");
  if (cfg.levels > 16) throw DimensionOverflowError("checkpoint level count out of range");
  cfg.image_channels = small("image channels");
  cfg.style_dim = small("style dim");
  cfg.seed = in.u64("seed");
  cfg.channels.clear();
  for (int l = 0; l < cfg.levels; ++l) cfg.channels.push_back(small("channel width"));
  const int nf = small("fusion site count");
  if (nf > cfg.levels) throw MalformedHeaderError("checkpoint lists more fusion sites than levels");
  cfg.fusion_feature_levels.clear();
  for (int k = 0; k < nf; ++k) cfg.fusion_feature_levels.push_back(small("fusion level"));
  cfg.fusion_wavelet_level = small("wavelet fusion level");
  try {
    cfg.validate();
  } catch (const ArgumentError& e) {
    throw MalformedHeaderError(std::string("checkpoint config invalid: ") + e.what());
  }

  const int count = small("tensor count");
  std::vector<std::pair<std::string, Shape>> table;
  for (int k = 0; k < count; ++k) {
    const std::uint32_t len = in.u32("name length");
    if (len > 256) throw MalformedHeaderError("checkpoint tensor name too long");
    std::string name(in.take(len, "tensor name"));
    const int c = small("tensor dim");
    const int h = small("tensor dim");
    const int w = small("tensor dim");
    const Shape s{c, h, w};
    if (s.size() > in.remaining() / 8) throw TruncatedPayloadError("checkpoint payload shorter than its shape table");
    table.emplace_back(std::move(name), s);
  }
  for (auto& [name, shape] : table) {
    Tensor t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = in.f64("tensor payload");
    try {
      ck.params.add(name, std::move(t));
    } catch (const ArgumentError& e) {
      throw MalformedHeaderError(e.what());
    }
  }
  if (in.remaining() != 0) throw MalformedHeaderError("trailing bytes after checkpoint payload");
  try {
    check_params(cfg, ck.kind, ck.params);
  } catch (const ShapeError& e) {
    throw MalformedHeaderError(std::string("checkpoint tensors do not match its config: ") + e.what());
  }
  return ck;
}

}  // namespace wagi
