#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <span>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "wagi/config.hpp"
#include "wagi/errors.hpp"
#include "wagi/imageio.hpp"
#include "wagi/inversion.hpp"
#include "wagi/metrics.hpp"
#include "wagi/rng.hpp"
#include "wagi/spectrum.hpp"
#include "wagi/theory.hpp"
#include "wagi/version.hpp"

namespace wagi::cli {

namespace fs = std::filesystem;

namespace {

// "wagi <version> <command> key=value ..." for stdout and artifact headers.
class Header {
 public:
  explicit Header(std::string command) : text_("wagi " + std::string(kVersion) + " " + std::move(command)) {}

  template <class T>
  Header& add(const std::string& key, const T& value) {
    std::ostringstream os;
    os << std::setprecision(10) << value;
    text_ += " " + key + "=" + os.str();
    return *this;
  }

  const std::string& str() const { return text_; }

 private:
  std::string text_;
};

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string spectrum_csv(const ReducedSpectrum& s, const std::string& header) {
  std::ostringstream os;
  os << "# " << header << "\n# nyquist=" << num(s.nyquist) << "\nbin,radius,power,log_power\n";
  for (std::size_t k = 0; k < s.bins.size(); ++k) {
    os << k << "," << num(s.bin_radii[k]) << "," << num(s.bins[k]) << "," << num(std::log(s.bins[k] + kSpectralLogFloor))
       << "\n";
  }
  return os.str();
}

void save(const fs::path& path, const std::string& bytes, std::ostream& out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file(path.string(), bytes);
  out << "wrote " << path.string() << "\n";
}

struct ManifestEntry {
  int line = 0;
  fs::path a;
  fs::path b;
};

std::vector<ManifestEntry> parse_manifest(const std::string& path) {
  const std::string text = read_file(path);
  const fs::path base = fs::path(path).parent_path();
  std::vector<ManifestEntry> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() || line.find('\t', tab + 1) != std::string::npos) {
      throw ArgumentError("manifest line " + std::to_string(lineno) + ": expected 'pathA<TAB>pathB'");
    }
    const auto resolve = [&](std::string p) {
      fs::path q(std::move(p));
      return q.is_absolute() ? q : base / q;
    };
    out.push_back({lineno, resolve(line.substr(0, tab)), resolve(line.substr(tab + 1))});
  }
  if (out.empty()) throw ArgumentError("manifest lists no pairs");
  return out;
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  std::string pairs;
  int levels = 2;
  std::string mode = "orthonormal";
  std::string out;
};

int analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  const ScaleMode mode = parse_scale_mode(a.mode);
  Header h("analyze");
  h.add("pairs", a.pairs).add("levels", a.levels).add("mode", a.mode).add("seed", "none");
  out << h.str() << "\n";

  const std::vector<ManifestEntry> entries = parse_manifest(a.pairs);
  std::vector<ImagePair> pairs;
  int io_skipped = 0;
  for (const ManifestEntry& e : entries) {
    try {
      Tensor x = load_image(e.a.string());
      Tensor y = load_image(e.b.string());
      if (!(x.shape() == y.shape())) {
        throw ShapeError("shapes differ: " + x.shape().str() + " vs " + y.shape().str());
      }
      require_divisible(x.shape(), a.levels + 1, "analyze pair");
      pairs.emplace_back(std::move(x), std::move(y));
    } catch (const IoError& ex) {
      ++io_skipped;
      err << "skipping pair on line " << e.line << ": " << ex.what() << "\n";
    } catch (const FormatError& ex) {
      ++io_skipped;
      err << "skipping pair on line " << e.line << ": " << ex.what() << "\n";
    } catch (const std::invalid_argument& ex) {
      err << "skipping pair on line " << e.line << ": " << ex.what() << "\n";
    }
  }
  if (pairs.empty()) {
    err << "error: every pair was skipped\n";
    return io_skipped > 0 ? kIo : kCheckFailed;
  }
  const LossReport report = corpus_report(pairs, a.levels, mode);
  h.add("used_pairs", pairs.size());
  const bool json = a.out.size() >= 5 && a.out.substr(a.out.size() - 5) == ".json";
  const std::string body = json ? report_to_json(report, h.str()) : report_to_csv(report, h.str());
  if (a.out.empty()) {
    out << body;
  } else {
    save(a.out, body, out);
  }
  out << "pairs=" << report.pair_count << " l2=" << num(report.l2) << " wavelet_k=" << num(report.wavelet_k) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

int spectrum(const std::string& in, const std::string& dest, std::ostream& out) {
  Header h("spectrum");
  h.add("in", in).add("seed", "none");
  out << h.str() << "\n";
  const std::string csv = spectrum_csv(reduced_spectrum(load_image(in)), h.str());
  if (dest.empty()) {
    out << csv;
  } else {
    save(dest, csv, out);
  }
  return kOk;
}

// ---------------------------------------------------------------------------

int verify(const VerifyOptions& o, const std::string& dest, std::ostream& out) {
  Header h("verify");
  h.add("samples", o.samples).add("seed", o.seed).add("pairs", o.theorem_pairs);
  const std::vector<Verdict> verdicts = verify_suite(o);
  nlohmann::json j;
  j["header"] = h.str();
  j["seed"] = o.seed;
  j["samples"] = o.samples;
  nlohmann::json checks = nlohmann::json::array();
  for (const Verdict& v : verdicts) {
    checks.push_back({{"check", v.check},
                      {"status", std::string(to_string(v.status))},
                      {"observed", v.observed},
                      {"bound", v.bound},
                      {"detail", v.detail}});
  }
  j["checks"] = std::move(checks);
  const bool ok = verdicts_pass(verdicts);
  j["pass"] = ok;
  const std::string text = j.dump(2) + "\n";
  out << text;
  if (!dest.empty()) write_file(dest, text);
  return ok ? kOk : kCheckFailed;
}

// ---------------------------------------------------------------------------

struct RegressArgs {
  std::string config;
  std::string target;
  std::string gen = "wavelet";
  std::string loss = "l2";
  int steps = 2000;
  std::uint64_t seed = 0;
  double lr = 0.05;
  int width = 32;
  bool train_generator = false;
  std::string out_dir = ".";
};

// Fills options the command line left unset from a key-value job file.
void apply_config(RegressArgs& a, const CLI::App& cmd) {
  if (a.config.empty()) return;
  const KeyValueConfig c = KeyValueConfig::parse(read_file(a.config));
  const std::vector<std::string> known{"target", "gen", "loss", "steps", "seed", "lr", "width", "train_generator", "out_dir"};
  for (const std::string& k : c.keys()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ArgumentError("unknown config key '" + k + "'");
  }
  const auto unset = [&](const char* flag) { return cmd.get_option(flag)->count() == 0; };
  if (unset("--target")) a.target = c.get_string("target", a.target);
  if (unset("--gen")) a.gen = c.get_string("gen", a.gen);
  if (unset("--loss")) a.loss = c.get_string("loss", a.loss);
  if (unset("--steps")) a.steps = static_cast<int>(c.get_int("steps", a.steps));
  if (unset("--seed")) a.seed = static_cast<std::uint64_t>(c.get_int("seed", static_cast<long long>(a.seed)));
  if (unset("--lr")) a.lr = c.get_double("lr", a.lr);
  if (unset("--width")) a.width = static_cast<int>(c.get_int("width", a.width));
  if (unset("--train-generator")) a.train_generator = c.get_bool("train_generator", a.train_generator);
  if (unset("--out-dir")) a.out_dir = c.get_string("out_dir", a.out_dir);
}

int regress(const RegressArgs& a, std::ostream& out) {
  if (a.target.empty()) throw ArgumentError("regress needs --target (flag or config key)");
  if (a.steps < 0) throw ArgumentError("--steps must be >= 0");
  RegressionJob job;
  job.target = load_image(a.target);
  job.generator = parse_generator_kind(a.gen);
  job.loss_terms = parse_loss_terms(a.loss);
  job.steps = a.steps;
  job.seed = a.seed;
  job.lr = a.lr;
  job.train_generator = a.train_generator;
  if (job.target.height() != job.target.width() || !is_power_of_two(job.target.height()) || job.target.height() < 32 ||
      job.target.height() > 128) {
    throw DimensionError("target must be square with a power-of-two side in [32, 128], got " + job.target.shape().str());
  }
  job.synth = SynthConfig::for_resolution(job.target.height(), a.width);
  job.synth.image_channels = job.target.channels();

  Header h("regress");
  h.add("target", a.target).add("gen", a.gen).add("loss", a.loss).add("steps", a.steps).add("seed", a.seed).add("lr", a.lr)
      .add("width", a.width).add("train_generator", a.train_generator ? "true" : "false");
  out << h.str() << "\n";

  const RegressionResult r = latent_optimize(job);
  const fs::path dir(a.out_dir);
  save(dir / "trace.csv", trace_to_csv(r, h.str()), out);
  save(dir / "final.ppm", write_pnm(r.final_image), out);
  save(dir / "final.wgt", write_raw(r.final_image), out);
  save(dir / "spectrum_target.csv", spectrum_csv(r.target_spectrum, h.str()), out);
  save(dir / "spectrum_result.csv", spectrum_csv(r.result_spectrum, h.str()), out);
  nlohmann::json j;
  j["header"] = h.str();
  j["final_l2"] = r.final_l2;
  j["final_spectral_distance"] = r.final_spectral_distance;
  j["high_bin_deficit"] = high_bin_deficit(r.target_spectrum, r.result_spectrum);
  save(dir / "summary.json", j.dump(2) + "\n", out);
  out << "final_l2=" << num(r.final_l2) << " spectral_distance=" << num(r.final_spectral_distance) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct AdaArgs {
  int count = 20;
  int size = 32;
  int epochs = 30;
  int width = 16;
  int holdout = 4;
  double blur = 1.5;
  std::uint64_t seed = 0;
  std::string out = "ada.csv";
};

int ada_demo(const AdaArgs& a, std::ostream& out) {
  Header h("ada-demo");
  h.add("count", a.count).add("size", a.size).add("epochs", a.epochs).add("width", a.width).add("holdout", a.holdout)
      .add("blur", a.blur).add("seed", a.seed);
  out << h.str() << "\n";
  const std::vector<AdaPair> pairs = synthetic_ada_pairs(a.count, a.size, a.seed, a.blur);
  DistortionSpec spec;
  spec.seed = a.seed;
  std::ostringstream csv;
  csv << "# " << h.str() << "\nconfig,lambda_wave_ada,heldout_l1,heldout_wave,baseline_l1,baseline_wave\n";
  for (double lambda : {0.0, 0.1}) {
    AdaTrainConfig cfg;
    cfg.epochs = a.epochs;
    cfg.width = a.width;
    cfg.holdout = a.holdout;
    cfg.seed = a.seed;
    LossWeights w;
    w.lambda_wave_ada = lambda;
    const AdaMetrics m = ada_train(pairs, spec, w, cfg).metrics;
    csv << (lambda == 0 ? "l1_only" : "l1_plus_wavelet") << "," << lambda << "," << num(m.heldout_l1) << ","
        << num(m.heldout_wave) << "," << num(m.baseline_l1) << "," << num(m.baseline_wave) << "\n";
  }
  save(a.out, csv.str(), out);
  return kOk;
}

// ---------------------------------------------------------------------------

struct FuseArgs {
  int count = 12;
  int holdout = 4;
  int resolution = 32;
  int width = 16;
  int epochs = 10;
  std::uint64_t seed = 0;
  bool force_identity = false;
  std::string out = "ladder.csv";
};

int fuse_demo(const FuseArgs& a, std::ostream& out) {
  if (a.holdout < 1 || a.holdout >= a.count) throw ArgumentError("--holdout must lie in [1, count)");
  Header h("fuse-demo");
  h.add("count", a.count).add("holdout", a.holdout).add("resolution", a.resolution).add("width", a.width)
      .add("epochs", a.epochs).add("seed", a.seed).add("force_identity", a.force_identity ? "true" : "false");
  out << h.str() << "\n";

  SynthConfig cfg = SynthConfig::for_resolution(a.resolution, a.width);
  cfg.seed = a.seed;
  const ParameterSet gen = init_generator(cfg, GeneratorKind::wavelet);
  const std::vector<FuseSample> samples = synthetic_fuse_samples(cfg, gen, a.count, a.seed);
  const std::span<const FuseSample> train(samples.data(), samples.size() - static_cast<std::size_t>(a.holdout));
  const std::span<const FuseSample> held(samples.data() + train.size(), static_cast<std::size_t>(a.holdout));
  DistortionSpec spec;
  spec.seed = a.seed;

  double base_l2 = 0;
  double base_ssim = 0;
  for (const FuseSample& s : held) {
    const Tensor x0 = synthesize(cfg, gen, s.latents).image;
    base_l2 += pixel_loss(s.target, x0, 2) / a.holdout;
    base_ssim += ssim(s.target, x0) / a.holdout;
  }

  struct Rung {
    const char* name;
    double lambda;
    bool wavelet_fusion;
  };
  const Rung ladder[] = {{"no_wavelet_loss", 0.0, false}, {"wavelet_loss", 0.1, false}, {"wavelet_fusion", 0.1, true}};
  std::ostringstream csv;
  csv << "# " << h.str() << "\n# no_fusion l2=" << num(base_l2) << " ssim=" << num(base_ssim) << "\n";
  csv << "config,l1_delta,wave_delta,l2,ssim\n";
  for (const Rung& r : ladder) {
    LossWeights w;
    w.lambda_wave_ada = r.lambda;
    w.lambda_wave = r.lambda;
    FuseTrainConfig t;
    t.epochs = a.epochs;
    t.seed = a.seed;
    t.ada_width = a.width;
    t.fusion.wavelet = r.wavelet_fusion;
    t.fusion.force_identity = a.force_identity;
    const FuseTrainResult trained = fuse_train(cfg, gen, train, spec, w, t);
    const FusionModels models{cfg, gen, trained.ada, trained.extractor};
    double l1 = 0, wave = 0, l2 = 0, ss = 0;
    for (std::size_t i = 0; i < held.size(); ++i) {
      DistortionSpec eval = spec;
      eval.seed = mix64(a.seed ^ (0xe7a1u + i));
      const FusionReport rep = invert_with_fusion(held[i].target, held[i].latents, models, eval, w, t.fusion);
      l1 += rep.l_ada_l1 / a.holdout;
      wave += rep.l_ada_wave / a.holdout;
      l2 += rep.l2 / a.holdout;
      ss += rep.ssim / a.holdout;
    }
    csv << r.name << "," << num(l1) << "," << num(wave) << "," << num(l2) << "," << num(ss) << "\n";
  }
  save(a.out, csv.str(), out);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wavelet-domain analysis and GAN-inversion toolkit", "wagi"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  AnalyzeArgs an;
  CLI::App* c_an = app.add_subcommand("analyze", "Per-sub-band losses over a manifest of image pairs");
  c_an->add_option("--pairs", an.pairs, "Manifest of 'pathA<TAB>pathB' lines")->required();
  c_an->add_option("--levels", an.levels, "Decomposition levels K")->check(CLI::Range(0, 16));
  c_an->add_option("--mode", an.mode, "Filter bank scale")->check(CLI::IsMember({"raw", "orthonormal"}));
  c_an->add_option("--out", an.out, "Report path (.csv or .json); stdout when omitted");

  std::string sp_in, sp_out;
  CLI::App* c_sp = app.add_subcommand("spectrum", "Reduced (azimuthally averaged) power spectrum of an image");
  c_sp->add_option("--in", sp_in, "Image (PNM or raw tensor)")->required();
  c_sp->add_option("--out", sp_out, "CSV path; stdout when omitted");

  VerifyOptions vo;
  std::string vo_out;
  CLI::App* c_ve = app.add_subcommand("verify", "Check the sub-band identities and half-normal statistics");
  c_ve->add_option("--samples", vo.samples, "Monte Carlo windows per run")->check(CLI::NonNegativeNumber);
  c_ve->add_option("--seed", vo.seed, "RNG seed");
  c_ve->add_option("--pairs", vo.theorem_pairs, "Random pairs for the energy identity")->check(CLI::Range(1, 100000));
  c_ve->add_option("--out", vo_out, "Also write the JSON here");

  RegressArgs re;
  CLI::App* c_re = app.add_subcommand("regress", "Fit generator latents to a single target image");
  c_re->add_option("--config", re.config, "Key-value job file; flags override it");
  c_re->add_option("--target", re.target, "Target image (square, power-of-two side 32..128)");
  c_re->add_option("--gen", re.gen, "Generator")->check(CLI::IsMember({"wavelet", "pixel"}));
  c_re->add_option("--loss", re.loss, "Loss terms, e.g. l2,wavelet:2,spectral:0.1");
  c_re->add_option("--steps", re.steps, "Adam steps");
  c_re->add_option("--seed", re.seed, "Generator seed");
  c_re->add_option("--lr", re.lr, "Adam learning rate")->check(CLI::PositiveNumber);
  c_re->add_option("--width", re.width, "Widest generator layer")->check(CLI::Range(1, 512));
  c_re->add_flag("--train-generator", re.train_generator, "Also update generator weights");
  c_re->add_option("--out-dir", re.out_dir, "Directory for artifacts");

  AdaArgs ad;
  CLI::App* c_ad = app.add_subcommand("ada-demo", "Paired ADA runs without and with the wavelet loss");
  c_ad->add_option("--count", ad.count, "Synthetic images")->check(CLI::Range(2, 10000));
  c_ad->add_option("--size", ad.size, "Image side")->check(CLI::Range(8, 256));
  c_ad->add_option("--epochs", ad.epochs, "Training epochs")->check(CLI::NonNegativeNumber);
  c_ad->add_option("--width", ad.width, "ADA width")->check(CLI::Range(1, 256));
  c_ad->add_option("--holdout", ad.holdout, "Held-out pairs")->check(CLI::Range(1, 9999));
  c_ad->add_option("--blur", ad.blur, "Blur sigma of the low-rate reconstruction")->check(CLI::PositiveNumber);
  c_ad->add_option("--seed", ad.seed, "RNG seed");
  c_ad->add_option("--out", ad.out, "CSV path");

  FuseArgs fu;
  CLI::App* c_fu = app.add_subcommand("fuse-demo", "Ablation ladder of the fusion pipeline");
  c_fu->add_option("--count", fu.count, "Synthetic samples")->check(CLI::Range(2, 10000));
  c_fu->add_option("--holdout", fu.holdout, "Held-out samples");
  c_fu->add_option("--resolution", fu.resolution, "Output side (power of two, >= 32)");
  c_fu->add_option("--width", fu.width, "Widest generator layer")->check(CLI::Range(1, 512));
  c_fu->add_option("--epochs", fu.epochs, "Training epochs")->check(CLI::NonNegativeNumber);
  c_fu->add_option("--seed", fu.seed, "RNG seed");
  c_fu->add_flag("--force-identity", fu.force_identity, "Replace extracted fusion maps by g=1, h=0");
  c_fu->add_option("--out", fu.out, "CSV path");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << "run 'wagi --help' for usage\n";
    return kUsage;
  }

  try {
    if (c_an->parsed()) return analyze(an, out, err);
    if (c_sp->parsed()) return spectrum(sp_in, sp_out, out);
    if (c_ve->parsed()) return verify(vo, vo_out, out);
    if (c_re->parsed()) {
      apply_config(re, *c_re);
      return regress(re, out);
    }
    if (c_ad->parsed()) return ada_demo(ad, out);
    if (c_fu->parsed()) return fuse_demo(fu, out);
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const FormatError& e) {
    err << "input error: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace wagi::cli
