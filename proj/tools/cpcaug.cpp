// tools/cpcaug.cpp

// Copyright 2026  The cpcaug Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// cpcaug: augmentation, noise preparation, toy CPC training, feature
// extraction, ABX scoring, band sweeps and gradient checks.
//
// Exit codes: 0 success, 1 usage error, 2 data error.
// Settings precedence: flags > --config file > defaults. Every run writes a
// manifest whose "config" object can be fed back through --config.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cpcaug/abx/score.hpp"
#include "cpcaug/audio/resample.hpp"
#include "cpcaug/audio/wav.hpp"
#include "cpcaug/cpc/checkpoint.hpp"
#include "cpcaug/cpc/grad_check.hpp"
#include "cpcaug/cpc/synthetic.hpp"
#include "cpcaug/cpc/trainer.hpp"
#include "cpcaug/noise/bank.hpp"

#ifndef CPCAUG_VERSION
#define CPCAUG_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace cpcaug {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// Flags that double as config-file keys. A key from the file applies only
// when the matching flag was not given on the command line.
class Settings {
 public:
  explicit Settings(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* add(const std::string& name, T& var, const std::string& help) {
    CLI::Option* opt = app_->add_option("--" + name, var, help)->capture_default_str();
    entries_.push_back({name, opt, [&var](const json& j) { var = j.get<T>(); },
                        [&var] { return json(var); }});
    return opt;
  }

  /// Like add(), but the value must come from the command line or the config.
  template <class T>
  CLI::Option* add_required(const std::string& name, T& var, const std::string& help) {
    CLI::Option* opt = add(name, var, help + " (required)");
    entries_.back().required = true;
    return opt;
  }

  CLI::Option* flag(const std::string& name, bool& var, const std::string& help) {
    CLI::Option* opt = app_->add_flag("--" + name, var, help);
    entries_.push_back({name, opt, [&var](const json& j) { var = j.get<bool>(); },
                        [&var] { return json(var); }});
    return opt;
  }

  /// Keys outside this set, besides the listed extras, are rejected.
  void overlay(const json& doc, const std::vector<std::string>& extras = {}) {
    require(doc.is_object(), "config: expected a JSON object");
    for (const auto& [key, value] : doc.items()) {
      if (std::find(extras.begin(), extras.end(), key) != extras.end()) continue;
      auto it = std::find_if(entries_.begin(), entries_.end(),
                             [&](const Entry& e) { return e.name == key; });
      require(it != entries_.end(), "config: unknown key '" + key + "' for this subcommand");
      if (it->option->count() > 0) continue;
      try {
        it->set(value);
        it->from_file = true;
      } catch (const json::exception& e) {
        fail(ErrorKind::kInvalidArgument, "config: key '" + key + "': " + e.what());
      }
    }
  }

  void check_required() const {
    for (const auto& e : entries_) {
      if (e.required && e.option->count() == 0 && !e.from_file) {
        fail(ErrorKind::kInvalidArgument, "--" + e.name + " is required");
      }
    }
  }

  json snapshot() const {
    json j = json::object();
    for (const auto& e : entries_) j[e.name] = e.get();
    return j;
  }

 private:
  struct Entry {
    std::string name;
    CLI::Option* option;
    std::function<void(const json&)> set;
    std::function<json()> get;
    bool required = false;
    bool from_file = false;
  };
  CLI::App* app_;
  std::vector<Entry> entries_;
};

// Options present on every subcommand.
struct Common {
  int threads = default_threads();
  std::string config;
  std::string manifest;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--threads", c.threads,
                  std::string("worker threads (default: $") + kThreadsEnvVar +
                      " or the core count); outputs do not depend on it")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--config", c.config,
                  "JSON settings file, or a manifest of an earlier run of this subcommand");
  app->add_option("--manifest", c.manifest, "where to write the run manifest");
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kNotFound, path.string() + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::kFormat, path.string() + ": " + e.what());
  }
}

/// Settings from --config; a manifest contributes its "config" object.
std::optional<json> load_config(const Common& c, const std::string& subcommand) {
  if (c.config.empty()) return std::nullopt;
  json doc = read_json_file(c.config);
  if (doc.is_object() && doc.contains("subcommand") && doc.contains("config")) {
    require(doc.at("subcommand") == subcommand,
            c.config + ": manifest belongs to '" + doc.at("subcommand").get<std::string>() +
                "', not '" + subcommand + "'");
    return doc.at("config");
  }
  return doc;
}

// Model architecture flags shared by train, features, sweep-bands.
struct ModelFlags {
  bool tiny = false;
  int context_layers = 0;
  std::string predictor_mode;
  double window = 0.0;
  int batch = 0;
  double lr = 0.0;
  int steps_per_epoch = 0;

  void add(Settings& s) {
    s.flag("tiny", tiny, "small profile: dims 32, K 4, N 16");
    s.add("context-layers", context_layers, "recurrent context layers, 1..3 (0: profile value)");
    s.add("predictor-mode", predictor_mode, "multi_head or per_step (empty: profile value)");
    s.add("window", window, "training window in seconds (0: profile value)");
    s.add("batch", batch, "windows per batch (0: profile value)");
    s.add("lr", lr, "peak learning rate (0: profile value)");
    s.add("steps-per-epoch", steps_per_epoch, "steps per ramp epoch (0: profile value)");
  }

  /// Profile, then the config file's "model" object, then explicit flags.
  CpcConfig resolve(const std::optional<json>& file) const {
    CpcConfig c = tiny ? CpcConfig::tiny() : CpcConfig{};
    if (file && file->contains("model")) merge_json(c, file->at("model"));
    if (context_layers > 0) c.context_layers = context_layers;
    if (!predictor_mode.empty()) c.predictor_mode = parse_predictor_mode(predictor_mode);
    if (window > 0) c.window_seconds = window;
    if (batch > 0) c.batch_size = batch;
    if (lr > 0) c.learning_rate = lr;
    if (steps_per_epoch > 0) c.steps_per_epoch = steps_per_epoch;
    c.validate();
    return c;
  }
};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

struct RunManifest {
  std::string subcommand;
  json config = json::object();
  std::uint64_t seed = 0;
  json inputs = json::object();
  json outputs = json::object();
  json results = json::object();
  int threads = 1;
  std::string started = utc_now();
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  json to_json() const {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {{"subcommand", subcommand}, {"tool_version", CPCAUG_VERSION},
            {"seed", seed},             {"config", config},
            {"inputs", inputs},         {"outputs", outputs},
            {"results", results},       {"threads", threads},
            {"started_utc", started},   {"wall_clock_seconds", wall}};
  }
};

/// Explicit --manifest, else next to the main output, else the working dir.
fs::path manifest_path(const Common& c, const std::string& subcommand, const std::string& out) {
  if (!c.manifest.empty()) return c.manifest;
  if (!out.empty()) {
    if (fs::is_directory(out)) return fs::path(out) / "manifest.json";
    return fs::path(out + ".manifest.json");
  }
  std::string name = subcommand;
  std::replace(name.begin(), name.end(), '-', '_');
  return fs::path("cpcaug_" + name + ".manifest.json");
}

void write_manifest(const fs::path& path, const RunManifest& m) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, path.string() + ": cannot write manifest");
  out << m.to_json().dump(2) << "\n";
}

/// WAV files given directly or found recursively under directories, each
/// group in sorted order.
std::vector<fs::path> collect_wavs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::recursive_directory_iterator(in)) {
        if (e.is_regular_file() && e.path().extension() == ".wav") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      if (!fs::exists(in)) fail(ErrorKind::kNotFound, in + ": no such file or directory");
      out.emplace_back(in);
    }
  }
  if (out.empty()) fail(ErrorKind::kEmpty, "no WAV input found");
  return out;
}

std::vector<AudioBuffer> read_all(const std::vector<fs::path>& paths, int rate, int threads) {
  std::vector<AudioBuffer> out(paths.size());
  parallel_for(paths.size(), threads, [&](std::size_t i) {
    out[i] = resample(read_wav(paths[i]), rate);
  });
  return out;
}

double mean_of(const std::vector<double>& v, std::size_t from, std::size_t count) {
  double s = 0.0;
  for (std::size_t i = from; i < from + count; ++i) s += v[i];
  return s / static_cast<double>(count);
}

std::vector<std::string> path_strings(const std::vector<fs::path>& p) {
  std::vector<std::string> out;
  for (const auto& x : p) out.push_back(x.string());
  return out;
}

// --- augment ----------------------------------------------------------------

struct AugmentArgs {
  Common common;
  std::vector<std::string> in;
  std::string out;
  std::string chain;
  std::uint64_t seed = 0;
  std::string format = "int16";
  std::string placement;
};

int run_augment(const AugmentArgs& a, const json& config) {
  RunManifest m{"augment", config, a.seed};
  m.threads = a.common.threads;
  const auto spec = load_chain_spec(a.chain, a.common.threads);
  const auto format = parse_wav_format(a.format);
  const auto paths = collect_wavs(a.in);
  std::vector<AudioBuffer> inputs(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    inputs[i] = read_wav(paths[i]);
    require(inputs[i].sample_rate() == spec.sample_rate,
            paths[i].string() + ": sample rate " + std::to_string(inputs[i].sample_rate()) +
                " differs from the chain rate " + std::to_string(spec.sample_rate),
            ErrorKind::kUnsupported);
  }
  const RngStream rng(a.seed, {kViewStream, 0});
  m.inputs = {{"wav", path_strings(paths)}, {"chain", a.chain}};
  json chains = json::array();
  std::vector<std::string> written;

  const bool single_file = paths.size() == 1 && a.placement.empty() && !fs::is_directory(a.out) &&
                           fs::path(a.out).extension() == ".wav";
  if (!single_file) fs::create_directories(a.out);

  if (a.placement.empty()) {
    // Chain i comes from rng.child(i): the per_sequence draw for item i.
    std::vector<ConcreteChain> drawn(paths.size());
    std::vector<AudioBuffer> outs(paths.size());
    parallel_for(paths.size(), a.common.threads, [&](std::size_t i) {
      drawn[i] = sample_chain(spec, inputs[i].size(), rng.child(i));
      outs[i] = apply_chain(inputs[i], drawn[i]);
    });
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const fs::path dst = single_file ? fs::path(a.out) : fs::path(a.out) / paths[i].filename();
      write_wav(dst, outs[i], format);
      written.push_back(dst.string());
      chains.push_back(to_json(drawn[i]));
    }
  } else {
    const auto views = make_views(inputs, parse_placement(a.placement), spec, rng,
                                  a.common.threads);
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const std::string stem = paths[i].stem().string();
      const fs::path past = fs::path(a.out) / (stem + ".past.wav");
      const fs::path future = fs::path(a.out) / (stem + ".future.wav");
      write_wav(past, views[i].past, format);
      write_wav(future, views[i].future, format);
      written.push_back(past.string());
      written.push_back(future.string());
      chains.push_back({{"past", views[i].past_chain ? to_json(*views[i].past_chain) : json()},
                        {"future",
                         views[i].future_chain ? to_json(*views[i].future_chain) : json()}});
    }
  }
  m.outputs = {{"wav", written}};
  m.results = {{"chains", chains}};
  write_manifest(manifest_path(a.common, "augment", a.out), m);
  std::cerr << "augment: wrote " << written.size() << " file(s)\n";
  return kExitOk;
}

// --- noise-prep ---------------------------------------------------------------

struct NoisePrepArgs {
  Common common;
  std::string in;
  std::string out;
  std::string band = "80,240";
  int rate = 16000;
};

std::optional<BandSpec> band_from_text(const std::string& text) {
  if (text == "none" || text.empty()) return std::nullopt;
  return parse_band(text);
}

int run_noise_prep(const NoisePrepArgs& a, const json& config) {
  RunManifest m{"noise-prep", config, 0};
  m.threads = a.common.threads;
  const auto band = band_from_text(a.band);
  const auto bank = NoiseBank::build(a.in, band, a.rate, a.common.threads);
  fs::create_directories(a.out);
  bank.save(a.out);
  m.inputs = {{"noise_dir", a.in}};
  m.outputs = {{"bank", a.out}};
  m.results = {{"segments", bank.size()}};
  write_manifest(manifest_path(a.common, "noise-prep", a.out), m);
  std::cerr << "noise-prep: " << bank.size() << " segment(s) in " << a.out << "\n";
  return kExitOk;
}

// --- train --------------------------------------------------------------------

struct TrainArgs {
  Common common;
  ModelFlags model;
  std::vector<std::string> train_dir;
  bool synthetic = false;
  std::uint64_t data_seed = 0;
  std::string out;
  int steps = 2000;
  std::uint64_t seed = 0;
  std::string placement = "past_only";
  std::string chain;
  std::string noise_bank;
  bool no_augment = false;
  std::string loss_csv;
  int log_every = 100;
};

struct TrainOutcome {
  CpcModel<float> model;
  std::vector<double> losses;
  std::vector<double> accuracies;  // mean over k
};

TrainOutcome train_loop(const CpcConfig& cfg, std::uint64_t seed,
                        std::shared_ptr<const std::vector<AudioBuffer>> corpus,
                        const EffectChainSpec& spec, AugPlacement placement, int steps,
                        int threads, int log_every, const std::string& tag) {
  Trainer t(cfg, seed, std::move(corpus), spec, placement, threads);
  TrainOutcome out{CpcModel<float>(cfg), {}, {}};
  for (int s = 0; s < steps; ++s) {
    const LossReport r = t.step();
    double acc = 0.0;
    for (double v : r.per_step_accuracy) acc += v;
    acc /= static_cast<double>(r.per_step_accuracy.size());
    out.losses.push_back(r.loss);
    out.accuracies.push_back(acc);
    if (log_every > 0 && ((s + 1) % log_every == 0 || s + 1 == steps)) {
      std::cerr << tag << "step " << s + 1 << "/" << steps << " loss " << std::fixed
                << std::setprecision(4) << r.loss << " acc " << acc << std::defaultfloat << "\n";
    }
  }
  out.model = t.model();
  return out;
}

json loss_summary(const std::vector<double>& losses) {
  const std::size_t w = std::min<std::size_t>(100, losses.size());
  if (w == 0) return json::object();
  return {{"first_mean", mean_of(losses, 0, w)},
          {"last_mean", mean_of(losses, losses.size() - w, w)},
          {"window", w},
          {"final", losses.back()}};
}

int run_train(const TrainArgs& a, const json& config, const std::optional<json>& file) {
  RunManifest m{"train", config, a.seed};
  m.threads = a.common.threads;
  const CpcConfig cfg = a.model.resolve(file);
  m.config["model"] = cfg;
  require(a.synthetic != !a.train_dir.empty(),
          "train: give exactly one of --train-dir, --synthetic");
  require(a.steps > 0, "train: --steps must be positive");

  std::shared_ptr<const std::vector<AudioBuffer>> corpus;
  if (a.synthetic) {
    SyntheticCorpusConfig sc;
    sc.sample_rate = cfg.sample_rate;
    sc.seed = a.data_seed;
    corpus = std::make_shared<const std::vector<AudioBuffer>>(
        make_synthetic_corpus(sc).train_audio());
    m.inputs["data"] = "synthetic";
  } else {
    const auto paths = collect_wavs(a.train_dir);
    corpus = std::make_shared<const std::vector<AudioBuffer>>(
        read_all(paths, cfg.sample_rate, a.common.threads));
    m.inputs["data"] = path_strings(paths);
  }

  EffectChainSpec spec;
  if (a.no_augment) {
    require(a.chain.empty(), "train: --chain and --no-augment conflict");
  } else if (!a.chain.empty()) {
    spec = load_chain_spec(a.chain, a.common.threads);
    m.inputs["chain"] = a.chain;
  } else {
    std::shared_ptr<const NoiseBank> bank;
    if (!a.noise_bank.empty()) {
      // Raw directories get the default band; prepared banks keep theirs.
      const auto band = NoiseBank::is_prepared(a.noise_bank)
                            ? std::nullopt
                            : std::optional<BandSpec>(kDefaultNoiseBand);
      bank = chain_detail::open_bank(a.noise_bank, band, cfg.sample_rate, a.common.threads);
      m.inputs["noise_bank"] = a.noise_bank;
    } else if (a.synthetic) {
      bank = make_synthetic_noise_bank(cfg.sample_rate, a.data_seed, kDefaultNoiseBand);
    } else {
      std::cerr << "train: no --noise-bank; default chain runs without additive noise\n";
    }
    spec = default_training_chain(bank, cfg.sample_rate);
  }
  const auto placement = parse_placement(a.placement);

  auto outcome = train_loop(cfg, a.seed, corpus, spec, placement, a.steps, a.common.threads,
                            a.log_every, "train: ");
  const json extra = {{"placement", a.placement}, {"chain", to_json(spec)}};
  save_checkpoint(a.out, outcome.model, a.seed, static_cast<std::uint64_t>(a.steps), extra);
  m.outputs["checkpoint"] = a.out;
  if (!a.loss_csv.empty()) {
    std::ofstream csv(a.loss_csv);
    if (!csv) fail(ErrorKind::kIo, a.loss_csv + ": cannot open for writing");
    csv << "step,loss,accuracy,lr\n" << std::setprecision(17);
    for (std::size_t s = 0; s < outcome.losses.size(); ++s) {
      csv << s << ',' << outcome.losses[s] << ',' << outcome.accuracies[s] << ','
          << cfg.lr_at(s) << "\n";
    }
    m.outputs["loss_csv"] = a.loss_csv;
  }
  m.results = {{"loss", loss_summary(outcome.losses)}, {"chain", to_json(spec)}};
  write_manifest(manifest_path(a.common, "train", a.out), m);
  return kExitOk;
}

// --- features -----------------------------------------------------------------

struct FeaturesArgs {
  Common common;
  ModelFlags model_flags;
  std::string model;
  bool untrained = false;
  std::uint64_t seed = 0;
  std::vector<std::string> in;
  bool synthetic = false;
  std::uint64_t data_seed = 0;
  std::string out;
  std::string level = "c";
};

/// Writes <out>/<id>.f32 and <out>/<id>.json for each utterance.
void write_all_features(const CpcModel<float>& model,
                        const std::vector<std::pair<std::string, AudioBuffer>>& utts,
                        FeatureLevel level, const fs::path& out, int threads) {
  fs::create_directories(out);
  parallel_for(utts.size(), threads, [&](std::size_t i) {
    write_features(out / utts[i].first, extract_features(model, utts[i].second, level));
  });
}

int run_features(const FeaturesArgs& a, const json& config, const std::optional<json>& file) {
  RunManifest m{"features", config, a.seed};
  m.threads = a.common.threads;
  require(a.untrained != !a.model.empty(), "features: give exactly one of --model, --untrained");
  require(a.synthetic != !a.in.empty(), "features: give exactly one of --in, --synthetic");
  const CpcModel<float> model = [&] {
    if (a.untrained) return CpcModel<float>::random(a.model_flags.resolve(file), a.seed);
    m.inputs["model"] = a.model;
    return load_checkpoint(a.model).model;
  }();
  m.config["model"] = model.config();
  const int rate = model.config().sample_rate;

  std::vector<std::pair<std::string, AudioBuffer>> utts;
  if (a.synthetic) {
    SyntheticCorpusConfig sc;
    sc.sample_rate = rate;
    sc.seed = a.data_seed;
    const auto corpus = make_synthetic_corpus(sc);
    for (const auto& u : corpus.test) utts.emplace_back(u.id, u.audio);
    fs::create_directories(a.out);
    write_items(fs::path(a.out) / "test.item", corpus.test_items);
    m.outputs["items"] = (fs::path(a.out) / "test.item").string();
    m.inputs["data"] = "synthetic";
  } else {
    const auto paths = collect_wavs(a.in);
    const auto audio = read_all(paths, rate, a.common.threads);
    for (std::size_t i = 0; i < paths.size(); ++i) {
      utts.emplace_back(paths[i].stem().string(), audio[i]);
    }
    m.inputs["wav"] = path_strings(paths);
  }
  write_all_features(model, utts, parse_feature_level(a.level), a.out, a.common.threads);
  m.outputs["features"] = a.out;
  m.results = {{"utterances", utts.size()}};
  write_manifest(manifest_path(a.common, "features", a.out), m);
  std::cerr << "features: " << utts.size() << " utterance(s) -> " << a.out << "\n";
  return kExitOk;
}

// --- abx ----------------------------------------------------------------------

struct AbxArgs {
  Common common;
  std::string features;
  std::string items;
  std::string mode = "within";
  std::string dtw_norm = "path_length";
  std::string out;
  std::string csv;
};

int run_abx(const AbxArgs& a, const json& config) {
  RunManifest m{"abx", config, 0};
  m.threads = a.common.threads;
  const auto mode = parse_abx_mode(a.mode);
  const AbxOptions opt{parse_dtw_norm(a.dtw_norm), a.common.threads};
  const auto items = load_items(a.items);
  const auto segs = load_segments(items, a.features);
  const auto report = abx_score(items, segs, mode, opt);
  m.inputs = {{"features", a.features}, {"items", a.items}};
  if (!a.out.empty()) {
    write_report_json(a.out, report);
    m.outputs["report"] = a.out;
  }
  if (!a.csv.empty()) {
    write_report_csv(a.csv, report);
    m.outputs["csv"] = a.csv;
  }
  m.results = {{"error_rate", report.error_rate},
               {"score", report.score},
               {"triples", report.triples},
               {"cells", report.cells.size()}};
  write_manifest(manifest_path(a.common, "abx", a.out), m);
  std::cout << "ABX " << a.mode << " error rate: " << std::setprecision(6) << report.error_rate
            << " (" << report.triples << " triples)\n";
  return kExitOk;
}

// --- sweep-bands --------------------------------------------------------------

struct SweepArgs {
  Common common;
  ModelFlags model;
  std::string noise_dir;
  std::string out;
  int steps = 300;
  int seeds = 1;
  std::uint64_t seed = 0;
  std::uint64_t data_seed = 0;
  std::string placement = "past_only";
  std::string level = "c";
  int log_every = 0;
};

int run_sweep(const SweepArgs& a, const json& config, const std::optional<json>& file) {
  RunManifest m{"sweep-bands", config, a.seed};
  m.threads = a.common.threads;
  const CpcConfig cfg = a.model.resolve(file);
  m.config["model"] = cfg;
  require(a.steps > 0 && a.seeds > 0, "sweep-bands: --steps and --seeds must be positive");
  const auto placement = parse_placement(a.placement);
  const auto level = parse_feature_level(a.level);

  SyntheticCorpusConfig sc;
  sc.sample_rate = cfg.sample_rate;
  sc.seed = a.data_seed;
  const auto corpus = make_synthetic_corpus(sc);
  const auto train = std::make_shared<const std::vector<AudioBuffer>>(corpus.train_audio());

  // Rows: no augmentation, unfiltered noise, then each canonical band.
  struct Row {
    std::string name;
    std::optional<BandSpec> band;
    bool augment;
  };
  std::vector<Row> rows{{"no_augmentation", std::nullopt, false},
                        {"unfiltered", std::nullopt, true}};
  for (const auto& b : kCanonicalBands) {
    std::ostringstream name;
    name << b.low_hz << "-" << b.high_hz;
    rows.push_back({name.str(), b, true});
  }

  fs::create_directories(a.out);
  const fs::path csv_path = fs::path(a.out) / "sweep.csv";
  std::ofstream csv(csv_path);
  if (!csv) fail(ErrorKind::kIo, csv_path.string() + ": cannot open for writing");
  csv << "band,low_hz,high_hz,seed,loss_first,loss_last,abx_within,abx_across\n"
      << std::setprecision(10);
  json results = json::array();
  for (const auto& row : rows) {
    EffectChainSpec spec;
    spec.sample_rate = cfg.sample_rate;
    if (row.augment) {
      AddNoiseSpec add;
      add.band = row.band;
      if (a.noise_dir.empty()) {
        add.bank = make_synthetic_noise_bank(cfg.sample_rate, a.data_seed, row.band);
        add.bank_path = "synthetic";
      } else {
        add.bank = std::make_shared<const NoiseBank>(
            NoiseBank::build(a.noise_dir, row.band, cfg.sample_rate, a.common.threads));
        add.bank_path = a.noise_dir;
      }
      spec.add = std::move(add);
    }
    for (int k = 0; k < a.seeds; ++k) {
      const std::uint64_t seed = a.seed + static_cast<std::uint64_t>(k);
      const auto outcome = train_loop(cfg, seed, train, spec, placement, a.steps,
                                      a.common.threads, a.log_every, row.name + ": ");
      std::unordered_map<std::string, FeatureSequence> feats;
      for (const auto& u : corpus.test) {
        feats[u.id] = extract_features(outcome.model, u.audio, level);
      }
      const auto segs = gather_segments(corpus.test_items, [&](const std::string& id)
                                                               -> const FeatureSequence& {
        return feats.at(id);
      });
      const AbxOptions opt{DtwNorm::kPathLength, a.common.threads};
      const double within = abx_score(corpus.test_items, segs, AbxMode::kWithin, opt).error_rate;
      const double across = abx_score(corpus.test_items, segs, AbxMode::kAcross, opt).error_rate;
      const auto summary = loss_summary(outcome.losses);
      const double lo = row.band ? row.band->low_hz : -1.0;
      const double hi = row.band ? row.band->high_hz : -1.0;
      csv << row.name << ',' << lo << ',' << hi << ',' << seed << ','
          << summary.at("first_mean").get<double>() << ',' << summary.at("last_mean").get<double>()
          << ',' << within << ',' << across << "\n";
      results.push_back({{"band", row.name}, {"seed", seed}, {"loss", summary},
                         {"abx_within", within}, {"abx_across", across}});
      std::cout << std::left << std::setw(16) << row.name << " seed " << seed << "  within "
                << std::fixed << std::setprecision(4) << within << "  across " << across
                << std::defaultfloat << "\n";
    }
  }
  m.inputs["noise"] = a.noise_dir.empty() ? json("synthetic") : json(a.noise_dir);
  m.outputs["csv"] = csv_path.string();
  m.results["rows"] = results;
  write_manifest(manifest_path(a.common, "sweep-bands", a.out), m);
  return kExitOk;
}

// --- grad-check ---------------------------------------------------------------

struct GradCheckArgs {
  Common common;
  bool tiny = false;
  int context_layers = 0;
  std::string predictor_mode;
  std::uint64_t seed = 0;
  double eps = 1e-4;
  double tolerance = 1e-4;
  std::string out;
};

int run_grad_check(const GradCheckArgs& a, const json& config) {
  RunManifest m{"grad-check", config, a.seed};
  m.threads = a.common.threads;
  require(a.tiny, "grad-check: finite differences need the --tiny profile");
  std::vector<int> layers{1, 2, 3};
  if (a.context_layers > 0) layers = {a.context_layers};
  std::vector<PredictorMode> modes{PredictorMode::kMultiHead, PredictorMode::kPerStep};
  if (!a.predictor_mode.empty()) modes = {parse_predictor_mode(a.predictor_mode)};

  GradCheckOptions opt;
  opt.eps = a.eps;
  opt.seed = a.seed;
  double worst = 0.0;
  json variants = json::array();
  for (int l : layers) {
    for (auto mode : modes) {
      CpcConfig c = CpcConfig::grad_check_profile();
      c.context_layers = l;
      c.predictor_mode = mode;
      const auto model = CpcModel<double>::random(c, a.seed);
      const auto past = grad_check_batch(c, a.seed + 1), future = grad_check_batch(c, a.seed + 2);
      const auto r = grad_check(model, past, future, RngStream(a.seed, {kNegativeStream}), opt);
      worst = std::max(worst, r.max_rel_error);
      std::cout << "layers " << l << " " << std::setw(10) << std::left << to_string(mode)
                << std::right << " max relative error " << std::scientific << std::setprecision(3)
                << r.max_rel_error << std::defaultfloat << "  (" << r.checked << " checked, "
                << r.shrunk << " shrunk, " << r.skipped << " skipped; worst " << r.worst << ")\n";
      variants.push_back({{"context_layers", l},
                          {"predictor_mode", to_string(mode)},
                          {"max_rel_error", r.max_rel_error},
                          {"checked", r.checked},
                          {"shrunk", r.shrunk},
                          {"skipped", r.skipped},
                          {"unchecked", r.unchecked},
                          {"worst", r.worst}});
    }
  }
  const bool pass = worst < a.tolerance;
  std::cout << "max relative error: " << std::scientific << std::setprecision(3) << worst
            << std::defaultfloat << (pass ? " < " : " >= ") << a.tolerance
            << (pass ? "  PASS\n" : "  FAIL\n");
  m.results = {{"max_rel_error", worst}, {"pass", pass}, {"variants", variants}};
  if (!a.out.empty()) {
    std::ofstream out(a.out);
    if (!out) fail(ErrorKind::kIo, a.out + ": cannot open for writing");
    out << m.results.dump(2) << "\n";
    m.outputs["report"] = a.out;
  }
  write_manifest(manifest_path(a.common, "grad-check", a.out), m);
  return pass ? kExitOk : kExitData;
}

// --- entry point --------------------------------------------------------------

void print_usage_error(const CLI::App& app, const std::string& what) {
  std::cerr << "error: " << what << "\n\n";
  const CLI::App* shown = &app;
  for (const CLI::App* sub : app.get_subcommands()) shown = sub;
  std::cerr << shown->help();
}

int run(int argc, char** argv) {
  CLI::App app{"cpcaug: time-domain augmentation and desk-scale CPC experiments", "cpcaug"};
  app.set_version_flag("--version", CPCAUG_VERSION);
  app.require_subcommand(1);

  std::function<int()> action;

  AugmentArgs aug;
  auto* c_aug = app.add_subcommand("augment", "apply a sampled effect chain to WAV files");
  Settings s_aug(c_aug);
  add_common(c_aug, aug.common);
  s_aug.add_required("in", aug.in, "input WAV files or directories");
  s_aug.add_required("out", aug.out, "output WAV (one input) or directory");
  s_aug.add_required("chain", aug.chain, "chain JSON");
  s_aug.add("seed", aug.seed, "root seed");
  s_aug.add("format", aug.format, "output sample format: int16 or float32");
  s_aug.add("placement", aug.placement,
            "write past/future views with this placement (equal-length inputs)");
  c_aug->callback([&] {
    action = [&] {
      const auto file = load_config(aug.common, "augment");
      if (file) s_aug.overlay(*file);
      s_aug.check_required();
      return run_augment(aug, s_aug.snapshot());
    };
  });

  NoisePrepArgs np;
  auto* c_np = app.add_subcommand("noise-prep", "filter a noise directory into a prepared bank");
  Settings s_np(c_np);
  add_common(c_np, np.common);
  s_np.add_required("in", np.in, "directory of noise WAVs");
  s_np.add_required("out", np.out, "bank output directory");
  s_np.add("band", np.band, "band-pass LOW,HIGH in Hz, or none");
  s_np.add("rate", np.rate, "target sample rate");
  c_np->callback([&] {
    action = [&] {
      const auto file = load_config(np.common, "noise-prep");
      if (file) s_np.overlay(*file);
      s_np.check_required();
      return run_noise_prep(np, s_np.snapshot());
    };
  });

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "train a CPC model and write a checkpoint");
  Settings s_tr(c_tr);
  add_common(c_tr, tr.common);
  tr.model.add(s_tr);
  s_tr.add("train-dir", tr.train_dir, "training WAV files or directories");
  s_tr.flag("synthetic", tr.synthetic, "train on the synthetic tone corpus");
  s_tr.add("data-seed", tr.data_seed, "seed of the synthetic corpus and noise");
  s_tr.add_required("out", tr.out, "checkpoint path");
  s_tr.add("steps", tr.steps, "optimization steps");
  s_tr.add("seed", tr.seed, "root seed");
  s_tr.add("placement", tr.placement,
           "same_for_all, per_sequence, past_only, future_only or past_plus_future");
  s_tr.add("chain", tr.chain, "chain JSON (default: pitch + add + reverb)");
  s_tr.add("noise-bank", tr.noise_bank, "noise directory or prepared bank for the default chain");
  s_tr.flag("no-augment", tr.no_augment, "train without augmentation");
  s_tr.add("loss-csv", tr.loss_csv, "per-step loss CSV");
  s_tr.add("log-every", tr.log_every, "progress line every N steps (0: quiet)");
  c_tr->callback([&] {
    action = [&] {
      const auto file = load_config(tr.common, "train");
      if (file) s_tr.overlay(*file, {"model"});
      s_tr.check_required();
      return run_train(tr, s_tr.snapshot(), file);
    };
  });

  FeaturesArgs fe;
  auto* c_fe = app.add_subcommand("features", "extract z or c features");
  Settings s_fe(c_fe);
  add_common(c_fe, fe.common);
  fe.model_flags.add(s_fe);
  s_fe.add("model", fe.model, "checkpoint path");
  s_fe.flag("untrained", fe.untrained, "random weights from --seed instead of a checkpoint");
  s_fe.add("seed", fe.seed, "initialization seed for --untrained");
  s_fe.add("in", fe.in, "WAV files or directories");
  s_fe.flag("synthetic", fe.synthetic, "synthetic test utterances; also writes test.item");
  s_fe.add("data-seed", fe.data_seed, "seed of the synthetic corpus");
  s_fe.add_required("out", fe.out, "feature output directory");
  s_fe.add("level", fe.level, "z (encoder) or c (context)");
  c_fe->callback([&] {
    action = [&] {
      const auto file = load_config(fe.common, "features");
      if (file) s_fe.overlay(*file, {"model"});
      s_fe.check_required();
      return run_features(fe, s_fe.snapshot(), file);
    };
  });

  AbxArgs ab;
  auto* c_ab = app.add_subcommand("abx", "score ABX discriminability of features");
  Settings s_ab(c_ab);
  add_common(c_ab, ab.common);
  s_ab.add_required("features", ab.features, "feature directory");
  s_ab.add_required("items", ab.items, "item file");
  s_ab.add("mode", ab.mode, "within or across");
  s_ab.add("dtw-norm", ab.dtw_norm, "path_length or max_length");
  s_ab.add("out", ab.out, "JSON report path");
  s_ab.add("csv", ab.csv, "per-cell CSV report path");
  c_ab->callback([&] {
    action = [&] {
      const auto file = load_config(ab.common, "abx");
      if (file) s_ab.overlay(*file);
      s_ab.check_required();
      return run_abx(ab, s_ab.snapshot());
    };
  });

  SweepArgs sw;
  auto* c_sw = app.add_subcommand("sweep-bands",
                                  "train + ABX once per canonical noise band");
  Settings s_sw(c_sw);
  add_common(c_sw, sw.common);
  sw.model.add(s_sw);
  s_sw.add("noise-dir", sw.noise_dir, "raw noise WAV directory (default: synthetic sources)");
  s_sw.add_required("out", sw.out, "output directory");
  s_sw.add("steps", sw.steps, "training steps per run");
  s_sw.add("seeds", sw.seeds, "runs per band");
  s_sw.add("seed", sw.seed, "first root seed");
  s_sw.add("data-seed", sw.data_seed, "seed of the synthetic corpus and noise");
  s_sw.add("placement", sw.placement, "augmentation placement");
  s_sw.add("level", sw.level, "feature level scored by ABX");
  s_sw.add("log-every", sw.log_every, "progress line every N steps (0: quiet)");
  c_sw->callback([&] {
    action = [&] {
      const auto file = load_config(sw.common, "sweep-bands");
      if (file) s_sw.overlay(*file, {"model"});
      s_sw.check_required();
      return run_sweep(sw, s_sw.snapshot(), file);
    };
  });

  GradCheckArgs gc;
  auto* c_gc = app.add_subcommand("grad-check", "compare analytic and finite-difference gradients");
  Settings s_gc(c_gc);
  add_common(c_gc, gc.common);
  s_gc.flag("tiny", gc.tiny, "use the small gradient-check profile (required)");
  s_gc.add("context-layers", gc.context_layers, "only this depth (0: 1, 2 and 3)");
  s_gc.add("predictor-mode", gc.predictor_mode, "only this mode (empty: both)");
  s_gc.add("seed", gc.seed, "seed for weights, batch and negatives");
  s_gc.add("eps", gc.eps, "finite-difference step");
  s_gc.add("tolerance", gc.tolerance, "pass threshold on the max relative error");
  s_gc.add("out", gc.out, "JSON report path");
  c_gc->callback([&] {
    action = [&] {
      const auto file = load_config(gc.common, "grad-check");
      if (file) s_gc.overlay(*file);
      s_gc.check_required();
      return run_grad_check(gc, s_gc.snapshot());
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_usage_error(app, e.what());
    return kExitUsage;
  }

  try {
    return action();
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return e.kind() == ErrorKind::kInvalidArgument ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace
}  // namespace cpcaug

int main(int argc, char** argv) { return cpcaug::run(argc, argv); }
