#include "artbank/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "artbank/benchmark.hpp"
#include "artbank/errors.hpp"
#include "artbank/eval.hpp"
#include "artbank/inversion.hpp"

namespace artbank {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::optional<std::uint64_t> seed;
  std::size_t channels = kDefaultStyleChannels;
  std::size_t positions = kDefaultStylePositions;
  std::size_t width = 32;
  int timesteps = 100;
  std::uint64_t vocab_seed = kDefaultVocabSeed;
  std::string prompt_template{kDefaultPromptTemplate};

  // pretrain / train-bank / bench-attn
  std::string data;
  std::string checkpoint;
  std::string bank;
  int steps = 0;
  double lr = 1e-3;
  std::string loss_csv;
  std::vector<std::string> styles;
  bool drop_text = false;

  // stylize
  std::string style_id;
  std::string content;
  std::string out;
  double strength = 0.6;
  bool random_init = false;

  // bench-attn
  std::vector<std::string> variants{"ssam", "sanet"};
  std::vector<std::uint64_t> seeds;
  int max_iters = 5000;
  double threshold = 0.85;
  std::size_t window = 100;
  std::string artist;
  std::string csv;

  // eval
  std::string stylized;

  // gen-data
  std::string what = "style";
  std::string family = "stripes";
  std::string kind = "shapes";
  std::size_t count = 64;
  std::size_t size = 16;
};

std::uint64_t require_seed(const Options& o) {
  if (!o.seed) throw ConfigError("--seed is required (no implicit entropy source)");
  return *o.seed;
}

std::size_t thread_budget() {
  const char* env = std::getenv("ARTBANK_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigError(std::string("ARTBANK_THREADS must be a positive integer, got '") + env + "'");
  return static_cast<std::size_t>(n);
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

void write_text(const fs::path& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f << text;
}

std::vector<Tensor> tensors_of(const std::vector<ImageSample>& images) {
  std::vector<Tensor> out;
  out.reserve(images.size());
  for (const auto& img : images) out.push_back(to_tensor(img));
  return out;
}

Denoiser load_frozen(const Options& o) {
  Denoiser d = load_denoiser(o.checkpoint);
  if (d.config().cond_dim != o.channels) {
    throw DimensionError("checkpoint '" + o.checkpoint + "' has condition width " +
                         std::to_string(d.config().cond_dim) + " but the configured style channels are " +
                         std::to_string(o.channels));
  }
  d.freeze();
  return d;
}

void check_image_channels(const Denoiser& d, std::size_t channels, const std::string& what) {
  if (channels != d.config().channels) {
    throw DimensionError(what + " has " + std::to_string(channels) + " channels but the checkpoint expects " +
                         std::to_string(d.config().channels));
  }
}

std::vector<ImageSample> images_at(const fs::path& path) {
  if (fs::is_directory(path)) return load_collection(path);
  return {read_ppm(path)};
}

void cmd_pretrain(const Options& o, std::ostream& out) {
  const std::uint64_t seed = require_seed(o);
  const auto dataset = load_dataset(o.data);
  std::vector<Tensor> images;
  std::vector<ConditionVector> conditions;
  for (const auto& col : dataset) {
    const auto cond = text_condition(encode_prompt(o.prompt_template, col.style_id, o.vocab_seed, o.channels));
    for (const auto& img : col.images) {
      if (img.channels != dataset.front().images.front().channels) throw IoError("dataset mixes channel counts");
      images.push_back(to_tensor(img));
      conditions.push_back(cond);
    }
    out << "collection " << col.style_id << ": " << col.images.size() << " images\n";
  }
  DenoiserConfig dc;
  dc.channels = dataset.front().images.front().channels;
  dc.width = o.width;
  dc.cond_dim = o.channels;
  Denoiser d(dc, seed);
  TrainConfig tc;
  tc.steps = o.steps;
  tc.seed = seed;
  tc.adam.lr = o.lr;
  const auto sched = make_schedule(o.timesteps);
  const auto trace = train_naive(d, images, conditions, sched, tc);
  save_denoiser(d, o.checkpoint);
  if (!o.loss_csv.empty()) {
    ensure_parent(o.loss_csv);
    trace.write_csv(o.loss_csv);
  }
  if (!trace.losses.empty()) {
    out << "final loss (100-step average): " << trace.moving_average(trace.losses.size() - 1, 100) << "\n";
  }
  out << "wrote checkpoint " << o.checkpoint << "\n";
}

void cmd_train_bank(const Options& o, std::ostream& out) {
  const std::uint64_t seed = require_seed(o);
  const Denoiser d = load_frozen(o);
  const auto sched = make_schedule(o.timesteps);
  auto dataset = load_dataset(o.data);
  if (!o.styles.empty()) {
    for (const auto& id : o.styles) {
      if (std::none_of(dataset.begin(), dataset.end(), [&](const auto& c) { return c.style_id == id; })) {
        throw NotFoundError("style collection '" + id + "' not found under '" + o.data + "'");
      }
    }
    std::erase_if(dataset, [&](const auto& c) { return std::find(o.styles.begin(), o.styles.end(), c.style_id) == o.styles.end(); });
  }
  StyleBank bank = fs::exists(o.bank) ? load_bank(o.bank) : StyleBank();
  StyleBank updated;
  for (const auto& e : bank.entries()) {
    if (std::none_of(dataset.begin(), dataset.end(), [&](const auto& c) { return c.style_id == e.style_id; })) {
      updated.add(e);
    }
  }
  const std::string tmpl = o.drop_text ? std::string(kPlaceholderToken) : o.prompt_template;
  for (const auto& col : dataset) {
    check_image_channels(d, col.images.front().channels, "collection '" + col.style_id + "'");
    const std::uint64_t entry_seed = derive_seed(seed, col.style_id);
    StyleBankEntry entry = create_entry(col.style_id, col.style_id, o.channels, o.positions, entry_seed, tmpl);
    TrainConfig tc;
    tc.steps = o.steps;
    tc.seed = entry_seed;
    tc.adam.lr = o.lr;
    const auto trace = train_ispb(d, entry, tensors_of(col.images), sched, tc, o.vocab_seed);
    if (!o.loss_csv.empty()) {
      const fs::path dir(o.loss_csv);
      fs::create_directories(dir);
      trace.write_csv(dir / (col.style_id + ".csv"));
    }
    out << "trained '" << col.style_id << "' on " << col.images.size() << " images";
    if (!trace.losses.empty()) out << ", final loss " << trace.moving_average(trace.losses.size() - 1, 100);
    out << "\n";
    updated.add(std::move(entry));
  }
  ensure_parent(o.bank);
  save_bank(updated, o.bank);
  out << "wrote bank " << o.bank << " (" << updated.size() << " entries)\n";
}

void cmd_stylize(const Options& o, std::ostream& out) {
  const std::uint64_t seed = require_seed(o);
  const StyleBank bank = load_bank(o.bank);
  const StyleBankEntry& entry = bank.at(o.style_id);
  const Denoiser d = load_frozen(o);
  if (entry.channels() != d.config().cond_dim) {
    throw DimensionError("bank entry '" + entry.style_id + "' has C=" + std::to_string(entry.channels()) +
                         " but checkpoint condition width is " + std::to_string(d.config().cond_dim));
  }
  const ImageSample content = read_ppm(o.content);
  check_image_channels(d, content.channels, "content image");
  InversionConfig ic{o.strength, seed};
  const auto sched = make_schedule(o.timesteps);
  const ImageSample result = stylize(d, sched, entry, content, ic, o.vocab_seed,
                                     o.random_init ? StartNoise::random : StartNoise::inversion);
  ensure_parent(o.out);
  write_ppm(result, o.out);
  out << "t0 = " << inversion_timestep(o.strength, sched) << ", wrote " << o.out << "\n";
}

void cmd_bench(const Options& o, std::ostream& out) {
  const std::uint64_t seed = require_seed(o);
  const Denoiser d = load_frozen(o);
  const auto images = load_collection(o.data);
  check_image_channels(d, images.front().channels, "collection");
  BenchmarkConfig bc;
  bc.variants.clear();
  for (const auto& v : o.variants) bc.variants.push_back(parse_attention_variant(v));
  bc.seeds = o.seeds;
  if (bc.seeds.empty()) {
    for (std::uint64_t i = 0; i < 5; ++i) bc.seeds.push_back(derive_seed(seed, i));
  }
  bc.threshold_ratio = o.threshold;
  bc.max_iters = o.max_iters;
  bc.window = o.window;
  bc.positions = o.positions;
  bc.artist = o.artist.empty() ? fs::path(o.data).lexically_normal().filename().string() : o.artist;
  if (bc.artist.empty()) bc.artist = fs::path(o.data).lexically_normal().parent_path().filename().string();
  bc.prompt_template = o.drop_text ? std::string(kPlaceholderToken) : o.prompt_template;
  bc.vocab_seed = o.vocab_seed;
  bc.adam.lr = o.lr;
  bc.threads = thread_budget();
  const auto reports = convergence_benchmark(d, tensors_of(images), make_schedule(o.timesteps), bc);
  write_text(o.csv, report_csv(reports));
  out << report_table(reports) << "wrote " << o.csv << "\n";
}

void cmd_eval(const Options& o, std::ostream& out) {
  const auto contents = images_at(o.content);
  const auto stylized = images_at(o.stylized);
  if (contents.size() != stylized.size()) {
    throw ConfigError("eval: " + std::to_string(contents.size()) + " content images but " +
                      std::to_string(stylized.size()) + " stylized images");
  }
  const GramFeatureBank features;
  const StyleSignature signature = signature_of(load_collection(o.data), features);
  std::ostringstream csv;
  csv.precision(17);
  csv << "index,ssim,style_score_content,style_score_stylized\n";
  double s_ssim = 0.0, s_content = 0.0, s_styled = 0.0;
  for (std::size_t i = 0; i < contents.size(); ++i) {
    const double q = ssim(contents[i], stylized[i]);
    const double gc = gram_style_score(contents[i], signature, features);
    const double gs = gram_style_score(stylized[i], signature, features);
    csv << i << ',' << q << ',' << gc << ',' << gs << '\n';
    s_ssim += q;
    s_content += gc;
    s_styled += gs;
  }
  write_text(o.csv, csv.str());
  const auto n = static_cast<double>(contents.size());
  out << "mean ssim " << s_ssim / n << ", mean style score content " << s_content / n << " -> stylized "
      << s_styled / n << "\nwrote " << o.csv << "\n";
}

void cmd_bank_inspect(const Options& o, std::ostream& out) {
  const StyleBank bank = load_bank(o.bank);
  out << "entries: " << bank.size() << "\n";
  for (const auto& e : bank.entries()) {
    out << "- style_id: " << e.style_id << "\n  artist: " << e.artist << "\n  template: " << e.prompt_template
        << "\n  C: " << e.channels() << "\n  N: " << e.positions() << "\n  alpha: " << e.ssam.alpha
        << "\n  |i_m|: " << std::sqrt(sum_squares(e.i_m)) << "\n";
  }
}

void cmd_gen_data(const Options& o, std::ostream& out) {
  const std::uint64_t seed = require_seed(o);
  if (o.what == "style") {
    const auto families = o.family == "all" ? std::vector<std::string>{"stripes", "blobs", "checks", "waves"}
                                             : std::vector<std::string>{o.family};
    for (const auto& name : families) {
      const auto spec = default_style_spec(parse_style_family(name));
      const auto images = gen_style_collection(spec, o.count, o.size, derive_seed(seed, name));
      save_collection(images, fs::path(o.out) / name);
      out << "wrote " << images.size() << " images to " << (fs::path(o.out) / name).string() << "\n";
    }
  } else if (o.what == "content") {
    const ContentKind kind = parse_content_kind(o.kind);
    std::vector<ImageSample> images;
    for (std::size_t i = 0; i < o.count; ++i) images.push_back(gen_content_image(kind, o.size, derive_seed(seed, i)));
    save_collection(images, o.out);
    out << "wrote " << images.size() << " images to " << o.out << "\n";
  } else {
    throw ConfigError("gen-data: unknown --what '" + o.what + "' (expected style or content)");
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Implicit style prompt bank toolkit"};
  app.name("artbank");
  app.set_config("--config", "", "Config file with `key = value` lines; flags override it");
  app.require_subcommand(1);
  app.add_option("--seed", o.seed, "Root seed for every random stream")->configurable();
  app.add_option("--channels", o.channels, "Style channels C (condition width)")->check(CLI::PositiveNumber);
  app.add_option("--positions", o.positions, "Style positions N")->check(CLI::PositiveNumber);
  app.add_option("--width", o.width, "Denoiser feature width")->check(CLI::PositiveNumber);
  app.add_option("--timesteps", o.timesteps, "Diffusion steps T")->check(CLI::PositiveNumber);
  app.add_option("--vocab-seed", o.vocab_seed, "Seed of the frozen token-embedding table");
  app.add_option("--template", o.prompt_template, "Prompt template with {artist} and one '*' placeholder");

  auto* pretrain = app.add_subcommand("pretrain", "Train the denoiser on a dataset root of collections");
  pretrain->add_option("--data", o.data, "Dataset root: <root>/<style_id>/*.ppm")->required()->check(CLI::ExistingDirectory);
  pretrain->add_option("--checkpoint", o.checkpoint, "Output checkpoint path")->required();
  pretrain->add_option("--steps", o.steps, "Training steps")->default_val(2000)->check(CLI::NonNegativeNumber);
  pretrain->add_option("--lr", o.lr, "Adam learning rate")->default_val(1e-3);
  pretrain->add_option("--loss-csv", o.loss_csv, "Write the loss trace (step,loss)");

  auto* train_bank = app.add_subcommand("train-bank", "Train one bank entry per collection against a frozen checkpoint");
  train_bank->add_option("--data", o.data, "Dataset root: <root>/<style_id>/*.ppm")->required()->check(CLI::ExistingDirectory);
  train_bank->add_option("--checkpoint", o.checkpoint, "Denoiser checkpoint")->required()->check(CLI::ExistingFile);
  train_bank->add_option("--bank", o.bank, "Bank file to create or update")->required();
  train_bank->add_option("--steps", o.steps, "Training steps per entry")->default_val(1000)->check(CLI::NonNegativeNumber);
  train_bank->add_option("--lr", o.lr, "Adam learning rate")->default_val(1e-3);
  train_bank->add_option("--styles", o.styles, "Only these style_ids (default: every collection)");
  train_bank->add_flag("--drop-text", o.drop_text, "Ablation: template is the placeholder alone");
  train_bank->add_option("--loss-csv", o.loss_csv, "Directory for per-entry loss traces");

  auto* stylize_cmd = app.add_subcommand("stylize", "Stylize a content image with a bank entry");
  stylize_cmd->add_option("--checkpoint", o.checkpoint, "Denoiser checkpoint")->required()->check(CLI::ExistingFile);
  stylize_cmd->add_option("--bank", o.bank, "Bank file")->required()->check(CLI::ExistingFile);
  stylize_cmd->add_option("--style-id", o.style_id, "Entry to apply")->required();
  stylize_cmd->add_option("--content", o.content, "Content image (.ppm/.pgm)")->required()->check(CLI::ExistingFile);
  stylize_cmd->add_option("--out", o.out, "Output image path")->required();
  stylize_cmd->add_option("--strength", o.strength, "Fraction of the schedule to noise, in (0, 1]")->default_val(0.6);
  stylize_cmd->add_flag("--random-init", o.random_init, "Ablation: start from the probe noise instead of the inversion");

  auto* bench = app.add_subcommand("bench-attn", "Iterations-to-threshold benchmark of attention encoders");
  bench->add_option("--checkpoint", o.checkpoint, "Denoiser checkpoint")->required()->check(CLI::ExistingFile);
  bench->add_option("--data", o.data, "One collection directory")->required()->check(CLI::ExistingDirectory);
  bench->add_option("--variants", o.variants, "Encoders: ssam, sanet, adaattn")->delimiter(',');
  bench->add_option("--seeds", o.seeds, "Run seeds (default: five derived from --seed)")->delimiter(',');
  bench->add_option("--max-iters", o.max_iters, "Iteration budget per run")->default_val(5000)->check(CLI::NonNegativeNumber);
  bench->add_option("--threshold", o.threshold, "Threshold as a fraction of the initial loss")->default_val(0.85);
  bench->add_option("--window", o.window, "Moving-average window")->default_val(100)->check(CLI::PositiveNumber);
  bench->add_option("--lr", o.lr, "Adam learning rate")->default_val(1e-3);
  bench->add_option("--artist", o.artist, "Artist name in the prompt (default: collection directory name)");
  bench->add_flag("--drop-text", o.drop_text, "Ablation: template is the placeholder alone");
  bench->add_option("--csv", o.csv, "Output CSV path")->required();

  auto* eval_cmd = app.add_subcommand("eval", "SSIM and style scores of stylized images");
  eval_cmd->add_option("--content", o.content, "Content image or directory")->required()->check(CLI::ExistingPath);
  eval_cmd->add_option("--stylized", o.stylized, "Stylized image or directory (same order)")->required()->check(CLI::ExistingPath);
  eval_cmd->add_option("--style-data", o.data, "Target collection directory")->required()->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--csv", o.csv, "Output CSV path")->required();

  auto* bank_cmd = app.add_subcommand("bank", "Bank utilities");
  bank_cmd->require_subcommand(1);
  auto* inspect = bank_cmd->add_subcommand("inspect", "List the entries of a bank file");
  inspect->add_option("--bank", o.bank, "Bank file")->required()->check(CLI::ExistingFile);

  auto* gen = app.add_subcommand("gen-data", "Write synthetic collections or content images");
  gen->add_option("--what", o.what, "style or content")->default_val("style");
  gen->add_option("--family", o.family, "stripes, blobs, checks, waves or all")->default_val("stripes");
  gen->add_option("--kind", o.kind, "shapes, gradient or photo")->default_val("shapes");
  gen->add_option("--count", o.count, "Images to write")->default_val(64)->check(CLI::PositiveNumber);
  gen->add_option("--size", o.size, "Square image size")->default_val(16)->check(CLI::PositiveNumber);
  gen->add_option("--out", o.out, "Output directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    out << "# resolved config\n" << app.config_to_str(true, false);
    out << "# seed = " << (o.seed ? std::to_string(*o.seed) : std::string("(none)")) << "\n";
    if (*pretrain) cmd_pretrain(o, out);
    else if (*train_bank) cmd_train_bank(o, out);
    else if (*stylize_cmd) cmd_stylize(o, out);
    else if (*bench) cmd_bench(o, out);
    else if (*eval_cmd) cmd_eval(o, out);
    else if (*inspect) cmd_bank_inspect(o, out);
    else if (*gen) cmd_gen_data(o, out);
  } catch (const NotFoundError& e) {
    err << "error: not found: " << e.what() << "\n";
    return 1;
  } catch (const DimensionError& e) {
    err << "error: dimension mismatch: " << e.what() << "\n";
    return 1;
  } catch (const FormatError& e) {
    err << "error: bad file format: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    err << "error: i/o: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace artbank
