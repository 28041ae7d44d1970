#include "noiseloom/cli.hpp"

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "noiseloom/benchmark.hpp"
#include "noiseloom/error.hpp"
#include "noiseloom/noise_edit.hpp"
#include "noiseloom/service.hpp"
#include "noiseloom/toy_model.hpp"

namespace noiseloom {

namespace {

// Missing input files and malformed flag values exit with the usage code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_file(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) throw UsageError("file not found: " + path);
}

nlohmann::json read_json(const std::string& path) {
  require_file(path);
  std::ifstream f(path);
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(path + ": malformed JSON: " + e.what());
  }
}

std::vector<std::string> split_prompt(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& r : raw) {
    std::stringstream ss(r);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto b = item.find_first_not_of(' ');
      const auto e = item.find_last_not_of(' ');
      if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
  }
  return out;
}

// "top,left,bottom,right" in blocks, or a JSON file with "box" or "blocks".
RegionMask parse_mask(const std::string& arg, BlockGrid grid) {
  RegionMask mask(grid);
  if (std::filesystem::is_regular_file(arg)) {
    const auto j = read_json(arg);
    if (j.contains("box")) mask.add(region_from_json(j["box"]));
    if (j.contains("blocks"))
      for (const auto& b : j["blocks"]) mask.set({b.at(0).get<int>(), b.at(1).get<int>()});
    return mask;
  }
  int v[4];
  char sep[3];
  std::stringstream ss(arg);
  if (!(ss >> v[0] >> sep[0] >> v[1] >> sep[1] >> v[2] >> sep[2] >> v[3]) ||
      sep[0] != ',' || sep[1] != ',' || sep[2] != ',' || !ss.eof()) {
    throw UsageError("--mask must be top,left,bottom,right or an existing JSON file: " + arg);
  }
  const Region r{v[0], v[1], v[2], v[3]};
  if (!grid.contains(r)) throw GeometryError("mask box " + to_string(r) + " is empty or outside the grid");
  mask.add(r);
  return mask;
}

struct ModelFlags {
  std::string params_path;
  int steps = 0;
  std::string sampler = "plms";

  ToyModelParams params() const {
    ToyModelParams p;
    if (!params_path.empty()) p = params_from_json(read_json(params_path));
    if (steps > 0) p.steps = steps;
    return p;
  }
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--params", f.params_path, "JSON file with model parameters");
  cmd->add_option("--steps", f.steps, "Denoising steps")->check(CLI::PositiveNumber);
  cmd->add_option("--sampler", f.sampler, "ddim or plms")->check(CLI::IsMember({"ddim", "plms"}));
}

void write_outputs(const std::string& prefix, const LatentGrid& latent,
                   const GenerationResult& result, nlohmann::json extra, std::ostream& out) {
  save_latent(prefix + ".nlat", latent);
  auto j = generation_to_json(result);
  for (auto& [k, v] : extra.items()) j[k] = v;
  std::ofstream(prefix + ".json") << j.dump(2) << "\n";
  write_label_png(prefix + ".png", result.labels);
  out << prefix << ".nlat " << prefix << ".json " << prefix << ".png\n";
}

Service* g_running = nullptr;

extern "C" void on_signal(int) {
  if (g_running) g_running->stop();
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"noiseloom: noise-latent editing for a toy latent diffusion model"};
  app.require_subcommand(1);

  ModelFlags gen_model, rep_model, lay_model;
  std::uint64_t gen_seed = 0;
  std::vector<std::string> gen_prompt, rep_prompt, lay_prompt;
  std::string gen_out, rep_out, lay_out;

  auto* gen = app.add_subcommand("gen", "Generate from a seeded latent");
  gen->add_option("--seed", gen_seed, "Latent seed")->required();
  gen->add_option("--prompt", gen_prompt, "Categories, comma separated")->required();
  gen->add_option("--out", gen_out, "Output prefix")->required();
  add_model_flags(gen, gen_model);

  std::string rep_latent, rep_mask;
  std::uint64_t rep_fresh = 0;
  auto* rep = app.add_subcommand("repaint", "Re-randomize a region of a latent and regenerate");
  rep->add_option("--latent", rep_latent, "Input .nlat")->required();
  rep->add_option("--mask", rep_mask, "top,left,bottom,right in blocks, or JSON file")->required();
  rep->add_option("--fresh-seed", rep_fresh, "Seed for the redrawn values")->required();
  rep->add_option("--prompt", rep_prompt, "Categories, comma separated")->required();
  rep->add_option("--out", rep_out, "Output prefix")->required();
  add_model_flags(rep, rep_model);

  std::string lay_latent, lay_guidance;
  std::optional<std::uint64_t> lay_pairing;
  auto* lay = app.add_subcommand("layout", "Swap latent blocks toward a layout and regenerate");
  lay->add_option("--latent", lay_latent, "Input .nlat")->required();
  lay->add_option("--guidance", lay_guidance, "Guidance JSON file")->required();
  lay->add_option("--pairing-seed", lay_pairing, "Overrides the guidance pairing seed");
  lay->add_option("--prompt", lay_prompt, "Categories (default: guidance categories)");
  lay->add_option("--out", lay_out, "Output prefix")->required();
  add_model_flags(lay, lay_model);

  std::string bench_config, bench_out;
  int bench_workers = -1;
  auto* bench = app.add_subcommand("bench", "Run the layout benchmark and print CSV");
  bench->add_option("--config", bench_config, "Benchmark config JSON")->required();
  bench->add_option("--out", bench_out, "Write CSV here instead of stdout");
  bench->add_option("--workers", bench_workers, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);

  int serve_port = 8080;
  std::string serve_host = "127.0.0.1", serve_snapshot;
  auto* serve = app.add_subcommand("serve", "Run the HTTP session service");
  serve->add_option("--port", serve_port, "Port (NOISELOOM_PORT overrides)");
  serve->add_option("--host", serve_host, "Bind address");
  serve->add_option("--snapshot", serve_snapshot, "Session snapshot JSON, loaded at start and written on exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (gen->parsed()) {
      const ToyModel model(gen_model.params());
      const auto cats = split_prompt(gen_prompt);
      const auto tokens = model.prompt(cats);
      const auto z = sample_latent(kDefaultLatentSize, kDefaultLatentSize, kDefaultChannels, gen_seed);
      const auto r = generate(z, tokens, model, parse_sampler(gen_model.sampler));
      write_outputs(gen_out, z, r, {}, out);
    } else if (rep->parsed()) {
      require_file(rep_latent);
      const ToyModel model(rep_model.params());
      const auto z = load_latent(rep_latent);
      const auto mask = parse_mask(rep_mask, z.blocks());
      const auto edited = resample_region(z, mask, rep_fresh);
      const auto tokens = model.prompt(split_prompt(rep_prompt));
      const auto r = generate(edited, tokens, model, parse_sampler(rep_model.sampler));
      write_outputs(rep_out, edited, r, {{"fresh_seed", rep_fresh}}, out);
    } else if (lay->parsed()) {
      require_file(lay_latent);
      const ToyModel model(lay_model.params());
      const auto z = load_latent(lay_latent);
      const auto guidance = guidance_from_json(read_json(lay_guidance));
      const auto cats = lay_prompt.empty() ? guidance.categories() : split_prompt(lay_prompt);
      const auto tokens = model.prompt(cats);
      const auto pairing = lay_pairing.value_or(guidance.pairing_seed);
      const auto swapped = layout_swap(z, tokens, model.weights(), guidance, pairing);
      const auto r = generate(swapped.latent, tokens, model, parse_sampler(lay_model.sampler));
      nlohmann::json swaps = nlohmann::json::array();
      for (const auto& s : swapped.swaps) swaps.push_back(swaps_to_json(s));
      write_outputs(lay_out, swapped.latent, r, {{"swaps", swaps}}, out);
    } else if (bench->parsed()) {
      require_file(bench_config);
      auto config = load_benchmark_config(bench_config);
      if (bench_workers >= 0) config.workers = bench_workers;
      const auto csv = run_benchmark(config).table.csv();
      if (bench_out.empty()) {
        out << csv;
      } else {
        std::ofstream f(bench_out);
        if (!f) throw std::runtime_error("cannot write " + bench_out);
        f << csv;
      }
    } else if (serve->parsed()) {
      Service service({serve_host, resolve_port(serve_port), serve_snapshot});
      g_running = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      err << "listening on " << serve_host << ":" << resolve_port(serve_port) << "\n";
      const bool ok = service.run();
      g_running = nullptr;
      if (!ok) {
        err << "error: cannot listen on " << serve_host << ":" << resolve_port(serve_port) << "\n";
        return kExitEngine;
      }
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return kExitEngine;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitEngine;
  }
  return kExitOk;
}

int cli_main(int argc, const char* const* argv) {
  return cli_main(argc, argv, std::cout, std::cerr);
}

}  // namespace noiseloom
