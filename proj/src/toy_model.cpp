#include "noiseloom/toy_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

#include <png.h>

#include "noiseloom/error.hpp"

namespace noiseloom {

void ToyModelParams::validate() const {
  if (!(attention_strength > 0.0)) throw ConfigError("attention_strength must be > 0");
  if (smoothing_radius < 0) throw ConfigError("smoothing_radius must be >= 0");
  if (!(smoothing_weight >= 0.0 && smoothing_weight <= 1.0)) {
    throw ConfigError("smoothing_weight must lie in [0, 1]");
  }
  if (steps < 1) throw ConfigError("steps must be >= 1");
  if (!(background_threshold > 0.0 && background_threshold < 1.0)) {
    throw ConfigError("background_threshold must lie in (0, 1)");
  }
  if (!std::isfinite(background_logit)) throw ConfigError("background_logit must be finite");
  if (!(weights.logit_scale > 0.0)) throw ConfigError("logit_scale must be > 0");
}

nlohmann::json params_to_json(const ToyModelParams& p) {
  return {{"engine_seed", p.engine_seed},
          {"vocab_seed", p.vocab_seed},
          {"attention_strength", p.attention_strength},
          {"smoothing_radius", p.smoothing_radius},
          {"smoothing_weight", p.smoothing_weight},
          {"steps", p.steps},
          {"background_threshold", p.background_threshold},
          {"background_logit", p.background_logit},
          {"logit_scale", p.weights.logit_scale},
          {"key_dim", p.weights.key_dim}};
}

ToyModelParams params_from_json(const nlohmann::json& j) {
  ToyModelParams p;
  if (j.is_null()) return p;
  if (!j.is_object()) throw ConfigError("params must be an object");
  static const std::set<std::string> known = {
      "engine_seed", "vocab_seed", "attention_strength", "smoothing_radius",
      "smoothing_weight", "steps", "background_threshold", "background_logit",
      "logit_scale", "key_dim"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown model parameter '" + key + "'");
    const bool want_int = key == "engine_seed" || key == "vocab_seed" ||
                          key == "smoothing_radius" || key == "steps" || key == "key_dim";
    if (want_int ? !value.is_number_integer() : !value.is_number()) {
      throw ConfigError("params." + key + " must be " +
                        (want_int ? "an integer" : "a number"));
    }
  }
  p.engine_seed = j.value("engine_seed", p.engine_seed);
  p.vocab_seed = j.value("vocab_seed", p.vocab_seed);
  p.attention_strength = j.value("attention_strength", p.attention_strength);
  p.smoothing_radius = j.value("smoothing_radius", p.smoothing_radius);
  p.smoothing_weight = j.value("smoothing_weight", p.smoothing_weight);
  p.steps = j.value("steps", p.steps);
  p.background_threshold = j.value("background_threshold", p.background_threshold);
  p.background_logit = j.value("background_logit", p.background_logit);
  p.weights.logit_scale = j.value("logit_scale", p.weights.logit_scale);
  p.weights.key_dim = j.value("key_dim", p.weights.key_dim);
  p.validate();
  return p;
}

ToyModel::ToyModel(ToyModelParams params) : params_(std::move(params)) {
  params_.validate();
  weights_ = ProjectionWeights::frozen(params_.engine_seed, params_.weights);
  schedule_ = default_schedule(params_.steps);
}

TokenSet ToyModel::prompt(std::span<const std::string> categories) const {
  if (categories.empty()) throw ConfigError("prompt needs at least one category");
  return TokenSet::for_prompt(categories, params_.vocab_seed,
                              params_.background_logit, params_.weights.embedding);
}

ToyPredictor::ToyPredictor(const TokenSet& tokens, const ToyModel& model,
                           const LogitBias* bias, Exec exec)
    : tokens_(tokens),
      model_(model),
      bias_(bias),
      exec_(exec),
      values_(model.weights().token_values(tokens)) {
  if (bias_ && bias_->tokens != tokens.size()) {
    throw GeometryError("logit bias was built for a different token set");
  }
}

std::vector<double> ToyPredictor::target(const LatentGrid& z) const {
  const auto features = block_features(z, exec_);
  const auto attn = cross_attention(
      features, tokens_, model_.weights(),
      bias_ ? bias_->span() : std::span<const double>{}, exec_);
  const int blocks = features.grid.size();
  const int c = z.channels();
  std::vector<double> g(static_cast<std::size_t>(blocks) * c);
  kernels::mix_values(attn.values, values_, blocks, tokens_.size(), c,
                      model_.params().attention_strength, g, exec_);
  const auto& p = model_.params();
  if (p.smoothing_radius > 0 && p.smoothing_weight > 0.0) {
    std::vector<double> blended(g.size());
    kernels::blend_box(g, features.grid.rows, features.grid.cols, c,
                       p.smoothing_radius, p.smoothing_weight, blended, exec_);
    g.swap(blended);
  }
  return g;
}

LatentGrid ToyPredictor::predict(const LatentGrid& z, const StepContext& step) const {
  if (!(step.alpha_bar > 0.0 && step.alpha_bar < 1.0)) {
    throw ConfigError("predictor needs 0 < alpha_bar < 1");
  }
  const auto g = target(z);
  LatentGrid eps(z.height(), z.width(), z.channels(), z.seed(), z.block_size());
  const BlockGrid grid = z.blocks();
  const kernels::BlockLayout layout{grid.rows, grid.cols, z.block_size(), z.channels()};
  kernels::noise_from_target(z.values(), g, layout, step.alpha_bar, eps.values(), exec_);
  return eps;
}

int LabelMap::count(int label) const {
  return static_cast<int>(std::count(labels.begin(), labels.end(), label));
}

LabelMap render_label_map(const LatentGrid& z, const TokenSet& tokens,
                          const ProjectionWeights& w, double theta_bg, Exec exec) {
  const auto features = block_features(z, exec);
  const auto values = w.token_values(tokens);
  const int k = tokens.size();
  const int c = features.channels;
  if (c != w.channels) throw GeometryError("latent channels do not match W_V");

  LabelMap m;
  m.grid = features.grid;
  m.categories = tokens.categories();
  std::vector<int> category_of(k, kBackgroundLabel);
  for (int i = 0, next = 0; i < k; ++i)
    if (!tokens.is_background(i)) category_of[i] = next++;

  std::vector<double> value_norm(k);
  for (int i = 0; i < k; ++i) {
    double n2 = 0.0;
    for (int ch = 0; ch < c; ++ch) n2 += values[static_cast<std::size_t>(i) * c + ch] * values[static_cast<std::size_t>(i) * c + ch];
    value_norm[i] = std::sqrt(n2);
  }

  m.labels.assign(static_cast<std::size_t>(m.grid.size()), kBackgroundLabel);
  for (int b = 0; b < m.grid.size(); ++b) {
    const auto f = features.at(b);
    double fn2 = 0.0;
    for (int ch = 0; ch < c; ++ch) fn2 += static_cast<double>(f[ch]) * f[ch];
    if (fn2 == 0.0) continue;
    const double fn = std::sqrt(fn2);
    int best = -1;
    double best_cos = -INFINITY;
    for (int i = 0; i < k; ++i) {
      if (value_norm[i] == 0.0) continue;
      double dot = 0.0;
      for (int ch = 0; ch < c; ++ch) dot += f[ch] * values[static_cast<std::size_t>(i) * c + ch];
      const double cos = dot / (fn * value_norm[i]);
      if (cos > best_cos) {
        best_cos = cos;
        best = i;
      }
    }
    if (best >= 0 && best_cos >= theta_bg) m.labels[b] = category_of[best];
  }
  return m;
}

GenerationResult generate(const LatentGrid& z_T, const TokenSet& tokens,
                          const ToyModel& model, SamplerKind sampler,
                          const LogitBias* bias, Exec exec) {
  const ToyPredictor predictor(tokens, model, bias, exec);
  GenerationResult r;
  r.step0 = step0_attention(z_T, tokens, model.weights(), exec);
  r.final_latent = run_sampler(z_T, predictor, model.schedule(), sampler, exec);
  r.labels = render_label_map(r.final_latent, tokens, model.weights(),
                              model.params().background_threshold, exec);
  r.provenance.seed = z_T.seed();
  r.provenance.prompt = tokens.categories();
  r.provenance.sampler = sampler;
  r.provenance.steps = model.params().steps;
  return r;
}

bool bitwise_equal(const GenerationResult& a, const GenerationResult& b) {
  return a.final_latent.bitwise_equal(b.final_latent) && a.labels == b.labels &&
         a.step0 == b.step0;
}

nlohmann::json label_map_to_json(const LabelMap& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < m.grid.rows; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < m.grid.cols; ++c) row.push_back(m.at({r, c}));
    rows.push_back(std::move(row));
  }
  return {{"rows", m.grid.rows},
          {"cols", m.grid.cols},
          {"categories", m.categories},
          {"background", kBackgroundLabel},
          {"labels", std::move(rows)}};
}

nlohmann::json generation_to_json(const GenerationResult& r) {
  const auto& p = r.provenance;
  return {{"labels", label_map_to_json(r.labels)},
          {"attention", attention_to_json(r.step0)},
          {"provenance",
           {{"seed", p.seed},
            {"prompt", p.prompt},
            {"sampler", to_string(p.sampler)},
            {"steps", p.steps},
            {"edits", p.edits}}}};
}

void write_label_pgm(std::ostream& out, const LabelMap& m) {
  const int k = std::max<int>(1, static_cast<int>(m.categories.size()));
  out << "P5\n" << m.grid.cols << " " << m.grid.rows << "\n255\n";
  for (const int l : m.labels) {
    const int v = l == kBackgroundLabel ? 0 : (l + 1) * 255 / k;
    out.put(static_cast<char>(static_cast<unsigned char>(v)));
  }
}

namespace {

constexpr std::array<std::array<unsigned char, 3>, 8> kPalette = {{
    {230, 25, 75}, {60, 180, 75}, {255, 225, 25}, {0, 130, 200},
    {245, 130, 48}, {145, 30, 180}, {70, 240, 240}, {240, 50, 230},
}};
constexpr std::array<unsigned char, 3> kBackgroundColor = {24, 24, 24};

void append_png(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), n);
}

}  // namespace

std::string label_png(const LabelMap& m, int cell) {
  if (cell < 1) throw ConfigError("png cell size must be >= 1");
  const int width = m.grid.cols * cell;
  const int height = m.grid.rows * cell;
  std::string out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng initialisation failed");
  }
  std::vector<unsigned char> row(static_cast<std::size_t>(width) * 3);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng write failed");
  }
  png_set_write_fn(png, &out, append_png, nullptr);
  png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int l = m.at({y / cell, x / cell});
      const auto& rgb = l == kBackgroundLabel ? kBackgroundColor : kPalette[l % kPalette.size()];
      std::copy(rgb.begin(), rgb.end(), row.begin() + static_cast<std::ptrdiff_t>(x) * 3);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void write_label_png(const std::string& path, const LabelMap& m, int cell) {
  const auto bytes = label_png(m, cell);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace noiseloom
