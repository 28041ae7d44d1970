#include "noiseloom/attention.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include <json.hpp>

#include "noiseloom/error.hpp"
#include "noiseloom/rng.hpp"

namespace noiseloom {

namespace {

std::uint64_t name_hash(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (const unsigned char ch : name) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<double> random_unit(const CounterRng& rng, std::uint64_t base,
                                int n) {
  std::vector<double> v(n);
  double norm2 = 0.0;
  for (int i = 0; i < n; ++i) {
    v[i] = rng.normal(base + i);
    norm2 += v[i] * v[i];
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& x : v) x *= inv;
  return v;
}

// Gram-Schmidt on Gaussian rows: `rows` orthonormal vectors of length `cols`.
std::vector<double> orthonormal_rows(const CounterRng& rng, std::uint64_t base,
                                     int rows, int cols) {
  std::vector<double> m(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    double* row = &m[static_cast<std::size_t>(r) * cols];
    for (int c = 0; c < cols; ++c) row[c] = rng.normal(base + r * cols + c);
    for (int p = 0; p < r; ++p) {
      const double* prev = &m[static_cast<std::size_t>(p) * cols];
      double dot = 0.0;
      for (int c = 0; c < cols; ++c) dot += row[c] * prev[c];
      for (int c = 0; c < cols; ++c) row[c] -= dot * prev[c];
    }
    double norm2 = 0.0;
    for (int c = 0; c < cols; ++c) norm2 += row[c] * row[c];
    const double inv = 1.0 / std::sqrt(norm2);
    for (int c = 0; c < cols; ++c) row[c] *= inv;
  }
  return m;
}

}  // namespace

TokenSet::TokenSet(std::vector<Token> tokens) : tokens_(std::move(tokens)) {
  std::set<std::string> seen;
  for (const auto& t : tokens_) {
    if (t.name.empty()) throw ConfigError("token names must be non-empty");
    if (!seen.insert(t.name).second) {
      throw ConfigError("duplicate token '" + t.name + "'");
    }
    if (t.embedding.size() != tokens_.front().embedding.size()) {
      throw GeometryError("token embeddings differ in dimension");
    }
    double norm2 = 0.0;
    for (double x : t.embedding) norm2 += x * x;
    if (std::abs(std::sqrt(norm2) - 1.0) > 1e-6) {
      throw ConfigError("embedding of '" + t.name + "' is not unit-norm");
    }
  }
}

std::vector<double> TokenSet::embed(std::string_view name,
                                    std::uint64_t vocab_seed,
                                    const EmbeddingConfig& cfg) {
  if (cfg.value_dims <= 0 || cfg.value_dims >= cfg.dim || cfg.value_norm <= 0.0 ||
      cfg.value_norm >= 1.0) {
    throw ConfigError("invalid embedding config");
  }
  const CounterRng rng(derive_seed(vocab_seed, name_hash(name)), StreamTag::vocab);
  const auto head = random_unit(rng, 0, cfg.value_dims);
  const auto tail = random_unit(rng, 1000, cfg.dim - cfg.value_dims);
  const double tail_norm = std::sqrt(1.0 - cfg.value_norm * cfg.value_norm);
  std::vector<double> e;
  e.reserve(cfg.dim);
  for (double x : head) e.push_back(cfg.value_norm * x);
  for (double x : tail) e.push_back(tail_norm * x);
  return e;
}

TokenSet TokenSet::from_names(std::span<const std::string> names,
                              std::uint64_t vocab_seed,
                              const EmbeddingConfig& cfg) {
  std::vector<Token> tokens;
  for (const auto& n : names) tokens.push_back({n, embed(n, vocab_seed, cfg), 0.0});
  return TokenSet(std::move(tokens));
}

TokenSet TokenSet::for_prompt(std::span<const std::string> categories,
                              std::uint64_t vocab_seed, double background_logit,
                              const EmbeddingConfig& cfg) {
  std::vector<Token> tokens;
  const std::string bg(kBackgroundToken);
  tokens.push_back({bg, embed(bg, vocab_seed, cfg), background_logit});
  for (const auto& n : categories) {
    if (n == bg) throw ConfigError("'<bg>' is reserved");
    tokens.push_back({n, embed(n, vocab_seed, cfg), 0.0});
  }
  return TokenSet(std::move(tokens));
}

std::optional<int> TokenSet::index_of(std::string_view name) const {
  for (int i = 0; i < size(); ++i)
    if (tokens_[i].name == name) return i;
  return std::nullopt;
}

std::vector<std::string> TokenSet::names() const {
  std::vector<std::string> out;
  for (const auto& t : tokens_) out.push_back(t.name);
  return out;
}

std::vector<std::string> TokenSet::categories() const {
  std::vector<std::string> out;
  for (const auto& t : tokens_)
    if (t.name != kBackgroundToken) out.push_back(t.name);
  return out;
}

ProjectionWeights ProjectionWeights::frozen(std::uint64_t engine_seed,
                                            const WeightConfig& cfg) {
  const int c = cfg.channels;
  const int d = cfg.key_dim;
  const int dt = cfg.embedding.dim;
  if (c <= 0 || d < c || cfg.embedding.value_dims != c || cfg.logit_scale <= 0.0) {
    throw ConfigError(
        "weight config needs key_dim >= channels, value_dims == channels and "
        "a positive logit scale");
  }
  const CounterRng rng(engine_seed, StreamTag::weights);
  ProjectionWeights w;
  w.channels = c;
  w.token_dim = dt;
  w.key_dim = d;

  // W_V reads the leading value block of an embedding through a random
  // rotation, rescaled so every token's value vector has unit norm.
  const auto rot = orthonormal_rows(rng, 0, c, c);
  w.value.assign(static_cast<std::size_t>(dt) * c, 0.0);
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < c; ++j)
      w.value[static_cast<std::size_t>(i) * c + j] =
          rot[static_cast<std::size_t>(i) * c + j] / cfg.embedding.value_norm;

  w.query = orthonormal_rows(rng, 1u << 20, c, d);
  const double scale = std::sqrt(cfg.logit_scale * std::sqrt(static_cast<double>(d)));
  for (auto& x : w.query) x *= scale;

  w.key.assign(static_cast<std::size_t>(dt) * d, 0.0);
  for (int i = 0; i < dt; ++i)
    for (int j = 0; j < d; ++j) {
      double acc = 0.0;
      for (int k = 0; k < c; ++k)
        acc += w.value[static_cast<std::size_t>(i) * c + k] *
               w.query[static_cast<std::size_t>(k) * d + j];
      w.key[static_cast<std::size_t>(i) * d + j] = acc;
    }
  return w;
}

namespace {

std::vector<double> project(const TokenSet& tokens, const std::vector<double>& m,
                            int rows, int cols) {
  if (tokens.dim() != rows) {
    throw GeometryError("token dimension " + std::to_string(tokens.dim()) +
                        " does not match projection rows " + std::to_string(rows));
  }
  std::vector<double> out(static_cast<std::size_t>(tokens.size()) * cols);
  for (int t = 0; t < tokens.size(); ++t) {
    const auto& e = tokens[t].embedding;
    for (int j = 0; j < cols; ++j) {
      double acc = 0.0;
      for (int i = 0; i < rows; ++i) acc += e[i] * m[static_cast<std::size_t>(i) * cols + j];
      out[static_cast<std::size_t>(t) * cols + j] = acc;
    }
  }
  return out;
}

}  // namespace

std::vector<double> ProjectionWeights::token_keys(const TokenSet& tokens) const {
  return project(tokens, key, token_dim, key_dim);
}

std::vector<double> ProjectionWeights::token_values(const TokenSet& tokens) const {
  return project(tokens, value, token_dim, channels);
}

std::vector<double> AttentionMap::column(int token) const {
  std::vector<double> out(static_cast<std::size_t>(grid.size()));
  for (int b = 0; b < grid.size(); ++b) out[b] = at(b, token);
  return out;
}

std::optional<int> AttentionMap::token_index(std::string_view name) const {
  for (int i = 0; i < token_count(); ++i)
    if (tokens[i] == name) return i;
  return std::nullopt;
}

FeatureGrid block_features(const LatentGrid& z, int block_size, Exec exec) {
  check_geometry(z.height(), z.width(), z.channels(), block_size);
  FeatureGrid f;
  f.grid = {z.height() / block_size, z.width() / block_size};
  f.channels = z.channels();
  f.values.resize(static_cast<std::size_t>(f.grid.size()) * f.channels);
  const kernels::BlockLayout layout{f.grid.rows, f.grid.cols, block_size, z.channels()};
  kernels::block_means(z.values(), layout, f.values, exec);
  return f;
}

AttentionMap cross_attention(const FeatureGrid& features, const TokenSet& tokens,
                             const ProjectionWeights& w,
                             std::span<const double> bias, Exec exec) {
  if (features.channels != w.channels) {
    throw GeometryError("feature channels " + std::to_string(features.channels) +
                        " do not match W_Q rows " + std::to_string(w.channels));
  }
  if (tokens.empty()) throw GeometryError("cross-attention needs at least one token");
  if (w.key_dim > 256) throw GeometryError("key dimension above 256 is unsupported");
  const int blocks = features.grid.size();
  const int k = tokens.size();
  if (!bias.empty() && bias.size() != static_cast<std::size_t>(blocks) * k) {
    throw GeometryError("logit bias shape does not match blocks x tokens");
  }
  const auto keys = w.token_keys(tokens);
  std::vector<double> priors(k);
  for (int i = 0; i < k; ++i) priors[i] = tokens[i].prior;

  AttentionMap map;
  map.grid = features.grid;
  map.tokens = tokens.names();
  map.values.resize(static_cast<std::size_t>(blocks) * k);
  const kernels::AttentionProblem p{blocks, w.channels, w.key_dim, k,
                                    w.query, keys, priors, bias};
  kernels::attention_rows(features.values, p, map.values, exec);
  return map;
}

AttentionMap step0_attention(const LatentGrid& z_T, const TokenSet& tokens,
                             const ProjectionWeights& w, Exec exec) {
  return cross_attention(block_features(z_T, exec), tokens, w, {}, exec);
}

AttentionMap permute_rows(const AttentionMap& map, const SwapList& swaps) {
  validate_swaps(map.grid, swaps);
  AttentionMap out = map;
  permute_blocks<double>(out.values, map.tokens.size(), map.grid, swaps);
  return out;
}

void write_attention_pgm(std::ostream& out, const AttentionMap& map, int token) {
  if (token < 0 || token >= map.token_count()) {
    throw GeometryError("token index out of range");
  }
  out << "P5\n" << map.grid.cols << " " << map.grid.rows << "\n255\n";
  for (int b = 0; b < map.grid.size(); ++b) {
    const double v = std::clamp(map.at(b, token), 0.0, 1.0);
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
  }
}

nlohmann::json attention_token_json(const AttentionMap& map, int token) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < map.grid.rows; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < map.grid.cols; ++c) row.push_back(map.at(BlockCoord{r, c}, token));
    rows.push_back(std::move(row));
  }
  return {{"token", map.tokens.at(token)},
          {"rows", map.grid.rows},
          {"cols", map.grid.cols},
          {"values", std::move(rows)}};
}

nlohmann::json attention_to_json(const AttentionMap& map) {
  nlohmann::json per_token = nlohmann::json::object();
  for (int i = 0; i < map.token_count(); ++i)
    per_token[map.tokens[i]] = attention_token_json(map, i)["values"];
  return {{"rows", map.grid.rows},
          {"cols", map.grid.cols},
          {"tokens", map.tokens},
          {"maps", std::move(per_token)}};
}

}  // namespace noiseloom
