#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "noiseloom/kernels.hpp"
#include "noiseloom/latent.hpp"

namespace noiseloom {

// Reserved prompt token acting as the attention sink for "nothing here".
inline constexpr std::string_view kBackgroundToken = "<bg>";

struct EmbeddingConfig {
  int dim = 16;            // d_tok
  int value_dims = 4;      // leading coordinates read by W_V; equals latent channels
  double value_norm = 0.5; // norm of the leading block of every embedding

  friend bool operator==(const EmbeddingConfig&, const EmbeddingConfig&) = default;
};

struct Token {
  std::string name;
  std::vector<double> embedding;
  double prior = 0.0;  // additive logit, nonzero only for the background sink
};

class TokenSet {
 public:
  TokenSet() = default;
  // Takes explicit embeddings; they must be unit-norm and names unique.
  explicit TokenSet(std::vector<Token> tokens);

  // Deterministic pseudo-random unit embeddings keyed by (name, vocab_seed).
  static TokenSet from_names(std::span<const std::string> names,
                             std::uint64_t vocab_seed,
                             const EmbeddingConfig& cfg = {});
  // Prompt as used by the generator: the background sink followed by the
  // given categories.
  static TokenSet for_prompt(std::span<const std::string> categories,
                             std::uint64_t vocab_seed, double background_logit,
                             const EmbeddingConfig& cfg = {});

  static std::vector<double> embed(std::string_view name,
                                   std::uint64_t vocab_seed,
                                   const EmbeddingConfig& cfg = {});

  int size() const { return static_cast<int>(tokens_.size()); }
  bool empty() const { return tokens_.empty(); }
  int dim() const { return tokens_.empty() ? 0 : static_cast<int>(tokens_[0].embedding.size()); }
  const Token& operator[](int i) const { return tokens_.at(i); }
  std::optional<int> index_of(std::string_view name) const;
  bool is_background(int i) const { return tokens_.at(i).name == kBackgroundToken; }
  std::vector<std::string> names() const;
  // Category names, background sink excluded.
  std::vector<std::string> categories() const;

 private:
  std::vector<Token> tokens_;
};

struct WeightConfig {
  int channels = kDefaultChannels;
  int key_dim = 16;          // d
  double logit_scale = 16.0; // logits equal logit_scale * <feature, value>
  EmbeddingConfig embedding;

  friend bool operator==(const WeightConfig&, const WeightConfig&) = default;
};

// Frozen cross-attention projections. W_Q has orthogonal rows scaled so that
// W_Q W_Q^T = logit_scale*sqrt(d)*I, and W_K = W_V W_Q.
struct ProjectionWeights {
  int channels = 0;
  int token_dim = 0;
  int key_dim = 0;
  std::vector<double> query;  // channels x key_dim
  std::vector<double> key;    // token_dim x key_dim
  std::vector<double> value;  // token_dim x channels

  static ProjectionWeights frozen(std::uint64_t engine_seed,
                                  const WeightConfig& cfg = {});

  std::vector<double> token_keys(const TokenSet& tokens) const;    // K x d
  std::vector<double> token_values(const TokenSet& tokens) const;  // K x C
};

struct FeatureGrid {
  BlockGrid grid;
  int channels = 0;
  std::vector<float> values;  // block-major, channels innermost

  std::span<const float> at(int block) const {
    return std::span<const float>(values).subspan(
        static_cast<std::size_t>(block) * channels, channels);
  }
};

struct AttentionMap {
  BlockGrid grid;
  std::vector<std::string> tokens;
  std::vector<double> values;  // blocks x tokens, rows sum to 1

  int token_count() const { return static_cast<int>(tokens.size()); }
  double at(int block, int token) const {
    return values[static_cast<std::size_t>(block) * tokens.size() + token];
  }
  double at(BlockCoord c, int token) const { return at(grid.index(c), token); }
  std::span<const double> row(int block) const {
    return std::span<const double>(values).subspan(
        static_cast<std::size_t>(block) * tokens.size(), tokens.size());
  }
  std::vector<double> column(int token) const;
  std::optional<int> token_index(std::string_view name) const;

  friend bool operator==(const AttentionMap&, const AttentionMap&) = default;
};

FeatureGrid block_features(const LatentGrid& z, int block_size,
                           Exec exec = Exec::parallel);
inline FeatureGrid block_features(const LatentGrid& z, Exec exec = Exec::parallel) {
  return block_features(z, z.block_size(), exec);
}

// bias, when non-empty, is blocks x tokens and added before the softmax.
AttentionMap cross_attention(const FeatureGrid& features,
                             const TokenSet& tokens,
                             const ProjectionWeights& w,
                             std::span<const double> bias = {},
                             Exec exec = Exec::parallel);

// Attention of the initial latent: the generation tendency of every block.
AttentionMap step0_attention(const LatentGrid& z_T, const TokenSet& tokens,
                             const ProjectionWeights& w,
                             Exec exec = Exec::parallel);

AttentionMap permute_rows(const AttentionMap& map, const SwapList& swaps);

// One binary PGM per token, values scaled by 255.
void write_attention_pgm(std::ostream& out, const AttentionMap& map, int token);
nlohmann::json attention_to_json(const AttentionMap& map);
nlohmann::json attention_token_json(const AttentionMap& map, int token);

}  // namespace noiseloom
