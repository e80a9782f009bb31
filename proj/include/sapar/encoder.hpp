#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sapar/autodiff.hpp"
#include "sapar/config.hpp"
#include "sapar/parameters.hpp"

namespace sapar {

inline constexpr std::size_t kUnboundedDistance = std::numeric_limits<std::size_t>::max();

/// Which query/key pairs may attend. Row-major T x T, 1 = allowed.
struct AttentionMask {
  std::size_t size = 0;
  std::vector<std::uint8_t> allow;

  bool allowed(std::size_t query, std::size_t key) const { return allow[query * size + key] != 0; }
};

/// Strict: |i - j| <= distance. Relaxed additionally opens every row and
/// column of positions 0, 1, T-2 and T-1 (start token, first word, last
/// word, stop token).
AttentionMask build_window_mask(std::size_t length, std::size_t distance, WindowMode mode);

struct LayerControl {
  bool disable_content = false;
  bool disable_position = false;
};

/// Test-time perturbations of the attention mechanism.
struct AttentionControl {
  std::vector<LayerControl> layers;  // missing entries mean "nothing disabled"
  std::optional<std::pair<std::size_t, WindowMode>> window;

  LayerControl layer(std::size_t index) const {
    return index < layers.size() ? layers[index] : LayerControl{};
  }
};

struct HeadWeights {
  ad::Tensor wq;  // [d_in x d_k]
  ad::Tensor wk;  // [d_in x d_k]
  ad::Tensor wv;  // [d_in x d_v]
  ad::Tensor wo;  // [d_v x d_out]
};

/// Unfactored heads use `full`; factored heads use the content and position
/// halves, which amounts to block-diagonal full matrices.
struct AttentionHead {
  bool factored = false;
  HeadWeights full;
  HeadWeights content;
  HeadWeights position;

  std::size_t query_dim() const {
    return factored ? content.wq.cols() + position.wq.cols() : full.wq.cols();
  }
};

struct HeadContext {
  Variant variant = Variant::AdditiveUnfactored;
  LayerControl control;
  const AttentionMask* mask = nullptr;  // null: everything allowed
  double attention_dropout = 0.0;
  bool train = false;
  Rng* rng = nullptr;
};

/// One attention head over the rows of `x`. `positions` holds the position
/// embeddings and is only read by the position-only variant. When `probs` is
/// non-null it receives the T x T attention distribution.
ad::Tensor single_head(const ad::Tensor& x, const ad::Tensor& positions, const AttentionHead& head,
                       const HeadContext& ctx, std::vector<double>* probs = nullptr);

/// Sum of the per-head outputs.
ad::Tensor multi_head(const ad::Tensor& x, const ad::Tensor& positions,
                      const std::vector<AttentionHead>& heads, const HeadContext& ctx,
                      std::vector<std::vector<double>>* probs = nullptr);

struct FeedForwardWeights {
  ad::Tensor w1;  // [d_in x d_hidden]
  ad::Tensor b1;  // [1 x d_hidden]
  ad::Tensor w2;  // [d_hidden x d_in]
  ad::Tensor b2;  // [1 x d_in]
};

struct FeedForward {
  bool factored = false;
  FeedForwardWeights full;
  FeedForwardWeights content;
  FeedForwardWeights position;
};

/// Position-wise W2 relu(W1 x + b1) + b2; factored runs independent copies on
/// the two halves of each row.
ad::Tensor feed_forward(const ad::Tensor& x, const FeedForward& ff, double relu_dropout, bool train,
                        Rng& rng);

/// Input vectors: elementwise sum for additive variants, [content; position]
/// for concatenative ones.
ad::Tensor compose_input(const ad::Tensor& content, const ad::Tensor& positions, Variant variant);

struct EncoderLayer {
  std::vector<AttentionHead> heads;
  ad::Tensor attention_norm_gain;
  ad::Tensor attention_norm_bias;
  FeedForward ff;
  ad::Tensor ff_norm_gain;
  ad::Tensor ff_norm_bias;
};

/// Attention distributions recorded during encode: [layer][head] -> T x T.
using AttentionTrace = std::vector<std::vector<std::vector<double>>>;

class Encoder {
 public:
  Encoder() = default;
  Encoder(const EncoderConfig& config, ParameterStore& params, Rng& rng,
          const std::string& prefix = "encoder");

  const EncoderConfig& config() const { return config_; }
  std::vector<EncoderLayer>& layers() { return layers_; }
  const std::vector<EncoderLayer>& layers() const { return layers_; }
  const ad::Tensor& position_table() const { return position_table_; }

  /// First `length` rows of the learned position table.
  ad::Tensor positions(std::size_t length) const;

  /// `content` is [T x content_dim] including the start and stop rows.
  ad::Tensor encode(const ad::Tensor& content, const AttentionControl& control, bool train, Rng& rng,
                    AttentionTrace* trace = nullptr) const;

 private:
  EncoderConfig config_;
  ad::Tensor position_table_;
  std::vector<EncoderLayer> layers_;
};

}  // namespace sapar
