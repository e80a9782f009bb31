#include "sapar/encoder.hpp"

#include <cmath>
#include <numeric>

namespace sapar {

using ad::Tensor;

namespace {
constexpr double kMaskedLogit = -1e9;
}

AttentionMask build_window_mask(std::size_t length, std::size_t distance, WindowMode mode) {
  AttentionMask m;
  m.size = length;
  m.allow.assign(length * length, 0);
  auto global = [&](std::size_t i) {
    return mode == WindowMode::Relaxed && (i <= 1 || i + 2 >= length);
  };
  for (std::size_t i = 0; i < length; ++i)
    for (std::size_t j = 0; j < length; ++j) {
      const std::size_t gap = i > j ? i - j : j - i;
      if (gap <= distance || global(i) || global(j)) m.allow[i * length + j] = 1;
    }
  return m;
}

namespace {

Tensor mask_logits(const Tensor& logits, const AttentionMask* mask) {
  if (!mask) return logits;
  const std::size_t t = logits.rows();
  if (mask->size != t) throw DimensionError("attention mask size does not match sentence length");
  std::vector<double> add(t * t, 0.0);
  for (std::size_t i = 0; i < t; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < t; ++j) {
      if (mask->allowed(i, j)) any = true;
      else add[i * t + j] = kMaskedLogit;
    }
    if (!any)
      throw std::invalid_argument("empty attention support for query position " + std::to_string(i));
  }
  return ad::add(logits, Tensor::constant(t, t, std::move(add)));
}

Tensor attend(const Tensor& logits, const HeadContext& ctx, std::vector<double>* probs) {
  Tensor p = ad::softmax_rows(mask_logits(logits, ctx.mask));
  if (probs) *probs = p.values();
  if (ctx.train && ctx.attention_dropout > 0.0) p = ad::dropout(p, ctx.attention_dropout, true, *ctx.rng);
  return p;
}

}  // namespace

Tensor single_head(const Tensor& x, const Tensor& positions, const AttentionHead& head,
                   const HeadContext& ctx, std::vector<double>* probs) {
  const std::size_t t = x.rows();
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(head.query_dim()));
  const LayerControl& c = ctx.control;

  if (!head.factored) {
    const HeadWeights& w = head.full;
    const bool position_only = ctx.variant == Variant::PositionOnly;
    if (!position_only && c.disable_content != c.disable_position)
      throw std::invalid_argument(
          "disabling only content or only position attention needs a factored or position-only encoder");
    const bool zero_logits = position_only ? c.disable_position : c.disable_content;
    Tensor logits;
    if (zero_logits) {
      logits = Tensor::zeros(t, t);
    } else {
      const Tensor& qk_source = position_only ? positions : x;
      if (position_only && (!positions.defined() || positions.rows() != t))
        throw DimensionError("position-only attention needs one position embedding per token");
      logits = ad::scale(ad::matmul_nt(ad::matmul(qk_source, w.wq), ad::matmul(qk_source, w.wk)), inv_scale);
    }
    Tensor p = attend(logits, ctx, probs);
    return ad::matmul(ad::matmul(p, ad::matmul(x, w.wv)), w.wo);
  }

  const std::size_t dc = head.content.wq.rows();
  if (x.cols() != dc + head.position.wq.rows())
    throw DimensionError("factored head: input width " + std::to_string(x.cols()) +
                         " does not match content + position halves");
  Tensor xc = ad::slice_cols(x, 0, dc);
  Tensor xp = ad::slice_cols(x, dc, x.cols());

  Tensor logits;
  auto term = [&](const Tensor& part, const HeadWeights& w) {
    return ad::matmul_nt(ad::matmul(part, w.wq), ad::matmul(part, w.wk));
  };
  if (!c.disable_content && !c.disable_position) {
    logits = ad::add(term(xc, head.content), term(xp, head.position));
  } else if (!c.disable_content) {
    logits = term(xc, head.content);
  } else if (!c.disable_position) {
    logits = term(xp, head.position);
  } else {
    logits = Tensor::zeros(t, t);
  }
  logits = ad::scale(logits, inv_scale);
  Tensor p = attend(logits, ctx, probs);
  const Tensor halves[] = {
      ad::matmul(ad::matmul(p, ad::matmul(xc, head.content.wv)), head.content.wo),
      ad::matmul(ad::matmul(p, ad::matmul(xp, head.position.wv)), head.position.wo)};
  return ad::concat_cols(halves);
}

Tensor multi_head(const Tensor& x, const Tensor& positions, const std::vector<AttentionHead>& heads,
                  const HeadContext& ctx, std::vector<std::vector<double>>* probs) {
  if (heads.empty()) throw std::invalid_argument("multi_head: no heads");
  if (probs) probs->assign(heads.size(), {});
  Tensor out;
  for (std::size_t h = 0; h < heads.size(); ++h) {
    Tensor y = single_head(x, positions, heads[h], ctx, probs ? &(*probs)[h] : nullptr);
    out = out.defined() ? ad::add(out, y) : y;
  }
  return out;
}

namespace {

Tensor ff_block(const Tensor& x, const FeedForwardWeights& w, double relu_dropout, bool train, Rng& rng) {
  Tensor h = ad::relu(ad::add_row(ad::matmul(x, w.w1), w.b1));
  h = ad::dropout(h, relu_dropout, train, rng);
  return ad::add_row(ad::matmul(h, w.w2), w.b2);
}

}  // namespace

Tensor feed_forward(const Tensor& x, const FeedForward& ff, double relu_dropout, bool train, Rng& rng) {
  if (!ff.factored) return ff_block(x, ff.full, relu_dropout, train, rng);
  const std::size_t dc = ff.content.w1.rows();
  const Tensor halves[] = {ff_block(ad::slice_cols(x, 0, dc), ff.content, relu_dropout, train, rng),
                           ff_block(ad::slice_cols(x, dc, x.cols()), ff.position, relu_dropout, train, rng)};
  return ad::concat_cols(halves);
}

Tensor compose_input(const Tensor& content, const Tensor& positions, Variant variant) {
  if (content.rows() != positions.rows())
    throw DimensionError("compose_input: " + std::to_string(content.rows()) + " content rows vs " +
                         std::to_string(positions.rows()) + " position rows");
  switch (variant) {
    case Variant::AdditiveUnfactored:
    case Variant::PositionOnly:
    case Variant::BlockSparseAdditive:
      return ad::add(content, positions);
    case Variant::ConcatenativeUnfactored:
    case Variant::Factored: {
      if (content.cols() != positions.cols())
        throw DimensionError("compose_input: content and position halves differ in width");
      const Tensor parts[] = {content, positions};
      return ad::concat_cols(parts);
    }
  }
  throw std::logic_error("unhandled variant");
}

namespace {

HeadWeights make_head_weights(ParameterStore& ps, Rng& rng, const std::string& name,
                              const std::string& suffix, std::size_t d_in, std::size_t d_k,
                              std::size_t d_v, std::size_t d_out) {
  HeadWeights w;
  w.wq = ps.add(name + ".wq" + suffix, d_in, d_k, Init::GlorotUniform, rng);
  w.wk = ps.add(name + ".wk" + suffix, d_in, d_k, Init::GlorotUniform, rng);
  w.wv = ps.add(name + ".wv" + suffix, d_in, d_v, Init::GlorotUniform, rng);
  w.wo = ps.add(name + ".wo" + suffix, d_v, d_out, Init::GlorotUniform, rng);
  return w;
}

FeedForwardWeights make_ff_weights(ParameterStore& ps, Rng& rng, const std::string& name,
                                   const std::string& suffix, std::size_t d_in, std::size_t d_hidden) {
  FeedForwardWeights w;
  w.w1 = ps.add(name + ".w1" + suffix, d_in, d_hidden, Init::GlorotUniform, rng);
  w.b1 = ps.add(name + ".b1" + suffix, 1, d_hidden, Init::Zeros, rng);
  w.w2 = ps.add(name + ".w2" + suffix, d_hidden, d_in, Init::GlorotUniform, rng);
  w.b2 = ps.add(name + ".b2" + suffix, 1, d_in, Init::Zeros, rng);
  return w;
}

}  // namespace

Encoder::Encoder(const EncoderConfig& config, ParameterStore& ps, Rng& rng, const std::string& prefix)
    : config_(config) {
  config_.validate();
  const std::size_t d = config_.d_model;
  position_table_ = ps.add(prefix + ".position_table", config_.max_sentence_length,
                           config_.position_dim(), Init::ScaledNormal, rng);
  const bool factored = config_.factored_weights();
  const std::size_t half = d / 2;
  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    const std::string lname = prefix + ".layer" + std::to_string(l);
    EncoderLayer layer;
    for (std::size_t h = 0; h < config_.num_heads; ++h) {
      const std::string hname = lname + ".head" + std::to_string(h);
      AttentionHead head;
      head.factored = factored;
      if (factored) {
        head.content = make_head_weights(ps, rng, hname, "_c", half, config_.d_k / 2, config_.d_v / 2, half);
        head.position = make_head_weights(ps, rng, hname, "_p", d - half, config_.d_k / 2, config_.d_v / 2, d - half);
      } else {
        head.full = make_head_weights(ps, rng, hname, "", d, config_.d_k, config_.d_v, d);
      }
      layer.heads.push_back(std::move(head));
    }
    layer.attention_norm_gain = ps.add(lname + ".attention_norm.gain", 1, d, Init::Ones, rng);
    layer.attention_norm_bias = ps.add(lname + ".attention_norm.bias", 1, d, Init::Zeros, rng);
    layer.ff.factored = factored;
    if (factored) {
      layer.ff.content = make_ff_weights(ps, rng, lname + ".ff", "_c", half, config_.d_ff / 2);
      layer.ff.position = make_ff_weights(ps, rng, lname + ".ff", "_p", d - half, config_.d_ff / 2);
    } else {
      layer.ff.full = make_ff_weights(ps, rng, lname + ".ff", "", d, config_.d_ff);
    }
    layer.ff_norm_gain = ps.add(lname + ".ff_norm.gain", 1, d, Init::Ones, rng);
    layer.ff_norm_bias = ps.add(lname + ".ff_norm.bias", 1, d, Init::Zeros, rng);
    layers_.push_back(std::move(layer));
  }
}

Tensor Encoder::positions(std::size_t length) const {
  if (length > config_.max_sentence_length)
    throw std::length_error("sequence of " + std::to_string(length) + " tokens exceeds max_sentence_length " +
                            std::to_string(config_.max_sentence_length));
  std::vector<std::size_t> idx(length);
  std::iota(idx.begin(), idx.end(), 0);
  return ad::gather_rows(position_table_, idx);
}

Tensor Encoder::encode(const Tensor& content, const AttentionControl& control, bool train, Rng& rng,
                       AttentionTrace* trace) const {
  const std::size_t t = content.rows();
  Tensor p = positions(t);
  Tensor x = compose_input(content, p, config_.variant);
  if (x.cols() != config_.d_model)
    throw DimensionError("encoder input width " + std::to_string(x.cols()) + " != d_model " +
                         std::to_string(config_.d_model));

  std::optional<AttentionMask> mask;
  if (control.window)
    mask = build_window_mask(t, control.window->first, control.window->second);
  else if (config_.window_distance)
    mask = build_window_mask(t, *config_.window_distance, config_.window_mode);

  if (trace) trace->assign(layers_.size(), {});
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const EncoderLayer& layer = layers_[l];
    HeadContext ctx;
    ctx.variant = config_.variant;
    ctx.control = control.layer(l);
    ctx.mask = mask ? &*mask : nullptr;
    ctx.attention_dropout = config_.attention_dropout;
    ctx.train = train;
    ctx.rng = &rng;
    Tensor attn = multi_head(x, p, layer.heads, ctx, trace ? &(*trace)[l] : nullptr);
    attn = ad::dropout(attn, config_.residual_dropout, train, rng);
    x = ad::layer_norm_rows(ad::add(x, attn), layer.attention_norm_gain, layer.attention_norm_bias);

    Tensor ff = feed_forward(x, layer.ff, config_.relu_dropout, train, rng);
    ff = ad::dropout(ff, config_.residual_dropout, train, rng);
    x = ad::layer_norm_rows(ad::add(x, ff), layer.ff_norm_gain, layer.ff_norm_bias);
  }
  return x;
}

}  // namespace sapar
