#include "sapar/lexical.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace sapar {

using ad::Tensor;

std::vector<std::size_t> char_concat_ids(std::span<const std::size_t> chars, std::size_t prefix_len,
                                         std::size_t suffix_len) {
  std::vector<std::size_t> ids(prefix_len + suffix_len, SymbolTable::padding);
  for (std::size_t k = 0; k < prefix_len && k < chars.size(); ++k) ids[k] = chars[k];
  const std::size_t take = std::min(suffix_len, chars.size());
  for (std::size_t k = 0; k < take; ++k)
    ids[prefix_len + suffix_len - take + k] = chars[chars.size() - take + k];
  return ids;
}

Tensor char_concat(const Tensor& char_table, const std::vector<std::vector<std::size_t>>& words,
                   std::size_t prefix_len, std::size_t suffix_len) {
  const std::size_t slots = prefix_len + suffix_len;
  std::vector<std::size_t> rows;
  rows.reserve(words.size() * slots);
  for (const auto& w : words) {
    auto ids = char_concat_ids(w, prefix_len, suffix_len);
    rows.insert(rows.end(), ids.begin(), ids.end());
  }
  Tensor stacked = ad::gather_rows(char_table, rows);
  return ad::reshape(stacked, words.size(), slots * char_table.cols());
}

CharLstm::CharLstm(ParameterStore& ps, Rng& rng, const std::string& prefix, std::size_t num_chars,
                   std::size_t char_dim, std::size_t hidden, std::size_t out_dim)
    : hidden_(hidden) {
  char_table_ = ps.add(prefix + ".char_table", num_chars, char_dim, Init::ScaledNormal, rng);
  forward_w_ = ps.add(prefix + ".forward.w", char_dim + hidden, 4 * hidden, Init::GlorotUniform, rng);
  forward_b_ = ps.add(prefix + ".forward.b", 1, 4 * hidden, Init::Zeros, rng);
  backward_w_ = ps.add(prefix + ".backward.w", char_dim + hidden, 4 * hidden, Init::GlorotUniform, rng);
  backward_b_ = ps.add(prefix + ".backward.b", 1, 4 * hidden, Init::Zeros, rng);
  proj_w_ = ps.add(prefix + ".proj.w", 2 * hidden, out_dim, Init::GlorotUniform, rng);
  proj_b_ = ps.add(prefix + ".proj.b", 1, out_dim, Init::Zeros, rng);
}

// `embedded` stacks step-major rows: row t * W + w is character t of word w
// (already reversed for the backward direction, padded past each length).
Tensor CharLstm::run_direction(const Tensor& embedded, const std::vector<std::size_t>& lengths,
                               std::size_t max_len, const Tensor& w, const Tensor& b) const {
  const std::size_t n = lengths.size();
  const std::size_t h = hidden_;
  Tensor state = Tensor::zeros(n, h);
  Tensor cell = Tensor::zeros(n, h);
  for (std::size_t t = 0; t < max_len; ++t) {
    Tensor x = ad::slice_rows(embedded, t * n, (t + 1) * n);
    const Tensor in[] = {x, state};
    Tensor gates = ad::add_row(ad::matmul(ad::concat_cols(in), w), b);
    Tensor i = ad::sigmoid(ad::slice_cols(gates, 0, h));
    Tensor f = ad::sigmoid(ad::slice_cols(gates, h, 2 * h));
    Tensor g = ad::tanh(ad::slice_cols(gates, 2 * h, 3 * h));
    Tensor o = ad::sigmoid(ad::slice_cols(gates, 3 * h, 4 * h));
    Tensor next_cell = ad::add(ad::mul(f, cell), ad::mul(i, g));
    Tensor next_state = ad::mul(o, ad::tanh(next_cell));

    const bool all_active = std::all_of(lengths.begin(), lengths.end(), [t](std::size_t l) { return t < l; });
    if (all_active) {
      state = next_state;
      cell = next_cell;
      continue;
    }
    // Finished words keep their last state.
    std::vector<double> keep(n * h), hold(n * h);
    for (std::size_t r = 0; r < n; ++r) {
      const double active = t < lengths[r] ? 1.0 : 0.0;
      std::fill_n(keep.begin() + static_cast<std::ptrdiff_t>(r * h), h, active);
      std::fill_n(hold.begin() + static_cast<std::ptrdiff_t>(r * h), h, 1.0 - active);
    }
    Tensor km = Tensor::constant(n, h, keep);
    Tensor hm = Tensor::constant(n, h, hold);
    state = ad::add(ad::mul(km, next_state), ad::mul(hm, state));
    cell = ad::add(ad::mul(km, next_cell), ad::mul(hm, cell));
  }
  return state;
}

Tensor CharLstm::encode(const std::vector<std::vector<std::size_t>>& words, double char_dropout, bool train,
                        Rng& rng) const {
  if (words.empty()) throw std::invalid_argument("char_lstm: no words");
  const std::size_t n = words.size();
  std::vector<std::size_t> lengths(n);
  std::size_t max_len = 0;
  for (std::size_t r = 0; r < n; ++r) {
    if (words[r].empty()) throw std::invalid_argument("char_lstm: empty word");
    lengths[r] = words[r].size();
    max_len = std::max(max_len, lengths[r]);
  }
  std::vector<std::size_t> fwd(max_len * n, SymbolTable::padding), bwd(max_len * n, SymbolTable::padding);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t t = 0; t < lengths[r]; ++t) {
      fwd[t * n + r] = words[r][t];
      bwd[t * n + r] = words[r][lengths[r] - 1 - t];
    }
  Tensor ef = ad::dropout(ad::gather_rows(char_table_, fwd), char_dropout, train, rng);
  Tensor eb = ad::dropout(ad::gather_rows(char_table_, bwd), char_dropout, train, rng);
  const Tensor finals[] = {run_direction(ef, lengths, max_len, forward_w_, forward_b_),
                           run_direction(eb, lengths, max_len, backward_w_, backward_b_)};
  return ad::add_row(ad::matmul(ad::concat_cols(finals), proj_w_), proj_b_);
}

ExternalVectors read_external_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open external vectors '" + path.string() + "'");
  ExternalVectors v;
  std::size_t count = 0;
  if (!(in >> count >> v.dim) || v.dim == 0)
    throw std::runtime_error(path.string() + ": malformed header, expected 'num_sentences dim'");
  v.sentences.resize(count);
  for (std::size_t s = 0; s < count; ++s) {
    std::size_t tokens = 0;
    if (!(in >> tokens)) throw std::runtime_error(path.string() + ": missing token count for sentence " + std::to_string(s));
    auto& rows = v.sentences[s];
    rows.assign(tokens, std::vector<double>(v.dim));
    for (auto& row : rows)
      for (auto& x : row)
        if (!(in >> x))
          throw std::runtime_error(path.string() + ": truncated vectors in sentence " + std::to_string(s));
  }
  return v;
}

void write_external_vectors(const std::filesystem::path& path, const ExternalVectors& v) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write external vectors '" + path.string() + "'");
  out << std::setprecision(17);
  out << v.sentences.size() << ' ' << v.dim << '\n';
  for (const auto& s : v.sentences) {
    out << s.size() << '\n';
    for (const auto& row : s) {
      for (std::size_t k = 0; k < row.size(); ++k) out << (k ? " " : "") << row[k];
      out << '\n';
    }
  }
}

void attach_external_vectors(std::vector<Sentence>& sentences, ExternalVectors vectors) {
  if (vectors.sentences.size() != sentences.size())
    throw std::invalid_argument("external vectors cover " + std::to_string(vectors.sentences.size()) +
                                " sentences, input has " + std::to_string(sentences.size()));
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (vectors.sentences[i].size() != sentences[i].size())
      throw std::invalid_argument("sentence " + std::to_string(i) + ": " +
                                  std::to_string(vectors.sentences[i].size()) + " vectors for " +
                                  std::to_string(sentences[i].size()) + " tokens");
    sentences[i].external = std::move(vectors.sentences[i]);
  }
}

LexicalModel::LexicalModel(const LexicalConfig& config, std::size_t content_dim, const Vocabulary& vocab,
                           ParameterStore& ps, Rng& rng, const std::string& prefix)
    : config_(config), content_dim_(content_dim), vocab_(vocab) {
  config_.validate();
  if (uses_word_table())
    word_table_ = ps.add(prefix + ".word_table", vocab.words.size(), content_dim, Init::ScaledNormal, rng);
  switch (config_.mode) {
    case LexicalMode::Tags:
      tag_table_ = ps.add(prefix + ".tag_table", vocab.tags.size(), content_dim, Init::ScaledNormal, rng);
      break;
    case LexicalMode::CharLstm:
      char_lstm_ = CharLstm(ps, rng, prefix + ".char_lstm", vocab.chars.size(), config_.resolved_char_dim(),
                            config_.resolved_lstm_hidden(content_dim), content_dim);
      break;
    case LexicalMode::CharConcat:
      char_table_ = ps.add(prefix + ".char_table", vocab.chars.size(), config_.resolved_char_dim(),
                           Init::ScaledNormal, rng);
      if (config_.char_concat_dim() != content_dim)
        concat_proj_ = ps.add(prefix + ".char_concat_proj", config_.char_concat_dim(), content_dim,
                              Init::GlorotUniform, rng);
      break;
    case LexicalMode::External:
      external_proj_ = ps.add(prefix + ".external_proj", config_.external_dim, content_dim, Init::GlorotUniform, rng);
      external_boundary_ = ps.add(prefix + ".external_boundary", 2, content_dim, Init::ScaledNormal, rng);
      break;
  }
}

bool LexicalModel::uses_word_table() const {
  return config_.use_word_embeddings && config_.mode != LexicalMode::External;
}

std::vector<std::vector<std::size_t>> LexicalModel::token_chars(const Sentence& s) const {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(s.size() + 2);
  out.push_back({SymbolTable::start});
  for (const auto& w : s.words) {
    auto ids = vocab_.char_ids(w);
    if (ids.empty()) ids.push_back(SymbolTable::unknown);
    out.push_back(std::move(ids));
  }
  out.push_back({SymbolTable::stop});
  return out;
}

std::vector<Tensor> LexicalModel::represent(std::span<const Sentence> batch, bool train, Rng& rng) const {
  // Subword representations are computed once per distinct token in the batch.
  std::map<std::vector<std::size_t>, std::size_t> unique;
  std::vector<std::vector<std::size_t>> unique_words;
  std::vector<std::vector<std::size_t>> rows_per_sentence(batch.size());
  const bool subword = config_.mode == LexicalMode::CharLstm || config_.mode == LexicalMode::CharConcat;
  if (subword) {
    for (std::size_t s = 0; s < batch.size(); ++s)
      for (auto& chars : token_chars(batch[s])) {
        auto [it, fresh] = unique.emplace(chars, unique_words.size());
        if (fresh) unique_words.push_back(chars);
        rows_per_sentence[s].push_back(it->second);
      }
  }
  Tensor morph;
  if (config_.mode == LexicalMode::CharLstm) {
    morph = char_lstm_.encode(unique_words, config_.char_dropout, train, rng);
  } else if (config_.mode == LexicalMode::CharConcat) {
    morph = char_concat(char_table_, unique_words, config_.prefix_len, config_.suffix_len);
    if (concat_proj_.defined()) morph = ad::matmul(morph, concat_proj_);
  }

  std::vector<Tensor> out;
  out.reserve(batch.size());
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const Sentence& sent = batch[s];
    if (sent.size() == 0) throw std::invalid_argument("cannot represent an empty sentence");
    Tensor rep;
    switch (config_.mode) {
      case LexicalMode::Tags: {
        if (!sent.tagged() || sent.tags.size() != sent.size())
          throw std::invalid_argument("sentence " + std::to_string(s) +
                                      " is missing POS tags, which the 'tags' lexical mode requires");
        std::vector<std::size_t> ids{SymbolTable::start};
        for (const auto& t : sent.tags) ids.push_back(vocab_.tags.id(t));
        ids.push_back(SymbolTable::stop);
        rep = ad::dropout(ad::embedding_lookup(tag_table_, ids), config_.tag_dropout, train, rng);
        break;
      }
      case LexicalMode::CharLstm:
      case LexicalMode::CharConcat:
        rep = ad::dropout(ad::gather_rows(morph, rows_per_sentence[s]), config_.morph_dropout, train, rng);
        break;
      case LexicalMode::External: {
        if (sent.external.size() != sent.size())
          throw std::invalid_argument("sentence " + std::to_string(s) + " has " +
                                      std::to_string(sent.external.size()) + " external vectors for " +
                                      std::to_string(sent.size()) + " words");
        std::vector<double> flat;
        flat.reserve(sent.size() * config_.external_dim);
        for (const auto& v : sent.external) {
          if (v.size() != config_.external_dim)
            throw std::invalid_argument("external vector of width " + std::to_string(v.size()) +
                                        ", expected " + std::to_string(config_.external_dim));
          flat.insert(flat.end(), v.begin(), v.end());
        }
        Tensor projected = ad::matmul(Tensor::constant(sent.size(), config_.external_dim, std::move(flat)),
                                      external_proj_);
        const Tensor parts[] = {ad::slice_rows(external_boundary_, 0, 1), projected,
                                ad::slice_rows(external_boundary_, 1, 2)};
        rep = ad::concat_rows(parts);
        break;
      }
    }
    if (uses_word_table()) {
      std::vector<std::size_t> ids{SymbolTable::start};
      for (const auto& w : sent.words) ids.push_back(vocab_.words.id(w));
      ids.push_back(SymbolTable::stop);
      Tensor words = ad::dropout_rows(ad::embedding_lookup(word_table_, ids), config_.word_dropout, train, rng);
      rep = ad::add(words, rep);
    }
    out.push_back(std::move(rep));
  }
  return out;
}

Tensor LexicalModel::represent(const Sentence& s, bool train, Rng& rng) const {
  return represent(std::span<const Sentence>(&s, 1), train, rng).front();
}

}  // namespace sapar
