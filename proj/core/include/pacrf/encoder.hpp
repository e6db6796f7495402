#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pacrf/labels.hpp"
#include "pacrf/tape.hpp"

namespace pacrf {

// Token-sequence to hidden-matrix interface. encode() returns an n x d_h
// node on the given tape.
class Encoder {
 public:
  virtual ~Encoder() = default;
  virtual std::size_t hidden_dim() const = 0;
  virtual void init_parameters(ParameterStore& store, Rng& rng) = 0;
  virtual NodeId encode(Tape& tape, const ParameterStore& store,
                        const TaggedSentence& sentence) const = 0;
};

// Embedding lookup blended with one self-attention pass:
//   row_i = (1 - lambda) * e(w_i) + lambda * attn_i
// Unknown words share one trainable vector. The attention uses scaled dot
// product (1/sqrt(d_h)).
class TrainableEncoder : public Encoder {
 public:
  TrainableEncoder(std::vector<std::string> vocabulary, std::size_t d_h,
                   double mix_lambda);

  std::size_t hidden_dim() const override { return d_h_; }
  void init_parameters(ParameterStore& store, Rng& rng) override;
  NodeId encode(Tape& tape, const ParameterStore& store,
                const TaggedSentence& sentence) const override;

  std::size_t vocab_size() const { return vocab_.size() + 1; }  // + <unk>
  const std::vector<std::string>& vocabulary() const { return words_; }
  double mix_lambda() const { return lambda_; }

 private:
  std::size_t word_id(const std::string& w) const;

  std::vector<std::string> words_;
  std::map<std::string, std::size_t> vocab_;  // word -> id (1-based; 0 = unk)
  std::size_t d_h_;
  double lambda_;
};

// Fixed per-sentence hidden matrices loaded from disk, keyed by corpus
// sentence id. Rows are constants: no gradient flows into them.
class PrecomputedEncoder : public Encoder {
 public:
  static PrecomputedEncoder load(const std::string& path);

  std::size_t hidden_dim() const override { return d_h_; }
  void init_parameters(ParameterStore&, Rng&) override {}
  NodeId encode(Tape& tape, const ParameterStore& store,
                const TaggedSentence& sentence) const override;

  std::size_t count() const { return blocks_.size(); }

 private:
  std::map<std::int64_t, Tensor> blocks_;
  std::size_t d_h_ = 0;
};

// Binary container: 8-byte magic "PACRFEMB", then per sentence an i64 id,
// u64 row count, u64 column count and row-major doubles, little-endian.
void write_embedding_file(
    const std::string& path,
    const std::vector<std::pair<std::int64_t, Tensor>>& blocks);

// Sorted unique word list from corpus tokens, for building vocabularies.
std::vector<std::string> collect_vocabulary(
    const std::vector<const std::vector<TaggedSentence>*>& sources);

}  // namespace pacrf
