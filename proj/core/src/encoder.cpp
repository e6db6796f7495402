#include "pacrf/encoder.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include "pacrf/errors.hpp"

namespace pacrf {

namespace {
constexpr char kEmbeddingMagic[8] = {'P', 'A', 'C', 'R', 'F', 'E', 'M', 'B'};
}

TrainableEncoder::TrainableEncoder(std::vector<std::string> vocabulary,
                                   std::size_t d_h, double mix_lambda)
    : words_(std::move(vocabulary)), d_h_(d_h), lambda_(mix_lambda) {
  if (d_h_ == 0) {
    throw InvalidConfigError("encoder: hidden dimension must be > 0");
  }
  if (lambda_ < 0.0 || lambda_ > 1.0) {
    throw InvalidConfigError("encoder: lambda must be in [0, 1]");
  }
  std::size_t id = 1;
  for (const std::string& w : words_) {
    if (vocab_.emplace(w, id).second) ++id;
  }
}

std::size_t TrainableEncoder::word_id(const std::string& w) const {
  auto it = vocab_.find(w);
  return it == vocab_.end() ? 0 : it->second;
}

void TrainableEncoder::init_parameters(ParameterStore& store, Rng& rng) {
  const std::size_t rows = vocab_.size() + 1;  // row 0 is <unk>
  store.add("encoder.embedding",
            ParameterStore::uniform_init(rows, d_h_, d_h_, rng));
  for (const char* name : {"encoder.attn_wq", "encoder.attn_wk",
                           "encoder.attn_wv"}) {
    store.add(name, ParameterStore::uniform_init(d_h_, d_h_, d_h_, rng));
  }
  for (const char* name : {"encoder.attn_bq", "encoder.attn_bk",
                           "encoder.attn_bv"}) {
    store.add(name, Tensor::zeros(1, d_h_));
  }
}

NodeId TrainableEncoder::encode(Tape& tape, const ParameterStore& store,
                                const TaggedSentence& sentence) const {
  if (sentence.tokens.empty()) {
    throw EmptyInputError("encode: empty sentence");
  }
  std::vector<std::size_t> ids;
  ids.reserve(sentence.tokens.size());
  for (const std::string& w : sentence.tokens) ids.push_back(word_id(w));

  const NodeId table = tape.parameter("encoder.embedding", store);
  const NodeId emb = tape.select_rows(table, ids);

  const NodeId q = tape.add(
      tape.matmul(emb, tape.parameter("encoder.attn_wq", store)),
      tape.parameter("encoder.attn_bq", store));
  const NodeId k = tape.add(
      tape.matmul(emb, tape.parameter("encoder.attn_wk", store)),
      tape.parameter("encoder.attn_bk", store));
  const NodeId v = tape.add(
      tape.matmul(emb, tape.parameter("encoder.attn_wv", store)),
      tape.parameter("encoder.attn_bv", store));

  const NodeId scores =
      tape.scale(tape.matmul(q, tape.transpose(k)),
                 1.0 / std::sqrt(static_cast<double>(d_h_)));
  const NodeId attn = tape.matmul(tape.softmax_rows(scores), v);

  return tape.add(tape.scale(emb, 1.0 - lambda_), tape.scale(attn, lambda_));
}

PrecomputedEncoder PrecomputedEncoder::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open embedding file: " + path);
  }
  char magic[8];
  in.read(magic, 8);
  if (in.gcount() != 8 || std::memcmp(magic, kEmbeddingMagic, 8) != 0) {
    throw ParseError("bad embedding file magic: " + path);
  }

  PrecomputedEncoder enc;
  while (true) {
    std::int64_t id;
    std::uint64_t rows, cols;
    in.read(reinterpret_cast<char*>(&id), sizeof(id));
    if (in.gcount() == 0) break;
    if (in.gcount() != sizeof(id)) {
      throw ParseError("truncated embedding record in " + path);
    }
    in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
    in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
    if (!in) {
      throw ParseError("truncated embedding record in " + path);
    }
    if (rows == 0 || cols == 0 || rows > (1u << 20) || cols > (1u << 20)) {
      throw ParseError("implausible embedding block shape in " + path);
    }
    Tensor block(rows, cols);
    in.read(reinterpret_cast<char*>(block.data().data()),
            static_cast<std::streamsize>(rows * cols * sizeof(double)));
    if (!in) {
      throw ParseError("truncated embedding data in " + path);
    }
    if (enc.d_h_ == 0) {
      enc.d_h_ = cols;
    } else if (cols != enc.d_h_) {
      throw InvalidShapeError(
          "embedding file mixes hidden dimensions: " +
          std::to_string(enc.d_h_) + " vs " + std::to_string(cols));
    }
    enc.blocks_[id] = std::move(block);
  }
  return enc;
}

NodeId PrecomputedEncoder::encode(Tape& tape, const ParameterStore&,
                                  const TaggedSentence& sentence) const {
  if (sentence.tokens.empty()) {
    throw EmptyInputError("encode: empty sentence");
  }
  auto it = blocks_.find(sentence.corpus_id);
  if (it == blocks_.end()) {
    throw MissingEmbeddingError("no stored embedding for sentence id " +
                                std::to_string(sentence.corpus_id));
  }
  const Tensor& block = it->second;
  if (block.rows() != sentence.tokens.size()) {
    throw InvalidShapeError(
        "stored embedding has " + std::to_string(block.rows()) +
        " rows for a sentence of " + std::to_string(sentence.tokens.size()) +
        " tokens");
  }
  return tape.constant(block);
}

void write_embedding_file(
    const std::string& path,
    const std::vector<std::pair<std::int64_t, Tensor>>& blocks) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ParseError("cannot write embedding file: " + path);
  }
  out.write(kEmbeddingMagic, 8);
  for (const auto& [id, block] : blocks) {
    const std::uint64_t rows = block.rows();
    const std::uint64_t cols = block.cols();
    out.write(reinterpret_cast<const char*>(&id), sizeof(id));
    out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
    out.write(reinterpret_cast<const char*>(block.data().data()),
              static_cast<std::streamsize>(block.size() * sizeof(double)));
  }
}

std::vector<std::string> collect_vocabulary(
    const std::vector<const std::vector<TaggedSentence>*>& sources) {
  std::set<std::string> words;
  for (const auto* sentences : sources) {
    for (const TaggedSentence& s : *sentences) {
      words.insert(s.tokens.begin(), s.tokens.end());
    }
  }
  return {words.begin(), words.end()};
}

}  // namespace pacrf
