#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pacrf/labels.hpp"
#include "pacrf/rng.hpp"

namespace pacrf {

// Immutable sentence collection over a global label set, with a per-type
// index of sentences that contain at least one trigger of that type.
struct Corpus {
  LabelSet label_set;
  std::vector<TaggedSentence> sentences;
  std::vector<std::vector<std::size_t>> by_type;  // type id -> sentence ids
  std::size_t max_sentence_len = 128;

  std::size_t size() const { return sentences.size(); }
};

// Newline-separated event type names.
std::vector<std::string> load_event_types(const std::string& path);
void save_event_types(const std::string& path,
                      const std::vector<std::string>& types);

// JSON Lines, one object per line with "tokens" and "labels" arrays of equal
// length. Unknown label names and length mismatches are rejected with the
// offending line number.
Corpus load_corpus(const std::string& path, const LabelSet& labels,
                   std::size_t max_sentence_len = 128);
void save_corpus(const std::string& path, const Corpus& corpus);

// Rebuilds the per-type index from the sentences (used after construction).
void index_corpus(Corpus& corpus);

// One N-way-K-shot task. Support and query sentences are relabeled into the
// episode's 2N+1 label space; spans of non-sampled types become O.
struct Episode {
  std::size_t way = 0;
  std::size_t shot = 0;
  std::size_t query_per_type = 0;
  LabelSet labels;
  std::vector<std::string> types;                    // sampled, episode order
  std::vector<std::vector<TaggedSentence>> support;  // [type][k]
  std::vector<std::vector<TaggedSentence>> queries;  // [type][m]

  std::vector<const TaggedSentence*> support_flat() const;
  std::vector<const TaggedSentence*> query_flat() const;
};

// Draws N types and, per type, K+M distinct unused sentences (K support,
// M query). A sentence is used for at most one role in one episode.
Episode sample_episode(const Corpus& corpus, std::size_t way,
                       std::size_t shot, std::size_t query_per_type,
                       Rng& rng);

struct SyntheticConfig {
  std::size_t vocab_size = 120;        // background word inventory
  std::size_t train_types = 20;
  std::size_t test_types = 5;
  std::size_t lexicon_size = 3;        // trigger words per type
  double p_multi = 0.5;                // probability of a 2-3 token trigger
  double overlap = 0.0;                // trigger lexicon sharing across types
  std::size_t min_sentence_len = 6;
  std::size_t max_sentence_len = 12;
  std::size_t sentences_per_type = 30;
  std::uint64_t seed = 1;
};

struct SyntheticCorpora {
  Corpus train;
  Corpus test;
  std::vector<std::string> words;  // full word inventory, for encoder vocab
};

// Two corpora over disjoint event-type sets. Every sentence carries exactly
// one trigger from its type's lexicon; with probability p_multi the trigger
// spans 2-3 tokens. Remaining tokens come from the shared background
// vocabulary.
SyntheticCorpora generate_synthetic(const SyntheticConfig& config);

}  // namespace pacrf
