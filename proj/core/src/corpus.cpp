#include "pacrf/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "pacrf/errors.hpp"

namespace pacrf {

using nlohmann::json;

std::vector<std::string> load_event_types(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open event type file: " + path);
  }
  std::vector<std::string> types;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) types.push_back(line);
  }
  return types;
}

void save_event_types(const std::string& path,
                      const std::vector<std::string>& types) {
  std::ofstream out(path);
  if (!out) {
    throw ParseError("cannot write event type file: " + path);
  }
  for (const std::string& t : types) out << t << "\n";
}

Corpus load_corpus(const std::string& path, const LabelSet& labels,
                   std::size_t max_sentence_len) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open corpus file: " + path);
  }
  Corpus corpus;
  corpus.label_set = labels;
  corpus.max_sentence_len = max_sentence_len;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.contains("tokens") || !obj.contains("labels")) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": missing \"tokens\" or \"labels\"");
    }
    TaggedSentence s;
    for (const auto& t : obj["tokens"]) {
      s.tokens.push_back(t.get<std::string>());
    }
    std::vector<std::string> names;
    for (const auto& l : obj["labels"]) {
      names.push_back(l.get<std::string>());
    }
    if (s.tokens.size() != names.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": " +
                       std::to_string(s.tokens.size()) + " tokens but " +
                       std::to_string(names.size()) + " labels");
    }
    if (s.tokens.size() > max_sentence_len) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": sentence exceeds maximum length " +
                       std::to_string(max_sentence_len));
    }
    for (const std::string& name : names) {
      try {
        s.labels.push_back(labels.index_of(name));
      } catch (const InvalidLabelError&) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": unknown label \"" + name + "\"");
      }
    }
    s.corpus_id = static_cast<std::int64_t>(corpus.sentences.size());
    corpus.sentences.push_back(std::move(s));
  }
  index_corpus(corpus);
  return corpus;
}

void save_corpus(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path);
  if (!out) {
    throw ParseError("cannot write corpus file: " + path);
  }
  for (const TaggedSentence& s : corpus.sentences) {
    json obj;
    obj["tokens"] = s.tokens;
    std::vector<std::string> names;
    names.reserve(s.labels.size());
    for (int y : s.labels) names.push_back(corpus.label_set.label_name(y));
    obj["labels"] = names;
    out << obj.dump() << "\n";
  }
}

void index_corpus(Corpus& corpus) {
  corpus.by_type.assign(corpus.label_set.num_types(), {});
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
    std::set<std::size_t> types_here;
    for (int y : corpus.sentences[i].labels) {
      if (y > 0) types_here.insert(corpus.label_set.type_of(y));
    }
    for (std::size_t t : types_here) corpus.by_type[t].push_back(i);
  }
}

std::vector<const TaggedSentence*> Episode::support_flat() const {
  std::vector<const TaggedSentence*> out;
  for (const auto& group : support) {
    for (const auto& s : group) out.push_back(&s);
  }
  return out;
}

std::vector<const TaggedSentence*> Episode::query_flat() const {
  std::vector<const TaggedSentence*> out;
  for (const auto& group : queries) {
    for (const auto& s : group) out.push_back(&s);
  }
  return out;
}

namespace {

// Maps a corpus sentence into the episode label space: sampled types keep
// their B/I structure under new indices, everything else becomes O.
TaggedSentence relabel(const TaggedSentence& s, const Corpus& corpus,
                       const std::vector<std::size_t>& sampled_types,
                       const LabelSet& episode_labels) {
  TaggedSentence out;
  out.tokens = s.tokens;
  out.corpus_id = s.corpus_id;
  out.labels.reserve(s.labels.size());
  for (int y : s.labels) {
    if (y == 0) {
      out.labels.push_back(0);
      continue;
    }
    const std::size_t t = corpus.label_set.type_of(y);
    auto it = std::find(sampled_types.begin(), sampled_types.end(), t);
    if (it == sampled_types.end()) {
      out.labels.push_back(0);
      continue;
    }
    const std::size_t e = it - sampled_types.begin();
    out.labels.push_back(corpus.label_set.is_begin(y)
                             ? episode_labels.begin_index(e)
                             : episode_labels.inside_index(e));
  }
  return out;
}

}  // namespace

Episode sample_episode(const Corpus& corpus, std::size_t way,
                       std::size_t shot, std::size_t query_per_type,
                       Rng& rng) {
  if (way == 0 || shot == 0 || query_per_type == 0) {
    throw InvalidConfigError("sample_episode: way, shot and query must be > 0");
  }
  const std::size_t need = shot + query_per_type;
  std::vector<std::size_t> eligible;
  for (std::size_t t = 0; t < corpus.by_type.size(); ++t) {
    if (corpus.by_type[t].size() >= need) eligible.push_back(t);
  }
  if (eligible.size() < way) {
    // Name a type that blocked feasibility, if one exists.
    for (std::size_t t = 0; t < corpus.by_type.size(); ++t) {
      if (corpus.by_type[t].size() < need) {
        throw EpisodeInfeasibleError(
            "episode infeasible: type \"" + corpus.label_set.event_types()[t] +
            "\" has " + std::to_string(corpus.by_type[t].size()) +
            " sentences, need " + std::to_string(need));
      }
    }
    throw EpisodeInfeasibleError(
        "episode infeasible: corpus has " + std::to_string(eligible.size()) +
        " usable types, need " + std::to_string(way));
  }

  std::vector<std::size_t> order = rng.sample_indices(eligible.size(), way);
  std::vector<std::size_t> sampled_types;
  sampled_types.reserve(way);
  for (std::size_t i : order) sampled_types.push_back(eligible[i]);

  Episode ep;
  ep.way = way;
  ep.shot = shot;
  ep.query_per_type = query_per_type;
  for (std::size_t t : sampled_types) {
    ep.types.push_back(corpus.label_set.event_types()[t]);
  }
  ep.labels = LabelSet::build(ep.types);

  std::set<std::size_t> used;
  for (std::size_t t : sampled_types) {
    const auto& pool = corpus.by_type[t];
    std::vector<std::size_t> perm = rng.sample_indices(pool.size(), pool.size());
    std::vector<std::size_t> picked;
    for (std::size_t p : perm) {
      const std::size_t sid = pool[p];
      if (used.count(sid)) continue;
      picked.push_back(sid);
      if (picked.size() == need) break;
    }
    if (picked.size() < need) {
      throw EpisodeInfeasibleError(
          "episode infeasible: type \"" + corpus.label_set.event_types()[t] +
          "\" has only " + std::to_string(picked.size()) +
          " unused sentences, need " + std::to_string(need));
    }
    for (std::size_t sid : picked) used.insert(sid);

    std::vector<TaggedSentence> sup, qry;
    for (std::size_t k = 0; k < shot; ++k) {
      sup.push_back(relabel(corpus.sentences[picked[k]], corpus,
                            sampled_types, ep.labels));
    }
    for (std::size_t m = 0; m < query_per_type; ++m) {
      qry.push_back(relabel(corpus.sentences[picked[shot + m]], corpus,
                            sampled_types, ep.labels));
    }
    ep.support.push_back(std::move(sup));
    ep.queries.push_back(std::move(qry));
  }
  return ep;
}

namespace {

struct TypeLexicon {
  std::string name;
  std::vector<std::string> words;
};

Corpus build_corpus(const SyntheticConfig& cfg,
                    const std::vector<TypeLexicon>& lexicons,
                    const std::vector<std::string>& background, Rng& rng) {
  std::vector<std::string> names;
  names.reserve(lexicons.size());
  for (const auto& lex : lexicons) names.push_back(lex.name);

  Corpus corpus;
  corpus.label_set = LabelSet::build(names);
  corpus.max_sentence_len = std::max<std::size_t>(cfg.max_sentence_len, 128);

  for (std::size_t t = 0; t < lexicons.size(); ++t) {
    for (std::size_t s = 0; s < cfg.sentences_per_type; ++s) {
      const std::size_t len =
          cfg.min_sentence_len +
          rng.uniform_index(cfg.max_sentence_len - cfg.min_sentence_len + 1);
      std::size_t trig_len = 1;
      if (rng.uniform() < cfg.p_multi) {
        trig_len = 2 + rng.uniform_index(2);  // 2 or 3
      }
      const std::size_t total = std::max(len, trig_len + 1);
      const std::size_t pos = rng.uniform_index(total - trig_len + 1);

      TaggedSentence sent;
      sent.tokens.resize(total);
      sent.labels.assign(total, 0);
      for (std::size_t i = 0; i < total; ++i) {
        sent.tokens[i] = background[rng.uniform_index(background.size())];
      }
      for (std::size_t i = 0; i < trig_len; ++i) {
        const auto& lex = lexicons[t].words;
        sent.tokens[pos + i] = lex[rng.uniform_index(lex.size())];
        sent.labels[pos + i] = i == 0 ? corpus.label_set.begin_index(t)
                                      : corpus.label_set.inside_index(t);
      }
      sent.corpus_id = static_cast<std::int64_t>(corpus.sentences.size());
      corpus.sentences.push_back(std::move(sent));
    }
  }
  index_corpus(corpus);
  return corpus;
}

}  // namespace

SyntheticCorpora generate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.lexicon_size == 0) {
    throw InvalidConfigError("generate_synthetic: lexicon_size must be > 0");
  }
  if (cfg.vocab_size == 0 || cfg.train_types == 0 || cfg.test_types == 0 ||
      cfg.sentences_per_type == 0) {
    throw InvalidConfigError("generate_synthetic: counts must be > 0");
  }
  if (cfg.p_multi < 0.0 || cfg.p_multi > 1.0 || cfg.overlap < 0.0 ||
      cfg.overlap > 1.0) {
    throw InvalidConfigError(
        "generate_synthetic: probabilities must be in [0, 1]");
  }
  if (cfg.min_sentence_len == 0 ||
      cfg.min_sentence_len > cfg.max_sentence_len) {
    throw InvalidConfigError("generate_synthetic: bad sentence length range");
  }

  Rng rng(cfg.seed);

  std::vector<std::string> background(cfg.vocab_size);
  for (std::size_t i = 0; i < cfg.vocab_size; ++i) {
    background[i] = "w" + std::to_string(i);
  }

  // Trigger words are drawn from a pool distinct from the background; the
  // overlap knob reuses already-assigned trigger words across types.
  const std::size_t total_types = cfg.train_types + cfg.test_types;
  std::vector<TypeLexicon> lexicons(total_types);
  std::vector<std::string> assigned;
  std::size_t next_fresh = 0;
  for (std::size_t t = 0; t < total_types; ++t) {
    lexicons[t].name = "ev" + std::to_string(t);
    std::set<std::string> chosen;
    while (chosen.size() < cfg.lexicon_size) {
      if (!assigned.empty() && rng.uniform() < cfg.overlap) {
        chosen.insert(assigned[rng.uniform_index(assigned.size())]);
      } else {
        chosen.insert("trig" + std::to_string(next_fresh++));
      }
    }
    for (const std::string& w : chosen) {
      lexicons[t].words.push_back(w);
      assigned.push_back(w);
    }
  }

  std::vector<TypeLexicon> train_lex(lexicons.begin(),
                                     lexicons.begin() + cfg.train_types);
  std::vector<TypeLexicon> test_lex(lexicons.begin() + cfg.train_types,
                                    lexicons.end());

  SyntheticCorpora out;
  out.train = build_corpus(cfg, train_lex, background, rng);
  out.test = build_corpus(cfg, test_lex, background, rng);

  out.words = background;
  for (std::size_t i = 0; i < next_fresh; ++i) {
    out.words.push_back("trig" + std::to_string(i));
  }
  return out;
}

}  // namespace pacrf
