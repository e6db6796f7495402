#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pacrf {

// BIO-over-event-types tagging scheme: index 0 is "O", then B-t and I-t per
// event type, giving 2N+1 labels for N types.
class LabelSet {
 public:
  LabelSet() = default;
  static LabelSet build(const std::vector<std::string>& event_types);

  std::size_t num_types() const { return event_types_.size(); }
  std::size_t num_labels() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<std::string>& event_types() const { return event_types_; }

  // Throws InvalidLabelError for names outside the set.
  int index_of(const std::string& label) const;
  const std::string& label_name(std::size_t index) const;

  bool is_outside(int index) const { return index == 0; }
  bool is_begin(int index) const { return index > 0 && index % 2 == 1; }
  bool is_inside(int index) const { return index > 0 && index % 2 == 0; }
  // Event type id for a B-/I- label.
  std::size_t type_of(int index) const { return (index - 1) / 2; }
  int begin_index(std::size_t type) const { return 1 + 2 * (int)type; }
  int inside_index(std::size_t type) const { return 2 + 2 * (int)type; }

 private:
  std::vector<std::string> event_types_;
  std::vector<std::string> labels_;
  std::map<std::string, int> index_;
};

struct TaggedSentence {
  std::vector<std::string> tokens;
  std::vector<int> labels;
  // Identity in the owning corpus; -1 for free-standing sentences.
  std::int64_t corpus_id = -1;

  std::size_t size() const { return tokens.size(); }
};

struct TriggerSpan {
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // exclusive
  std::string event_type;

  friend bool operator==(const TriggerSpan& a, const TriggerSpan& b) {
    return a.start == b.start && a.end == b.end &&
           a.event_type == b.event_type;
  }
};

// Decodes a label sequence into typed spans. Ill-formed sequences are read
// leniently: a stray I-t opens a new span of type t, and I-t after a span of
// a different type closes that span and opens a new one.
std::vector<TriggerSpan> labels_to_spans(const TaggedSentence& sentence,
                                         const LabelSet& labels);

// Inverse of labels_to_spans for non-overlapping spans.
std::vector<int> spans_to_labels(std::size_t n,
                                 const std::vector<TriggerSpan>& spans,
                                 const LabelSet& labels);

struct F1Result {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

// Exact-match micro F1: a predicted span is correct iff start, end and type
// all match an unconsumed gold span. Ratios are 0 when undefined.
F1Result micro_f1(const std::vector<std::vector<TriggerSpan>>& predicted,
                  const std::vector<std::vector<TriggerSpan>>& gold);

}  // namespace pacrf
