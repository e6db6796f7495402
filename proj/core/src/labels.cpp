#include "pacrf/labels.hpp"

#include <algorithm>
#include <set>

#include "pacrf/errors.hpp"

namespace pacrf {

LabelSet LabelSet::build(const std::vector<std::string>& event_types) {
  LabelSet ls;
  std::set<std::string> seen;
  ls.event_types_ = event_types;
  ls.labels_.reserve(2 * event_types.size() + 1);
  ls.labels_.push_back("O");
  for (const std::string& t : event_types) {
    if (t.empty()) {
      throw InvalidNameError("event type name is empty");
    }
    if (!seen.insert(t).second) {
      throw DuplicateTypeError("duplicate event type: " + t);
    }
    ls.labels_.push_back("B-" + t);
    ls.labels_.push_back("I-" + t);
  }
  for (std::size_t i = 0; i < ls.labels_.size(); ++i) {
    ls.index_[ls.labels_[i]] = static_cast<int>(i);
  }
  return ls;
}

int LabelSet::index_of(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) {
    throw InvalidLabelError("unknown label: " + label);
  }
  return it->second;
}

const std::string& LabelSet::label_name(std::size_t index) const {
  if (index >= labels_.size()) {
    throw InvalidLabelError("label index out of range: " +
                            std::to_string(index));
  }
  return labels_[index];
}

std::vector<TriggerSpan> labels_to_spans(const TaggedSentence& sentence,
                                         const LabelSet& labels) {
  std::vector<TriggerSpan> spans;
  bool open = false;
  std::size_t open_type = 0;

  auto close = [&](std::size_t end) {
    if (open) {
      spans.back().end = end;
      open = false;
    }
  };

  for (std::size_t i = 0; i < sentence.labels.size(); ++i) {
    const int y = sentence.labels[i];
    if (y < 0 || y >= static_cast<int>(labels.num_labels())) {
      throw InvalidLabelError("label index out of range: " +
                              std::to_string(y));
    }
    if (labels.is_outside(y)) {
      close(i);
      continue;
    }
    const std::size_t t = labels.type_of(y);
    if (labels.is_begin(y) || !open || open_type != t) {
      close(i);
      spans.push_back({i, i + 1, labels.event_types()[t]});
      open = true;
      open_type = t;
    } else {
      // I of the open span's type: extend.
      spans.back().end = i + 1;
    }
  }
  close(sentence.labels.size());
  return spans;
}

std::vector<int> spans_to_labels(std::size_t n,
                                 const std::vector<TriggerSpan>& spans,
                                 const LabelSet& labels) {
  std::vector<int> out(n, 0);
  for (const TriggerSpan& s : spans) {
    if (s.start >= s.end || s.end > n) {
      throw InvalidLabelError("span out of range: [" +
                              std::to_string(s.start) + ", " +
                              std::to_string(s.end) + ")");
    }
    std::size_t t = 0;
    bool found = false;
    for (std::size_t i = 0; i < labels.num_types(); ++i) {
      if (labels.event_types()[i] == s.event_type) {
        t = i;
        found = true;
        break;
      }
    }
    if (!found) {
      throw InvalidLabelError("unknown event type: " + s.event_type);
    }
    out[s.start] = labels.begin_index(t);
    for (std::size_t i = s.start + 1; i < s.end; ++i) {
      out[i] = labels.inside_index(t);
    }
  }
  return out;
}

F1Result micro_f1(const std::vector<std::vector<TriggerSpan>>& predicted,
                  const std::vector<std::vector<TriggerSpan>>& gold) {
  if (predicted.size() != gold.size()) {
    throw CorpusMismatchError(
        "micro_f1: prediction/gold sentence counts differ: " +
        std::to_string(predicted.size()) + " vs " +
        std::to_string(gold.size()));
  }
  F1Result r;
  for (std::size_t s = 0; s < predicted.size(); ++s) {
    std::vector<bool> used(gold[s].size(), false);
    for (const TriggerSpan& p : predicted[s]) {
      bool matched = false;
      for (std::size_t g = 0; g < gold[s].size(); ++g) {
        if (!used[g] && gold[s][g] == p) {
          used[g] = true;
          matched = true;
          break;
        }
      }
      if (matched) {
        ++r.tp;
      } else {
        ++r.fp;
      }
    }
    for (bool u : used) {
      if (!u) ++r.fn;
    }
  }
  r.precision = (r.tp + r.fp) ? static_cast<double>(r.tp) / (r.tp + r.fp) : 0.0;
  r.recall = (r.tp + r.fn) ? static_cast<double>(r.tp) / (r.tp + r.fn) : 0.0;
  r.f1 = (r.precision + r.recall > 0.0)
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

}  // namespace pacrf
