#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "spco/core/error.hpp"
#include "spco/core/types.hpp"

namespace spco::concepts {

// Positions enter the statistics on a 2^-16 m lattice so that coordinate sums
// are integers and removal is the exact inverse of addition.
inline constexpr double kPositionScale = 65536.0;
inline constexpr double kMaxCoordinate = 1.0e4;

inline std::int64_t quantize_coordinate(double v) {
  if (!std::isfinite(v) || std::abs(v) > kMaxCoordinate)
    throw SpecError("position coordinate outside +-1e4 m");
  return std::llround(v * kPositionScale);
}

// One teaching observation as seen by the concept model.
struct ConceptDatum {
  std::int64_t qx = 0;
  std::int64_t qy = 0;
  ImageFeature feature;
  WordSequence words;

  ConceptDatum() = default;
  ConceptDatum(double x, double y, ImageFeature f, WordSequence w)
      : qx(quantize_coordinate(x)), qy(quantize_coordinate(y)), feature(std::move(f)), words(std::move(w)) {}

  double x() const { return static_cast<double>(qx) / kPositionScale; }
  double y() const { return static_cast<double>(qy) / kPositionScale; }
};

using WordCounts = std::map<Word, int>;

struct PositionStats {
  int owner = -1;  // concept that holds this position distribution
  int n = 0;
  std::int64_t sx = 0;
  std::int64_t sy = 0;
  __int128 qxx = 0;
  __int128 qxy = 0;
  __int128 qyy = 0;

  double sum_x() const { return static_cast<double>(sx) / kPositionScale; }
  double sum_y() const { return static_cast<double>(sy) / kPositionScale; }
  double scatter_xx() const { return static_cast<double>(qxx) / (kPositionScale * kPositionScale); }
  double scatter_xy() const { return static_cast<double>(qxy) / (kPositionScale * kPositionScale); }
  double scatter_yy() const { return static_cast<double>(qyy) / (kPositionScale * kPositionScale); }

  bool operator==(const PositionStats&) const = default;
};

struct ConceptStats {
  int n = 0;
  std::set<int> positions;
  WordCounts words;
  int word_total = 0;
  std::vector<int> features;
  int feature_total = 0;

  int position_count(int k, const std::map<int, PositionStats>& all) const {
    return positions.count(k) ? all.at(k).n : 0;
  }
  bool operator==(const ConceptStats&) const = default;
};

inline void add_words(WordCounts& counts, int& total, const WordSequence& words, int sign) {
  for (const auto& w : words) {
    int& c = counts[w];
    c += sign;
    if (c < 0) throw CorruptionError("word count underflow");
    if (c == 0) counts.erase(w);
  }
  total += sign * static_cast<int>(words.size());
  if (total < 0) throw CorruptionError("word total underflow");
}

// Sufficient statistics of every concept parameter. Cluster ids are
// allocated monotonically and never reused.
class PosteriorStats {
 public:
  const std::map<int, ConceptStats>& concepts() const { return concepts_; }
  const std::map<int, PositionStats>& positions() const { return positions_; }
  const WordCounts& global_words() const { return global_words_; }
  int global_word_total() const { return global_word_total_; }
  int total() const { return total_; }
  int next_concept_id() const { return next_concept_; }
  int next_position_id() const { return next_position_; }
  std::size_t feature_dimension() const { return feature_dim_; }
  bool empty() const { return total_ == 0; }

  const ConceptStats* find_concept(int l) const {
    auto it = concepts_.find(l);
    return it == concepts_.end() ? nullptr : &it->second;
  }
  const PositionStats* position(int k) const {
    auto it = positions_.find(k);
    return it == positions_.end() ? nullptr : &it->second;
  }

  // Adds the datum; kNew ids are resolved to fresh ids. Explicit ids that do
  // not exist yet are created under that id.
  Assignment add(const ConceptDatum& d, Assignment a) {
    check_feature_dimension(d.feature);
    if (a.concept_id == Assignment::kNew) {
      if (a.position != Assignment::kNew)
        throw CorruptionError("existing position cannot join a new concept");
      a.concept_id = next_concept_;
    }
    auto [cit, fresh_concept] = concepts_.try_emplace(a.concept_id);
    ConceptStats& c = cit->second;
    if (fresh_concept) c.features.assign(feature_dim_, 0);
    next_concept_ = std::max(next_concept_, a.concept_id + 1);

    if (a.position == Assignment::kNew) a.position = next_position_;
    auto [pit, fresh_position] = positions_.try_emplace(a.position);
    PositionStats& p = pit->second;
    if (fresh_position) {
      p.owner = a.concept_id;
      c.positions.insert(a.position);
    } else if (p.owner != a.concept_id) {
      throw CorruptionError("position " + std::to_string(a.position) + " belongs to concept " +
                            std::to_string(p.owner));
    }
    next_position_ = std::max(next_position_, a.position + 1);

    ++p.n;
    p.sx += d.qx;
    p.sy += d.qy;
    p.qxx += static_cast<__int128>(d.qx) * d.qx;
    p.qxy += static_cast<__int128>(d.qx) * d.qy;
    p.qyy += static_cast<__int128>(d.qy) * d.qy;

    ++c.n;
    add_words(c.words, c.word_total, d.words, +1);
    for (std::size_t j = 0; j < feature_dim_; ++j) c.features[j] += d.feature.counts[j];
    c.feature_total += d.feature.total();

    add_words(global_words_, global_word_total_, d.words, +1);
    ++total_;
    return a;
  }

  void remove(const ConceptDatum& d, Assignment a) {
    auto cit = concepts_.find(a.concept_id);
    auto pit = positions_.find(a.position);
    if (cit == concepts_.end() || pit == positions_.end() || pit->second.owner != a.concept_id)
      throw CorruptionError("remove: datum was not added under this assignment");
    ConceptStats& c = cit->second;
    PositionStats& p = pit->second;
    if (p.n <= 0 || c.n <= 0) throw CorruptionError("remove: count underflow");
    check_feature_dimension(d.feature);

    --p.n;
    p.sx -= d.qx;
    p.sy -= d.qy;
    p.qxx -= static_cast<__int128>(d.qx) * d.qx;
    p.qxy -= static_cast<__int128>(d.qx) * d.qy;
    p.qyy -= static_cast<__int128>(d.qy) * d.qy;

    --c.n;
    add_words(c.words, c.word_total, d.words, -1);
    for (std::size_t j = 0; j < feature_dim_; ++j) {
      c.features[j] -= d.feature.counts[j];
      if (c.features[j] < 0) throw CorruptionError("remove: feature count underflow");
    }
    c.feature_total -= d.feature.total();
    add_words(global_words_, global_word_total_, d.words, -1);
    --total_;

    if (p.n == 0) {
      if (p.sx != 0 || p.sy != 0 || p.qxx != 0 || p.qxy != 0 || p.qyy != 0)
        throw CorruptionError("remove: position sums did not return to zero");
      c.positions.erase(a.position);
      positions_.erase(pit);
    }
    if (c.n == 0) {
      if (!c.positions.empty() || c.word_total != 0 || c.feature_total != 0)
        throw CorruptionError("remove: concept statistics did not return to zero");
      concepts_.erase(cit);
    }
  }

  // Swap the words of an already-added datum (re-segmentation of history).
  void replace_words(int concept_id, const WordSequence& old_words, const WordSequence& new_words) {
    auto cit = concepts_.find(concept_id);
    if (cit == concepts_.end()) throw CorruptionError("replace_words: unknown concept");
    add_words(cit->second.words, cit->second.word_total, old_words, -1);
    add_words(global_words_, global_word_total_, old_words, -1);
    add_words(cit->second.words, cit->second.word_total, new_words, +1);
    add_words(global_words_, global_word_total_, new_words, +1);
  }

  // Equality of the statistics themselves; id allocation counters excluded.
  bool same_statistics(const PosteriorStats& o) const {
    return concepts_ == o.concepts_ && positions_ == o.positions_ &&
           global_words_ == o.global_words_ && global_word_total_ == o.global_word_total_ &&
           total_ == o.total_;
  }
  bool operator==(const PosteriorStats& o) const {
    return same_statistics(o) && next_concept_ == o.next_concept_ && next_position_ == o.next_position_;
  }

 private:
  void check_feature_dimension(const ImageFeature& f) {
    if (total_ == 0 && concepts_.empty()) {
      if (feature_dim_ != f.dimension()) {
        feature_dim_ = f.dimension();
      }
      return;
    }
    if (f.dimension() != feature_dim_) throw SpecError("image feature dimension mismatch");
  }

  std::map<int, ConceptStats> concepts_;
  std::map<int, PositionStats> positions_;
  WordCounts global_words_;
  int global_word_total_ = 0;
  int total_ = 0;
  int next_concept_ = 0;
  int next_position_ = 0;
  std::size_t feature_dim_ = 0;
};

inline PosteriorStats sbu_add(PosteriorStats H, const ConceptDatum& d, Assignment a) {
  H.add(d, a);
  return H;
}

inline PosteriorStats sbu_remove(PosteriorStats H, const ConceptDatum& d, Assignment a) {
  H.remove(d, a);
  return H;
}

// Number of distinct word types across the statistics plus `extra`.
inline int vocabulary_size(const PosteriorStats& H, const WordSequence& extra) {
  int v = static_cast<int>(H.global_words().size());
  std::set<Word> seen;
  for (const auto& w : extra)
    if (!H.global_words().count(w) && seen.insert(w).second) ++v;
  return std::max(v, 1);
}

}  // namespace spco::concepts
