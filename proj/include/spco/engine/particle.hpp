#pragma once

#include <deque>
#include <memory>
#include <vector>

#include "spco/concepts/conditional.hpp"
#include "spco/concepts/stats.hpp"
#include "spco/core/types.hpp"
#include "spco/lexicon/select.hpp"
#include "spco/slam/grid.hpp"

namespace spco::engine {

// Assignments that left the lag window, as a shared persistent list so that
// resampled copies do not duplicate history.
struct LabelNode {
  std::size_t index = 0;  // teaching index
  Assignment a;
  std::shared_ptr<const LabelNode> prev;
};

struct HistoryEntry {
  std::size_t index = 0;  // teaching index
  concepts::WindowEntry entry;
};

struct WeightTerms {
  double z = 0.0;
  double f = 0.0;
  double ic = 0.0;
  double s = 0.0;
  double selection = 0.0;  // word-information weight used to pick S*
  double total = 0.0;      // this step's log-weight increment
};

struct Particle {
  Pose pose;
  std::deque<Pose> pose_window;
  std::shared_ptr<slam::OccupancyGrid> grid;
  concepts::PosteriorStats stats;
  concepts::PosteriorStats frozen;  // data that left the window (scalable variant)
  std::deque<HistoryEntry> history;
  std::shared_ptr<const LabelNode> frozen_labels;
  std::size_t frozen_count = 0;
  double log_weight = 0.0;
  WeightTerms terms;

  std::size_t teaching_count() const { return frozen_count + history.size(); }

  // Assignment of every teaching step so far, by teaching index.
  std::vector<Assignment> labels() const {
    std::vector<Assignment> out(teaching_count());
    for (const LabelNode* n = frozen_labels.get(); n; n = n->prev.get()) out[n->index] = n->a;
    for (const auto& h : history) out[h.index] = h.entry.a;
    return out;
  }

  // Word sequences of the steps still open to re-segmentation.
  lexicon::Sentences segmentation() const {
    lexicon::Sentences out;
    out.reserve(history.size());
    for (const auto& h : history) out.push_back(h.entry.datum.words);
    return out;
  }
};

}  // namespace spco::engine
