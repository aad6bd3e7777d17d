#pragma once

#include <span>
#include <vector>

#include "spco/core/channel.hpp"
#include "spco/core/error.hpp"
#include "spco/core/logmath.hpp"
#include "spco/lexicon/decode.hpp"
#include "spco/lexicon/lexicon.hpp"
#include "spco/lexicon/segment.hpp"

namespace spco::lexicon {

using Sentences = std::vector<WordSequence>;

// Index of the particle whose segmentation maximizes the summed weight of
// all particles sharing that exact segmentation. Ties go to the group that
// appears first.
inline std::size_t select_segmentation(std::span<const Sentences* const> segmentations,
                                       std::span<const double> log_weights) {
  if (segmentations.empty()) throw SpecError("select_segmentation: no particles");
  if (segmentations.size() != log_weights.size()) throw SpecError("select_segmentation: size mismatch");
  const std::size_t R = segmentations.size();
  std::vector<std::size_t> group(R);
  std::vector<double> group_weight;
  std::vector<std::size_t> group_first;
  for (std::size_t r = 0; r < R; ++r) {
    std::size_t g = group_first.size();
    for (std::size_t q = 0; q < group_first.size(); ++q) {
      if (*segmentations[group_first[q]] == *segmentations[r]) {
        g = q;
        break;
      }
    }
    if (g == group_first.size()) {
      group_first.push_back(r);
      group_weight.push_back(kNegInf);
    }
    group[r] = g;
    group_weight[g] = log_add(group_weight[g], log_weights[r]);
  }
  return group_first[argmax_lowest(group_weight)];
}

inline std::size_t select_segmentation(const std::vector<Sentences>& segmentations, std::span<const double> log_weights) {
  std::vector<const Sentences*> ptrs;
  ptrs.reserve(segmentations.size());
  for (const auto& s : segmentations) ptrs.push_back(&s);
  return select_segmentation(std::span<const Sentences* const>(ptrs), log_weights);
}

struct WindowSegmentation {
  Sentences words;
  Lexicon lexicon;  // base lexicon plus the window's sampled words
};

// Decode and segment only the utterances of the lag window, against the
// lexicon as it stood just before the window.
inline WindowSegmentation flr_segment(const std::vector<PhonemeSeq>& window, const Lexicon& base,
                                      const ChannelModel& channel, std::size_t B, int sweeps, Rng& rng) {
  if (window.empty()) throw SpecError("flr_segment: empty window");
  std::vector<HypothesisList> hyps;
  hyps.reserve(window.size());
  for (const auto& y : window) hyps.push_back(decode_nbest(y, base, channel, B));
  SegmentResult r = segment_gibbs(hyps, base, sweeps, rng);
  WindowSegmentation out{r.sentences(), base};
  out.lexicon.merge(r.lexicon);
  return out;
}

}  // namespace spco::lexicon
