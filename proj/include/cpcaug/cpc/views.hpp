// cpcaug/cpc/views.hpp

// Copyright 2026  The cpcaug Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cpcaug/core/parallel.hpp"
#include "cpcaug/effects/chain.hpp"

namespace cpcaug {

enum class AugPlacement { kSameForAll, kPerSequence, kPastOnly, kFutureOnly, kPastPlusFuture };

inline const char* to_string(AugPlacement p) {
  switch (p) {
    case AugPlacement::kSameForAll: return "same_for_all";
    case AugPlacement::kPerSequence: return "per_sequence";
    case AugPlacement::kPastOnly: return "past_only";
    case AugPlacement::kFutureOnly: return "future_only";
    case AugPlacement::kPastPlusFuture: return "past_plus_future";
  }
  return "?";
}

inline AugPlacement parse_placement(const std::string& s) {
  for (auto p : {AugPlacement::kSameForAll, AugPlacement::kPerSequence, AugPlacement::kPastOnly,
                 AugPlacement::kFutureOnly, AugPlacement::kPastPlusFuture}) {
    if (s == to_string(p)) return p;
  }
  fail(ErrorKind::kInvalidArgument,
       "placement must be one of same_for_all, per_sequence, past_only, future_only, "
       "past_plus_future; got '" + s + "'");
}

/// Past and future copies of one source window. A chain is present exactly
/// when that view was augmented.
struct ViewPair {
  AudioBuffer past;
  AudioBuffer future;
  std::optional<ConcreteChain> past_chain;
  std::optional<ConcreteChain> future_chain;
};

/// Builds view pairs for equal-length windows. Chain draws use
/// rng.child(0) for SameForAll, rng.child(b) for per-sequence placements, and
/// rng.child(b).child(0|1) for the past/future chains of PastPlusFuture.
/// An empty spec leaves every view as the source.
inline std::vector<ViewPair> make_views(const std::vector<AudioBuffer>& windows,
                                        AugPlacement placement, const EffectChainSpec& spec,
                                        const RngStream& rng, int threads = 1) {
  const std::size_t B = windows.size();
  if (B == 0) return {};
  const std::size_t len = windows[0].size();
  for (const auto& w : windows) require(w.size() == len, "make_views: windows differ in length");
  std::vector<ViewPair> out(B);
  if (spec.empty()) {
    for (std::size_t b = 0; b < B; ++b) out[b] = {windows[b], windows[b], {}, {}};
    return out;
  }
  std::optional<ConcreteChain> shared;
  if (placement == AugPlacement::kSameForAll) shared = sample_chain(spec, len, rng.child(0));

  parallel_for(B, threads, [&](std::size_t b) {
    const AudioBuffer& src = windows[b];
    ViewPair& v = out[b];
    switch (placement) {
      case AugPlacement::kSameForAll:
        v.past = apply_chain(src, *shared);
        v.future = v.past;
        v.past_chain = v.future_chain = shared;
        break;
      case AugPlacement::kPerSequence: {
        auto c = sample_chain(spec, len, rng.child(b));
        v.past = apply_chain(src, c);
        v.future = v.past;
        v.past_chain = c;
        v.future_chain = std::move(c);
        break;
      }
      case AugPlacement::kPastOnly: {
        auto c = sample_chain(spec, len, rng.child(b));
        v.past = apply_chain(src, c);
        v.future = src;
        v.past_chain = std::move(c);
        break;
      }
      case AugPlacement::kFutureOnly: {
        auto c = sample_chain(spec, len, rng.child(b));
        v.past = src;
        v.future = apply_chain(src, c);
        v.future_chain = std::move(c);
        break;
      }
      case AugPlacement::kPastPlusFuture: {
        const RngStream item = rng.child(b);
        auto cp = sample_chain(spec, len, item.child(0));
        auto cf = sample_chain(spec, len, item.child(1));
        v.past = apply_chain(src, cp);
        v.future = apply_chain(src, cf);
        v.past_chain = std::move(cp);
        v.future_chain = std::move(cf);
        break;
      }
    }
  });
  return out;
}

}  // namespace cpcaug
