// cpcaug/abx/score.hpp

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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpcaug/abx/distance.hpp"
#include "cpcaug/abx/items.hpp"
#include "cpcaug/core/parallel.hpp"

namespace cpcaug {

/// kWithin: A, B, X share one speaker. kAcross: A and B share a speaker, X
/// comes from another.
enum class AbxMode { kWithin, kAcross };

inline const char* to_string(AbxMode m) { return m == AbxMode::kWithin ? "within" : "across"; }

inline AbxMode parse_abx_mode(const std::string& s) {
  if (s == "within") return AbxMode::kWithin;
  if (s == "across") return AbxMode::kAcross;
  fail(ErrorKind::kInvalidArgument, "ABX mode must be within or across, got '" + s + "'");
}

struct AbxOptions {
  DtwNorm norm = DtwNorm::kPathLength;
  int threads = 1;
};

/// Mean credit over the triples of one (phone pair, context, speaker cell).
/// phone_ax is the center phone of A and X, phone_b that of B.
struct AbxCell {
  std::string phone_ax, phone_b;
  std::string prev, next;
  std::string speaker_ab, speaker_x;
  std::uint64_t triples = 0;
  double score = 0.0;
};

struct AbxReport {
  AbxMode mode = AbxMode::kWithin;
  DtwNorm norm = DtwNorm::kPathLength;
  double score = 0.0;
  double error_rate = 0.0;
  std::uint64_t triples = 0;
  std::vector<AbxCell> cells;  // sorted by (phone pair, speaker cell, context)
};

/// Averages cells over contexts, then speaker cells, then phone pairs.
inline double aggregate_cells(const std::vector<AbxCell>& cells) {
  using PairKey = std::pair<std::string, std::string>;
  using SpeakerKey = std::pair<std::string, std::string>;
  std::map<PairKey, std::map<SpeakerKey, std::pair<double, std::size_t>>> by_pair;
  for (const auto& c : cells) {
    auto& s = by_pair[{c.phone_ax, c.phone_b}][{c.speaker_ab, c.speaker_x}];
    s.first += c.score;
    s.second += 1;
  }
  require(!by_pair.empty(), "ABX: no cells to aggregate", ErrorKind::kEmpty);
  double total = 0.0;
  for (const auto& [pair, speakers] : by_pair) {
    double pair_sum = 0.0;
    for (const auto& [spk, ctx] : speakers) pair_sum += ctx.first / static_cast<double>(ctx.second);
    total += pair_sum / static_cast<double>(speakers.size());
  }
  return total / static_cast<double>(by_pair.size());
}

/// Scores every valid (A, B, X) triple. features[i] holds the frames of
/// items[i]. A triple earns 1 when d(X, A) < d(X, B), 0.5 on a tie, else 0.
inline AbxReport abx_score(const std::vector<ItemRecord>& items,
                           const std::vector<FrameMatrix>& features, AbxMode mode,
                           const AbxOptions& opt = {}) {
  require(items.size() == features.size(), "ABX: one feature matrix per item");
  for (std::size_t i = 0; i < features.size(); ++i) {
    require(features[i].rows() > 0, "ABX: item " + std::to_string(i) + " has no frames",
            ErrorKind::kEmpty);
  }

  // Triples never leave a (prev, next) context, so distances are per context.
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> contexts;
  for (std::size_t i = 0; i < items.size(); ++i) {
    contexts[{items[i].prev, items[i].next}].push_back(i);
  }
  std::vector<const std::vector<std::size_t>*> groups;
  for (const auto& [ctx, idx] : contexts) groups.push_back(&idx);

  struct Tally {
    std::uint64_t half_credits = 0;  // twice the credit, kept exact
    std::uint64_t triples = 0;
  };
  using CellKey = std::tuple<std::string, std::string, std::string, std::string>;
  std::vector<std::map<CellKey, Tally>> tallies(groups.size());

  parallel_for(groups.size(), opt.threads, [&](std::size_t g) {
    const auto& idx = *groups[g];
    const std::size_t n = idx.size();
    Eigen::MatrixXd d(n, n);
    for (std::size_t a = 0; a < n; ++a) {
      d(a, a) = 0.0;  // never read: A != X and B differs from X in phone
      for (std::size_t b = a + 1; b < n; ++b) {
        d(a, b) = dtw_distance(features[idx[a]], features[idx[b]], opt.norm);
        d(b, a) = d(a, b);
      }
    }
    auto& out = tallies[g];
    for (std::size_t x = 0; x < n; ++x) {
      const ItemRecord& X = items[idx[x]];
      for (std::size_t a = 0; a < n; ++a) {
        const ItemRecord& A = items[idx[a]];
        if (a == x || A.phone != X.phone) continue;
        if ((mode == AbxMode::kWithin) != (A.speaker == X.speaker)) continue;
        for (std::size_t b = 0; b < n; ++b) {
          const ItemRecord& B = items[idx[b]];
          if (B.phone == X.phone || B.speaker != A.speaker) continue;
          Tally& t = out[{X.phone, B.phone, A.speaker, X.speaker}];
          t.half_credits += d(x, a) < d(x, b) ? 2 : (d(x, a) == d(x, b) ? 1 : 0);
          t.triples += 1;
        }
      }
    }
  });

  AbxReport report;
  report.mode = mode;
  report.norm = opt.norm;
  std::size_t g = 0;
  for (const auto& [ctx, idx] : contexts) {
    for (const auto& [key, t] : tallies[g]) {
      AbxCell c;
      std::tie(c.phone_ax, c.phone_b, c.speaker_ab, c.speaker_x) = key;
      c.prev = ctx.first;
      c.next = ctx.second;
      c.triples = t.triples;
      c.score = static_cast<double>(t.half_credits) / (2.0 * static_cast<double>(t.triples));
      report.triples += t.triples;
      report.cells.push_back(std::move(c));
    }
    ++g;
  }
  if (report.cells.empty()) {
    fail(ErrorKind::kEmpty, std::string("ABX: no valid ") + to_string(mode) + "-speaker triples");
  }
  std::sort(report.cells.begin(), report.cells.end(), [](const AbxCell& l, const AbxCell& r) {
    return std::tie(l.phone_ax, l.phone_b, l.speaker_ab, l.speaker_x, l.prev, l.next) <
           std::tie(r.phone_ax, r.phone_b, r.speaker_ab, r.speaker_x, r.prev, r.next);
  });
  report.score = aggregate_cells(report.cells);
  report.error_rate = 1.0 - report.score;
  return report;
}

// --- segment features -------------------------------------------------------

/// Frames [round(onset * rate), round(offset * rate)) clipped to the sequence;
/// an empty slice yields the single frame nearest the segment midpoint.
inline FrameMatrix slice_segment(const FeatureSequence& f, double onset, double offset) {
  const Eigen::Index total = f.num_frames();
  require(total > 0, "ABX: feature sequence has no frames", ErrorKind::kEmpty);
  const auto clip = [&](double v) {
    return std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::llround(v)), 0, total);
  };
  const Eigen::Index lo = clip(onset * f.frame_rate);
  const Eigen::Index hi = clip(offset * f.frame_rate);
  if (hi > lo) return f.frames.middleRows(lo, hi - lo);
  const auto mid = static_cast<Eigen::Index>(std::floor(0.5 * (onset + offset) * f.frame_rate));
  return f.frames.middleRows(std::clamp<Eigen::Index>(mid, 0, total - 1), 1);
}

/// Slices every item out of the sequence returned by `lookup(file_id)`.
inline std::vector<FrameMatrix> gather_segments(
    const std::vector<ItemRecord>& items,
    const std::function<const FeatureSequence&(const std::string&)>& lookup) {
  std::vector<FrameMatrix> out;
  out.reserve(items.size());
  for (const auto& it : items) {
    out.push_back(slice_segment(lookup(it.file_id), it.onset, it.offset));
  }
  return out;
}

/// Reads <dir>/<file_id>.f32 feature files for every item.
inline std::vector<FrameMatrix> load_segments(const std::vector<ItemRecord>& items,
                                              const std::filesystem::path& dir) {
  std::unordered_map<std::string, FeatureSequence> cache;
  return gather_segments(items, [&](const std::string& id) -> const FeatureSequence& {
    auto it = cache.find(id);
    if (it == cache.end()) it = cache.emplace(id, read_features(dir / id)).first;
    return it->second;
  });
}

// --- reports ----------------------------------------------------------------

inline nlohmann::json report_to_json(const AbxReport& r) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : r.cells) {
    cells.push_back({{"phone_ax", c.phone_ax},
                     {"phone_b", c.phone_b},
                     {"prev", c.prev},
                     {"next", c.next},
                     {"speaker_ab", c.speaker_ab},
                     {"speaker_x", c.speaker_x},
                     {"triples", c.triples},
                     {"score", c.score}});
  }
  return {{"mode", to_string(r.mode)},
          {"dtw_norm", to_string(r.norm)},
          {"score", r.score},
          {"error_rate", r.error_rate},
          {"triples", r.triples},
          {"cells", cells}};
}

inline void write_report_json(const std::filesystem::path& path, const AbxReport& r) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, path.string() + ": cannot open for writing");
  out << report_to_json(r).dump(2) << "\n";
}

inline void write_report_csv(const std::filesystem::path& path, const AbxReport& r) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, path.string() + ": cannot open for writing");
  out << "phone_ax,phone_b,prev,next,speaker_ab,speaker_x,triples,score\n"
      << std::setprecision(17);
  for (const auto& c : r.cells) {
    out << c.phone_ax << ',' << c.phone_b << ',' << c.prev << ',' << c.next << ','
        << c.speaker_ab << ',' << c.speaker_x << ',' << c.triples << ',' << c.score << "\n";
  }
}

}  // namespace cpcaug
