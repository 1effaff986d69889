// snrd/distill.hpp

// Copyright 2026   snrd authors
//
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

#ifndef SNRD_DISTILL_HPP_
#define SNRD_DISTILL_HPP_

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "snrd/graph.hpp"
#include "snrd/ops.hpp"
#include "snrd/unet.hpp"

namespace snrd {

/// Closed SNR interval [lo_db, hi_db] covered by one teacher's training set.
struct SnrHull {
  double lo_db = 0.0;
  double hi_db = 0.0;

  double midpoint() const { return 0.5 * (lo_db + hi_db); }
  bool contains(double snr_db) const { return lo_db <= snr_db && snr_db <= hi_db; }
};

/// Routes a training example to a teacher by its SNR. `hulls` must be sorted
/// by lo_db. A value inside exactly one hull goes to that teacher; otherwise
/// the teacher with the nearest hull midpoint wins, ties going to the lower
/// one. Throws ConfigError on an empty list or a non-finite SNR.
std::size_t select_teacher(std::span<const SnrHull> hulls, double snr_db);

/// Sorted, pairwise disjoint check; throws ConfigError naming the pair.
void check_hulls(std::span<const SnrHull> hulls);

template <typename Scalar>
struct TeacherEntry {
  std::string id;
  std::filesystem::path checkpoint;
  Model<Scalar> model;
  SnrHull hull;
};

/// Frozen teachers, sorted by hull.
template <typename Scalar>
struct TeacherBank {
  std::vector<TeacherEntry<Scalar>> entries;

  std::vector<SnrHull> hulls() const {
    std::vector<SnrHull> h;
    for (const auto &e : entries) h.push_back(e.hull);
    return h;
  }
  std::size_t select(double snr_db) const {
    const auto h = hulls();
    return select_teacher(h, snr_db);
  }
};

/// Loads teachers from a directory written by train-teacher runs. `dir` is
/// either one run directory (config.json + checkpoints/model.ckpt) or a
/// directory whose immediate subdirectories are run directories. Each run's
/// config.json must carry teacher.snr_hull.
template <typename Scalar>
TeacherBank<Scalar> load_teacher_bank(const std::filesystem::path &dir);

struct DistillConfig {
  double alpha = 0.5;

  void validate() const;
};

/// alpha * 0.5|s - t|^2 + (1 - alpha) * 0.5|s - y|^2. The teacher output must
/// be an untracked node; gradients reach only the student output (and the
/// clean target if it were tracked, which callers never do).
template <typename Scalar>
Var distill_loss(Graph<Scalar> &g, Var student_out, Var teacher_out, Var clean, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ConfigError("distill.alpha must lie in [0, 1], got " + std::to_string(alpha));
  if (g.tracks(teacher_out)) throw GraphError("distill_loss: teacher output must not be tracked");
  const Var teacher_term = l2_half(g, student_out, teacher_out);
  const Var clean_term = l2_half(g, student_out, clean);
  return weighted_sum(g, teacher_term, Scalar(alpha), clean_term, Scalar(1.0 - alpha));
}

}  // namespace snrd

#endif  // SNRD_DISTILL_HPP_
