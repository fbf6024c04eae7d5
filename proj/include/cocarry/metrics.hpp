#pragma once

#include <string>
#include <vector>

#include "cocarry/sim.hpp"

namespace cocarry {

struct SegmentSpec {
  std::string label{"custom"};
  double t_start{0.0};
  double t_end{0.0};
  int axis{0};  // 0 = X, 1 = Y, 2 = Z

  static SegmentSpec from(const TrajectorySegment& s) {
    return SegmentSpec{s.label, s.t_start, s.t_end, s.axis};
  }
};

struct AlignmentResult {
  Vec3 per_axis{Vec3::Zero()};  // time-averaged |R| per component, m
  double norm{0.0};             // time-averaged ||R||, m
};

/// Alignment metric over one segment: R(t) = (r_ee(t) - r_hand(t)) minus its
/// value at the segment start; D_AM = integral |R| dt / (t_e - t_s),
/// trapezoidal, reported per component and as the full norm.
AlignmentResult alignment_metric(const RunLog& log, int robot, const SegmentSpec& segment);

struct Stats {
  double mean{0.0};
  double stderr_over_time{0.0};  // sample standard error over ticks
  long count{0};
};

Stats alpha_stats(const RunLog& log, int robot, double t_start, double t_end);
Stats force_stats(const RunLog& log, int robot, double t_start, double t_end);

/// Mean over several windows (e.g. all motion segments) treated as one sample.
Stats alpha_stats(const RunLog& log, int robot, const std::vector<SegmentSpec>& windows);
Stats force_stats(const RunLog& log, int robot, const std::vector<SegmentSpec>& windows);

/// Across-run variants: each run contributes its window mean as one sample,
/// so the standard error measures run-to-run spread rather than tick noise.
Stats alpha_stats_across_runs(const std::vector<const RunLog*>& logs, int robot,
                              const std::vector<SegmentSpec>& windows);
Stats force_stats_across_runs(const std::vector<const RunLog*>& logs, int robot,
                              const std::vector<SegmentSpec>& windows);

/// Peak-to-peak end-effector displacement along one axis within a window.
double displacement_range(const RunLog& log, int robot, double t_start, double t_end, int axis);
double human_displacement_range(const RunLog& log, double t_start, double t_end, int axis);

struct ReportFiles {
  std::vector<std::string> written;
  std::string summary_text;
};

/// Deterministic per-figure CSV tables plus a plain-text summary. With two
/// logs (e.g. ACI vs baseline) a per-segment comparison table is included.
ReportFiles write_report(const std::vector<const RunLog*>& logs,
                         const std::vector<SegmentSpec>& segments, const std::string& out_dir);

std::vector<SegmentSpec> segments_of(const RunLog& log);

}  // namespace cocarry
