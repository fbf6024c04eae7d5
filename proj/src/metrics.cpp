#include "cocarry/metrics.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "cocarry/errors.hpp"

namespace cocarry {

namespace {

struct TickRange {
  size_t first{0};
  size_t last{0};  // inclusive
};

TickRange tick_range(const RunLog& log, double t_start, double t_end) {
  if (log.ticks.empty()) throw InputError("empty log");
  if (!(t_start < t_end)) throw InputError("segment start must precede end");
  TickRange r;
  r.first = static_cast<size_t>(std::ceil((t_start - 1e-12) / log.dt));
  r.last = static_cast<size_t>(std::floor((t_end + 1e-12) / log.dt));
  if (r.last >= log.ticks.size()) r.last = log.ticks.size() - 1;
  if (r.first >= r.last) throw InputError("segment contains no samples");
  return r;
}

void check_robot(const RunLog& log, int robot) {
  if (robot < 0 || robot >= static_cast<int>(log.robot_names.size()))
    throw InputError("robot index out of range");
}

Stats stats_of(const std::vector<double>& samples) {
  if (samples.empty()) throw InputError("empty sample window");
  Stats s;
  s.count = static_cast<long>(samples.size());
  double sum = 0.0;
  for (double v : samples) sum += v;
  s.mean = sum / static_cast<double>(samples.size());
  if (samples.size() > 1) {
    double ss = 0.0;
    for (double v : samples) ss += (v - s.mean) * (v - s.mean);
    const double sd = std::sqrt(ss / static_cast<double>(samples.size() - 1));
    s.stderr_over_time = sd / std::sqrt(static_cast<double>(samples.size()));
  }
  return s;
}

std::vector<double> collect(const RunLog& log, int robot, double t_start, double t_end,
                            bool alpha) {
  check_robot(log, robot);
  const TickRange r = tick_range(log, t_start, t_end);
  std::vector<double> out;
  out.reserve(r.last - r.first + 1);
  for (size_t k = r.first; k <= r.last; ++k) {
    const RobotTickRecord& rr = log.ticks[k].robots[robot];
    out.push_back(alpha ? rr.alpha : rr.F_H.norm());
  }
  return out;
}

std::vector<double> collect(const RunLog& log, int robot,
                            const std::vector<SegmentSpec>& windows, bool alpha) {
  std::vector<double> all;
  for (const SegmentSpec& w : windows) {
    auto part = collect(log, robot, w.t_start, w.t_end, alpha);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

}  // namespace

AlignmentResult alignment_metric(const RunLog& log, int robot, const SegmentSpec& segment) {
  check_robot(log, robot);
  const TickRange r = tick_range(log, segment.t_start, segment.t_end);

  const Vec3 ee_s = log.ticks[r.first].robots[robot].ee_pose.position;
  const Vec3 hand_s = log.ticks[r.first].human_pose.position;
  const Vec3 offset_s = ee_s - hand_s;

  Vec3 acc = Vec3::Zero();
  double acc_norm = 0.0;
  Vec3 prev_abs = Vec3::Zero();
  double prev_norm = 0.0;
  for (size_t k = r.first; k <= r.last; ++k) {
    const Vec3 R = (log.ticks[k].robots[robot].ee_pose.position -
                    log.ticks[k].human_pose.position) -
                   offset_s;
    const Vec3 cur_abs = R.cwiseAbs();
    const double cur_norm = R.norm();
    if (k > r.first) {
      acc += 0.5 * (prev_abs + cur_abs) * log.dt;
      acc_norm += 0.5 * (prev_norm + cur_norm) * log.dt;
    }
    prev_abs = cur_abs;
    prev_norm = cur_norm;
  }
  const double span = static_cast<double>(r.last - r.first) * log.dt;
  AlignmentResult out;
  out.per_axis = acc / span;
  out.norm = acc_norm / span;
  return out;
}

Stats alpha_stats(const RunLog& log, int robot, double t_start, double t_end) {
  return stats_of(collect(log, robot, t_start, t_end, true));
}

Stats force_stats(const RunLog& log, int robot, double t_start, double t_end) {
  return stats_of(collect(log, robot, t_start, t_end, false));
}

Stats alpha_stats(const RunLog& log, int robot, const std::vector<SegmentSpec>& windows) {
  return stats_of(collect(log, robot, windows, true));
}

Stats force_stats(const RunLog& log, int robot, const std::vector<SegmentSpec>& windows) {
  return stats_of(collect(log, robot, windows, false));
}

namespace {

Stats across_runs(const std::vector<const RunLog*>& logs, int robot,
                  const std::vector<SegmentSpec>& windows, bool alpha) {
  if (logs.empty()) throw InputError("across-run statistics need at least one log");
  std::vector<double> means;
  for (const RunLog* log : logs)
    means.push_back(stats_of(collect(*log, robot, windows, alpha)).mean);
  return stats_of(means);
}

}  // namespace

Stats alpha_stats_across_runs(const std::vector<const RunLog*>& logs, int robot,
                              const std::vector<SegmentSpec>& windows) {
  return across_runs(logs, robot, windows, true);
}

Stats force_stats_across_runs(const std::vector<const RunLog*>& logs, int robot,
                              const std::vector<SegmentSpec>& windows) {
  return across_runs(logs, robot, windows, false);
}

double displacement_range(const RunLog& log, int robot, double t_start, double t_end,
                          int axis) {
  check_robot(log, robot);
  const TickRange r = tick_range(log, t_start, t_end);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (size_t k = r.first; k <= r.last; ++k) {
    const double v = log.ticks[k].robots[robot].ee_pose.position[axis];
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

double human_displacement_range(const RunLog& log, double t_start, double t_end, int axis) {
  const TickRange r = tick_range(log, t_start, t_end);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (size_t k = r.first; k <= r.last; ++k) {
    const double v = log.ticks[k].human_pose.position[axis];
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

std::vector<SegmentSpec> segments_of(const RunLog& log) {
  std::vector<SegmentSpec> out;
  for (const TrajectorySegment& s : log.segments) out.push_back(SegmentSpec::from(s));
  return out;
}

namespace {

void write_file(const std::string& path, const std::string& content,
                std::vector<std::string>& written) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(path, "cannot write report file");
  out << content;
  written.push_back(path);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

ReportFiles write_report(const std::vector<const RunLog*>& logs,
                         const std::vector<SegmentSpec>& segments_in, const std::string& out_dir) {
  if (logs.empty()) throw InputError("report needs at least one log");
  for (const RunLog* log : logs)
    if (log->robot_names.size() != logs.front()->robot_names.size())
      throw InputError("report: logs have mismatched robot counts");

  // Logs too short for any labeled sub-movement are analyzed as one window.
  std::vector<SegmentSpec> segments = segments_in;
  if (segments.empty() && !logs.front()->ticks.empty())
    segments.push_back(SegmentSpec{"full-run", logs.front()->ticks.front().t,
                                   logs.front()->ticks.back().t, 0});

  std::filesystem::create_directories(out_dir);
  ReportFiles out;
  std::string summary;
  summary += "co-transport run report\n";
  summary += "=======================\n";

  for (const RunLog* log : logs) {
    const std::string base = (std::filesystem::path(out_dir) / log->scenario_name).string();
    const size_t n_robots = log->robot_names.size();

    // alpha timeline
    std::string alpha_csv = "t";
    for (size_t r = 0; r < n_robots; ++r) alpha_csv += ",alpha_" + log->robot_names[r];
    alpha_csv += '\n';
    for (const TickRecord& tick : log->ticks) {
      alpha_csv += fmt(tick.t);
      for (size_t r = 0; r < n_robots; ++r) alpha_csv += "," + fmt(tick.robots[r].alpha);
      alpha_csv += '\n';
    }
    write_file(base + "_alpha_timeline.csv", alpha_csv, out.written);

    // velocity traces
    std::string vel_csv = "t,vh_x,vh_y,vh_z";
    for (size_t r = 0; r < n_robots; ++r) {
      const std::string& n = log->robot_names[r];
      vel_csv += ",vadm_" + n + "_x,vadm_" + n + "_y,vadm_" + n + "_z";
      vel_csv += ",vee_" + n + "_x,vee_" + n + "_y,vee_" + n + "_z";
    }
    vel_csv += '\n';
    for (const TickRecord& tick : log->ticks) {
      vel_csv += fmt(tick.t);
      for (int i = 0; i < 3; ++i) vel_csv += "," + fmt(tick.v_h[i]);
      for (size_t r = 0; r < n_robots; ++r) {
        for (int i = 0; i < 3; ++i) vel_csv += "," + fmt(tick.robots[r].v_adm[i]);
        for (int i = 0; i < 3; ++i) vel_csv += "," + fmt(tick.robots[r].ee_twist[i]);
      }
      vel_csv += '\n';
    }
    write_file(base + "_velocity_traces.csv", vel_csv, out.written);

    // alignment bars
    std::string align_csv = "robot,segment,axis,D_AM_axis,D_AM_norm\n";
    for (size_t r = 0; r < n_robots; ++r) {
      for (const SegmentSpec& seg : segments) {
        const AlignmentResult a = alignment_metric(*log, static_cast<int>(r), seg);
        align_csv += log->robot_names[r] + "," + seg.label + "," +
                     std::string(1, "XYZ"[seg.axis]) + "," + fmt(a.per_axis[seg.axis]) + "," +
                     fmt(a.norm) + '\n';
      }
    }
    write_file(base + "_alignment.csv", align_csv, out.written);

    // force/alpha statistics
    std::string stats_csv = "robot,window,mean_alpha,stderr_alpha,mean_force,stderr_force\n";
    for (size_t r = 0; r < n_robots; ++r) {
      for (const SegmentSpec& seg : segments) {
        const Stats sa = alpha_stats(*log, static_cast<int>(r), seg.t_start, seg.t_end);
        const Stats sf = force_stats(*log, static_cast<int>(r), seg.t_start, seg.t_end);
        stats_csv += log->robot_names[r] + "," + seg.label + "," + fmt(sa.mean) + "," +
                     fmt(sa.stderr_over_time) + "," + fmt(sf.mean) + "," +
                     fmt(sf.stderr_over_time) + '\n';
      }
      const Stats sa = alpha_stats(*log, static_cast<int>(r), segments);
      const Stats sf = force_stats(*log, static_cast<int>(r), segments);
      stats_csv += log->robot_names[r] + ",all-segments," + fmt(sa.mean) + "," +
                   fmt(sa.stderr_over_time) + "," + fmt(sf.mean) + "," +
                   fmt(sf.stderr_over_time) + '\n';
      summary += log->scenario_name + " / " + log->robot_names[r] +
                 ": mean alpha (segments) = " + fmt(sa.mean) +
                 ", mean |F_H| = " + fmt(sf.mean) + " N\n";
    }
    write_file(base + "_stats.csv", stats_csv, out.written);
  }

  // Pairwise comparison: first log vs second (e.g. ACI vs baseline).
  if (logs.size() == 2) {
    const RunLog& a = *logs[0];
    const RunLog& b = *logs[1];
    std::string cmp_csv =
        "robot,segment,axis,D_AM_" + a.scenario_name + ",D_AM_" + b.scenario_name + ",delta\n";
    for (size_t r = 0; r < a.robot_names.size(); ++r) {
      for (const SegmentSpec& seg : segments) {
        const double da = alignment_metric(a, static_cast<int>(r), seg).per_axis[seg.axis];
        const double db = alignment_metric(b, static_cast<int>(r), seg).per_axis[seg.axis];
        cmp_csv += a.robot_names[r] + "," + seg.label + "," + std::string(1, "XYZ"[seg.axis]) +
                   "," + fmt(da) + "," + fmt(db) + "," + fmt(db - da) + '\n';
      }
    }
    const std::string path =
        (std::filesystem::path(out_dir) / (a.scenario_name + "_vs_" + b.scenario_name)).string() +
        "_comparison.csv";
    write_file(path, cmp_csv, out.written);
    summary += "comparison table: " + path + "\n";
  }

  out.summary_text = summary;
  write_file((std::filesystem::path(out_dir) / "summary.txt").string(), summary, out.written);
  return out;
}

}  // namespace cocarry
