#include "sympont/trajectory.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

namespace sympont {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trajectory_csv(const DiscreteTrajectory& traj, std::ostream& out) {
  const int d = traj.dim();
  out << "n,t_n";
  for (const char* name : {"x", "lambda", "alpha"}) {
    for (int i = 0; i < d; ++i) out << ',' << name << i;
  }
  out << '\n';
  for (int n = 0; n <= traj.steps; ++n) {
    out << n << ',' << format_double(n * traj.dt);
    for (int i = 0; i < d; ++i) out << ',' << format_double(traj.states[n][i]);
    for (int i = 0; i < d; ++i) out << ',' << format_double(traj.duals[n][i]);
    for (int i = 0; i < d; ++i) {
      out << ',';
      if (n < traj.steps) out << format_double(traj.controls[n][i]);
    }
    out << '\n';
  }
}

void write_trajectory_csv(const DiscreteTrajectory& traj, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open trajectory file for writing", path);
  write_trajectory_csv(traj, f);
  if (!f) throw IoError("failed writing trajectory file", path);
}

}  // namespace sympont
