#include "crnosc/odeint.hpp"

namespace crnosc {

namespace {

double plane_value(const Trajectory& traj, double t, const Eigen::VectorXd& p,
                   const Eigen::VectorXd& nrm) {
  return nrm.dot(traj.at(t) - p);
}

// Bisection/secant hybrid on the dense output; sa and sb bracket a sign
// change.
double refine_root(const Trajectory& traj, double a, double b, double sa, double sb,
                   const Eigen::VectorXd& p, const Eigen::VectorXd& nrm, double tol_abs) {
  double m = a;
  for (int it = 0; it < 100; ++it) {
    double denom = sb - sa;
    m = (std::abs(denom) > 0) ? b - sb * (b - a) / denom : 0.5 * (a + b);
    if (!(m > a && m < b)) m = 0.5 * (a + b);
    double sm = plane_value(traj, m, p, nrm);
    if (std::abs(sm) < tol_abs || (b - a) < 1e-15 * std::max(1.0, std::abs(m))) return m;
    if ((sa <= 0.0) == (sm <= 0.0)) {
      a = m;
      sa = sm;
    } else {
      b = m;
      sb = sm;
    }
  }
  return m;
}

}  // namespace

std::vector<std::pair<double, Eigen::VectorXd>> find_crossings(const Trajectory& traj,
                                                               const Eigen::VectorXd& plane_point,
                                                               const Eigen::VectorXd& plane_normal,
                                                               int direction) {
  if (plane_normal.norm() == 0.0) throw std::invalid_argument("plane normal must be nonzero");
  std::vector<std::pair<double, Eigen::VectorXd>> out;
  if (traj.times().size() < 2) return out;

  constexpr int kSubdiv = 8;  // the interpolant is a quartic; 8 cells bracket its sign changes
  double last_root = -std::numeric_limits<double>::infinity();

  for (const DenseSegment& seg : traj.segments()) {
    double scale = plane_normal.norm() * (1.0 + traj.at(seg.t0).norm());
    double tol_abs = 1e-12 * scale;
    double ta = seg.t0;
    double sa = plane_value(traj, ta, plane_point, plane_normal);
    for (int c = 1; c <= kSubdiv; ++c) {
      double tb = seg.t0 + seg.h * static_cast<double>(c) / kSubdiv;
      double sb = plane_value(traj, tb, plane_point, plane_normal);
      bool rising = sa < 0.0 && sb >= 0.0;
      bool falling = sa > 0.0 && sb <= 0.0;
      if (rising || falling) {
        int dir = rising ? +1 : -1;
        if (direction == 0 || direction == dir) {
          double root = refine_root(traj, ta, tb, sa, sb, plane_point, plane_normal, tol_abs);
          if (root - last_root > 1e-10 * (1.0 + std::abs(root))) {
            out.emplace_back(root, traj.at(root));
            last_root = root;
          }
        }
      }
      ta = tb;
      sa = sb;
    }
  }
  return out;
}

}  // namespace crnosc
