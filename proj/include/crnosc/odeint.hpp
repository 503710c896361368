#ifndef CRNOSC_ODEINT_HPP
#define CRNOSC_ODEINT_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace crnosc {

struct IntegratorConfig {
  double rtol = 1e-9;
  double atol = 1e-11;
  double max_step = std::numeric_limits<double>::infinity();
  long max_steps = 2'000'000;

  /// Components [0, positive_prefix) are kept in the nonnegative orthant:
  /// a component below -atol after an accepted step aborts the run, one in
  /// [-atol, 0) is clamped to atol/10. 0 disables the guard.
  int positive_prefix = 0;

  bool dense_output = true;  // keep per-step interpolation coefficients
  bool store_states = true;  // keep every accepted step (else endpoints only)
};

enum class IntegrationFailure {
  StepLimit,       // max_steps exceeded
  StepUnderflow,   // step size underflow: stiffness signal
  LeftPositiveOrthant,
};

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(IntegrationFailure kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  IntegrationFailure kind() const { return kind_; }

 private:
  IntegrationFailure kind_;
};

/// One accepted step's quartic interpolant:
/// y(t0 + u*h) = r0 + u*(r1 + (1-u)*(r2 + u*(r3 + (1-u)*r4))).
struct DenseSegment {
  double t0 = 0.0;
  double h = 0.0;
  Eigen::MatrixXd rcont;  // n x 5
};

/// Time-stamped solution samples at accepted steps, with optional dense
/// interpolation between them.
class Trajectory {
 public:
  const std::vector<double>& times() const { return times_; }
  const std::vector<Eigen::VectorXd>& states() const { return states_; }
  const std::vector<DenseSegment>& segments() const { return segments_; }

  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  const Eigen::VectorXd& front() const { return states_.front(); }
  const Eigen::VectorXd& back() const { return states_.back(); }

  bool has_dense() const { return !segments_.empty() || times_.size() == 1; }

  /// Dense evaluation; t is clamped to [t_begin, t_end].
  Eigen::VectorXd at(double t) const {
    if (times_.size() == 1) return states_.front();
    if (segments_.empty())
      throw std::logic_error("trajectory recorded without dense output");
    const DenseSegment& s = segment_for(t);
    double u = std::clamp((t - s.t0) / s.h, 0.0, 1.0);
    return s.rcont.col(0) +
           u * (s.rcont.col(1) +
                (1.0 - u) * (s.rcont.col(2) + u * (s.rcont.col(3) + (1.0 - u) * s.rcont.col(4))));
  }

  void push_initial(double t, Eigen::VectorXd y) {
    times_.push_back(t);
    states_.push_back(std::move(y));
  }
  /// store_state=false keeps endpoints only (the final state replaces the
  /// previous final state).
  void push_step(double t, const Eigen::VectorXd& y, bool store_state) {
    if (store_state || times_.size() < 2) {
      times_.push_back(t);
      states_.push_back(y);
    } else {
      times_.back() = t;
      states_.back() = y;
    }
  }
  void push_segment(DenseSegment seg) { segments_.push_back(std::move(seg)); }

 private:
  const DenseSegment& segment_for(double t) const {
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double tv, const DenseSegment& s) { return tv < s.t0; });
    if (it != segments_.begin()) --it;
    return *it;
  }

  std::vector<double> times_;
  std::vector<Eigen::VectorXd> states_;
  std::vector<DenseSegment> segments_;
};

namespace detail {

// Dormand-Prince 5(4) coefficients, FSAL form, with the standard quartic
// continuous extension.
struct Dopri5 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432.0;
  static constexpr double d3 = 87487479700.0 / 32700410799.0;
  static constexpr double d4 = -10690763975.0 / 1880347072.0;
  static constexpr double d5 = 701980252875.0 / 199316789632.0;
  static constexpr double d6 = -1453857185.0 / 822651844.0;
  static constexpr double d7 = 69997945.0 / 29380423.0;
};

inline double error_norm(const Eigen::VectorXd& err, const Eigen::VectorXd& y0,
                         const Eigen::VectorXd& y1, double rtol, double atol) {
  double acc = 0.0;
  for (int i = 0; i < err.size(); ++i) {
    double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    double q = err[i] / sc;
    acc += q * q;
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

template <class F>
double initial_step(F&& f, const Eigen::VectorXd& y0, const Eigen::VectorXd& f0, double span,
                    double rtol, double atol) {
  auto scaled_norm = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& ref) {
    double acc = 0.0;
    for (int i = 0; i < v.size(); ++i) {
      double sc = atol + rtol * std::abs(ref[i]);
      acc += (v[i] / sc) * (v[i] / sc);
    }
    return std::sqrt(acc / static_cast<double>(v.size()));
  };
  double d0 = scaled_norm(y0, y0), d1 = scaled_norm(f0, y0);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, span);
  Eigen::VectorXd f1 = f(Eigen::VectorXd(y0 + h0 * f0));
  double d2 = scaled_norm(f1 - f0, y0) / h0;
  double h1;
  if (std::max(d1, d2) <= 1e-15)
    h1 = std::max(1e-6, h0 * 1e-3);
  else
    h1 = std::pow(0.01 / std::max(d1, d2), 0.2);
  return std::min({100.0 * h0, h1, span});
}

}  // namespace detail

/// Adaptive Dormand-Prince 5(4) with PI step control.
/// Integrates the autonomous system y' = field(y) from t=0 to t=t_end.
template <class F>
Trajectory integrate(F&& field, const Eigen::VectorXd& x0, double t_end,
                     const IntegratorConfig& cfg = {}) {
  using D = detail::Dopri5;
  if (!(t_end >= 0.0)) throw std::invalid_argument("t_end must be nonnegative");
  const int n = static_cast<int>(x0.size());

  Trajectory traj;
  traj.push_initial(0.0, x0);
  if (t_end == 0.0) return traj;
  if (n == 0) {  // vacuous system
    traj.push_step(t_end, x0, cfg.store_states);
    return traj;
  }

  Eigen::VectorXd y = x0;
  Eigen::VectorXd k1 = field(y), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), y1(n), yerr(n);
  double t = 0.0;
  double h = std::min(detail::initial_step(field, y, k1, t_end, cfg.rtol, cfg.atol), cfg.max_step);

  constexpr double safe = 0.9, beta = 0.04;
  constexpr double expo1 = 0.2 - beta * 0.75;
  constexpr double facc1 = 5.0;   // max shrink per rejection
  constexpr double facc2 = 0.1;   // max growth per acceptance (1/10)
  double facold = 1e-4;
  bool rejected = false;
  long nsteps = 0;

  while (t < t_end) {
    if (++nsteps > cfg.max_steps)
      throw IntegrationError(IntegrationFailure::StepLimit,
                             "step count exceeded (" + std::to_string(cfg.max_steps) + ")");
    if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
      throw IntegrationError(IntegrationFailure::StepUnderflow,
                             "step size underflow at t=" + std::to_string(t) +
                                 ": system appears stiff for the explicit integrator");
    bool last = false;
    if (t + 1.01 * h >= t_end) {
      h = t_end - t;
      last = true;
    }

    k2 = field(Eigen::VectorXd(y + h * (D::a21 * k1)));
    k3 = field(Eigen::VectorXd(y + h * (D::a31 * k1 + D::a32 * k2)));
    k4 = field(Eigen::VectorXd(y + h * (D::a41 * k1 + D::a42 * k2 + D::a43 * k3)));
    k5 = field(Eigen::VectorXd(y + h * (D::a51 * k1 + D::a52 * k2 + D::a53 * k3 + D::a54 * k4)));
    k6 = field(Eigen::VectorXd(y + h * (D::a61 * k1 + D::a62 * k2 + D::a63 * k3 + D::a64 * k4 +
                                        D::a65 * k5)));
    y1 = y + h * (D::b1 * k1 + D::b3 * k3 + D::b4 * k4 + D::b5 * k5 + D::b6 * k6);
    k7 = field(y1);
    yerr = h * (D::e1 * k1 + D::e3 * k3 + D::e4 * k4 + D::e5 * k5 + D::e6 * k6 + D::e7 * k7);

    double err = detail::error_norm(yerr, y, y1, cfg.rtol, cfg.atol);
    double fac11 = std::pow(std::max(err, 1e-300), expo1);
    if (err <= 1.0) {
      // accepted
      bool clamped = false;
      for (int i = 0; i < std::min(cfg.positive_prefix, n); ++i) {
        if (y1[i] < -cfg.atol)
          throw IntegrationError(
              IntegrationFailure::LeftPositiveOrthant,
              "component " + std::to_string(i) + " left the positive orthant at t=" +
                  std::to_string(t + h) + " (value " + std::to_string(y1[i]) + ")");
        if (y1[i] < 0.0) {
          y1[i] = cfg.atol / 10.0;
          clamped = true;
        }
      }
      if (clamped) k7 = field(y1);

      if (cfg.dense_output) {
        DenseSegment seg;
        seg.t0 = t;
        seg.h = h;
        seg.rcont.resize(n, 5);
        Eigen::VectorXd ydiff = y1 - y;
        seg.rcont.col(0) = y;
        seg.rcont.col(1) = ydiff;
        seg.rcont.col(2) = h * k1 - ydiff;
        seg.rcont.col(3) = ydiff - h * k7 - seg.rcont.col(2);
        seg.rcont.col(4) = h * (D::d1 * k1 + D::d3 * k3 + D::d4 * k4 + D::d5 * k5 + D::d6 * k6 +
                                D::d7 * k7);
        traj.push_segment(std::move(seg));
      }
      t = last ? t_end : t + h;
      y = y1;
      k1 = k7;
      traj.push_step(t, y, cfg.store_states);

      double fac = std::clamp(fac11 / std::pow(facold, beta) / safe, facc2, facc1);
      double hnew = h / fac;
      if (rejected) hnew = std::min(hnew, h);
      h = std::min(hnew, cfg.max_step);
      facold = std::max(err, 1e-4);
      rejected = false;
    } else {
      h = h / std::min(facc1, fac11 / safe);
      rejected = true;
    }
  }
  return traj;
}

/// Terminal state only; no per-step storage.
template <class F>
Eigen::VectorXd flow(F&& field, const Eigen::VectorXd& x0, double t_end,
                     IntegratorConfig cfg = {}) {
  cfg.dense_output = false;
  cfg.store_states = false;
  return integrate(std::forward<F>(field), x0, t_end, cfg).back();
}

/// Fundamental solution Phi(t) of the variational equation along a
/// trajectory, Phi(0) = I.
struct FundamentalPath {
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> matrices;
  std::vector<DenseSegment> segments;  // n^2 rows, column-major vec(Phi)
  int n = 0;

  Eigen::MatrixXd at(double t) const {
    if (times.size() == 1 || segments.empty()) return matrices.back();
    auto it = std::upper_bound(segments.begin(), segments.end(), t,
                               [](double tv, const DenseSegment& s) { return tv < s.t0; });
    if (it != segments.begin()) --it;
    const DenseSegment& s = *it;
    double u = std::clamp((t - s.t0) / s.h, 0.0, 1.0);
    Eigen::VectorXd v =
        s.rcont.col(0) +
        u * (s.rcont.col(1) +
             (1.0 - u) * (s.rcont.col(2) + u * (s.rcont.col(3) + (1.0 - u) * s.rcont.col(4))));
    return Eigen::Map<const Eigen::MatrixXd>(v.data(), n, n);
  }
};

/// Joint integration of state and variational equations with one shared
/// error control: z = (x, vec(Phi)), x' = f(x), Phi' = J(x) Phi.
template <class F, class J>
std::pair<Trajectory, FundamentalPath> integrate_with_variational(F&& field, J&& jacobian,
                                                                  const Eigen::VectorXd& x0,
                                                                  double t_end,
                                                                  const IntegratorConfig& cfg = {}) {
  const int n = static_cast<int>(x0.size());
  const int N = n + n * n;
  Eigen::VectorXd z0(N);
  z0.head(n) = x0;
  Eigen::Map<Eigen::MatrixXd>(z0.data() + n, n, n) = Eigen::MatrixXd::Identity(n, n);

  auto aug = [&](const Eigen::VectorXd& z) {
    Eigen::VectorXd dz(N);
    const Eigen::VectorXd x = z.head(n);
    dz.head(n) = field(x);
    Eigen::Map<const Eigen::MatrixXd> phi(z.data() + n, n, n);
    Eigen::Map<Eigen::MatrixXd>(dz.data() + n, n, n) = jacobian(x) * phi;
    return dz;
  };

  Trajectory zt = integrate(aug, z0, t_end, cfg);

  Trajectory xt;
  FundamentalPath path;
  path.n = n;
  for (size_t i = 0; i < zt.times().size(); ++i) {
    const Eigen::VectorXd& z = zt.states()[i];
    if (i == 0)
      xt.push_initial(zt.times()[i], z.head(n));
    else
      xt.push_step(zt.times()[i], z.head(n), true);
    path.times.push_back(zt.times()[i]);
    path.matrices.emplace_back(Eigen::Map<const Eigen::MatrixXd>(z.data() + n, n, n));
  }
  for (const DenseSegment& s : zt.segments()) {
    xt.push_segment(DenseSegment{s.t0, s.h, s.rcont.topRows(n)});
    path.segments.push_back(DenseSegment{s.t0, s.h, s.rcont.bottomRows(n * n)});
  }
  return {std::move(xt), std::move(path)};
}

/// Times and states where <x(t) - plane_point, plane_normal> crosses zero
/// with the requested crossing direction (+1 rising, -1 falling, 0 any),
/// refined on the dense output to |value| < 1e-12 * scale.
std::vector<std::pair<double, Eigen::VectorXd>> find_crossings(const Trajectory& traj,
                                                               const Eigen::VectorXd& plane_point,
                                                               const Eigen::VectorXd& plane_normal,
                                                               int direction = 0);

}  // namespace crnosc

#endif
