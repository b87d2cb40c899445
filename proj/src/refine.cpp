#include "refine.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <numbers>

#include "geoflow/errors.hpp"
#include "geoflow/flow.hpp"

namespace geoflow::detail {

namespace {

constexpr int kMaxNewton = 50;
constexpr double kGradientTol = 1e-10;

// Fermi coordinates (tau, s) about the hyperbolic axis of g: the axis is the
// image of the real diameter under `frame`, and P(tau, s) = frame(T(tau)(i tanh(s/2))).
class FermiLength {
 public:
  FermiLength(const MetricModel& model, const Mobius& frame, double period, int n)
      : model_(model), n_(n), dtau_(period / n) {
    mid_.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) mid_.push_back(frame * Mobius::translation((i + 0.5) * dtau_));
  }

  int size() const { return n_; }
  double dtau() const { return dtau_; }

  double length(const Eigen::VectorXd& s) const {
    double total = 0.0;
    for (int i = 0; i < n_; ++i) {
      const double a = s[i], b = s[(i + 1) % n_];
      const double sm = 0.5 * (a + b);
      const double c = std::cosh(sm);
      const double u = model_.exponent(mid_[i].apply(lift(sm))).u;
      total += std::exp(u) * std::sqrt(c * c * dtau_ * dtau_ + (b - a) * (b - a));
    }
    return total;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& s) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n_);
    for (int i = 0; i < n_; ++i) {
      const int j = (i + 1) % n_;
      const double a = s[i], b = s[j];
      const double sm = 0.5 * (a + b);
      const double c = std::cosh(sm);
      const Complex w = lift(sm);
      const Complex p = mid_[i].apply(w);
      const auto jet = model_.exponent(p);
      const Complex dp = mid_[i].derivative(w) * Complex{0.0, 0.5 / std::cosh(0.5 * sm) / std::cosh(0.5 * sm)};
      const double us = std::real(std::conj(jet.grad) * dp);
      const double e = std::exp(jet.u);
      const double r = std::sqrt(c * c * dtau_ * dtau_ + (b - a) * (b - a));
      const double common = 0.5 * e * us * r + e * 0.5 * c * std::sinh(sm) * dtau_ * dtau_ / r;
      g[i] += common - e * (b - a) / r;
      g[j] += common + e * (b - a) / r;
    }
    return g;
  }

  // Cyclic tridiagonal Hessian from central differences of the gradient,
  // three colour classes at a time.
  Eigen::SparseMatrix<double> hessian(const Eigen::VectorXd& s) const {
    constexpr double eps = 1e-5;
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(3 * n_));
    for (int colour = 0; colour < 3; ++colour) {
      Eigen::VectorXd up = s, down = s;
      for (int k = colour; k < n_; k += 3) {
        up[k] += eps;
        down[k] -= eps;
      }
      const Eigen::VectorXd diff = (gradient(up) - gradient(down)) / (2.0 * eps);
      for (int k = colour; k < n_; k += 3)
        for (int row : {(k + n_ - 1) % n_, k, (k + 1) % n_}) entries.emplace_back(row, k, diff[row]);
    }
    Eigen::SparseMatrix<double> h(n_, n_);
    h.setFromTriplets(entries.begin(), entries.end());
    const Eigen::SparseMatrix<double> ht = h.transpose();
    return 0.5 * (h + ht);
  }

  /// Discrete length of the piece between nodes i and i + 1.
  double piece(const Eigen::VectorXd& s, int i) const {
    const double a = s[i], b = s[(i + 1) % n_];
    const double sm = 0.5 * (a + b);
    const double c = std::cosh(sm);
    return std::exp(model_.exponent(mid_[i].apply(lift(sm))).u) * std::sqrt(c * c * dtau_ * dtau_ + (b - a) * (b - a));
  }

  static Complex lift(double s) { return {0.0, std::tanh(0.5 * s)}; }

 private:
  const MetricModel& model_;
  int n_;
  double dtau_;
  std::vector<Mobius> mid_;
};

struct Minimum {
  Eigen::VectorXd s;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::vector<double> history;
};

Minimum minimize(const FermiLength& f) {
  Minimum m;
  m.s = Eigen::VectorXd::Zero(f.size());
  double length = f.length(m.s);
  m.history.push_back(length);
  for (int it = 0;; ++it) {
    const Eigen::VectorXd g = f.gradient(m.s);
    m.gradient_norm = g.lpNorm<Eigen::Infinity>();
    m.iterations = it;
    if (m.gradient_norm < kGradientTol) return m;
    if (it == kMaxNewton)
      throw Error(ErrorCode::NoConvergence,
                  "closed geodesic refinement: gradient " + std::to_string(m.gradient_norm) +
                      " after " + std::to_string(kMaxNewton) + " Newton steps");
    const Eigen::SparseMatrix<double> h = f.hessian(m.s);
    double scale = 0.0;
    for (int k = 0; k < f.size(); ++k) scale = std::max(scale, std::abs(h.coeff(k, k)));
    bool moved = false;
    for (double mu : {0.0, 1e-8, 1e-6, 1e-4, 1e-2, 1.0, 1e2}) {
      Eigen::SparseMatrix<double> damped = h;
      for (int k = 0; k < f.size(); ++k) damped.coeffRef(k, k) += mu * scale;
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(damped);
      if (solver.info() != Eigen::Success || (solver.vectorD().array() <= 0.0).any()) continue;
      const Eigen::VectorXd d = -solver.solve(g);
      const double slope = g.dot(d);
      if (!(slope < 0.0)) continue;
      // Armijo backtracking; the allowance absorbs roundoff in the sum.
      const double slack = 1e-14 * std::max(1.0, length);
      for (double alpha = 1.0; alpha > 1e-6; alpha *= 0.5) {
        const Eigen::VectorXd trial = m.s + alpha * d;
        const double lt = f.length(trial);
        if (lt <= length + 1e-4 * alpha * slope + slack) {
          m.s = trial;
          length = std::min(lt, length);
          moved = true;
          break;
        }
      }
      if (moved) break;
    }
    if (!moved) {
      if (m.gradient_norm < 1e3 * kGradientTol) return m;
      throw Error(ErrorCode::NoConvergence, "closed geodesic refinement: no descent direction");
    }
    m.history.push_back(length);
  }
}

}  // namespace

namespace {

// Multiple shooting around the loop. Node k sits on the transversal through
// the axis point at tau_k; its unknowns are the Fermi offset s_k, the angle
// phi_k against the transversal frame, and the flight time T_k to node k + 1.
// Node M is node 0 moved by g.
class Shooter {
 public:
  Shooter(const MetricModel& model, const Mobius& frame, const Mobius& g, std::vector<double> taus)
      : model_(model), g_(g), taus_(std::move(taus)) {
    for (double tau : taus_) frames_.push_back(frame * Mobius::translation(tau));
  }

  int nodes() const { return static_cast<int>(taus_.size()); }

  struct State {
    Complex z;
    double angle;
  };

  State node(int k, double s, double phi) const {
    const Complex w = FermiLength::lift(s);
    const Mobius& f = frames_[static_cast<std::size_t>(k)];
    return {f.apply(w), phi + f.angle_shift(w)};
  }

  struct Flight {
    State end;   // wrapped
    Mobius acc;  // deck element applied by the wrapping
  };

  Flight fly(int k, double s, double phi, double t) const {
    const State st = node(k, s, phi);
    Mobius acc = Mobius::identity();
    CoverState c{st.z, st.angle};
    auto rewrap = [&] {
      if (!model_.inside(c.z)) {
        const Wrapped w = model_.wrap(c.z, c.angle);
        c = {w.z, w.angle};
        acc = w.applied * acc;
      }
    };
    rewrap();
    const double h = kDefaultFlowStep;
    const auto n = static_cast<long>(std::floor(t / h + 1e-9));
    for (long i = 0; i < n; ++i) {
      c = cover_step(model_, c, h);
      rewrap();
    }
    const double rest = t - static_cast<double>(n) * h;
    if (rest > 1e-15) {
      c = cover_step(model_, c, rest);
      rewrap();
    }
    return {{c.z, c.angle}, acc};
  }

  // End of flight k seen from the frame of its target node: zero position and
  // zero angle when they match.
  Eigen::Vector3d defect(int k, const Flight& f, double s_next, double phi_next) const {
    const bool last = k + 1 == nodes();
    const State target = node(last ? 0 : k + 1, s_next, phi_next);
    Mobius to = Mobius::moving(target.z, target.angle);
    if (last) to = g_ * to;
    const Mobius back = (f.acc * to).inverse();
    const Complex z = back.apply(f.end.z);
    const double angle = f.end.angle + back.angle_shift(f.end.z);
    return {z.real(), z.imag(), std::remainder(angle, 2.0 * std::numbers::pi)};
  }

  // x = (s_0, phi_0, T_0, s_1, ...)
  Eigen::VectorXd residual(const Eigen::VectorXd& x, std::vector<Flight>* flights = nullptr) const {
    const int m = nodes();
    Eigen::VectorXd r(3 * m);
    if (flights) flights->clear();
    for (int k = 0; k < m; ++k) {
      const Flight f = fly(k, x[3 * k], x[3 * k + 1], x[3 * k + 2]);
      const int j = (k + 1) % m;
      r.segment<3>(3 * k) = defect(k, f, x[3 * j], x[3 * j + 1]);
      if (flights) flights->push_back(f);
    }
    return r;
  }

  // Forward differences; a node's offset and angle also enter the previous
  // defect through its target frame, which needs no new flight.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x, const Eigen::VectorXd& r,
                           const std::vector<Flight>& flights) const {
    const int m = nodes();
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(3 * m, 3 * m);
    for (int k = 0; k < m; ++k) {
      const int j = (k + 1) % m;
      const int prev = (k + m - 1) % m;
      for (int v = 0; v < 3; ++v) {
        Eigen::VectorXd xp = x;
        const int col = 3 * k + v;
        const double eps = 1e-7 * std::max(1.0, std::abs(x[col]));
        xp[col] += eps;
        const Flight f = fly(k, xp[3 * k], xp[3 * k + 1], xp[3 * k + 2]);
        jac.block<3, 1>(3 * k, col) += (defect(k, f, xp[3 * j], xp[3 * j + 1]) - r.segment<3>(3 * k)) / eps;
        if (v < 2) {
          const Eigen::Vector3d d = defect(prev, flights[static_cast<std::size_t>(prev)], xp[3 * k], xp[3 * k + 1]);
          jac.block<3, 1>(3 * prev, col) += (d - r.segment<3>(3 * prev)) / eps;
        }
      }
    }
    return jac;
  }

 private:
  const MetricModel& model_;
  Mobius g_;
  std::vector<double> taus_;
  std::vector<Mobius> frames_;
};

constexpr double kFlightLength = 1.5;

}  // namespace

RefinedLoop refine_conformal(const MetricModel& model, const Mobius& g, double node_spacing) {
  if (!(node_spacing > 0.0))
    throw Error(ErrorCode::InvalidArgument, "node spacing must be positive");
  const DiskPoint axis = axis_point_nearest_origin(g);
  const Mobius frame = Mobius::moving(axis.z, axis.angle);
  const double period = g.translation_length();
  const int n = 3 * std::max(3, static_cast<int>(std::ceil(period / (3.0 * node_spacing) - 1e-9)));
  const FermiLength fermi(model, frame, period, n);
  const Minimum m = minimize(fermi);

  RefinedLoop out;
  out.report.iterations = m.iterations;
  out.report.gradient_norm = m.gradient_norm;
  out.report.length_history = m.history;

  // Shooting nodes on the discrete loop, with start data read off it.
  const int flights = std::max(1, static_cast<int>(std::ceil(m.history.back() / kFlightLength)));
  std::vector<int> at;
  for (int k = 0; k < flights; ++k) at.push_back(static_cast<int>(std::lround(static_cast<double>(k) * n / flights)));
  std::vector<double> taus;
  Eigen::VectorXd x(3 * flights);
  for (int k = 0; k < flights; ++k) {
    const int i = at[static_cast<std::size_t>(k)];
    const int next = k + 1 < flights ? at[static_cast<std::size_t>(k + 1)] : n;
    taus.push_back(i * fermi.dtau());
    const double ds = (m.s[(i + 1) % n] - m.s[(i + n - 1) % n]) / (2.0 * fermi.dtau());
    double t = 0.0;
    for (int p = i; p < next; ++p) t += fermi.piece(m.s, p % n);
    x.segment<3>(3 * k) << m.s[i], std::atan2(ds, std::cosh(m.s[i])), t;
  }
  const Shooter shoot(model, frame, g, taus);
  std::vector<Shooter::Flight> path;
  Eigen::VectorXd r = shoot.residual(x, &path);
  double best = r.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < 30 && best >= 1e-12; ++it) {
    const Eigen::VectorXd step = shoot.jacobian(x, r, path).fullPivLu().solve(r);
    // Halve the step until the defect drops.
    bool moved = false;
    for (double alpha = 1.0; alpha > 1e-3 && !moved; alpha *= 0.5) {
      const Eigen::VectorXd next = x - alpha * step;
      std::vector<Shooter::Flight> trial;
      const Eigen::VectorXd rn = shoot.residual(next, &trial);
      const double norm = rn.lpNorm<Eigen::Infinity>();
      if (norm < best) {
        x = next;
        r = rn;
        path = std::move(trial);
        best = norm;
        moved = true;
      }
    }
    if (!moved) break;
  }
  if (!(best < 1e-9))
    throw Error(ErrorCode::NoConvergence,
                "closed geodesic shooting left a closure defect of " + std::to_string(best));
  const auto st = shoot.node(0, x[0], x[1]);
  out.z = st.z;
  out.angle = st.angle;
  out.length = 0.0;
  for (int k = 0; k < flights; ++k) out.length += x[3 * k + 2];
  out.report.closure_error = best;
  return out;
}

}  // namespace geoflow::detail
