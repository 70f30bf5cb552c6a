#include "ccflow/flow.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

namespace ccflow {

namespace {
constexpr double kPi = std::numbers::pi;
}

void validate_target(const FlowConfig& config, const TriangulatedSurface& mesh, Background bg) {
  if (config.target_K.size() != mesh.num_vertices())
    throw Error(ErrorCode::InvalidTarget, "target curvature sized to mesh");
  const double total = config.target_K.sum();
  const double gb = 2.0 * kPi * mesh.euler_characteristic();
  if (bg == Background::Euclidean) {
    if (std::abs(total - gb) > 1e-9)
      throw Error(ErrorCode::InvalidTarget, "Euclidean target must sum to 2*pi*chi, off by " +
                                                std::to_string(total - gb));
  } else {
    if (!(total > gb))
      throw Error(ErrorCode::InvalidTarget, "hyperbolic target must sum above 2*pi*chi");
    for (int i = 0; i < config.target_K.size(); ++i)
      if (!(config.target_K[i] < 2.0 * kPi))
        throw Error(ErrorCode::InvalidTarget, "target curvature must stay below 2*pi");
  }
}

double calabi_energy(const VectorXd& K, const VectorXd& target_K) {
  return (K - target_K).squaredNorm();
}

VectorXd flow_velocity(const TriangulatedSurface& mesh, const ConformalFamily& family,
                       const FlowConfig& config, const VectorXd* frozen_K0,
                       FlowDiagnostics* diag) {
  const double slack = min_triangle_slack(mesh, family.lengths());
  if (!(slack >= config.degeneracy_margin))
    throw Error(ErrorCode::DegenerateTriangle, "triangle-inequality slack below margin");
  const MetricState ms = compute_metric(mesh, family.lengths(), family.background());
  const JacobianL J = jacobian_L(mesh, family, ms);
  const SpectralForm spec = spectral_decompose(J);
  const VectorXd& K_for_velocity = frozen_K0 ? *frozen_K0 : ms.K;
  VectorXd v = apply_fractional_laplacian(spec, config.s, K_for_velocity - config.target_K);
  if (diag) {
    diag->K = ms.K;
    diag->calabi = calabi_energy(ms.K, config.target_K);
    diag->lambda_min = spec.lambda_min();
    diag->lambda_max = spec.lambda_max();
    diag->gb_residual = std::abs(ms.gauss_bonnet_residual(mesh.euler_characteristic()));
    diag->min_angle = ms.min_angle;
    diag->min_slack = slack;
  }
  return v;
}

namespace {

struct Stepper {
  const TriangulatedSurface& mesh;
  const FlowConfig& config;
  const VectorXd* frozen_K0;

  VectorXd eval(const ConformalFamily& base, const VectorXd& du) const {
    auto trial = base.clone();
    trial->advance(mesh, du);
    return flow_velocity(mesh, *trial, config, frozen_K0, nullptr);
  }

  // Validity probe for a trial increment: domain, degeneracy margin, and the
  // optional Delaunay guard.
  void check_trial(const ConformalFamily& base, const VectorXd& du) const {
    auto trial = base.clone();
    trial->advance(mesh, du);
    const double slack = min_triangle_slack(mesh, trial->lengths());
    if (!(slack >= config.degeneracy_margin))
      throw Error(ErrorCode::DegenerateTriangle, "trial state degenerate");
    if (config.delaunay_guard && config.surgery == SurgeryMode::Off) {
      const MetricState ms = compute_metric(mesh, trial->lengths(), trial->background());
      if (!delaunay_check(mesh, ms).clean())
        throw Error(ErrorCode::StepFailure, "delaunay guard: surgery needed");
    }
  }
};

struct StepResult {
  bool accepted = false;
  double dt_taken = 0.0;
  double dt_next = 0.0;
  VectorXd du;
  std::string fail_reason;
  bool surgery_needed = false;
};

// Classic RK4; no error control, the step either lands on a valid state or
// the flow stops.
StepResult rk4_step(const Stepper& st, const ConformalFamily& family, const VectorXd& v0,
                    double dt) {
  StepResult r;
  r.dt_taken = dt;
  r.dt_next = dt;
  try {
    const VectorXd k1 = v0;
    const VectorXd k2 = st.eval(family, 0.5 * dt * k1);
    const VectorXd k3 = st.eval(family, 0.5 * dt * k2);
    const VectorXd k4 = st.eval(family, dt * k3);
    r.du = dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    st.check_trial(family, r.du);
    r.accepted = true;
  } catch (const Error& err) {
    r.fail_reason = err.what();
    r.surgery_needed = err.code() == ErrorCode::StepFailure;
  }
  return r;
}

// Dormand-Prince 5(4).
StepResult rk45_step(const Stepper& st, const ConformalFamily& family, const VectorXd& v0,
                     double dt, const FlowConfig& cfg) {
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                      a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                      a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                      b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                      e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

  StepResult r;
  r.dt_taken = dt;
  try {
    const VectorXd k1 = v0;
    const VectorXd k2 = st.eval(family, dt * (a21 * k1));
    const VectorXd k3 = st.eval(family, dt * (a31 * k1 + a32 * k2));
    const VectorXd k4 = st.eval(family, dt * (a41 * k1 + a42 * k2 + a43 * k3));
    const VectorXd k5 = st.eval(family, dt * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const VectorXd k6 =
        st.eval(family, dt * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const VectorXd du5 = dt * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const VectorXd k7 = st.eval(family, du5); // FSAL stage, also probes validity
    const VectorXd du4 =
        dt * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    // Error measured against the increment: near an equilibrium the accepted
    // per-step error shrinks to abs_tol, so the iterates settle well below
    // the curvature stopping tolerance instead of hovering in a noise ball.
    double err = 0.0;
    for (int i = 0; i < du5.size(); ++i) {
      const double scale = cfg.abs_tol + cfg.rel_tol * std::abs(du5[i]);
      err = std::max(err, std::abs(du5[i] - du4[i]) / scale);
    }
    const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-12), -0.2), 0.2, 5.0);
    r.dt_next = std::clamp(dt * fac, cfg.dt_min, cfg.dt_max);
    if (err <= 1.0) {
      st.check_trial(family, du5);
      r.du = du5;
      r.accepted = true;
    }
  } catch (const Error& err) {
    r.fail_reason = err.what();
    r.surgery_needed = err.code() == ErrorCode::StepFailure;
    r.dt_next = std::max(0.5 * dt, cfg.dt_min);
  }
  if (r.dt_next == 0.0) r.dt_next = std::max(0.5 * dt, cfg.dt_min);
  return r;
}

double radius_floor(const ConformalFamily& family) {
  const VectorXd r = family.radii();
  double floor = std::numeric_limits<double>::infinity();
  for (int i = 0; i < r.size(); ++i)
    if (r[i] > 0.0) floor = std::min(floor, r[i]);
  return r.size() == 0 || !std::isfinite(floor) ? 0.0 : floor;
}

} // namespace

FlowResult run_flow(const TriangulatedSurface& mesh0, const ConformalFamily& family0,
                    const FlowConfig& config) {
  const auto t_start = std::chrono::steady_clock::now();
  validate_target(config, mesh0, family0.background());

  FlowResult result;
  TriangulatedSurface mesh = mesh0;
  auto family = family0.clone();
  VectorXd u = VectorXd::Zero(mesh.num_vertices());
  if (const auto* dcs = family->structure()) u = dcs->u;

  const FlipTrigger trigger = config.surgery == SurgeryMode::WeightedDelaunay
                                  ? FlipTrigger::WeightedDelaunay
                                  : FlipTrigger::MetricDelaunay;

  VectorXd frozen_K0;
  const VectorXd* frozen = nullptr;

  double t = 0.0;
  double dt = config.dt_init;
  int flips_this_record = 0;

  auto fail = [&](const std::string& why, bool surgery_needed) {
    result.status = FlowStatus::StepFailure;
    result.surgery_needed = surgery_needed;
    result.message = why;
  };

  try {
    if (config.surgery != SurgeryMode::Off) {
      auto events = flip_to_delaunay(mesh, *family, t, trigger);
      for (auto& ev : events) {
        result.max_flip_area_drift =
            std::max(result.max_flip_area_drift, std::abs(ev.area_after - ev.area_before));
        result.flip_events.push_back(ev);
      }
      flips_this_record += static_cast<int>(events.size());
    }

    if (config.frozen_initial_curvature) {
      frozen_K0 = compute_metric(mesh, family->lengths(), family->background()).K;
      frozen = &frozen_K0;
    }

    double prev_calabi = -1.0;
    while (true) {
      FlowDiagnostics diag;
      const VectorXd v0 = flow_velocity(mesh, *family, config, frozen, &diag);

      TraceRecord rec;
      rec.t = t;
      rec.u = u;
      rec.K = diag.K;
      rec.calabi = diag.calabi;
      rec.sum_u = u.sum();
      rec.min_angle = diag.min_angle;
      rec.lambda_min = diag.lambda_min;
      rec.lambda_max = diag.lambda_max;
      rec.flips = flips_this_record;
      result.trace.push_back(rec);
      flips_this_record = 0;

      result.max_gb_residual = std::max(result.max_gb_residual, diag.gb_residual);
      const double rfloor = radius_floor(*family);
      if (rfloor > 0.0)
        result.min_radius_floor = result.trace.size() == 1
                                      ? rfloor
                                      : std::min(result.min_radius_floor, rfloor);
      if (prev_calabi >= 0.0 && rec.calabi > prev_calabi)
        result.max_calabi_uptick =
            std::max(result.max_calabi_uptick,
                     (rec.calabi - prev_calabi) / std::max(prev_calabi, 1e-300));
      prev_calabi = rec.calabi;

      result.final_residual = (diag.K - config.target_K).lpNorm<Eigen::Infinity>();
      if (result.final_residual <= config.tol_curvature) {
        result.status = FlowStatus::Converged;
        result.converged = true;
        break;
      }
      if (t >= config.t_max) {
        result.status = FlowStatus::ReachedTMax;
        break;
      }

      const Stepper stepper{mesh, config, frozen};
      dt = std::clamp(std::min(dt, config.t_max - t), config.dt_min, config.dt_max);
      StepResult sr;
      if (config.integrator == Integrator::RK4Fixed) {
        sr = rk4_step(stepper, *family, v0, dt);
        if (!sr.accepted) {
          fail(sr.fail_reason, sr.surgery_needed);
          break;
        }
      } else {
        while (true) {
          sr = rk45_step(stepper, *family, v0, dt, config);
          if (sr.accepted) break;
          ++result.rejected_steps;
          if (dt <= config.dt_min) break;
          dt = sr.dt_next;
        }
        if (!sr.accepted) {
          fail(sr.fail_reason.empty() ? "dt_min reached while rejecting steps" : sr.fail_reason,
               sr.surgery_needed);
          break;
        }
      }

      family->advance(mesh, sr.du);
      u += sr.du;
      t += sr.dt_taken;
      dt = sr.dt_next;
      ++result.accepted_steps;

      if (config.surgery != SurgeryMode::Off) {
        auto events = flip_to_delaunay(mesh, *family, t, trigger);
        for (auto& ev : events) {
          result.max_flip_area_drift =
              std::max(result.max_flip_area_drift, std::abs(ev.area_after - ev.area_before));
          result.flip_events.push_back(ev);
        }
        flips_this_record += static_cast<int>(events.size());
        if (!events.empty()) {
          const MetricState ms = compute_metric(mesh, family->lengths(), family->background());
          if (trigger == FlipTrigger::MetricDelaunay) {
            const DelaunayReport rep = delaunay_check(mesh, ms);
            result.max_post_surgery_violation =
                std::max(result.max_post_surgery_violation, -rep.min_slack);
          }
        }
      }
    }
  } catch (const Error& err) {
    fail(err.what(), false);
  }

  result.final_mesh = mesh;
  result.final_lengths = family->lengths();
  result.final_u = u;
  result.fitted_decay_rate = decay_rate(result.trace);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

FlowResult run_flow_with_surgery(const TriangulatedSurface& mesh, const ScalingFamily& family,
                                 FlowConfig config) {
  if (config.surgery == SurgeryMode::Off) config.surgery = SurgeryMode::Delaunay;
  validate_target(config, mesh, family.background());
  return run_flow(mesh, family, config);
}

FlowResult weighted_delaunay_surgery_mode(const TriangulatedSurface& mesh,
                                          const StructureFamily& family, FlowConfig config) {
  config.surgery = SurgeryMode::WeightedDelaunay;
  return run_flow(mesh, family, config);
}

double decay_rate(const std::vector<TraceRecord>& trace) {
  std::vector<std::pair<double, double>> pts; // (t, log calabi)
  for (const auto& r : trace)
    if (r.calabi > 1e-300) pts.push_back({r.t, std::log(r.calabi)});
  if (pts.size() < 3) return 0.0;
  // Fit on the last four decades of the decay, where the slowest mode
  // dominates; extend backwards if that leaves too few points.
  const double tail = pts.back().second;
  std::size_t begin = pts.size() - 1;
  while (begin > 0 && pts[begin - 1].second <= tail + 4.0 * std::log(10.0)) --begin;
  while (begin > 0 && pts.size() - begin < 6) --begin;
  double st = 0, sy = 0, stt = 0, sty = 0;
  const double n = static_cast<double>(pts.size() - begin);
  for (std::size_t i = begin; i < pts.size(); ++i) {
    st += pts[i].first;
    sy += pts[i].second;
    stt += pts[i].first * pts[i].first;
    sty += pts[i].first * pts[i].second;
  }
  const double denom = n * stt - st * st;
  if (denom <= 0.0) return 0.0;
  return -(n * sty - st * sy) / denom;
}

double conservation_monitor(const std::vector<TraceRecord>& trace) {
  if (trace.empty()) return 0.0;
  double drift = 0.0;
  for (const auto& r : trace) drift = std::max(drift, std::abs(r.sum_u - trace.front().sum_u));
  return drift;
}

double potential_F(const TriangulatedSurface& mesh, const StructureFamily& base,
                   const VectorXd& target_K, const VectorXd& u_end) {
  const DiscreteConformalStructure& dcs = *base.structure();
  for (int i = 0; i < dcs.num_vertices(); ++i)
    if (dcs.epsilon[i] != 1)
      throw Error(ErrorCode::PreconditionViolated, "potential defined for circle packings");
  const VectorXd d = u_end - dcs.u;

  // 16-point Gauss-Legendre nodes/weights on [-1, 1].
  static const double nodes[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                  0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                  0.9445750230732326, 0.9894009349916499};
  static const double weights[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                    0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                    0.0622535239386479, 0.0271524594117541};

  auto integrand = [&](double tau) {
    DiscreteConformalStructure probe = dcs;
    probe.u = dcs.u + tau * d;
    const VectorXd lengths = dcs_lengths(mesh, probe);
    const MetricState ms = compute_metric(mesh, lengths, dcs.background);
    return (ms.K - target_K).dot(d);
  };

  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int panels = 1; panels <= 1024; panels *= 2) {
    double sum = 0.0;
    const double w = 1.0 / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = (p + 0.5) * w;
      for (int q = 0; q < 8; ++q) {
        sum += weights[q] * integrand(mid + 0.5 * w * nodes[q]);
        sum += weights[q] * integrand(mid - 0.5 * w * nodes[q]);
      }
    }
    sum *= 0.5 * w;
    if (std::isfinite(prev) && std::abs(sum - prev) <= 1e-12 * (1.0 + std::abs(sum)))
      return sum;
    prev = sum;
  }
  throw Error(ErrorCode::QuadratureFailure, "line integral did not stabilize");
}

} // namespace ccflow
