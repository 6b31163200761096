#include "ssmkit/identification.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ssmkit/error.hpp"
#include "ssmkit/io.hpp"

namespace ssmkit {

namespace {

int sign(double x) { return (x > 0.0) - (x < 0.0); }

// Inverts the driving efficiency: k = 1/eta = tan(l + rho) / tan(l).
double mu_from_inverse_efficiency(double k, double lead_angle) {
  return std::tan(std::atan(k * std::tan(lead_angle)) - lead_angle);
}

}  // namespace

// --- Telemetry --------------------------------------------------------------

std::vector<int> TelemetryLog::joints() const {
  std::set<int> ids;
  for (const auto& r : records) ids.insert(r.joint_id);
  return {ids.begin(), ids.end()};
}

JointSeries TelemetryLog::joint(int id) const {
  JointSeries s;
  s.joint_id = id;
  for (const auto& r : records) {
    if (r.joint_id != id) continue;
    s.time.push_back(r.time);
    s.velocity.push_back(r.velocity);
    s.torque.push_back(r.torque);
  }
  return s;
}

void TelemetryLog::validate() const {
  for (int id : joints()) {
    const JointSeries s = joint(id);
    std::vector<double> dts;
    for (std::size_t i = 1; i < s.time.size(); ++i) {
      if (!(s.time[i] > s.time[i - 1])) {
        throw Error(ErrorCode::Precondition,
                    fmt::format("joint {}: timestamps not strictly increasing at t = {}", id, s.time[i]));
      }
      dts.push_back(s.time[i] - s.time[i - 1]);
    }
    if (dts.empty()) continue;
    std::nth_element(dts.begin(), dts.begin() + dts.size() / 2, dts.end());
    const double rate = 1.0 / dts[dts.size() / 2];
    if (std::abs(rate - nominal_rate_hz) > 0.1 * nominal_rate_hz) {
      throw Error(ErrorCode::Precondition,
                  fmt::format("joint {}: sample rate {:.4g} Hz is not within 10% of {:.4g} Hz", id,
                              rate, nominal_rate_hz));
    }
  }
}

TelemetryLog parse_telemetry_csv(std::istream& is) {
  TelemetryLog log;
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (header) {
      header = false;
      if (fields.size() != 4 || fields[0] != "time_s" || fields[1] != "joint_id" ||
          fields[2] != "velocity" || fields[3] != "torque") {
        throw Error(ErrorCode::Parse, "telemetry header must be 'time_s,joint_id,velocity,torque'");
      }
      continue;
    }
    if (fields.size() != 4) {
      throw Error(ErrorCode::Parse, fmt::format("telemetry line {}: expected 4 fields", line_no));
    }
    const std::string ctx = fmt::format("telemetry line {}", line_no);
    TelemetryRecord r;
    r.time = parse_number(fields[0], ctx);
    const double id = parse_number(fields[1], ctx);
    if (id != std::floor(id) || id < 1 || id > 4) {
      throw Error(ErrorCode::Parse, fmt::format("{}: joint_id must be 1..4", ctx));
    }
    r.joint_id = static_cast<int>(id);
    r.velocity = parse_number(fields[2], ctx);
    r.torque = parse_number(fields[3], ctx);
    log.records.push_back(r);
  }
  if (header) throw Error(ErrorCode::Parse, "telemetry CSV is empty");
  if (log.records.empty()) throw Error(ErrorCode::Parse, "telemetry CSV has no samples");
  return log;
}

TelemetryLog read_telemetry_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open '{}'", path.string()));
  return parse_telemetry_csv(in);
}

void write_telemetry_csv(std::ostream& os, const TelemetryLog& log) {
  os << "time_s,joint_id,velocity,torque\n";
  for (const auto& r : log.records) {
    os << format_number(r.time) << ',' << r.joint_id << ',' << format_number(r.velocity) << ','
       << format_number(r.torque) << '\n';
  }
}

// --- Steady segments -------------------------------------------------------

TorqueVelocityMap extract_steady_segments(const JointSeries& series, const SegmentOptions& options) {
  const std::size_t n = series.time.size();
  if (series.velocity.size() != n || series.torque.size() != n) {
    throw Error(ErrorCode::Precondition, "series columns differ in length");
  }
  if (!(options.velocity_tolerance > 0.0)) {
    throw Error(ErrorCode::Precondition, "velocity tolerance must be positive");
  }
  const auto& t = series.time;
  const auto& v = series.velocity;
  const auto& tau = series.torque;

  struct Accepted {
    MapPoint point;
    double sum_sq_dev = 0.0;  // for pooling
  };
  std::vector<Accepted> accepted;
  TorqueVelocityMap map;

  std::size_t i = 0;
  while (i < n) {
    // Grow while samples stay near the running mean.
    std::size_t end = i + 1;
    double sum = v[i];
    while (end < n && std::abs(v[end] - sum / static_cast<double>(end - i)) <= options.velocity_tolerance) {
      sum += v[end];
      ++end;
    }
    const double seg_mean = sum / static_cast<double>(end - i);
    const std::size_t start = i;
    i = end;
    if (std::abs(seg_mean) <= options.velocity_tolerance) continue;

    std::size_t first = start;
    while (first < end && t[first] < t[start] + options.discard_s) ++first;
    if (first >= end) continue;

    // Ramp samples close to the plateau level can pass the running-mean test
    // at either edge; trim edge samples that sit well off the median.
    std::vector<double> core(v.begin() + static_cast<std::ptrdiff_t>(first),
                             v.begin() + static_cast<std::ptrdiff_t>(end));
    std::nth_element(core.begin(), core.begin() + static_cast<std::ptrdiff_t>(core.size() / 2),
                     core.end());
    const double median = core[core.size() / 2];
    const double edge_tol = 0.25 * options.velocity_tolerance;
    while (end > first && std::abs(v[end - 1] - median) > edge_tol) --end;
    while (first < end && std::abs(v[first] - median) > edge_tol) ++first;
    // The sample right before a velocity step sees the step's acceleration in
    // its torque even though its velocity is still on the plateau.
    if (end < n && end - first > 1) --end;
    if (first >= end) continue;
    const std::size_t count = end - first;
    if (count < options.min_samples || t[end - 1] - t[first] < options.min_duration_s) continue;

    Accepted a;
    double vsum = 0.0, tsum = 0.0;
    for (std::size_t k = first; k < end; ++k) {
      vsum += v[k];
      tsum += tau[k];
    }
    a.point.count = count;
    a.point.velocity = vsum / static_cast<double>(count);
    a.point.torque_mean = tsum / static_cast<double>(count);
    for (std::size_t k = first; k < end; ++k) {
      const double d = tau[k] - a.point.torque_mean;
      a.sum_sq_dev += d * d;
    }
    a.point.torque_std = count > 1 ? std::sqrt(a.sum_sq_dev / static_cast<double>(count - 1)) : 0.0;
    accepted.push_back(a);

    // Breakaway: walk back over the ramp to the last rest sample.
    const int dir = sign(a.point.velocity);
    const double threshold = 1e-3 * std::abs(a.point.velocity);
    std::ptrdiff_t j = static_cast<std::ptrdiff_t>(start) - 1;
    while (j >= 0 && std::abs(v[j]) > threshold && sign(v[j]) == dir) --j;
    if (j < 1 || static_cast<std::size_t>(j) + 1 >= n) continue;
    std::ptrdiff_t r = j;
    while (r > 0 && std::abs(v[r - 1]) <= threshold) --r;
    if (t[j] - t[r] < options.min_rest_s) continue;
    BreakawaySample b;
    b.direction = dir;
    b.torque = tau[j];
    b.acceleration = (v[j + 1] - v[j - 1]) / (t[j + 1] - t[j - 1]);
    map.breakaway.push_back(b);
  }

  // Repeated plateaus at the same level become one point.
  std::sort(accepted.begin(), accepted.end(),
            [](const Accepted& x, const Accepted& y) { return x.point.velocity < y.point.velocity; });
  std::vector<Accepted> merged;
  for (const auto& a : accepted) {
    if (!merged.empty()) {
      Accepted& m = merged.back();
      if (sign(m.point.velocity) == sign(a.point.velocity) &&
          std::abs(m.point.velocity - a.point.velocity) <= options.velocity_tolerance) {
        const double n1 = static_cast<double>(m.point.count);
        const double n2 = static_cast<double>(a.point.count);
        const double mean = (n1 * m.point.torque_mean + n2 * a.point.torque_mean) / (n1 + n2);
        m.sum_sq_dev += a.sum_sq_dev + n1 * std::pow(m.point.torque_mean - mean, 2) +
                        n2 * std::pow(a.point.torque_mean - mean, 2);
        m.point.velocity = (n1 * m.point.velocity + n2 * a.point.velocity) / (n1 + n2);
        m.point.torque_mean = mean;
        m.point.count += a.point.count;
        m.point.torque_std = std::sqrt(m.sum_sq_dev / (n1 + n2 - 1.0));
        continue;
      }
    }
    merged.push_back(a);
  }
  for (const auto& a : merged) {
    (a.point.velocity > 0.0 ? map.positive : map.negative).push_back(a.point);
  }
  if (map.size() == 0) {
    throw Error(ErrorCode::InsufficientData,
                fmt::format("joint {}: no steady constant-velocity segment found", series.joint_id));
  }
  return map;
}

TorqueVelocityMap extract_steady_segments(const TelemetryLog& log, int joint_id,
                                          const SegmentOptions& options) {
  const JointSeries s = log.joint(joint_id);
  if (s.time.empty()) {
    throw Error(ErrorCode::InsufficientData, fmt::format("no samples for joint {}", joint_id));
  }
  return extract_steady_segments(s, options);
}

// --- Fit ---------------------------------------------------------------------

FitReport fit_friction(const TorqueVelocityMap& map, const TransmissionSpec& spec, double test_load,
                       const FitOptions& options) {
  spec.validate();
  std::vector<MapPoint> pts = map.negative;
  pts.insert(pts.end(), map.positive.begin(), map.positive.end());

  std::set<double> distinct;
  for (const auto& p : pts) {
    if (p.velocity != 0.0) distinct.insert(p.velocity);
  }
  if (distinct.size() < 3) {
    throw Error(ErrorCode::RankDeficient,
                fmt::format("{} distinct nonzero velocities cannot separate b_c, b_v and mu_c",
                            distinct.size()));
  }

  FitReport report;
  report.test_load = test_load;
  report.points = pts.size();
  report.one_direction = map.positive.empty() || map.negative.empty();

  const auto n = static_cast<Eigen::Index>(pts.size());
  const double r = spec.ratio;
  const double lambda = spec.lead_angle;
  bool has_driving = false;
  for (const auto& p : pts) has_driving |= test_load * sign(p.velocity) > 0.0;
  report.mu_c_identified = test_load != 0.0 && !report.one_direction && has_driving;

  const Eigen::Index cols = report.mu_c_identified ? 3 : 2;
  Eigen::MatrixXd a(n, cols);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = pts[i].velocity;
    a(i, 0) = sign(w);
    a(i, 1) = r * w;
    if (cols == 3) a(i, 2) = test_load * sign(w) > 0.0 ? test_load / r : 0.0;
    y(i) = pts[i].torque_mean;
  }

  // Points are weighted by their standard error when every point carries
  // one; a noiseless map (zero spread) falls back to equal weights.
  Eigen::VectorXd weight = Eigen::VectorXd::Ones(n);
  const bool weighted = std::all_of(pts.begin(), pts.end(), [](const MapPoint& p) {
    return p.count > 0 && p.torque_std > 0.0 && std::isfinite(p.torque_std);
  });
  if (weighted) {
    for (Eigen::Index i = 0; i < n; ++i) {
      weight(i) = std::sqrt(static_cast<double>(pts[i].count)) / pts[i].torque_std;
    }
    weight /= weight.maxCoeff();
  }
  const Eigen::MatrixXd aw = weight.asDiagonal() * a;

  // Column scaling, then rank check on the scaled design.
  Eigen::VectorXd scale(cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    scale(c) = aw.col(c).cwiseAbs().maxCoeff();
    if (scale(c) == 0.0) scale(c) = 1.0;
  }
  const Eigen::MatrixXd as = aw * scale.cwiseInverse().asDiagonal();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(as);
  const auto& sv = svd.singularValues();
  if (sv(cols - 1) <= 1e-10 * sv(0)) {
    throw Error(ErrorCode::RankDeficient, "map velocities cannot separate the friction terms");
  }
  const Eigen::MatrixXd normal = as.transpose() * as;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);

  FrictionParams current;
  current.mu_c = options.prior_mu_c.value_or(0.0);
  current.mu_s = current.mu_c;

  // Load contribution not carried by a regressor column: everything when
  // mu_c is not identified, the overhauling rows otherwise.
  const auto offsets = [&](const FrictionParams& fp) {
    Eigen::VectorXd off = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int s = sign(pts[i].velocity);
      if (cols == 3 && test_load * s > 0.0) continue;
      off(i) = reflected_load_torque(spec, fp, test_load, s);
    }
    return off;
  };

  Eigen::VectorXd x(cols);
  double k_drive = 1.0;
  for (int iter = 0; iter <= options.max_refinements; ++iter) {
    const Eigen::VectorXd xs =
        ldlt.solve(as.transpose() * weight.cwiseProduct(y - offsets(current)));
    x = xs.cwiseQuotient(scale);
    if (cols < 3) break;
    k_drive = x(2);
    FrictionParams next = current;
    next.mu_c = k_drive > 1.0 ? mu_from_inverse_efficiency(k_drive, lambda) : 0.0;
    next.mu_s = next.mu_c;
    const bool converged = std::abs(next.mu_c - current.mu_c) <= 1e-15 * std::max(1.0, next.mu_c);
    current = next;
    if (converged) break;
  }

  FrictionParams& fp = report.params;
  fp.b_c = x(0);
  fp.b_v = x(1);
  if (cols == 3) {
    if (k_drive <= 1.0) {
      report.warnings.push_back(fmt::format(
          "fitted inverse efficiency {:.6g} <= 1 implies negative mu_c; clamped to 0", k_drive));
      fp.mu_c = 0.0;
    } else {
      fp.mu_c = mu_from_inverse_efficiency(k_drive, lambda);
    }
  } else {
    fp.mu_c = current.mu_c;
    report.warnings.push_back(
        options.prior_mu_c
            ? "mu_c not identifiable from this map (needs a nonzero test load and both directions); "
              "prior value kept"
            : "mu_c not identifiable from this map (needs a nonzero test load and both directions); "
              "set to 0");
  }
  if (fp.b_c < 0.0) {
    report.warnings.push_back(fmt::format("fitted b_c {:.6g} < 0 clamped to 0", fp.b_c));
    fp.b_c = 0.0;
  }
  if (fp.b_v < 0.0) {
    report.warnings.push_back(fmt::format("fitted b_v {:.6g} < 0 clamped to 0", fp.b_v));
    fp.b_v = 0.0;
  }
  if (report.one_direction) {
    report.warnings.push_back("map covers one direction only");
  }

  // Confidence half-widths from the residual variance.
  const Eigen::VectorXd fitted = a * x + offsets(fp);
  const Eigen::VectorXd res = weight.cwiseProduct(y - fitted);
  if (n > cols) {
    const double sigma2 = res.squaredNorm() / static_cast<double>(n - cols);
    const Eigen::MatrixXd cov =
        scale.cwiseInverse().asDiagonal() * ldlt.solve(Eigen::MatrixXd::Identity(cols, cols)) *
        scale.cwiseInverse().asDiagonal() * sigma2;
    report.half_width_b_c = 1.96 * std::sqrt(cov(0, 0));
    report.half_width_b_v = 1.96 * std::sqrt(cov(1, 1));
    if (cols == 3 && k_drive > 1.0) {
      const double tl = std::tan(lambda);
      const double rho = std::atan(k_drive * tl) - lambda;
      const double dmu_dk = tl / ((1.0 + k_drive * k_drive * tl * tl) * std::pow(std::cos(rho), 2));
      report.half_width_mu_c = 1.96 * std::sqrt(cov(2, 2)) * dmu_dk;
    }
  }

  // Static friction from breakaway samples in the driving direction.
  double k_static_sum = 0.0;
  int k_static_count = 0;
  for (const auto& b : map.breakaway) {
    if (test_load * b.direction <= 0.0) continue;
    const double load_part = b.torque - spec.reflected_inertia * r * b.acceleration - fp.b_c * b.direction;
    k_static_sum += load_part * r / test_load;
    ++k_static_count;
  }
  if (k_static_count > 0) {
    const double k_static = k_static_sum / k_static_count;
    fp.mu_s = k_static > 1.0 ? mu_from_inverse_efficiency(k_static, lambda) : 0.0;
    if (fp.mu_s < fp.mu_c) {
      report.warnings.push_back(
          fmt::format("breakaway mu_s {:.6g} below mu_c; raised to mu_c", fp.mu_s));
      fp.mu_s = fp.mu_c;
    }
  } else {
    fp.mu_s = fp.mu_c;
    report.mu_s_defaulted = true;
    report.warnings.push_back("no driving breakaway samples; mu_s defaults to mu_c");
  }

  // Residuals of the final (clamped) model at the map points.
  std::vector<double> model(pts.size()), meas(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    model[i] = motor_torque(spec, fp, test_load, pts[i].velocity, 0.0);
    meas[i] = pts[i].torque_mean;
  }
  const auto [lo, hi] = std::minmax_element(meas.begin(), meas.end());
  const double range = *hi - *lo;
  if (range > 1e-12) {
    const auto rms_over = [&](auto pred) {
      double s = 0.0;
      int c = 0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!pred(pts[i].velocity)) continue;
        s += std::pow(model[i] - meas[i], 2);
        ++c;
      }
      return c ? std::sqrt(s / c) / range : std::numeric_limits<double>::quiet_NaN();
    };
    report.residual = rms_over([](double) { return true; });
    report.residual_positive = rms_over([](double w) { return w > 0.0; });
    report.residual_negative = rms_over([](double w) { return w < 0.0; });
  }
  return report;
}

double evaluate_model(const FitReport& report, const TransmissionSpec& spec,
                      const JointTrajectory& trajectory, const TorqueTrace& measured,
                      const LoadFunction& load) {
  const TorqueTrace simulated = inverse_dynamics(spec, report.params, load, trajectory);
  return nrmsd(simulated, measured);
}

std::string fit_report_json(const TransmissionSpec& spec, const FitReport& report, int precision) {
  using nlohmann::json;
  json j = json::parse(joint_config_json(spec, report.params, precision));
  const auto num = [&](double v) -> json {
    if (!std::isfinite(v)) return nullptr;
    return std::stod(format_number(v, precision));
  };
  json fit = json::object();
  fit["residual_nrmsd"] = num(report.residual);
  fit["residual_positive"] = num(report.residual_positive);
  fit["residual_negative"] = num(report.residual_negative);
  fit["half_width_b_c"] = num(report.half_width_b_c);
  fit["half_width_b_v"] = num(report.half_width_b_v);
  fit["half_width_mu_c"] = num(report.half_width_mu_c);
  fit["test_load"] = num(report.test_load);
  fit["points"] = report.points;
  fit["one_direction"] = report.one_direction;
  fit["mu_c_identified"] = report.mu_c_identified;
  fit["mu_s_defaulted"] = report.mu_s_defaulted;
  fit["warnings"] = report.warnings;
  j["fit"] = fit;
  return j.dump(2);
}

// --- Synthesis -------------------------------------------------------------

JointSeries synthesize_constant_velocity_series(const TransmissionSpec& spec,
                                                const FrictionParams& params, double load,
                                                const std::vector<double>& velocities,
                                                const SynthesisOptions& options) {
  const double dt = 1.0 / options.rate_hz;
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> vel;
  const auto rest = [&] {
    const auto m = static_cast<std::size_t>(std::llround(options.rest_s * options.rate_hz));
    vel.insert(vel.end(), m, 0.0);
  };
  const auto ramp = [&](double from, double to) {
    const auto steps =
        static_cast<std::size_t>(std::ceil(std::abs(to - from) / (options.acceleration * dt)));
    for (std::size_t k = 1; k < steps; ++k) {
      vel.push_back(from + (to - from) * static_cast<double>(k) / static_cast<double>(steps));
    }
  };

  rest();
  for (double v : velocities) {
    ramp(0.0, v);
    const auto m = static_cast<std::size_t>(std::llround(options.plateau_s * options.rate_hz));
    for (std::size_t k = 0; k < m; ++k) {
      vel.push_back(v * (1.0 + options.velocity_noise * gauss(rng)));
    }
    ramp(v, 0.0);
    rest();
  }

  JointTrajectory traj;
  traj.velocity = vel;
  traj.time.resize(vel.size());
  for (std::size_t k = 0; k < vel.size(); ++k) traj.time[k] = static_cast<double>(k) * dt;
  const TorqueTrace trace =
      inverse_dynamics(spec, params, [load](double) { return load; }, traj);

  JointSeries s;
  s.time = traj.time;
  s.velocity = traj.velocity;
  s.torque = trace.torque;
  if (options.torque_noise > 0.0) {
    for (double& tq : s.torque) tq *= 1.0 + options.torque_noise * gauss(rng);
  }
  return s;
}

}  // namespace ssmkit
