#include "mast/stiefel_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "mast/error.hpp"

namespace mast {

std::string_view to_string(StepRule rule) {
  return rule == StepRule::Growth ? "growth" : "barzilai_borwein";
}

StepRule parse_step_rule(std::string_view text) {
  if (text == "growth") return StepRule::Growth;
  if (text == "barzilai_borwein") return StepRule::BarzilaiBorwein;
  fail(ErrorCode::InvalidConfig, "unknown step_rule '" + std::string(text) + "'");
}

void SolverConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) fail(ErrorCode::InvalidConfig, what);
  };
  require(max_iterations >= 1, "max_iterations must be >= 1");
  require(epsilon >= 0.0, "epsilon must be nonnegative");
  require(tau_init > 0.0, "tau_init must be positive");
  require(backtrack_factor > 0.0 && backtrack_factor < 1.0, "backtrack_factor must be in (0,1)");
  require(armijo_c1 > 0.0 && armijo_c1 < 1.0, "armijo_c1 must be in (0,1)");
  require(max_backtracks >= 1, "max_backtracks must be >= 1");
  require(tau_growth >= 1.0, "tau_growth must be >= 1");
}

std::string_view to_string(Termination termination) {
  return termination == Termination::Converged ? "Converged" : "MaxIterations";
}

CrossKernel CrossKernel::build(const FeatureMap& content, const FeatureMap& style,
                               const NormalizedAffinity& affinity) {
  if (content.channels() != style.channels()) {
    fail(ErrorCode::ChannelMismatch, "content and style channel counts differ");
  }
  if (affinity.u_cs.rows() != content.locations() || affinity.u_cs.cols() != style.locations()) {
    fail(ErrorCode::ShapeMismatch, "affinity does not match feature map sizes");
  }
  if (affinity.pair_count == 0) fail(ErrorCode::EmptyAffinity, "affinity has no correspondences");
  // Every nonzero of U_cs equals 1/N: sum neighbours unweighted, accumulate
  // outer products, and scale once so symmetric pairings give a bitwise
  // symmetric K.
  const Matrix& fc = content.data();
  const Matrix& fs = style.data();
  Matrix neighbour_sums = Matrix::Zero(fc.rows(), fc.cols());
  for (int o = 0; o < affinity.u_cs.outerSize(); ++o) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(affinity.u_cs, o); it; ++it) {
      neighbour_sums.col(it.row()) += fs.col(it.col());
    }
  }
  Matrix k = Matrix::Zero(fc.rows(), fc.rows());
  for (Eigen::Index i = 0; i < fc.cols(); ++i) {
    if (affinity.d_c(i) != 0.0) k.noalias() += fc.col(i) * neighbour_sums.col(i).transpose();
  }
  return {k / static_cast<double>(affinity.pair_count)};
}

namespace {

void check_square(const Matrix& m, Eigen::Index n, const char* what) {
  if (m.rows() != n || m.cols() != n) {
    fail(ErrorCode::DimensionMismatch, std::string(what) + " must be " + std::to_string(n) + "x" +
                                           std::to_string(n));
  }
}

void check_pair_kernel(const ProjectionPair& pair, const CrossKernel& kernel) {
  check_square(kernel.k_matrix, pair.channels(), "kernel");
}

double trace_with_degrees(const Matrix& p, const Matrix& features, const Vector& degrees) {
  if (p.rows() != features.rows() || degrees.size() != features.cols()) {
    fail(ErrorCode::DimensionMismatch, "projection, features and degrees disagree");
  }
  const Matrix z = p.transpose() * features;
  return z.colwise().squaredNorm().dot(degrees);
}

// Chooses the first trial step of each search for one block of the
// alternating scheme.
class BlockStepper {
 public:
  explicit BlockStepper(const SolverConfig& config) : config_(config), next_(config.tau_init) {}

  double trial_step(const Matrix& p, const Matrix& s) {
    if (config_.step_rule != StepRule::BarzilaiBorwein || !have_previous_) return next_;
    // Riemannian gradient S P; the path moves along -S P.
    const Matrix direction = s * p;
    const Matrix dx = p - previous_p_;
    const Matrix dg = direction - previous_direction_;
    const double xx = dx.squaredNorm(), xg = std::abs((dx.cwiseProduct(dg)).sum()),
                 gg = dg.squaredNorm();
    const double bb = (++count_ % 2 == 1) ? (xg > 0 ? xx / xg : 0.0) : (gg > 0 ? xg / gg : 0.0);
    return std::isfinite(bb) && bb > 0.0 ? std::clamp(bb, 1e-20, 1e20) : next_;
  }

  void record(const SearchResult& step, const Matrix& p, const Matrix& s) {
    if (step.stalled) {
      next_ = config_.tau_init;
      have_previous_ = false;
      return;
    }
    if (step.tau > 0.0) next_ = step.tau * config_.tau_growth;
    previous_p_ = p;
    previous_direction_ = s * p;
    have_previous_ = true;
  }

 private:
  const SolverConfig& config_;
  double next_;
  bool have_previous_ = false;
  int count_ = 0;
  Matrix previous_p_;
  Matrix previous_direction_;
};

}  // namespace

double objective_cross(const ProjectionPair& pair, const CrossKernel& kernel) {
  check_pair_kernel(pair, kernel);
  return -2.0 * (pair.p_c.transpose() * kernel.k_matrix * pair.p_s).trace();
}

double content_trace(const Matrix& p_c, const FeatureMap& content,
                     const NormalizedAffinity& affinity) {
  return trace_with_degrees(p_c, content.data(), affinity.d_c);
}

double style_trace(const Matrix& p_s, const FeatureMap& style, const NormalizedAffinity& affinity) {
  return trace_with_degrees(p_s, style.data(), affinity.d_s);
}

double objective_full(const ProjectionPair& pair, const FeatureMap& content,
                      const FeatureMap& style, const NormalizedAffinity& affinity) {
  if (content.channels() != pair.channels() || style.channels() != pair.channels()) {
    fail(ErrorCode::DimensionMismatch, "projection size differs from channel count");
  }
  const Matrix z_c = pair.p_c.transpose() * content.data();
  const Matrix z_s = pair.p_s.transpose() * style.data();
  if (affinity.u_cs.rows() != z_c.cols() || affinity.u_cs.cols() != z_s.cols()) {
    fail(ErrorCode::DimensionMismatch, "affinity does not match feature map sizes");
  }
  const double cross = (z_c * (affinity.u_cs * z_s.transpose())).trace();
  return content_trace(pair.p_c, content, affinity) + style_trace(pair.p_s, style, affinity) -
         2.0 * cross;
}

Matrix gradient_pc(const ProjectionPair& pair, const CrossKernel& kernel) {
  check_pair_kernel(pair, kernel);
  return -2.0 * kernel.k_matrix * pair.p_s;
}

Matrix gradient_ps(const ProjectionPair& pair, const CrossKernel& kernel) {
  check_pair_kernel(pair, kernel);
  return -2.0 * kernel.k_matrix.transpose() * pair.p_c;
}

Matrix skew_step(const Matrix& gradient, const Matrix& p) {
  check_square(p, p.rows(), "projection");
  check_square(gradient, p.rows(), "gradient");
  const Matrix gp = gradient * p.transpose();
  return gp - gp.transpose();
}

Matrix cayley_retract(const Matrix& p, const Matrix& s, double tau) {
  check_square(p, p.rows(), "projection");
  check_square(s, p.rows(), "skew step");
  if (tau == 0.0) return p;
  const Eigen::Index n = p.rows();
  const Matrix half = (0.5 * tau) * s;
  const Matrix lhs = Matrix::Identity(n, n) + half;
  const Matrix rhs = p - half * p;
  const Matrix y = lhs.partialPivLu().solve(rhs);
  const double residual = (lhs * y - rhs).norm() / std::max(1.0, rhs.norm());
  if (!std::isfinite(residual) || residual > 1e-8) {
    fail(ErrorCode::NumericalFailure,
         "Cayley solve residual " + std::to_string(residual) + " at tau " + std::to_string(tau));
  }
  return y;
}

SearchResult curvilinear_search(const Matrix& p, const Matrix& s, const PathObjective& objective,
                                double tau_init, const SolverConfig& config) {
  SearchResult result{0.0, p, objective(p), 0, false};
  const double s_norm_sq = s.squaredNorm();
  if (s_norm_sq == 0.0) return result;

  const double f0 = result.objective;
  double tau = tau_init;
  for (int m = 0; m <= config.max_backtracks; ++m, tau *= config.backtrack_factor) {
    Matrix y = cayley_retract(p, s, tau);
    const double f = objective(y);
    if (f <= f0 - config.armijo_c1 * tau * s_norm_sq / 2.0) {
      result.tau = tau;
      result.p = std::move(y);
      result.objective = f;
      result.backtracks = m;
      return result;
    }
  }
  result.backtracks = config.max_backtracks;
  result.stalled = true;
  return result;
}

AlignResult align(const CrossKernel& kernel, const SolverConfig& config,
                  const IterationObserver& observer) {
  config.validate();
  const Matrix& k = kernel.k_matrix;
  if (k.rows() != k.cols() || k.rows() == 0) {
    fail(ErrorCode::DimensionMismatch, "kernel must be square and nonempty");
  }
  if (!k.allFinite()) fail(ErrorCode::NonFinite, "kernel contains NaN or Inf");

  AlignResult out{ProjectionPair::identity(static_cast<int>(k.rows())), {}};
  ProjectionPair& pair = out.pair;
  SolverReport& report = out.report;
  report.initial_objective = objective_cross(pair, kernel);
  if (k.isZero(0.0)) {
    report.termination = Termination::Converged;
    return out;
  }

  BlockStepper stepper_c(config), stepper_s(config);

  for (int t = 0; t < config.max_iterations; ++t) {
    const Matrix g_c = gradient_pc(pair, kernel);
    const Matrix s_c = skew_step(g_c, pair.p_c);
    const Matrix k_ps = k * pair.p_s;
    const auto step_c = curvilinear_search(
        pair.p_c, s_c, [&](const Matrix& y) { return -2.0 * (y.cwiseProduct(k_ps)).sum(); },
        stepper_c.trial_step(pair.p_c, s_c), config);
    stepper_c.record(step_c, pair.p_c, s_c);
    pair.p_c = step_c.p;

    const Matrix g_s = gradient_ps(pair, kernel);
    const Matrix s_s = skew_step(g_s, pair.p_s);
    const Matrix kt_pc = k.transpose() * pair.p_c;
    const auto step_s = curvilinear_search(
        pair.p_s, s_s, [&](const Matrix& y) { return -2.0 * (y.cwiseProduct(kt_pc)).sum(); },
        stepper_s.trial_step(pair.p_s, s_s), config);
    stepper_s.record(step_s, pair.p_s, s_s);
    pair.p_s = step_s.p;

    const double residual_c = (g_c - pair.p_c * g_c.transpose() * pair.p_c).norm();
    const double residual_s = (g_s - pair.p_s * g_s.transpose() * pair.p_s).norm();
    report.iterations_run = t + 1;
    report.objective_trace.push_back(objective_cross(pair, kernel));
    report.residual_c_trace.push_back(residual_c);
    report.residual_s_trace.push_back(residual_s);
    report.tau_trace.push_back({step_c.tau, step_s.tau});
    if (step_c.stalled || step_s.stalled) report.stalled_iterations.push_back(t);
    if (observer) observer(t, pair);

    if (residual_c <= config.epsilon && residual_s <= config.epsilon) {
      report.termination = Termination::Converged;
      return out;
    }
  }
  report.termination = Termination::MaxIterations;
  return out;
}

AlignResult align(const FeatureMap& content, const FeatureMap& style,
                  const NormalizedAffinity& affinity, const SolverConfig& config,
                  const IterationObserver& observer) {
  return align(CrossKernel::build(content, style, affinity), config, observer);
}

ProcrustesOptimum procrustes_oracle(const CrossKernel& kernel) {
  const Eigen::JacobiSVD<Matrix> svd(kernel.k_matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {svd.matrixV() * svd.matrixU().transpose(), -2.0 * svd.singularValues().sum(),
          svd.singularValues()};
}

}  // namespace mast
