#pragma once

#include <functional>
#include <string_view>
#include <utility>
#include <vector>

#include "mast/affinity.hpp"
#include "mast/feature_model.hpp"

namespace mast {

/// How each curvilinear search picks its first trial step.
enum class StepRule {
  /// tau_growth times the step the block accepted last time.
  Growth,
  /// Barzilai-Borwein estimate from the block's last two iterates,
  /// alternating the two BB formulas.
  BarzilaiBorwein,
};

std::string_view to_string(StepRule rule);
/// "growth" or "barzilai_borwein"; anything else is InvalidConfig.
StepRule parse_step_rule(std::string_view text);

struct SolverConfig {
  int max_iterations = 100;
  /// Convergence threshold on both Frobenius gradient residuals.
  double epsilon = 1e-6;
  /// Initial trial step of the first curvilinear search of each block.
  double tau_init = 1e-2;
  double backtrack_factor = 0.5;
  double armijo_c1 = 1e-4;
  int max_backtracks = 30;
  /// The next search of a block starts from tau_growth times the step it
  /// last accepted. 1 keeps every search starting at tau_init.
  double tau_growth = 2.0;
  StepRule step_rule = StepRule::BarzilaiBorwein;

  /// Throws InvalidConfig when a field is out of range.
  void validate() const;
};

enum class Termination { Converged, MaxIterations };

std::string_view to_string(Termination termination);

struct StepPair {
  double tau_c = 0.0;
  double tau_s = 0.0;
};

struct SolverReport {
  int iterations_run = 0;
  /// objective_cross at the identity start.
  double initial_objective = 0.0;
  std::vector<double> objective_trace;
  std::vector<double> residual_c_trace;
  std::vector<double> residual_s_trace;
  std::vector<StepPair> tau_trace;
  /// Iterations where a block search found no acceptable step.
  std::vector<int> stalled_iterations;
  Termination termination = Termination::MaxIterations;
};

/// K = F_c U_cs F_sᵀ, the only data the cross objective depends on.
struct CrossKernel {
  Matrix k_matrix;

  static CrossKernel build(const FeatureMap& content, const FeatureMap& style,
                           const NormalizedAffinity& affinity);
};

/// −2·tr(P_cᵀ K P_s).
double objective_cross(const ProjectionPair& pair, const CrossKernel& kernel);

/// tr(Z_c D_c Z_cᵀ), with Z_c = P_cᵀ F_c.
double content_trace(const Matrix& p_c, const FeatureMap& content,
                     const NormalizedAffinity& affinity);
/// tr(Z_s D_s Z_sᵀ), with Z_s = P_sᵀ F_s.
double style_trace(const Matrix& p_s, const FeatureMap& style, const NormalizedAffinity& affinity);

/// Full alignment cost: both degree-weighted traces plus the cross term.
/// Equals (1/N) Σ A_ij ‖z_i − z_j‖².
double objective_full(const ProjectionPair& pair, const FeatureMap& content,
                      const FeatureMap& style, const NormalizedAffinity& affinity);

/// ∂J/∂P_c = −2 K P_s.
Matrix gradient_pc(const ProjectionPair& pair, const CrossKernel& kernel);
/// ∂J/∂P_s = −2 Kᵀ P_c.
Matrix gradient_ps(const ProjectionPair& pair, const CrossKernel& kernel);

/// S = G Pᵀ − P Gᵀ, exactly skew-symmetric.
Matrix skew_step(const Matrix& gradient, const Matrix& p);

/// Cayley retraction Y(τ) = (I + τ/2 S)⁻¹ (I − τ/2 S) P.
Matrix cayley_retract(const Matrix& p, const Matrix& s, double tau);

struct SearchResult {
  double tau = 0.0;
  Matrix p;
  double objective = 0.0;
  int backtracks = 0;
  bool stalled = false;
};

/// Objective as a function of a candidate point on the path.
using PathObjective = std::function<double(const Matrix&)>;

/// Monotone Armijo backtracking along the Cayley curve. Accepts the largest
/// τ = tau_init·backtrack_factor^m with
///   f(Y(τ)) ≤ f(P) − armijo_c1·τ·‖S‖²/2,
/// or returns τ = 0 and P unchanged (stalled) when none of the trials do.
SearchResult curvilinear_search(const Matrix& p, const Matrix& s, const PathObjective& objective,
                                double tau_init, const SolverConfig& config);

struct AlignResult {
  ProjectionPair pair;
  SolverReport report;
};

/// Called after every iteration with the iteration index and current pair.
using IterationObserver = std::function<void(int, const ProjectionPair&)>;

/// Alternating Cayley descent on the cross objective from P_c = P_s = I.
AlignResult align(const CrossKernel& kernel, const SolverConfig& config = {},
                  const IterationObserver& observer = {});
AlignResult align(const FeatureMap& content, const FeatureMap& style,
                  const NormalizedAffinity& affinity, const SolverConfig& config = {},
                  const IterationObserver& observer = {});

struct ProcrustesOptimum {
  /// V Uᵀ for K = U Σ Vᵀ; the optimal P_s P_cᵀ when singular values are distinct.
  Matrix transfer;
  /// −2·‖K‖_*.
  double objective = 0.0;
  Vector singular_values;
};

/// Closed-form optimum of min −2·tr(P_cᵀ K P_s) over orthogonal pairs.
ProcrustesOptimum procrustes_oracle(const CrossKernel& kernel);

}  // namespace mast
