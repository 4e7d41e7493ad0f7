#pragma once

// Inner proximal ADMM for the linearized convexity-constrained problem and
// the outer relinearization loop around it.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cvp/convexity.hpp"
#include "cvp/dataterm.hpp"
#include "cvp/field.hpp"

namespace cvp {

/// Largest supported P + 1.
inline constexpr int kMaxChannels = 16;

enum class AlphaMode {
  kFixed,  ///< alpha = 1 + mu
  kSafe,   ///< alpha = 1.01 mu |A|^2, |A|^2 from 20 power iterations
};

struct AdmmParams {
  double mu = 1.0;
  double tau = 1.0;
  AlphaMode alpha_mode = AlphaMode::kSafe;
  int max_iterations = 5000;  ///< J
  double kkt_tol = 1e-5;
  /// Carry v and z across outer iterations (matched by radius) instead of
  /// restarting them at zero.
  bool warm_multipliers = true;

  /// Throws std::invalid_argument unless mu > 0, tau in (0, golden ratio), J >= 1.
  void validate() const;
};

enum class ScheduleKind { kSegment, kHull };

struct OuterParams {
  double lambda = 2.0;
  double sigma = 0.01;
  double theta = 0.1;
  int belt_radius = 3;
  double omega = 0.1;
  double eps = 1e-3;
  ScheduleKind schedule = ScheduleKind::kSegment;
  int check_stride = 100;
  int max_outer = 5000;
  int inner_budget = 10;
  /// Replaces the schedule for every k when nonempty.
  std::vector<int> radii_override;
  /// Select belt pixels with |u - b*u| < theta instead of > theta.
  bool belt_literal = false;
  double violation_tol = 1e-6;
  LinearizationForm linearization = LinearizationForm::kTaylor;

  void validate() const;
};

/// Radii for outer iteration k.
std::vector<int> radii_schedule(int k, ScheduleKind kind);

/// Euclidean projection onto the probability simplex by the sorted scan.
/// Returns the threshold t* with out = max(xi - t*, 0).
double simplex_project(std::span<const double> xi, std::span<double> out);

/// Per pixel: pinned -> one-hot of the pin; outside the belt -> u_prev;
/// otherwise the simplex projection of xi. Stacks are channel-major.
void pinned_project(std::span<const double> xi, std::span<const int> pins, const BeltMask& belt,
                    const LabelStack& u_prev, LabelStack& out);

struct InnerStats {
  int iterations = 0;
  double primal_residual = 0.0;  ///< |A u - v - c|
  double dual_movement = 0.0;    ///< |v_{j+1} - v_j|
  double alpha = 0.0;
  bool converged = false;
};

/// Iterate bundle. v and z are keyed by the radii they were built for.
struct SolveState {
  LabelStack u;
  StackedField v;
  StackedField z;
  std::vector<int> radii;
  int k = 0;
  InnerStats inner;

  std::vector<double> objective_history;
  std::vector<long> violation_history;
  std::vector<std::size_t> belt_history;
  std::vector<double> err_history;  ///< one entry per check_stride block
  bool converged = false;
  bool hit_outer_cap = false;
};

/// Power-iteration estimate of |A_k|^2 (20 iterations, fixed seed).
double estimate_operator_norm_sq(const LinearizedConstraint& lin, int iterations = 20, std::uint64_t seed = 7);

double choose_alpha(const LinearizedConstraint& lin, const AdmmParams& params);

/// Proximal ADMM on min <g', u> s.t. A_k u - v = c_k, v >= 0, u in the
/// simplex with pins and belt freezing. Starts from (warm.u, v0, z0) where v0,
/// z0 come from `warm` when warm_multipliers is set and the radius matches,
/// else zero. Runs at most `iterations` steps, stopping early on the KKT test.
/// Throws NumericalDivergence on a non-finite iterate. The work is restricted
/// to the belt and its r_max neighborhood.
SolveState admm_solve(const LinearizedConstraint& lin, const MultiField& gprime, const AdmmParams& params,
                      double alpha, std::span<const int> pins, const BeltMask& belt, const SolveState& warm,
                      int iterations, int outer_index = 0);

namespace reference {
/// Same iteration on the full grid with direct-tap convolutions. Test oracle.
SolveState admm_solve(const LinearizedConstraint& lin, const MultiField& gprime, const AdmmParams& params,
                      double alpha, std::span<const int> pins, const BeltMask& belt, const SolveState& warm,
                      int iterations, int outer_index = 0);
}  // namespace reference

/// KKT residuals of the split problem at (u, v, z):
/// stationarity in u (projected-gradient form), complementarity in v, and
/// primal feasibility |A u - v - c|.
struct KktResiduals {
  double stationarity_u = 0.0;
  double stationarity_v = 0.0;
  double primal = 0.0;
};
KktResiduals kkt_residuals(const LinearizedConstraint& lin, const MultiField& gprime, std::span<const int> pins,
                           const BeltMask& belt, const SolveState& s);

enum class Task { kSegment, kHullClean, kHullNoisy };

/// Segment: u_j = rasterized hull of R_j, background takes the rest (pixels in
/// several hulls are split evenly). Hull tasks: u_1 = rasterized point set.
LabelStack initialize_segment(const ScribbleSet& scribbles);
LabelStack initialize_hull(const PointSet& points, const Grid2D& grid);

/// |u_now - u_then| / |u_then| (Frobenius over all channels).
double relative_change(const LabelStack& u_now, const LabelStack& u_then);

struct Progress {
  int k = 0;
  double objective = 0.0;
  long violations = 0;
  std::size_t belt_size = 0;
  std::optional<double> err;
  const LabelStack* u = nullptr;
};

/// Return false to stop at the next outer boundary.
using ProgressFn = std::function<bool(const Progress&)>;

/// Outer relinearization loop.
SolveState outer_solve(const Objective& objective, const OuterParams& params, const AdmmParams& admm,
                       const LabelStack& u0, const ProgressFn& progress = {});

}  // namespace cvp
