#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "sngr/graph.hpp"

namespace sngr {

/// Thrown when the information matrix cannot be factorized. Carries the
/// variables spanning the deficient directions.
class SingularSystem : public std::runtime_error {
 public:
  explicit SingularSystem(std::vector<VarKey> keys);
  const std::vector<VarKey>& keys() const { return keys_; }

 private:
  std::vector<VarKey> keys_;
};

/// Column layout of the stacked tangent vector: poses first, then landmarks,
/// each in index order.
class Ordering {
 public:
  explicit Ordering(const FactorGraph& graph);

  Eigen::Index offset(const VarKey& key) const;
  Eigen::Index dim() const { return dim_; }
  const std::map<VarKey, Eigen::Index>& columns() const { return columns_; }

 private:
  std::map<VarKey, Eigen::Index> columns_;
  Eigen::Index dim_ = 0;
};

struct LinearSystem {
  Eigen::SparseMatrix<double> jacobian;
  Eigen::VectorXd residual;
  std::map<VarKey, Eigen::Index> column_index;
};

LinearSystem linearize(const FactorGraph& graph, const Values& values, const Ordering& ordering);

/// Gauss-Newton information matrix JᵀJ at `values`.
Eigen::SparseMatrix<double> information_matrix(const FactorGraph& graph, const Values& values);

/// Applies a stacked tangent step: pose ⊕ delta, landmark + delta.
Values retract(const Values& values, const Ordering& ordering, const Eigen::VectorXd& delta);

struct LmParams {
  double initial_lambda = 1e-4;
  double lambda_factor = 10.0;
  double step_tolerance = 1e-8;
  int max_iterations = 100;
};

struct SolveResult {
  Values values;
  int iterations = 0;
  bool converged = false;
  double initial_log_posterior = 0.0;
  double final_log_posterior = 0.0;
};

SolveResult solve_map_detailed(const FactorGraph& graph, const Values& initial,
                               const LmParams& params = {});

/// Levenberg-Marquardt MAP estimate. Throws SingularSystem when a graph
/// variable has no factor constraining it.
Values solve_map(const FactorGraph& graph, const Values& initial, const LmParams& params = {});

struct MarginalCov {
  Eigen::MatrixXd matrix;
  std::vector<VarKey> keys;

  /// Offset of a key's block inside `matrix`.
  Eigen::Index offset(const VarKey& key) const;
};

/// Block of (JᵀJ)⁻¹ for `keys`, in the given order, recovered by sparse
/// Cholesky back-substitution.
MarginalCov joint_marginal_covariance(const FactorGraph& graph, const Values& map,
                                      const std::vector<VarKey>& keys);

}  // namespace sngr
