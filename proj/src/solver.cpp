#include "sngr/solver.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

namespace sngr {

namespace {

std::string describe(const std::vector<VarKey>& keys) {
  std::string out = "singular information matrix; rank-deficient variables:";
  for (const auto& k : keys) out += " " + to_string(k);
  return out;
}

void require_covered(const FactorGraph& graph, const Values& values) {
  for (const VarKey& key : graph.variables())
    if (!values.contains(key)) throw MissingVariable(key);
}

void require_constrained(const FactorGraph& graph) {
  std::set<VarKey> touched;
  for (const Factor& f : graph.factors())
    for (const VarKey& k : factor_keys(f)) touched.insert(k);
  std::vector<VarKey> free;
  for (const VarKey& key : graph.variables())
    if (!touched.count(key)) free.push_back(key);
  if (!free.empty()) throw SingularSystem(free);
}

// Variables with weight in the (numerical) null space of H.
std::vector<VarKey> deficient_variables(const Eigen::SparseMatrix<double>& H,
                                        const Ordering& ordering) {
  const Eigen::MatrixXd dense(H);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double scale = std::max(lambda.cwiseAbs().maxCoeff(), 1.0);
  std::set<VarKey> out;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > 1e-14 * scale) continue;
    const Eigen::VectorXd v = eig.eigenvectors().col(i);
    for (const auto& [key, col] : ordering.columns())
      if (v.segment(col, key.tangent_dim()).norm() > 1e-3) out.insert(key);
  }
  return {out.begin(), out.end()};
}

}  // namespace

SingularSystem::SingularSystem(std::vector<VarKey> keys)
    : std::runtime_error(describe(keys)), keys_(std::move(keys)) {}

Ordering::Ordering(const FactorGraph& graph) {
  for (const VarKey& key : graph.variables()) {
    columns_[key] = dim_;
    dim_ += key.tangent_dim();
  }
}

Eigen::Index Ordering::offset(const VarKey& key) const {
  auto it = columns_.find(key);
  if (it == columns_.end()) throw MissingVariable(key);
  return it->second;
}

LinearSystem linearize(const FactorGraph& graph, const Values& values, const Ordering& ordering) {
  Eigen::Index rows = 0;
  for (const Factor& f : graph.factors()) rows += factor_dim(f);

  LinearSystem sys;
  sys.residual.resize(rows);
  sys.column_index = ordering.columns();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(rows) * 5);

  Eigen::Index row = 0;
  for (const Factor& f : graph.factors()) {
    const LinearizedFactor lin = linearize(f, values);
    const Eigen::Index m = lin.error.size();
    sys.residual.segment(row, m) = lin.error;
    for (const auto& [key, block] : lin.blocks) {
      const Eigen::Index col = ordering.offset(key);
      for (Eigen::Index i = 0; i < block.rows(); ++i)
        for (Eigen::Index j = 0; j < block.cols(); ++j)
          if (block(i, j) != 0.0) triplets.emplace_back(row + i, col + j, block(i, j));
    }
    row += m;
  }
  sys.jacobian.resize(rows, ordering.dim());
  sys.jacobian.setFromTriplets(triplets.begin(), triplets.end());
  return sys;
}

Eigen::SparseMatrix<double> information_matrix(const FactorGraph& graph, const Values& values) {
  const Ordering ordering(graph);
  const LinearSystem sys = linearize(graph, values, ordering);
  return Eigen::SparseMatrix<double>(sys.jacobian.transpose() * sys.jacobian);
}

Values retract(const Values& values, const Ordering& ordering, const Eigen::VectorXd& delta) {
  Values out = values;
  for (const auto& [key, col] : ordering.columns()) {
    if (key.is_pose()) {
      out.insert(key, retract(values.pose(key), Eigen::Vector3d(delta.segment<3>(col))));
    } else {
      out.insert(key, Point2d(values.landmark(key) + delta.segment<2>(col)));
    }
  }
  return out;
}

SolveResult solve_map_detailed(const FactorGraph& graph, const Values& initial,
                               const LmParams& params) {
  require_covered(graph, initial);
  require_constrained(graph);

  const Ordering ordering(graph);
  SolveResult result;
  result.values = initial;
  result.initial_log_posterior = total_log_posterior(graph, initial);
  double log_post = result.initial_log_posterior;
  double lambda = params.initial_lambda;

  Eigen::SparseMatrix<double> identity(ordering.dim(), ordering.dim());
  identity.setIdentity();

  LinearSystem sys = linearize(graph, result.values, ordering);
  Eigen::SparseMatrix<double> H = sys.jacobian.transpose() * sys.jacobian;
  Eigen::VectorXd g = sys.jacobian.transpose() * sys.residual;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;

  while (result.iterations < params.max_iterations) {
    ++result.iterations;
    ldlt.compute(H + lambda * identity);
    if (ldlt.info() != Eigen::Success) {
      lambda *= params.lambda_factor;
      continue;
    }
    const Eigen::VectorXd step = ldlt.solve(-g);
    if (!step.allFinite()) {
      lambda *= params.lambda_factor;
      continue;
    }
    if (step.lpNorm<Eigen::Infinity>() < params.step_tolerance) {
      result.converged = true;
      break;
    }
    Values candidate = retract(result.values, ordering, step);
    const double candidate_log_post = total_log_posterior(graph, candidate);
    if (candidate_log_post >= log_post) {
      result.values = std::move(candidate);
      log_post = candidate_log_post;
      lambda = std::max(lambda / params.lambda_factor, 1e-12);
      sys = linearize(graph, result.values, ordering);
      H = sys.jacobian.transpose() * sys.jacobian;
      g = sys.jacobian.transpose() * sys.residual;
    } else {
      lambda *= params.lambda_factor;
      if (lambda > 1e16) break;
    }
  }
  result.final_log_posterior = log_post;
  return result;
}

Values solve_map(const FactorGraph& graph, const Values& initial, const LmParams& params) {
  return solve_map_detailed(graph, initial, params).values;
}

Eigen::Index MarginalCov::offset(const VarKey& key) const {
  Eigen::Index off = 0;
  for (const VarKey& k : keys) {
    if (k == key) return off;
    off += k.tangent_dim();
  }
  throw MissingVariable(key);
}

MarginalCov joint_marginal_covariance(const FactorGraph& graph, const Values& map,
                                      const std::vector<VarKey>& keys) {
  require_covered(graph, map);
  require_constrained(graph);
  const Ordering ordering(graph);
  const LinearSystem sys = linearize(graph, map, ordering);
  const Eigen::SparseMatrix<double> H = sys.jacobian.transpose() * sys.jacobian;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(H);
  bool singular = ldlt.info() != Eigen::Success;
  if (!singular) {
    const Eigen::VectorXd d = ldlt.vectorD();
    singular = d.minCoeff() <= 1e-20 * d.cwiseAbs().maxCoeff();
  }
  if (singular) throw SingularSystem(deficient_variables(H, ordering));

  Eigen::Index m = 0;
  for (const VarKey& k : keys) m += k.tangent_dim();
  Eigen::MatrixXd selector = Eigen::MatrixXd::Zero(ordering.dim(), m);
  Eigen::Index c = 0;
  for (const VarKey& k : keys) {
    const Eigen::Index col = ordering.offset(k);
    for (int j = 0; j < k.tangent_dim(); ++j) selector(col + j, c++) = 1.0;
  }
  const Eigen::MatrixXd columns = ldlt.solve(selector);

  MarginalCov cov;
  cov.keys = keys;
  cov.matrix = selector.transpose() * columns;
  cov.matrix = 0.5 * (cov.matrix + cov.matrix.transpose()).eval();
  return cov;
}

}  // namespace sngr
