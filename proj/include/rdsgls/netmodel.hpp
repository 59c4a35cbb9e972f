#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

namespace rdsgls {

struct Edge {
  int u = 0;
  int v = 0;
  double w = 1.0;
};

/// Undirected weighted population network stored as a symmetric CSR.
/// Self-loops are allowed (the expected DC-SBM chain has them) and count
/// once toward deg(i). Isolated nodes are kept; build_transition rejects
/// them and largest_component() prunes them.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  /// Throws kInvalidArgument on out-of-range ids, nonpositive weights, or a
  /// repeated unordered pair.
  static WeightedGraph from_edges(int num_nodes, std::span<const Edge> edges);

  int num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return num_edges_; }

  std::span<const int> neighbors(int i) const {
    return {adj_.data() + offsets_[i], adj_.data() + offsets_[i + 1]};
  }
  std::span<const double> weights(int i) const {
    return {w_.data() + offsets_[i], w_.data() + offsets_[i + 1]};
  }
  double degree(int i) const { return degree_[i]; }
  std::span<const double> degrees() const { return degree_; }
  /// Number of distinct neighbors j != i; the "reported number of
  /// contacts", which ignores edge weights.
  int contact_count(int i) const { return contacts_[i]; }
  /// w_ij, or 0 when absent. O(log deg(i)).
  double weight(int i, int j) const;
  /// Each undirected edge once, with u <= v, sorted.
  std::vector<Edge> edges() const;

  bool operator==(const WeightedGraph& other) const = default;

 private:
  int num_nodes_ = 0;
  std::size_t num_edges_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<int> adj_;
  std::vector<double> w_;
  std::vector<double> degree_;
  std::vector<int> contacts_;
};

/// Connected component with the most nodes (lowest node id wins ties).
struct Component {
  WeightedGraph graph;
  std::vector<int> original_id;  // new id -> id in the source graph
};
Component largest_component(const WeightedGraph& graph);

/// Degree-corrected stochastic blockmodel. Labels are 0-based here; files
/// carry them as strings.
struct DcSbmParams {
  std::vector<int> z;
  std::vector<double> theta;
  Eigen::MatrixXd B;

  int num_nodes() const { return static_cast<int>(z.size()); }
  int num_blocks() const { return static_cast<int>(B.rows()); }
  /// Throws kInvalidParameters if theta does not sum to one per block, B is
  /// not symmetric nonnegative, or some edge probability exceeds one.
  void validate() const;
  /// max over i != j of theta_i theta_j B_{z(i) z(j)}.
  double max_edge_probability() const;
};

/// Row-stochastic transition operator P_ij = w_ij / deg(i) with its
/// stationary distribution. Stored sparse; dense() is for small N only.
class TransitionModel {
 public:
  TransitionModel() = default;

  int num_states() const { return n_; }
  std::span<const int> row_states(int i) const {
    return {cols_.data() + offsets_[i], cols_.data() + offsets_[i + 1]};
  }
  std::span<const double> row_probs(int i) const {
    return {probs_.data() + offsets_[i], probs_.data() + offsets_[i + 1]};
  }
  std::span<const double> row_cdf(int i) const {
    return {cdf_.data() + offsets_[i], cdf_.data() + offsets_[i + 1]};
  }
  std::span<const double> pi() const { return pi_; }
  std::span<const double> pi_cdf() const { return pi_cdf_; }
  std::span<const int> contact_counts() const { return contacts_; }

  Eigen::MatrixXd dense() const;
  /// max_i |sum_j P_ij - 1|.
  double row_sum_error() const;
  /// max_ij |pi_i P_ij - pi_j P_ji|.
  double detailed_balance_error() const;
  /// True when the support graph of P is strongly connected.
  bool irreducible() const;

  /// General (possibly non-reversible) operator, mainly for tests. Rows must
  /// sum to one; pi is taken as given.
  static TransitionModel from_dense(const Eigen::MatrixXd& P,
                                    std::span<const double> pi);

  friend TransitionModel build_transition(const WeightedGraph& graph);

 private:
  void finalize();

  int n_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<int> cols_;
  std::vector<double> probs_;
  std::vector<double> cdf_;
  std::vector<double> pi_;
  std::vector<double> pi_cdf_;
  std::vector<int> contacts_;
};

/// Throws kDegenerateNode naming the first node with deg(i) = 0.
TransitionModel build_transition(const WeightedGraph& graph);

/// Eigen-pairs of a reversible P. Column l of `f` is the eigenfunction
/// f_l, orthonormal under <a, b>_pi. Ordering: the top eigenvalue first,
/// the rest by |lambda| descending, ties by signed value descending.
struct SpectralDecomp {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd f;
  Eigen::VectorXd pi;
};

/// Solves the symmetric eigenproblem of Pi^{1/2} P Pi^{-1/2} and maps back.
/// Throws kReversibilityViolation when detailed balance fails and
/// kCapacity when N exceeds kDenseLimit.
SpectralDecomp spectral_decompose(const TransitionModel& model);

/// beta_l = sum_i y(i) f_l(i) pi_i.
Eigen::VectorXd beta_coefficients(std::span<const double> y,
                                  const SpectralDecomp& spec);

struct ExpectedChain {
  Eigen::MatrixXd A;      // theta_i theta_j B_{z(i) z(j)}, diagonal included
  Eigen::MatrixXd P;      // D^{-1} A
  Eigen::VectorXd pi;     // D_ii / m
  double m = 0.0;         // 1' B 1, equal to 1' A 1
};

/// Dense expected adjacency/transition matrices of a DC-SBM.
ExpectedChain dcsbm_expected_matrices(const DcSbmParams& params);

/// The expected chain as a complete weighted graph (self-loops included),
/// so it can drive markov_walk.
WeightedGraph expected_graph(const ExpectedChain& chain);

/// One unweighted draw: each pair i < j independently with probability
/// theta_i theta_j B_{z(i) z(j)}; no self-loops. Never materializes an
/// N x N matrix.
WeightedGraph dcsbm_sample(const DcSbmParams& params, std::uint64_t seed);

struct BlockSpectrum {
  Eigen::MatrixXd B_L;
  Eigen::MatrixXd U;
  Eigen::VectorXd Lambda;
  Eigen::MatrixXd f_star;  // N x K, empty when no labels are given
  double m = 0.0;
};

/// B_L = D_B^{-1/2} B D_B^{-1/2}, its eigendecomposition, and
/// f* = sqrt(m) Z D_B^{-1/2} U. Throws kDegenerateBlock on a zero row sum.
BlockSpectrum blockmodel_spectrum(const Eigen::MatrixXd& B,
                                  std::span<const int> z);

/// Power iteration for the largest-|lambda| nontrivial eigenvalue of a
/// large sparse reversible chain, where spectral_decompose is too costly.
double second_eigenvalue_sparse(const TransitionModel& model,
                                std::uint64_t seed, int max_iter = 5000,
                                double tol = 1e-10);

inline constexpr int kDenseLimit = 2000;

namespace detail {
/// Permutation implementing the eigenvalue ordering described on
/// SpectralDecomp.
std::vector<int> spectral_order(const Eigen::VectorXd& values);
/// Flip each column so its first entry with magnitude above the column
/// scale times 1e-10 is positive.
void fix_signs(Eigen::MatrixXd& vectors);
}  // namespace detail

}  // namespace rdsgls
