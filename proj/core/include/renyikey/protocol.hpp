#pragma once

// Protocol description layer: density operators, Kraus maps, the key-generating
// postprocessing map, the key-register pinching and the BB84 prepare-and-measure
// instance under depolarizing noise and loss.

#include <string>
#include <vector>

#include "renyikey/matfun.hpp"
#include "renyikey/types.hpp"

namespace renyikey {

/// Hermitian PSD matrix with trace in (0, 1].
class DensityOperator {
 public:
  static constexpr double kPsdTol = 1e-10;
  static constexpr double kTraceTol = 1e-10;

  explicit DensityOperator(CMatrix m);

  const CMatrix& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  double trace() const { return m_.trace().real(); }

  static DensityOperator maximally_mixed(int dim);

 private:
  CMatrix m_;
};

/// Completely positive map given by Kraus operators K_s : C^in -> C^out.
class CpMap {
 public:
  CpMap(std::vector<CMatrix> kraus, int in_dim, int out_dim);

  static CpMap identity(int dim);

  const std::vector<CMatrix>& kraus() const { return kraus_; }
  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  /// sum_s K_s^dagger K_s equals the identity to 1e-10.
  bool trace_preserving() const { return trace_preserving_; }

  /// sum_s K_s X K_s^dagger
  CMatrix apply(const CMatrix& x) const;
  /// sum_s K_s^dagger Y K_s
  CMatrix adjoint(const CMatrix& y) const;
  /// sum_s K_s^dagger K_s
  const CMatrix& adjoint_identity() const { return adjoint_identity_; }

  /// this after `first`.
  CpMap compose_after(const CpMap& first) const;

 private:
  std::vector<CMatrix> kraus_;
  int in_dim_;
  int out_dim_;
  CMatrix adjoint_identity_;
  bool trace_preserving_ = false;
};

DensityOperator apply_cp_map(const CpMap& m, const DensityOperator& rho);
HermitianMatrix apply_cp_map(const CpMap& m, const HermitianMatrix& x);
HermitianMatrix adjoint_cp_map(const CpMap& m, const HermitianMatrix& x);

/// One outcome x of an announcement s: Alice's POVM element and its key value g(x, s).
struct KeyMapEntry {
  CMatrix alice_element;
  int key_value = 0;
};

/// Public announcement s with weight p_s. `bob_filter` is the Kraus factor applied
/// on Bob's system for this announcement (identity when Bob announces nothing).
struct Announcement {
  double probability = 1.0;
  CMatrix bob_filter;
  std::vector<KeyMapEntry> entries;
};

/// Builds {G_s}: G_s = sum_x |g(x,s)>_R (x) sqrt(M_A^(x,s)) (x) F_B^s (x) sqrt(p_s) |s>_S,
/// mapping A (x) B into R (x) A (x) B (x) S.
CpMap build_postprocessing_map(const std::vector<Announcement>& announcements, int key_dim);

/// Tr(rho Gamma_i) for each observable; rejects observable sets that are not PSD or
/// do not sum to the identity.
RVector expected_frequency(const CMatrix& rho, const std::vector<CMatrix>& observables);

struct EqualityObservable {
  HermitianMatrix observable;
  double value = 0.0;
};

struct RegisterDims {
  int key = 2;       // R
  int alice = 4;     // A
  int bob = 3;       // B
  int announce = 2;  // S

  int input() const { return alice * bob; }
  int output() const { return key * alice * bob * announce; }
};

/// How Bob's and Alice's outcomes are grouped into parameter-estimation statistics.
enum class StatisticsMode {
  Full,    // one outcome per (Alice state, Bob outcome) pair
  Coarse,  // {Z match correct, Z match error, X match correct, X match error, other}
};

struct Bb84Options {
  double alice_z_prob = 0.5;
  double bob_z_prob = 0.5;
  StatisticsMode statistics = StatisticsMode::Full;
};

struct ProtocolInstance {
  std::string name;
  double depolarization = 0.0;
  double loss = 0.0;
  RegisterDims dims;
  DensityOperator rho_ideal;
  CMatrix alice_marginal;
  CpMap gmap;
  PinchingMap zmap;
  std::vector<EqualityObservable> equality_observables;
  std::vector<CMatrix> pe_observables;
  std::vector<std::string> pe_labels;
  RVector ideal_frequencies;
  /// H(Z_A | Y_B) on the sifted, detected events (bits per sifted key bit).
  double hzy = 0.0;
  /// Tr G(rho_ideal): probability that a round is sifted and detected.
  double sift_probability = 0.0;
};

/// Single-photon prepare-and-measure BB84 through a loss channel (qubit embedded
/// in qubit + vacuum) followed by depolarization of the surviving qubit.
ProtocolInstance bb84_pm_instance(double depolarization, double loss, const Bb84Options& options = {});

/// Binary entropy in bits.
double binary_entropy(double p);

/// Orthonormal basis of Hermitian d x d matrices under Tr(X Y).
std::vector<CMatrix> hermitian_basis(int d);

}  // namespace renyikey
