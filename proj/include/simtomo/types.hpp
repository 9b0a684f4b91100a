#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace simtomo {

using Complex = std::complex<double>;
using MatrixXcd = Eigen::MatrixXcd;
using MatrixXd = Eigen::MatrixXd;
using VectorXcd = Eigen::VectorXcd;
using VectorXd = Eigen::VectorXd;
using VectorXl = Eigen::Matrix<long, Eigen::Dynamic, 1>;

// Dense 2^n x 2^n matrices are only materialized up to this qubit count.
inline constexpr int kDenseQubitLimit = 6;
// 4^n x 4^n superoperator checks and numeric eliminator solves stop here.
inline constexpr int kSuperopQubitLimit = 3;

inline constexpr double kStateTol = 1e-10;
inline constexpr double kExactZeroTol = 1e-9;
inline constexpr double kPlanResidualTol = 1e-8;

enum class Errc {
  parse,
  dimension,
  capacity,
  domain,
  condition1,
  condition2,
  condition3,
  degeneracy,
  insufficiency,
  pivot,
  already_independent,
  support,
  conditioning,
  ambiguity,
  uninformative,
  inconsistency,
  degenerate_prior,
  prior_violated,
  insufficient_prior,
  near_symmetric,
  gauge_inconsistent,
  config,
  golden_mismatch,
  budget,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, Errc code, const std::string& what) {
  if (!ok) fail(code, what);
}

inline long dim_of(int n) { return 1L << n; }

}  // namespace simtomo
