#pragma once

namespace lgent {

// Central numeric tolerances. Tests and library checks read these instead of
// scattering magic numbers, so reruns are reproducible bit-for-bit.
struct Tolerances {
  double group_axioms = 1e-12;        // associativity, identity, inverse
  double left_invariance = 1e-9;      // |dist(gx,gy) - dist(x,y)|
  double explog_roundtrip = 1e-10;    // log(exp(X)) = X in the neighborhood
  double matrix_oracle = 1e-12;       // group ops vs matrix representation
  double solution_formula = 1e-10;    // direct vs translated trajectories
  double automorphism = 1e-12;        // f0(gh) = f0(g) f0(h)
  double fd_step = 1e-6;              // central finite-difference step
  double fd_jacobian = 1e-6;          // analytic vs FD differential
  double det_floor = 1e-12;           // |det D| below this is singular
  double eigen_residual = 1e-9;       // ||D v - lambda v||
  double unit_modulus_eta = 1e-9;     // ambiguity band around |alpha| = 1
  double unit_modulus_exact = 1e-12;  // detection band for |alpha| = 1
  double subspace_invariance = 1e-9;  // D-invariance of eigenspace bases
  double bracket_residual = 1e-9;     // [g_a, g_b] in g_ab
  double trace_ad = 1e-9;             // |tr ad X| on stable/unstable bases
  double semi_conjugacy = 1e-9;       // pi(phi(k,g,u)) = phibar(k,pi(g),u)
  double lift_independence = 1e-9;    // induced trajectories across lifts
  double det_multiplicativity = 1e-9; // relative, |det M^k| = |det M|^k
  double measure_invariance = 1e-6;   // vol(L_g A) = vol(A)
};

inline const Tolerances& tol() {
  static const Tolerances t{};
  return t;
}

}  // namespace lgent
