#pragma once

#include "pdgsem/pdg.hpp"

namespace pdgsem {

struct DpdgViolation {
  int condition = 0;  // 1, 2 or 3
  std::string witness;

  auto operator<=>(const DpdgViolation&) const = default;
};

struct DpdgReport {
  bool deterministic = false;
  std::vector<DpdgViolation> violations;
};

// The three determinism conditions:
//   1. C edges (p,n), (q,n) with p != q require p ∈ G*(q), q ∈ G*(p), or
//      no r ∈ mca(p,q) with {p,q} ⊆ G_Q*(r) for either label Q.
//   2. F edges f_x(p,u), f_x(q,u) with p != q and some r ∈ mca(p,q),
//      label Q with {p,q} ⊆ G_Q*(r) require a D edge between p and q.
//   3. every (p,q) ∈ F ⊕ D, every CDG loop R, every r ∈ R:
//      p ∈ G(r) implies q ∈ G*(r).
DpdgReport check_dpdg(const PdgAnalysis& a);
DpdgReport check_dpdg(const Pdg& pdg);

}  // namespace pdgsem
