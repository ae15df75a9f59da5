#pragma once

// Homogeneity constraints from d^2 = 0 and the three necessary relations.

#include <array>
#include <vector>

#include <json.hpp>

#include "engel/exterior.hpp"
#include "engel/models.hpp"

namespace engel {

struct Residue {
  int generator;  // Gen index of the form whose d^2 this is
  unsigned monomial;
  Scalar value;
};

struct ConstraintSystem {
  std::vector<Residue> residues;  // 4 generators x 4 degree-3 monomials

  bool all_zero() const {
    for (const auto& r : residues)
      if (!r.value.is_zero()) return false;
    return true;
  }
  std::vector<Residue> nonzero() const {
    std::vector<Residue> out;
    for (const auto& r : residues)
      if (!r.value.is_zero()) out.push_back(r);
    return out;
  }
};

inline constexpr std::array<unsigned, 4> kDegree3Masks = {0b0111, 0b1011, 0b1101, 0b1110};

inline ConstraintSystem d2_residues(const CoframeModel& m) {
  ConstraintSystem cs;
  for (int g = 0; g < 4; ++g) {
    Form dd = d(m.dgen[g], m);
    for (unsigned mask : kDegree3Masks) cs.residues.push_back({g, mask, dd.coefficient(mask)});
  }
  return cs;
}

inline bool verify_constants(const EngelConstants& c) { return d2_residues(from_constants(c)).all_zero(); }

inline bool verify_family(const FamilyId& id) { return verify_constants(family(id)); }

struct DerivedRelations {
  Scalar r2_relation;    // r2 - (p1 q2 + p2 - q2)
  Scalar q1_imaginary;   // q1 + conj(q1)
  Scalar im_p2_relation; // (p2 - conj p2) - q1 (p1 + conj p1 - 1); q1 = 2 i q0

  bool r2_holds() const { return r2_relation.is_zero(); }
  bool q1_holds() const { return q1_imaginary.is_zero(); }
  bool im_p2_holds() const { return im_p2_relation.is_zero(); }
  bool all() const { return r2_holds() && q1_holds() && im_p2_holds(); }
};

inline DerivedRelations check_derived_relations(const EngelConstants& c) {
  TablePtr t = c.table();
  auto L = [&](const Scalar& s) { return s.with_table(t); };
  Scalar p1 = L(c.p1), p2 = L(c.p2), q1 = L(c.q1), q2 = L(c.q2), r2 = L(c.r2);
  Scalar one(Gauss(1), t);
  DerivedRelations r;
  r.r2_relation = r2 - (p1 * q2 + p2 - q2);
  r.q1_imaginary = q1 + q1.conjugate();
  r.im_p2_relation = (p2 - p2.conjugate()) - q1 * (p1 + p1.conjugate() - one);
  return r;
}

inline nlohmann::json residues_to_json(const ConstraintSystem& cs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : cs.residues)
    arr.push_back({{"generator", kGenNames[r.generator]},
                   {"monomial", mask_name(r.monomial)},
                   {"value", r.value.str()},
                   {"zero", r.value.is_zero()}});
  return arr;
}

}  // namespace engel
