#pragma once

#include "pepforge/geom/vec3.hpp"

namespace pepforge::geom {

inline constexpr double kPi = 3.14159265358979323846;

// Wrap into the half-open interval [-pi, pi); +pi maps to -pi.
double wrap_angle(double x);

// Signed torsion about p2->p3, IUPAC sign convention, in [-pi, pi).
// Throws GeometryError on coincident consecutive points or collinear frames.
double dihedral(const Vec3& p1, const Vec3& p2, const Vec3& p3, const Vec3& p4);

// Interior angle at vertex p2, in (0, pi).
double bond_angle(const Vec3& p1, const Vec3& p2, const Vec3& p3);

// Place atom d from the reference frame (a, b, c) so that |d-c| = bond_len,
// angle(b, c, d) = bond_ang and dihedral(a, b, c, d) = torsion. Exact right
// inverse of the three measurements above.
Vec3 place_atom(const Vec3& a, const Vec3& b, const Vec3& c, double bond_len, double bond_ang,
                double torsion);

} // namespace pepforge::geom
