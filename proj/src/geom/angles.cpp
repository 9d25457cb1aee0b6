#include "pepforge/geom/angles.hpp"

#include <algorithm>
#include <cmath>

namespace pepforge::geom {

namespace {
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kCoincident = 1e-9;  // Angstroms
constexpr double kCollinear = 1e-10;
} // namespace

double wrap_angle(double x) {
    if (!std::isfinite(x)) throw ValueError("wrap_angle: non-finite input");
    double t = (x + kPi) * (1.0 / kTwoPi);
    double r = x - std::floor(t) * kTwoPi;
    if (r >= kPi) r -= kTwoPi;
    if (r < -kPi) r += kTwoPi;
    return r;
}

double dihedral(const Vec3& p1, const Vec3& p2, const Vec3& p3, const Vec3& p4) {
    Vec3 b1 = p2 - p1;
    Vec3 b2 = p3 - p2;
    Vec3 b3 = p4 - p3;
    if (norm(b1) < kCoincident || norm(b2) < kCoincident || norm(b3) < kCoincident) {
        throw GeometryError("dihedral: coincident consecutive points");
    }
    Vec3 n1 = cross(b1, b2);
    Vec3 n2 = cross(b2, b3);
    if (norm(n1) < kCollinear || norm(n2) < kCollinear) {
        throw GeometryError("dihedral: collinear frame");
    }
    Vec3 b2_hat = b2 * (1.0 / norm(b2));
    double x = dot(n1, n2);
    double y = dot(cross(n1, n2), b2_hat);
    return wrap_angle(std::atan2(y, x));
}

double bond_angle(const Vec3& p1, const Vec3& p2, const Vec3& p3) {
    Vec3 u = p1 - p2;
    Vec3 v = p3 - p2;
    double nu = norm(u);
    double nv = norm(v);
    if (nu < kCoincident || nv < kCoincident) {
        throw GeometryError("bond_angle: coincident points");
    }
    double c = dot(u, v) / (nu * nv);
    c = std::clamp(c, -1.0, 1.0);
    return std::acos(c);
}

Vec3 place_atom(const Vec3& a, const Vec3& b, const Vec3& c, double bond_len, double bond_ang,
                double torsion) {
    if (!(bond_len > 0.0)) throw ValueError("place_atom: bond_len must be positive");
    if (!(bond_ang > 0.0 && bond_ang < kPi)) throw ValueError("place_atom: bond_ang outside (0, pi)");
    Vec3 ab = b - a;
    Vec3 bc = c - b;
    if (norm(ab) < kCoincident || norm(bc) < kCoincident) {
        throw GeometryError("place_atom: coincident frame points");
    }
    Vec3 bc_hat = bc * (1.0 / norm(bc));
    Vec3 nplane = cross(ab, bc_hat);
    if (norm(nplane) < kCollinear) throw GeometryError("place_atom: collinear frame");
    Vec3 n_hat = nplane * (1.0 / norm(nplane));
    Vec3 m_hat = cross(n_hat, bc_hat); // (bc_hat, m_hat, n_hat) is right-handed
    double d_bc = -bond_len * std::cos(bond_ang);
    double d_m = bond_len * std::sin(bond_ang) * std::cos(torsion);
    double d_n = bond_len * std::sin(bond_ang) * std::sin(torsion);
    return c + d_bc * bc_hat + d_m * m_hat + d_n * n_hat;
}

} // namespace pepforge::geom
