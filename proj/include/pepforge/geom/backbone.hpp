#pragma once

#include <array>
#include <vector>

#include "pepforge/geom/angles.hpp"
#include "pepforge/geom/vec3.hpp"

namespace pepforge::geom {

// Eight internal angles of one residue. Dihedrals live in [-pi, pi), bond
// angles in (0, pi). Column order is fixed everywhere in the project:
// psi, omega, phi, delta, theta1, theta2, theta3, theta4.
struct AngleRow {
    double psi = 0.0;    // N(i-1)-CA(i-1)-C(i-1)-N(i)
    double omega = 0.0;  // CA(i-1)-C(i-1)-N(i)-CA(i)
    double phi = 0.0;    // C(i-1)-N(i)-CA(i)-C(i)
    double delta = 0.0;  // N(i)-CA(i)-C(i)-O(i)
    double theta1 = 0.0; // CA(i-1)-C(i-1)-N(i)
    double theta2 = 0.0; // C(i-1)-N(i)-CA(i)
    double theta3 = 0.0; // N(i)-CA(i)-C(i)
    double theta4 = 0.0; // CA(i)-C(i)-O(i)

    std::array<double, 8> as_array() const {
        return {psi, omega, phi, delta, theta1, theta2, theta3, theta4};
    }
    static AngleRow from_array(const std::array<double, 8>& v) {
        return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
    }
    bool valid() const;
};

inline constexpr std::array<const char*, 8> kAngleNames = {
    "psi", "omega", "phi", "delta", "theta1", "theta2", "theta3", "theta4"};

// Internal-coordinate matrix of a peptide: one row per interior residue
// (first and last residues carry no row).
struct InternalCoords {
    std::vector<AngleRow> rows;
    int source_length = 0; // residue count L of the originating peptide

    bool valid() const;
};

struct BackboneResidue {
    Vec3 n, ca, c, o;
    char aa = 'G'; // one-letter amino-acid code
};

// Ordered N/CA/C/O backbone with residue identities.
struct Backbone {
    std::vector<BackboneResidue> residues;

    size_t size() const { return residues.size(); }
};

// Fixed per-type bond lengths used for generation-time reconstruction.
// Defaults are the standard Engh-Huber values.
struct BondLengthSet {
    double n_ca = 1.458;
    double ca_c = 1.525;
    double c_n = 1.329;
    double c_o = 1.231;

    bool valid() const {
        return n_ca > 0 && ca_c > 0 && c_n > 0 && c_o > 0 && n_ca < 2.0 && ca_c < 2.0 &&
               c_n < 2.0 && c_o < 2.0;
    }
};

// Canonical seed frame for de novo reconstruction: N at the origin, CA on
// the x axis, C in the xy plane at the canonical N-CA-C angle.
struct SeedFrame {
    Vec3 n{0.0, 0.0, 0.0};
    Vec3 ca{1.458, 0.0, 0.0};
    Vec3 c{1.458 - 1.525 * std::cos(1.937), 1.525 * std::sin(1.937), 0.0};
};

// Chain-connectivity check: consecutive C(i-1)-N(i) closer than 2 A and no
// duplicated atom positions within a residue.
bool backbone_connected(const Backbone& b, double max_c_n = 2.0);

// Table-1 extraction: row i holds the eight angles of interior residue i+1.
// Throws ValueError when b has fewer than 3 residues, GeometryError on
// degenerate frames.
InternalCoords extract_internal(const Backbone& b);

// Rebuild a backbone from internal coordinates with fixed per-type bond
// lengths. Result has rows.size()+1 residues: the seed residue plus one per
// row, atoms placed in N -> CA -> C -> O order. The seed residue's O is
// placed from the first row's delta/theta4 (approximation; the true
// first-residue angles are not represented).
Backbone reconstruct(const InternalCoords& ic, const BondLengthSet& lens, const SeedFrame& seed);

// Same, with one measured BondLengthSet per placed residue (index i applies
// to row i). `seed_c_o` is the measured C=O length of the seed residue.
Backbone reconstruct(const InternalCoords& ic, const std::vector<BondLengthSet>& per_row,
                     double seed_c_o, const SeedFrame& seed);

// Measured bond lengths of each interior residue (aligned with
// extract_internal rows) plus the seed residue's C=O length.
struct MeasuredLengths {
    std::vector<BondLengthSet> per_row;
    double seed_c_o = 1.231;
};
MeasuredLengths measure_bond_lengths(const Backbone& b);

// Seed frame taken from an existing backbone's first residue.
SeedFrame seed_from_backbone(const Backbone& b);

} // namespace pepforge::geom
