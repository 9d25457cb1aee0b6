#include "pepforge/geom/backbone.hpp"

#include <cmath>

namespace pepforge::geom {

bool AngleRow::valid() const {
    auto in_dihedral = [](double v) { return std::isfinite(v) && v >= -kPi && v < kPi; };
    auto in_bond = [](double v) { return std::isfinite(v) && v > 0.0 && v < kPi; };
    return in_dihedral(psi) && in_dihedral(omega) && in_dihedral(phi) && in_dihedral(delta) &&
           in_bond(theta1) && in_bond(theta2) && in_bond(theta3) && in_bond(theta4);
}

bool InternalCoords::valid() const {
    if (source_length != 0 && static_cast<int>(rows.size()) != source_length - 2) return false;
    for (const auto& r : rows) {
        if (!r.valid()) return false;
    }
    return true;
}

bool backbone_connected(const Backbone& b, double max_c_n) {
    for (size_t i = 0; i < b.residues.size(); ++i) {
        const auto& r = b.residues[i];
        if (!r.n.finite() || !r.ca.finite() || !r.c.finite() || !r.o.finite()) return false;
        if (distance(r.n, r.ca) < 1e-6 || distance(r.ca, r.c) < 1e-6 || distance(r.c, r.o) < 1e-6) {
            return false;
        }
        if (i > 0 && distance(b.residues[i - 1].c, r.n) >= max_c_n) return false;
    }
    return true;
}

InternalCoords extract_internal(const Backbone& b) {
    const auto& res = b.residues;
    if (res.size() < 3) throw ValueError("extract_internal: backbone too short (need >= 3 residues)");
    InternalCoords ic;
    ic.source_length = static_cast<int>(res.size());
    ic.rows.reserve(res.size() - 2);
    for (size_t i = 1; i + 1 < res.size(); ++i) {
        const auto& p = res[i - 1];
        const auto& r = res[i];
        AngleRow row;
        row.psi = dihedral(p.n, p.ca, p.c, r.n);
        row.omega = dihedral(p.ca, p.c, r.n, r.ca);
        row.phi = dihedral(p.c, r.n, r.ca, r.c);
        row.delta = dihedral(r.n, r.ca, r.c, r.o);
        row.theta1 = bond_angle(p.ca, p.c, r.n);
        row.theta2 = bond_angle(p.c, r.n, r.ca);
        row.theta3 = bond_angle(r.n, r.ca, r.c);
        row.theta4 = bond_angle(r.ca, r.c, r.o);
        ic.rows.push_back(row);
    }
    return ic;
}

namespace {

Backbone reconstruct_impl(const InternalCoords& ic,
                          const std::vector<BondLengthSet>& lens_per_row, double seed_c_o,
                          const SeedFrame& seed) {
    if (ic.rows.empty()) throw ShapeError("reconstruct: empty internal coordinates");
    if (lens_per_row.size() != ic.rows.size()) {
        throw ShapeError("reconstruct: bond-length rows do not match angle rows");
    }
    Backbone out;
    out.residues.resize(ic.rows.size() + 1);
    auto& first = out.residues[0];
    first.n = seed.n;
    first.ca = seed.ca;
    first.c = seed.c;
    // Approximate seed-residue oxygen from the first row's delta/theta4.
    first.o = place_atom(seed.n, seed.ca, seed.c, seed_c_o, ic.rows[0].theta4, ic.rows[0].delta);

    for (size_t i = 0; i < ic.rows.size(); ++i) {
        const AngleRow& row = ic.rows[i];
        const BondLengthSet& L = lens_per_row[i];
        if (!L.valid()) throw ValueError("reconstruct: invalid bond lengths");
        const auto& prev = out.residues[i];
        auto& cur = out.residues[i + 1];
        cur.n = place_atom(prev.n, prev.ca, prev.c, L.c_n, row.theta1, row.psi);
        cur.ca = place_atom(prev.ca, prev.c, cur.n, L.n_ca, row.theta2, row.omega);
        cur.c = place_atom(prev.c, cur.n, cur.ca, L.ca_c, row.theta3, row.phi);
        cur.o = place_atom(cur.n, cur.ca, cur.c, L.c_o, row.theta4, row.delta);
    }
    return out;
}

} // namespace

Backbone reconstruct(const InternalCoords& ic, const BondLengthSet& lens, const SeedFrame& seed) {
    std::vector<BondLengthSet> per_row(ic.rows.size(), lens);
    return reconstruct_impl(ic, per_row, lens.c_o, seed);
}

Backbone reconstruct(const InternalCoords& ic, const std::vector<BondLengthSet>& per_row,
                     double seed_c_o, const SeedFrame& seed) {
    return reconstruct_impl(ic, per_row, seed_c_o, seed);
}

MeasuredLengths measure_bond_lengths(const Backbone& b) {
    const auto& res = b.residues;
    if (res.size() < 3) throw ValueError("measure_bond_lengths: backbone too short");
    MeasuredLengths m;
    m.seed_c_o = distance(res[0].c, res[0].o);
    m.per_row.reserve(res.size() - 2);
    for (size_t i = 1; i + 1 < res.size(); ++i) {
        BondLengthSet L;
        L.c_n = distance(res[i - 1].c, res[i].n);
        L.n_ca = distance(res[i].n, res[i].ca);
        L.ca_c = distance(res[i].ca, res[i].c);
        L.c_o = distance(res[i].c, res[i].o);
        m.per_row.push_back(L);
    }
    return m;
}

SeedFrame seed_from_backbone(const Backbone& b) {
    if (b.residues.empty()) throw ValueError("seed_from_backbone: empty backbone");
    SeedFrame s;
    s.n = b.residues[0].n;
    s.ca = b.residues[0].ca;
    s.c = b.residues[0].c;
    return s;
}

} // namespace pepforge::geom
