#include "pepforge/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "pepforge/data/aminoacids.hpp"
#include "pepforge/errors.hpp"
#include "pepforge/rng.hpp"

namespace pepforge::data {

namespace {

const std::array<const char*, 4> kBackboneAtoms = {"N", "CA", "C", "O"};

std::vector<geom::Vec3> backbone_atoms_of(const Chain& chain) {
    std::vector<geom::Vec3> atoms;
    atoms.reserve(chain.residues.size() * 4);
    for (const auto& r : chain.residues) {
        for (const char* name : kBackboneAtoms) atoms.push_back(r.atom(name));
    }
    return atoms;
}

bool residue_near(const StructResidue& r, const std::vector<geom::Vec3>& targets, double cutoff) {
    for (const char* name : kBackboneAtoms) {
        const geom::Vec3& a = r.atom(name);
        for (const auto& t : targets) {
            if (geom::distance(a, t) < cutoff) return true;
        }
    }
    return false;
}

} // namespace

std::vector<std::array<double, 20>> PocketRepr::aa_onehot() const {
    std::vector<std::array<double, 20>> out(aa.size());
    for (size_t i = 0; i < aa.size(); ++i) {
        out[i].fill(0.0);
        int idx = aa_index(aa[i]);
        if (idx < 0) throw ValueError("PocketRepr: non-canonical residue type");
        out[i][static_cast<size_t>(idx)] = 1.0;
    }
    return out;
}

FilterDecision filter_complex(const Structure& s, char peptide_chain) {
    const Chain* pep = s.find_chain(peptide_chain);
    if (pep == nullptr) {
        throw DataError(std::string("filter_complex: missing chain ") + peptide_chain);
    }
    std::vector<std::string> violated;
    if (s.resolution.has_value() && *s.resolution > kMaxResolution) violated.push_back("resolution");
    int len = static_cast<int>(pep->residues.size());
    if (len < kMinPeptideLen || len > kMaxPeptideLen) violated.push_back("length");
    bool unknown = false;
    for (const auto& c : s.chains) {
        for (const auto& r : c.residues) unknown = unknown || r.unknown_aa;
    }
    if (unknown) violated.push_back("unknown_aa");

    FilterDecision d;
    d.accepted = violated.empty();
    for (size_t i = 0; i < violated.size(); ++i) {
        if (i) d.reason += ",";
        d.reason += violated[i];
    }
    return d;
}

std::vector<ResidueId> find_pocket(const Structure& s, char peptide_chain, double cutoff) {
    if (cutoff <= 0.0) throw ValueError("find_pocket: cutoff must be positive");
    const Chain* pep = s.find_chain(peptide_chain);
    if (pep == nullptr) throw DataError(std::string("find_pocket: missing chain ") + peptide_chain);
    std::vector<geom::Vec3> pep_atoms = backbone_atoms_of(*pep);

    bool any_receptor = false;
    std::vector<ResidueId> pocket;
    for (const auto& chain : s.chains) {
        if (chain.id == peptide_chain) continue;
        if (!chain.residues.empty()) any_receptor = true;
        for (const auto& r : chain.residues) {
            if (residue_near(r, pep_atoms, cutoff)) pocket.push_back({chain.id, r.seq_num});
        }
    }
    if (!any_receptor) throw DataError("find_pocket: empty receptor (empty-pocket)");
    if (pocket.empty()) throw DataError("find_pocket: no residue within cutoff (empty-pocket)");
    std::sort(pocket.begin(), pocket.end());
    return pocket;
}

std::vector<ResidueId> extend_pocket(const std::vector<ResidueId>& pocket_ids, int k,
                                     const Structure& s) {
    if (k < 0) throw ValueError("extend_pocket: k must be >= 0");
    std::set<ResidueId> out(pocket_ids.begin(), pocket_ids.end());
    for (const auto& id : pocket_ids) {
        const Chain* chain = s.find_chain(id.chain);
        if (chain == nullptr) continue;
        auto it = std::find_if(chain->residues.begin(), chain->residues.end(),
                               [&](const StructResidue& r) { return r.seq_num == id.seq_num; });
        if (it == chain->residues.end()) continue;
        auto pos = static_cast<int>(it - chain->residues.begin());
        int lo = std::max(0, pos - k);
        int hi = std::min(static_cast<int>(chain->residues.size()) - 1, pos + k);
        for (int i = lo; i <= hi; ++i) out.insert({chain->id, chain->residues[i].seq_num});
    }
    return {out.begin(), out.end()};
}

ComplexExample build_example(const Structure& s, char peptide_chain, int ext_k, double cutoff) {
    const Chain* pep = s.find_chain(peptide_chain);
    if (pep == nullptr) throw DataError(std::string("build_example: missing chain ") + peptide_chain);

    ComplexExample ex;
    ex.meta.peptide_chain = peptide_chain;
    ex.meta.ext_k = ext_k;
    for (const auto& c : s.chains) {
        if (c.id != peptide_chain) ex.meta.receptor_chains += c.id;
    }

    for (const auto& r : pep->residues) {
        geom::BackboneResidue br;
        br.n = r.atom("N");
        br.ca = r.atom("CA");
        br.c = r.atom("C");
        br.o = r.atom("O");
        br.aa = r.aa;
        ex.peptide.residues.push_back(br);
        ex.peptide_seq += r.aa;
    }
    if (!geom::backbone_connected(ex.peptide)) {
        throw GeometryError("build_example: peptide chain is discontiguous");
    }

    auto pocket_ids = extend_pocket(find_pocket(s, peptide_chain, cutoff), ext_k, s);
    for (const auto& id : pocket_ids) {
        const Chain* chain = s.find_chain(id.chain);
        auto it = std::find_if(chain->residues.begin(), chain->residues.end(),
                               [&](const StructResidue& r) { return r.seq_num == id.seq_num; });
        auto pos = static_cast<size_t>(it - chain->residues.begin());
        if (pos == 0) continue; // no predecessor: angles not computable, row dropped
        const StructResidue& prev = chain->residues[pos - 1];
        const StructResidue& cur = *it;
        if (geom::distance(prev.atom("C"), cur.atom("N")) >= 2.0) continue; // chain break
        geom::AngleRow row;
        try {
            row.psi = geom::dihedral(prev.atom("N"), prev.atom("CA"), prev.atom("C"), cur.atom("N"));
            row.omega =
                geom::dihedral(prev.atom("CA"), prev.atom("C"), cur.atom("N"), cur.atom("CA"));
            row.phi = geom::dihedral(prev.atom("C"), cur.atom("N"), cur.atom("CA"), cur.atom("C"));
            row.delta = geom::dihedral(cur.atom("N"), cur.atom("CA"), cur.atom("C"), cur.atom("O"));
            row.theta1 = geom::bond_angle(prev.atom("CA"), prev.atom("C"), cur.atom("N"));
            row.theta2 = geom::bond_angle(prev.atom("C"), cur.atom("N"), cur.atom("CA"));
            row.theta3 = geom::bond_angle(cur.atom("N"), cur.atom("CA"), cur.atom("C"));
            row.theta4 = geom::bond_angle(cur.atom("CA"), cur.atom("C"), cur.atom("O"));
        } catch (const GeometryError&) {
            continue; // degenerate local frame, drop the row
        }
        if (aa_index(cur.aa) < 0) continue; // unknown types carry no one-hot row
        ex.pocket.angles.push_back(row);
        ex.pocket.aa += cur.aa;
        ex.pocket.residue_ids.push_back(id);
    }
    if (ex.pocket.angles.empty()) throw DataError("build_example: empty pocket after angle rows");
    return ex;
}

SplitResult split_dataset(std::vector<std::string> ids, const std::array<double, 3>& ratios,
                          uint64_t seed) {
    double total = ratios[0] + ratios[1] + ratios[2];
    if (std::abs(total - 1.0) > 1e-9) throw ValueError("split_dataset: ratios must sum to 1");
    int parts = 0;
    for (double r : ratios) parts += r > 0.0 ? 1 : 0;
    if (static_cast<int>(ids.size()) < parts) {
        throw DataError("split_dataset: fewer examples than partitions");
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    Rng rng(seed);
    rng.shuffle(ids);

    auto n = static_cast<long>(ids.size());
    long n1 = std::lround(ratios[0] * static_cast<double>(n));
    long n2 = std::lround((ratios[0] + ratios[1]) * static_cast<double>(n));
    n1 = std::clamp(n1, 0L, n);
    n2 = std::clamp(n2, n1, n);

    SplitResult out;
    out.seed = seed;
    out.train.assign(ids.begin(), ids.begin() + n1);
    out.val.assign(ids.begin() + n1, ids.begin() + n2);
    out.test.assign(ids.begin() + n2, ids.end());
    return out;
}

} // namespace pepforge::data
