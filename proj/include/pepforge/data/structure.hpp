#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pepforge/geom/vec3.hpp"

namespace pepforge::data {

// One residue of a parsed complex. Only backbone atoms are retained.
struct StructResidue {
    int seq_num = 0;
    char aa = '\0';          // one-letter code, '\0' when unknown
    bool unknown_aa = false; // residue name outside the canonical 20
    std::map<std::string, geom::Vec3> atoms;

    const geom::Vec3& atom(const std::string& name) const;
    bool has_backbone() const;
};

struct Chain {
    char id = ' ';
    std::vector<StructResidue> residues;
};

// Artifact-side model of one PDB complex.
struct Structure {
    std::vector<Chain> chains;
    std::optional<double> resolution; // Angstroms

    const Chain* find_chain(char id) const;
};

} // namespace pepforge::data
