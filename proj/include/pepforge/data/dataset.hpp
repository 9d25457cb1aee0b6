#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pepforge/data/structure.hpp"
#include "pepforge/geom/backbone.hpp"

namespace pepforge::data {

inline constexpr double kContactCutoff = 5.0; // Angstroms
inline constexpr int kMinPeptideLen = 5;
inline constexpr int kMaxPeptideLen = 30;
inline constexpr double kMaxResolution = 5.0;

struct FilterDecision {
    bool accepted = false;
    std::string reason; // comma-joined violated rules, empty when accepted
};

// Rejects on resolution worse than 5 A, peptide length outside [5, 30], or
// any unknown amino acid in the complex. Throws DataError when the chain is
// missing.
FilterDecision filter_complex(const Structure& s, char peptide_chain);

struct ResidueId {
    char chain = ' ';
    int seq_num = 0;

    auto operator<=>(const ResidueId&) const = default;
    std::string str() const { return std::string(1, chain) + ":" + std::to_string(seq_num); }
};

// Receptor residues with any backbone atom strictly within `cutoff` of any
// peptide backbone atom, sorted by (chain, seq_num). Throws DataError when
// the receptor is empty or no residue qualifies.
std::vector<ResidueId> find_pocket(const Structure& s, char peptide_chain, double cutoff);

// Union with sequence neighbors at offsets +-1..k inside the same chain
// (neighborhood by chain position, robust to seq-num gaps), clipped at chain
// ends, deduplicated and sorted.
std::vector<ResidueId> extend_pocket(const std::vector<ResidueId>& pocket_ids, int k,
                                     const Structure& s);

// Pocket representation: one angle row per extended pocket residue computed
// from its own flanking receptor residues, plus residue types. Rows whose
// predecessor is missing or discontiguous are dropped.
struct PocketRepr {
    std::vector<geom::AngleRow> angles;
    std::string aa; // one-letter codes, aligned with angles
    std::vector<ResidueId> residue_ids;

    size_t size() const { return angles.size(); }
    // m x 20 one-hot rows (each sums to 1).
    std::vector<std::array<double, 20>> aa_onehot() const;
};

struct ExampleMeta {
    std::string pdb_id;
    std::string receptor_chains;
    char peptide_chain = ' ';
    int ext_k = 0;
};

struct ComplexExample {
    ExampleMeta meta;
    geom::Backbone peptide;   // full peptide backbone with residue identities
    std::string peptide_seq;  // one-letter, length == peptide.size()
    PocketRepr pocket;
};

// Builds the training example: peptide backbone + sequence plus the ext-k
// pocket representation. The caller is expected to have run filter_complex.
// Throws GeometryError on broken peptide chains and DataError on empty
// pockets.
ComplexExample build_example(const Structure& s, char peptide_chain, int ext_k,
                             double cutoff = kContactCutoff);

struct SplitResult {
    std::vector<std::string> train, val, test;
    uint64_t seed = 0;
};

// Deterministic disjoint partition of the (sorted) ids; ratios must sum to 1.
SplitResult split_dataset(std::vector<std::string> ids, const std::array<double, 3>& ratios,
                          uint64_t seed);

} // namespace pepforge::data
