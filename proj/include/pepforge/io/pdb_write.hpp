#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pepforge/geom/backbone.hpp"

namespace pepforge::io {

struct PdbChainOut {
    char chain_id = 'A';
    const geom::Backbone* backbone = nullptr;
    int first_seq_num = 1;
};

// Backbone-only PDB text (N/CA/C/O per residue) with optional REMARK 2
// resolution header. Column layout follows the wwPDB ATOM record spec.
void write_pdb(std::ostream& os, const std::vector<PdbChainOut>& chains,
               std::optional<double> resolution = std::nullopt,
               const std::string& header_id = "");

void write_pdb_file(const std::string& path, const std::vector<PdbChainOut>& chains,
                    std::optional<double> resolution = std::nullopt,
                    const std::string& header_id = "");

} // namespace pepforge::io
