#pragma once

#include <istream>
#include <string>

#include "pepforge/data/structure.hpp"

namespace pepforge::data {

struct PdbParseResult {
    Structure structure;
    int dropped_incomplete = 0;  // residues missing any of N/CA/C/O
    int dropped_nonmonotonic = 0; // residues violating increasing seq_num
    int warnings() const { return dropped_incomplete + dropped_nonmonotonic; }
};

// Parse ATOM records (first model only) into a Structure. Residues missing
// any of the four backbone atoms are dropped and counted. Throws DataError
// when no ATOM record parses.
PdbParseResult parse_pdb(std::istream& in);
PdbParseResult parse_pdb_file(const std::string& path);

} // namespace pepforge::data
