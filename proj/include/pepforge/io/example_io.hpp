#pragma once

#include <string>
#include <vector>

#include "pepforge/data/dataset.hpp"

namespace pepforge::io {

// On-disk form of one training example (<pdbid>.example.json). Coordinates
// are not persisted; angles + sequences are the model inputs.
struct ExampleRecord {
    data::ExampleMeta meta;
    std::vector<geom::AngleRow> peptide_angles; // rows of the interior residues
    std::string peptide_seq;                    // full peptide, length rows+2
    data::PocketRepr pocket;

    // Sequence letters aligned with peptide_angles (interior residues).
    std::string interior_seq() const {
        if (peptide_seq.size() < 2) return "";
        return peptide_seq.substr(1, peptide_seq.size() - 2);
    }
};

ExampleRecord to_record(const data::ComplexExample& ex);

std::string example_to_json(const ExampleRecord& rec);
ExampleRecord example_from_json(const std::string& text);

void save_example(const std::string& path, const ExampleRecord& rec);
ExampleRecord load_example(const std::string& path);

void save_split(const std::string& path, const data::SplitResult& split);
data::SplitResult load_split(const std::string& path);

// Rejection report written by `prepare`: per-rule counts.
struct PrepareReport {
    int accepted = 0;
    std::vector<std::pair<std::string, int>> rejected; // rule -> count, sorted by rule
};
void save_report(const std::string& path, const PrepareReport& report);

} // namespace pepforge::io
