#pragma once

#include <string>
#include <string_view>

namespace pepforge::data {

// Canonical 20-type alphabet, alphabetical by one-letter code. This index
// order is fixed across one-hot encodings, transition matrices and
// checkpoints.
inline constexpr std::string_view kAminoAlphabet = "ACDEFGHIKLMNPQRSTVWY";
inline constexpr int kNumAminoTypes = 20;

// Index in kAminoAlphabet, or -1 for a non-canonical letter.
int aa_index(char one_letter);

char aa_letter(int index);

// "ALA", "CYS", ... ; empty for non-canonical input.
std::string one_to_three(char one_letter);

// '\0' for a residue name outside the canonical 20.
char three_to_one(std::string_view three_letter);

bool is_canonical(char one_letter);

} // namespace pepforge::data
