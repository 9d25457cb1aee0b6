#include "pepforge/data/aminoacids.hpp"

#include <array>

namespace pepforge::data {

namespace {

struct Entry {
    char one;
    const char* three;
};

constexpr std::array<Entry, 20> kTable = {{
    {'A', "ALA"}, {'C', "CYS"}, {'D', "ASP"}, {'E', "GLU"}, {'F', "PHE"},
    {'G', "GLY"}, {'H', "HIS"}, {'I', "ILE"}, {'K', "LYS"}, {'L', "LEU"},
    {'M', "MET"}, {'N', "ASN"}, {'P', "PRO"}, {'Q', "GLN"}, {'R', "ARG"},
    {'S', "SER"}, {'T', "THR"}, {'V', "VAL"}, {'W', "TRP"}, {'Y', "TYR"},
}};

} // namespace

int aa_index(char one_letter) {
    for (int i = 0; i < kNumAminoTypes; ++i) {
        if (kAminoAlphabet[i] == one_letter) return i;
    }
    return -1;
}

char aa_letter(int index) {
    if (index < 0 || index >= kNumAminoTypes) return '\0';
    return kAminoAlphabet[static_cast<size_t>(index)];
}

std::string one_to_three(char one_letter) {
    for (const auto& e : kTable) {
        if (e.one == one_letter) return e.three;
    }
    return "";
}

char three_to_one(std::string_view three_letter) {
    for (const auto& e : kTable) {
        if (three_letter == e.three) return e.one;
    }
    return '\0';
}

bool is_canonical(char one_letter) { return aa_index(one_letter) >= 0; }

} // namespace pepforge::data
