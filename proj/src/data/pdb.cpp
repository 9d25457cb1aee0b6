#include "pepforge/data/pdb.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "pepforge/data/aminoacids.hpp"
#include "pepforge/errors.hpp"

namespace pepforge::data {

const geom::Vec3& StructResidue::atom(const std::string& name) const {
    auto it = atoms.find(name);
    if (it == atoms.end()) throw DataError("residue lacks atom " + name);
    return it->second;
}

bool StructResidue::has_backbone() const {
    return atoms.count("N") && atoms.count("CA") && atoms.count("C") && atoms.count("O");
}

const Chain* Structure::find_chain(char id) const {
    for (const auto& c : chains) {
        if (c.id == id) return &c;
    }
    return nullptr;
}

namespace {

std::string trimmed(const std::string& s) {
    size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

// Column slice per the wwPDB ATOM record layout; `from` is 1-based.
std::string cols(const std::string& line, size_t from, size_t to) {
    if (line.size() < from) return "";
    return line.substr(from - 1, std::min(to, line.size()) - (from - 1));
}

bool parse_double(const std::string& s, double& out) {
    try {
        size_t used = 0;
        out = std::stod(s, &used);
        return used > 0;
    } catch (...) {
        return false;
    }
}

struct RawResidue {
    char chain = ' ';
    int seq_num = 0;
    char icode = ' ';
    std::string res_name;
    std::map<std::string, geom::Vec3> atoms;
};

} // namespace

PdbParseResult parse_pdb(std::istream& in) {
    std::vector<RawResidue> raw;
    std::optional<double> resolution;
    std::string line;
    int atom_records = 0;
    while (std::getline(in, line)) {
        std::string rec = cols(line, 1, 6);
        if (rec.rfind("ENDMDL", 0) == 0) break; // first model only
        if (rec.rfind("REMARK", 0) == 0) {
            if (line.find("REMARK   2 RESOLUTION.") == 0) {
                std::string rest = line.substr(22);
                double v = 0.0;
                std::istringstream rs(rest);
                if (rs >> v) resolution = v;
            }
            continue;
        }
        if (rec != "ATOM  ") continue;
        char alt = line.size() >= 17 ? line[16] : ' ';
        if (alt != ' ' && alt != 'A' && alt != '1') continue;
        std::string atom_name = trimmed(cols(line, 13, 16));
        std::string res_name = trimmed(cols(line, 18, 20));
        char chain = line.size() >= 22 ? line[21] : ' ';
        char icode = line.size() >= 27 ? line[26] : ' ';
        int seq = 0;
        double x = 0, y = 0, z = 0;
        try {
            seq = std::stoi(cols(line, 23, 26));
        } catch (...) {
            continue;
        }
        if (!parse_double(cols(line, 31, 38), x) || !parse_double(cols(line, 39, 46), y) ||
            !parse_double(cols(line, 47, 54), z)) {
            continue;
        }
        ++atom_records;
        if (raw.empty() || raw.back().chain != chain || raw.back().seq_num != seq ||
            raw.back().icode != icode) {
            RawResidue r;
            r.chain = chain;
            r.seq_num = seq;
            r.icode = icode;
            r.res_name = res_name;
            raw.push_back(std::move(r));
        }
        raw.back().atoms.emplace(atom_name, geom::Vec3{x, y, z}); // first altloc wins
    }
    if (atom_records == 0) throw DataError("parse_pdb: no parsable ATOM records (empty structure)");

    PdbParseResult out;
    out.structure.resolution = resolution;
    for (auto& r : raw) {
        if (!r.atoms.count("N") || !r.atoms.count("CA") || !r.atoms.count("C") ||
            !r.atoms.count("O")) {
            ++out.dropped_incomplete;
            continue;
        }
        Chain* chain = nullptr;
        for (auto& c : out.structure.chains) {
            if (c.id == r.chain) chain = &c;
        }
        if (chain == nullptr) {
            out.structure.chains.push_back(Chain{r.chain, {}});
            chain = &out.structure.chains.back();
        }
        if (!chain->residues.empty() && r.seq_num <= chain->residues.back().seq_num) {
            ++out.dropped_nonmonotonic;
            continue;
        }
        StructResidue sr;
        sr.seq_num = r.seq_num;
        char one = three_to_one(r.res_name);
        sr.aa = one == '\0' ? 'X' : one;
        sr.unknown_aa = one == '\0';
        for (const char* name : {"N", "CA", "C", "O"}) sr.atoms[name] = r.atoms[name];
        chain->residues.push_back(std::move(sr));
    }
    return out;
}

PdbParseResult parse_pdb_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("parse_pdb_file: cannot open " + path);
    return parse_pdb(f);
}

} // namespace pepforge::data
