#include "pepforge/io/pdb_write.hpp"

#include <cstdio>
#include <fstream>

#include "pepforge/data/aminoacids.hpp"
#include "pepforge/errors.hpp"

namespace pepforge::io {

namespace {

void write_atom(std::ostream& os, int serial, const char* name, const std::string& res_name,
                char chain, int seq, const geom::Vec3& p, const char* element) {
    char buf[96];
    std::snprintf(buf, sizeof(buf),
                  "ATOM  %5d %-4s %3s %c%4d    %8.3f%8.3f%8.3f%6.2f%6.2f          %2s\n", serial,
                  name, res_name.c_str(), chain, seq, p.x, p.y, p.z, 1.0, 0.0, element);
    os << buf;
}

} // namespace

void write_pdb(std::ostream& os, const std::vector<PdbChainOut>& chains,
               std::optional<double> resolution, const std::string& header_id) {
    if (!header_id.empty()) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "HEADER    PEPTIDE COMPLEX                         %s\n",
                      header_id.c_str());
        os << buf;
    }
    if (resolution.has_value()) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "REMARK   2 RESOLUTION. %7.2f ANGSTROMS.\n", *resolution);
        os << buf;
    }
    int serial = 1;
    for (const auto& ch : chains) {
        if (ch.backbone == nullptr) throw ValueError("write_pdb: null backbone");
        int seq = ch.first_seq_num;
        for (const auto& r : ch.backbone->residues) {
            std::string res3 = data::one_to_three(r.aa);
            if (res3.empty()) res3 = "UNK";
            write_atom(os, serial++, " N  ", res3, ch.chain_id, seq, r.n, "N");
            write_atom(os, serial++, " CA ", res3, ch.chain_id, seq, r.ca, "C");
            write_atom(os, serial++, " C  ", res3, ch.chain_id, seq, r.c, "C");
            write_atom(os, serial++, " O  ", res3, ch.chain_id, seq, r.o, "O");
            ++seq;
        }
        os << "TER\n";
    }
    os << "END\n";
}

void write_pdb_file(const std::string& path, const std::vector<PdbChainOut>& chains,
                    std::optional<double> resolution, const std::string& header_id) {
    std::ofstream f(path);
    if (!f) throw DataError("write_pdb_file: cannot open " + path);
    write_pdb(f, chains, resolution, header_id);
}

} // namespace pepforge::io
