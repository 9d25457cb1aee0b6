#include "pepforge/io/example_io.hpp"

#include <fstream>
#include <json.hpp>

#include "pepforge/errors.hpp"
#include "pepforge/geom/backbone.hpp"

namespace pepforge::io {

using nlohmann::json;

namespace {

json angles_to_json(const std::vector<geom::AngleRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows) {
        json row = json::array();
        for (double v : r.as_array()) row.push_back(v);
        arr.push_back(std::move(row));
    }
    return arr;
}

std::vector<geom::AngleRow> angles_from_json(const json& arr) {
    std::vector<geom::AngleRow> rows;
    for (const auto& row : arr) {
        if (row.size() != 8) throw DataError("example json: angle row must have 8 entries");
        std::array<double, 8> v{};
        for (int i = 0; i < 8; ++i) v[static_cast<size_t>(i)] = row[static_cast<size_t>(i)];
        rows.push_back(geom::AngleRow::from_array(v));
    }
    return rows;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write " + path);
    f << text;
}

} // namespace

ExampleRecord to_record(const data::ComplexExample& ex) {
    ExampleRecord rec;
    rec.meta = ex.meta;
    rec.peptide_angles = geom::extract_internal(ex.peptide).rows;
    rec.peptide_seq = ex.peptide_seq;
    rec.pocket = ex.pocket;
    return rec;
}

std::string example_to_json(const ExampleRecord& rec) {
    json j;
    j["meta"] = {
        {"ext_k", rec.meta.ext_k},
        {"pdb_id", rec.meta.pdb_id},
        {"peptide_chain", std::string(1, rec.meta.peptide_chain)},
        {"receptor_chains", rec.meta.receptor_chains},
    };
    j["peptide"] = {
        {"angles", angles_to_json(rec.peptide_angles)},
        {"seq", rec.peptide_seq},
    };
    json ids = json::array();
    for (const auto& id : rec.pocket.residue_ids) ids.push_back(id.str());
    j["pocket"] = {
        {"aa", rec.pocket.aa},
        {"angles", angles_to_json(rec.pocket.angles)},
        {"ids", std::move(ids)},
    };
    return j.dump(2) + "\n";
}

ExampleRecord example_from_json(const std::string& text) {
    json j = json::parse(text);
    ExampleRecord rec;
    rec.meta.ext_k = j.at("meta").at("ext_k");
    rec.meta.pdb_id = j.at("meta").at("pdb_id");
    std::string pc = j.at("meta").at("peptide_chain");
    rec.meta.peptide_chain = pc.empty() ? ' ' : pc[0];
    rec.meta.receptor_chains = j.at("meta").at("receptor_chains");
    rec.peptide_angles = angles_from_json(j.at("peptide").at("angles"));
    rec.peptide_seq = j.at("peptide").at("seq");
    rec.pocket.aa = j.at("pocket").at("aa");
    rec.pocket.angles = angles_from_json(j.at("pocket").at("angles"));
    for (const auto& s : j.at("pocket").at("ids")) {
        std::string id = s;
        auto colon = id.find(':');
        if (colon == std::string::npos || colon == 0) throw DataError("example json: bad pocket id");
        rec.pocket.residue_ids.push_back({id[0], std::stoi(id.substr(colon + 1))});
    }
    if (rec.pocket.aa.size() != rec.pocket.angles.size() ||
        rec.pocket.aa.size() != rec.pocket.residue_ids.size()) {
        throw DataError("example json: pocket rows misaligned");
    }
    return rec;
}

void save_example(const std::string& path, const ExampleRecord& rec) {
    write_file(path, example_to_json(rec));
}

ExampleRecord load_example(const std::string& path) { return example_from_json(read_file(path)); }

void save_split(const std::string& path, const data::SplitResult& split) {
    json j;
    j["seed"] = split.seed;
    j["train"] = split.train;
    j["val"] = split.val;
    j["test"] = split.test;
    write_file(path, j.dump(2) + "\n");
}

data::SplitResult load_split(const std::string& path) {
    json j = json::parse(read_file(path));
    data::SplitResult s;
    s.seed = j.at("seed");
    s.train = j.at("train").get<std::vector<std::string>>();
    s.val = j.at("val").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
    return s;
}

void save_report(const std::string& path, const PrepareReport& report) {
    json j;
    j["accepted"] = report.accepted;
    json rej = json::object();
    for (const auto& [rule, count] : report.rejected) rej[rule] = count;
    j["rejected"] = std::move(rej);
    write_file(path, j.dump(2) + "\n");
}

} // namespace pepforge::io
