#include "cssnmf/io.hpp"

#include "cssnmf/csv.hpp"
#include "cssnmf/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace cssnmf {

namespace fs = std::filesystem;
using nlohmann::json;

void write_text_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot write " + path.string());
        out << text;
        if (!out) throw DataError("write failed for " + path.string());
    }
    fs::rename(tmp, path);
}

namespace {

void write_matrix_file(const fs::path& path, const Matrix& M) {
    std::ostringstream ss;
    write_csv_matrix(ss, M);
    write_text_file(path, ss.str());
}

json index_array(const IndexList& v) {
    json a = json::array();
    for (Index i : v) a.push_back(i);
    return a;
}

} // namespace

void write_index_list(const fs::path& path, const IndexList& K) {
    std::ostringstream ss;
    for (Index k : K) ss << k << '\n';
    write_text_file(path, ss.str());
}

IndexList read_index_list(const fs::path& path) {
    const Matrix A = read_csv_matrix(path);
    if (A.size() > 0 && A.cols() != 1) throw DataError(path.string() + ": expected one index per line");
    IndexList out;
    for (Index i = 0; i < A.rows(); ++i) {
        const double v = A(i, 0);
        if (v < 0 || v != static_cast<double>(static_cast<Index>(v))) {
            throw DataError(path.string() + ": line " + std::to_string(i + 1) + " is not an index");
        }
        out.push_back(static_cast<Index>(v));
    }
    return out;
}

void write_instance(const fs::path& dir, const SyntheticInstance& inst) {
    fs::create_directories(dir);
    write_matrix_file(dir / "M.csv", inst.M);
    write_matrix_file(dir / "W_true.csv", inst.W_true);
    write_matrix_file(dir / "H_true.csv", inst.H_true);
    std::ostringstream labels;
    for (size_t i = 0; i < inst.pure_columns.size(); ++i) labels << inst.pure_columns[i] << ',' << inst.labels[i] << '\n';
    write_text_file(dir / "labels.csv", labels.str());

    json meta;
    meta["scenario"] = inst.scenario;
    meta["seed"] = inst.seed;
    meta["eps"] = inst.epsilon;
    meta["m"] = inst.M.rows();
    meta["n"] = inst.M.cols();
    meta["r"] = inst.rank();
    json sizes = json::array(), sets = json::array();
    for (const auto& s : inst.pure_sets) {
        sizes.push_back(s.size());
        sets.push_back(index_array(s));
    }
    meta["p_t"] = sizes;
    meta["S_t"] = sets;
    json scale = json::array();
    for (Index j = 0; j < inst.col_scale.size(); ++j) scale.push_back(inst.col_scale(j));
    meta["col_scale"] = scale;
    write_text_file(dir / "meta.json", meta.dump(2) + "\n");
}

SyntheticInstance read_instance(const fs::path& dir) {
    SyntheticInstance inst;
    inst.M = read_csv_matrix(dir / "M.csv");
    inst.W_true = read_csv_matrix(dir / "W_true.csv");
    inst.H_true = read_csv_matrix(dir / "H_true.csv");
    if (inst.W_true.rows() != inst.M.rows() || inst.H_true.rows() != inst.W_true.cols() ||
        inst.H_true.cols() != inst.M.cols()) {
        throw DataError(dir.string() + ": W_true, H_true and M have inconsistent shapes");
    }
    const Matrix L = read_csv_matrix(dir / "labels.csv");
    if (L.size() > 0 && L.cols() != 2) throw DataError(dir.string() + "/labels.csv: expected two columns");
    for (Index i = 0; i < L.rows(); ++i) {
        const Index j = static_cast<Index>(L(i, 0));
        const int t = static_cast<int>(L(i, 1));
        if (j < 0 || j >= inst.M.cols() || t < 0 || t >= inst.W_true.cols()) {
            throw DataError(dir.string() + "/labels.csv: entry out of range on line " + std::to_string(i + 1));
        }
        inst.pure_columns.push_back(j);
        inst.labels.push_back(t);
    }

    std::ifstream in(dir / "meta.json");
    if (!in) throw DataError("cannot read " + (dir / "meta.json").string());
    json meta;
    try {
        in >> meta;
        inst.scenario = meta.value("scenario", std::string("file"));
        inst.seed = meta.value("seed", std::uint64_t{0});
        inst.epsilon = meta.value("eps", 0.0);
        for (const auto& s : meta.at("S_t")) inst.pure_sets.push_back(s.get<IndexList>());
        if (meta.contains("col_scale")) {
            const auto v = meta["col_scale"].get<std::vector<double>>();
            inst.col_scale = Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
        }
    } catch (const json::exception& e) {
        throw DataError(dir.string() + "/meta.json: " + e.what());
    }
    return inst;
}

Matrix load_matrix_input(const fs::path& path) {
    if (fs::is_directory(path)) return read_csv_matrix(path / "M.csv");
    return read_csv_matrix(path);
}

std::optional<SyntheticInstance> load_instance_if_present(const fs::path& path) {
    if (fs::is_directory(path) && fs::exists(path / "meta.json") && fs::exists(path / "W_true.csv")) {
        return read_instance(path);
    }
    return std::nullopt;
}

} // namespace cssnmf
