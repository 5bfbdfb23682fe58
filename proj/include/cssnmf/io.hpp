#pragma once

#include "cssnmf/postprocess.hpp"
#include "cssnmf/synthgen.hpp"

#include <filesystem>
#include <optional>

namespace cssnmf {

// Instance directory layout: M.csv, W_true.csv, H_true.csv, labels.csv
// (rows "column,class" for the pure columns) and meta.json.
void write_instance(const std::filesystem::path& dir, const SyntheticInstance& inst);
SyntheticInstance read_instance(const std::filesystem::path& dir);

/// One index per line.
void write_index_list(const std::filesystem::path& path, const IndexList& K);
IndexList read_index_list(const std::filesystem::path& path);

/// Loads M from a CSV file, or from M.csv when given an instance directory.
Matrix load_matrix_input(const std::filesystem::path& path);

/// Ground truth next to an input, if the input is an instance directory.
std::optional<SyntheticInstance> load_instance_if_present(const std::filesystem::path& path);

/// Writes a file atomically enough for our purposes: to a temporary name, then renamed.
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace cssnmf
