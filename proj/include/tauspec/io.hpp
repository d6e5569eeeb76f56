#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "tauspec/filterbank.hpp"
#include "tauspec/grid.hpp"
#include "tauspec/linalg.hpp"
#include "tauspec/state_space.hpp"

namespace tauspec::io {

using Json = nlohmann::ordered_json;

// Serializes with every number printed as %.17g; NaN and infinities
// become null.
std::string dump_json(const Json& value, int indent = 2);
void write_json(const std::filesystem::path& path, const Json& value);
Json read_json(const std::filesystem::path& path);

// Row-major nested arrays. An empty matrix is [].
Json matrix_to_json(const Matrix& x);
Matrix matrix_from_json(const Json& value, const char* what);
Matrix matrix_from_json(const Json& value, int rows, int cols, const char* what);

// {"n": states, "m": channels, "A", "B", "C", "D"}
Json model_to_json(const StateSpaceModel& model);
StateSpaceModel model_from_json(const Json& value);
void write_model(const std::filesystem::path& path, const StateSpaceModel& model);
StateSpaceModel read_model(const std::filesystem::path& path);

// {"A", "B"}
void write_bank(const std::filesystem::path& path, const FilterBank& bank);
FilterBank read_bank(const std::filesystem::path& path);

// {"sigma"}
void write_sigma(const std::filesystem::path& path, const Matrix& sigma);
Matrix read_sigma(const std::filesystem::path& path);

// Header theta,re_00,im_00,re_01,im_01,... (re_i_j once m >= 10), one row
// per grid node.
std::string spectrum_column(const char* part, int i, int j, int m);
void write_spectrum_csv(const std::filesystem::path& path,
                        const GridSpectrum& spectrum);
GridSpectrum read_spectrum_csv(const std::filesystem::path& path,
                               bool coercive = false);

// Header y0,y1,...; one row per sample. Returned as channels x samples.
void write_data_csv(const std::filesystem::path& path, const Matrix& data);
Matrix read_data_csv(const std::filesystem::path& path);

std::string format_number(double x);

}  // namespace tauspec::io
