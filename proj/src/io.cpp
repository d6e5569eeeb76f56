#include "tauspec/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "tauspec/error.hpp"

namespace tauspec::io {

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

void dump(const Json& v, int indent, int depth, std::string& out) {
  auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (v.type()) {
    case Json::value_t::number_float: {
      const double x = v.get<double>();
      out += std::isfinite(x) ? format_number(x) : "null";
      break;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        break;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& e : v) flat = flat && !e.is_structured();
      out += '[';
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += flat ? ", " : ",";
        first = false;
        if (!flat) newline(depth + 1);
        dump(e, indent, depth + 1, out);
      }
      if (!flat) newline(depth);
      out += ']';
      break;
    }
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        break;
      }
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += Json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        dump(it.value(), indent, depth + 1, out);
      }
      newline(depth);
      out += '}';
      break;
    }
    default:
      out += v.dump();
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open " + path.string() + " for writing");
  return f;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open " + path.string());
  return f;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& s, const std::filesystem::path& path) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size())
    throw InputError("malformed number '" + s + "' in " + path.string());
  return x;
}

std::vector<std::vector<double>> read_csv(const std::filesystem::path& path,
                                          std::vector<std::string>& header) {
  auto f = open_in(path);
  std::string line;
  if (!std::getline(f, line)) throw InputError(path.string() + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  header = split(line);
  std::vector<std::vector<double>> rows;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw InputError("row width differs from header in " + path.string());
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, path));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string dump_json(const Json& value, int indent) {
  std::string out;
  dump(value, indent, 0, out);
  return out;
}

void write_json(const std::filesystem::path& path, const Json& value) {
  auto f = open_out(path);
  f << dump_json(value) << '\n';
  if (!f) throw InputError("failed writing " + path.string());
}

Json read_json(const std::filesystem::path& path) {
  auto f = open_in(path);
  try {
    return Json::parse(f);
  } catch (const Json::exception& e) {
    throw InputError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

Json matrix_to_json(const Matrix& x) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < x.cols(); ++j) row.push_back(x(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& value, const char* what) {
  if (!value.is_array()) throw InputError(std::string(what) + " must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(value.size());
  if (rows == 0) return Matrix(0, 0);
  if (!value[0].is_array()) throw InputError(std::string(what) + " must be an array of rows");
  const auto cols = static_cast<Eigen::Index>(value[0].size());
  Matrix x(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = value[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw InputError(std::string(what) + " has ragged rows");
    for (Eigen::Index j = 0; j < cols; ++j) {
      const Json& e = row[static_cast<std::size_t>(j)];
      if (!e.is_number()) throw InputError(std::string(what) + " has a non-numeric entry");
      x(i, j) = e.get<double>();
    }
  }
  return x;
}

Matrix matrix_from_json(const Json& value, int rows, int cols, const char* what) {
  Matrix x = matrix_from_json(value, what);
  if (x.size() == 0 && rows * cols == 0) return Matrix::Zero(rows, cols);
  if (x.rows() != rows || x.cols() != cols)
    throw InputError(std::string(what) + " must be " + std::to_string(rows) +
                     " x " + std::to_string(cols));
  return x;
}

Json model_to_json(const StateSpaceModel& model) {
  model.validate();
  Json j = Json::object();
  j["n"] = model.states();
  j["m"] = model.outputs();
  j["A"] = matrix_to_json(model.A);
  j["B"] = matrix_to_json(model.B);
  j["C"] = matrix_to_json(model.C);
  j["D"] = matrix_to_json(model.D);
  return j;
}

StateSpaceModel model_from_json(const Json& value) {
  try {
    const int n = value.at("n").get<int>();
    const int m = value.at("m").get<int>();
    if (n < 0 || m < 1) throw InputError("model has invalid n or m");
    StateSpaceModel model{matrix_from_json(value.at("A"), n, n, "A"),
                          matrix_from_json(value.at("B"), n, m, "B"),
                          matrix_from_json(value.at("C"), m, n, "C"),
                          matrix_from_json(value.at("D"), m, m, "D")};
    model.validate();
    return model;
  } catch (const Json::exception& e) {
    throw InputError(std::string("invalid model JSON: ") + e.what());
  }
}

void write_model(const std::filesystem::path& path, const StateSpaceModel& model) {
  write_json(path, model_to_json(model));
}

StateSpaceModel read_model(const std::filesystem::path& path) {
  return model_from_json(read_json(path));
}

void write_bank(const std::filesystem::path& path, const FilterBank& bank) {
  Json j = Json::object();
  j["A"] = matrix_to_json(bank.A());
  j["B"] = matrix_to_json(bank.B());
  write_json(path, j);
}

FilterBank read_bank(const std::filesystem::path& path) {
  const Json j = read_json(path);
  try {
    return FilterBank(matrix_from_json(j.at("A"), "A"),
                      matrix_from_json(j.at("B"), "B"));
  } catch (const Json::exception& e) {
    throw InputError("invalid bank JSON in " + path.string() + ": " + e.what());
  }
}

void write_sigma(const std::filesystem::path& path, const Matrix& sigma) {
  Json j = Json::object();
  j["sigma"] = matrix_to_json(sigma);
  write_json(path, j);
}

Matrix read_sigma(const std::filesystem::path& path) {
  const Json j = read_json(path);
  try {
    Matrix s = matrix_from_json(j.at("sigma"), "sigma");
    if (s.rows() != s.cols() || s.rows() == 0)
      throw InputError("sigma must be a nonempty square matrix");
    return s;
  } catch (const Json::exception& e) {
    throw InputError("invalid covariance JSON in " + path.string() + ": " + e.what());
  }
}

std::string spectrum_column(const char* part, int i, int j, int m) {
  std::string name = std::string(part) + "_" + std::to_string(i);
  if (m >= 10) name += "_";
  return name + std::to_string(j);
}

void write_spectrum_csv(const std::filesystem::path& path,
                        const GridSpectrum& spectrum) {
  auto f = open_out(path);
  const int m = spectrum.dim();
  std::string line = "theta";
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      line += "," + spectrum_column("re", i, j, m) + "," +
              spectrum_column("im", i, j, m);
  f << line << '\n';
  for (int k = 0; k < spectrum.size(); ++k) {
    line = format_number(spectrum.grid().theta(k));
    const CMatrix& s = spectrum[k];
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        line += "," + format_number(s(i, j).real()) + "," +
                format_number(s(i, j).imag());
    f << line << '\n';
  }
  if (!f) throw InputError("failed writing " + path.string());
}

GridSpectrum read_spectrum_csv(const std::filesystem::path& path, bool coercive) {
  std::vector<std::string> header;
  const auto rows = read_csv(path, header);
  const std::size_t width = header.size();
  int m = 0;
  while (static_cast<std::size_t>(1 + 2 * m * m) < width) ++m;
  if (m == 0 || static_cast<std::size_t>(1 + 2 * m * m) != width ||
      header[0] != "theta")
    throw InputError(path.string() + " does not have a spectrum header");
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (header[1 + 2 * (i * m + j)] != spectrum_column("re", i, j, m) ||
          header[2 + 2 * (i * m + j)] != spectrum_column("im", i, j, m))
        throw InputError(path.string() + " has unexpected column names");
  const FrequencyGrid grid(static_cast<int>(rows.size()));
  std::vector<CMatrix> samples;
  samples.reserve(rows.size());
  for (int k = 0; k < grid.size(); ++k) {
    const auto& r = rows[k];
    if (std::abs(r[0] - grid.theta(k)) > 1e-9)
      throw InputError(path.string() + " is not sampled on the uniform grid");
    CMatrix s(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        s(i, j) = Complex(r[1 + 2 * (i * m + j)], r[2 + 2 * (i * m + j)]);
    samples.push_back(std::move(s));
  }
  try {
    return GridSpectrum(grid, std::move(samples), coercive);
  } catch (const DomainError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_data_csv(const std::filesystem::path& path, const Matrix& data) {
  auto f = open_out(path);
  std::string line;
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    line += (i ? ",y" : "y") + std::to_string(i);
  f << line << '\n';
  for (Eigen::Index k = 0; k < data.cols(); ++k) {
    line.clear();
    for (Eigen::Index i = 0; i < data.rows(); ++i)
      line += (i ? "," : "") + format_number(data(i, k));
    f << line << '\n';
  }
  if (!f) throw InputError("failed writing " + path.string());
}

Matrix read_data_csv(const std::filesystem::path& path) {
  std::vector<std::string> header;
  const auto rows = read_csv(path, header);
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] != "y" + std::to_string(i))
      throw InputError(path.string() + " does not have a y0,y1,... header");
  Matrix data(static_cast<Eigen::Index>(header.size()),
              static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (std::size_t i = 0; i < header.size(); ++i)
      data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[k][i];
  return data;
}

}  // namespace tauspec::io
