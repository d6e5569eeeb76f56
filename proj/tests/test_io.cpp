#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "tauspec/error.hpp"
#include "tauspec/io.hpp"
#include "test_support.hpp"

using namespace tauspec;
using namespace tauspec::test;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "tauspec_io";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
}

std::string first_line(const fs::path& path) {
  std::ifstream f(path);
  std::string line;
  std::getline(f, line);
  return line;
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(io::format_number(0.1) == "0.10000000000000001");
  CHECK(io::format_number(1.0) == "1");
  CHECK(io::format_number(1.0 / 3.0) == "0.33333333333333331");
  CHECK(io::format_number(1e300) == "1.0000000000000001e+300");
  // 17 significant digits survive a text round trip bit for bit.
  Rng rng = make_rng(61);
  const Matrix x = gaussian_matrix(1, 200, rng);
  for (Eigen::Index i = 0; i < x.cols(); ++i)
    CHECK(std::stod(io::format_number(x(0, i))) == x(0, i));
}

TEST_CASE("JSON writer") {
  io::Json j = io::Json::object();
  j["a"] = 0.1;
  j["b"] = std::numeric_limits<double>::quiet_NaN();
  j["c"] = {1, 2, 3};
  j["d"] = -std::numeric_limits<double>::infinity();
  j["e"] = "text";
  CHECK(io::dump_json(j, -1) ==
        R"({"a":0.10000000000000001,"b":null,"c":[1, 2, 3],"d":null,"e":"text"})");
  const io::Json back = io::Json::parse(io::dump_json(j));
  CHECK(back["a"].get<double>() == 0.1);
  CHECK(back["b"].is_null());
  CHECK(back["c"] == j["c"]);

  const fs::path path = scratch("bad.json");
  write_text(path, "{not json");
  CHECK_THROWS_AS(io::read_json(path), InputError);
  CHECK_THROWS_AS(io::read_json(scratch("missing.json")), InputError);
}

TEST_CASE("matrix JSON") {
  Rng rng = make_rng(62);
  const Matrix x = gaussian_matrix(3, 4, rng);
  CHECK(io::matrix_from_json(io::Json::parse(io::dump_json(io::matrix_to_json(x))), "x") == x);
  CHECK(io::matrix_to_json(Matrix(0, 0)).dump() == "[]");
  CHECK(io::matrix_from_json(io::Json::array(), 0, 3, "x").cols() == 3);
  CHECK_THROWS_AS(io::matrix_from_json(io::Json::parse("[[1,2],[3]]"), "x"), InputError);
  CHECK_THROWS_AS(io::matrix_from_json(io::Json::parse("[[1,\"a\"]]"), "x"), InputError);
  CHECK_THROWS_AS(io::matrix_from_json(io::Json::parse("{}"), "x"), InputError);
  CHECK_THROWS_AS(io::matrix_from_json(io::matrix_to_json(x), 4, 3, "x"), InputError);
}

TEST_CASE("model, bank and sigma files") {
  Rng rng = make_rng(63);
  const StateSpaceModel w = random_factor(2, 3, rng).realization();
  const fs::path model_path = scratch("model.json");
  io::write_model(model_path, w);
  const StateSpaceModel back = io::read_model(model_path);
  CHECK(back.A == w.A);
  CHECK(back.B == w.B);
  CHECK(back.C == w.C);
  CHECK(back.D == w.D);

  const StateSpaceModel gain = constant_model(Matrix::Identity(2, 2));
  io::write_model(model_path, gain);
  CHECK(io::read_model(model_path).states() == 0);

  write_text(model_path, R"({"n": 1, "m": 1, "A": [[0]], "B": [[1]], "C": [[1]]})");
  CHECK_THROWS_AS(io::read_model(model_path), InputError);
  write_text(model_path, R"({"n": 1, "m": 1, "A": [[0, 1]], "B": [[1]], "C": [[1]], "D": [[1]]})");
  CHECK_THROWS_AS(io::read_model(model_path), InputError);

  const FilterBank bank = build_toeplitz_bank(2, 3);
  const fs::path bank_path = scratch("bank.json");
  io::write_bank(bank_path, bank);
  const FilterBank bank_back = io::read_bank(bank_path);
  CHECK(bank_back.A() == bank.A());
  CHECK(bank_back.B() == bank.B());

  const Matrix sigma = random_hpd(4, rng);
  const fs::path sigma_path = scratch("sigma.json");
  io::write_sigma(sigma_path, sigma);
  CHECK(io::read_sigma(sigma_path) == sigma);
  io::write_sigma(sigma_path, Matrix::Ones(2, 3));
  CHECK_THROWS_AS(io::read_sigma(sigma_path), InputError);
}

TEST_CASE("spectrum CSV") {
  const FrequencyGrid grid(16);
  Rng rng = make_rng(64);
  std::vector<CMatrix> samples;
  for (int k = 0; k < grid.size(); ++k) samples.push_back(random_hermitian(2, rng));
  const GridSpectrum phi(grid, samples);
  const fs::path path = scratch("phi.csv");
  io::write_spectrum_csv(path, phi);
  CHECK(first_line(path) == "theta,re_00,im_00,re_01,im_01,re_10,im_10,re_11,im_11");
  const GridSpectrum back = io::read_spectrum_csv(path);
  CHECK(back.grid() == grid);
  CHECK(max_node_difference(back, phi) == 0.0);

  CHECK(io::spectrum_column("re", 3, 11, 12) == "re_3_11");
  CHECK(io::spectrum_column("im", 1, 0, 2) == "im_10");

  // Indefinite samples are refused when coercivity is requested.
  CHECK_THROWS_AS(io::read_spectrum_csv(path, true), InputError);

  write_text(path, "theta,re_00,im_00\n0,1,0\n1,1,0\n");
  CHECK_THROWS_AS(io::read_spectrum_csv(path), InputError);  // not the uniform grid
  write_text(path, "theta,a,b\n0,1,0\n");
  CHECK_THROWS_AS(io::read_spectrum_csv(path), InputError);
  write_text(path, "theta,re_00,im_00\n0,x,0\n");
  CHECK_THROWS_AS(io::read_spectrum_csv(path), InputError);
}

TEST_CASE("data CSV") {
  Rng rng = make_rng(65);
  const Matrix y = gaussian_matrix(3, 25, rng);
  const fs::path path = scratch("data.csv");
  io::write_data_csv(path, y);
  CHECK(first_line(path) == "y0,y1,y2");
  CHECK(io::read_data_csv(path) == y);

  write_text(path, "y0,y2\n1,2\n");
  CHECK_THROWS_AS(io::read_data_csv(path), InputError);
  write_text(path, "y0,y1\n1\n");
  CHECK_THROWS_AS(io::read_data_csv(path), InputError);
  write_text(path, "y0\r\n1.5\r\n2.5\r\n");
  CHECK(io::read_data_csv(path) == Eigen::RowVector2d(1.5, 2.5));
}
