#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "fixtures.hpp"
#include "toric/report.hpp"

using namespace toric;

TEST_CASE("numbers round trip") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 4.0}) CHECK(std::stod(format_number(x)) == x);
  CHECK(format_number(4.0) == "4");
}

TEST_CASE("diagnostics lines") {
  DiagnosticsRecord r;
  r.step = 3;
  r.t = 0.25;
  r.calabi_energy = std::numeric_limits<double>::quiet_NaN();
  r.argmax_F = fixtures::pt(0.5, 0.25);
  std::ostringstream out;
  write_jsonl(out, r);
  const std::string line = out.str();
  CHECK(line.back() == '\n');
  CHECK(line.find('\n') == line.size() - 1);
  const nlohmann::json j = nlohmann::json::parse(line);
  CHECK(j["step"] == 3);
  CHECK(j["t"] == 0.25);
  CHECK(j["calabi_energy"].is_null());
  CHECK(j["argmax_F"][1] == 0.25);
}

TEST_CASE("curvature csv") {
  const SymplecticPotential u = SymplecticPotential::guillemin(fixtures::interval(), 1.0 / 16.0, 1e-6);
  std::ostringstream out;
  write_curvature_csv(out, {curvature_at(u, fixtures::pt(0.5))});
  std::istringstream in(out.str());
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "x0,A,F_norm,det_hessian,min_hessian_eig");
  CHECK(row.rfind("0.5,", 0) == 0);
  CHECK(std::stod(row.substr(4)) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("delzant witness") {
  const nlohmann::json ok = to_json(delzant_check(fixtures::simplex()));
  CHECK(ok["pass"] == true);
  const Polytope bad = parse_polytope(
      R"({"dimension":2,"facets":[{"normal":[1,0],"offset":0},{"normal":[0,1],"offset":0},{"normal":[-1,-2],"offset":-2}]})");
  const nlohmann::json j = to_json(delzant_check(bad));
  CHECK(j["pass"] == false);
  CHECK(j.contains("witness"));
}
