#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "generators.hpp"
#include "sectcalc/io.hpp"

using namespace sectcalc;

namespace {

std::string pointerOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const InputError& e) {
    return e.pointer();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("matrix JSON round trip") {
  auto g = gen::rng(1);
  for (int n : {1, 2, 5}) {
    CMatrix m = CMatrix::Random(n, n + 1);
    CHECK(matrixFromJson(toJson(m)) == m);
  }
  const Json mixed = Json::parse("[[1, [0, 2]], [[3, -1], 4]]");
  const CMatrix m = matrixFromJson(mixed);
  CHECK(m(0, 0) == Complex(1, 0));
  CHECK(m(0, 1) == Complex(0, 2));
  CHECK(m(1, 0) == Complex(3, -1));

  CHECK(pointerOf([] { matrixFromJson(Json::parse("[[1, 2], [3]]"), "/matrix"); }) == "/matrix/1");
  CHECK(pointerOf([] { matrixFromJson(Json::parse("[[1, [2, 3, 4]]]"), "/matrix"); }) == "/matrix/0/1");
  CHECK(pointerOf([] { matrixFromJson(Json::parse("[]"), "/matrix"); }) == "/matrix");
  CHECK(complexFromJson(Json::parse("[\"inf\", 0]")).real() == kInf);
}

TEST_CASE("Matrix Market read and write") {
  auto g = gen::rng(2);
  for (int n : {1, 3, 7}) {
    const CMatrix m = gen::normalInSector(g, n, kPi / 3);
    std::stringstream ss;
    writeMatrixMarket(ss, m);
    CHECK(readMatrixMarket(ss) == m);  // 17 significant digits round-trip exactly
  }

  std::istringstream coord(
      "%%MatrixMarket matrix coordinate complex general\n% comment\n\n3 3 2\n1 1 1.5 0.5\n3 2 -2 0\n");
  const CMatrix c = readMatrixMarket(coord);
  CHECK(c(0, 0) == Complex(1.5, 0.5));
  CHECK(c(2, 1) == Complex(-2, 0));
  CHECK(c.cwiseAbs().sum() == doctest::Approx(std::abs(Complex(1.5, 0.5)) + 2));

  std::istringstream real("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n");
  const CMatrix r = readMatrixMarket(real);
  CHECK(r(1, 0) == Complex(2));  // column-major
  CHECK(r(0, 1) == Complex(3));

  std::istringstream sym("%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n");
  CHECK_THROWS_AS(readMatrixMarket(sym), InputError);
  std::istringstream shortData("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n");
  CHECK_THROWS_AS(readMatrixMarket(shortData), InputError);
  std::istringstream badIndex("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n");
  CHECK_THROWS_AS(readMatrixMarket(badIndex), InputError);
  std::istringstream noBanner("2 2\n1 2 3 4\n");
  CHECK_THROWS_AS(readMatrixMarket(noBanner), InputError);
}

TEST_CASE("matrices load from files relative to the job") {
  const auto dir = std::filesystem::temp_directory_path() / "sectcalc_io_test";
  std::filesystem::create_directories(dir);
  CMatrix m(2, 2);
  m << Complex(1, 0), Complex(0, 1), Complex(0, 0), Complex(2, 0);
  {
    std::ofstream out(dir / "a.mtx");
    writeMatrixMarket(out, m);
    std::ofstream js(dir / "a.json");
    js << Json{{"matrix", toJson(m)}}.dump();
  }
  CHECK(loadMatrix(Json("a.mtx"), dir) == m);
  CHECK(loadMatrix(Json("a.json"), dir) == m);
  CHECK(loadMatrix(toJson(m), dir) == m);
  CHECK(pointerOf([&] { loadMatrix(Json("missing.mtx"), dir, "/matrix"); }) == "/matrix");
  std::filesystem::remove_all(dir);
}

TEST_CASE("quadrature and measure settings") {
  const QuadratureConfig d = quadFromJson(Json());
  CHECK(d.relTol == QuadratureConfig{}.relTol);
  const QuadratureConfig q = quadFromJson(Json::parse(R"({"relTol": 1e-8, "maxPanels": 50, "rule": "GK21"})"));
  CHECK(q.relTol == 1e-8);
  CHECK(q.maxPanels == 50);
  CHECK(q.rule == NestedRule::GaussKronrod21);
  CHECK(quadFromJson(toJson(q)).maxPanels == 50);
  CHECK(pointerOf([] { quadFromJson(Json::parse(R"({"relTol": 1e-20})"), "/quad"); }) == "/quad/relTol");
  CHECK(pointerOf([] { quadFromJson(Json::parse(R"({"rule": "simpson"})"), "/quad"); }) == "/quad/rule");

  const ProbabilityMeasure expo = probabilityFromJson(
      Json::parse(R"({"mu": {"density": {"kind": "powerExp", "params": {"c": 1, "p": 0, "rate": 1}}}})"));
  CHECK(expo.mu.totalMass() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(probabilityFromJson(Json::parse(R"({"massAtZero": 0.5})"), "/measure"), InputError);

  const LevyTriple t = levyFromJson(Json::parse(R"({"b": 1, "mu": {"atoms": [{"s": 1, "w": 2}]}})"));
  CHECK(t.b == 1);
  CHECK(t.mu.atoms().size() == 1);
}

TEST_CASE("reports serialize with their constants") {
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 0) = 1;
  a(1, 1) = 4;
  const SectorialMatrix s = certifySectorial(a, 0.0);
  const Json j = toJson(s);
  CHECK(j.at("constants").size() == s.constants.size());
  CHECK(j.at("constants")[0].at("omegaPrime").get<double>() == s.constants.begin()->first);
  CHECK(j.at("MA").get<double>() == s.MA);
  CHECK(j.at("eigenvalues").size() == 2);

  BoundReport rep;
  rep.formula = "test";
  rep.points = {{Complex(1, 1), 0.5, 1.0}, {Complex(2, 0), 2.0, 1.0}};
  rep.theoretical = 1.0;
  rep.finish();
  const Json rj = toJson(rep);
  CHECK(rj.at("pass") == false);
  CHECK(rj.at("points")[1].at("margin").get<double>() == -1.0);

  const CsvTable t = boundCsv(rep, "norm", "bound");
  CHECK(t.header[2] == "norm");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][0] == doctest::Approx(std::sqrt(2.0)));
  CHECK(t.rows[0][1] == doctest::Approx(kPi / 4));
  CHECK(t.rows[1][4] == -1.0);
  std::ostringstream out;
  writeCsv(out, t);
  CHECK(out.str().rfind("abs_z,arg_z,norm,bound,margin\n", 0) == 0);

  ClassReport cr;
  cr.add({"lower", 1.0, 0.5, 0.0, 0.1});
  cr.add({"upper", 2.0, 0.5, 0.0, 0.2});
  cr.add({"lower", 3.0, 0.5, 0.0, 0.3});
  cr.finish(1e-8);
  const CsvTable ct = classCsv(cr);
  CHECK(ct.rows[2][3] == 0);
  CHECK(ct.rows[1][3] == 1);
  CHECK(toJson(cr).at("worst").get<double>() == doctest::Approx(0.1));
}

TEST_CASE("non-finite values survive as strings") {
  ClassReport empty;
  CHECK(toJson(empty).at("worst") == "inf");
}
