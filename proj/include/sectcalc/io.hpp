#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sectcalc/classcheck.hpp"
#include "sectcalc/function_json.hpp"
#include "sectcalc/measure.hpp"
#include "sectcalc/opcalc.hpp"
#include "sectcalc/quad.hpp"
#include "sectcalc/sectorial.hpp"

namespace sectcalc {

// [re, im]; a bare number reads as a real value.
Json toJson(Complex z);
Complex complexFromJson(const Json& j, const std::string& pointer = "");

// Rows of [re, im] pairs (bare numbers allowed).
Json toJson(const CMatrix& m);
CMatrix matrixFromJson(const Json& j, const std::string& pointer = "");

// Matrix Market "matrix array|coordinate real|complex general". Anything else,
// including symmetric storage, is an input error.
CMatrix readMatrixMarket(std::istream& in, const std::string& source = "<stream>");
// Always written as "array complex general", column-major as the format wants.
void writeMatrixMarket(std::ostream& out, const CMatrix& m);

// An inline matrix, or a path (relative to baseDir) to a .mtx or .json file.
CMatrix loadMatrix(const Json& j, const std::filesystem::path& baseDir, const std::string& pointer = "");

// Missing keys keep their defaults.
QuadratureConfig quadFromJson(const Json& j, const std::string& pointer = "");
Json toJson(const QuadratureConfig& cfg);

// {massAtZero, mu: measure}
ProbabilityMeasure probabilityFromJson(const Json& j, const std::string& pointer = "");
// {a, b, mu: measure}
LevyTriple levyFromJson(const Json& j, const std::string& pointer = "");

Json toJson(const ClassReport& r);
Json toJson(const DClassReport& r);
Json toJson(const KappaEstimate& k);
// Embeds the constants table as [{omegaPrime, M}].
Json toJson(const SectorialMatrix& s);
Json toJson(const BoundReport& r);
Json toJson(const RittReport& r);

// Plot-ready table; one row per grid point.
struct CsvTable {
  std::array<std::string, 5> header{"param1", "param2", "quantity", "bound", "margin"};
  std::vector<std::array<double, 5>> rows;
};
void writeCsv(std::ostream& out, const CsvTable& t);

// abs_z, arg_z, <quantity>, <bound>, margin
CsvTable boundCsv(const BoundReport& r, const std::string& quantity, const std::string& bound);
// dist_to_1, arg_lambda, ritt_product, fitted_C, margin
CsvTable rittCsv(const RittReport& r);
// t, theta, r, check_index, margin; check_index numbers the distinct "what"
// labels in order of appearance.
CsvTable classCsv(const ClassReport& r);

}  // namespace sectcalc
