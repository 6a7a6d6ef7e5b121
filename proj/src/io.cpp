#include "sectcalc/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace sectcalc {

namespace {

double readNumber(const Json& j, const std::string& ptr) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "Infinity") return kInf;
    if (s == "-inf" || s == "-Infinity") return -kInf;
  }
  throw InputError("expected a number", ptr);
}

double optionalNumber(const Json& j, const char* key, double fallback, const std::string& ptr) {
  if (!j.contains(key)) return fallback;
  return readNumber(j.at(key), ptr + "/" + key);
}

// JSON has no infinity; write it as a string the readers accept.
Json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return char(std::tolower(c)); });
  return s;
}

}  // namespace

Json toJson(Complex z) { return Json::array({num(z.real()), num(z.imag())}); }

Complex complexFromJson(const Json& j, const std::string& ptr) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) throw InputError("expected [re, im]", ptr);
  return {readNumber(j[0], ptr + "/0"), readNumber(j[1], ptr + "/1")};
}

Json toJson(const CMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(toJson(m(i, k)));
    rows.push_back(row);
  }
  return rows;
}

CMatrix matrixFromJson(const Json& j, const std::string& ptr) {
  if (!j.is_array() || j.empty()) throw InputError("matrix must be a non-empty array of rows", ptr);
  const std::size_t n = j.size();
  std::size_t cols = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string rp = ptr + "/" + std::to_string(i);
    if (!j[i].is_array() || j[i].empty()) throw InputError("row must be a non-empty array", rp);
    if (i == 0) cols = j[i].size();
    if (j[i].size() != cols) throw InputError("rows differ in length", rp);
  }
  CMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < cols; ++k)
      m(Eigen::Index(i), Eigen::Index(k)) =
          complexFromJson(j[i][k], ptr + "/" + std::to_string(i) + "/" + std::to_string(k));
  return m;
}

CMatrix readMatrixMarket(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty Matrix Market input", source);
  std::istringstream head(line);
  std::string banner, object, format, field, symmetry;
  head >> banner >> object >> format >> field >> symmetry;
  banner = lower(banner), object = lower(object), format = lower(format), field = lower(field),
  symmetry = lower(symmetry);
  if (banner != "%%matrixmarket" || object != "matrix")
    throw InputError("missing '%%MatrixMarket matrix' banner", source);
  if (format != "array" && format != "coordinate") throw InputError("format must be array or coordinate", source);
  if (field != "real" && field != "complex") throw InputError("field must be real or complex", source);
  if (symmetry != "general") throw InputError("only general storage is supported", source);
  const bool complexField = field == "complex";

  // Skip comments and blank lines up to the size line.
  do {
    if (!std::getline(in, line)) throw InputError("missing size line", source);
  } while (line.empty() || line[0] == '%' || line.find_first_not_of(" \t\r") == std::string::npos);

  std::istringstream size(line);
  long rows = 0, cols = 0, entries = 0;
  size >> rows >> cols;
  if (format == "coordinate") size >> entries;
  if (!size || rows <= 0 || cols <= 0 || entries < 0) throw InputError("bad size line '" + line + "'", source);

  auto nextValue = [&](std::istringstream& ls, long lineNo) {
    double re = 0, im = 0;
    ls >> re;
    if (complexField) ls >> im;
    if (!ls) throw InputError("bad entry on data line " + std::to_string(lineNo), source);
    return Complex(re, im);
  };

  CMatrix m = CMatrix::Zero(rows, cols);
  const long expected = format == "array" ? rows * cols : entries;
  long read = 0;
  while (read < expected && std::getline(in, line)) {
    if (line.empty() || line[0] == '%' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    if (format == "array") {
      m(read % rows, read / rows) = nextValue(ls, read + 1);
    } else {
      long i = 0, k = 0;
      ls >> i >> k;
      if (!ls || i < 1 || i > rows || k < 1 || k > cols)
        throw InputError("bad index on data line " + std::to_string(read + 1), source);
      m(i - 1, k - 1) += nextValue(ls, read + 1);
    }
    ++read;
  }
  if (read < expected)
    throw InputError("expected " + std::to_string(expected) + " entries, found " + std::to_string(read), source);
  return m;
}

void writeMatrixMarket(std::ostream& out, const CMatrix& m) {
  out << "%%MatrixMarket matrix array complex general\n" << m.rows() << ' ' << m.cols() << '\n';
  out << std::setprecision(17);
  for (Eigen::Index k = 0; k < m.cols(); ++k)
    for (Eigen::Index i = 0; i < m.rows(); ++i) out << m(i, k).real() << ' ' << m(i, k).imag() << '\n';
}

CMatrix loadMatrix(const Json& j, const std::filesystem::path& baseDir, const std::string& ptr) {
  if (!j.is_string()) return matrixFromJson(j, ptr);
  std::filesystem::path p = j.get<std::string>();
  if (p.is_relative()) p = baseDir / p;
  std::ifstream in(p);
  if (!in) throw InputError("cannot open matrix file '" + p.string() + "'", ptr);
  if (lower(p.extension().string()) == ".json") {
    Json doc;
    try {
      doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw InputError(std::string("matrix file is not JSON: ") + e.what(), ptr);
    }
    return matrixFromJson(doc.is_object() && doc.contains("matrix") ? doc.at("matrix") : doc, ptr);
  }
  try {
    return readMatrixMarket(in, p.string());
  } catch (const InputError& e) {
    throw InputError(e.message() + " in " + p.string(), ptr);
  }
}

QuadratureConfig quadFromJson(const Json& j, const std::string& ptr) {
  QuadratureConfig cfg;
  if (j.is_null()) return cfg;
  if (!j.is_object()) throw InputError("quad must be an object", ptr);
  cfg.relTol = optionalNumber(j, "relTol", cfg.relTol, ptr);
  cfg.absTol = optionalNumber(j, "absTol", cfg.absTol, ptr);
  cfg.initialHalfWidth = optionalNumber(j, "initialHalfWidth", cfg.initialHalfWidth, ptr);
  cfg.maxHalfWidth = optionalNumber(j, "maxHalfWidth", cfg.maxHalfWidth, ptr);
  if (j.contains("maxPanels")) {
    if (!j.at("maxPanels").is_number_integer()) throw InputError("maxPanels must be an integer", ptr + "/maxPanels");
    cfg.maxPanels = j.at("maxPanels").get<int>();
  }
  if (j.contains("rule")) {
    const Json& r = j.at("rule");
    if (r == "GK15")
      cfg.rule = NestedRule::GaussKronrod15;
    else if (r == "GK21")
      cfg.rule = NestedRule::GaussKronrod21;
    else
      throw InputError("rule must be GK15 or GK21", ptr + "/rule");
  }
  if (!(cfg.relTol >= 1e-14)) throw InputError("relTol must be >= 1e-14", ptr + "/relTol");
  if (!(cfg.absTol > 0)) throw InputError("absTol must be positive", ptr + "/absTol");
  if (cfg.maxPanels < 1) throw InputError("maxPanels must be positive", ptr + "/maxPanels");
  if (!(cfg.initialHalfWidth > 0) || !(cfg.maxHalfWidth >= cfg.initialHalfWidth))
    throw InputError("need 0 < initialHalfWidth <= maxHalfWidth", ptr + "/initialHalfWidth");
  return cfg;
}

Json toJson(const QuadratureConfig& cfg) {
  return {{"relTol", cfg.relTol},
          {"absTol", cfg.absTol},
          {"maxPanels", cfg.maxPanels},
          {"initialHalfWidth", cfg.initialHalfWidth},
          {"maxHalfWidth", cfg.maxHalfWidth},
          {"rule", cfg.rule == NestedRule::GaussKronrod15 ? "GK15" : "GK21"}};
}

ProbabilityMeasure probabilityFromJson(const Json& j, const std::string& ptr) {
  if (!j.is_object()) throw InputError("probability measure must be an object", ptr);
  ProbabilityMeasure m;
  m.massAtZero = optionalNumber(j, "massAtZero", 0.0, ptr);
  if (j.contains("mu")) m.mu = measureFromJson(j.at("mu"), ptr + "/mu");
  try {
    validate(m);
  } catch (const InputError& e) {
    throw e.under(ptr);
  }
  return m;
}

LevyTriple levyFromJson(const Json& j, const std::string& ptr) {
  if (!j.is_object()) throw InputError("Levy triple must be an object", ptr);
  LevyTriple t;
  t.a = optionalNumber(j, "a", 0.0, ptr);
  t.b = optionalNumber(j, "b", 0.0, ptr);
  if (j.contains("mu")) t.mu = measureFromJson(j.at("mu"), ptr + "/mu");
  try {
    validate(t);
  } catch (const InputError& e) {
    throw e.under(ptr);
  }
  return t;
}

Json toJson(const ClassReport& r) {
  Json margins = Json::array();
  for (const MarginPoint& p : r.margins)
    margins.push_back({{"what", p.what}, {"t", p.t}, {"theta", p.theta}, {"r", p.r}, {"margin", num(p.margin)}});
  Json constants = Json::object();
  for (const auto& [k, v] : r.constants) constants[k] = num(v);
  Json out = {{"check", r.check},     {"pass", r.pass},       {"tolerance", r.tolerance},
              {"worst", num(r.worst)}, {"constants", constants}, {"notes", r.notes},
              {"margins", margins}};
  if (const MarginPoint* w = r.worstPoint())
    out["worstPoint"] = {{"what", w->what}, {"t", w->t}, {"theta", w->theta}, {"r", w->r}};
  return out;
}

Json toJson(const DClassReport& r) {
  Json results = Json::array();
  for (const DConditionResult& c : r.results)
    results.push_back({{"condition", dConditionName(c.condition)},
                       {"theta", c.theta},
                       {"pass", c.pass},
                       {"a", num(c.a)},
                       {"b", c.b},
                       {"c", num(c.c)},
                       {"note", c.note}});
  return {{"conditions", results}, {"report", toJson(r.report)}};
}

Json toJson(const KappaEstimate& k) {
  Json table = Json::array();
  for (std::size_t i = 0; i < k.r.size(); ++i) table.push_back({{"r", k.r[i]}, {"rJ", num(k.rJ[i])}});
  return {{"kappa", num(k.kappa)}, {"stable", k.stable}, {"converged", k.converged}, {"table", table}};
}

Json toJson(const SectorialMatrix& s) {
  Json table = Json::array();
  for (const auto& [w, M] : s.constants) table.push_back({{"omegaPrime", w}, {"M", num(M)}});
  Json eig = Json::array();
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) eig.push_back(toJson(s.eigenvalues(i)));
  return {{"n", s.size()},
          {"omega", s.omega},
          {"MA", num(s.MA)},
          {"injective", s.injective},
          {"denseRange", s.denseRange},
          {"eigenvalues", eig},
          {"sampledModuli", {s.rMin, s.rMax}},
          {"constants", table},
          {"notes",
           {"constants are sampled suprema along the boundary rays times a safety factor; "
            "they bound the true constants from below before that factor"}}};
}

Json toJson(const BoundReport& r) {
  Json inputs = Json::object();
  for (const auto& [k, v] : r.inputs) inputs[k] = num(v);
  Json points = Json::array();
  for (const BoundPoint& p : r.points)
    points.push_back({{"z", toJson(p.z)},
                      {"quantity", num(p.quantity)},
                      {"bound", num(p.bound)},
                      {"margin", num(p.margin())}});
  return {{"formula", r.formula},   {"inputs", inputs},  {"theoretical", num(r.theoretical)},
          {"measured", num(r.measured)}, {"margin", num(r.margin)}, {"pass", r.pass()},
          {"notes", r.notes},       {"points", points}};
}

Json toJson(const RittReport& r) {
  Json points = Json::array();
  for (const RittPoint& p : r.points)
    points.push_back({{"lambda", toJson(p.lambda)},
                      {"rho", p.rho},
                      {"value", num(p.value)},
                      {"margin", num(p.margin)}});
  return {{"angle", r.angle},   {"thetaPrime", r.thetaPrime}, {"C", num(r.C)},       {"stable", r.stable},
          {"spectrumOk", r.spectrumOk}, {"pass", r.pass},     {"notes", r.notes}, {"T", toJson(r.T)},
          {"points", points}};
}

void writeCsv(std::ostream& out, const CsvTable& t) {
  for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? "," : "") << t.header[i];
  out << '\n' << std::setprecision(17);
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

CsvTable boundCsv(const BoundReport& r, const std::string& quantity, const std::string& bound) {
  CsvTable t;
  t.header = {"abs_z", "arg_z", quantity, bound, "margin"};
  for (const BoundPoint& p : r.points) t.rows.push_back({std::abs(p.z), std::arg(p.z), p.quantity, p.bound, p.margin()});
  return t;
}

CsvTable rittCsv(const RittReport& r) {
  CsvTable t;
  t.header = {"dist_to_1", "arg_lambda", "ritt_product", "fitted_C", "margin"};
  for (const RittPoint& p : r.points) t.rows.push_back({p.rho, std::arg(p.lambda), p.value, r.C, p.margin});
  return t;
}

CsvTable classCsv(const ClassReport& r) {
  CsvTable t;
  t.header = {"t", "theta", "r", "check_index", "margin"};
  std::map<std::string, int> ids;
  for (const MarginPoint& p : r.margins) {
    const int id = ids.emplace(p.what, int(ids.size())).first->second;
    t.rows.push_back({p.t, p.theta, p.r, double(id), p.margin});
  }
  return t;
}

}  // namespace sectcalc
