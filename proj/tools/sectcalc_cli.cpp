// Batch front end: reads a JSON job, writes <out-dir>/<name>.json plus CSV
// tables. Exit 0 when every check passes, 1 on a negative margin or an oracle
// mismatch, 2 on bad input.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "sectcalc/acceptance.hpp"
#include "sectcalc/classcheck.hpp"
#include "sectcalc/function_json.hpp"
#include "sectcalc/io.hpp"
#include "sectcalc/opcalc.hpp"
#include "sectcalc/parallel.hpp"
#include "sectcalc/scalarcalc.hpp"
#include "sectcalc/sectorial.hpp"

using namespace sectcalc;
namespace fs = std::filesystem;

namespace {

constexpr const char* kOutDirEnv = "SECTCALC_OUT_DIR";

struct Job {
  Json spec;
  fs::path baseDir;
  QuadratureConfig quad;
  std::optional<double> tol;  // --tol, else the job's "tol"
  std::uint64_t seed = AcceptanceOptions{}.seed;

  Json result = Json::object();
  std::vector<std::pair<std::string, CsvTable>> tables;
  std::vector<std::pair<std::string, CMatrix>> matrices;
  std::vector<std::string> failures;

  // params/<key> first, then the top level.
  const Json* find(const std::string& key, std::string* ptr = nullptr) const {
    if (spec.contains("params") && spec.at("params").is_object() && spec.at("params").contains(key)) {
      if (ptr) *ptr = "/params/" + key;
      return &spec.at("params").at(key);
    }
    if (spec.contains(key)) {
      if (ptr) *ptr = "/" + key;
      return &spec.at(key);
    }
    return nullptr;
  }
  const Json& need(const std::string& key, std::string* ptr) const {
    if (const Json* j = find(key, ptr)) return *j;
    throw InputError("missing field '" + key + "'", "/" + key);
  }
  double number(const std::string& key, std::optional<double> fallback = {}) const {
    std::string ptr;
    const Json* j = find(key, &ptr);
    if (!j) {
      if (fallback) return *fallback;
      throw InputError("missing number '" + key + "'", "/" + key);
    }
    if (!j->is_number()) throw InputError("'" + key + "' must be a number", ptr);
    return j->get<double>();
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const {
    std::string ptr;
    const Json* j = find(key, &ptr);
    if (!j) return fallback;
    if (j->is_number()) return {j->get<double>()};
    if (!j->is_array()) throw InputError("'" + key + "' must be a number or an array of numbers", ptr);
    std::vector<double> out;
    for (std::size_t i = 0; i < j->size(); ++i) {
      if (!(*j)[i].is_number()) throw InputError("expected a number", ptr + "/" + std::to_string(i));
      out.push_back((*j)[i].get<double>());
    }
    return out;
  }
  Complex complexField(const std::string& key) const {
    std::string ptr;
    return complexFromJson(need(key, &ptr), ptr);
  }
  std::string string(const std::string& key, const std::string& fallback) const {
    std::string ptr;
    const Json* j = find(key, &ptr);
    if (!j) return fallback;
    if (!j->is_string()) throw InputError("'" + key + "' must be a string", ptr);
    return j->get<std::string>();
  }
  Function function() const {
    std::string ptr;
    return functionFromJson(need("function", &ptr), ptr);
  }
  double tolerance(double fallback) const {
    if (tol) return *tol;
    return number("tol", fallback);
  }
  CMatrix matrix(const std::string& key = "matrix") const {
    std::string ptr;
    return loadMatrix(need(key, &ptr), baseDir, ptr);
  }
  // omega from the job, else the widest eigenvalue argument.
  SectorialMatrix sectorial() const {
    const CMatrix A = matrix();
    double omega;
    if (find("omega")) {
      omega = number("omega");
    } else {
      Eigen::ComplexEigenSolver<CMatrix> es(A, false);
      omega = 0;
      for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()(i)) > 0) omega = std::max(omega, std::abs(std::arg(es.eigenvalues()(i))));
    }
    try {
      return certifySectorial(A, omega);
    } catch (const InputError& e) {
      throw InputError(e.message(), e.pointer() == "/omega" ? "/omega" : "/matrix");
    }
  }
  void fail(const std::string& why) { failures.push_back(why); }
};

// Checks whose verdict is expected from the tags count as mismatches when they
// fail; the rest are informational.
void runClassify(Job& job) {
  const Function f = job.function();
  GridSpec grid;
  grid.thetas = job.numbers("thetas", grid.thetas);
  grid.validate();
  Json tags = Json::array();
  for (Tag t : f.tags().list()) tags.push_back(tagName(t));
  job.result["function"] = toJson(f);
  job.result["describe"] = f.describe();
  job.result["tags"] = tags;
  job.result["limits"] = toJson(limitingValues(f));

  Json checks = Json::object();
  auto add = [&](const std::string& name, const ClassReport& r, bool expected) {
    Json j = toJson(r);
    j["expected"] = expected;
    checks[name] = j;
    job.tables.emplace_back(name, classCsv(r));
    if (expected && !r.pass) job.fail(name + " fails although the tags imply it");
  };
  add("np_range", checkNPRange(f, grid), f.has(Tag::NP));
  add("brown_bounds", checkBrownBounds(f, grid), f.has(Tag::NP));
  add("complete_monotone", checkCompleteMonotone(f, grid.tGrid()), f.has(Tag::CM));
  add("bernstein_derivatives", checkBernsteinDerivatives(f, grid.tGrid()), f.has(Tag::BF));
  if (f.has(Tag::BF)) {
    add("bernstein_imag", checkBernsteinImag(f, grid), true);
    add("bernstein_envelope", checkBernsteinEnvelope(f, grid), true);
  }
  if (f.has(Tag::CBF)) add("cbf_imag", checkCBFImag(f, GridSpec::forCBF()), true);
  const DClassReport dc = checkDClass(f, grid.thetas);
  checks["d_class"] = toJson(dc);
  job.result["checks"] = checks;

  Json kappa = Json::array();
  for (double th : grid.thetas) {
    const KappaEstimate k = estimateKappa(f, th, grid, job.quad);
    Json row = toJson(k);
    row["theta"] = th;
    kappa.push_back(row);
  }
  job.result["kappa"] = kappa;
}

void runScalarResolvent(Job& job) {
  const Function f = job.function();
  const Complex lambda = job.complexField("lambda"), z = job.complexField("z");
  RepresentationChoice c;
  c.q = job.number("q", defaultQ(std::abs(std::arg(z))));
  c.form = chooseForm(f);
  const std::string form = job.string("form", "");
  if (form == "atZero")
    c.form = RepForm::AtZero;
  else if (form == "atInfinity")
    c.form = RepForm::AtInfinity;
  else if (!form.empty())
    throw InputError("form must be atZero or atInfinity", "/form");
  c.cbfMode = c.q <= 2 && f.has(Tag::CBF);
  const auto r = scalarResolvent(f, c, lambda, z, job.quad);
  const Complex direct = 1.0 / (z + f(lambda));
  const double rel = std::abs(r.value - direct) / std::abs(direct);
  const double tol = job.tolerance(1e-7);
  job.result = {{"value", toJson(r.value)},
                {"err", r.errEstimate},
                {"nodes", r.evaluations},
                {"converged", r.converged},
                {"q", c.q},
                {"form", repFormName(c.form)},
                {"cbfMode", c.cbfMode},
                {"head", toJson(r.head)},
                {"direct", toJson(direct)},
                {"relErr", rel},
                {"tol", tol},
                {"denominatorViolations", r.denominatorViolations}};
  if (!(rel <= tol)) job.fail("representation differs from 1/(z + f(lambda)) by " + std::to_string(rel));
  if (!r.converged) job.fail("quadrature did not converge");
}

OpMode modeField(const Job& job) {
  const std::string m = job.string("mode", "general");
  if (m == "general") return OpMode::General;
  if (m == "cbf") return OpMode::Cbf;
  throw InputError("mode must be general or cbf", "/mode");
}

void runOpResolvent(Job& job) {
  const Function f = job.function();
  const SectorialMatrix S = job.sectorial();
  const Complex z = job.complexField("z");
  const OpMode mode = modeField(job);
  OperatorRepChoice c = chooseOperatorRep(f, S, std::abs(std::arg(z)), mode);
  if (job.find("q")) {
    c.q = job.number("q");
    c.qStrategy = QStrategy::Explicit;
  }
  const auto r = operatorResolvent(f, S, z, c, job.quad);
  const CMatrix oracle = resolventOracle(f, S.A, z);
  const double rel = (r.value - oracle).norm() / oracle.norm();
  const double tol = job.tolerance(1e-6);
  job.result = {{"certification", toJson(S)},
                {"q", c.q},
                {"form", repFormName(c.form)},
                {"mode", opModeName(c.mode)},
                {"value", toJson(r.value)},
                {"head", toJson(r.head)},
                {"err", r.errEstimate},
                {"nodes", r.evaluations},
                {"converged", r.converged},
                {"oracleRelErr", rel},
                {"tol", tol}};
  job.matrices.emplace_back("value", r.value);
  if (!(rel <= tol)) job.fail("operator resolvent differs from the eigen oracle by " + std::to_string(rel));
  if (!r.converged) job.fail("quadrature did not converge");
}

void runConstants(Job& job) {
  const SectorialMatrix S = job.sectorial();
  job.result["certification"] = toJson(S);
  Json reports = Json::array();
  auto add = [&](const std::string& name, const BoundReport& r, const std::string& quantity, const std::string& bound) {
    Json j = toJson(r);
    j["name"] = name;
    reports.push_back(j);
    job.tables.emplace_back(name, boundCsv(r, quantity, bound));
    if (!r.pass()) job.fail(name + " has a negative margin");
  };
  const int count = int(job.number("count", 40));
  if (job.find("function")) {
    const Function f = job.function();
    const OpMode mode = modeField(job);
    for (double theta : job.numbers("theta", {kPi / 2})) {
      const double q = job.find("q") ? job.number("q") : pickQ(mode, S.omega, theta);
      const KappaChoice k = job.find("kappa") ? KappaChoice{job.number("kappa"), "job", true}
                                              : kappaForBound(f, q, job.quad);
      const BoundReport r = sectorialityBound(f, S, theta, q, k.kappa, mode, count, job.quad);
      const std::string name = "sectoriality_theta" + std::to_string(theta).substr(0, 6);
      add(name, r, "norm_z_resolvent_fA", "sectoriality_bound");
      reports.back()["kappaSource"] = k.source;
      reports.back()["kappaReliable"] = k.reliable;
    }
  }
  for (double q : job.numbers("fractionalQ", {})) {
    const std::string tag = std::to_string(q).substr(0, 5);
    if (q > 0 && q < 1) {
      const double psi = job.number("psi", 0.5 * (1 - q) * kPi);
      add("fractional_resolvent_q" + tag, fracPowerResolventReport(S, q, psi, count), "norm_z_resolvent_Aq",
          "fractional_resolvent_bound");
    } else {
      const double psi = job.number("psi", 0.5 * (kPi - q * S.omega));
      add("fractional_sectoriality_q" + tag, fracPowerSectorialBound(S, q, psi, count), "norm_z_resolvent_Aq",
          "fractional_sectoriality_bound");
    }
  }
  job.result["reports"] = reports;
}

void runSubordinate(Job& job) {
  const SectorialMatrix S = job.sectorial();
  CMatrix value;
  if (job.find("levy")) {
    std::string ptr;
    value = bernsteinApply(levyFromJson(job.need("levy", &ptr), ptr), S, job.quad);
  } else {
    const Function f = job.function();
    value = bernsteinApply(f, S, job.quad);
    const CMatrix direct = matrixFunction(S, f, MatrixFunctionMethod::EigenOracle, job.quad).value;
    const double rel = (value - direct).norm() / direct.norm();
    const double tol = job.tolerance(1e-6);
    job.result["matrixFunctionRelErr"] = rel;
    job.result["tol"] = tol;
    if (!(rel <= tol)) job.fail("subordination differs from the matrix function by " + std::to_string(rel));
  }
  job.result["certification"] = toJson(S);
  job.result["value"] = toJson(value);
  job.matrices.emplace_back("value", value);
}

// |eigenvalue| <= 1 within rounding.
double spectralRadius(const CMatrix& T) {
  Eigen::ComplexEigenSolver<CMatrix> es(T, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

ProbabilityMeasure measureField(const Job& job) {
  std::string ptr;
  return probabilityFromJson(job.need("measure", &ptr), ptr);
}

void runBarycentre(Job& job) {
  const SectorialMatrix S = job.sectorial();
  const CMatrix T = barycentre(S, measureField(job), job.quad);
  const double rho = spectralRadius(T);
  job.result = {{"certification", toJson(S)}, {"value", toJson(T)}, {"spectralRadius", rho}};
  job.matrices.emplace_back("value", T);
  if (!(rho <= 1 + 1e-12)) job.fail("spectrum leaves the closed unit disk");
}

void runRitt(Job& job) {
  CMatrix T;
  double angle;
  if (job.find("T")) {
    T = job.matrix("T");
    angle = job.number("angle");
  } else {
    const SectorialMatrix S = job.sectorial();
    T = barycentre(S, measureField(job), job.quad);
    angle = S.omega;
    job.result["certification"] = toJson(S);
  }
  RittGrid grid;
  grid.rhoMin = job.number("rhoMin", grid.rhoMin);
  grid.rhoMax = job.number("rhoMax", grid.rhoMax);
  grid.perDecade = int(job.number("perDecade", grid.perDecade));
  grid.angles = int(job.number("angles", grid.angles));
  grid.pad = job.number("pad", grid.pad);
  if (!(grid.rhoMin > 0 && grid.rhoMin < grid.rhoMax && grid.rhoMax <= 1))
    throw InputError("need 0 < rhoMin < rhoMax <= 1", "/params/rhoMin");
  if (grid.perDecade < 1 || grid.angles < 1) throw InputError("grid counts must be positive", "/params/perDecade");
  const RittReport r = checkRitt(T, angle, grid);
  job.result["ritt"] = toJson(r);
  job.tables.emplace_back("ritt", rittCsv(r));
  if (!r.pass) job.fail("Ritt check failed");
}

void runSemigroup(Job& job) {
  const SectorialMatrix S = job.sectorial();
  CMatrix generator = S.A;
  if (job.find("function")) {
    const auto r = matrixFunction(S, job.function(), MatrixFunctionMethod::EigenOracle, job.quad);
    generator = r.value;
    job.result["generatorWarnings"] = r.warnings;
  }
  Json values = Json::array();
  for (double s : job.numbers("s", {1.0})) {
    const CMatrix e = semigroup(generator, s);
    values.push_back({{"s", s}, {"value", toJson(e)}});
    job.matrices.emplace_back("s" + std::to_string(s).substr(0, 6), e);
  }
  job.result["certification"] = toJson(S);
  job.result["values"] = values;
}

void runVerify(Job& job) {
  AcceptanceOptions opts;
  opts.seed = job.seed;
  for (double id : job.numbers("only", {})) opts.only.push_back(int(id));
  for (int id : opts.only)
    if (id < 1 || id > kCriterionCount) throw InputError("criterion id out of range", "/params/only");
  Json list = Json::array();
  for (const CriterionResult& r : runAcceptance(opts, &std::cout)) {
    list.push_back({{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"detail", r.detail}});
    if (!r.pass) job.fail("criterion " + std::to_string(r.id) + " failed");
  }
  job.result = {{"seed", opts.seed}, {"criteria", list}};
}

using Runner = void (*)(Job&);
const std::vector<std::pair<std::string, Runner>> kCommands{
    {"classify", runClassify},     {"scalar-resolvent", runScalarResolvent},
    {"op-resolvent", runOpResolvent}, {"constants", runConstants},
    {"subordinate", runSubordinate}, {"barycentre", runBarycentre},
    {"ritt", runRitt},             {"semigroup", runSemigroup},
    {"verify", runVerify}};

Runner lookup(const std::string& name) {
  for (const auto& [n, r] : kCommands)
    if (n == name) return r;
  return nullptr;
}

fs::path outputDir(const std::string& flag, const Job& job) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  if (job.spec.contains("output") && job.spec.at("output").contains("dir")) {
    const Json& d = job.spec.at("output").at("dir");
    if (!d.is_string()) throw InputError("output.dir must be a string", "/output/dir");
    fs::path p = d.get<std::string>();
    return p.is_relative() ? job.baseDir / p : p;
  }
  return fs::current_path();
}

void writeArtifacts(const Job& job, const std::string& command, const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  Json doc = {{"command", command}, {"pass", job.failures.empty()}, {"failures", job.failures},
              {"quad", toJson(job.quad)}, {"result", job.result}};
  std::ofstream(dir / (name + ".json")) << doc.dump(2) << '\n';
  for (const auto& [suffix, table] : job.tables) {
    std::ofstream out(dir / (name + "_" + suffix + ".csv"));
    writeCsv(out, table);
  }
  for (const auto& [suffix, m] : job.matrices) {
    std::ofstream out(dir / (name + "_" + suffix + ".mtx"));
    writeMatrixMarket(out, m);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sectcalc: resolvents, bounds and class checks for sectorial matrices"};
  std::string jobFile, command, outDir;
  std::optional<double> tol, quadRelTol;
  std::uint64_t seed = AcceptanceOptions{}.seed;
  int threads = 0;
  app.add_option("command", command, "command to run when no job file is given (e.g. verify)");
  app.add_option("--job", jobFile, "JSON job file");
  app.add_option("--tol", tol, "tolerance for oracle comparisons");
  app.add_option("--quad-rel-tol", quadRelTol, "relative tolerance of the quadrature");
  app.add_option("--out-dir", outDir, std::string("output directory (overrides $") + kOutDirEnv + ")");
  app.add_option("--seed", seed, "seed for randomized test points");
  app.add_option("--threads", threads, "worker threads (0 = hardware)")->check(CLI::NonNegativeNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (threads > 0) setThreadCount(threads);

  Job job;
  job.tol = tol;
  job.seed = seed;
  try {
    if (!jobFile.empty()) {
      std::ifstream in(jobFile);
      if (!in) throw InputError("cannot open job file '" + jobFile + "'");
      try {
        job.spec = Json::parse(in);
      } catch (const Json::parse_error& e) {
        throw InputError(std::string("job file is not valid JSON: ") + e.what());
      }
      if (!job.spec.is_object()) throw InputError("job must be a JSON object", "");
      job.baseDir = fs::absolute(jobFile).parent_path();
      if (job.spec.contains("command")) {
        if (!job.spec.at("command").is_string()) throw InputError("command must be a string", "/command");
        if (!command.empty() && command != job.spec.at("command").get<std::string>())
          throw InputError("command on the command line differs from the job's", "/command");
        command = job.spec.at("command").get<std::string>();
      }
    } else {
      job.spec = Json::object();
      job.baseDir = fs::current_path();
    }
    if (command.empty()) throw InputError("no command given (use --job or a positional command)", "/command");
    const Runner run = lookup(command);
    if (!run) throw InputError("unknown command '" + command + "'", "/command");
    job.quad = quadFromJson(job.spec.value("quad", Json()), "/quad");
    if (quadRelTol) {
      if (!(*quadRelTol >= 1e-14)) throw InputError("--quad-rel-tol must be >= 1e-14", "--quad-rel-tol");
      job.quad.relTol = *quadRelTol;
    }
    if (tol && !(*tol > 0)) throw InputError("--tol must be positive", "--tol");

    std::string name = command;
    if (job.spec.contains("output") && job.spec.at("output").is_object() && job.spec.at("output").contains("name")) {
      if (!job.spec.at("output").at("name").is_string()) throw InputError("output.name must be a string", "/output/name");
      name = job.spec.at("output").at("name").get<std::string>();
    }
    const fs::path dir = outputDir(outDir, job);
    run(job);
    writeArtifacts(job, command, dir, name);
    std::cout << (job.failures.empty() ? "PASS " : "FAIL ") << command << " -> " << (dir / (name + ".json")).string()
              << std::endl;
    for (const auto& f : job.failures) std::cout << "  " << f << std::endl;
    return job.failures.empty() ? 0 : 1;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.message();
    if (!e.pointer().empty()) std::cerr << " (field " << e.pointer() << ")";
    std::cerr << std::endl;
    return 2;
  } catch (const HypothesisError& e) {
    std::cerr << "input error: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
}
