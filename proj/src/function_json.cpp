#include "sectcalc/function_json.hpp"

#include <cmath>

namespace sectcalc {

namespace {

double number(const Json& j, const char* key, const std::string& ptr, std::optional<double> fallback = {}) {
  if (!j.is_object() || !j.contains(key)) {
    if (fallback) return *fallback;
    throw InputError(std::string("missing number '") + key + "'", ptr + "/" + key);
  }
  const Json& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "Infinity")) return kInf;
  throw InputError(std::string("'") + key + "' must be a number", ptr + "/" + key);
}

Json limitJson(const LimitValue& v) {
  switch (v.kind) {
    case LimitValue::Kind::Finite:
      return v.value;
    case LimitValue::Kind::Infinite:
      return "inf";
    default:
      return "unknown";
  }
}

}  // namespace

Json toJson(const Limits& l) { return Json{{"atZero", limitJson(l.atZero)}, {"atInfinity", limitJson(l.atInfinity)}}; }

Json toJson(const MeasureSpec& m) {
  Json out = Json::object();
  Json atoms = Json::array();
  for (const Atom& a : m.atoms()) atoms.push_back({{"s", a.s}, {"w", a.w}});
  out["atoms"] = atoms;
  if (m.density()) {
    const DensityPiece& d = *m.density();
    Json params = {{"c", d.c}, {"p", d.p}, {"rate", d.rate}, {"lo", d.lo}};
    if (d.hi != kInf) params["hi"] = d.hi;
    out["density"] = {{"kind", "powerExp"}, {"params", params}, {"sing0", d.sing0}, {"singInf", d.singInf}};
  }
  return out;
}

MeasureSpec measureFromJson(const Json& j, const std::string& ptr) {
  if (!j.is_object()) throw InputError("measure must be an object", ptr);
  std::vector<Atom> atoms;
  if (j.contains("atoms")) {
    const Json& a = j.at("atoms");
    if (!a.is_array()) throw InputError("atoms must be an array", ptr + "/atoms");
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string p = ptr + "/atoms/" + std::to_string(i);
      atoms.push_back({number(a[i], "s", p), number(a[i], "w", p)});
    }
  }
  std::optional<DensityPiece> density;
  if (j.contains("density") && !j.at("density").is_null()) {
    const Json& d = j.at("density");
    const std::string p = ptr + "/density";
    if (!d.is_object()) throw InputError("density must be an object", p);
    const std::string kind = d.value("kind", "");
    if (kind != "powerExp") throw InputError("unknown density kind '" + kind + "'", p + "/kind");
    if (!d.contains("params")) throw InputError("density needs params", p + "/params");
    const Json& pj = d.at("params");
    // declared exponents default to the ones the builder derives
    DensityPiece piece = powerExpDensity(number(pj, "c", p + "/params"), number(pj, "p", p + "/params", 0.0),
                                         number(pj, "rate", p + "/params", 0.0), number(pj, "lo", p + "/params", 0.0),
                                         number(pj, "hi", p + "/params", kInf));
    piece.sing0 = number(d, "sing0", p, piece.sing0);
    piece.singInf = number(d, "singInf", p, piece.singInf);
    density = piece;
  }
  try {
    return MeasureSpec(std::move(atoms), density);
  } catch (const InputError& e) {
    throw e.under(ptr);
  }
}

Json toJson(const Function& f) {
  Json params = Json::object();
  const auto& p = f.params();
  switch (f.kind()) {
    case NodeKind::Constant:
    case NodeKind::Scale:
      params["c"] = p[0];
      break;
    case NodeKind::Power:
    case NodeKind::ArgPower:
      params["alpha"] = p[0];
      break;
    case NodeKind::CauchyAtom:
      params["s"] = p[0];
      break;
    case NodeKind::ExampleG:
      params["t"] = p[0];
      break;
    case NodeKind::MoebiusSeries:
      params["c"] = p;
      break;
    case NodeKind::PowerOf:
      params["beta"] = p[0];
      break;
    case NodeKind::FromLevy:
      params = {{"a", f.levy()->a}, {"b", f.levy()->b}, {"measure", toJson(f.levy()->mu)}};
      break;
    case NodeKind::FromStieltjes:
      params = {{"a", f.stieltjes()->a}, {"b", f.stieltjes()->b}, {"measure", toJson(f.stieltjes()->nu)}};
      break;
    case NodeKind::FromCauchyMeasure:
      params = {{"a", f.cauchy()->a}, {"b", f.cauchy()->b}, {"measure", toJson(f.cauchy()->mu)}};
      break;
    case NodeKind::Raw:
      throw InputError("raw functions cannot be serialized");
    default:
      break;
  }
  Json children = Json::array();
  for (const auto& c : f.children()) children.push_back(toJson(c));
  Json tags = Json::array();
  for (Tag t : f.tags().list()) tags.push_back(tagName(t));
  return Json{{"kind", kindName(f.kind())}, {"params", params}, {"children", children}, {"tags", tags}};
}

Function functionFromJson(const Json& j, const std::string& ptr) {
  if (!j.is_object()) throw InputError("function must be an object", ptr);
  if (!j.contains("kind") || !j.at("kind").is_string()) throw InputError("function needs a string 'kind'", ptr + "/kind");
  const std::string kindStr = j.at("kind").get<std::string>();
  auto kind = kindFromName(kindStr);
  if (!kind || *kind == NodeKind::Raw) throw InputError("unknown function kind '" + kindStr + "'", ptr + "/kind");
  const Json params = j.value("params", Json::object());
  const std::string pp = ptr + "/params";
  std::vector<Function> children;
  if (j.contains("children")) {
    const Json& c = j.at("children");
    if (!c.is_array()) throw InputError("children must be an array", ptr + "/children");
    for (std::size_t i = 0; i < c.size(); ++i)
      children.push_back(functionFromJson(c[i], ptr + "/children/" + std::to_string(i)));
  }
  auto measure = [&]() {
    if (!params.contains("measure")) return MeasureSpec();
    return measureFromJson(params.at("measure"), pp + "/measure");
  };
  auto build = [&]() -> Function {
    switch (*kind) {
      case NodeKind::Identity:
        return Function::identity();
      case NodeKind::Constant:
        return Function::constant(number(params, "c", pp));
      case NodeKind::Power:
        return Function::power(number(params, "alpha", pp));
      case NodeKind::Log1p:
        return Function::log1p();
      case NodeKind::OneMinusExp:
        return Function::oneMinusExp();
      case NodeKind::CauchyAtom:
        return Function::cauchyAtom(number(params, "s", pp));
      case NodeKind::ExampleG:
        return Function::exampleG(number(params, "t", pp));
      case NodeKind::MoebiusSeries: {
        if (!params.contains("c") || !params.at("c").is_array())
          throw InputError("MoebiusSeries needs coefficient array 'c'", pp + "/c");
        std::vector<double> c;
        for (const auto& v : params.at("c")) {
          if (!v.is_number()) throw InputError("coefficients must be numbers", pp + "/c");
          c.push_back(v.get<double>());
        }
        return Function::moebiusSeries(c);
      }
      case NodeKind::FromLevy:
        return Function::fromLevy({number(params, "a", pp, 0.0), number(params, "b", pp, 0.0), measure()});
      case NodeKind::FromStieltjes:
        return Function::fromStieltjes({number(params, "a", pp, 0.0), number(params, "b", pp, 0.0), measure()});
      case NodeKind::FromCauchyMeasure:
        return Function::fromCauchyMeasure({number(params, "a", pp, 0.0), number(params, "b", pp, 0.0), measure()});
      case NodeKind::Scale:
        return buildCombinator(*kind, children, {number(params, "c", pp)});
      case NodeKind::PowerOf:
        return buildCombinator(*kind, children, {number(params, "beta", pp)});
      case NodeKind::ArgPower:
        return buildCombinator(*kind, children, {number(params, "alpha", pp)});
      default:
        return buildCombinator(*kind, children);
    }
  };
  Function f = [&]() {
    try {
      return build();
    } catch (const InputError& e) {
      // Pointers from constructors are relative to the node.
      if (!ptr.empty() && e.pointer().rfind(ptr, 0) == 0) throw;
      throw e.under(ptr);
    }
  }();
  if (j.contains("tags")) {
    const Json& tags = j.at("tags");
    if (!tags.is_array()) throw InputError("tags must be an array", ptr + "/tags");
    for (std::size_t i = 0; i < tags.size(); ++i) {
      const std::string tp = ptr + "/tags/" + std::to_string(i);
      if (!tags[i].is_string()) throw InputError("tag must be a string", tp);
      auto t = tagFromName(tags[i].get<std::string>());
      if (!t) throw InputError("unknown tag '" + tags[i].get<std::string>() + "'", tp);
      if (!f.has(*t))
        throw InputError("declared tag '" + tags[i].get<std::string>() + "' is not licensed by the construction rules",
                         tp);
    }
  }
  return f;
}

}  // namespace sectcalc
