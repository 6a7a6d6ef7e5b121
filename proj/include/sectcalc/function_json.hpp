#pragma once

#include <string>

#include <json.hpp>

#include "sectcalc/functions.hpp"
#include "sectcalc/measure.hpp"

namespace sectcalc {

using Json = nlohmann::json;

// {kind, params, children, tags}. Raw functions cannot be serialized.
Json toJson(const Function& f);
// Declared tags must be a subset of the tags the construction rules give;
// anything else is an input error pointing at the offending field.
Function functionFromJson(const Json& j, const std::string& pointer = "");

// {atoms: [{s, w}], density: {kind, params, sing0, singInf}}
Json toJson(const MeasureSpec& m);
MeasureSpec measureFromJson(const Json& j, const std::string& pointer = "");

Json toJson(const Limits& l);

}  // namespace sectcalc
