#include "fsm/report.hpp"

namespace fsm::report {

json mc_to_json(const McEstimate& e, std::uint64_t seed) {
  return json{{"mean_re", e.mean.real()},
              {"mean_im", e.mean.imag()},
              {"stderr", e.stderr_},
              {"n", e.n},
              {"seed", seed}};
}

json make_report(const std::string& subcommand, std::uint64_t seed, const json& params,
                 const json& results, double wall_time_s, int workers) {
  json meta{{"tool", "fsmlab"},
            {"version", FSM_VERSION},
            {"wall_time_s", wall_time_s},
            {"workers", workers}};
  return json{{"meta", meta},      {"subcommand", subcommand}, {"seed", seed},
              {"params", params},  {"results", results},       {"status", "ok"}};
}

json stable_view(const json& report) {
  json j = report;
  j.erase("meta");
  return j;
}

namespace {

bool type_matches(const json& doc, const std::string& t) {
  if (t == "object") return doc.is_object();
  if (t == "array") return doc.is_array();
  if (t == "string") return doc.is_string();
  if (t == "number") return doc.is_number();
  if (t == "integer") return doc.is_number_integer() || doc.is_number_unsigned();
  if (t == "boolean") return doc.is_boolean();
  if (t == "null") return doc.is_null();
  return false;
}

std::string validate_at(const json& doc, const json& schema, const std::string& path) {
  if (schema.contains("type")) {
    const auto t = schema["type"].get<std::string>();
    if (!type_matches(doc, t)) return path + ": expected " + t;
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& v : schema["enum"])
      if (v == doc) ok = true;
    if (!ok) return path + ": value not in enum";
  }
  if (doc.is_object()) {
    if (schema.contains("required"))
      for (const auto& k : schema["required"])
        if (!doc.contains(k.get<std::string>()))
          return path + ": missing required key '" + k.get<std::string>() + "'";
    const json props = schema.value("properties", json::object());
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      if (props.contains(it.key())) {
        auto err = validate_at(it.value(), props[it.key()], path + "." + it.key());
        if (!err.empty()) return err;
      } else if (schema.contains("additionalProperties")) {
        const auto& ap = schema["additionalProperties"];
        if (ap.is_boolean() && !ap.get<bool>())
          return path + ": unexpected key '" + it.key() + "'";
        if (ap.is_object()) {
          auto err = validate_at(it.value(), ap, path + "." + it.key());
          if (!err.empty()) return err;
        }
      }
    }
  }
  if (doc.is_array() && schema.contains("items")) {
    int i = 0;
    for (const auto& el : doc) {
      auto err = validate_at(el, schema["items"], path + "[" + std::to_string(i++) + "]");
      if (!err.empty()) return err;
    }
  }
  return {};
}

}  // namespace

std::string validate_against_schema(const json& doc, const json& schema) {
  return validate_at(doc, schema, "$");
}

}  // namespace fsm::report
