#include "stmado/model_json.hpp"

#include "stmado/error.hpp"

namespace stmado {

ModelSpec model_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("family"))
    throw Error(ErrorKind::InvalidArgs, "model must be an object with a 'family' field");
  const Family f = parse_family(j.at("family").get<std::string>());
  const nlohmann::json params = j.value("params", nlohmann::json::object());
  std::vector<double> v;
  for (const std::string& name : param_names(f)) {
    if (!params.contains(name))
      throw Error(ErrorKind::InvalidArgs, "model " + std::string(family_name(f)) + " is missing parameter '" + name + "'");
    v.push_back(params.at(name).get<double>());
  }
  ModelSpec m = from_vector(f, v);
  validate(m);
  return m;
}

nlohmann::json model_to_json(const ModelSpec& m) {
  const Family f = family_of(m);
  const std::vector<double> v = to_vector(m);
  const std::vector<std::string> names = param_names(f);
  nlohmann::json params = nlohmann::json::object();
  for (std::size_t i = 0; i < v.size(); ++i) params[names[i]] = v[i];
  return {{"family", std::string(family_name(f))}, {"params", params}};
}

}  // namespace stmado
