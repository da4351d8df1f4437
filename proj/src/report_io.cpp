#include "hcl/report_io.hpp"

#include "json.hpp"

namespace hcl::report_io {

namespace {

using nlohmann::json;

json coeff(const melnikov::Coefficient& c) {
  return {{"value", c.value}, {"error", c.error}, {"degenerate", c.degenerate()}};
}

melnikov::Coefficient coeff_from(const json& j) {
  return {j.at("value").get<double>(), j.at("error").get<double>()};
}

template <class T>
json optional_value(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<double> optional_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed JSON report: ") + e.what());
  }
}

template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed JSON report: ") + e.what());
  }
}

}  // namespace

std::string to_json(const melnikov::MelnikovReport& r) {
  json j{{"mode", std::string(melnikov::to_string(r.mode))},
         {"s", r.s},
         {"ell", r.ell},
         {"beta1", r.beta1},
         {"beta2", r.beta2},
         {"beta4", r.beta4},
         {"a2", coeff(r.a2)},
         {"b2", coeff(r.b2)},
         {"bar_a2", coeff(r.bar_a2)},
         {"bar_b2", coeff(r.bar_b2)},
         {"closed_form_a2", optional_value(r.closed_form_a2)},
         {"closed_form_b2", optional_value(r.closed_form_b2)},
         {"series_a2", optional_value(r.series_a2)},
         {"series_b2", optional_value(r.series_b2)},
         {"classification", std::string(melnikov::to_string(r.classification))}};
  return j.dump(2);
}

melnikov::MelnikovReport melnikov_from_json(const std::string& text) {
  const json j = parse(text);
  return guarded([&] {
    melnikov::MelnikovReport r;
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == melnikov::to_string(melnikov::Mode::saddle_node)) r.mode = melnikov::Mode::saddle_node;
    else if (mode == melnikov::to_string(melnikov::Mode::pitchfork)) r.mode = melnikov::Mode::pitchfork;
    else throw DomainError("unknown Melnikov mode '" + mode + "'");
    r.s = j.at("s").get<double>();
    r.ell = j.at("ell").get<int>();
    r.beta1 = j.at("beta1").get<double>();
    r.beta2 = j.at("beta2").get<double>();
    r.beta4 = j.at("beta4").get<double>();
    r.a2 = coeff_from(j.at("a2"));
    r.b2 = coeff_from(j.at("b2"));
    r.bar_a2 = coeff_from(j.at("bar_a2"));
    r.bar_b2 = coeff_from(j.at("bar_b2"));
    r.closed_form_a2 = optional_from(j, "closed_form_a2");
    r.closed_form_b2 = optional_from(j, "closed_form_b2");
    r.series_a2 = optional_from(j, "series_a2");
    r.series_b2 = optional_from(j, "series_b2");
    r.classification = melnikov::parse_classification(j.at("classification").get<std::string>());
    return r;
  });
}

std::string to_json(const variational::BoundedCount& c, double s, double beta1) {
  json j{{"s", s}, {"beta1", beta1}, {"T", c.T}, {"n0", c.n0}, {"sines", c.sines}};
  return j.dump(2);
}

variational::BoundedCount bounded_from_json(const std::string& text) {
  const json j = parse(text);
  return guarded([&] {
    variational::BoundedCount c;
    c.n0 = j.at("n0").get<int>();
    c.sines = j.at("sines").get<std::vector<double>>();
    c.T = j.at("T").get<double>();
    return c;
  });
}

std::string to_json(const fuchsian::KimuraVerdict& v, const fuchsian::ExponentScheme& scheme) {
  const auto& labels = fuchsian::combination_labels();
  json combos = json::array();
  for (std::size_t i = 0; i < labels.size(); ++i) combos.push_back({{"label", labels[i]}, {"value", v.combinations[i]}});
  json j{{"triangularizable", v.triangularizable},
         {"witness", v.witness >= 0 ? json(labels[static_cast<std::size_t>(v.witness)]) : json(nullptr)},
         {"witness_index", v.witness},
         {"witness_value", v.witness_value},
         {"rho", scheme.rho},
         {"combinations", combos}};
  return j.dump(2);
}

fuchsian::KimuraVerdict kimura_from_json(const std::string& text) {
  const json j = parse(text);
  return guarded([&] {
    fuchsian::KimuraVerdict v;
    v.triangularizable = j.at("triangularizable").get<bool>();
    v.witness = j.at("witness_index").get<int>();
    v.witness_value = j.at("witness_value").get<double>();
    const json& combos = j.at("combinations");
    if (combos.size() != v.combinations.size()) throw DomainError("Kimura report needs four combinations");
    for (std::size_t i = 0; i < combos.size(); ++i) v.combinations[i] = combos[i].at("value").get<double>();
    return v;
  });
}

}  // namespace hcl::report_io
