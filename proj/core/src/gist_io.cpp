#include <istream>
#include <nlohmann/json.hpp>

#include "dgmm/error.hpp"
#include "dgmm/ingest.hpp"

namespace dgmm {
using nlohmann::json;

namespace {

std::string required_string(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_string()) {
    throw Error(ErrorKind::parse, std::string("gist field '") + field + "' must be a string");
  }
  return it->get<std::string>();
}

std::optional<TimeValue> optional_time(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw Error(ErrorKind::parse, std::string("gist field '") + field + "' must be a string");
  }
  return TimeValue::parse(it->get<std::string>());
}

}  // namespace

Gist parse_gist(const Schema& schema, std::string_view line) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, std::string("malformed gist record: ") + e.what());
  }
  if (!obj.is_object()) throw Error(ErrorKind::parse, "gist record must be an object");

  Gist g;
  g.concept_label = required_string(obj, "concept");
  g.source_name = required_string(obj, "source");
  g.interaction_id = required_string(obj, "interaction");
  auto els = obj.find("elements");
  if (els == obj.end() || !els->is_array()) {
    throw Error(ErrorKind::parse, "gist field 'elements' must be an array");
  }
  for (const auto& e : *els) {
    if (!e.is_object()) throw Error(ErrorKind::parse, "gist element must be an object");
    g.elements.push_back(
        {schema.relation_type(required_string(e, "rel")), required_string(e, "name")});
  }
  g.event_time = optional_time(obj, "event_time");
  g.acquisition_time = optional_time(obj, "acquisition_time");
  return g;
}

std::string format_gist(const Schema& schema, const Gist& gist) {
  json obj = json::object();
  obj["concept"] = gist.concept_label;
  json els = json::array();
  for (const auto& e : gist.elements) {
    els.push_back({{"rel", std::string(schema.name(e.rel))}, {"name", e.name}});
  }
  obj["elements"] = std::move(els);
  if (gist.event_time) obj["event_time"] = gist.event_time->canonical();
  if (gist.acquisition_time) obj["acquisition_time"] = gist.acquisition_time->canonical();
  obj["source"] = gist.source_name;
  obj["interaction"] = gist.interaction_id;
  return obj.dump();
}

std::vector<GistLine> read_gist_lines(const Schema& schema, std::istream& in) {
  std::vector<GistLine> out;
  std::size_t number = 0;
  for (std::string line; std::getline(in, line);) {
    ++number;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    GistLine gl;
    gl.line_number = number;
    try {
      gl.gist = parse_gist(schema, line);
    } catch (const Error& e) {
      gl.error = std::string(to_string(e.kind())) + ": " + e.what();
    }
    out.push_back(std::move(gl));
  }
  return out;
}

}  // namespace dgmm
