#include "goalc/telemetry.hpp"

#include <json.hpp>

#include "goalc/error.hpp"

namespace goalc::telemetry {

using json = nlohmann::ordered_json;

namespace {

const char* kind_name(EventKind k) {
  switch (k) {
    case EventKind::Exec: return "exec";
    case EventKind::Cost: return "cost";
    case EventKind::Context: return "context";
  }
  return "exec";
}

json parse_line(std::string_view line) {
  try {
    return json::parse(line.begin(), line.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON line: ") + e.what(), e.byte);
  }
}

}  // namespace

std::string to_json(const Event& e) {
  json j;
  j["t"] = e.t;
  j["kind"] = kind_name(e.kind);
  j["id"] = e.id;
  json payload;
  switch (e.kind) {
    case EventKind::Exec:
      payload["success"] = e.success;
      payload["ran"] = e.ran;
      break;
    case EventKind::Cost:
      payload["value"] = e.value;
      break;
    case EventKind::Context:
      payload["value"] = e.value != 0.0 ? 1 : 0;
      break;
  }
  j["payload"] = std::move(payload);
  return j.dump();
}

std::string to_json(const Command& c) {
  json j;
  j["t"] = c.t;
  j["knob"] = c.knob;
  j["value"] = c.value;
  return j.dump();
}

Event parse_event(std::string_view line) {
  json j = parse_line(line);
  try {
    Event e;
    e.t = j.at("t").get<double>();
    e.id = j.at("id").get<std::string>();
    std::string kind = j.at("kind").get<std::string>();
    const json& p = j.at("payload");
    if (kind == "exec") {
      e.kind = EventKind::Exec;
      e.success = p.at("success").get<bool>();
      e.ran = p.value("ran", true);
    } else if (kind == "cost") {
      e.kind = EventKind::Cost;
      e.value = p.at("value").get<double>();
    } else if (kind == "context") {
      e.kind = EventKind::Context;
      const json& v = p.at("value");
      e.value = v.is_boolean() ? (v.get<bool>() ? 1.0 : 0.0) : v.get<double>();
    } else {
      throw ParseError("unknown event kind '" + kind + "'", 0);
    }
    return e;
  } catch (const json::exception& ex) {
    throw ParseError(std::string("malformed event: ") + ex.what(), 0);
  }
}

Command parse_command(std::string_view line) {
  json j = parse_line(line);
  try {
    return Command{j.at("t").get<double>(), j.at("knob").get<std::string>(), j.at("value").get<double>()};
  } catch (const json::exception& ex) {
    throw ParseError(std::string("malformed command: ") + ex.what(), 0);
  }
}

std::vector<Event> read_events(std::istream& in, std::size_t* malformed) {
  std::vector<Event> out;
  std::size_t bad = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_event(line));
    } catch (const ParseError&) {
      ++bad;
    }
  }
  if (malformed) *malformed = bad;
  return out;
}

}  // namespace goalc::telemetry
