#pragma once

// Wire format between the managed system and the managing loop.
//
// Telemetry (JSONL, one event per line):
//   {"t": 1.0, "kind": "exec",    "id": "T1.11", "payload": {"success": true, "ran": true}}
//   {"t": 1.0, "kind": "cost",    "id": "T1.11", "payload": {"value": 0.002}}
//   {"t": 1.0, "kind": "context", "id": "C1",    "payload": {"value": 1}}
// An exec event with ran=false is an execution slot the component skipped.
//
// Actuation commands (JSONL): {"t": 1.0, "knob": "T1.1", "value": 0.8}

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace goalc::telemetry {

enum class EventKind { Exec, Cost, Context };

struct Event {
  double t = 0;
  EventKind kind = EventKind::Exec;
  std::string id;
  bool success = false;
  bool ran = true;
  double value = 0;

  static Event exec(double t, std::string id, bool ran, bool success) {
    return Event{t, EventKind::Exec, std::move(id), success, ran, 0};
  }
  static Event cost(double t, std::string id, double value) {
    return Event{t, EventKind::Cost, std::move(id), false, true, value};
  }
  static Event context(double t, std::string id, bool holds) {
    return Event{t, EventKind::Context, std::move(id), false, true, holds ? 1.0 : 0.0};
  }
};

struct Command {
  double t = 0;
  std::string knob;
  double value = 0;

  friend bool operator==(const Command&, const Command&) = default;
};

std::string to_json(const Event& e);
std::string to_json(const Command& c);

/// Throws ParseError on malformed lines.
Event parse_event(std::string_view line);
Command parse_command(std::string_view line);

/// Reads every well-formed event; malformed lines are counted and skipped.
std::vector<Event> read_events(std::istream& in, std::size_t* malformed = nullptr);

}  // namespace goalc::telemetry
