#pragma once

// Versioned machine-readable report shared by all CLI subcommands.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace engel {

enum class Status { pass, fail, error };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::error: return "error";
  }
  return "error";
}

struct CheckResult {
  std::string check;
  Status status = Status::pass;
  nlohmann::json payload = nlohmann::json::object();
};

struct Report {
  static constexpr const char* kSchema = "engel-report";
  static constexpr int kVersion = 1;

  std::string command;
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
  std::vector<CheckResult> results;
  std::optional<std::string> error;
  std::optional<double> elapsed_ms;

  void add(std::string check, bool ok, nlohmann::json payload = nlohmann::json::object()) {
    results.push_back({std::move(check), ok ? Status::pass : Status::fail, std::move(payload)});
  }

  Status status() const {
    if (error) return Status::error;
    for (const auto& r : results)
      if (r.status != Status::pass) return r.status;
    return Status::pass;
  }

  int exit_code() const {
    switch (status()) {
      case Status::pass: return 0;
      case Status::fail: return 1;
      case Status::error: return 2;
    }
    return 2;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["schema"] = kSchema;
    j["version"] = kVersion;
    j["command"] = command;
    j["inputs"] = inputs;
    nlohmann::ordered_json rs = nlohmann::ordered_json::array();
    for (const auto& r : results) {
      nlohmann::ordered_json o;
      o["check"] = r.check;
      o["status"] = to_string(r.status);
      o["payload"] = r.payload;
      rs.push_back(o);
    }
    j["results"] = rs;
    j["status"] = to_string(status());
    if (error) j["error"] = *error;
    j["elapsed_ms"] = elapsed_ms ? nlohmann::ordered_json(*elapsed_ms) : nlohmann::ordered_json(nullptr);
    return j;
  }

  std::string text() const {
    std::string s = command + ": " + to_string(status()) + "\n";
    for (const auto& r : results) s += "  [" + std::string(to_string(r.status)) + "] " + r.check + "\n";
    if (error) s += "  error: " + *error + "\n";
    if (elapsed_ms) s += "  elapsed_ms: " + std::to_string(*elapsed_ms) + "\n";
    return s;
  }
};

}  // namespace engel
