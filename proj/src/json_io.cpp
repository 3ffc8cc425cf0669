#include "probfpc/json_io.hpp"

#include <cmath>
#include <cstdio>

namespace probfpc {

std::string approx_str(const Rat& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", r.to_double());
  return buf;
}

nlohmann::ordered_json termseq_json(const TermSeq& s, bool approx) {
  nlohmann::ordered_json j;
  auto depths = nlohmann::ordered_json::array();
  auto vals = nlohmann::ordered_json::array();
  for (std::size_t n = 0; n < s.values.size(); ++n) {
    depths.push_back(n);
    vals.push_back(s.values[n].str());
  }
  j["depths"] = depths;
  j["probterm"] = vals;
  j["limit"] = s.limit ? nlohmann::ordered_json(s.limit->str()) : nlohmann::ordered_json(nullptr);
  if (approx) {
    auto a = nlohmann::ordered_json::array();
    for (const auto& v : s.values) a.push_back(std::round(v.value().to_double() * 1e6) / 1e6);
    j["approx"] = a;
  }
  return j;
}

nlohmann::ordered_json trace_json(const LiftTrace& t) {
  nlohmann::ordered_json j;
  j["case"] = t.kind;
  j["p"] = t.p ? nlohmann::ordered_json(t.p->str()) : nlohmann::ordered_json(nullptr);
  j["m"] = t.m ? nlohmann::ordered_json(*t.m) : nlohmann::ordered_json(nullptr);
  j["via_limit"] = t.via_limit;
  j["coupling"] = t.coupling;
  j["slack"] = t.slack.str();
  j["fuel"] = t.fuel;
  j["note"] = t.note;
  auto kids = nlohmann::ordered_json::array();
  for (const auto& c : t.children) kids.push_back(trace_json(c));
  j["children"] = kids;
  return j;
}

nlohmann::ordered_json verdict_json(const LiftVerdict& v) {
  nlohmann::ordered_json j;
  j["verdict"] = v.holds ? "Holds" : "Unknown";
  j["reason"] = v.reason;
  j["trace"] = trace_json(v.trace);
  return j;
}

std::string trace_text(const LiftTrace& t, unsigned indent) {
  std::string s(indent * 2, ' ');
  s += t.kind;
  if (t.p) s += " p=" + t.p->str();
  if (t.m) s += " m=" + std::to_string(*t.m);
  if (t.via_limit) s += " via-limit";
  s += " fuel=" + std::to_string(t.fuel);
  if (!t.slack.is_zero()) s += " slack=" + t.slack.str();
  if (!t.note.empty()) s += " (" + t.note + ")";
  s += "\n";
  for (const auto& c : t.coupling) s += std::string(indent * 2 + 4, ' ') + c + "\n";
  for (const auto& c : t.children) s += trace_text(c, indent + 1);
  return s;
}

}  // namespace probfpc
