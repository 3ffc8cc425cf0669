#pragma once

// Stable JSON and text renderings for termination tables and lifting traces.

#include <json.hpp>

#include "probfpc/delay.hpp"
#include "probfpc/relate.hpp"

namespace probfpc {

// {"depths": [...], "probterm": ["p/q", ...], "limit": "p/q" | null}; with
// `approx`, also "approx": [doubles rounded to 6 places].
nlohmann::ordered_json termseq_json(const TermSeq& s, bool approx = false);

// {"case", "p", "m", "via_limit", "coupling", "slack", "fuel", "note", "children"}
nlohmann::ordered_json trace_json(const LiftTrace& t);

// {"verdict": "Holds" | "Unknown", "reason", "trace"}
nlohmann::ordered_json verdict_json(const LiftVerdict& v);

// Indented plain-text rendering of a trace, one node per line.
std::string trace_text(const LiftTrace& t, unsigned indent = 0);

// Six-decimal display rendering of an exact value.
std::string approx_str(const Rat& r);

}  // namespace probfpc
