#pragma once

// Trace CSV and run summary JSON.

#include <charconv>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "solvers.hpp"

namespace bcamap {

struct RunSummary {
  std::string instance;
  std::string method;
  cost dual = 0;
  cost primal = 0;
  cost gap = 0;
  std::uint64_t messages = 0;
  double normalized_messages = 0;
  double wall_seconds = 0;
  std::uint64_t passes = 0;
};

inline constexpr const char* trace_header = "pass,messages,normalized_messages,dual,primal,wall_seconds";

namespace detail {

inline void put_real(std::ostream& out, double x)
{
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  out.write(buf, ptr - buf);
}

} // namespace detail

/// RFC 4180 quoting for fields that contain separators or quotes.
inline std::string csv_field(std::string_view text)
{
  if (text.find_first_of(",\"\n") == std::string_view::npos)
    return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"')
      out += '"';
    out += c;
  }
  return out + '"';
}

/// With `wall_time` false the wall_seconds column is written as 0 so that
/// equal seeds give byte-identical files.
inline void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace, bool wall_time = true)
{
  out << trace_header << '\n';
  for (const auto& r : trace) {
    out << r.pass << ',' << r.messages << ',';
    detail::put_real(out, r.normalized_messages);
    out << ',';
    detail::put_real(out, r.dual);
    out << ',';
    detail::put_real(out, r.primal_energy);
    out << ',';
    detail::put_real(out, wall_time ? r.wall_seconds : 0.0);
    out << '\n';
  }
}

inline RunSummary summarize(std::string instance, Method method, const SolverResult& result, cost offset = 0)
{
  const auto& last = result.trace.back();
  RunSummary s;
  s.instance = std::move(instance);
  s.method = std::string(method_name(method));
  s.dual = last.dual + offset;
  s.primal = last.primal_energy + offset;
  s.gap = last.primal_energy - last.dual;
  s.messages = last.messages;
  s.normalized_messages = last.normalized_messages;
  s.wall_seconds = last.wall_seconds;
  s.passes = last.pass;
  return s;
}

inline nlohmann::json to_json(const RunSummary& s)
{
  return {{"instance", s.instance},         {"method", s.method},
          {"final_dual", s.dual},           {"final_primal", s.primal},
          {"gap", s.gap},                   {"messages", s.messages},
          {"normalized_messages", s.normalized_messages},
          {"wall_seconds", s.wall_seconds}, {"passes", s.passes}};
}

} // namespace bcamap
