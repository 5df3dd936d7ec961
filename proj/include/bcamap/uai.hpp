#pragma once

// Reader and writer for the UAI MARKOV text format, restricted to unary and
// pairwise factors.
//
//   MARKOV
//   <number of variables>
//   <cardinality of each variable>
//   <number of factors>
//   <scope size> <variables...>            (one line per factor)
//   <table size> <table entries...>        (one block per factor, in order)
//
// Entries are listed with the last scope variable changing fastest.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "model.hpp"

namespace bcamap {

class parse_error : public std::runtime_error {
public:
  parse_error(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what)
    , line_(line)
  {
  }
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

class unsupported_model : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct UaiOptions {
  /// Interpret entries as probabilities and load −log p as costs.
  bool probabilities = false;
  cost forbidden_cost = default_forbidden_cost;
};

struct LoadedModel {
  GraphicalModel model;
  /// Total constant subtracted from the tables to make them non-negative;
  /// E_original(y) = E_loaded(y) + energy_offset.
  cost energy_offset = 0;
};

namespace detail {

class Tokenizer {
public:
  explicit Tokenizer(std::istream& in)
    : in_(in)
  {
  }

  bool next(std::string& token)
  {
    token.clear();
    int c;
    while ((c = in_.get()) != EOF) {
      if (c == '\n')
        ++line_;
      if (!std::isspace(c)) {
        token.push_back(static_cast<char>(c));
        break;
      }
    }
    if (token.empty())
      return false;
    while ((c = in_.peek()) != EOF && !std::isspace(c))
      token.push_back(static_cast<char>(in_.get()));
    return true;
  }

  std::string expect(const char* what)
  {
    std::string token;
    if (!next(token))
      throw parse_error(line_, std::string("unexpected end of file, expected ") + what);
    return token;
  }

  index integer(const char* what)
  {
    const auto token = expect(what);
    index value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
      throw parse_error(line_, std::string("expected ") + what + ", got '" + token + "'");
    return value;
  }

  double real(const char* what)
  {
    const auto token = expect(what);
    double value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
      throw parse_error(line_, std::string("expected ") + what + ", got '" + token + "'");
    return value;
  }

  std::size_t line() const { return line_; }

private:
  std::istream& in_;
  std::size_t line_ = 1;
};

inline std::string format_real(double x)
{
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

} // namespace detail

inline LoadedModel parse_uai(std::istream& in, const UaiOptions& options = {})
{
  detail::Tokenizer tok(in);
  const auto header = tok.expect("network type");
  if (header != "MARKOV")
    throw parse_error(tok.line(), "expected MARKOV network, got '" + header + "'");

  const index n = tok.integer("variable count");
  std::vector<index> labels(n);
  for (auto& l : labels) {
    l = tok.integer("cardinality");
    if (l == 0)
      throw parse_error(tok.line(), "cardinality must be positive");
  }

  const index factors = tok.integer("factor count");
  std::vector<std::vector<index>> scopes(factors);
  std::vector<std::size_t> scope_lines(factors);
  for (auto& scope : scopes) {
    const index size = tok.integer("scope size");
    if (size > 2)
      throw unsupported_model("line " + std::to_string(tok.line()) + ": factor of order " + std::to_string(size) +
                              " (only unary and pairwise factors are supported)");
    scope.resize(size);
    for (auto& v : scope) {
      v = tok.integer("variable index");
      if (v >= n)
        throw parse_error(tok.line(), "variable index " + std::to_string(v) + " out of range");
    }
    if (size == 2 && scope[0] == scope[1])
      throw parse_error(tok.line(), "pairwise factor on a single variable");
    scope_lines[&scope - scopes.data()] = tok.line();
  }

  std::vector<std::vector<cost>> unary(n);
  for (index u = 0; u < n; ++u)
    unary[u].assign(labels[u], 0.0);
  std::map<std::pair<index, index>, std::vector<cost>> pairwise;
  std::vector<std::pair<index, index>> edge_order;
  cost offset = 0;

  for (index f = 0; f < factors; ++f) {
    const auto& scope = scopes[f];
    index expected = 1;
    for (index v : scope)
      expected *= labels[v];
    const index size = tok.integer("table size");
    if (size != expected)
      throw parse_error(tok.line(), "table size " + std::to_string(size) + " does not match scope (expected " +
                                      std::to_string(expected) + ")");
    std::vector<cost> table(size);
    for (auto& x : table) {
      double value = tok.real("table entry");
      if (options.probabilities) {
        if (value < 0)
          throw parse_error(tok.line(), "negative probability");
        value = value > 0 ? -std::log(value) : options.forbidden_cost;
      }
      if (std::isnan(value))
        throw parse_error(tok.line(), "NaN table entry");
      x = std::min(value, options.forbidden_cost);
    }
    const cost lowest = *std::min_element(table.begin(), table.end());
    if (lowest < 0) {
      for (auto& x : table)
        x -= lowest;
      offset += lowest;
    }

    if (scope.empty()) {
      offset += table[0];
    } else if (scope.size() == 1) {
      for (index s = 0; s < table.size(); ++s)
        unary[scope[0]][s] += table[s];
    } else {
      index a = scope[0];
      index b = scope[1];
      if (a > b) {
        // store with the smaller variable as the row
        std::vector<cost> transposed(table.size());
        for (index s = 0; s < labels[a]; ++s)
          for (index t = 0; t < labels[b]; ++t)
            transposed[t * labels[a] + s] = table[s * labels[b] + t];
        table = std::move(transposed);
        std::swap(a, b);
      }
      if (!pairwise.emplace(std::make_pair(a, b), std::move(table)).second)
        throw parse_error(scope_lines[f], "duplicate edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
      edge_order.emplace_back(a, b);
    }
  }
  std::string extra;
  if (tok.next(extra))
    throw parse_error(tok.line(), "trailing data '" + extra + "'");

  ModelBuilder builder(labels);
  builder.set_forbidden_cost(options.forbidden_cost);
  for (index u = 0; u < n; ++u)
    builder.set_unary(u, std::move(unary[u]));
  for (const auto& key : edge_order)
    builder.add_edge(key.first, key.second, std::move(pairwise.at(key)));
  return {builder.build(), offset};
}

inline LoadedModel parse_uai_file(const std::string& path, const UaiOptions& options = {})
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  return parse_uai(in, options);
}

/// Writes costs verbatim (one unary factor per node, one pairwise factor per
/// edge) with shortest round-trip formatting.
inline void write_uai(std::ostream& out, const GraphicalModel& model)
{
  out << "MARKOV\n" << model.node_count() << "\n";
  for (index u = 0; u < model.node_count(); ++u)
    out << (u ? " " : "") << model.label_count(u);
  out << "\n" << model.node_count() + model.edge_count() << "\n";
  for (index u = 0; u < model.node_count(); ++u)
    out << "1 " << u << "\n";
  for (const auto& ed : model.edges())
    out << "2 " << ed.u << " " << ed.v << "\n";
  for (index u = 0; u < model.node_count(); ++u) {
    out << "\n" << model.label_count(u) << "\n";
    const auto th = model.unary(u);
    for (index s = 0; s < th.size(); ++s)
      out << (s ? " " : "") << detail::format_real(th[s]);
    out << "\n";
  }
  for (index e = 0; e < model.edge_count(); ++e) {
    const auto& ed = model.edge(e);
    const index nv = model.label_count(ed.v);
    const auto table = model.pairwise(e);
    out << "\n" << table.size() << "\n";
    for (index k = 0; k < table.size(); ++k)
      out << detail::format_real(table[k]) << ((k + 1) % nv == 0 ? "\n" : " ");
  }
}

inline std::string to_uai_string(const GraphicalModel& model)
{
  std::ostringstream out;
  write_uai(out, model);
  return out.str();
}

} // namespace bcamap
