// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

// Line-oriented market files.
//
//   # comment
//   tsm-instance 1
//   items i0 i1
//   constraint uniform 2
//   buyer b0 weight 1/4 unit 5:1/2 3:1/2
//   buyer b1 xos [4,1;2,5]:1
//   seller s0 owns i0 unit 0:1
//
// Constraints: none | knapsack | uniform R | partition B,B,.. C,C,.. |
// graphic V U-V,U-V,.. | explicit {..},{0,1},..
// A distribution is a list of VALUE:PROBABILITY atoms; XOS values list
// clauses separated by ';', each a dense weight vector over the items.

#ifndef TSM_IO_INSTANCE_FORMAT_HPP_
#define TSM_IO_INSTANCE_FORMAT_HPP_

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tsm/core.hpp"
#include "tsm/errors.hpp"
#include "tsm/matroid.hpp"
#include "tsm/rational.hpp"

namespace tsm {

class ParseError : public InputError {
 public:
  ParseError(std::string source, size_t line, size_t column,
             const std::string& what)
      : InputError(source + ":" + std::to_string(line) + ":" +
                   std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  size_t line() const { return line_; }
  size_t column() const { return column_; }

 private:
  size_t line_;
  size_t column_;
};

namespace io_detail {

struct Token {
  std::string text;
  size_t column;  // 1-based
};

inline std::vector<Token> split_tokens(const std::string& line) {
  std::vector<Token> out;
  size_t p = 0;
  while (p < line.size()) {
    while (p < line.size() && std::isspace(static_cast<unsigned char>(line[p]))) ++p;
    if (p >= line.size() || line[p] == '#') break;
    size_t start = p;
    while (p < line.size() && !std::isspace(static_cast<unsigned char>(line[p]))) ++p;
    out.push_back({line.substr(start, p - start), start + 1});
  }
  return out;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

class LineParser {
 public:
  LineParser(const std::string& source, size_t line, std::vector<Token> tokens)
      : source_(source), line_(line), tokens_(std::move(tokens)) {}

  [[noreturn]] void fail(size_t t, const std::string& what) const {
    size_t col = t < tokens_.size() ? tokens_[t].column
                                    : (tokens_.empty() ? 1
                                                       : tokens_.back().column +
                                                             tokens_.back().text.size());
    throw ParseError(source_, line_, col, what);
  }

  size_t size() const { return tokens_.size(); }
  const std::string& at(size_t t) const {
    if (t >= tokens_.size()) fail(t, "unexpected end of line");
    return tokens_[t].text;
  }

  Rational rational(size_t t, std::string_view text) const {
    Rational q;
    if (!try_parse_rational(text, &q)) {
      fail(t, "expected a rational, got '" + std::string(text) + "'");
    }
    return q;
  }

  size_t count(size_t t, std::string_view text) const {
    Rational q = rational(t, text);
    if (q < 0 || denominator(q) != 1 || q > 1'000'000) {
      fail(t, "expected a small nonnegative integer, got '" +
                  std::string(text) + "'");
    }
    return numerator(q).convert_to<size_t>();
  }

  // [w,w;w,w]
  XosValuation xos(size_t t, std::string_view text, size_t m) const {
    if (text.size() < 2 || text.front() != '[' || text.back() != ']') {
      fail(t, "expected an XOS value like [1,0;0,2]");
    }
    XosValuation x;
    for (const auto& clause : split(text.substr(1, text.size() - 2), ';')) {
      std::vector<Rational> w;
      for (const auto& part : split(clause, ',')) w.push_back(rational(t, part));
      if (w.size() != m) {
        fail(t, "XOS clause has " + std::to_string(w.size()) +
                    " weights, expected " + std::to_string(m));
      }
      x.clauses.push_back(std::move(w));
    }
    return x;
  }

  Distribution distribution(size_t first, bool unit, size_t m) const {
    if (first >= size()) fail(first, "distribution needs at least one atom");
    std::vector<Distribution::Atom> atoms;
    for (size_t t = first; t < size(); ++t) {
      const std::string& a = at(t);
      auto colon = a.rfind(':');
      if (colon == std::string::npos) fail(t, "atom must be VALUE:PROBABILITY");
      std::string_view v(a.data(), colon);
      Rational p = rational(t, std::string_view(a).substr(colon + 1));
      if (p <= 0 || p > 1) fail(t, "probability outside (0,1]");
      Valuation val = unit ? Valuation(UnitValuation{rational(t, v)})
                           : Valuation(xos(t, v, m));
      atoms.push_back({std::move(val), p});
    }
    Rational total = 0;
    for (const auto& a : atoms) total += a.probability;
    if (total != 1) {
      fail(first, "probabilities sum to " + to_string(total) + ", expected 1");
    }
    try {
      return Distribution(std::move(atoms));
    } catch (const InputError& e) {
      fail(first, e.what());
    }
  }

 private:
  const std::string& source_;
  size_t line_;
  std::vector<Token> tokens_;
};

inline std::string mask_list(Mask s) {
  std::string out = "{";
  for (Mask rest = s; rest; rest &= rest - 1) {
    out += (out.size() > 1 ? "," : "") + std::to_string(std::countr_zero(rest));
  }
  return out + "}";
}

}  // namespace io_detail

// Parses a market; errors carry source:line:column.
inline Instance parse_instance(std::istream& in,
                               const std::string& source = "<input>") {
  using io_detail::LineParser;
  Instance inst;
  bool have_items = false, have_constraint = false, have_header = false;
  std::optional<Matroid> matroid;
  size_t matroid_line = 0;
  std::map<std::string, size_t> item_index;
  std::string raw;
  size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto tokens = io_detail::split_tokens(raw);
    if (tokens.empty()) continue;
    LineParser lp(source, line_no, tokens);
    const std::string& head = lp.at(0);
    if (head == "tsm-instance") {
      if (have_header || have_items || have_constraint ||
          !inst.buyers.empty() || !inst.sellers.empty()) {
        lp.fail(0, "header must come first");
      }
      if (lp.size() != 2 || lp.at(1) != "1") lp.fail(1, "unsupported version");
      have_header = true;
    } else if (head == "items") {
      if (have_items) lp.fail(0, "items declared twice");
      if (!inst.sellers.empty()) lp.fail(0, "items must precede sellers");
      for (size_t t = 1; t < lp.size(); ++t) {
        if (!item_index.emplace(lp.at(t), inst.items.size()).second) {
          lp.fail(t, "duplicate item '" + lp.at(t) + "'");
        }
        inst.items.push_back(lp.at(t));
      }
      if (inst.items.size() > kMaxItems) lp.fail(0, "more than 32 items");
      have_items = true;
    } else if (head == "constraint") {
      if (have_constraint) lp.fail(0, "constraint declared twice");
      have_constraint = true;
      const std::string& kind = lp.at(1);
      auto arity = [&](size_t want) {
        if (lp.size() != want) {
          lp.fail(std::min(lp.size(), want), "constraint '" + kind + "' takes " +
                                                 std::to_string(want - 2) +
                                                 " argument(s)");
        }
      };
      if (kind == "none") {
        arity(2);
        inst.constraint = Unconstrained{};
      } else if (kind == "knapsack") {
        arity(2);
        inst.constraint = KnapsackConstraint{};
      } else if (kind == "uniform") {
        arity(3);
        matroid = Matroid(UniformMatroid{0, lp.count(2, lp.at(2))});
      } else if (kind == "partition") {
        arity(4);
        PartitionMatroid p;
        for (const auto& b : io_detail::split(lp.at(2), ',')) {
          p.block_of.push_back(lp.count(2, b));
        }
        for (const auto& c : io_detail::split(lp.at(3), ',')) {
          p.capacity.push_back(lp.count(3, c));
        }
        try {
          matroid = Matroid(p);
        } catch (const InputError& e) {
          lp.fail(2, e.what());
        }
      } else if (kind == "graphic") {
        arity(4);
        GraphicMatroid g;
        g.vertices = lp.count(2, lp.at(2));
        for (const auto& e : io_detail::split(lp.at(3), ',')) {
          auto dash = e.find('-');
          if (dash == std::string::npos) lp.fail(3, "edge must be U-V");
          g.edges.emplace_back(lp.count(3, e.substr(0, dash)),
                               lp.count(3, e.substr(dash + 1)));
        }
        try {
          matroid = Matroid(g);
        } catch (const InputError& e) {
          lp.fail(3, e.what());
        }
      } else if (kind == "explicit") {
        arity(4);
        size_t size = lp.count(2, lp.at(2));
        std::vector<Mask> sets;
        const std::string& body = lp.at(3);
        size_t p = 0;
        while (p < body.size()) {
          if (body[p] != '{') lp.fail(3, "expected '{'");
          auto close = body.find('}', p);
          if (close == std::string::npos) lp.fail(3, "missing '}'");
          Mask s = 0;
          std::string inner = body.substr(p + 1, close - p - 1);
          if (!inner.empty()) {
            for (const auto& e : io_detail::split(inner, ',')) {
              size_t x = lp.count(3, e);
              if (x >= 64) lp.fail(3, "element out of range");
              s |= bit(x);
            }
          }
          sets.push_back(s);
          p = close + 1;
          if (p < body.size()) {
            if (body[p] != ',') lp.fail(3, "expected ','");
            ++p;
          }
        }
        try {
          matroid = Matroid(ExplicitMatroid(size, sets));
        } catch (const std::exception& e) {
          lp.fail(3, e.what());
        }
      } else {
        lp.fail(1, "unknown constraint '" + kind + "'");
      }
      matroid_line = line_no;
    } else if (head == "buyer" || head == "seller") {
      if (!have_items) lp.fail(0, "items must be declared before agents");
      Agent a;
      a.name = lp.at(1);
      size_t t = 2;
      if (head == "buyer" && lp.size() > t && lp.at(t) == "weight") {
        a.weight = lp.rational(t + 1, lp.at(t + 1));
        if (a.weight < 0 || a.weight > 1) lp.fail(t + 1, "weight outside [0,1]");
        t += 2;
      }
      if (head == "seller") {
        if (lp.at(t) != "owns") lp.fail(t, "expected 'owns'");
        for (const auto& it : io_detail::split(lp.at(t + 1), ',')) {
          auto found = item_index.find(it);
          if (found == item_index.end()) lp.fail(t + 1, "unknown item '" + it + "'");
          a.endowment |= ItemSet{1} << found->second;
        }
        t += 2;
      }
      const std::string& cls = lp.at(t);
      if (cls != "unit" && cls != "xos") {
        lp.fail(t, "expected valuation class 'unit' or 'xos'");
      }
      a.distribution = lp.distribution(t + 1, cls == "unit", inst.m());
      (head == "buyer" ? inst.buyers : inst.sellers).push_back(std::move(a));
    } else {
      lp.fail(0, "unknown directive '" + head + "'");
    }
  }
  if (matroid) {
    if (auto* u = std::get_if<UniformMatroid>(&matroid->variant())) {
      matroid = Matroid(UniformMatroid{inst.n(), u->rank});
    }
    inst.constraint = MatroidConstraint{*matroid};
  }
  if (!have_items) throw ParseError(source, line_no + 1, 1, "missing 'items'");
  if (!have_constraint) {
    throw ParseError(source, line_no + 1, 1, "missing 'constraint'");
  }
  try {
    inst.validate();
  } catch (const InputError& e) {
    throw ParseError(source, matroid ? matroid_line : line_no, 1, e.what());
  }
  return inst;
}

inline Instance parse_instance_text(const std::string& text,
                                    const std::string& source = "<input>") {
  std::istringstream in(text);
  return parse_instance(in, source);
}

inline Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return parse_instance(in, path);
}

// Canonical text; parse_instance(serialize_instance(x)) reproduces x.
inline std::string serialize_instance(const Instance& inst) {
  std::ostringstream os;
  os << "tsm-instance 1\nitems";
  for (const auto& it : inst.items) os << ' ' << it;
  os << "\nconstraint ";
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, Unconstrained>) {
          os << "none";
        } else if constexpr (std::is_same_v<T, KnapsackConstraint>) {
          os << "knapsack";
        } else {
          std::visit(
              [&](const auto& m) {
                using M = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<M, UniformMatroid>) {
                  os << "uniform " << m.rank;
                } else if constexpr (std::is_same_v<M, PartitionMatroid>) {
                  os << "partition ";
                  for (size_t e = 0; e < m.block_of.size(); ++e) {
                    os << (e ? "," : "") << m.block_of[e];
                  }
                  os << ' ';
                  for (size_t b = 0; b < m.capacity.size(); ++b) {
                    os << (b ? "," : "") << m.capacity[b];
                  }
                } else if constexpr (std::is_same_v<M, GraphicMatroid>) {
                  os << "graphic " << m.vertices << ' ';
                  for (size_t e = 0; e < m.edges.size(); ++e) {
                    os << (e ? "," : "") << m.edges[e].first << '-'
                       << m.edges[e].second;
                  }
                } else {
                  os << "explicit " << m.size() << ' ';
                  bool first = true;
                  for (Mask s = 0; s < (Mask{1} << m.size()); ++s) {
                    if (!m.independent(s)) continue;
                    os << (first ? "" : ",") << io_detail::mask_list(s);
                    first = false;
                  }
                }
              },
              c.matroid.variant());
        }
      },
      inst.constraint);
  os << '\n';
  auto dist = [&](const Distribution& d) {
    os << (d.all_unit() ? " unit" : " xos");
    for (const auto& atom : d.atoms()) {
      os << ' ';
      if (const auto* u = std::get_if<UnitValuation>(&atom.value)) {
        os << to_string(u->value);
      } else {
        const auto& x = std::get<XosValuation>(atom.value);
        os << '[';
        for (size_t c = 0; c < x.clauses.size(); ++c) {
          if (c) os << ';';
          for (size_t it = 0; it < x.clauses[c].size(); ++it) {
            os << (it ? "," : "") << to_string(x.clauses[c][it]);
          }
        }
        os << ']';
      }
      os << ':' << to_string(atom.probability);
    }
    os << '\n';
  };
  for (const auto& b : inst.buyers) {
    os << "buyer " << b.name;
    if (b.weight != 0) os << " weight " << to_string(b.weight);
    dist(b.distribution);
  }
  for (const auto& s : inst.sellers) {
    os << "seller " << s.name << " owns ";
    bool first = true;
    for (ItemSet rest = s.endowment; rest; rest &= rest - 1) {
      os << (first ? "" : ",") << inst.items[std::countr_zero(rest)];
      first = false;
    }
    dist(s.distribution);
  }
  return os.str();
}

}  // namespace tsm

#endif  // TSM_IO_INSTANCE_FORMAT_HPP_
