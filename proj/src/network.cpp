#include "crnosc/network.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <sstream>
#include <unordered_map>

namespace crnosc {

void Complex::add(int species, int count) {
  if (count < 1) throw std::invalid_argument("complex coefficient must be >= 1");
  coeffs_[species] += count;
}

int Complex::coefficient(int species) const {
  auto it = coeffs_.find(species);
  return it == coeffs_.end() ? 0 : it->second;
}

namespace {

bool valid_species_name(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin() + 1, s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

}  // namespace

Network::Network(std::vector<std::string> species_names, std::vector<Reaction> reactions)
    : names_(std::move(species_names)), reactions_(std::move(reactions)) {
  std::unordered_map<std::string_view, int> seen;
  for (int i = 0; i < static_cast<int>(names_.size()); ++i) {
    if (!valid_species_name(names_[i]))
      throw std::invalid_argument("invalid species name: '" + names_[i] + "'");
    if (!seen.emplace(names_[i], i).second)
      throw std::invalid_argument("duplicate species name: '" + names_[i] + "'");
  }
  const int n = species_count();
  for (const Reaction& r : reactions_) {
    for (const Complex* c : {&r.reactant, &r.product})
      for (const auto& [idx, coef] : c->coefficients()) {
        if (idx < 0 || idx >= n)
          throw std::invalid_argument("reaction references undeclared species index");
        if (coef < 1) throw std::invalid_argument("complex coefficient must be >= 1");
      }
    if (!(r.k_forward > 0)) throw std::invalid_argument("rate constant must be positive");
    if (r.reversible && !(r.k_backward > 0))
      throw std::invalid_argument("backward rate constant must be positive");
    if (r.reactant == r.product)
      throw std::invalid_argument("reaction has zero net change on all species");
  }
}

std::vector<Species> Network::species() const {
  std::vector<Species> out(names_.size());
  for (int i = 0; i < static_cast<int>(names_.size()); ++i) out[i] = {names_[i], i};
  return out;
}

int Network::species_index(std::string_view name) const {
  for (int i = 0; i < static_cast<int>(names_.size()); ++i)
    if (names_[i] == name) return i;
  return -1;
}

Eigen::MatrixXi Network::stoichiometric_matrix() const {
  Eigen::MatrixXi gamma = Eigen::MatrixXi::Zero(species_count(), reaction_count());
  for (int j = 0; j < reaction_count(); ++j) {
    for (const auto& [i, c] : reactions_[j].product.coefficients()) gamma(i, j) += c;
    for (const auto& [i, c] : reactions_[j].reactant.coefficients()) gamma(i, j) -= c;
  }
  return gamma;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class LineCursor {
 public:
  LineCursor(std::string_view line, int line_no) : line_(line), line_no_(line_no) {}

  void skip_ws() {
    while (pos_ < line_.size() && std::isspace(static_cast<unsigned char>(line_[pos_]))) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= line_.size();
  }
  char peek() {
    skip_ws();
    return pos_ < line_.size() ? line_[pos_] : '\0';
  }
  bool consume(std::string_view token) {
    skip_ws();
    if (line_.substr(pos_).starts_with(token)) {
      pos_ += token.size();
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, line_no_, static_cast<int>(pos_) + 1);
  }
  int column() const { return static_cast<int>(pos_) + 1; }
  int line_no() const { return line_no_; }

  // Unsigned decimal integer; returns false when the next token is not a digit.
  bool read_integer(long& value) {
    skip_ws();
    size_t start = pos_;
    while (pos_ < line_.size() && std::isdigit(static_cast<unsigned char>(line_[pos_]))) ++pos_;
    if (pos_ == start) return false;
    value = std::strtol(std::string(line_.substr(start, pos_ - start)).c_str(), nullptr, 10);
    return true;
  }

  bool read_identifier(std::string& out) {
    skip_ws();
    size_t start = pos_;
    if (pos_ < line_.size() &&
        (std::isalpha(static_cast<unsigned char>(line_[pos_])) || line_[pos_] == '_')) {
      ++pos_;
      while (pos_ < line_.size() && (std::isalnum(static_cast<unsigned char>(line_[pos_])) ||
                                     line_[pos_] == '_'))
        ++pos_;
    }
    if (pos_ == start) return false;
    out = std::string(line_.substr(start, pos_ - start));
    return true;
  }

  double read_number() {
    skip_ws();
    const std::string rest(line_.substr(pos_));
    char* end = nullptr;
    double v = std::strtod(rest.c_str(), &end);
    if (end == rest.c_str()) fail("expected a number");
    pos_ += static_cast<size_t>(end - rest.c_str());
    if (!std::isfinite(v)) fail("rate constant must be finite");
    return v;
  }

 private:
  std::string_view line_;
  size_t pos_ = 0;
  int line_no_;
};

class SpeciesTable {
 public:
  int intern(const std::string& name) {
    auto it = index_.find(name);
    if (it != index_.end()) return it->second;
    int idx = static_cast<int>(names_.size());
    names_.push_back(name);
    index_.emplace(name, idx);
    return idx;
  }
  std::vector<std::string> take() { return std::move(names_); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
};

Complex parse_complex(LineCursor& cur, SpeciesTable& table) {
  Complex c;
  // Leading '0' with no species following denotes the zero complex.
  for (bool first = true;; first = false) {
    long coeff = 1;
    bool have_int = cur.read_integer(coeff);
    std::string name;
    bool have_name = cur.read_identifier(name);
    if (!have_name) {
      if (have_int && coeff == 0 && first) {
        if (cur.peek() == '+') cur.fail("the zero complex cannot be combined with terms");
        return c;  // zero complex
      }
      cur.fail(have_int ? "expected species name after coefficient" : "expected a species term");
    }
    if (have_int && coeff < 1) cur.fail("stoichiometric coefficient must be >= 1");
    int idx = table.intern(name);
    if (c.coefficient(idx) != 0) cur.fail("duplicate species '" + name + "' in complex");
    c.add(idx, static_cast<int>(coeff));
    if (!cur.consume("+")) return c;
  }
}

double parse_rate_value(LineCursor& cur, std::string_view key) {
  std::string ident;
  if (!cur.read_identifier(ident) || ident != key)
    cur.fail("expected '" + std::string(key) + "'");
  if (!cur.consume("=")) cur.fail("expected '=' after '" + std::string(key) + "'");
  double v = cur.read_number();
  if (!(v > 0)) cur.fail("nonpositive rate constant");
  return v;
}

}  // namespace

Network parse_network(std::string_view text) {
  SpeciesTable table;
  std::vector<Reaction> reactions;

  int line_no = 0;
  size_t begin = 0;
  while (begin <= text.size()) {
    size_t end = text.find('\n', begin);
    std::string_view line =
        text.substr(begin, end == std::string_view::npos ? text.size() - begin : end - begin);
    ++line_no;
    begin = end == std::string_view::npos ? text.size() + 1 : end + 1;

    if (size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    LineCursor cur(line, line_no);
    if (cur.at_end()) continue;

    Reaction r;
    r.reactant = parse_complex(cur, table);
    const int arrow_col = cur.column();
    if (cur.consume("<->"))
      r.reversible = true;
    else if (cur.consume("->"))
      r.reversible = false;
    else
      cur.fail("expected '->' or '<->'");
    r.product = parse_complex(cur, table);
    if (!cur.consume(";")) cur.fail("expected ';' before rate constants");
    if (r.reversible) {
      r.k_forward = parse_rate_value(cur, "kf");
      if (!cur.consume(",")) cur.fail("expected ',' between kf and kr");
      r.k_backward = parse_rate_value(cur, "kr");
    } else {
      r.k_forward = parse_rate_value(cur, "k");
    }
    if (!cur.at_end()) cur.fail("unexpected trailing input");
    if (r.reactant == r.product)
      throw ParseError("reaction has zero net change on all species", line_no, arrow_col);
    reactions.push_back(std::move(r));
  }
  return Network(table.take(), std::move(reactions));
}

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

std::string complex_to_string(const Complex& c, const Network& net) {
  if (c.is_zero()) return "0";
  std::string out;
  for (const auto& [idx, coeff] : c.coefficients()) {
    if (!out.empty()) out += " + ";
    if (coeff != 1) out += std::to_string(coeff) + " ";
    out += net.species_name(idx);
  }
  return out;
}

}  // namespace

std::string serialize_network(const Network& net) {
  std::string out;
  for (const Reaction& r : net.reactions()) {
    out += complex_to_string(r.reactant, net);
    out += r.reversible ? " <-> " : " -> ";
    out += complex_to_string(r.product, net);
    out += " ; ";
    if (r.reversible)
      out += "kf = " + format_double(r.k_forward) + ", kr = " + format_double(r.k_backward);
    else
      out += "k = " + format_double(r.k_forward);
    out += "\n";
  }
  return out;
}

}  // namespace crnosc
