#ifndef CRNOSC_NETWORK_HPP
#define CRNOSC_NETWORK_HPP

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace crnosc {

/// Thrown by parse_network with 1-based line/column of the offending token.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line, int column)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ")"),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct Species {
  std::string name;  // [A-Za-z_][A-Za-z0-9_]*
  int index = 0;     // position in the network's species ordering
};

/// Formal sum of species with positive integer coefficients.
/// The empty map is the zero complex "0".
class Complex {
 public:
  Complex() = default;

  /// Adds `count` to the coefficient of `species`; count must be >= 1.
  void add(int species, int count);
  int coefficient(int species) const;
  bool is_zero() const { return coeffs_.empty(); }
  const std::map<int, int>& coefficients() const { return coeffs_; }

  friend bool operator==(const Complex&, const Complex&) = default;

 private:
  std::map<int, int> coeffs_;  // species index -> coefficient >= 1
};

struct Reaction {
  Complex reactant;
  Complex product;
  bool reversible = false;
  double k_forward = 0.0;
  double k_backward = 0.0;  // meaningful iff reversible

  friend bool operator==(const Reaction&, const Reaction&) = default;
};

/// An immutable mass-action reaction network: ordered species plus reactions.
/// Reversible reactions contribute a single column to the stoichiometric
/// matrix (forward orientation, net rate v_f - v_b).
class Network {
 public:
  Network() = default;
  /// Validates invariants: unique nonempty names, declared species only,
  /// positive rate constants, nonzero net change per reaction.
  Network(std::vector<std::string> species_names, std::vector<Reaction> reactions);

  int species_count() const { return static_cast<int>(names_.size()); }
  int reaction_count() const { return static_cast<int>(reactions_.size()); }
  const std::vector<std::string>& species_names() const { return names_; }
  const std::string& species_name(int i) const { return names_.at(i); }
  std::vector<Species> species() const;
  const std::vector<Reaction>& reactions() const { return reactions_; }

  /// Index of a species by name, or -1 when absent.
  int species_index(std::string_view name) const;

  /// n x r0 integer matrix; column j = product - reactant of reaction j.
  Eigen::MatrixXi stoichiometric_matrix() const;

  friend bool operator==(const Network&, const Network&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<Reaction> reactions_;
};

/// Parses the plain-text reaction format:
///   line  := complex ('->' | '<->') complex ';' rates
///   complex := '0' | term ('+' term)*        term := [integer] species
///   rates := 'k' '=' number | 'kf' '=' number ',' 'kr' '=' number
/// '#' starts a comment; whitespace is insignificant. Species are ordered by
/// first appearance.
Network parse_network(std::string_view text);

/// Inverse of parse_network up to whitespace; parse(serialize(net)) == net.
std::string serialize_network(const Network& net);

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double value);

}  // namespace crnosc

#endif
