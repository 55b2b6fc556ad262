#pragma once

// Discrete-time Metric Temporal Logic over sampled trajectories.
//
// Formulas are immutable trees. Offline evaluation checks the whole trace
// with finite-trace semantics: Globally over a truncated interval quantifies
// over the samples that exist, Eventually that is not met inside the trace
// is false. Online evaluation slides a fixed window over the trace and only
// reports violations that can be settled inside a window.
//
// Textual syntax (prefix, one form per node):
//
//   true | false
//   (not F)  (and F...)  (or F...)  (=> F F)
//   (G F)  (F F)  (G lo hi F)  (F lo hi F)      lo, hi in seconds
//   (CMP TERM RHS)      CMP is one of < <= > >= =
//   (label NAME F)      names a clause; reported when it is violated
//
//   TERM := x | v | r | e | t | mode | (abs x|v|r|e)
//   RHS  := NUMBER | hold | brake | circle_track | return_home
//         | (prev TERM [OFFSET])     TERM one sample earlier, plus OFFSET

#include <cstddef>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pidlab/plant.hpp"

namespace pidlab::mtl {

enum class Signal : std::uint8_t { X, V, R, E, T, Mode };
enum class Cmp : std::uint8_t { Lt, Le, Gt, Ge, Eq };

struct Term {
  Signal signal = Signal::X;
  bool magnitude = false;  // |signal|

  friend bool operator==(const Term&, const Term&) = default;
};

struct Atom {
  Term lhs{};
  Cmp cmp = Cmp::Lt;
  bool against_previous = false;  // rhs = previous(prev_term) + offset
  double constant = 0.0;          // rhs when !against_previous, else the offset
  Term prev_term{};
};

enum class Op : std::uint8_t { Atom, True, False, Not, And, Or, Implies, Globally, Eventually };

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

struct Interval {
  double lo = 0.0;
  double hi = kUnbounded;

  bool bounded() const { return hi != kUnbounded; }
};

class Formula;

struct Node {
  Op op = Op::True;
  Atom atom{};
  Interval interval{};
  std::vector<Formula> children;
  std::string label;
};

class Formula {
 public:
  Formula();  // true
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  const Node& node() const { return *node_; }
  Op op() const { return node_->op; }
  const std::vector<Formula>& children() const { return node_->children; }
  const std::string& label() const { return node_->label; }

 private:
  std::shared_ptr<const Node> node_;
};

// Builders.
Formula truth(bool value);
Formula atom(Term lhs, Cmp cmp, double constant);
Formula atom_prev(Term lhs, Cmp cmp, Term prev, double offset);
Formula negate(Formula f);
Formula conj(std::vector<Formula> fs);
Formula disj(std::vector<Formula> fs);
Formula implies(Formula lhs, Formula rhs);
Formula globally(Formula f, Interval interval = {});
Formula eventually(Formula f, Interval interval = {});
Formula labeled(std::string name, Formula f);

inline Term sig(Signal s) { return {s, false}; }
inline Term mag(Signal s) { return {s, true}; }

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

Formula parse(std::string_view text);
std::string to_string(const Formula& f);

/// Verif(trace, phi). Throws std::invalid_argument on an empty trace.
bool eval_offline(const Formula& phi, const Trajectory& trace);

/// Sliding-window check: false iff some window of `window` samples settles a
/// violation. Windows hop by window/2 samples, and the last one is aligned to
/// the end of the trace. A window >= trace length degenerates to eval_offline.
/// Throws std::invalid_argument if window < 2 or the trace is empty.
bool eval_online(const Formula& phi, const Trajectory& trace, std::size_t window);

/// Predefined expected behavior of a mission; top-level clauses are labeled.
Formula mode_spec(const Mission& mission);

/// Label (or text) of the first top-level conjunct that fails, empty if none.
std::string first_violation(const Formula& phi, const Trajectory& trace, std::size_t window = 0);

}  // namespace pidlab::mtl
