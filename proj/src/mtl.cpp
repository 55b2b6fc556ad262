#include "pidlab/mtl.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pidlab::mtl {

namespace {

// Kleene values; Unknown only arises inside online windows.
constexpr std::uint8_t False = 0;
constexpr std::uint8_t True = 1;
constexpr std::uint8_t Unknown = 2;

Formula make(Node node) { return Formula(std::make_shared<const Node>(std::move(node))); }

double signal_value(const Sample& s, Signal sig) {
  switch (sig) {
    case Signal::X: return s.x;
    case Signal::V: return s.v;
    case Signal::R: return s.r;
    case Signal::E: return s.e;
    case Signal::T: return s.t;
    case Signal::Mode: return static_cast<double>(s.mode);
  }
  return 0.0;
}

double term_value(const Sample& s, const Term& term) {
  const double value = signal_value(s, term.signal);
  return term.magnitude ? std::abs(value) : value;
}

bool compare(double lhs, Cmp cmp, double rhs) {
  switch (cmp) {
    case Cmp::Lt: return lhs < rhs;
    case Cmp::Le: return lhs <= rhs;
    case Cmp::Gt: return lhs > rhs;
    case Cmp::Ge: return lhs >= rhs;
    case Cmp::Eq: return lhs == rhs;
  }
  return false;
}

constexpr std::size_t kNoEnd = static_cast<std::size_t>(-1);

// Evaluates a node at every position of samples [begin, end). With `open_end`
// set, intervals running past `end` are unresolved rather than finite-trace.
class Evaluator {
 public:
  Evaluator(const Trajectory& trace, std::size_t begin, std::size_t end, bool open_end)
      : trace_(trace), begin_(begin), len_(end - begin), open_end_(open_end) {
    dt_ = trace.dt > 0.0 ? trace.dt : 1.0;
  }

  std::vector<std::uint8_t> run(const Node& node) const {
    switch (node.op) {
      case Op::True: return std::vector<std::uint8_t>(len_, True);
      case Op::False: return std::vector<std::uint8_t>(len_, False);
      case Op::Atom: return atom(node.atom);
      case Op::Not: {
        auto values = run(node.children[0].node());
        for (auto& v : values) v = v == Unknown ? Unknown : static_cast<std::uint8_t>(v ^ 1);
        return values;
      }
      case Op::And: return fold(node, False);
      case Op::Or: return fold(node, True);
      case Op::Implies: {
        auto lhs = run(node.children[0].node());
        auto rhs = run(node.children[1].node());
        for (std::size_t k = 0; k < len_; ++k) {
          const std::uint8_t a = lhs[k] == Unknown ? Unknown : static_cast<std::uint8_t>(lhs[k] ^ 1);
          lhs[k] = combine(a, rhs[k], True);
        }
        return lhs;
      }
      case Op::Globally: return temporal(node, False);
      case Op::Eventually: return temporal(node, True);
    }
    return {};
  }

 private:
  // `dominant` is the value that decides the connective (False for and).
  static std::uint8_t combine(std::uint8_t a, std::uint8_t b, std::uint8_t dominant) {
    if (a == dominant || b == dominant) return dominant;
    if (a == Unknown || b == Unknown) return Unknown;
    return a;
  }

  std::vector<std::uint8_t> fold(const Node& node, std::uint8_t dominant) const {
    std::vector<std::uint8_t> acc(len_, static_cast<std::uint8_t>(dominant ^ 1));
    for (const Formula& child : node.children) {
      const auto values = run(child.node());
      for (std::size_t k = 0; k < len_; ++k) acc[k] = combine(acc[k], values[k], dominant);
    }
    return acc;
  }

  std::vector<std::uint8_t> atom(const Atom& a) const {
    std::vector<std::uint8_t> out(len_);
    for (std::size_t k = 0; k < len_; ++k) {
      const Sample& s = trace_.samples[begin_ + k];
      if (a.against_previous) {
        // The first sample has no predecessor and is outside the atom's domain.
        if (k == 0) {
          out[k] = True;
          continue;
        }
        const double rhs = term_value(trace_.samples[begin_ + k - 1], a.prev_term) + a.constant;
        out[k] = compare(term_value(s, a.lhs), a.cmp, rhs) ? True : False;
      } else {
        out[k] = compare(term_value(s, a.lhs), a.cmp, a.constant) ? True : False;
      }
    }
    return out;
  }

  // Globally looks for a False witness, Eventually for a True one.
  std::vector<std::uint8_t> temporal(const Node& node, std::uint8_t witness) const {
    const auto child = run(node.children[0].node());
    // next_[v][j]: first index >= j holding value v, len_ if none.
    std::vector<std::size_t> next_witness(len_ + 1, len_), next_unknown(len_ + 1, len_);
    for (std::size_t j = len_; j-- > 0;) {
      next_witness[j] = child[j] == witness ? j : next_witness[j + 1];
      next_unknown[j] = child[j] == Unknown ? j : next_unknown[j + 1];
    }

    const std::size_t lo = static_cast<std::size_t>(std::ceil(node.interval.lo / dt_ - 1e-9));
    const std::size_t hi = node.interval.bounded()
                               ? static_cast<std::size_t>(std::floor(node.interval.hi / dt_ + 1e-9))
                               : kNoEnd;
    const std::uint8_t vacuous = witness ^ 1;

    std::vector<std::uint8_t> out(len_);
    for (std::size_t k = 0; k < len_; ++k) {
      const std::size_t first = k + lo;
      const bool truncated = hi == kNoEnd || k + hi >= len_;
      if (first >= len_) {
        out[k] = (truncated && open_end_) ? Unknown : vacuous;
        continue;
      }
      const std::size_t last = truncated ? len_ - 1 : k + hi;
      if (next_witness[first] <= last) {
        out[k] = witness;
      } else if (next_unknown[first] <= last || (truncated && open_end_)) {
        out[k] = Unknown;
      } else {
        out[k] = vacuous;
      }
    }
    return out;
  }

  const Trajectory& trace_;
  std::size_t begin_;
  std::size_t len_;
  bool open_end_;
  double dt_;
};

std::uint8_t evaluate_at_start(const Formula& phi, const Trajectory& trace, std::size_t begin,
                               std::size_t end, bool open_end) {
  return Evaluator(trace, begin, end, open_end).run(phi.node())[0];
}

void require_non_empty(const Trajectory& trace) {
  if (trace.empty()) throw std::invalid_argument("MTL evaluation needs a non-empty trajectory");
}

}  // namespace

Formula::Formula() : node_(std::make_shared<const Node>()) {}

Formula truth(bool value) {
  Node n;
  n.op = value ? Op::True : Op::False;
  return make(std::move(n));
}

Formula atom(Term lhs, Cmp cmp, double constant) {
  Node n;
  n.op = Op::Atom;
  n.atom = Atom{lhs, cmp, false, constant, {}};
  return make(std::move(n));
}

Formula atom_prev(Term lhs, Cmp cmp, Term prev, double offset) {
  Node n;
  n.op = Op::Atom;
  n.atom = Atom{lhs, cmp, true, offset, prev};
  return make(std::move(n));
}

Formula negate(Formula f) {
  Node n;
  n.op = Op::Not;
  n.children = {std::move(f)};
  return make(std::move(n));
}

Formula conj(std::vector<Formula> fs) {
  if (fs.empty()) return truth(true);
  Node n;
  n.op = Op::And;
  n.children = std::move(fs);
  return make(std::move(n));
}

Formula disj(std::vector<Formula> fs) {
  if (fs.empty()) return truth(false);
  Node n;
  n.op = Op::Or;
  n.children = std::move(fs);
  return make(std::move(n));
}

Formula implies(Formula lhs, Formula rhs) {
  Node n;
  n.op = Op::Implies;
  n.children = {std::move(lhs), std::move(rhs)};
  return make(std::move(n));
}

namespace {
Formula temporal_node(Op op, Formula f, Interval interval) {
  if (!(interval.lo >= 0.0) || !(interval.hi >= interval.lo)) {
    throw std::invalid_argument("temporal interval needs 0 <= lo <= hi");
  }
  Node n;
  n.op = op;
  n.interval = interval;
  n.children = {std::move(f)};
  return make(std::move(n));
}
}  // namespace

Formula globally(Formula f, Interval interval) {
  return temporal_node(Op::Globally, std::move(f), interval);
}

Formula eventually(Formula f, Interval interval) {
  return temporal_node(Op::Eventually, std::move(f), interval);
}

Formula labeled(std::string name, Formula f) {
  Node n = f.node();
  n.label = std::move(name);
  return make(std::move(n));
}

bool eval_offline(const Formula& phi, const Trajectory& trace) {
  require_non_empty(trace);
  return evaluate_at_start(phi, trace, 0, trace.size(), false) == True;
}

bool eval_online(const Formula& phi, const Trajectory& trace, std::size_t window) {
  if (window < 2) throw std::invalid_argument("online window must be >= 2 samples");
  require_non_empty(trace);
  const std::size_t n = trace.size();
  if (window >= n) return eval_offline(phi, trace);

  const std::size_t hop = window / 2;
  for (std::size_t start = 0;; start += hop) {
    if (start + window > n) start = n - window;
    const bool open_end = start + window < n;
    if (evaluate_at_start(phi, trace, start, start + window, open_end) == False) return false;
    if (start + window == n) break;
  }
  return true;
}

Formula mode_spec(const Mission& mission) {
  const MissionParams& p = mission.params;
  const auto after = [](double t0) { return atom(sig(Signal::T), Cmp::Gt, t0); };

  switch (mission.mode) {
    case MissionMode::Hold:
      return conj({labeled("hold.deviation",
                           globally(implies(after(p.settle_deadline),
                                            atom(mag(Signal::E), Cmp::Lt, p.hold_tol))))});
    case MissionMode::Brake:
      return conj({labeled("brake.stopped",
                           globally(implies(after(p.brake_at + p.brake_deadline),
                                            atom(mag(Signal::V), Cmp::Lt, p.v_stop))))});
    case MissionMode::CircleTrack: {
      std::vector<Formula> clauses{
          labeled("circle.tracking", globally(implies(after(p.settle_deadline),
                                                      atom(mag(Signal::E), Cmp::Lt, p.circle_tol))))};
      if (p.lap_check) {
        // Every full lap that fits in the mission must reach the far side.
        const double period = 1.0 / p.circle_freq;
        const Formula in_laps =
            conj({after(p.settle_deadline),
                  atom(sig(Signal::T), Cmp::Le, mission.duration - period)});
        const Formula far_side =
            atom(sig(Signal::X), Cmp::Ge, p.lap_fraction * p.circle_radius);
        clauses.push_back(labeled(
            "circle.lap", globally(implies(in_laps, eventually(far_side, {0.0, period})))));
      }
      return conj(std::move(clauses));
    }
    case MissionMode::ReturnHome: {
      const Formula returning =
          conj({atom(sig(Signal::Mode), Cmp::Eq, static_cast<double>(MissionMode::ReturnHome)),
                atom(sig(Signal::T), Cmp::Ge, p.return_start)});
      const Formula non_increasing =
          atom_prev(mag(Signal::E), Cmp::Le, mag(Signal::E), p.mono_eps);
      return conj(
          {labeled("return.home", globally(implies(after(p.settle_deadline),
                                                   atom(mag(Signal::X), Cmp::Lt, p.home_radius)))),
           labeled("return.monotone", globally(implies(returning, non_increasing)))});
    }
  }
  return truth(true);
}

std::string first_violation(const Formula& phi, const Trajectory& trace, std::size_t window) {
  const auto holds = [&](const Formula& f) {
    return window == 0 ? eval_offline(f, trace) : eval_online(f, trace, window);
  };
  if (phi.op() == Op::And) {
    for (const Formula& clause : phi.children()) {
      if (!holds(clause)) return clause.label().empty() ? to_string(clause) : clause.label();
    }
    return {};
  }
  if (holds(phi)) return {};
  return phi.label().empty() ? to_string(phi) : phi.label();
}

}  // namespace pidlab::mtl
