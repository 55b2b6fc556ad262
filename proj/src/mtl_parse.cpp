#include <cctype>
#include <cmath>
#include <charconv>
#include <optional>

#include "pidlab/mtl.hpp"

namespace pidlab::mtl {

namespace {

struct Token {
  enum Kind { Open, Close, Word, End } kind;
  std::string_view text;
  std::size_t offset;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ >= src_.size()) return {Token::End, {}, pos_};
    const std::size_t start = pos_;
    if (src_[pos_] == '(') return {Token::Open, src_.substr(pos_++, 1), start};
    if (src_[pos_] == ')') return {Token::Close, src_.substr(pos_++, 1), start};
    while (pos_ < src_.size() && src_[pos_] != '(' && src_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
    return {Token::Word, src_.substr(start, pos_ - start), start};
  }

  Token peek() {
    const std::size_t saved = pos_;
    Token t = next();
    pos_ = saved;
    return t;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
};

std::optional<double> as_number(std::string_view word) {
  double value = 0.0;
  const char* first = word.data();
  const char* last = word.data() + word.size();
  if (!word.empty() && word.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

std::optional<Signal> as_signal(std::string_view word) {
  if (word == "x") return Signal::X;
  if (word == "v") return Signal::V;
  if (word == "r") return Signal::R;
  if (word == "e") return Signal::E;
  if (word == "t") return Signal::T;
  if (word == "mode") return Signal::Mode;
  return std::nullopt;
}

std::optional<Cmp> as_cmp(std::string_view word) {
  if (word == "<") return Cmp::Lt;
  if (word == "<=") return Cmp::Le;
  if (word == ">") return Cmp::Gt;
  if (word == ">=") return Cmp::Ge;
  if (word == "=") return Cmp::Eq;
  return std::nullopt;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) {}

  Formula parse_all() {
    Formula f = formula();
    const Token t = lex_.next();
    if (t.kind != Token::End) throw ParseError("trailing input", t.offset);
    return f;
  }

 private:
  Token expect(Token::Kind kind, const char* what) {
    Token t = lex_.next();
    if (t.kind != kind) throw ParseError(std::string("expected ") + what, t.offset);
    return t;
  }

  double number() {
    const Token t = expect(Token::Word, "number");
    auto value = as_number(t.text);
    if (!value) throw ParseError("expected number, got '" + std::string(t.text) + "'", t.offset);
    return *value;
  }

  Term term() {
    Token t = lex_.next();
    if (t.kind == Token::Word) {
      if (auto s = as_signal(t.text)) return {*s, false};
      throw ParseError("unknown signal '" + std::string(t.text) + "'", t.offset);
    }
    if (t.kind != Token::Open) throw ParseError("expected signal", t.offset);
    const Token head = expect(Token::Word, "abs");
    if (head.text != "abs") throw ParseError("expected (abs SIGNAL)", head.offset);
    const Token name = expect(Token::Word, "signal");
    auto s = as_signal(name.text);
    if (!s || *s == Signal::T || *s == Signal::Mode) {
      throw ParseError("abs applies to x, v, r or e", name.offset);
    }
    expect(Token::Close, "')'");
    return {*s, true};
  }

  Formula comparison(Cmp cmp) {
    const Term lhs = term();
    Token t = lex_.peek();
    if (t.kind == Token::Open) {
      lex_.next();
      const Token head = expect(Token::Word, "prev");
      if (head.text != "prev") throw ParseError("expected (prev TERM [OFFSET])", head.offset);
      const Term prev = term();
      double offset = 0.0;
      if (lex_.peek().kind == Token::Word) offset = number();
      expect(Token::Close, "')'");
      expect(Token::Close, "')'");
      return atom_prev(lhs, cmp, prev, offset);
    }
    t = expect(Token::Word, "constant");
    double rhs = 0.0;
    if (auto mode = parse_mission_mode(t.text)) {
      rhs = static_cast<double>(*mode);
    } else if (auto value = as_number(t.text)) {
      rhs = *value;
    } else {
      throw ParseError("expected constant, got '" + std::string(t.text) + "'", t.offset);
    }
    expect(Token::Close, "')'");
    return atom(lhs, cmp, rhs);
  }

  Formula temporal(bool always) {
    Interval interval;
    if (lex_.peek().kind == Token::Word) {
      const std::size_t at = lex_.peek().offset;
      interval.lo = number();
      interval.hi = number();
      if (!(interval.lo >= 0.0 && interval.hi >= interval.lo)) {
        throw ParseError("interval needs 0 <= lo <= hi", at);
      }
    }
    Formula body = formula();
    expect(Token::Close, "')'");
    return always ? globally(std::move(body), interval) : eventually(std::move(body), interval);
  }

  std::vector<Formula> operands() {
    std::vector<Formula> fs;
    while (lex_.peek().kind != Token::Close) {
      if (lex_.peek().kind == Token::End) throw ParseError("unbalanced '('", lex_.peek().offset);
      fs.push_back(formula());
    }
    lex_.next();
    return fs;
  }

  Formula formula() {
    const Token t = lex_.next();
    if (t.kind == Token::Word) {
      if (t.text == "true") return truth(true);
      if (t.text == "false") return truth(false);
      throw ParseError("expected formula, got '" + std::string(t.text) + "'", t.offset);
    }
    if (t.kind != Token::Open) throw ParseError("expected '('", t.offset);
    const Token head = expect(Token::Word, "operator");
    const std::string_view op = head.text;

    if (auto cmp = as_cmp(op)) return comparison(*cmp);
    if (op == "G") return temporal(true);
    if (op == "F") return temporal(false);
    if (op == "not" || op == "!") {
      Formula f = formula();
      expect(Token::Close, "')'");
      return negate(std::move(f));
    }
    if (op == "and" || op == "or") {
      auto fs = operands();
      if (fs.empty()) throw ParseError("empty connective", head.offset);
      return op == "and" ? conj(std::move(fs)) : disj(std::move(fs));
    }
    if (op == "=>") {
      Formula lhs = formula();
      Formula rhs = formula();
      expect(Token::Close, "')'");
      return implies(std::move(lhs), std::move(rhs));
    }
    if (op == "label") {
      const Token name = expect(Token::Word, "label name");
      Formula f = formula();
      expect(Token::Close, "')'");
      return labeled(std::string(name.text), std::move(f));
    }
    throw ParseError("unknown operator '" + std::string(op) + "'", head.offset);
  }

  Lexer lex_;
};

std::string number_text(double value) {
  if (value == kUnbounded) return "inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string_view signal_text(Signal s) {
  switch (s) {
    case Signal::X: return "x";
    case Signal::V: return "v";
    case Signal::R: return "r";
    case Signal::E: return "e";
    case Signal::T: return "t";
    case Signal::Mode: return "mode";
  }
  return "?";
}

std::string term_text(const Term& term) {
  if (term.magnitude) return "(abs " + std::string(signal_text(term.signal)) + ")";
  return std::string(signal_text(term.signal));
}

std::string_view cmp_text(Cmp cmp) {
  switch (cmp) {
    case Cmp::Lt: return "<";
    case Cmp::Le: return "<=";
    case Cmp::Gt: return ">";
    case Cmp::Ge: return ">=";
    case Cmp::Eq: return "=";
  }
  return "?";
}

void write(std::string& out, const Formula& f);

void write_children(std::string& out, const Formula& f) {
  for (const Formula& child : f.children()) {
    out += ' ';
    write(out, child);
  }
}

void write_unlabeled(std::string& out, const Formula& f) {
  const Node& n = f.node();
  switch (n.op) {
    case Op::True: out += "true"; return;
    case Op::False: out += "false"; return;
    case Op::Atom: {
      const Atom& a = n.atom;
      out += '(';
      out += cmp_text(a.cmp);
      out += ' ';
      out += term_text(a.lhs);
      out += ' ';
      if (a.against_previous) {
        out += "(prev " + term_text(a.prev_term);
        if (a.constant != 0.0) out += ' ' + number_text(a.constant);
        out += ')';
      } else if (a.lhs.signal == Signal::Mode && !a.lhs.magnitude && a.constant >= 0.0 &&
                 a.constant <= 3.0 && a.constant == std::floor(a.constant)) {
        out += to_string(static_cast<MissionMode>(static_cast<int>(a.constant)));
      } else {
        out += number_text(a.constant);
      }
      out += ')';
      return;
    }
    case Op::Not: out += "(not"; break;
    case Op::And: out += "(and"; break;
    case Op::Or: out += "(or"; break;
    case Op::Implies: out += "(=>"; break;
    case Op::Globally:
    case Op::Eventually:
      out += n.op == Op::Globally ? "(G" : "(F";
      if (n.interval.lo != 0.0 || n.interval.bounded()) {
        out += ' ' + number_text(n.interval.lo) + ' ' + number_text(n.interval.hi);
      }
      break;
  }
  write_children(out, f);
  out += ')';
}

void write(std::string& out, const Formula& f) {
  if (f.label().empty()) {
    write_unlabeled(out, f);
    return;
  }
  out += "(label " + f.label() + ' ';
  write_unlabeled(out, f);
  out += ')';
}

}  // namespace

Formula parse(std::string_view text) { return Parser(text).parse_all(); }

std::string to_string(const Formula& f) {
  std::string out;
  write(out, f);
  return out;
}

}  // namespace pidlab::mtl
