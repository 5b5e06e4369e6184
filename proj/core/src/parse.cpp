#include "obda/parse.hpp"

#include <cctype>

namespace obda {
namespace detail {

int Scanner::col() const { return static_cast<int>(pos_ - line_start_) + 1; }

void Scanner::fail(const std::string &msg) const {
  throw ParseError(msg, line_, col());
}

void Scanner::advance() {
  if (text_[pos_] == '\n') {
    ++line_;
    line_start_ = pos_ + 1;
  }
  ++pos_;
}

void Scanner::skip_ws() {
  while (!eof() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                    text_[pos_] == '\r'))
    advance();
}

bool Scanner::consume(char c) {
  skip_ws();
  if (peek() != c) return false;
  advance();
  return true;
}

bool Scanner::consume(const std::string &s) {
  skip_ws();
  if (text_.compare(pos_, s.size(), s) != 0) return false;
  for (std::size_t i = 0; i < s.size(); ++i) advance();
  return true;
}

void Scanner::expect(char c) {
  if (!consume(c)) fail(std::string("expected '") + c + "'");
}

void Scanner::expect(const std::string &s) {
  if (!consume(s)) fail("expected '" + s + "'");
}

bool Scanner::at_newline() {
  skip_ws();
  return eof() || peek() == '\n' || peek() == '#';
}

void Scanner::consume_newlines() {
  while (!eof()) {
    skip_ws();
    if (peek() == '\n') {
      advance();
    } else if (peek() == '#') {
      while (!eof() && peek() != '\n') advance();
    } else {
      break;
    }
  }
}

std::string Scanner::ident() {
  skip_ws();
  if (eof() || !(std::isalpha(static_cast<unsigned char>(peek())) ||
                 peek() == '_'))
    fail("expected identifier");
  std::string s;
  while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                    peek() == '_' || peek() == '.'))
  {
    s += peek();
    advance();
  }
  return s;
}

Term Scanner::scalar_term() {
  skip_ws();
  char c = peek();
  if (c == '\'') {
    advance();
    std::string s;
    while (!eof() && peek() != '\'') {
      s += peek();
      advance();
    }
    if (eof()) fail("unterminated string constant");
    advance();
    return Term::constant(Value(std::move(s)));
  }
  if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
    std::string s;
    if (c == '-') {
      s += c;
      advance();
    }
    if (eof() || !std::isdigit(static_cast<unsigned char>(peek())))
      fail("expected number");
    while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
      s += peek();
      advance();
    }
    return Term::constant(Value(static_cast<std::int64_t>(std::stoll(s))));
  }
  return Term::var(ident());
}

Term Scanner::term() {
  skip_ws();
  char c = peek();
  if (c == '\'' || c == '-' || std::isdigit(static_cast<unsigned char>(c)))
    return scalar_term();
  std::string name = ident();
  skip_ws();
  if (peek() != '(') return Term::var(name);
  advance();
  std::vector<Term> args;
  if (!consume(')')) {
    do {
      args.push_back(scalar_term());
    } while (consume(','));
    expect(')');
  }
  return Term::fn(std::move(name), std::move(args));
}

}  // namespace detail

namespace {

Atom parse_atom(detail::Scanner &sc) {
  Atom a;
  a.predicate = sc.ident();
  sc.expect('(');
  if (!sc.consume(')')) {
    do {
      a.args.push_back(sc.term());
    } while (sc.consume(','));
    sc.expect(')');
  }
  return a;
}

CQ parse_rule(detail::Scanner &sc) {
  CQ cq;
  Atom head = parse_atom(sc);
  cq.name = head.predicate;
  cq.head = head.args;
  sc.expect(":-");
  do {
    cq.body.push_back(parse_atom(sc));
  } while (sc.consume(','));
  return cq;
}

}  // namespace

UCQ parse_query(const std::string &text) {
  detail::Scanner sc(text);
  UCQ q;
  sc.consume_newlines();
  while (!sc.eof()) {
    q.disjuncts.push_back(parse_rule(sc));
    while (sc.consume(';')) q.disjuncts.push_back(parse_rule(sc));
    if (!sc.at_newline()) sc.fail("trailing input after rule");
    sc.consume_newlines();
  }
  if (q.disjuncts.empty())
    throw ParseError("no rules found", 1, 1);
  validate(q);
  return q;
}

}  // namespace obda
