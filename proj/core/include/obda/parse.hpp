#pragma once

#include <string>
#include <vector>

#include "obda/ir.hpp"

namespace obda {

/// Parse the rule grammar:
///   head(vars) :- Atom, Atom, ...
/// one rule per line; disjuncts separated by ';' or by repeating the head
/// line. Functional terms are written f(x,y); constants are integers or
/// single-quoted strings. '#' starts a line comment.
UCQ parse_query(const std::string &text);

namespace detail {

/// Minimal hand-rolled scanner shared by the query and mapping parsers.
class Scanner {
 public:
  explicit Scanner(const std::string &text) : text_(text) {}

  void skip_ws();            // spaces and tabs; not newlines
  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return eof() ? '\0' : text_[pos_]; }
  bool consume(char c);
  bool consume(const std::string &s);
  void expect(char c);
  void expect(const std::string &s);
  bool at_newline();
  void consume_newlines();   // newlines and comments
  std::string ident();       // [A-Za-z_][A-Za-z0-9_.]*
  Term term();               // ident | functional | constant
  Term scalar_term();        // variable or constant (no functional)
  [[noreturn]] void fail(const std::string &msg) const;

  int line() const { return line_; }
  int col() const;

 private:
  void advance();
  const std::string &text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::size_t line_start_ = 0;
};

}  // namespace detail
}  // namespace obda
