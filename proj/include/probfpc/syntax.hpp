#pragma once

// Concrete syntax for ProbFPC source files (.pfpc).
//
//   program  ::= { "type" Name "=" type ";" | "def" name "=" term ";" } term
//   type     ::= Unit | Nat | Bool | type * type | type + type | type -> type
//              | mu X. type | X | ( type )                    (also ×, →, μ)
//   term     ::= fun (x : type) … => term | let x = term in term
//              | case [[type]] term of inl pat => term | inr pat => term
//              | ifz term then term else term | if term then term else term
//              | operand { operand }
//   operand  ::= suc op | pred op | fst op | snd op | unfold op
//              | inl[type] op | inr[type] op | fold[type] op | choice p op op
//              | * | numeral | x | true | false | Y[type, type] | ( term ) | ( term , term )
//   pat      ::= x | _ | ( x , y )
//
// Definitions are expanded before typechecking. `-- …` starts a comment.

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "probfpc/lang.hpp"

namespace probfpc {

class ParseError : public std::runtime_error {
 public:
  ParseError(Loc loc, const std::string& msg) : std::runtime_error(loc.str() + ": " + msg), loc_(loc) {}
  [[nodiscard]] Loc loc() const { return loc_; }

 private:
  Loc loc_;
};

struct Program {
  std::map<std::string, Ty> types;
  std::map<std::string, Term> defs;
  Term main;
};

// Definitions in `prelude` are visible to `text`; errors are located in `text`.
Program parse_program(std::string_view text, const Program* prelude = nullptr);
Term parse_term(std::string_view text, const Program* prelude = nullptr);
Ty parse_type(std::string_view text, const Program* prelude = nullptr);

}  // namespace probfpc
