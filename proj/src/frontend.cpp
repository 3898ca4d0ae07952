#include "regmod/frontend.hpp"

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace regmod {

namespace {

std::string describe(const SourceSpan& span) {
  return std::to_string(span.line) + ":" + std::to_string(span.column);
}

}  // namespace

ParseError::ParseError(Kind kind, SourceSpan span, const std::string& message, std::vector<std::string> expected)
    : std::runtime_error(describe(span) + ": " + message +
                         [&] {
                           if (expected.empty()) return std::string();
                           std::string s = " (expected ";
                           for (std::size_t i = 0; i < expected.size(); ++i)
                             s += (i ? (i + 1 == expected.size() ? " or " : ", ") : "") + expected[i];
                           return s + ")";
                         }()),
      kind_(kind),
      span_(span),
      expected_(std::move(expected)) {}

namespace {

struct SExpr {
  bool is_list = false;
  bool quoted = false;  // |symbol|
  std::string text;
  std::vector<SExpr> items;
  SourceSpan span;

  bool is_symbol(std::string_view s) const { return !is_list && !quoted && text == s; }
  bool is_symbol() const { return !is_list; }
};

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  /// Next top-level expression, or nullopt at end of input.
  std::optional<SExpr> next() {
    skip_blank();
    if (pos_ >= text_.size()) return std::nullopt;
    return read();
  }

  SourceSpan here() const { return {pos_, pos_, line_, col_}; }

 private:
  char peek() const { return text_[pos_]; }

  void bump() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_blank() {
    while (pos_ < text_.size()) {
      char c = peek();
      if (c == ';') {
        while (pos_ < text_.size() && peek() != '\n') bump();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        bump();
      } else {
        break;
      }
    }
  }

  SExpr read() {
    SExpr e;
    e.span = here();
    char c = peek();
    if (c == ')') throw ParseError(ParseError::Kind::Syntax, close_span(e.span), "unexpected ')'", {"'('", "symbol"});
    if (c == '(') {
      e.is_list = true;
      bump();
      while (true) {
        skip_blank();
        if (pos_ >= text_.size())
          throw ParseError(ParseError::Kind::Syntax, close_span(e.span), "unterminated list", {"')'"});
        if (peek() == ')') {
          bump();
          break;
        }
        e.items.push_back(read());
      }
    } else if (c == '|') {
      e.quoted = true;
      bump();
      std::size_t begin = pos_;
      while (pos_ < text_.size() && peek() != '|') bump();
      if (pos_ >= text_.size())
        throw ParseError(ParseError::Kind::Syntax, close_span(e.span), "unterminated quoted symbol", {"'|'"});
      e.text = std::string(text_.substr(begin, pos_ - begin));
      bump();
    } else if (c == '"') {
      throw ParseError(ParseError::Kind::Syntax, close_span(e.span), "string literals are not supported");
    } else {
      std::size_t begin = pos_;
      while (pos_ < text_.size()) {
        char d = peek();
        if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == ';' || d == '|' || d == '"')
          break;
        bump();
      }
      e.text = std::string(text_.substr(begin, pos_ - begin));
    }
    e.span.end = pos_;
    return e;
  }

  SourceSpan close_span(SourceSpan s) const {
    s.end = std::max(s.start, pos_);
    return s;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

[[noreturn]] void syntax(const SExpr& at, const std::string& msg, std::vector<std::string> expected = {}) {
  throw ParseError(ParseError::Kind::Syntax, at.span, msg, std::move(expected));
}

const std::string& symbol(const SExpr& e, const char* what) {
  if (e.is_list) syntax(e, std::string("expected ") + what, {what});
  return e.text;
}

class Interpreter {
 public:
  Problem problem;
  std::vector<SourceSpan> clause_spans;

  /// Returns false on (check-sat).
  bool command(const SExpr& e) {
    if (!e.is_list || e.items.empty() || e.items[0].is_list)
      syntax(e, "expected a command", {"(declare-datatypes ...)", "(declare-fun ...)", "(assert ...)", "(check-sat)"});
    const std::string& head = e.items[0].text;
    if (head == "declare-datatypes") {
      declare_datatypes(e);
    } else if (head == "declare-fun") {
      declare_fun(e);
    } else if (head == "assert") {
      if (e.items.size() != 2) syntax(e, "assert takes one formula");
      clause_spans.push_back(e.span);
      problem.clauses.push_back(assertion(e.items[1]));
    } else if (head == "check-sat") {
      if (e.items.size() != 1) syntax(e, "check-sat takes no arguments");
      return false;
    } else {
      syntax(e.items[0], "unsupported command '" + head + "'",
             {"declare-datatypes", "declare-fun", "assert", "check-sat"});
    }
    return true;
  }

 private:
  void declare_name(const SExpr& at, const std::string& name, const char* what) {
    if (!names_.insert(name).second)
      throw ParseError(ParseError::Kind::Duplicate, at.span, std::string(what) + " '" + name + "' already declared");
  }

  void declare_datatypes(const SExpr& e) {
    if (e.items.size() != 3) syntax(e, "declare-datatypes takes a sort list and a constructor list");
    const SExpr& sorts = e.items[1];
    const SExpr& defs = e.items[2];
    if (!sorts.is_list) syntax(sorts, "expected sort declarations", {"((S 0) ...)"});
    if (!defs.is_list || defs.items.size() != sorts.items.size())
      syntax(defs, "expected one constructor list per declared sort");
    std::size_t first = problem.sorts.size();
    for (const auto& sd : sorts.items) {
      if (!sd.is_list || sd.items.size() != 2) syntax(sd, "expected (name arity)", {"(S 0)"});
      const std::string& name = symbol(sd.items[0], "sort name");
      if (sd.items[1].is_list || sd.items[1].text != "0")
        syntax(sd.items[1], "parametric datatypes are not supported", {"0"});
      if (sort_names_.count(name))
        throw ParseError(ParseError::Kind::Duplicate, sd.span, "sort '" + name + "' already declared");
      sort_names_.insert(name);
      problem.sorts.push_back({name, {}});
    }
    for (std::size_t i = 0; i < defs.items.size(); ++i) {
      const SExpr& ctors = defs.items[i];
      if (!ctors.is_list) syntax(ctors, "expected a constructor list", {"((c ...) ...)"});
      for (const auto& cd : ctors.items) {
        ConstructorDecl ctor;
        if (!cd.is_list) {
          ctor.name = cd.text;
        } else {
          if (cd.items.empty()) syntax(cd, "empty constructor declaration", {"constructor name"});
          ctor.name = symbol(cd.items[0], "constructor name");
          for (std::size_t k = 1; k < cd.items.size(); ++k) {
            const SExpr& sel = cd.items[k];
            if (!sel.is_list || sel.items.size() != 2) syntax(sel, "expected (selector sort)", {"(sel S)"});
            symbol(sel.items[0], "selector name");
            ctor.arg_sorts.push_back(symbol(sel.items[1], "sort name"));
          }
        }
        declare_name(cd, ctor.name, "constructor");
        problem.sorts[first + i].constructors.push_back(std::move(ctor));
      }
    }
  }

  void declare_fun(const SExpr& e) {
    if (e.items.size() != 4) syntax(e, "expected (declare-fun name (sorts) Bool)");
    PredicateDecl p;
    p.name = symbol(e.items[1], "predicate name");
    const SExpr& args = e.items[2];
    if (!args.is_list) syntax(args, "expected an argument sort list", {"(S ...)"});
    for (const auto& a : args.items) p.arg_sorts.push_back(symbol(a, "sort name"));
    if (!e.items[3].is_symbol("Bool")) syntax(e.items[3], "only Bool-valued functions are supported", {"Bool"});
    declare_name(e.items[1], p.name, "predicate");
    problem.predicates.push_back(std::move(p));
  }

  bool is_constructor(const std::string& name) const { return problem.find_constructor(name).second != nullptr; }

  Clause assertion(const SExpr& f) {
    Clause clause;
    binders_.clear();
    const SExpr* matrix = &f;
    if (f.is_list && !f.items.empty() && f.items[0].is_symbol("forall")) {
      if (f.items.size() != 3) syntax(f, "expected (forall (binders) body)");
      const SExpr& bs = f.items[1];
      if (!bs.is_list || bs.items.empty()) syntax(bs, "expected a nonempty binder list", {"((x S) ...)"});
      for (const auto& b : bs.items) {
        if (!b.is_list || b.items.size() != 2) syntax(b, "expected (variable sort)", {"(x S)"});
        VarDecl v{symbol(b.items[0], "variable name"), symbol(b.items[1], "sort name")};
        if (binders_.count(v.name))
          throw ParseError(ParseError::Kind::Duplicate, b.span, "variable '" + v.name + "' bound twice");
        binders_[v.name] = v.sort;
        clause.vars.push_back(std::move(v));
      }
      matrix = &f.items[2];
    }

    if (matrix->is_list && !matrix->items.empty() && matrix->items[0].is_symbol("=>")) {
      if (matrix->items.size() != 3) syntax(*matrix, "expected (=> body head)");
      const SExpr& body = matrix->items[1];
      if (body.is_list && !body.items.empty() && body.items[0].is_symbol("and")) {
        for (std::size_t i = 1; i < body.items.size(); ++i) clause.body.push_back(literal(body.items[i]));
      } else {
        clause.body.push_back(literal(body));
      }
      head(matrix->items[2], clause);
    } else {
      head(*matrix, clause);
    }
    return clause;
  }

  void head(const SExpr& h, Clause& clause) {
    if (h.is_symbol("false")) {
      clause.kind = ClauseKind::Goal;
      return;
    }
    clause.kind = ClauseKind::Definite;
    Literal lit = literal(h);
    if (lit.kind != Literal::Kind::Atom) syntax(h, "clause head must be an atom or false", {"(p t ...)", "false"});
    clause.head = lit.as_atom();
  }

  Literal literal(const SExpr& e) {
    if (!e.is_list) {
      if (problem.find_predicate(e.text)) return Literal::atom(e.text, {});
      throw ParseError(ParseError::Kind::Sort, e.span, "undeclared predicate '" + e.text + "'");
    }
    if (e.items.empty() || e.items[0].is_list) syntax(e, "expected a literal", {"(p t ...)", "(= t t)"});
    const SExpr& op = e.items[0];
    if (op.is_symbol("=")) {
      if (e.items.size() != 3) syntax(e, "equality takes two terms");
      return Literal::eq(term(e.items[1]), term(e.items[2]));
    }
    if (op.is_symbol("distinct")) {
      if (e.items.size() != 3) syntax(e, "only binary distinct is supported");
      return Literal::diseq(term(e.items[1]), term(e.items[2]));
    }
    if (op.is_symbol("not")) {
      if (e.items.size() != 2) syntax(e, "not takes one argument");
      const SExpr& inner = e.items[1];
      if (!inner.is_list || inner.items.size() != 3 || !inner.items[0].is_symbol("="))
        syntax(inner, "only negated equalities are supported", {"(= t t)"});
      return Literal::diseq(term(inner.items[1]), term(inner.items[2]));
    }
    if (!op.quoted && (op.text == "and" || op.text == "or" || op.text == "=>" || op.text == "forall" ||
                       op.text == "exists" || op.text == "let" || op.text == "ite"))
      syntax(op, "connective '" + op.text + "' is not allowed here", {"predicate", "=", "distinct", "not"});
    if (!problem.find_predicate(op.text))
      throw ParseError(ParseError::Kind::Sort, op.span, "undeclared predicate '" + op.text + "'");
    std::vector<Term> args;
    for (std::size_t i = 1; i < e.items.size(); ++i) args.push_back(term(e.items[i]));
    return Literal::atom(op.text, std::move(args));
  }

  Term term(const SExpr& e) {
    if (!e.is_list) {
      auto it = binders_.find(e.text);
      if (it != binders_.end()) return Term::var(e.text, it->second);
      if (is_constructor(e.text)) return Term::app(e.text);
      syntax(e, "unbound symbol '" + e.text + "'", {"bound variable", "constructor"});
    }
    if (e.items.size() < 2 || e.items[0].is_list) syntax(e, "expected a constructor application", {"(c t ...)"});
    const std::string& c = e.items[0].text;
    if (!is_constructor(c)) syntax(e.items[0], "unknown constructor '" + c + "'", {"constructor"});
    std::vector<Term> args;
    for (std::size_t i = 1; i < e.items.size(); ++i) args.push_back(term(e.items[i]));
    return Term::app(c, std::move(args));
  }

  std::set<std::string> names_;
  std::set<std::string> sort_names_;
  std::map<std::string, std::string> binders_;
};

}  // namespace

Problem parse_problem(std::string_view text, std::vector<std::string>* warnings) {
  Reader reader(text);
  Interpreter interp;
  SourceSpan last = reader.here();
  while (auto e = reader.next()) {
    last = e->span;
    if (!interp.command(*e)) break;
  }

  ValidationReport report = validate(interp.problem);
  for (const auto& d : report.entries) {
    if (d.warning) {
      if (warnings) warnings->push_back(d.message);
      continue;
    }
    SourceSpan at = last;
    // Clause diagnostics are prefixed "clause N: ".
    if (d.message.rfind("clause ", 0) == 0) {
      std::size_t idx = std::stoul(d.message.substr(7));
      if (idx < interp.clause_spans.size()) at = interp.clause_spans[idx];
    }
    auto kind = d.code == Diagnostic::Code::DuplicateName ? ParseError::Kind::Duplicate : ParseError::Kind::Sort;
    throw ParseError(kind, at, d.message);
  }
  return std::move(interp.problem);
}

// ---------------------------------------------------------------------------

namespace {

bool simple_symbol(const std::string& s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
  static const std::string extra = "~!@$%^&*_-+=<>.?/";
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && extra.find(c) == std::string::npos) return false;
  return true;
}

std::string sym(const std::string& s) { return simple_symbol(s) ? s : "|" + s + "|"; }

void print_term(std::ostream& out, const Term& t) {
  if (t.is_var() || t.args.empty()) {
    out << sym(t.name);
    return;
  }
  out << "(" << sym(t.name);
  for (const auto& a : t.args) {
    out << " ";
    print_term(out, a);
  }
  out << ")";
}

void print_atom(std::ostream& out, const std::string& pred, const std::vector<Term>& args) {
  if (args.empty()) {
    out << sym(pred);
    return;
  }
  out << "(" << sym(pred);
  for (const auto& a : args) {
    out << " ";
    print_term(out, a);
  }
  out << ")";
}

void print_literal(std::ostream& out, const Literal& lit) {
  switch (lit.kind) {
    case Literal::Kind::Atom:
      print_atom(out, lit.predicate, lit.args);
      return;
    case Literal::Kind::Eq:
      out << "(= ";
      print_term(out, lit.args[0]);
      out << " ";
      print_term(out, lit.args[1]);
      out << ")";
      return;
    case Literal::Kind::Diseq:
      out << "(distinct ";
      print_term(out, lit.args[0]);
      out << " ";
      print_term(out, lit.args[1]);
      out << ")";
      return;
  }
}

}  // namespace

std::string print_problem(const Problem& problem) {
  std::ostringstream out;
  if (!problem.sorts.empty()) {
    out << "(declare-datatypes (";
    for (std::size_t i = 0; i < problem.sorts.size(); ++i) out << (i ? " " : "") << "(" << sym(problem.sorts[i].name) << " 0)";
    out << ")\n  (";
    for (std::size_t i = 0; i < problem.sorts.size(); ++i) {
      if (i) out << "\n   ";
      out << "(";
      const auto& ctors = problem.sorts[i].constructors;
      for (std::size_t j = 0; j < ctors.size(); ++j) {
        out << (j ? " " : "") << "(" << sym(ctors[j].name);
        for (std::size_t k = 0; k < ctors[j].arg_sorts.size(); ++k)
          out << " (" << sym(ctors[j].name + "_" + std::to_string(k)) << " " << sym(ctors[j].arg_sorts[k]) << ")";
        out << ")";
      }
      out << ")";
    }
    out << "))\n";
  }
  for (const auto& p : problem.predicates) {
    out << "(declare-fun " << sym(p.name) << " (";
    for (std::size_t i = 0; i < p.arg_sorts.size(); ++i) out << (i ? " " : "") << sym(p.arg_sorts[i]);
    out << ") Bool)\n";
  }
  for (const auto& c : problem.clauses) {
    std::ostringstream matrix;
    auto print_head = [&] {
      if (c.head)
        print_atom(matrix, c.head->predicate, c.head->args);
      else
        matrix << "false";
    };
    if (c.body.empty() && c.head) {
      print_head();
    } else {
      matrix << "(=> (and";
      for (const auto& lit : c.body) {
        matrix << " ";
        print_literal(matrix, lit);
      }
      matrix << ") ";
      print_head();
      matrix << ")";
    }
    out << "(assert ";
    if (c.vars.empty()) {
      out << matrix.str();
    } else {
      out << "(forall (";
      for (std::size_t i = 0; i < c.vars.size(); ++i)
        out << (i ? " " : "") << "(" << sym(c.vars[i].name) << " " << sym(c.vars[i].sort) << ")";
      out << ") " << matrix.str() << ")";
    }
    out << ")\n";
  }
  out << "(check-sat)\n";
  return out.str();
}

}  // namespace regmod
