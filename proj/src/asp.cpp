#include "regmod/asp.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "regmod/interpretation.hpp"

#ifndef REGMOD_DEFAULT_SOLVER
#define REGMOD_DEFAULT_SOLVER ""
#endif

namespace regmod {

// ---------------------------------------------------------------------------
// Names

namespace {

const std::set<std::string, std::less<>> kReserved = {
    "rule", "state", "stateType", "reach", "fires", "many", "diffApprox", "slot", "seen",
    "u",    "cex",   "ok",        "not",   "depth", "maxState", "inf", "sup", "show",
};

bool plain_identifier(std::string_view s) {
  if (s.empty() || !std::islower(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::string escape(const std::string& name) {
  if (plain_identifier(name) && !NameTable::reserved(name)) return name;
  std::string out = "c_";
  for (char c : name) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out;
}

void assign(std::vector<std::string>& out, std::set<std::string>& used, const std::string& name) {
  std::string asp = escape(name);
  if (used.count(asp)) {
    std::size_t k = 1;
    while (used.count(asp + "_" + std::to_string(k))) ++k;
    asp += "_" + std::to_string(k);
  }
  used.insert(asp);
  out.push_back(asp);
}

std::optional<std::size_t> lookup(const std::vector<std::string>& names, std::string_view asp) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == asp) return i;
  return std::nullopt;
}

}  // namespace

bool NameTable::reserved(std::string_view name) { return kReserved.count(name) > 0; }

NameTable::NameTable(const Signature& sig) {
  std::set<std::string> used;
  for (std::size_t s = 0; s < sig.sort_count(); ++s) assign(sorts_, used, sig.sort_name(s));
  for (const auto& c : sig.constructors()) assign(ctors_, used, c.name);
  for (const auto& p : sig.predicates()) assign(preds_, used, p.name);
}

std::optional<std::size_t> NameTable::sort_of(std::string_view asp) const { return lookup(sorts_, asp); }
std::optional<std::size_t> NameTable::ctor_of(std::string_view asp) const { return lookup(ctors_, asp); }
std::optional<std::size_t> NameTable::pred_of(std::string_view asp) const { return lookup(preds_, asp); }

// ---------------------------------------------------------------------------
// Model search

namespace {

std::string qvar(std::size_t v) { return "Q" + std::to_string(v); }

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

class ModelEmitter {
 public:
  ModelEmitter(const Problem& problem, const std::vector<std::size_t>& max_states, bool sb)
      : problem_(problem),
        sig_(std::make_shared<const Signature>(problem)),
        names_(*sig_),
        max_(max_states),
        sb_(sb),
        single_(sig_->sort_count() == 1) {
    if (max_.size() != sig_->sort_count()) throw std::invalid_argument("max_states needs one entry per sort");
  }

  std::string run() {
    header();
    transitions();
    if (!sb_) predicate_choices();
    analyses();
    clauses();
    if (sb_) symmetry();
    shows();
    return out_.str();
  }

 private:
  std::string guard(std::size_t sort, const std::string& var) const {
    if (single_) return "state(" + var + ")";
    return "stateType(" + var + "," + names_.sort(sort) + ")";
  }
  std::string reach(std::size_t sort, const std::string& var) const {
    return "reach(" + var + "," + names_.sort(sort) + ")";
  }
  // Guard for a state variable bound by nothing else.
  std::string domain(std::size_t sort, const std::string& var) const {
    return sb_ ? reach(sort, var) : guard(sort, var);
  }

  std::string ctor_term(std::size_t c, const std::vector<std::string>& args) const {
    if (args.empty()) return names_.ctor(c);
    return names_.ctor(c) + "(" + join(args, ", ") + ")";
  }
  std::string rule(std::size_t c, const std::vector<std::string>& args, const std::string& target) const {
    return "rule(" + ctor_term(c, args) + ", " + target + ")";
  }
  std::string pred_atom(std::size_t p, const std::vector<std::string>& args) const {
    if (args.empty()) return names_.pred(p);
    return names_.pred(p) + "(" + join(args, ", ") + ")";
  }

  std::vector<std::string> arg_vars(std::size_t n) const {
    std::vector<std::string> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back(qvar(i));
    return v;
  }

  void header() {
    if (single_) {
      out_ << "#const maxState=" << max_[0] << ".\n";
      out_ << "state(1..maxState).\n";
      out_ << "stateType(Q," << names_.sort(0) << ") :- state(Q).\n";
    } else {
      for (std::size_t s = 0; s < sig_->sort_count(); ++s)
        out_ << "#const maxState_" << names_.sort(s) << "=" << max_[s] << ".\n";
      for (std::size_t s = 0; s < sig_->sort_count(); ++s)
        out_ << "stateType(1..maxState_" << names_.sort(s) << "," << names_.sort(s) << ").\n";
      out_ << "state(Q) :- stateType(Q,_).\n";
    }
  }

  void transitions() {
    out_ << "\n";
    for (std::size_t c = 0; c < sig_->constructors().size(); ++c) {
      const auto& ctor = sig_->constructor(c);
      auto vars = arg_vars(ctor.args.size());
      out_ << "1 {" << rule(c, vars, "Q") << ": " << guard(ctor.sort, "Q") << "} 1";
      std::vector<std::string> conds;
      for (std::size_t k = 0; k < vars.size(); ++k)
        conds.push_back(sb_ ? reach(ctor.args[k], vars[k]) : guard(ctor.args[k], vars[k]));
      if (!conds.empty()) out_ << " :- " << join(conds, ", ");
      out_ << ".\n";
    }
  }

  void predicate_choices() {
    out_ << "\n";
    for (std::size_t p = 0; p < sig_->predicates().size(); ++p) {
      const auto& pred = sig_->predicate(p);
      auto vars = arg_vars(pred.args.size());
      out_ << "{" << pred_atom(p, vars) << "}";
      std::vector<std::string> conds;
      for (std::size_t k = 0; k < vars.size(); ++k) conds.push_back(guard(pred.args[k], vars[k]));
      if (!conds.empty()) out_ << " :- " << join(conds, ", ");
      out_ << ".\n";
    }
  }

  // Inhabitation (reach), at least two terms (many) and diffApprox.
  void analyses() {
    out_ << "\n";
    const auto& ctors = sig_->constructors();
    for (std::size_t c = 0; c < ctors.size(); ++c) {
      auto vars = arg_vars(ctors[c].args.size());
      out_ << reach(ctors[c].sort, "Q") << " :- " << firing_body(c, vars) << ".\n";
    }
    for (std::size_t c = 0; c < ctors.size(); ++c) {
      auto vars = arg_vars(ctors[c].args.size());
      out_ << "fires(" << ctor_term(c, vars) << ",Q," << names_.sort(ctors[c].sort) << ") :- " << firing_body(c, vars)
           << ".\n";
    }
    out_ << "many(Q,S) :- stateType(Q,S), #count{T : fires(T,Q,S)} >= 2.\n";
    for (std::size_t c = 0; c < ctors.size(); ++c) {
      auto vars = arg_vars(ctors[c].args.size());
      for (std::size_t k = 0; k < vars.size(); ++k) {
        std::vector<std::string> body{rule(c, vars, "Q")};
        for (std::size_t j = 0; j < vars.size(); ++j) {
          const std::string s = names_.sort(ctors[c].args[j]);
          body.push_back((j == k ? "many(" : "reach(") + vars[j] + "," + s + ")");
        }
        out_ << "many(Q," << names_.sort(ctors[c].sort) << ") :- " << join(body, ", ") << ".\n";
      }
    }
    out_ << "diffApprox(Q1,Q2,S) :- reach(Q1,S), reach(Q2,S), Q1 != Q2.\n";
    out_ << "diffApprox(Q,Q,S) :- many(Q,S).\n";
  }

  std::string firing_body(std::size_t c, const std::vector<std::string>& vars) const {
    std::vector<std::string> body{rule(c, vars, "Q")};
    for (std::size_t k = 0; k < vars.size(); ++k) body.push_back(reach(sig_->constructor(c).args[k], vars[k]));
    return join(body, ", ");
  }

  void clauses() {
    out_ << "\n";
    for (std::size_t i = 0; i < problem_.clauses.size(); ++i) {
      FlatClause fc = flatten(problem_, *sig_, problem_.clauses[i], i);
      if (fc.trivially_false) {
        out_ << "% clause " << i << " has an unsatisfiable disequality\n";
        continue;
      }
      std::vector<std::string> body;
      for (const auto& p : fc.predicates) body.push_back(pred_atom(p.pred, vars_of(p.args)));
      for (const auto& t : fc.transitions) body.push_back(rule(t.ctor, vars_of(t.args), qvar(t.result)));
      for (const auto& [x, y] : fc.disequalities)
        body.push_back("diffApprox(" + qvar(x) + ", " + qvar(y) + ", " + names_.sort(fc.var_sorts[x]) + ")");
      for (auto v : fc.generators) body.push_back(domain(fc.var_sorts[v], qvar(v)));
      if (fc.head) {
        out_ << pred_atom(fc.head->pred, vars_of(fc.head->args));
        if (!body.empty()) out_ << " :- " << join(body, ", ");
      } else {
        out_ << ":- " << (body.empty() ? std::string("#true") : join(body, ", "));
      }
      out_ << ".\n";
    }
  }

  std::vector<std::string> vars_of(const std::vector<std::size_t>& vs) const {
    std::vector<std::string> out;
    for (auto v : vs) out.push_back(qvar(v));
    return out;
  }

  void symmetry() {
    out_ << "\n";
    out_ << ":- stateType(Q,S), Q > 1, reach(Q,S), not reach(Q-1,S).\n";
    const auto& ctors = sig_->constructors();
    if (single_) {
      // Slot order: highest argument state, then constructor, then argument
      // tuple; the index packs the three keys.
      const std::size_t n = max_[0];
      std::size_t arity = 0;
      for (const auto& c : ctors) arity = std::max(arity, c.args.size());
      std::size_t k2 = 1;
      for (std::size_t i = 0; i < arity; ++i) k2 *= n;
      const std::size_t k1 = ctors.size() * k2;
      for (std::size_t c = 0; c < ctors.size(); ++c) {
        auto vars = arg_vars(ctors[c].args.size());
        const std::string s = names_.sort(0);
        std::string index;
        std::string extra;
        if (vars.empty()) {
          index = std::to_string(c * k2);
        } else {
          std::string level = vars.size() == 1 ? vars[0] : "L";
          if (vars.size() > 1) extra = ", L = #max{" + join(vars, ";") + "}";
          std::string lex;
          std::size_t weight = k2;
          for (const auto& v : vars) {
            weight /= n;
            lex += " + (" + v + "-1)*" + std::to_string(weight);
          }
          index = level + "*" + std::to_string(k1) + " + " + std::to_string(c * k2) + lex;
        }
        out_ << "slot(" << s << ", " << index << ", Q) :- " << rule(c, vars, "Q") << extra << ".\n";
      }
    } else {
      for (std::size_t s = 0; s < sig_->sort_count(); ++s) {
        std::size_t pos = 0;
        for (std::size_t c = 0; c < ctors.size(); ++c) {
          if (ctors[c].sort != s || !ctors[c].args.empty()) continue;
          out_ << "slot(" << names_.sort(s) << ", " << pos++ << ", Q) :- " << rule(c, {}, "Q") << ".\n";
        }
      }
    }
    out_ << "seen(S,I,Q) :- slot(S,J,Q), slot(S,I,_), J < I.\n";
    out_ << ":- slot(S,I,Q), Q > 1, not seen(S,I,Q-1).\n";
  }

  void shows() {
    out_ << "\n#show rule/2.\n";
    for (std::size_t p = 0; p < sig_->predicates().size(); ++p)
      out_ << "#show " << names_.pred(p) << "/" << sig_->predicate(p).args.size() << ".\n";
  }

  const Problem& problem_;
  SignaturePtr sig_;
  NameTable names_;
  std::vector<std::size_t> max_;
  bool sb_;
  bool single_;
  std::ostringstream out_;
};

}  // namespace

AspProgram emit_model_search(const Problem& problem, const std::vector<std::size_t>& max_states,
                             bool symmetry_breaking) {
  AspProgram prog;
  prog.kind = AspProgram::Kind::ModelSearch;
  prog.max_states = max_states;
  prog.symmetry_breaking = symmetry_breaking;
  prog.text = ModelEmitter(problem, max_states, symmetry_breaking).run();
  return prog;
}

// ---------------------------------------------------------------------------
// Counterexample search

namespace {

class CounterexampleEmitter {
 public:
  CounterexampleEmitter(const Problem& problem, std::size_t depth)
      : problem_(problem), sig_(problem), names_(sig_), depth_(depth) {}

  std::string run() {
    out_ << "#const depth=" << depth_ << ".\n\n";
    universe();
    out_ << "\n";
    for (std::size_t i = 0; i < problem_.clauses.size(); ++i) clause(i);
    out_ << "\nok :- cex(_,_).\n:- not ok.\n\n#show cex/2.\n";
    return out_.str();
  }

 private:
  void universe() {
    const auto& ctors = sig_.constructors();
    for (std::size_t c = 0; c < ctors.size(); ++c) {
      const std::string s = names_.sort(ctors[c].sort);
      if (ctors[c].args.empty()) {
        out_ << "u(" << s << "," << names_.ctor(c) << ",0).\n";
        continue;
      }
      std::vector<std::string> vars, body;
      for (std::size_t k = 0; k < ctors[c].args.size(); ++k) {
        vars.push_back("X" + std::to_string(k));
        body.push_back("u(" + names_.sort(ctors[c].args[k]) + "," + vars.back() + ",D)");
      }
      out_ << "u(" << s << "," << names_.ctor(c) << "(" << join(vars, ",") << "),D+1) :- " << join(body, ", ")
           << ", D < depth.\n";
    }
    out_ << "u(S,T,D+1) :- u(S,T,D), D < depth.\n";
  }

  std::string term(const Term& t, const std::map<std::string, std::size_t>& index) const {
    if (t.is_var()) return "X" + std::to_string(index.at(t.name));
    auto c = *sig_.constructor_index(t.name);
    if (t.args.empty()) return names_.ctor(c);
    std::vector<std::string> args;
    for (const auto& a : t.args) args.push_back(term(a, index));
    return names_.ctor(c) + "(" + join(args, ",") + ")";
  }

  std::string atom(const Atom& a, const std::map<std::string, std::size_t>& index) const {
    auto p = *sig_.predicate_index(a.predicate);
    if (a.args.empty()) return names_.pred(p);
    std::vector<std::string> args;
    for (const auto& t : a.args) args.push_back(term(t, index));
    return names_.pred(p) + "(" + join(args, ",") + ")";
  }

  static void collect(const Term& t, std::set<std::string>& out) {
    if (t.is_var()) out.insert(t.name);
    for (const auto& a : t.args) collect(a, out);
  }

  void clause(std::size_t i) {
    const Clause& c = problem_.clauses[i];
    std::map<std::string, std::size_t> index;
    for (std::size_t k = 0; k < c.vars.size(); ++k) index[c.vars[k].name] = k;

    std::vector<std::string> body;
    std::set<std::string> in_atoms;
    for (const auto& lit : c.body) {
      if (lit.kind != Literal::Kind::Atom) continue;
      body.push_back(atom(lit.as_atom(), index));
      for (const auto& t : lit.args) collect(t, in_atoms);
    }
    for (const auto& lit : c.body) {
      if (lit.kind == Literal::Kind::Atom) continue;
      body.push_back(term(lit.args[0], index) + (lit.kind == Literal::Kind::Eq ? " = " : " != ") +
                     term(lit.args[1], index));
    }
    // Every variable ranges over terms within the depth bound.
    for (std::size_t k = 0; k < c.vars.size(); ++k)
      if (!in_atoms.count(c.vars[k].name))
        body.push_back("u(" + names_.sort(*sig_.sort_index(c.vars[k].sort)) + ",X" + std::to_string(k) +
                       ",depth)");

    if (c.head) {
      const auto& pred = sig_.predicate(*sig_.predicate_index(c.head->predicate));
      for (std::size_t k = 0; k < c.head->args.size(); ++k)
        body.push_back("u(" + names_.sort(pred.args[k]) + "," + term(c.head->args[k], index) + ",depth)");
      out_ << atom(*c.head, index);
    } else {
      std::vector<std::string> vars;
      for (std::size_t k = 0; k < c.vars.size(); ++k) vars.push_back("X" + std::to_string(k));
      std::string tuple = vars.size() == 1 ? "(" + vars[0] + ",)" : "(" + join(vars, ",") + ")";
      out_ << "cex(" << i << "," << tuple << ")";
    }
    std::vector<std::string> unique;
    for (auto& b : body)
      if (std::find(unique.begin(), unique.end(), b) == unique.end()) unique.push_back(std::move(b));
    body = std::move(unique);
    if (!body.empty()) out_ << " :- " << join(body, ", ");
    out_ << ".\n";
  }

  const Problem& problem_;
  Signature sig_;
  NameTable names_;
  std::size_t depth_;
  std::ostringstream out_;
};

}  // namespace

AspProgram emit_counterexample_search(const Problem& problem, std::size_t depth_bound) {
  AspProgram prog;
  prog.kind = AspProgram::Kind::CounterexampleSearch;
  prog.depth_bound = depth_bound;
  prog.text = CounterexampleEmitter(problem, depth_bound).run();
  return prog;
}

// ---------------------------------------------------------------------------
// Answer sets

std::string AspTerm::to_string() const {
  if (is_number) return std::to_string(number);
  if (args.empty()) return name.empty() ? "()" : name;
  std::string out = name + "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ",";
    out += args[i].to_string();
  }
  if (name.empty() && args.size() == 1) out += ",";
  return out + ")";
}

namespace {

class FactParser {
 public:
  explicit FactParser(std::string_view s) : s_(s) {}

  std::vector<AspTerm> all() {
    std::vector<AspTerm> out;
    while (skip(), pos_ < s_.size()) out.push_back(term());
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw AspError(AspError::Kind::MalformedFact, msg + " at column " + std::to_string(pos_ + 1));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  AspTerm term() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of facts");
    AspTerm t;
    char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-') {
      std::size_t begin = pos_++;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      std::string digits(s_.substr(begin, pos_ - begin));
      if (digits == "-") fail("malformed number");
      t.is_number = true;
      t.number = std::stoll(digits);
      return t;
    }
    if (c == '(') {
      ++pos_;
      args(t, true);
      return t;
    }
    if (!(std::isalpha(static_cast<unsigned char>(c)) || c == '_')) fail(std::string("unexpected '") + c + "'");
    std::size_t begin = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' ||
                                s_[pos_] == '\''))
      ++pos_;
    t.name = std::string(s_.substr(begin, pos_ - begin));
    if (eat('(')) args(t, false);
    return t;
  }

  // After '(' : comma-separated terms up to ')'; tuples allow a trailing comma.
  void args(AspTerm& t, bool tuple) {
    if (eat(')')) return;
    while (true) {
      t.args.push_back(term());
      if (eat(')')) return;
      if (!eat(',')) fail("expected ',' or ')'");
      if (tuple && eat(')')) return;
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

std::optional<SolverOutcome> status_line(std::string_view raw) {
  std::istringstream in{std::string(raw)};
  std::string line;
  std::optional<SolverOutcome> found;
  while (std::getline(in, line)) {
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    if (line == "SATISFIABLE" || line == "OPTIMUM FOUND") found = SolverOutcome::Satisfiable;
    if (line == "UNSATISFIABLE") found = SolverOutcome::Unsatisfiable;
    if (line == "UNKNOWN") found = SolverOutcome::Unknown;
  }
  return found;
}

}  // namespace

std::vector<AspTerm> parse_facts(std::string_view line) { return FactParser(line).all(); }

AnswerSet parse_answer_set(std::string_view raw) {
  std::istringstream in{std::string(raw)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("Answer:", 0) != 0) continue;
    std::string facts;
    std::getline(in, facts);
    return AnswerSet{parse_facts(facts)};
  }
  auto status = status_line(raw);
  std::string what = "no answer set in solver output";
  if (status == SolverOutcome::Unsatisfiable) what += " (UNSATISFIABLE)";
  throw AspError(AspError::Kind::NoAnswerSet, what, status);
}

namespace {

State as_state(const AspTerm& t) {
  if (!t.is_number || t.number < 1) throw AspError(AspError::Kind::MalformedFact, "expected a state, got " + t.to_string());
  return static_cast<State>(t.number);
}

}  // namespace

DecodedModel decode_model(const AnswerSet& answers, const Problem& problem) {
  auto sig = std::make_shared<const Signature>(problem);
  NameTable names(*sig);

  struct Rule {
    std::size_t ctor;
    std::vector<State> args;
    State target;
  };
  std::vector<Rule> rules;
  std::vector<std::pair<std::size_t, std::vector<State>>> facts;
  std::vector<std::size_t> counts(sig->sort_count(), 0);
  auto see = [&](std::size_t sort, State q) { counts[sort] = std::max<std::size_t>(counts[sort], q); };

  for (const auto& f : answers.facts) {
    if (f.is_number) throw AspError(AspError::Kind::MalformedFact, "unexpected number " + f.to_string());
    if (f.name == "rule") {
      if (f.args.size() != 2 || f.args[0].is_number)
        throw AspError(AspError::Kind::MalformedFact, "malformed transition " + f.to_string());
      auto c = names.ctor_of(f.args[0].name);
      if (!c || sig->constructor(*c).args.size() != f.args[0].args.size())
        throw AspError(AspError::Kind::MalformedFact, "unknown constructor in " + f.to_string());
      Rule r{*c, {}, as_state(f.args[1])};
      const auto& ctor = sig->constructor(*c);
      for (std::size_t k = 0; k < ctor.args.size(); ++k) {
        r.args.push_back(as_state(f.args[0].args[k]));
        see(ctor.args[k], r.args.back());
      }
      see(ctor.sort, r.target);
      rules.push_back(std::move(r));
      continue;
    }
    auto p = names.pred_of(f.name);
    if (!p) continue;  // auxiliary atoms when nothing is hidden
    const auto& pred = sig->predicate(*p);
    if (pred.args.size() != f.args.size())
      throw AspError(AspError::Kind::MalformedFact, "wrong arity in " + f.to_string());
    std::vector<State> tuple;
    for (std::size_t k = 0; k < f.args.size(); ++k) {
      tuple.push_back(as_state(f.args[k]));
      see(pred.args[k], tuple.back());
    }
    facts.emplace_back(*p, std::move(tuple));
  }

  TreeAutomaton a(sig, counts);
  for (const auto& r : rules) {
    State old = a.target(r.ctor, r.args);
    if (old != kNoState && old != r.target)
      throw AspError(AspError::Kind::MalformedFact, "nondeterministic transition for " + sig->constructor(r.ctor).name);
    a.set_target(r.ctor, r.args, r.target);
  }
  for (const auto& issue : check_automaton(a))
    throw AspError(AspError::Kind::IncompleteDelta, issue.message);

  PredicateTables tables(sig, counts);
  for (const auto& [p, t] : facts) tables.insert(p, t);

  auto [ta, tt] = trim(a, tables);
  Verdict v = check_model(ta, tt, problem);
  if (!v.is_model())
    throw AspError(AspError::Kind::VerificationFailure,
                   "decoded answer set is not a model: clause " + std::to_string(v.witness->clause) + " fails");
  return DecodedModel{std::move(ta), std::move(tt)};
}

Derivation decode_counterexample(const AnswerSet& answers, const Problem& problem) {
  Signature sig(problem);
  NameTable names(sig);
  std::function<Term(const AspTerm&)> to_term = [&](const AspTerm& t) {
    auto c = t.is_number ? std::nullopt : names.ctor_of(t.name);
    if (!c) throw AspError(AspError::Kind::MalformedFact, "not a term: " + t.to_string());
    std::vector<Term> args;
    for (const auto& a : t.args) args.push_back(to_term(a));
    return Term::app(sig.constructor(*c).name, std::move(args));
  };
  for (const auto& f : answers.facts) {
    if (f.name != "cex" || f.args.size() != 2 || !f.args[0].is_number) continue;
    std::size_t goal = static_cast<std::size_t>(f.args[0].number);
    if (goal >= problem.clauses.size() || !problem.clauses[goal].is_goal())
      throw AspError(AspError::Kind::MalformedFact, "cex names a clause that is not a goal");
    const Clause& c = problem.clauses[goal];
    const AspTerm& tuple = f.args[1];
    if (!tuple.name.empty() || tuple.args.size() != c.vars.size())
      throw AspError(AspError::Kind::MalformedFact, "cex tuple does not match the clause binders");
    Derivation d;
    d.goal = goal;
    for (std::size_t k = 0; k < c.vars.size(); ++k) d.subst[c.vars[k].name] = to_term(tuple.args[k]);
    return d;
  }
  throw AspError(AspError::Kind::NoAnswerSet, "answer set holds no cex fact");
}

// ---------------------------------------------------------------------------
// Subprocess

namespace {

std::optional<std::string> resolve_executable(const std::string& path) {
  if (path.empty()) return std::nullopt;
  if (path.find('/') != std::string::npos) {
    if (::access(path.c_str(), X_OK) == 0) return path;
    return std::nullopt;
  }
  const char* env = std::getenv("PATH");
  std::istringstream dirs(env ? env : "");
  std::string dir;
  while (std::getline(dirs, dir, ':')) {
    if (dir.empty()) continue;
    std::string full = dir + "/" + path;
    if (::access(full.c_str(), X_OK) == 0) return full;
  }
  return std::nullopt;
}

struct Captured {
  int exit_status = -1;
  bool timed_out = false;
  double wall = 0;
  std::string out, err;
};

class TempFile {
 public:
  explicit TempFile(const std::string& content) {
    std::string tmpl = (std::filesystem::temp_directory_path() / "regmod-XXXXXX.lp").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    int fd = ::mkstemps(buf.data(), 3);
    if (fd < 0) throw AspError(AspError::Kind::SolverFailed, std::string("mkstemps: ") + std::strerror(errno));
    path_ = buf.data();
    std::size_t off = 0;
    while (off < content.size()) {
      ssize_t n = ::write(fd, content.data() + off, content.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        ::close(fd);
        throw AspError(AspError::Kind::SolverFailed, "cannot write program file");
      }
      off += static_cast<std::size_t>(n);
    }
    ::close(fd);
  }
  ~TempFile() { ::unlink(path_.c_str()); }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

Captured spawn(const std::string& exe, const std::vector<std::string>& args, const std::string& input,
               double time_limit, double grace) {
  TempFile program(input);
  int out_pipe[2], err_pipe[2];
  if (::pipe(out_pipe) != 0 || ::pipe(err_pipe) != 0)
    throw AspError(AspError::Kind::SolverFailed, std::string("pipe: ") + std::strerror(errno));

  auto start = std::chrono::steady_clock::now();
  pid_t pid = ::fork();
  if (pid < 0) throw AspError(AspError::Kind::SolverFailed, std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    int in = ::open(program.path().c_str(), O_RDONLY);
    if (in < 0) ::_exit(127);
    ::dup2(in, 0);
    ::dup2(out_pipe[1], 1);
    ::dup2(err_pipe[1], 2);
    ::close(out_pipe[0]);
    ::close(err_pipe[0]);
    ::setpgid(0, 0);
    std::vector<char*> argv;
    argv.push_back(const_cast<char*>(exe.c_str()));
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    ::execv(exe.c_str(), argv.data());
    ::_exit(127);
  }
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);

  Captured cap;
  pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
  std::string* sinks[2] = {&cap.out, &cap.err};
  int open_fds = 2;
  bool terminated = false;
  const auto soft = start + std::chrono::duration<double>(time_limit);
  const auto hard = soft + std::chrono::duration<double>(grace);
  char buf[65536];
  while (open_fds > 0) {
    auto now = std::chrono::steady_clock::now();
    if (!terminated && now >= soft) {
      cap.timed_out = true;
      terminated = true;
      ::kill(-pid, SIGTERM);
      ::kill(pid, SIGTERM);
    }
    if (now >= hard) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      break;
    }
    auto until = terminated ? hard : soft;
    int wait_ms = static_cast<int>(
        std::chrono::duration_cast<std::chrono::milliseconds>(until - now).count()) + 1;
    int r = ::poll(fds, 2, std::min(wait_ms, 1000));
    if (r < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (int i = 0; i < 2; ++i) {
      if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      ssize_t n = ::read(fds[i].fd, buf, sizeof buf);
      if (n > 0) {
        sinks[i]->append(buf, static_cast<std::size_t>(n));
      } else if (n == 0 || errno != EINTR) {
        ::close(fds[i].fd);
        fds[i].fd = -1;
        --open_fds;
      }
    }
  }
  for (auto& f : fds)
    if (f.fd >= 0) ::close(f.fd);

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  cap.wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (WIFEXITED(status))
    cap.exit_status = WEXITSTATUS(status);
  else if (WIFSIGNALED(status))
    cap.exit_status = 128 + WTERMSIG(status);
  return cap;
}

std::string require_solver(const SolverConfig& config) {
  auto exe = resolve_executable(config.solver_path);
  if (!exe) throw AspError(AspError::Kind::SolverNotFound, "ASP solver not found: '" + config.solver_path + "'");
  return *exe;
}

bool contains(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

}  // namespace

SolverRun run_external(const AspProgram& program, const SolverConfig& config) {
  const std::string exe = require_solver(config);
  Captured cap = spawn(exe, config.args, program.text, config.time_limit, config.grace);

  SolverRun run;
  run.exit_status = cap.exit_status;
  run.timed_out = cap.timed_out;
  run.wall_seconds = cap.wall;
  run.output = std::move(cap.out);
  run.error_output = std::move(cap.err);
  if (run.exit_status == 127 && run.output.empty())
    throw AspError(AspError::Kind::SolverNotFound, "could not execute " + exe);

  if (run.timed_out) {
    run.outcome = SolverOutcome::Unknown;
    return run;
  }
  if (contains(config.sat_codes, run.exit_status)) {
    run.outcome = SolverOutcome::Satisfiable;
  } else if (contains(config.unsat_codes, run.exit_status)) {
    run.outcome = SolverOutcome::Unsatisfiable;
  } else if (auto s = status_line(run.output)) {
    run.outcome = *s;
  } else if (run.exit_status != 0) {
    throw AspError(AspError::Kind::SolverFailed, "solver exited with status " + std::to_string(run.exit_status) +
                                                      ": " + run.error_output.substr(0, 400));
  } else {
    run.outcome = SolverOutcome::Unknown;
  }
  if (run.outcome == SolverOutcome::Satisfiable) run.answer = parse_answer_set(run.output);
  return run;
}

ModelCount count_models(const AspProgram& program, const SolverConfig& config) {
  const std::string exe = require_solver(config);
  std::vector<std::string> args = config.args;
  args.push_back("0");
  args.push_back("--quiet=2");
  long secs = std::max(1L, static_cast<long>(config.time_limit));
  args.push_back("--time-limit=" + std::to_string(secs));
  // The solver stops itself at the limit and still prints its summary.
  Captured cap = spawn(exe, args, program.text, config.time_limit + 30.0, config.grace);

  ModelCount mc;
  mc.wall_seconds = cap.wall;
  std::istringstream in(cap.out);
  std::string line;
  bool found = false;
  while (std::getline(in, line)) {
    if (line.rfind("Models", 0) != 0) continue;
    auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string rest = line.substr(colon + 1);
    std::size_t i = 0;
    while (i < rest.size() && std::isspace(static_cast<unsigned char>(rest[i]))) ++i;
    std::size_t j = i;
    while (j < rest.size() && std::isdigit(static_cast<unsigned char>(rest[j]))) ++j;
    if (j == i) continue;
    mc.count = std::stoull(rest.substr(i, j - i));
    mc.exhaustive = !(j < rest.size() && rest[j] == '+');
    found = true;
    break;
  }
  if (!found)
    throw AspError(AspError::Kind::SolverFailed, "no model count in solver output: " + cap.err.substr(0, 400));
  if (cap.timed_out) mc.exhaustive = false;
  return mc;
}

std::optional<std::string> find_solver() {
  if (const char* env = std::getenv("REGMOD_ASP_SOLVER"); env && *env) {
    if (auto exe = resolve_executable(env)) return exe;
  }
  if (auto exe = resolve_executable(REGMOD_DEFAULT_SOLVER)) return exe;
  return resolve_executable("clingo");
}

}  // namespace regmod
