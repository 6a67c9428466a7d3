#include <cctype>
#include <charconv>

#include "semloss/logic.hpp"

namespace semloss {
namespace {

class SexprParser {
 public:
  explicit SexprParser(std::string_view text) : text_(text) {}

  Formula parse_all() {
    Formula f = parse();
    skip();
    if (pos_ < text_.size()) throw ParseError(line_, "trailing input after formula");
    return f;
  }

 private:
  void skip() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view atom() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' && text_[pos_] != ';' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    return text_.substr(start, pos_ - start);
  }

  Formula parse() {
    skip();
    if (pos_ >= text_.size()) throw ParseError(line_, "unexpected end of input");
    if (text_[pos_] == ')') throw ParseError(line_, "unexpected ')'");
    if (text_[pos_] != '(') return parse_atom(atom());

    ++pos_;
    skip();
    std::string_view op = atom();
    std::vector<Formula> args;
    for (;;) {
      skip();
      if (pos_ >= text_.size()) throw ParseError(line_, "unbalanced '('");
      if (text_[pos_] == ')') {
        ++pos_;
        break;
      }
      args.push_back(parse());
    }
    if (op == "and" || op == "or") {
      if (args.empty()) throw ParseError(line_, "(" + std::string(op) + ") needs at least one operand");
      return op == "and" ? Formula::conjunction(std::move(args)) : Formula::disjunction(std::move(args));
    }
    if (op == "not") {
      if (args.size() != 1) throw ParseError(line_, "(not) takes exactly one operand");
      return Formula::negation(std::move(args[0]));
    }
    throw ParseError(line_, "unknown operator '" + std::string(op) + "'");
  }

  Formula parse_atom(std::string_view tok) {
    if (tok == "true") return Formula::constant(true);
    if (tok == "false") return Formula::constant(false);
    if (tok.size() >= 2 && tok[0] == 'x') {
      unsigned long v = 0;
      auto [ptr, ec] = std::from_chars(tok.data() + 1, tok.data() + tok.size(), v);
      if (ec == std::errc() && ptr == tok.data() + tok.size() && v > 0) return Formula::literal(static_cast<VarId>(v));
    }
    throw ParseError(line_, "bad atom '" + std::string(tok) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

}  // namespace

Formula parse_sexpr(std::string_view text) { return SexprParser(text).parse_all(); }

}  // namespace semloss
