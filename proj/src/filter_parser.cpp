#include <cctype>
#include <charconv>

#include "tracekit/error.hpp"
#include "tracekit/query.hpp"

namespace tracekit {

namespace {

enum class Tok { End, Ident, Number, String, Punct };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  AttrValue value;
  std::size_t offset = 0;
};

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ':' || c == '.';
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    Token tok;
    tok.offset = pos_;
    if (pos_ >= text_.size()) return tok;
    const char c = text_[pos_];
    if (c == '"' || c == '\'') return quoted(c, tok);
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        ((c == '-' || c == '+' || c == '.') && pos_ + 1 < text_.size() &&
         (std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) || text_[pos_ + 1] == '.'))) {
      return number(tok);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
      tok.kind = Tok::Ident;
      tok.text = std::string(text_.substr(tok.offset, pos_ - tok.offset));
      return tok;
    }
    for (std::string_view p : {"==", "!=", "<=", ">=", "=~", "&&", "||"}) {
      if (text_.substr(pos_, 2) == p) {
        pos_ += 2;
        tok.kind = Tok::Punct;
        tok.text = std::string(p);
        return tok;
      }
    }
    if (std::string_view("<>!()[]{},").find(c) != std::string_view::npos) {
      ++pos_;
      tok.kind = Tok::Punct;
      tok.text = std::string(1, c);
      return tok;
    }
    fail(pos_, "unexpected character '" + std::string(1, c) + "'");
  }

  [[noreturn]] static void fail(std::size_t offset, const std::string& why) {
    throw Error(Errc::BadExpr, "at offset " + std::to_string(offset) + ": " + why);
  }

 private:
  Token quoted(char quote, Token& tok) {
    ++pos_;
    std::string value;
    while (pos_ < text_.size() && text_[pos_] != quote) {
      if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
      value.push_back(text_[pos_++]);
    }
    if (pos_ >= text_.size()) fail(tok.offset, "unterminated string");
    ++pos_;
    tok.kind = Tok::String;
    tok.text = value;
    tok.value = std::move(value);
    return tok;
  }

  Token number(Token& tok) {
    auto end = pos_;
    if (text_[end] == '-' || text_[end] == '+') ++end;
    while (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '.' ||
                                  ((text_[end] == '-' || text_[end] == '+') &&
                                   (text_[end - 1] == 'e' || text_[end - 1] == 'E')))) {
      ++end;
    }
    auto body = text_.substr(pos_, end - pos_);
    if (body.front() == '+') body.remove_prefix(1);
    tok.kind = Tok::Number;
    tok.text = std::string(body);
    std::int64_t i = 0;
    double d = 0;
    const auto* first = body.data();
    const auto* last = body.data() + body.size();
    if (auto [p, ec] = std::from_chars(first, last, i); ec == std::errc{} && p == last) {
      tok.value = i;
    } else if (auto [q, ec2] = std::from_chars(first, last, d); ec2 == std::errc{} && q == last) {
      tok.value = d;
    } else {
      fail(pos_, "bad number '" + std::string(body) + "'");
    }
    pos_ = end;
    return tok;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

/// expr    := and { ("||" | "or") and }
/// and     := unary { ("&&" | "and") unary }
/// unary   := ("!" | "not") unary | "(" expr ")" | atom
/// atom    := field op operand
class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { advance(); }

  FilterExpr parse() {
    auto e = disjunction();
    if (tok_.kind != Tok::End) Lexer::fail(tok_.offset, "unexpected '" + tok_.text + "'");
    return e;
  }

 private:
  void advance() { tok_ = lexer_.next(); }

  bool accept(std::string_view punct, std::string_view word = {}) {
    if ((tok_.kind == Tok::Punct && tok_.text == punct) || (!word.empty() && tok_.kind == Tok::Ident && tok_.text == word)) {
      advance();
      return true;
    }
    return false;
  }

  void expect(std::string_view punct) {
    if (!accept(punct)) Lexer::fail(tok_.offset, "expected '" + std::string(punct) + "'");
  }

  FilterExpr disjunction() {
    auto e = conjunction();
    while (accept("||", "or")) e = e || conjunction();
    return e;
  }

  FilterExpr conjunction() {
    auto e = unary();
    while (accept("&&", "and")) e = e && unary();
    return e;
  }

  FilterExpr unary() {
    if (accept("!", "not")) return !unary();
    if (accept("(")) {
      auto e = disjunction();
      expect(")");
      return e;
    }
    return atom();
  }

  AttrValue literal() {
    Token t = tok_;
    if (t.kind == Tok::Number || t.kind == Tok::String) {
      advance();
      return t.value;
    }
    if (t.kind == Tok::Ident) {
      advance();
      return AttrValue{t.text};
    }
    Lexer::fail(t.offset, "expected a literal");
  }

  FilterExpr atom() {
    if (tok_.kind != Tok::Ident) Lexer::fail(tok_.offset, "expected a field name");
    const auto field = tok_.text;
    const auto at = tok_.offset;
    advance();
    try {
      if (accept("", "in")) {
        const bool brace = tok_.kind == Tok::Punct && tok_.text == "{";
        if (!accept("[") && !accept("{")) Lexer::fail(tok_.offset, "expected '[' or '{'");
        std::vector<AttrValue> values{literal()};
        while (accept(",")) values.push_back(literal());
        expect(brace ? "}" : "]");
        return in_set(field, std::move(values));
      }
      if (accept("", "between")) {
        expect("[");
        auto lo = literal();
        expect(",");
        auto hi = literal();
        if (!accept("]")) expect(")");
        return between(field, std::move(lo), std::move(hi));
      }
      if (accept("=~", "matches")) {
        auto pattern = literal();
        if (!std::holds_alternative<std::string>(pattern)) Lexer::fail(at, "glob pattern must be a string");
        return glob(field, std::get<std::string>(pattern));
      }
      static const std::pair<std::string_view, Op> ops[] = {{"==", Op::Eq}, {"!=", Op::Ne}, {"<=", Op::Le},
                                                            {">=", Op::Ge}, {"<", Op::Lt},  {">", Op::Gt}};
      for (auto [text, op] : ops) {
        if (accept(text)) return compare(field, op, literal());
      }
    } catch (const Error& e) {
      if (e.code() != Errc::BadExpr) throw;
      const std::string what = e.what();
      if (what.find("at offset") != std::string::npos) throw;
      Lexer::fail(at, what.substr(what.find(": ") + 2));
    }
    Lexer::fail(tok_.offset, "expected an operator after '" + field + "'");
  }

  Lexer lexer_;
  Token tok_;
};

}  // namespace

FilterExpr parse_filter(std::string_view text) { return Parser(text).parse(); }

}  // namespace tracekit
