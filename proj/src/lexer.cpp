#include "lexer.hpp"

#include <cctype>
#include <charconv>

namespace mlc::detail {

namespace {

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

class Lexer {
 public:
  Lexer(std::string_view text, std::shared_ptr<const std::string> file, LexMode mode)
      : text_(text), file_(std::move(file)), mode_(mode) {}

  std::vector<Token> run() {
    if (mode_ == LexMode::Layout) {
      indents_.push_back(0);
      at_line_start_ = true;
    }
    while (true) {
      if (mode_ == LexMode::Layout && at_line_start_) {
        if (!handle_line_start()) break;
        continue;
      }
      skip_inline_space();
      if (pos_ >= text_.size()) break;
      char c = text_[pos_];
      if (c == '#') {
        skip_comment();
        continue;
      }
      if (c == '\n') {
        if (mode_ == LexMode::Layout) {
          push(TokenKind::Newline, "\n", here());
          at_line_start_ = true;
        }
        advance();
        continue;
      }
      lex_token();
    }
    SourceSpan end = here();
    if (mode_ == LexMode::Layout) {
      if (!out_.empty() && out_.back().kind != TokenKind::Newline &&
          out_.back().kind != TokenKind::Dedent) {
        push(TokenKind::Newline, "\n", end);
      }
      while (indents_.size() > 1) {
        indents_.pop_back();
        push(TokenKind::Dedent, "", end);
      }
    }
    push(TokenKind::End, "", end);
    return std::move(out_);
  }

 private:
  SourceSpan here() const { return SourceSpan{file_, line_, column_}; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void push(TokenKind kind, std::string text, SourceSpan span, double number = 0.0) {
    out_.push_back(Token{kind, std::move(text), number, std::move(span)});
  }

  void skip_inline_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || (mode_ == LexMode::Free && c == '\n')) {
        advance();
      } else {
        break;
      }
    }
  }

  void skip_comment() {
    while (pos_ < text_.size() && text_[pos_] != '\n') advance();
  }

  // Returns false at end of input.
  bool handle_line_start() {
    std::size_t width = 0;
    SourceSpan start = here();
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) {
      if (text_[pos_] == '\t') {
        throw Error(ErrorKind::InconsistentIndentation, "tabs are not allowed in indentation",
                    here());
      }
      ++width;
      advance();
    }
    if (pos_ >= text_.size()) return false;
    char c = text_[pos_];
    if (c == '\n' || c == '#' || c == '\r') {
      // Blank and comment-only lines do not affect layout.
      skip_comment();
      if (pos_ < text_.size()) advance();
      return true;
    }
    at_line_start_ = false;
    if (width > indents_.back()) {
      indents_.push_back(width);
      push(TokenKind::Indent, "", start);
    } else {
      while (width < indents_.back()) {
        indents_.pop_back();
        push(TokenKind::Dedent, "", start);
      }
      if (width != indents_.back()) {
        throw Error(ErrorKind::InconsistentIndentation,
                    "dedent does not match any enclosing indentation level", here());
      }
    }
    return true;
  }

  void lex_token() {
    SourceSpan start = here();
    char c = text_[pos_];
    if (is_ident_start(c)) {
      std::size_t begin = pos_;
      while (pos_ < text_.size() && is_ident_char(text_[pos_])) advance();
      push(TokenKind::Ident, std::string(text_.substr(begin, pos_ - begin)), start);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      lex_number(start);
      return;
    }
    if (c == '"') {
      advance();
      std::size_t begin = pos_;
      while (pos_ < text_.size() && text_[pos_] != '"' && text_[pos_] != '\n') advance();
      if (pos_ >= text_.size() || text_[pos_] != '"') {
        throw Error(ErrorKind::Lex, "unterminated string literal", start);
      }
      std::string body(text_.substr(begin, pos_ - begin));
      advance();
      push(TokenKind::String, std::move(body), start);
      return;
    }
    static constexpr std::string_view two_char[] = {"<=", ">=", "==", "!=", "&&", "||"};
    std::string_view rest = text_.substr(pos_);
    if (mode_ == LexMode::Layout && rest.starts_with("<-")) {
      advance();
      advance();
      push(TokenKind::Punct, "<-", start);
      return;
    }
    for (std::string_view op : two_char) {
      if (rest.starts_with(op)) {
        advance();
        advance();
        push(TokenKind::Punct, std::string(op), start);
        return;
      }
    }
    static constexpr std::string_view singles = ":;,()[]=<>+-*/~";
    if (singles.find(c) != std::string_view::npos) {
      advance();
      push(TokenKind::Punct, std::string(1, c), start);
      return;
    }
    throw Error(ErrorKind::Lex, std::string("unexpected character '") + c + "'", start);
  }

  void lex_number(const SourceSpan& start) {
    std::size_t begin = pos_;
    auto digits = [&] {
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        advance();
      }
    };
    digits();
    if (pos_ + 1 < text_.size() && text_[pos_] == '.' &&
        std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
      advance();
      digits();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_;
      int save_col = column_;
      advance();
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) advance();
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        digits();
      } else {
        pos_ = save;
        column_ = save_col;
      }
    }
    std::string_view lexeme = text_.substr(begin, pos_ - begin);
    double value = 0.0;
    auto res = std::from_chars(lexeme.data(), lexeme.data() + lexeme.size(), value);
    if (res.ec != std::errc() || res.ptr != lexeme.data() + lexeme.size()) {
      throw Error(ErrorKind::Lex, "number literal out of range: " + std::string(lexeme), start);
    }
    if (pos_ < text_.size() && is_ident_start(text_[pos_])) {
      throw Error(ErrorKind::Lex, "malformed number literal", start);
    }
    push(TokenKind::Number, std::string(lexeme), start, value);
  }

  std::string_view text_;
  std::shared_ptr<const std::string> file_;
  LexMode mode_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
  bool at_line_start_ = false;
  std::vector<std::size_t> indents_;
  std::vector<Token> out_;
};

}  // namespace

std::vector<Token> tokenize(std::string_view text, std::shared_ptr<const std::string> file,
                            LexMode mode) {
  return Lexer(text, std::move(file), mode).run();
}

}  // namespace mlc::detail
