#ifndef MLC_SRC_LEXER_HPP
#define MLC_SRC_LEXER_HPP

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mlc/diagnostics.hpp"

namespace mlc::detail {

enum class TokenKind { Ident, Number, String, Punct, Newline, Indent, Dedent, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  double number = 0.0;
  SourceSpan span;

  bool is(TokenKind k, std::string_view t) const { return kind == k && text == t; }
  bool is_punct(std::string_view t) const { return is(TokenKind::Punct, t); }
  bool is_word(std::string_view t) const { return is(TokenKind::Ident, t); }
};

enum class LexMode {
  Free,    // newlines are whitespace (.m files)
  Layout,  // indentation-sensitive, emits Newline/Indent/Dedent (.mpp files)
};

std::vector<Token> tokenize(std::string_view text, std::shared_ptr<const std::string> file,
                            LexMode mode);

}  // namespace mlc::detail

#endif  // MLC_SRC_LEXER_HPP
