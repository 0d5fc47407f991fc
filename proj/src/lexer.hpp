// Tokenizer shared by every specification language and both manifests.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iotforge/diagnostic.hpp"

namespace iotforge::detail {

enum class TokenKind {
    Ident,       // [A-Za-z][A-Za-z0-9_]*
    HyphenWord,  // Ident ('-' Ident)+, e.g. accessed-by
    Integer,
    Real,
    String,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Colon,
    Comma,
    Equals,
    End,
};

std::string_view token_kind_name(TokenKind k);

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;  // identifier text, literal source text, or decoded string
    std::int64_t integer = 0;
    double real = 0.0;
    SourceSpan span;
};

/// Tokenizes `source`. On the first lexical error returns that diagnostic.
/// Comments run from `//` to end of line.
Outcome<std::vector<Token>> tokenize(std::string_view source, std::string_view file);

bool is_reserved_word(std::string_view word);

}  // namespace iotforge::detail
