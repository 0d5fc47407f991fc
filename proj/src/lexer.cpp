#include "lexer.hpp"

#include <array>
#include <charconv>
#include <cstdlib>

namespace iotforge::detail {

namespace {

bool is_alpha(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_word_char(char c) { return is_alpha(c) || is_digit(c) || c == '_'; }

constexpr std::array kReserved = {
    "vocabulary", "regions",  "datatypes", "resources", "datatype", "sensor",   "actuator",
    "storage",    "generate", "action",    "architecture", "uses",  "service",  "scope",
    "consume",    "window",   "every",     "produce",   "request",  "from",     "command",
    "to",         "logic",    "builtin",   "extern",    "deployment", "device", "region",
    "platform",   "double",   "long",      "string",    "boolean",  "handler",  "driver",
    "trace",      "true",     "false",
};

class Lexer {
public:
    Lexer(std::string_view src, std::string_view file) : src_(src), file_(file) {}

    Outcome<std::vector<Token>> run() {
        std::vector<Token> out;
        while (true) {
            skip_trivia();
            if (pos_ >= src_.size()) {
                Token end;
                end.kind = TokenKind::End;
                end.span = span_here(0);
                out.push_back(std::move(end));
                return out;
            }
            auto tok = next();
            if (!tok) return std::vector<Diagnostic>{error_};
            out.push_back(std::move(*tok));
        }
    }

private:
    SourceSpan span_here(std::uint32_t len) const {
        return SourceSpan{std::string(file_), line_, col_, len};
    }

    void advance(std::size_t n = 1) {
        for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
            if (src_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++pos_;
        }
    }

    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    void skip_trivia() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '/' && peek(1) == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else {
                break;
            }
        }
    }

    std::optional<Token> fail(std::string msg, std::uint32_t len = 1) {
        error_ = Diagnostic{span_here(len), Severity::Error, std::move(msg)};
        return std::nullopt;
    }

    std::optional<Token> next() {
        char c = peek();
        Token tok;
        tok.span = span_here(1);
        auto single = [&](TokenKind k) {
            tok.kind = k;
            tok.text = std::string(1, c);
            advance();
            return std::optional<Token>(std::move(tok));
        };
        switch (c) {
            case '{': return single(TokenKind::LBrace);
            case '}': return single(TokenKind::RBrace);
            case '(': return single(TokenKind::LParen);
            case ')': return single(TokenKind::RParen);
            case ';': return single(TokenKind::Semi);
            case ':': return single(TokenKind::Colon);
            case ',': return single(TokenKind::Comma);
            case '=': return single(TokenKind::Equals);
            case '"': return string_literal();
            default: break;
        }
        if (is_alpha(c)) return word();
        if (is_digit(c) || (c == '-' && is_digit(peek(1)))) return number();
        unsigned char uc = static_cast<unsigned char>(c);
        if (uc < 0x20 || uc >= 0x7f) {
            return fail("unexpected byte 0x" + hex(uc));
        }
        return fail(std::string("unexpected character '") + c + "'");
    }

    static std::string hex(unsigned char c) {
        const char* digits = "0123456789abcdef";
        return {digits[c >> 4], digits[c & 0xf]};
    }

    std::optional<Token> word() {
        Token tok;
        tok.span = span_here(0);
        std::size_t start = pos_;
        bool hyphenated = false;
        while (is_word_char(peek())) advance();
        while (peek() == '-' && is_alpha(peek(1))) {
            hyphenated = true;
            advance();
            while (is_word_char(peek())) advance();
        }
        tok.text = std::string(src_.substr(start, pos_ - start));
        tok.kind = hyphenated ? TokenKind::HyphenWord : TokenKind::Ident;
        tok.span.length = static_cast<std::uint32_t>(pos_ - start);
        return tok;
    }

    std::optional<Token> number() {
        Token tok;
        tok.span = span_here(0);
        std::size_t start = pos_;
        if (peek() == '-') advance();
        while (is_digit(peek())) advance();
        bool real = false;
        if (peek() == '.' && is_digit(peek(1))) {
            real = true;
            advance();
            while (is_digit(peek())) advance();
        }
        if (is_word_char(peek())) {
            auto len = static_cast<std::uint32_t>(pos_ - start + 1);
            line_ = tok.span.line;
            col_ = tok.span.column;
            pos_ = start;
            return fail("malformed number literal", len);
        }
        tok.text = std::string(src_.substr(start, pos_ - start));
        tok.span.length = static_cast<std::uint32_t>(pos_ - start);
        if (real) {
            tok.kind = TokenKind::Real;
            char* endp = nullptr;
            tok.real = std::strtod(tok.text.c_str(), &endp);
        } else {
            tok.kind = TokenKind::Integer;
            auto [ptr, ec] =
                std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), tok.integer);
            if (ec != std::errc() || ptr != tok.text.data() + tok.text.size()) {
                error_ = Diagnostic{tok.span, Severity::Error, "integer literal out of range"};
                return std::nullopt;
            }
        }
        return tok;
    }

    std::optional<Token> string_literal() {
        Token tok;
        tok.kind = TokenKind::String;
        tok.span = span_here(0);
        std::size_t start = pos_;
        advance();  // opening quote
        while (true) {
            char c = peek();
            if (pos_ >= src_.size() || c == '\n') {
                error_ = Diagnostic{tok.span, Severity::Error, "unterminated string literal"};
                error_.span.length = static_cast<std::uint32_t>(pos_ - start);
                return std::nullopt;
            }
            if (c == '"') {
                advance();
                break;
            }
            if (c == '\\') {
                char e = peek(1);
                if (e == '"' || e == '\\') {
                    tok.text.push_back(e);
                    advance(2);
                    continue;
                }
                if (e == 'n') {
                    tok.text.push_back('\n');
                    advance(2);
                    continue;
                }
                return fail("unknown escape sequence", 2);
            }
            tok.text.push_back(c);
            advance();
        }
        tok.span.length = static_cast<std::uint32_t>(pos_ - start);
        return tok;
    }

    std::string_view src_;
    std::string_view file_;
    std::size_t pos_ = 0;
    std::uint32_t line_ = 1;
    std::uint32_t col_ = 1;
    Diagnostic error_;
};

}  // namespace

std::string_view token_kind_name(TokenKind k) {
    switch (k) {
        case TokenKind::Ident: return "identifier";
        case TokenKind::HyphenWord: return "hyphenated word";
        case TokenKind::Integer: return "integer";
        case TokenKind::Real: return "number";
        case TokenKind::String: return "string";
        case TokenKind::LBrace: return "'{'";
        case TokenKind::RBrace: return "'}'";
        case TokenKind::LParen: return "'('";
        case TokenKind::RParen: return "')'";
        case TokenKind::Semi: return "';'";
        case TokenKind::Colon: return "':'";
        case TokenKind::Comma: return "','";
        case TokenKind::Equals: return "'='";
        case TokenKind::End: return "end of file";
    }
    return "token";
}

Outcome<std::vector<Token>> tokenize(std::string_view source, std::string_view file) {
    return Lexer(source, file).run();
}

bool is_reserved_word(std::string_view word) {
    for (const char* r : kReserved) {
        if (word == r) return true;
    }
    return false;
}

}  // namespace iotforge::detail
