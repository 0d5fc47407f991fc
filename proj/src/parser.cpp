#include <algorithm>
#include <limits>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "iotforge/frontend.hpp"
#include "lexer.hpp"

namespace iotforge {

using detail::Token;
using detail::TokenKind;

namespace {

struct SyntaxError {
    Diagnostic diag;
};

class ParserBase {
public:
    explicit ParserBase(std::vector<Token> toks) : toks_(std::move(toks)) {}

protected:
    const Token& cur() const { return toks_[pos_]; }
    const Token& peek(std::size_t n = 1) const {
        return toks_[std::min(pos_ + n, toks_.size() - 1)];
    }
    bool at_end() const { return cur().kind == TokenKind::End; }

    Token take() {
        Token t = toks_[pos_];
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }

    [[noreturn]] void fail(const SourceSpan& span, std::string msg) const {
        throw SyntaxError{Diagnostic{span, Severity::Error, std::move(msg)}};
    }

    [[noreturn]] void fail_expected(std::string_view what) const {
        std::string found = cur().kind == TokenKind::End
                                ? std::string("end of file")
                                : "'" + cur().text + "'";
        fail(cur().span, "expected " + std::string(what) + ", found " + found);
    }

    bool at_keyword(std::string_view kw) const {
        return (cur().kind == TokenKind::Ident || cur().kind == TokenKind::HyphenWord) &&
               cur().text == kw;
    }

    bool accept(TokenKind k) {
        if (cur().kind != k) return false;
        take();
        return true;
    }

    Token expect(TokenKind k) {
        if (cur().kind != k) fail_expected(detail::token_kind_name(k));
        return take();
    }

    Token expect_keyword(std::string_view kw) {
        if (!at_keyword(kw)) fail_expected("'" + std::string(kw) + "'");
        return take();
    }

    /// `label:` section or field header.
    void expect_label(std::string_view kw) {
        if (!at_keyword(kw) || peek().kind != TokenKind::Colon) {
            fail_expected("'" + std::string(kw) + ":'");
        }
        take();
        take();
    }

    bool at_label(std::string_view kw) const {
        return at_keyword(kw) && peek().kind == TokenKind::Colon;
    }

    Token expect_name(std::string_view what) {
        if (cur().kind != TokenKind::Ident) fail_expected(what);
        if (detail::is_reserved_word(cur().text)) {
            fail(cur().span, "'" + cur().text + "' is a reserved word and cannot be used as " +
                                 std::string(what));
        }
        return take();
    }

    std::string expect_type() {
        if (cur().kind == TokenKind::Ident && is_primitive_type(cur().text)) return take().text;
        return expect_name("a type name").text;
    }

    std::int64_t expect_positive_int(std::string_view what) {
        Token t = expect(TokenKind::Integer);
        if (t.integer < 1) fail(t.span, std::string(what) + " must be at least 1");
        return t.integer;
    }

    std::vector<LogicParam> parse_kv_list() {
        std::vector<LogicParam> out;
        expect(TokenKind::LParen);
        if (accept(TokenKind::RParen)) return out;
        while (true) {
            Token key = expect_name("a parameter name");
            expect(TokenKind::Equals);
            LogicParam p;
            p.key = key.text;
            p.span = key.span;
            p.value = parse_literal();
            out.push_back(std::move(p));
            if (accept(TokenKind::Comma)) continue;
            expect(TokenKind::RParen);
            return out;
        }
    }

    ParamValue parse_literal() {
        ParamValue v;
        const Token& t = cur();
        switch (t.kind) {
            case TokenKind::Integer:
                v.kind = ParamValue::Kind::Integer;
                v.integer = t.integer;
                break;
            case TokenKind::Real:
                v.kind = ParamValue::Kind::Real;
                v.real = t.real;
                break;
            case TokenKind::String:
                v.kind = ParamValue::Kind::String;
                v.text = t.text;
                break;
            case TokenKind::Ident:
                if (t.text == "true" || t.text == "false") {
                    v.kind = ParamValue::Kind::Boolean;
                    v.boolean = t.text == "true";
                } else if (detail::is_reserved_word(t.text)) {
                    fail_expected("a literal value");
                } else {
                    v.kind = ParamValue::Kind::Ident;
                    v.text = t.text;
                }
                break;
            default: fail_expected("a literal value");
        }
        take();
        return v;
    }

    std::vector<Token> parse_ident_list(std::string_view what) {
        std::vector<Token> out;
        out.push_back(expect_name(what));
        while (accept(TokenKind::Comma)) out.push_back(expect_name(what));
        return out;
    }

    void check_unique_params(const std::vector<LogicParam>& params) {
        std::unordered_set<std::string> seen;
        for (const auto& p : params) {
            if (!seen.insert(p.key).second) {
                error(p.span, "duplicate parameter '" + p.key + "'");
            }
        }
    }

    void error(const SourceSpan& span, std::string msg) {
        diags_.push_back(Diagnostic{span, Severity::Error, std::move(msg)});
    }

    /// Tracks first-declaration spans for a namespace of names.
    class NameScope {
    public:
        NameScope(ParserBase& p, std::string kind) : parser_(p), kind_(std::move(kind)) {}
        void declare(const std::string& name, const SourceSpan& span) {
            auto [it, inserted] = first_.emplace(name, span);
            if (!inserted) {
                parser_.error(span, "duplicate " + kind_ + " '" + name + "' (first declared at " +
                                        std::to_string(it->second.line) + ":" +
                                        std::to_string(it->second.column) + ")");
            }
        }

    private:
        ParserBase& parser_;
        std::string kind_;
        std::unordered_map<std::string, SourceSpan> first_;
    };

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::vector<Diagnostic> diags_;
};

template <typename Spec, typename Fn>
Outcome<Spec> run_parser(std::string_view source, std::string_view file, Fn&& fn) {
    auto toks = detail::tokenize(source, file);
    if (!toks) return toks.diagnostics();
    try {
        return fn(std::move(toks).value());
    } catch (const SyntaxError& e) {
        return std::vector<Diagnostic>{e.diag};
    }
}

// ---------------------------------------------------------------- vocabulary

class VocabularyParser : ParserBase {
public:
    using ParserBase::ParserBase;

    Outcome<VocabularySpec> parse() {
        VocabularySpec v;
        expect_keyword("vocabulary");
        Token name = expect_name("a vocabulary name");
        v.name = name.text;
        v.span = name.span;
        while (!at_end()) {
            if (at_label("regions")) {
                expect_label("regions");
                while (cur().kind == TokenKind::Ident && !detail::is_reserved_word(cur().text)) {
                    Token r = take();
                    expect(TokenKind::Semi);
                    v.regions.push_back(RegionDecl{r.text, r.span});
                }
            } else if (at_label("datatypes")) {
                expect_label("datatypes");
                while (at_keyword("datatype")) v.records.push_back(parse_record());
            } else if (at_label("resources")) {
                expect_label("resources");
                while (true) {
                    if (at_keyword("sensor")) {
                        v.sensors.push_back(parse_sensor());
                    } else if (at_keyword("actuator")) {
                        v.actuators.push_back(parse_actuator());
                    } else if (at_keyword("storage")) {
                        v.storages.push_back(parse_storage());
                    } else {
                        break;
                    }
                }
            } else {
                fail_expected("a section ('regions:', 'datatypes:' or 'resources:')");
            }
        }
        check(v);
        if (!diags_.empty()) {
            sort_diagnostics(diags_);
            return diags_;
        }
        return v;
    }

private:
    RecordDecl parse_record() {
        expect_keyword("datatype");
        Token name = expect_name("a datatype name");
        RecordDecl r{name.text, {}, name.span};
        expect(TokenKind::LBrace);
        do {
            Token field = expect_name("a field name");
            expect(TokenKind::Colon);
            std::string type = expect_type();
            expect(TokenKind::Semi);
            r.fields.push_back(TypedName{field.text, type, field.span});
        } while (!accept(TokenKind::RBrace));
        return r;
    }

    SensorDecl parse_sensor() {
        expect_keyword("sensor");
        Token name = expect_name("a sensor name");
        SensorDecl s{name.text, {}, name.span};
        expect(TokenKind::LBrace);
        do {
            expect_keyword("generate");
            Token data = expect_name("a data name");
            expect(TokenKind::Colon);
            std::string type = expect_type();
            expect(TokenKind::Semi);
            s.generates.push_back(TypedName{data.text, type, data.span});
        } while (!accept(TokenKind::RBrace));
        return s;
    }

    ActuatorDecl parse_actuator() {
        expect_keyword("actuator");
        Token name = expect_name("an actuator name");
        ActuatorDecl a{name.text, {}, name.span};
        expect(TokenKind::LBrace);
        do {
            expect_keyword("action");
            Token act = expect_name("an action name");
            ActionDecl decl{act.text, {}, act.span};
            expect(TokenKind::LParen);
            if (!accept(TokenKind::RParen)) {
                while (true) {
                    Token p = expect_name("a parameter name");
                    expect(TokenKind::Colon);
                    std::string type = expect_type();
                    decl.params.push_back(TypedName{p.text, type, p.span});
                    if (accept(TokenKind::Comma)) continue;
                    expect(TokenKind::RParen);
                    break;
                }
            }
            expect(TokenKind::Semi);
            a.actions.push_back(std::move(decl));
        } while (!accept(TokenKind::RBrace));
        return a;
    }

    StorageDecl parse_storage() {
        expect_keyword("storage");
        Token name = expect_name("a storage name");
        StorageDecl s;
        s.name = name.text;
        s.span = name.span;
        expect(TokenKind::LBrace);
        expect_keyword("generate");
        Token data = expect_name("a data name");
        s.data_name = data.text;
        expect(TokenKind::Colon);
        s.data_type = expect_type();
        expect_keyword("accessed-by");
        Token key = expect_name("a key name");
        s.key_name = key.text;
        expect(TokenKind::Colon);
        s.key_type = expect_type();
        expect(TokenKind::Semi);
        expect(TokenKind::RBrace);
        data_spans_[s.name] = data.span;
        key_spans_[s.name] = key.span;
        return s;
    }

    void check_type(const std::string& type, const SourceSpan& span,
                    const std::unordered_set<std::string>& known) {
        if (is_primitive_type(type) || known.count(type)) return;
        error(span, "unknown type '" + type + "'");
    }

    void check(const VocabularySpec& v) {
        NameScope decls(*this, "name");
        for (const auto& r : v.regions) decls.declare(r.name, r.span);
        for (const auto& r : v.records) decls.declare(r.name, r.span);

        // Resources in source order so the later duplicate is the one reported.
        struct Named {
            const std::string* name;
            const SourceSpan* span;
        };
        std::vector<Named> resources;
        for (const auto& s : v.sensors) resources.push_back({&s.name, &s.span});
        for (const auto& a : v.actuators) resources.push_back({&a.name, &a.span});
        for (const auto& s : v.storages) resources.push_back({&s.name, &s.span});
        std::stable_sort(resources.begin(), resources.end(), [](const Named& a, const Named& b) {
            return std::tie(a.span->line, a.span->column) < std::tie(b.span->line, b.span->column);
        });
        for (const auto& r : resources) decls.declare(*r.name, *r.span);

        std::unordered_set<std::string> earlier_records;
        std::unordered_set<std::string> all_records;
        for (const auto& r : v.records) all_records.insert(r.name);
        for (const auto& r : v.records) {
            NameScope fields(*this, "field in datatype '" + r.name + "'");
            for (const auto& f : r.fields) {
                fields.declare(f.name, f.span);
                if (!is_primitive_type(f.type) && !earlier_records.count(f.type)) {
                    error(f.span, all_records.count(f.type)
                                      ? "field type '" + f.type +
                                            "' must be declared before datatype '" + r.name + "'"
                                      : "unknown type '" + f.type + "'");
                }
            }
            earlier_records.insert(r.name);
        }

        NameScope data(*this, "data name");
        NameScope actions(*this, "action name");
        for (const auto& s : v.sensors) {
            for (const auto& g : s.generates) {
                data.declare(g.name, g.span);
                check_type(g.type, g.span, all_records);
            }
        }
        for (const auto& a : v.actuators) {
            for (const auto& act : a.actions) {
                actions.declare(act.name, act.span);
                NameScope params(*this, "parameter of action '" + act.name + "'");
                for (const auto& p : act.params) {
                    params.declare(p.name, p.span);
                    check_type(p.type, p.span, all_records);
                }
            }
        }
        for (const auto& s : v.storages) {
            const SourceSpan& dspan = data_spans_[s.name];
            const SourceSpan& kspan = key_spans_[s.name];
            data.declare(s.data_name, dspan);
            check_type(s.data_type, dspan, all_records);
            if (!is_primitive_type(s.key_type)) {
                error(kspan, "storage key '" + s.key_name + "' must have a primitive type");
            }
        }
    }

    std::unordered_map<std::string, SourceSpan> data_spans_;
    std::unordered_map<std::string, SourceSpan> key_spans_;
};

// -------------------------------------------------------------- architecture

class ArchitectureParser : ParserBase {
public:
    using ParserBase::ParserBase;

    Outcome<ArchitectureSpec> parse() {
        ArchitectureSpec a;
        expect_keyword("architecture");
        Token name = expect_name("an architecture name");
        a.name = name.text;
        a.span = name.span;
        expect_keyword("uses");
        Token vocab = expect_name("a vocabulary name");
        a.vocabulary_name = vocab.text;
        a.vocabulary_span = vocab.span;
        while (!at_end()) {
            if (!at_keyword("service")) fail_expected("'service'");
            a.services.push_back(parse_service());
        }
        NameScope services(*this, "service");
        NameScope produced(*this, "produced data name");
        for (const auto& s : a.services) {
            services.declare(s.name, s.span);
            for (const auto& p : s.produces) produced.declare(p.name, p.span);
        }
        if (!diags_.empty()) {
            sort_diagnostics(diags_);
            return diags_;
        }
        return a;
    }

private:
    std::int64_t parse_duration() {
        Token amount = expect(TokenKind::Integer);
        if (amount.integer < 1) fail(amount.span, "period must be at least 1");
        if (cur().kind != TokenKind::Ident) fail_expected("a time unit (ms, s, min)");
        std::int64_t factor = 0;
        if (cur().text == "ms") factor = 1;
        else if (cur().text == "s") factor = 1000;
        else if (cur().text == "min") factor = 60000;
        else fail_expected("a time unit (ms, s, min)");
        take();
        if (amount.integer > std::numeric_limits<std::int64_t>::max() / factor) {
            fail(amount.span, "period is too large");
        }
        return amount.integer * factor;
    }

    LogicBinding parse_logic() {
        LogicBinding l;
        l.span = cur().span;
        if (at_keyword("builtin")) {
            take();
            if (cur().kind != TokenKind::Ident && cur().kind != TokenKind::HyphenWord) {
                fail_expected("a builtin name");
            }
            Token name = take();
            l.kind = LogicBinding::Kind::Builtin;
            l.builtin_name = name.text;
            l.span = name.span;
            if (cur().kind == TokenKind::LParen) {
                l.builtin_params = parse_kv_list();
                check_unique_params(l.builtin_params);
            }
        } else if (at_keyword("extern")) {
            take();
            Token key = expect_name("a handler key");
            l.kind = LogicBinding::Kind::Extern;
            l.handler_key = key.text;
            l.span = key.span;
        } else {
            fail_expected("'builtin' or 'extern'");
        }
        return l;
    }

    ServiceDecl parse_service() {
        expect_keyword("service");
        Token name = expect_name("a service name");
        ServiceDecl s;
        s.name = name.text;
        s.span = name.span;
        expect(TokenKind::LBrace);
        expect_label("scope");
        Token scope = expect_name("a region name");
        s.scope = scope.text;
        s.scope_span = scope.span;
        expect(TokenKind::Semi);
        bool has_logic = false;
        while (!accept(TokenKind::RBrace)) {
            if (at_keyword("consume")) {
                take();
                Token data = expect_name("a data name");
                ConsumeClause c{data.text, std::nullopt, std::nullopt, data.span};
                if (at_keyword("window")) {
                    take();
                    auto w = expect_positive_int("window");
                    if (w > std::numeric_limits<std::uint32_t>::max()) {
                        fail(toks_[pos_ - 1].span, "window is too large");
                    }
                    c.window = static_cast<std::uint32_t>(w);
                }
                if (at_keyword("every")) {
                    take();
                    c.period_ms = parse_duration();
                }
                expect(TokenKind::Semi);
                for (const auto& prev : s.consumes) {
                    if (prev.data_name == c.data_name) {
                        error(c.span, "service '" + s.name + "' consumes '" + c.data_name +
                                          "' more than once");
                    }
                }
                s.consumes.push_back(std::move(c));
            } else if (at_keyword("produce")) {
                take();
                Token data = expect_name("a data name");
                expect(TokenKind::Colon);
                std::string type = expect_type();
                expect(TokenKind::Semi);
                s.produces.push_back(TypedName{data.text, type, data.span});
            } else if (at_keyword("request")) {
                take();
                Token data = expect_name("a data name");
                expect(TokenKind::LParen);
                Token key = expect_name("a key data name");
                expect(TokenKind::RParen);
                expect_keyword("from");
                Token storage = expect_name("a storage name");
                expect(TokenKind::Semi);
                s.requests.push_back(RequestClause{data.text, key.text, storage.text, data.span});
            } else if (at_keyword("command")) {
                take();
                Token action = expect_name("an action name");
                CommandClause c;
                c.action_name = action.text;
                c.span = action.span;
                expect(TokenKind::LParen);
                if (!accept(TokenKind::RParen)) {
                    for (const auto& t : parse_ident_list("a data name")) c.args.push_back(t.text);
                    expect(TokenKind::RParen);
                }
                expect_keyword("to");
                c.actuator_name = expect_name("an actuator name").text;
                expect(TokenKind::Semi);
                s.commands.push_back(std::move(c));
            } else if (at_label("logic")) {
                SourceSpan at = cur().span;
                expect_label("logic");
                LogicBinding l = parse_logic();
                expect(TokenKind::Semi);
                if (has_logic) {
                    error(at, "service '" + s.name + "' has more than one logic binding");
                } else {
                    s.logic = std::move(l);
                    has_logic = true;
                }
            } else {
                fail_expected("a service clause ('consume', 'produce', 'request', 'command', "
                              "'logic:') or '}'");
            }
        }
        if (!has_logic) error(s.span, "service '" + s.name + "' has no logic binding");
        return s;
    }
};

// ---------------------------------------------------------------- deployment

class DeploymentParser : ParserBase {
public:
    using ParserBase::ParserBase;

    Outcome<DeploymentSpec> parse() {
        DeploymentSpec d;
        expect_keyword("deployment");
        Token name = expect_name("a deployment name");
        d.name = name.text;
        d.span = name.span;
        expect_keyword("uses");
        Token vocab = expect_name("a vocabulary name");
        d.vocabulary_name = vocab.text;
        d.vocabulary_span = vocab.span;
        while (!at_end()) {
            if (!at_keyword("device")) fail_expected("'device'");
            d.devices.push_back(parse_device());
        }
        NameScope devices(*this, "device");
        for (const auto& dev : d.devices) devices.declare(dev.name, dev.span);
        if (!diags_.empty()) {
            sort_diagnostics(diags_);
            return diags_;
        }
        return d;
    }

private:
    DeviceDecl parse_device() {
        expect_keyword("device");
        Token name = expect_name("a device name");
        DeviceDecl dev;
        dev.name = name.text;
        dev.span = name.span;
        expect(TokenKind::LBrace);
        expect_label("region");
        NameScope coords(*this, "region coordinate in device '" + dev.name + "'");
        do {
            Token region = expect_name("a region name");
            expect(TokenKind::Equals);
            Token value = expect(TokenKind::Integer);
            coords.declare(region.text, region.span);
            dev.coords.push_back(RegionCoord{region.text, value.integer, region.span});
        } while (accept(TokenKind::Comma));
        expect(TokenKind::Semi);
        expect_label("resources");
        NameScope resources(*this, "resource in device '" + dev.name + "'");
        for (const auto& t : parse_ident_list("a resource name")) {
            resources.declare(t.text, t.span);
            dev.resources.push_back(t.text);
            dev.resource_spans.push_back(t.span);
        }
        expect(TokenKind::Semi);
        expect_label("platform");
        dev.platform = expect_name("a platform tag").text;
        expect(TokenKind::Semi);
        expect(TokenKind::RBrace);
        return dev;
    }
};

// ----------------------------------------------------------------- manifests

class LogicManifestParser : ParserBase {
public:
    using ParserBase::ParserBase;

    Outcome<LogicManifest> parse() {
        LogicManifest m;
        NameScope keys(*this, "handler");
        while (!at_end()) {
            expect_keyword("handler");
            Token key = expect_name("a handler key");
            expect(TokenKind::Equals);
            if (cur().kind != TokenKind::Ident && cur().kind != TokenKind::HyphenWord) {
                fail_expected("a builtin name");
            }
            HandlerBinding h;
            h.key = key.text;
            h.span = key.span;
            h.builtin_name = take().text;
            if (cur().kind == TokenKind::LParen) {
                h.params = parse_kv_list();
                check_unique_params(h.params);
            }
            expect(TokenKind::Semi);
            keys.declare(h.key, h.span);
            m.handlers.push_back(std::move(h));
        }
        if (!diags_.empty()) {
            sort_diagnostics(diags_);
            return diags_;
        }
        return m;
    }
};

class DriverManifestParser : ParserBase {
public:
    using ParserBase::ParserBase;

    Outcome<DriverManifest> parse() {
        DriverManifest m;
        NameScope resources(*this, "driver for resource");
        while (!at_end()) {
            expect_keyword("driver");
            Token res = expect_name("a resource name");
            expect(TokenKind::Equals);
            DriverBinding b;
            b.resource = res.text;
            b.span = res.span;
            if (at_keyword("trace")) {
                take();
            } else if (at_keyword("extern")) {
                take();
                b.is_extern = true;
                b.extern_key = expect_name("a driver key").text;
            } else {
                fail_expected("'trace' or 'extern'");
            }
            expect(TokenKind::Semi);
            resources.declare(b.resource, b.span);
            m.drivers.push_back(std::move(b));
        }
        if (!diags_.empty()) {
            sort_diagnostics(diags_);
            return diags_;
        }
        return m;
    }
};

}  // namespace

Outcome<VocabularySpec> parse_vocabulary(std::string_view source, std::string_view file) {
    return run_parser<VocabularySpec>(source, file, [](std::vector<Token> t) {
        return VocabularyParser(std::move(t)).parse();
    });
}

Outcome<ArchitectureSpec> parse_architecture(std::string_view source, std::string_view file) {
    return run_parser<ArchitectureSpec>(source, file, [](std::vector<Token> t) {
        return ArchitectureParser(std::move(t)).parse();
    });
}

Outcome<DeploymentSpec> parse_deployment(std::string_view source, std::string_view file) {
    return run_parser<DeploymentSpec>(source, file, [](std::vector<Token> t) {
        return DeploymentParser(std::move(t)).parse();
    });
}

Outcome<LogicManifest> parse_logic_manifest(std::string_view source, std::string_view file) {
    return run_parser<LogicManifest>(source, file, [](std::vector<Token> t) {
        return LogicManifestParser(std::move(t)).parse();
    });
}

Outcome<DriverManifest> parse_driver_manifest(std::string_view source, std::string_view file) {
    return run_parser<DriverManifest>(source, file, [](std::vector<Token> t) {
        return DriverManifestParser(std::move(t)).parse();
    });
}

}  // namespace iotforge
