#include "coex/script.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "coex/parser.hpp"
#include "coex/printer.hpp"

namespace coex::runtime {

using datalog::PredicateRef;
using datalog::Relation;
using datalog::Tuple;
using datalog::Value;

namespace {

// Cursor over one script line for tuples and tuple sets. Bare lowercase
// words are string constants, so rows read naturally as (p4, 5).
class LineCursor {
public:
    LineCursor(const std::string& text, int line) : text_(text), line_(line) {}

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    bool at_end() {
        skip_ws();
        return pos_ >= text_.size();
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    void expect(char c) {
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != c) {
            throw ScriptError(line_, std::string("expected '") + c + "'");
        }
        ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Value value() {
        skip_ws();
        if (pos_ >= text_.size()) throw ScriptError(line_, "expected a constant");
        char c = text_[pos_];
        if (c == '\'' || c == '"') {
            ++pos_;
            std::string s;
            while (pos_ < text_.size() && text_[pos_] != c) s += text_[pos_++];
            if (pos_ >= text_.size()) throw ScriptError(line_, "unterminated string");
            ++pos_;
            return s;
        }
        if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
            std::string digits;
            if (c == '-') {
                digits += c;
                ++pos_;
            }
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                digits += text_[pos_++];
            }
            if (digits.empty() || digits == "-") throw ScriptError(line_, "expected a constant");
            return static_cast<std::int64_t>(std::stoll(digits));
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string word;
            while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                           text_[pos_] == '_')) {
                word += text_[pos_++];
            }
            return word;
        }
        throw ScriptError(line_, "expected a constant");
    }

    Tuple tuple() {
        expect('(');
        Tuple t;
        if (!accept(')')) {
            t.push_back(value());
            while (accept(',')) t.push_back(value());
            expect(')');
        }
        return t;
    }

    Relation relation() {
        expect('{');
        Relation r;
        bool first = true;
        while (!accept('}')) {
            if (!first) expect(',');
            Tuple t = tuple();
            if (first) {
                r.arity = t.size();
                first = false;
            } else if (t.size() != r.arity) {
                throw ScriptError(line_, "tuples of mixed arity in one set");
            }
            r.tuples.insert(std::move(t));
        }
        return r;
    }

private:
    const std::string& text_;
    std::size_t pos_ = 0;
    int line_;
};

struct QualifiedName {
    std::string version;
    std::string name;
};

QualifiedName split_qualified(const std::string& token, int line) {
    auto dot = token.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == token.size()) {
        throw ScriptError(line, "expected <version>.<name>, got '" + token + "'");
    }
    return {token.substr(0, dot), token.substr(dot + 1)};
}

void print_relation_diff(std::ostream& out, const Relation& expected, const Relation& actual) {
    out << "--- expected\n+++ actual\n";
    for (const auto& t : expected.tuples) {
        if (!actual.contains(t)) out << "-" << datalog::printer::to_string(t) << "\n";
    }
    for (const auto& t : actual.tuples) {
        if (!expected.contains(t)) out << "+" << datalog::printer::to_string(t) << "\n";
    }
}

}  // namespace

ScriptResult run_script(const std::string& text, const std::filesystem::path& base_dir,
                        const verify::Universe& derivation_bound, std::ostream& out) {
    Registry registry;
    ScriptResult result;

    std::istringstream lines(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(lines, raw)) {
        ++lineno;
        std::string line = raw.substr(0, raw.find('#'));
        std::istringstream words(line);
        std::string command;
        if (!(words >> command)) continue;

        try {
            if (command == "register") {
                std::string version;
                if (!(words >> version)) throw ScriptError(lineno, "register needs a version id");
                registry.register_version(version);
            } else if (command == "view") {
                std::string target, kw, path;
                if (!(words >> target >> kw >> path) || kw != "spec") {
                    throw ScriptError(lineno, "usage: view <version>.<name> spec <file.dl>");
                }
                auto qn = split_qualified(target, lineno);
                std::filesystem::path spec_path = base_dir / path;
                std::ifstream in(spec_path);
                if (!in) {
                    throw ScriptError(lineno, "cannot open spec file " + spec_path.string());
                }
                std::stringstream buffer;
                buffer << in.rdbuf();
                auto bx = std::make_shared<derive::DerivedBx>(
                    derive::derive_all(derive::load_bx_spec(buffer.str()), derivation_bound));
                registry.add_view(qn.version, qn.name, std::move(bx));
            } else if (command == "insert" || command == "delete") {
                std::string target;
                if (!(words >> target)) throw ScriptError(lineno, command + " needs a view");
                auto qn = split_qualified(target, lineno);
                std::string rest;
                std::getline(words, rest);
                LineCursor cursor(rest, lineno);
                Tuple t = cursor.tuple();
                Relation current = registry.query_view(qn.version, qn.name);
                Relation changed{current.arity, {t}};
                delta::Delta d = command == "insert"
                                     ? delta::Delta{changed, Relation{current.arity, {}}}
                                     : delta::Delta{Relation{current.arity, {}}, changed};
                registry.update_view(qn.version, qn.name, d);
            } else if (command == "expect") {
                std::string target;
                if (!(words >> target)) throw ScriptError(lineno, "expect needs a relation");
                auto qn = split_qualified(target, lineno);
                std::string rest;
                std::getline(words, rest);
                LineCursor cursor(rest, lineno);
                Relation expected = cursor.relation();
                Relation actual;
                if (qn.version == "physical") {
                    PredicateRef pred;
                    try {
                        pred = datalog::classify_predicate(qn.name, false, false);
                    } catch (const datalog::ValidationError& e) {
                        throw ScriptError(lineno, e.what());
                    }
                    actual = registry.physical_relation(pred);
                } else {
                    actual = registry.query_view(qn.version, qn.name);
                }
                if (expected.tuples.empty()) expected.arity = actual.arity;
                if (expected != actual) {
                    ++result.failed_expectations;
                    out << "expect failed at line " << lineno << ": " << target << "\n";
                    print_relation_diff(out, expected, actual);
                }
            } else if (command == "dump") {
                out << registry.snapshot();
            } else {
                throw ScriptError(lineno, "unknown command '" + command + "'");
            }
        } catch (const ScriptError&) {
            throw;
        } catch (const Error& e) {
            throw ScriptError(lineno, e.what());
        }
    }
    return result;
}

}  // namespace coex::runtime
