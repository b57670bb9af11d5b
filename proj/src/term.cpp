/*
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "heterotest/term.hpp"

#include "heterotest/error.hpp"

#include <algorithm>
#include <set>

namespace heterotest {

namespace {

bool is_variable_token(const std::string& s)
{
    return s.size() > 1 && s.front() == '?';
}

const std::set<std::string>& operators()
{
    static const std::set<std::string> ops = {
        "+", "-", "*", "div", "mod", "min", "max", "<", "<=", ">", ">=",
        "==", "!=", "and", "or", "not", "len", "nth"};
    return ops;
}

Value boolean(bool b)
{
    return Value::atom(b ? "true" : "false");
}

}  // namespace

bool is_known_operator(const std::string& op)
{
    return operators().count(op) > 0;
}

bool is_true(const Value& v)
{
    return v.is_atom("true");
}

// --- Pattern -------------------------------------------------------------

Pattern Pattern::literal(Value v)
{
    if (v.is_sequence()) {
        std::vector<Pattern> items;
        for (const auto& item : v.as_sequence())
            items.push_back(literal(item));
        return sequence(std::move(items));
    }
    Pattern p;
    p.kind_ = Kind::Literal;
    p.literal_ = std::move(v);
    return p;
}

Pattern Pattern::variable(std::string name)
{
    Pattern p;
    p.kind_ = Kind::Variable;
    p.name_ = std::move(name);
    return p;
}

Pattern Pattern::wildcard()
{
    return Pattern{};
}

Pattern Pattern::sequence(std::vector<Pattern> items)
{
    Pattern p;
    p.kind_ = Kind::Sequence;
    p.items_ = std::move(items);
    return p;
}

bool Pattern::match(const Value& v, Bindings& bindings) const
{
    switch (kind_) {
    case Kind::Literal:
        return v == literal_;
    case Kind::Wildcard:
        return !v.is_reserved();
    case Kind::Variable: {
        if (v.is_reserved())
            return false;
        auto [it, inserted] = bindings.emplace(name_, v);
        return inserted || it->second == v;
    }
    case Kind::Sequence: {
        if (!v.is_sequence() || v.as_sequence().size() != items_.size())
            return false;
        const auto& values = v.as_sequence();
        for (std::size_t i = 0; i < items_.size(); ++i) {
            if (!items_[i].match(values[i], bindings))
                return false;
        }
        return true;
    }
    }
    return false;
}

bool Pattern::may_overlap(const Pattern& other) const
{
    if (kind_ == Kind::Variable || kind_ == Kind::Wildcard) {
        if (other.kind_ == Kind::Literal)
            return !other.literal_.is_reserved();
        return true;
    }
    if (other.kind_ == Kind::Variable || other.kind_ == Kind::Wildcard)
        return other.may_overlap(*this);
    if (kind_ == Kind::Literal && other.kind_ == Kind::Literal)
        return literal_ == other.literal_;
    if (kind_ == Kind::Sequence && other.kind_ == Kind::Sequence) {
        if (items_.size() != other.items_.size())
            return false;
        for (std::size_t i = 0; i < items_.size(); ++i) {
            if (!items_[i].may_overlap(other.items_[i]))
                return false;
        }
        return true;
    }
    // Literal against sequence pattern.
    const Pattern& lit = kind_ == Kind::Literal ? *this : other;
    const Pattern& seq = kind_ == Kind::Literal ? other : *this;
    Bindings scratch;
    return seq.match(lit.literal_, scratch);
}

std::vector<std::string> Pattern::variables() const
{
    std::vector<std::string> out;
    if (kind_ == Kind::Variable)
        out.push_back(name_);
    for (const auto& item : items_) {
        auto sub = item.variables();
        out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
}

// --- Term ----------------------------------------------------------------

Term Term::literal(Value v)
{
    if (v.is_sequence()) {
        std::vector<Term> items;
        for (const auto& item : v.as_sequence())
            items.push_back(literal(item));
        return sequence(std::move(items));
    }
    Term t;
    t.kind_ = Kind::Literal;
    t.literal_ = std::move(v);
    return t;
}

Term Term::variable(std::string name)
{
    Term t;
    t.kind_ = Kind::Variable;
    t.name_ = std::move(name);
    return t;
}

Term Term::sequence(std::vector<Term> items)
{
    Term t;
    t.kind_ = Kind::Sequence;
    t.args_ = std::move(items);
    return t;
}

Term Term::apply(std::string op, std::vector<Term> args)
{
    Term t;
    t.kind_ = Kind::Apply;
    t.name_ = std::move(op);
    t.args_ = std::move(args);
    return t;
}

std::optional<Value> Term::evaluate(const Bindings& bindings) const
{
    switch (kind_) {
    case Kind::Literal:
        return literal_;
    case Kind::Variable: {
        auto it = bindings.find(name_);
        if (it == bindings.end())
            return std::nullopt;
        return it->second;
    }
    case Kind::Sequence: {
        std::vector<Value> items;
        for (const auto& a : args_) {
            auto v = a.evaluate(bindings);
            if (!v)
                return std::nullopt;
            items.push_back(std::move(*v));
        }
        return Value::sequence(std::move(items));
    }
    case Kind::Apply:
        break;
    }

    std::vector<Value> vals;
    for (const auto& a : args_) {
        auto v = a.evaluate(bindings);
        if (!v)
            return std::nullopt;
        vals.push_back(std::move(*v));
    }
    const std::string& op = name_;

    if (op == "not") {
        if (vals.size() != 1)
            return std::nullopt;
        return boolean(!is_true(vals[0]));
    }
    if (op == "and" || op == "or") {
        bool acc = op == "and";
        for (const auto& v : vals)
            acc = op == "and" ? (acc && is_true(v)) : (acc || is_true(v));
        return boolean(acc);
    }
    if (op == "<" || op == "<=" || op == ">" || op == ">=" || op == "==" || op == "!=") {
        if (vals.size() != 2)
            return std::nullopt;
        auto c = vals[0] <=> vals[1];
        if (op == "<")
            return boolean(c < 0);
        if (op == "<=")
            return boolean(c <= 0);
        if (op == ">")
            return boolean(c > 0);
        if (op == ">=")
            return boolean(c >= 0);
        if (op == "==")
            return boolean(c == 0);
        return boolean(c != 0);
    }
    if (op == "len") {
        if (vals.size() != 1 || !vals[0].is_sequence())
            return std::nullopt;
        return Value::integer(static_cast<std::int64_t>(vals[0].as_sequence().size()));
    }
    if (op == "nth") {
        if (vals.size() != 2 || !vals[0].is_sequence() || !vals[1].is_integer())
            return std::nullopt;
        auto idx = vals[1].as_integer();
        const auto& seq = vals[0].as_sequence();
        if (idx < 0 || idx >= static_cast<std::int64_t>(seq.size()))
            return std::nullopt;
        return seq[static_cast<std::size_t>(idx)];
    }

    // Integer arithmetic.
    if (vals.empty())
        return std::nullopt;
    for (const auto& v : vals) {
        if (!v.is_integer())
            return std::nullopt;
    }
    if (op == "-" && vals.size() == 1)
        return Value::integer(-vals[0].as_integer());
    std::int64_t acc = vals[0].as_integer();
    for (std::size_t i = 1; i < vals.size(); ++i) {
        std::int64_t x = vals[i].as_integer();
        if (op == "+")
            acc += x;
        else if (op == "-")
            acc -= x;
        else if (op == "*")
            acc *= x;
        else if (op == "div" || op == "mod") {
            if (x == 0)
                return std::nullopt;
            // Floored, so that mod is never negative for positive divisors.
            std::int64_t q = acc / x;
            if ((acc % x != 0) && ((acc < 0) != (x < 0)))
                --q;
            acc = op == "div" ? q : acc - q * x;
        } else if (op == "min")
            acc = std::min(acc, x);
        else if (op == "max")
            acc = std::max(acc, x);
        else
            return std::nullopt;
    }
    return Value::integer(acc);
}

std::vector<std::string> Term::variables() const
{
    std::vector<std::string> out;
    if (kind_ == Kind::Variable)
        out.push_back(name_);
    for (const auto& a : args_) {
        auto sub = a.variables();
        out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
}

// --- JSON ----------------------------------------------------------------

Pattern pattern_from_json(const nlohmann::json& j)
{
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "_")
            return Pattern::wildcard();
        if (is_variable_token(s))
            return Pattern::variable(s.substr(1));
        return Pattern::literal(Value::atom(s));
    }
    if (j.is_array()) {
        std::vector<Pattern> items;
        for (const auto& e : j)
            items.push_back(pattern_from_json(e));
        return Pattern::sequence(std::move(items));
    }
    return Pattern::literal(value_from_json(j));
}

nlohmann::json pattern_to_json(const Pattern& p)
{
    switch (p.kind()) {
    case Pattern::Kind::Literal:
        if (p.literal_value().is_atom() &&
            (p.literal_value().as_atom() == "_" || p.literal_value().as_atom().starts_with("?")))
            return nlohmann::json{{"atom", p.literal_value().as_atom()}};
        return value_to_json(p.literal_value());
    case Pattern::Kind::Variable:
        return "?" + p.variable_name();
    case Pattern::Kind::Wildcard:
        return "_";
    case Pattern::Kind::Sequence: {
        auto arr = nlohmann::json::array();
        for (const auto& item : p.items())
            arr.push_back(pattern_to_json(item));
        return arr;
    }
    }
    return nullptr;
}

Term term_from_json(const nlohmann::json& j)
{
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (is_variable_token(s))
            return Term::variable(s.substr(1));
        return Term::literal(Value::atom(s));
    }
    if (j.is_array()) {
        std::vector<Term> items;
        for (const auto& e : j)
            items.push_back(term_from_json(e));
        return Term::sequence(std::move(items));
    }
    if (j.is_object() && j.contains("op")) {
        for (const auto& [key, _] : j.items()) {
            if (key != "op" && key != "args")
                throw Error(ErrorCode::Parse, "unknown key '" + key + "' in term " + j.dump());
        }
        const auto op = j.at("op").get<std::string>();
        if (!is_known_operator(op))
            throw Error(ErrorCode::Parse, "unknown operator '" + op + "'");
        std::vector<Term> args;
        if (j.contains("args")) {
            for (const auto& e : j.at("args"))
                args.push_back(term_from_json(e));
        }
        return Term::apply(op, std::move(args));
    }
    return Term::literal(value_from_json(j));
}

nlohmann::json term_to_json(const Term& t)
{
    switch (t.kind()) {
    case Term::Kind::Literal:
        return value_to_json(t.literal_value());
    case Term::Kind::Variable:
        return "?" + t.name();
    case Term::Kind::Sequence: {
        auto arr = nlohmann::json::array();
        for (const auto& a : t.args())
            arr.push_back(term_to_json(a));
        return arr;
    }
    case Term::Kind::Apply: {
        auto args = nlohmann::json::array();
        for (const auto& a : t.args())
            args.push_back(term_to_json(a));
        return nlohmann::json{{"op", t.name()}, {"args", args}};
    }
    }
    return nullptr;
}

}  // namespace heterotest
