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
#pragma once

#include "heterotest/value.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace heterotest {

using Bindings = std::map<std::string, Value>;

/// Value pattern used on the left of a case.
///
/// JSON: "?x" binds a variable, "_" matches anything, arrays match
/// sequences element-wise, everything else is a literal value.
/// Variables and "_" never match a reserved atom (⊥, ⊥M, λ); write the
/// atom literally to match it.
class Pattern {
public:
    enum class Kind { Literal, Variable, Wildcard, Sequence };

    /// Sequence values become sequence patterns of literals.
    static Pattern literal(Value v);
    static Pattern variable(std::string name);
    static Pattern wildcard();
    static Pattern sequence(std::vector<Pattern> items);

    Kind kind() const { return kind_; }
    const Value& literal_value() const { return literal_; }
    const std::string& variable_name() const { return name_; }
    const std::vector<Pattern>& items() const { return items_; }

    /// Extends `bindings`; a variable already bound must match its value.
    bool match(const Value& v, Bindings& bindings) const;

    /// True when some value could match both patterns (variables are
    /// treated as unconstrained, guards are ignored).
    bool may_overlap(const Pattern& other) const;

    std::vector<std::string> variables() const;

    friend bool operator==(const Pattern&, const Pattern&) = default;

private:
    Kind kind_ = Kind::Wildcard;
    Value literal_;
    std::string name_;
    std::vector<Pattern> items_;
};

/// Expression over bound variables.
///
/// JSON: literals and "?x" as for patterns, arrays build sequences and
/// {"op": name, "args": [...]} applies an operator. Integer operators:
/// + - * div mod min max; comparisons on the total value order:
/// < <= > >= == != (yield atoms "true"/"false"); boolean: and or not;
/// sequences: len nth.
class Term {
public:
    enum class Kind { Literal, Variable, Sequence, Apply };

    static Term literal(Value v);
    static Term variable(std::string name);
    static Term sequence(std::vector<Term> items);
    static Term apply(std::string op, std::vector<Term> args);

    Kind kind() const { return kind_; }
    const Value& literal_value() const { return literal_; }
    const std::string& name() const { return name_; }  // variable or operator
    const std::vector<Term>& args() const { return args_; }

    /// nullopt when the term cannot be evaluated (unbound variable, type
    /// error, division by zero).
    std::optional<Value> evaluate(const Bindings& bindings) const;

    std::vector<std::string> variables() const;

    friend bool operator==(const Term&, const Term&) = default;

private:
    Kind kind_ = Kind::Literal;
    Value literal_;
    std::string name_;
    std::vector<Term> args_;
};

bool is_known_operator(const std::string& op);
bool is_true(const Value& v);

Pattern pattern_from_json(const nlohmann::json& j);
nlohmann::json pattern_to_json(const Pattern& p);
Term term_from_json(const nlohmann::json& j);
nlohmann::json term_to_json(const Term& t);

}  // namespace heterotest
