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

#include <json.hpp>

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace heterotest {

// Reserved atoms. None of these may appear in a user alphabet.
inline constexpr std::string_view kBottomAtom = "#bot";    // undefined element
inline constexpr std::string_view kNoMemAtom = "#nomem";   // empty port
inline constexpr std::string_view kLambdaAtom = "#lambda"; // empty symbol

bool is_reserved_atom(std::string_view name);

/// Finite multiset of atoms. Zero counts are never stored.
///
/// The canonical text form repeats every symbol by its multiplicity in
/// sorted order: {c:2, f:1} is "ccf". When any symbol is longer than one
/// character the symbols are separated by single spaces instead.
class Multiset {
public:
    Multiset() = default;

    static Multiset parse(std::string_view text);
    std::string canonical() const;

    std::int64_t count(const std::string& symbol) const;
    std::int64_t size() const;  // total multiplicity
    bool empty() const { return counts_.empty(); }
    const std::map<std::string, std::int64_t>& counts() const { return counts_; }

    void add(const std::string& symbol, std::int64_t n = 1);
    void add(const Multiset& other, std::int64_t times = 1);
    /// Throws std::invalid_argument when `other * times` is not contained.
    void subtract(const Multiset& other, std::int64_t times = 1);

    bool contains(const Multiset& other, std::int64_t times = 1) const;
    /// Largest k with k copies of `part` contained in this multiset.
    std::int64_t max_copies(const Multiset& part) const;

    /// Symbols with repetition, sorted.
    std::vector<std::string> expanded() const;

    friend bool operator==(const Multiset&, const Multiset&) = default;
    friend std::strong_ordering operator<=>(const Multiset& a, const Multiset& b);

private:
    std::map<std::string, std::int64_t> counts_;
};

/// Immutable closed term: atom, integer, finite sequence or multiset.
///
/// Values are totally ordered: atoms (lexicographic) < integers (numeric)
/// < sequences (lexicographic) < multisets (lexicographic on the sorted
/// symbol list).
class Value {
public:
    enum class Kind { Atom, Integer, Sequence, Multiset };

    Value() : data_(std::string(kBottomAtom)) {}

    static Value atom(std::string name) { return Value(Data(std::move(name))); }
    static Value integer(std::int64_t v) { return Value(Data(v)); }
    static Value sequence(std::vector<Value> items) { return Value(Data(std::move(items))); }
    static Value multiset(heterotest::Multiset m) { return Value(Data(std::move(m))); }

    static Value bottom() { return atom(std::string(kBottomAtom)); }
    static Value nomem() { return atom(std::string(kNoMemAtom)); }
    static Value lambda() { return atom(std::string(kLambdaAtom)); }

    Kind kind() const { return static_cast<Kind>(data_.index()); }
    bool is_atom() const { return kind() == Kind::Atom; }
    bool is_integer() const { return kind() == Kind::Integer; }
    bool is_sequence() const { return kind() == Kind::Sequence; }
    bool is_multiset() const { return kind() == Kind::Multiset; }
    bool is_atom(std::string_view name) const { return is_atom() && as_atom() == name; }
    bool is_nomem() const { return is_atom(kNoMemAtom); }
    bool is_lambda() const { return is_atom(kLambdaAtom); }
    bool is_reserved() const { return is_atom() && is_reserved_atom(as_atom()); }

    const std::string& as_atom() const;
    std::int64_t as_integer() const;
    const std::vector<Value>& as_sequence() const;
    const heterotest::Multiset& as_multiset() const;

    /// Compact text rendering: atoms verbatim (reserved ones as symbols),
    /// sequences as "(a,b)", multisets in canonical form ("λ" when empty).
    std::string to_string() const;

    friend bool operator==(const Value& a, const Value& b) { return a.data_ == b.data_; }
    friend std::strong_ordering operator<=>(const Value& a, const Value& b);

private:
    using Data = std::variant<std::string, std::int64_t, std::vector<Value>, heterotest::Multiset>;
    explicit Value(Data d) : data_(std::move(d)) {}
    Data data_;
};

std::string to_string(const std::vector<Value>& values, std::string_view separator = " ");

// JSON form: string -> atom, integer -> integer, array -> sequence,
// {"multiset": "ccf"} -> multiset, {"atom": "..."} -> atom (escape form).
nlohmann::json value_to_json(const Value& v);
Value value_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_ordered(const nlohmann::json& j);
inline nlohmann::ordered_json value_to_ojson(const Value& v) { return to_ordered(value_to_json(v)); }

}  // namespace heterotest
