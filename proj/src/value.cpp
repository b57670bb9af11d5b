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
#include "heterotest/value.hpp"

#include "heterotest/error.hpp"

#include <algorithm>
#include <stdexcept>

namespace heterotest {

bool is_reserved_atom(std::string_view name)
{
    return name == kBottomAtom || name == kNoMemAtom || name == kLambdaAtom;
}

// --- Multiset ------------------------------------------------------------

Multiset Multiset::parse(std::string_view text)
{
    Multiset m;
    if (text.find(' ') != std::string_view::npos) {
        std::size_t pos = 0;
        while (pos < text.size()) {
            while (pos < text.size() && text[pos] == ' ')
                ++pos;
            std::size_t end = text.find(' ', pos);
            if (end == std::string_view::npos)
                end = text.size();
            if (end > pos)
                m.add(std::string(text.substr(pos, end - pos)));
            pos = end;
        }
        return m;
    }
    for (char c : text)
        m.add(std::string(1, c));
    return m;
}

std::string Multiset::canonical() const
{
    bool single = std::all_of(counts_.begin(), counts_.end(),
                              [](const auto& kv) { return kv.first.size() == 1; });
    std::string out;
    for (const auto& [symbol, n] : counts_) {
        for (std::int64_t k = 0; k < n; ++k) {
            if (!single && !out.empty())
                out += ' ';
            out += symbol;
        }
    }
    return out;
}

std::int64_t Multiset::count(const std::string& symbol) const
{
    auto it = counts_.find(symbol);
    return it == counts_.end() ? 0 : it->second;
}

std::int64_t Multiset::size() const
{
    std::int64_t total = 0;
    for (const auto& kv : counts_)
        total += kv.second;
    return total;
}

void Multiset::add(const std::string& symbol, std::int64_t n)
{
    if (n == 0)
        return;
    std::int64_t& slot = counts_[symbol];
    slot += n;
    if (slot < 0)
        throw std::invalid_argument("multiset count for '" + symbol + "' would become negative");
    if (slot == 0)
        counts_.erase(symbol);
}

void Multiset::add(const Multiset& other, std::int64_t times)
{
    for (const auto& [symbol, n] : other.counts_)
        add(symbol, n * times);
}

void Multiset::subtract(const Multiset& other, std::int64_t times)
{
    if (!contains(other, times))
        throw std::invalid_argument("multiset '" + other.canonical() + "' not contained in '" +
                                    canonical() + "'");
    add(other, -times);
}

bool Multiset::contains(const Multiset& other, std::int64_t times) const
{
    for (const auto& [symbol, n] : other.counts_) {
        if (count(symbol) < n * times)
            return false;
    }
    return true;
}

std::int64_t Multiset::max_copies(const Multiset& part) const
{
    if (part.empty())
        throw std::invalid_argument("max_copies of an empty multiset is unbounded");
    std::int64_t best = INT64_MAX;
    for (const auto& [symbol, n] : part.counts_)
        best = std::min(best, count(symbol) / n);
    return best;
}

std::vector<std::string> Multiset::expanded() const
{
    std::vector<std::string> out;
    for (const auto& [symbol, n] : counts_)
        out.insert(out.end(), static_cast<std::size_t>(n), symbol);
    return out;
}

std::strong_ordering operator<=>(const Multiset& a, const Multiset& b)
{
    // Lexicographic comparison of the sorted expansions, without expanding.
    auto ia = a.counts_.begin();
    auto ib = b.counts_.begin();
    std::int64_t left_a = ia == a.counts_.end() ? 0 : ia->second;
    std::int64_t left_b = ib == b.counts_.end() ? 0 : ib->second;
    while (ia != a.counts_.end() && ib != b.counts_.end()) {
        if (auto c = ia->first <=> ib->first; c != 0)
            return c;
        std::int64_t step = std::min(left_a, left_b);
        left_a -= step;
        left_b -= step;
        if (left_a == 0 && ++ia != a.counts_.end())
            left_a = ia->second;
        if (left_b == 0 && ++ib != b.counts_.end())
            left_b = ib->second;
    }
    if (ia == a.counts_.end() && ib == b.counts_.end())
        return std::strong_ordering::equal;
    return ia == a.counts_.end() ? std::strong_ordering::less : std::strong_ordering::greater;
}

// --- Value ---------------------------------------------------------------

namespace {

[[noreturn]] void kind_error(const char* wanted, const Value& v)
{
    throw std::invalid_argument(std::string("value ") + v.to_string() + " is not " + wanted);
}

}  // namespace

const std::string& Value::as_atom() const
{
    if (!is_atom())
        kind_error("an atom", *this);
    return std::get<std::string>(data_);
}

std::int64_t Value::as_integer() const
{
    if (!is_integer())
        kind_error("an integer", *this);
    return std::get<std::int64_t>(data_);
}

const std::vector<Value>& Value::as_sequence() const
{
    if (!is_sequence())
        kind_error("a sequence", *this);
    return std::get<std::vector<Value>>(data_);
}

const Multiset& Value::as_multiset() const
{
    if (!is_multiset())
        kind_error("a multiset", *this);
    return std::get<Multiset>(data_);
}

std::string Value::to_string() const
{
    switch (kind()) {
    case Kind::Atom: {
        const auto& a = std::get<std::string>(data_);
        if (a == kBottomAtom)
            return "⊥";
        if (a == kNoMemAtom)
            return "⊥M";
        if (a == kLambdaAtom)
            return "λ";
        return a;
    }
    case Kind::Integer:
        return std::to_string(std::get<std::int64_t>(data_));
    case Kind::Sequence: {
        std::string out = "(";
        const auto& items = std::get<std::vector<Value>>(data_);
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (i)
                out += ',';
            out += items[i].to_string();
        }
        return out + ")";
    }
    case Kind::Multiset: {
        const auto& m = std::get<Multiset>(data_);
        return m.empty() ? "λ" : m.canonical();
    }
    }
    return {};
}

std::strong_ordering operator<=>(const Value& a, const Value& b)
{
    if (a.data_.index() != b.data_.index())
        return a.data_.index() <=> b.data_.index();
    switch (a.kind()) {
    case Value::Kind::Atom:
        return std::get<std::string>(a.data_) <=> std::get<std::string>(b.data_);
    case Value::Kind::Integer:
        return std::get<std::int64_t>(a.data_) <=> std::get<std::int64_t>(b.data_);
    case Value::Kind::Sequence: {
        const auto& x = std::get<std::vector<Value>>(a.data_);
        const auto& y = std::get<std::vector<Value>>(b.data_);
        return std::lexicographical_compare_three_way(x.begin(), x.end(), y.begin(), y.end());
    }
    case Value::Kind::Multiset:
        return std::get<Multiset>(a.data_) <=> std::get<Multiset>(b.data_);
    }
    return std::strong_ordering::equal;
}

std::string to_string(const std::vector<Value>& values, std::string_view separator)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i)
            out += separator;
        out += values[i].to_string();
    }
    return out;
}

nlohmann::json value_to_json(const Value& v)
{
    switch (v.kind()) {
    case Value::Kind::Atom:
        if (!v.as_atom().empty() && v.as_atom().front() == '?')
            return nlohmann::json{{"atom", v.as_atom()}};
        return v.as_atom();
    case Value::Kind::Integer:
        return v.as_integer();
    case Value::Kind::Sequence: {
        auto arr = nlohmann::json::array();
        for (const auto& item : v.as_sequence())
            arr.push_back(value_to_json(item));
        return arr;
    }
    case Value::Kind::Multiset:
        return nlohmann::json{{"multiset", v.as_multiset().canonical()}};
    }
    return nullptr;
}

nlohmann::ordered_json to_ordered(const nlohmann::json& j)
{
    if (j.is_array()) {
        auto out = nlohmann::ordered_json::array();
        for (const auto& e : j)
            out.push_back(to_ordered(e));
        return out;
    }
    if (j.is_object()) {
        auto out = nlohmann::ordered_json::object();
        for (auto it = j.begin(); it != j.end(); ++it)
            out[it.key()] = to_ordered(it.value());
        return out;
    }
    return nlohmann::ordered_json::parse(j.dump());
}

Value value_from_json(const nlohmann::json& j)
{
    if (j.is_string())
        return Value::atom(j.get<std::string>());
    if (j.is_number_integer())
        return Value::integer(j.get<std::int64_t>());
    if (j.is_array()) {
        std::vector<Value> items;
        items.reserve(j.size());
        for (const auto& e : j)
            items.push_back(value_from_json(e));
        return Value::sequence(std::move(items));
    }
    if (j.is_object() && j.size() == 1) {
        if (j.contains("multiset") && j["multiset"].is_string())
            return Value::multiset(Multiset::parse(j["multiset"].get<std::string>()));
        if (j.contains("atom") && j["atom"].is_string())
            return Value::atom(j["atom"].get<std::string>());
    }
    throw Error(ErrorCode::Parse, "not a value: " + j.dump());
}

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::Parse: return "parse-error";
    case ErrorCode::Io: return "io-error";
    case ErrorCode::InvalidModel: return "invalid-model";
    case ErrorCode::BranchBoundExceeded: return "branch-bound-exceeded";
    case ErrorCode::MissingSample: return "missing-sample";
    case ErrorCode::NondeterministicInput: return "nondeterministic-input";
    case ErrorCode::UnreachableState: return "unreachable-state";
    case ErrorCode::NotMinimal: return "not-minimal";
    case ErrorCode::DftFailure: return "dft-failure";
    case ErrorCode::NondeterministicAutomaton: return "nondeterministic-associated-automaton";
    case ErrorCode::AlphabetCollision: return "alphabet-collision";
    case ErrorCode::UnextendedSystem: return "unextended-system";
    case ErrorCode::NondeterministicProduct: return "nondeterministic-product";
    case ErrorCode::ExplosionBound: return "explosion-bound-exceeded";
    case ErrorCode::TraceReplayMismatch: return "trace-replay-mismatch";
    case ErrorCode::DepthCapExceeded: return "depth-cap-exceeded";
    case ErrorCode::PortIncompatibility: return "port-incompatibility";
    case ErrorCode::OracleTimeout: return "oracle-timeout";
    case ErrorCode::OracleInvalidResult: return "oracle-invalid-result";
    case ErrorCode::Deadlock: return "deadlock";
    case ErrorCode::NoValidMutants: return "no-valid-mutants";
    case ErrorCode::EmptyMutantSet: return "empty-mutant-set";
    }
    return "unknown";
}

}  // namespace heterotest
