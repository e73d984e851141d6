// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#include "dicl/parse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <regex>
#include <sstream>

namespace dicl::parse {

namespace {

// ---- generic reader ---------------------------------------------------------
//
// Reads the Python-dict-like notation models produce: dicts, lists,
// "key: value" pairs inside lists, quoted strings, and bare words.

struct Value {
    enum class Kind { kScalar, kList, kDict, kPair };
    Kind kind = Kind::kScalar;
    std::string text;  // scalar contents
    bool quoted = false;
    std::vector<Value> items;  // list elements; dict as k0,v0,k1,v1,...; pair as k,v
};

enum class QuoteFamily { kNone, kSingle, kDouble };

constexpr std::size_t kMaxDepth = 64;

class Reader {
public:
    explicit Reader(std::string_view text) : s_(text) {}

    Value read_root() {
        const auto open = s_.find('{');
        if (open == std::string_view::npos) throw ParseError("no dictionary found in answer");
        pos_ = open;
        return read_value(0);
    }

private:
    QuoteFamily quote_at(std::size_t p, std::size_t& width) const {
        width = 1;
        if (p >= s_.size()) return QuoteFamily::kNone;
        const char c = s_[p];
        if (c == '\'' || c == '`') return QuoteFamily::kSingle;
        if (c == '"') return QuoteFamily::kDouble;
        // U+2018..U+201D curly quotes: E2 80 98..9D
        if (static_cast<unsigned char>(c) == 0xE2 && p + 2 < s_.size() &&
            static_cast<unsigned char>(s_[p + 1]) == 0x80) {
            const auto c2 = static_cast<unsigned char>(s_[p + 2]);
            width = 3;
            if (c2 == 0x98 || c2 == 0x99) return QuoteFamily::kSingle;
            if (c2 == 0x9C || c2 == 0x9D) return QuoteFamily::kDouble;
        }
        width = 1;
        return QuoteFamily::kNone;
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool at_delimiter_or_end(std::size_t p) const {
        while (p < s_.size() && std::isspace(static_cast<unsigned char>(s_[p]))) ++p;
        return p >= s_.size() || s_[p] == ',' || s_[p] == ':' || s_[p] == ']' || s_[p] == '}';
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(what + " at offset " + std::to_string(pos_));
    }

    Value read_value(std::size_t depth) {
        if (depth > kMaxDepth) fail("nesting too deep");
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of answer");
        const char c = s_[pos_];
        if (c == '{') return read_dict(depth);
        if (c == '[') return read_list(depth);
        std::size_t width = 0;
        if (auto fam = quote_at(pos_, width); fam != QuoteFamily::kNone) return read_string(fam, width);
        return read_bare();
    }

    Value read_string(QuoteFamily family, std::size_t open_width) {
        pos_ += open_width;
        Value v;
        v.quoted = true;
        while (pos_ < s_.size()) {
            const char c = s_[pos_];
            if (c == '\\' && pos_ + 1 < s_.size() &&
                (s_[pos_ + 1] == '\\' || s_[pos_ + 1] == '\'' || s_[pos_ + 1] == '"')) {
                v.text.push_back(s_[pos_ + 1]);
                pos_ += 2;
                continue;
            }
            std::size_t width = 0;
            // A quote closes only before a delimiter: "kid's toys" stays one string.
            if (quote_at(pos_, width) == family && at_delimiter_or_end(pos_ + width)) {
                pos_ += width;
                return v;
            }
            v.text.push_back(c);
            ++pos_;
        }
        fail("unterminated string");
    }

    Value read_bare() {
        Value v;
        const auto start = pos_;
        while (pos_ < s_.size()) {
            const char c = s_[pos_];
            if (c == ',' || c == ':' || c == '[' || c == ']' || c == '{' || c == '}') break;
            ++pos_;
        }
        auto raw = s_.substr(start, pos_ - start);
        while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.back()))) raw.remove_suffix(1);
        if (raw.empty()) fail("expected a value");
        v.text = std::string(raw);
        return v;
    }

    Value read_list(std::size_t depth) {
        ++pos_;  // '['
        Value list;
        list.kind = Value::Kind::kList;
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == ']') {
            ++pos_;
            return list;
        }
        for (;;) {
            Value elem = read_value(depth + 1);
            skip_ws();
            if (pos_ < s_.size() && s_[pos_] == ':') {
                ++pos_;
                Value pair;
                pair.kind = Value::Kind::kPair;
                pair.items.push_back(std::move(elem));
                pair.items.push_back(read_value(depth + 1));
                elem = std::move(pair);
                skip_ws();
            }
            list.items.push_back(std::move(elem));
            if (pos_ >= s_.size()) fail("unterminated list");
            if (s_[pos_] == ',') {
                ++pos_;
                skip_ws();
                if (pos_ < s_.size() && s_[pos_] == ']') {
                    ++pos_;
                    return list;
                }
                continue;
            }
            if (s_[pos_] == ']') {
                ++pos_;
                return list;
            }
            fail("expected ',' or ']'");
        }
    }

    Value read_dict(std::size_t depth) {
        ++pos_;  // '{'
        Value dict;
        dict.kind = Value::Kind::kDict;
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == '}') {
            ++pos_;
            return dict;
        }
        for (;;) {
            Value key = read_value(depth + 1);
            if (key.kind != Value::Kind::kScalar) fail("dictionary keys must be scalars");
            skip_ws();
            if (pos_ >= s_.size() || s_[pos_] != ':') fail("expected ':' after key");
            ++pos_;
            Value val = read_value(depth + 1);
            dict.items.push_back(std::move(key));
            dict.items.push_back(std::move(val));
            skip_ws();
            if (pos_ >= s_.size()) fail("unterminated dictionary");
            if (s_[pos_] == ',') {
                ++pos_;
                skip_ws();
                if (pos_ < s_.size() && s_[pos_] == '}') {
                    ++pos_;
                    return dict;
                }
                continue;
            }
            if (s_[pos_] == '}') {
                ++pos_;
                return dict;
            }
            fail("expected ',' or '}'");
        }
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::optional<double> as_number(const std::string& text) {
    const auto t = trim(text);
    if (t.empty() || t.size() > 32) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

// "product 3", "Product #3", "3", "3.0" -> 3
std::optional<std::size_t> product_ref(const std::string& text) {
    static const std::regex re(R"(^\s*(?:products?|items?|p)?\s*#?\s*(\d{1,9})(?:\.0+)?\s*$)", std::regex::icase);
    if (text.size() > 48) return std::nullopt;
    std::smatch m;
    const std::string t = text;
    if (!std::regex_match(t, m, re)) return std::nullopt;
    return static_cast<std::size_t>(std::stoul(m[1].str()));
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream in(s);
    std::string part;
    while (std::getline(in, part, ',')) {
        if (auto t = trim(part); !t.empty()) parts.push_back(std::move(t));
    }
    return parts;
}

std::string quote(const std::string& s) {
    const bool has_single = s.find('\'') != std::string::npos;
    const bool has_double = s.find('"') != std::string::npos;
    const char q = has_single && !has_double ? '"' : '\'';
    std::string out(1, q);
    for (char c : s) {
        if (c == q || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back(q);
    return out;
}

std::string format_score(double v) {
    if (v == std::floor(v)) return std::to_string(static_cast<long long>(v));
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

}  // namespace

std::string canonical_label(std::string_view raw, std::string_view prefix) {
    static const std::regex re(R"(^\s*(?:bundles?|intents?)?\s*(?:number|no\.?)?\s*#?\s*(\d{1,9})\s*$)",
                               std::regex::icase);
    if (raw.size() > 48) return trim(raw);
    const std::string t(raw);
    std::smatch m;
    if (std::regex_match(t, m, re)) {
        return std::string(prefix) + " " + std::to_string(std::stoul(m[1].str()));
    }
    return trim(raw);
}

BundleParse parse_bundle_answer(std::string_view text, std::size_t session_length) {
    const Value root = Reader(text).read_root();
    if (root.kind != Value::Kind::kDict) throw ParseError("bundle answer is not a dictionary");

    BundleParse out;
    for (std::size_t i = 0; i + 1 < root.items.size(); i += 2) {
        const auto label = canonical_label(root.items[i].text, "bundle");
        const Value& val = root.items[i + 1];

        std::vector<std::string> refs;
        const auto collect = [&refs](const Value& v) {
            if (v.kind != Value::Kind::kScalar) return false;
            for (auto& part : split_commas(v.text)) refs.push_back(std::move(part));
            return true;
        };
        if (val.kind == Value::Kind::kList) {
            for (const auto& e : val.items) {
                if (!collect(e)) out.warnings.push_back(label + ": ignored a nested value");
            }
        } else if (!collect(val)) {
            out.warnings.push_back(label + ": value is not a product list");
            continue;
        }

        IndexSet members;
        for (const auto& r : refs) {
            const auto idx = product_ref(r);
            if (!idx) {
                out.warnings.push_back(label + ": unreadable product reference '" + r + "'");
            } else if (*idx < 1 || *idx > session_length) {
                out.warnings.push_back(label + ": product " + std::to_string(*idx) + " out of range 1.." +
                                       std::to_string(session_length));
            } else {
                members.insert(*idx);
            }
        }
        if (members.empty()) {
            out.warnings.push_back(label + ": empty bundle dropped");
            continue;
        }
        const bool repeat_set = std::any_of(out.bundles.begin(), out.bundles.end(),
                                            [&](const auto& e) { return e.second == members; });
        if (repeat_set) {
            out.warnings.push_back(label + ": duplicate of an earlier bundle dropped");
            continue;
        }
        if (!out.bundles.insert(label, std::move(members))) {
            out.warnings.push_back(label + ": repeated label dropped");
        }
    }
    return out;
}

IntentMap parse_intent_answer(std::string_view text) {
    const Value root = Reader(text).read_root();
    if (root.kind != Value::Kind::kDict) throw ParseError("intent answer is not a dictionary");
    IntentMap out;
    for (std::size_t i = 0; i + 1 < root.items.size(); i += 2) {
        const auto label = canonical_label(root.items[i].text, "bundle");
        const Value& val = root.items[i + 1];
        std::string intent;
        if (val.kind == Value::Kind::kScalar) {
            intent = trim(val.text);
        } else if (val.kind == Value::Kind::kList && !val.items.empty() &&
                   val.items.front().kind == Value::Kind::kScalar) {
            intent = trim(val.items.front().text);
        } else {
            throw ParseError("intent for '" + label + "' is not text");
        }
        if (intent.empty()) throw ParseError("empty intent for '" + label + "'");
        out.insert(label, std::move(intent));
    }
    return out;
}

RatingMap parse_rating_answer(std::string_view text) {
    const Value root = Reader(text).read_root();
    if (root.kind != Value::Kind::kDict) throw ParseError("rating answer is not a dictionary");
    RatingMap out;
    for (std::size_t i = 0; i + 1 < root.items.size(); i += 2) {
        const auto label = canonical_label(root.items[i].text, "intent");
        const Value& val = root.items[i + 1];

        std::vector<std::pair<const Value*, const Value*>> pairs;
        if (val.kind == Value::Kind::kList) {
            for (const auto& e : val.items) {
                if (e.kind == Value::Kind::kPair) pairs.emplace_back(&e.items[0], &e.items[1]);
            }
        } else if (val.kind == Value::Kind::kDict) {
            for (std::size_t j = 0; j + 1 < val.items.size(); j += 2) pairs.emplace_back(&val.items[j], &val.items[j + 1]);
        } else {
            throw ParseError("rating for '" + label + "' is not a list of metric scores");
        }

        std::optional<double> nat, cov, mot;
        for (const auto& [k, v] : pairs) {
            const auto metric = lower(trim(k->text));
            if (v->kind != Value::Kind::kScalar) throw ParseError("non-numeric score for " + metric);
            const auto score = as_number(v->text);
            if (!score) throw ParseError("non-numeric score '" + v->text + "' for " + metric);
            if (metric == "naturalness") nat = score;
            else if (metric == "coverage") cov = score;
            else if (metric == "motivation") mot = score;
        }
        const auto check = [&label](const std::optional<double>& s, const char* name, double hi) {
            if (!s) throw ParseError(label + " lacks a " + name + " score");
            if (*s < 1.0 || *s > hi) {
                throw ParseError(label + " " + name + " score " + format_score(*s) + " outside 1.." +
                                 format_score(hi));
            }
            return *s;
        };
        RatingTriple t{check(nat, "Naturalness", 3), check(cov, "Coverage", 3), check(mot, "Motivation", 2)};
        out.insert(label, t);
    }
    return out;
}

std::string format_bundles(const BundleMap& bundles) {
    std::string out = "{";
    bool first = true;
    for (const auto& [label, members] : bundles) {
        if (!first) out += ", ";
        first = false;
        out += quote(label) + ": [";
        bool first_item = true;
        for (auto idx : members) {
            if (!first_item) out += ", ";
            first_item = false;
            out += "'product " + std::to_string(idx) + "'";
        }
        out += "]";
    }
    return out + "}";
}

std::string format_intents(const IntentMap& intents) {
    std::string out = "{";
    bool first = true;
    for (const auto& [label, text] : intents) {
        if (!first) out += ", ";
        first = false;
        out += quote(label) + ": " + quote(text);
    }
    return out + "}";
}

std::string format_ratings(const RatingMap& ratings) {
    std::string out = "{";
    bool first = true;
    for (const auto& [label, t] : ratings) {
        if (!first) out += ", ";
        first = false;
        out += quote(label) + ": ['Naturalness': " + format_score(t.naturalness) +
               ", 'Coverage': " + format_score(t.coverage) + ", 'Motivation': " + format_score(t.motivation) + "]";
    }
    return out + "}";
}

bool same_bundles(const BundleMap& a, const BundleMap& b) {
    if (a.size() != b.size()) return false;
    std::vector<IndexSet> x, y;
    for (const auto& [_, s] : a) x.push_back(s);
    for (const auto& [_, s] : b) y.push_back(s);
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    return x == y;
}

}  // namespace dicl::parse
