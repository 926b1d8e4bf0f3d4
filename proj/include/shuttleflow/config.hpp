#ifndef SHUTTLEFLOW_CONFIG_HPP
#define SHUTTLEFLOW_CONFIG_HPP

#include "types.hpp"

#include <toml.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace shuttleflow {

/// TOML configuration looked up by dotted key paths ("sav.capacity").
/// Missing keys fall back to the caller's default; present keys of the
/// wrong type are errors.
class Config {
public:
    static Config parse(const std::string& text, const std::string& source = "config") {
        Config cfg;
        cfg.source_ = source;
        try {
            cfg.table_ = toml::parse(text, source);
        } catch (const toml::parse_error& e) {
            const auto& at = e.source().begin;
            throw Error(source + ":" + std::to_string(at.line) + ":" + std::to_string(at.column) + ": " +
                        std::string(e.description()));
        }
        return cfg;
    }

    [[nodiscard]] bool has(const std::string& key) const { return static_cast<bool>(node(key)); }

    [[nodiscard]] std::string string(const std::string& key, const std::string& fallback) const {
        const auto n = node(key);
        if (!n) return fallback;
        if (const auto v = n.value<std::string>(); v && n.is_string()) return *v;
        throw type_error(key, "a string");
    }

    [[nodiscard]] double number(const std::string& key, double fallback) const {
        const auto n = node(key);
        if (!n) return fallback;
        if (n.is_number()) return *n.value<double>();
        throw type_error(key, "a number");
    }

    [[nodiscard]] std::int64_t integer(const std::string& key, std::int64_t fallback) const {
        const auto n = node(key);
        if (!n) return fallback;
        if (n.is_integer()) return *n.value<std::int64_t>();
        if (n.is_floating_point()) {
            const double d = *n.value<double>();
            if (d == std::floor(d)) return static_cast<std::int64_t>(d);
        }
        throw type_error(key, "an integer");
    }

    [[nodiscard]] bool boolean(const std::string& key, bool fallback) const {
        const auto n = node(key);
        if (!n) return fallback;
        if (n.is_boolean()) return *n.value<bool>();
        throw type_error(key, "true or false");
    }

    [[nodiscard]] std::vector<std::string> list(const std::string& key, std::vector<std::string> fallback = {}) const {
        const auto n = node(key);
        if (!n) return fallback;
        const auto* arr = n.as_array();
        if (arr == nullptr) throw type_error(key, "a list of strings");
        std::vector<std::string> out;
        for (const auto& item : *arr) {
            if (!item.is_string()) throw type_error(key, "a list of strings");
            out.push_back(*item.value<std::string>());
        }
        return out;
    }

    [[nodiscard]] std::vector<double> numbers(const std::string& key) const {
        const auto n = node(key);
        if (!n) return {};
        const auto* arr = n.as_array();
        if (arr == nullptr) throw type_error(key, "a list of numbers");
        std::vector<double> out;
        for (const auto& item : *arr) {
            if (!item.is_number()) throw type_error(key, "a list of numbers");
            out.push_back(*item.value<double>());
        }
        return out;
    }

private:
    [[nodiscard]] toml::node_view<const toml::node> node(const std::string& key) const { return table_.at_path(key); }

    [[nodiscard]] Error type_error(const std::string& key, const char* expected) const {
        return Error(source_ + ": key '" + key + "' must be " + expected);
    }

    toml::table table_;
    std::string source_;
};

} // namespace shuttleflow

#endif // SHUTTLEFLOW_CONFIG_HPP
