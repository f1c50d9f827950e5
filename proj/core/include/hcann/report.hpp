#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hcann {

/// Ordered key=value report, one pair per line. Keys under "timing." carry
/// wall-clock values; everything else is reproducible under fixed seeds.
class Report {
  public:
    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, const char* value) { set(key, std::string(value)); }
    void set(const std::string& key, double value);
    void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }
    template <class T>
        requires std::is_integral_v<T>
    void set(const std::string& key, T value) {
        set(key, std::to_string(value));
    }
    void set(const std::string& key, std::optional<double> value) {
        if (value) {
            set(key, *value);
        } else {
            set(key, std::string("unavailable"));
        }
    }

    /// Copies every entry of `other` under `prefix`.
    void merge(const Report& other, const std::string& prefix = "");

    std::optional<std::string> get(const std::string& key) const;
    double get_double(const std::string& key) const;
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    /// Entries whose key does not start with "timing.".
    Report without_timing() const;

    std::string to_text() const;
    static Report parse(const std::string& text);
    static Report load(const std::string& path);
    void save(const std::string& path) const;

    bool operator==(const Report&) const = default;

  private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

std::string format_double(double value);

}  // namespace hcann
