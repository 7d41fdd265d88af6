#pragma once

#include <string>
#include <vector>

namespace expertprompt {

/// Removes persona leakage from the start of expert-conditioned answers:
/// sentences like "As a physicist specializing in atomic structure, I can
/// give you a description...". Leakage shows up almost exclusively at the
/// beginning of an answer, so only leading sentences are examined.
///
/// A leading sentence is stripped when it starts with one of the configured
/// openers (case-insensitive), contains a comma clause and carries a
/// first-person marker. At most the first two sentences are removed; the
/// result is always a suffix of the input.
class LeakFilter {
public:
    /// Default openers: "as a", "as an", "being a", "being an", "speaking as".
    LeakFilter();
    explicit LeakFilter(std::vector<std::string> openers);

    std::string strip(const std::string& raw) const;

    /// True when the given single sentence matches the leak pattern.
    bool matches_leak(const std::string& sentence) const;

    const std::vector<std::string>& openers() const { return openers_; }

private:
    std::vector<std::string> openers_;
};

/// Stateless convenience wrapper around the default filter.
std::string strip_identity_leak(const std::string& raw);

}  // namespace expertprompt
