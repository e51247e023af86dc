#pragma once

#include <string>
#include <vector>

#include "snmc/errors.hpp"

namespace snmc {

// Ordered list of coordinate groups whose indices are estimated. Coordinates
// are 1-based and stored sorted: a group is a set, so {2,1} and {1,2} are the
// same group.
class GroupSpec {
public:
    GroupSpec(std::vector<std::vector<int>> groups, int dimension);

    // Parses "1;2;1,2" into three groups.
    static GroupSpec parse(const std::string& text, int dimension);

    int count() const { return static_cast<int>(groups_.size()); }
    int dimension() const { return dimension_; }
    const std::vector<int>& group(int j) const { return groups_.at(static_cast<std::size_t>(j)); }

    // "1", "2", "1+2": CSV-safe group labels.
    std::string label(int j) const;

    std::vector<int> complement(int j) const;

    // Position of the group equal to the complement of group j, or -1.
    int find_complement(int j) const;

private:
    std::vector<std::vector<int>> groups_;
    int dimension_;
};

std::string group_label(const std::vector<int>& group);

} // namespace snmc
