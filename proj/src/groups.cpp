#include "snmc/groups.hpp"

#include <algorithm>
#include <sstream>

namespace snmc {

GroupSpec::GroupSpec(std::vector<std::vector<int>> groups, int dimension)
    : groups_(std::move(groups)), dimension_(dimension) {
    if (dimension_ < 1) throw ValidationError("group spec: dimension must be >= 1");
    if (groups_.empty()) throw ValidationError("group spec: at least one group required");
    for (auto& g : groups_) {
        if (g.empty()) throw ValidationError("group spec: empty group");
        std::sort(g.begin(), g.end());
        if (std::adjacent_find(g.begin(), g.end()) != g.end()) {
            throw ValidationError("group spec: duplicate coordinate in group");
        }
        if (g.front() < 1 || g.back() > dimension_) {
            throw ValidationError("group spec: coordinate out of range 1.." +
                                  std::to_string(dimension_));
        }
    }
}

GroupSpec GroupSpec::parse(const std::string& text, int dimension) {
    std::vector<std::vector<int>> groups;
    std::stringstream byGroup(text);
    std::string part;
    while (std::getline(byGroup, part, ';')) {
        std::vector<int> g;
        std::stringstream byCoord(part);
        std::string tok;
        while (std::getline(byCoord, tok, ',')) {
            if (tok.empty()) continue;
            std::size_t pos = 0;
            int v = 0;
            try {
                v = std::stoi(tok, &pos);
            } catch (const std::exception&) {
                throw ValidationError("group spec: cannot parse coordinate '" + tok + "'");
            }
            if (pos != tok.size()) {
                throw ValidationError("group spec: cannot parse coordinate '" + tok + "'");
            }
            g.push_back(v);
        }
        if (!g.empty()) groups.push_back(std::move(g));
    }
    return GroupSpec(std::move(groups), dimension);
}

std::string GroupSpec::label(int j) const { return group_label(group(j)); }

std::vector<int> GroupSpec::complement(int j) const {
    const auto& g = group(j);
    std::vector<int> out;
    for (int c = 1; c <= dimension_; ++c) {
        if (!std::binary_search(g.begin(), g.end(), c)) out.push_back(c);
    }
    return out;
}

int GroupSpec::find_complement(int j) const {
    const std::vector<int> comp = complement(j);
    for (int k = 0; k < count(); ++k) {
        if (groups_[static_cast<std::size_t>(k)] == comp) return k;
    }
    return -1;
}

std::string group_label(const std::vector<int>& group) {
    std::string s;
    for (std::size_t i = 0; i < group.size(); ++i) {
        if (i > 0) s += '+';
        s += std::to_string(group[i]);
    }
    return s;
}

} // namespace snmc
