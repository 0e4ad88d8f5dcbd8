#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "distfield/common.hpp"
#include "distfield/error.hpp"

namespace distfield {

// 2D landmark set with correspondence ids matching a partner set.
struct MinutiaSet {
    std::vector<Vec2> points;
    std::vector<int> ids;

    size_t size() const { return points.size(); }

    void add(int id, double x, double y) {
        ids.push_back(id);
        points.push_back({x, y});
    }

    void validate() const {
        if (points.size() != ids.size()) throw DimensionMismatch("minutia ids/points length");
        std::unordered_set<int> seen;
        for (int id : ids)
            if (!seen.insert(id).second) throw DimensionMismatch("duplicate minutia id");
    }
};

// CSV with header `id,x,y`, floating-point pixels.
inline void saveMinutiaCsv(const MinutiaSet& set, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    f << "id,x,y\n";
    char buf[96];
    for (size_t i = 0; i < set.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", set.ids[i], set.points[i].x,
                      set.points[i].y);
        f << buf;
    }
    if (!f) throw IoError("write failed: " + path);
}

inline MinutiaSet loadMinutiaCsv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read " + path);
    std::string line;
    if (!std::getline(f, line) || line.rfind("id,x,y", 0) != 0)
        throw IoError("bad minutiae header in " + path);
    MinutiaSet set;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        int id;
        double x, y;
        if (!std::getline(ss, tok, ',')) throw IoError("bad row in " + path);
        id = std::stoi(tok);
        if (!std::getline(ss, tok, ',')) throw IoError("bad row in " + path);
        x = std::stod(tok);
        if (!std::getline(ss, tok, ',')) throw IoError("bad row in " + path);
        y = std::stod(tok);
        set.add(id, x, y);
    }
    set.validate();
    return set;
}

}  // namespace distfield
