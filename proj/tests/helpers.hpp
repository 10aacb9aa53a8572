#ifndef CHEMDIST_TEST_HELPERS_HPP
#define CHEMDIST_TEST_HELPERS_HPP

#include <vector>

#include "chemdist/models.hpp"
#include "chemdist/point_process.hpp"

namespace chemdist::test {

// Hand-assembled cloud; marks default to 0.5.
inline MarkedPointCloud make_cloud(const Window& window, const std::vector<Vec>& points,
                                   std::vector<double> marks = {},
                                   std::vector<double> orientations = {}) {
    MarkedPointCloud cloud;
    cloud.window = window;
    if (marks.empty()) marks.assign(points.size(), 0.5);
    for (std::size_t i = 0; i < points.size(); ++i) {
        cloud.coords.insert(cloud.coords.end(), points[i].begin(), points[i].end());
        cloud.marks.push_back(marks[i]);
    }
    cloud.orientations = std::move(orientations);
    assign_point_keys(cloud);
    return cloud;
}

inline SpatialGraph make_path_graph(const Window& window, const std::vector<Vec>& points) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (std::uint32_t i = 0; i + 1 < points.size(); ++i) edges.emplace_back(i, i + 1);
    return make_graph(make_cloud(window, points), edges);
}

}  // namespace chemdist::test

#endif
