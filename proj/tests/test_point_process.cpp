#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chemdist/point_process.hpp"
#include "chemdist/stats.hpp"

using namespace chemdist;

TEST_SUITE_BEGIN("point_process");

TEST_CASE("poisson mean count matches lambda * volume") {
    const Window w(2, 100.0);
    double total = 0.0;
    const int reps = 150;
    for (int r = 0; r < reps; ++r)
        total += static_cast<double>(sample_poisson(w, 1.0, 1000 + r).size());
    const double mean = total / reps;
    // sd of the sample mean is 100/sqrt(150) ~ 8.2
    CHECK(std::abs(mean - 10000.0) < 45.0);
}

TEST_CASE("nonpositive intensity is rejected") {
    const Window w(2, 10.0);
    CHECK_THROWS_AS(sample_poisson(w, 0.0, 1), ParameterError);
    CHECK_THROWS_AS(sample_poisson(w, -1.0, 1), ParameterError);
}

TEST_CASE("expected count guard") {
    const Window w(3, 1000.0);
    CHECK_THROWS_AS(sample_poisson(w, 1000.0, 1), ResourceError);
}

TEST_CASE("same seed, same cloud; different seed, different cloud") {
    const Window w(2, 30.0);
    const auto a = sample_poisson(w, 1.0, 42);
    const auto b = sample_poisson(w, 1.0, 42);
    CHECK(a.size() == b.size());
    CHECK(a.coords == b.coords);
    CHECK(a.marks == b.marks);
    CHECK(a.keys == b.keys);
    const auto c = sample_poisson(w, 1.0, 43);
    CHECK(a.coords != c.coords);
}

TEST_CASE("full lattice on a centred window is the expected site range") {
    const Window w(1, 10.0);
    const auto cloud = sample_site_lattice(w, 1.0, 7);
    REQUIRE(cloud.size() == 10);
    for (int i = 0; i < 10; ++i) CHECK(cloud.coords[i] == doctest::Approx(-5.0 + i));
    CHECK(cloud.lattice);
}

TEST_CASE("lattice retention fraction") {
    const Window w(2, 100.0);
    double kept = 0.0;
    const int reps = 40;
    for (int r = 0; r < reps; ++r)
        kept += static_cast<double>(sample_site_lattice(w, 0.5, 500 + r).size());
    const double frac = kept / (reps * 10000.0);
    // 3 s.e. of the pooled fraction
    const double se = std::sqrt(0.25 / (reps * 10000.0));
    CHECK(std::abs(frac - 0.5) < 3.0 * se);
}

TEST_CASE("lattice determinism and retention validation") {
    const Window w(2, 20.0);
    const auto a = sample_site_lattice(w, 0.7, 9);
    const auto b = sample_site_lattice(w, 0.7, 9);
    CHECK(a.coords == b.coords);
    CHECK(a.marks == b.marks);
    CHECK_THROWS_AS(sample_site_lattice(w, 0.0, 1), ParameterError);
    CHECK_THROWS_AS(sample_site_lattice(w, 1.5, 1), ParameterError);
}

TEST_CASE("clouds are simple (no duplicate locations)") {
    const Window w(2, 330.0);
    const auto cloud = sample_poisson(w, 1.0, 2024);
    REQUIRE(cloud.size() > 100000);
    std::vector<std::pair<double, double>> pts(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        auto p = cloud.location(i);
        pts[i] = {p[0], p[1]};
    }
    std::sort(pts.begin(), pts.end());
    CHECK(std::adjacent_find(pts.begin(), pts.end()) == pts.end());
}

TEST_CASE("marks are uniform (KS at the 1% level) and strictly inside (0,1)") {
    const Window w(2, 330.0);
    const auto cloud = sample_poisson(w, 1.0, 99);
    REQUIRE(cloud.size() >= 100000);
    for (double u : cloud.marks) {
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
    const double d = ks_statistic_uniform(cloud.marks);
    CHECK(d < ks_critical(0.01, cloud.size()));
}

TEST_CASE("translation invariance: counts in shifted sub-boxes") {
    // Disjoint sub-boxes carry i.i.d. Poisson counts; a chi-square statistic
    // across them must sit inside generous quantile bounds, and shifted
    // (overlapping) boxes must show the same mean.
    const Window w(2, 120.0);
    const auto cloud = sample_poisson(w, 1.0, 31337);

    auto count_in = [&](double cx, double cy, double side) {
        const Box box{{cx, cy}, side};
        std::size_t n = 0;
        for (std::size_t i = 0; i < cloud.size(); ++i)
            if (box.contains(cloud.location(i))) ++n;
        return static_cast<double>(n);
    };

    const double side = 10.0;
    const double mu = side * side;
    double chi2 = 0.0;
    int k = 0;
    for (int i = -5; i < 5; i += 2)
        for (int j = -5; j < 5; j += 2) {
            const double c = count_in(i * side + side / 2.0, j * side + side / 2.0, side);
            chi2 += (c - mu) * (c - mu) / mu;
            ++k;
        }
    REQUIRE(k == 25);
    // chi^2_25: [~5, ~57] covers 0.9995 both sides
    CHECK(chi2 > 5.0);
    CHECK(chi2 < 57.0);

    double shifted_mean = 0.0;
    for (int s = 0; s < 10; ++s) shifted_mean += count_in(-20.0 + 3.7 * s, 11.3 - 2.1 * s, side);
    shifted_mean /= 10.0;
    CHECK(std::abs(shifted_mean - mu) < 4.0 * std::sqrt(mu / 10.0) + 5.0);
}

TEST_CASE("orientations live in [0, pi)") {
    const Window w(2, 40.0);
    const auto cloud = sample_poisson(w, 1.0, 5, true);
    REQUIRE(cloud.has_orientations());
    for (double t : cloud.orientations) {
        CHECK(t >= 0.0);
        CHECK(t < std::numbers::pi);
    }
}

TEST_CASE("vertex CSV shape") {
    const Window w(2, 6.0);
    const auto cloud = sample_poisson(w, 1.0, 12, true);
    std::ostringstream os;
    write_vertex_csv(os, cloud);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "id,x1,x2,mark,orientation");
    std::size_t lines = 0;
    std::string line;
    while (std::getline(is, line)) ++lines;
    CHECK(lines == cloud.size());
}

TEST_CASE("grid index counts within radius") {
    const Window w(2, 50.0);
    const auto cloud = sample_poisson(w, 1.0, 77);
    GridIndex grid(cloud, 3.0);
    for (std::size_t i = 0; i < 20 && i < cloud.size(); ++i) {
        const double r2 = 17.3;
        std::size_t brute = 0;
        for (std::size_t j = 0; j < cloud.size(); ++j)
            if (squared_distance(cloud.location(i), cloud.location(j)) < r2) ++brute;
        CHECK(grid.count_within(cloud.location(i), r2) == brute);
    }
}

TEST_SUITE_END();
