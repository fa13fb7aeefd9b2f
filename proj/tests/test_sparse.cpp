#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "sparsekfold/sparse.hpp"
#include "support.hpp"

using namespace skf;

namespace {

PointCloud line_cloud(std::initializer_list<double> xs) {
    std::vector<point_t> pts;
    for (double x : xs) pts.push_back(point_t{x});
    return make_point_cloud(pts);
}

lens_t to_original(const std::vector<index_t>& perm, const lens_t& ranks) {
    lens_t out;
    for (index_t r : ranks) out.push_back(perm[std::size_t(r)]);
    std::sort(out.begin(), out.end());
    return out;
}

// exponent map of the dim-0 entries keyed by original site ids
std::map<lens_t, long long> vertex_exponents(const SparseFiltration& f) {
    std::map<lens_t, long long> out;
    for (const FilteredSimplex& fs : f.simplices)
        if (fs.dim() == 0) out[to_original(f.perm, fs.vertices[0])] = fs.z;
    return out;
}

} // namespace

TEST_CASE("grid powers and exponents") {
    CHECK(grid_pow(2.0, 3) == 8.0);
    CHECK(grid_pow(2.0, -2) == 0.25);
    CHECK(grid_pow(1.5, 0) == 1.0);
    CHECK(ceil_exponent(2.0, 0.5) == -1);
    CHECK(ceil_exponent(2.0, 8.0) == 3);
    CHECK(ceil_exponent(2.0, 8.0000001) == 4);
    SplitMix64 g(0x9);
    for (int t = 0; t < 2000; ++t) {
        double b = 1.0 + 0.05 + g.next_double();
        double x = std::exp((g.next_double() * 2 - 1) * 30.0);
        long long z = ceil_exponent(b, x);
        REQUIRE(grid_pow(b, z) >= x);
        REQUIRE(grid_pow(b, z - 1) < x);
    }
}

TEST_CASE("lens freezing radius") {
    Params p;
    p.k = 2;
    p.eps_prime = 0.5;
    SiteSchedule sched = make_schedule({kInf, kInf, kInf, kInf, 2.0, 1.0, 0.5}, p);
    SECTION("lens within the first k sites") {
        CHECK(lens_freezing_radius({0, 1}, sched) == kInf);
    }
    SECTION("formula") {
        // lambda_5 = 2, eps' = 0.5: (1.5 * 2) / 0.5 = 6
        CHECK(lens_freezing_radius({1, 4}, sched) == 6.0);
        CHECK(sched.crit[4] == 6.0);
    }
    SECTION("min over the pair") {
        SiteSchedule s2 = make_schedule({kInf, kInf, kInf, kInf, kInf, kInf, 3.0}, p);
        CHECK(s2.crit[6] == 9.0);
        CHECK(lens_freezing_radius({2, 6}, s2) == 9.0);
    }
}

TEST_CASE("frozen lens radius phases") {
    CHECK(frozen_radius_at(6.0, 0.5, 4.0) == 4.0);
    CHECK(frozen_radius_at(6.0, 0.5, 8.0) == 6.0);
    CHECK(frozen_radius_at(6.0, 0.5, 9.0) == 6.0);  // removal boundary still frozen
    CHECK_FALSE(frozen_radius_at(6.0, 0.5, 9.5).has_value());
    CHECK(frozen_radius_at(kInf, 0.5, 1e300) == 1e300);
}

TEST_CASE("friends") {
    PointCloud cloud = line_cloud({0, 1, 4, 5});
    Params p = make_params(2, 1.0, 1, 0);
    SiteContext ctx = make_context(cloud, p);
    REQUIRE(ctx.perm == std::vector<index_t>{0, 1, 3, 2});
    REQUIRE(ctx.sched.omega[3] == 16.0);

    RangeIndex index(1);
    for (index_t r = 0; r < 3; ++r) index.insert(r, ctx.sites.at(r));
    SECTION("distance filter keeps every predecessor here") {
        CHECK(friends(3, ctx, index) == std::vector<index_t>{0, 1, 2});
    }
    SECTION("infinite radius for the first k sites") {
        RangeIndex idx1(1);
        idx1.insert(0, ctx.sites.at(0));
        CHECK(friends(1, ctx, idx1) == std::vector<index_t>{0});
    }
    SECTION("isolated site yields no candidates") {
        PointCloud far_cloud = make_point_cloud({point_t{0.0}, point_t{100.0}});
        Params p1;
        p1.k = 1;
        p1.epsilon = 1.0;
        p1.eps_prime = 1.0 / 3.0;
        SiteContext c2 = make_context_raw(std::move(far_cloud), {kInf, 0.001}, p1);
        RangeIndex idx(1);
        idx.insert(0, c2.sites.at(0));
        CHECK(friends(1, c2, idx).empty());
    }
}

TEST_CASE("vertex_check") {
    SECTION("pair at unit distance with power-of-two grid") {
        PointCloud cloud = make_point_cloud({point_t{0, 0}, point_t{1, 0}});
        Params p;
        p.k = 2;
        p.eps_prime = 1.0;  // synthetic grid: powers of two
        p.m_max = 1;
        SiteContext ctx = make_context_raw(std::move(cloud), {kInf, kInf}, p);
        double alpha = 0.0;
        auto z = vertex_check({0, 1}, kInf, ctx, &alpha);
        REQUIRE(z.has_value());
        CHECK(*z == -1);
        CHECK_THAT(alpha, Catch::Matchers::WithinAbs(0.5, 1e-12));
    }
    SECTION("single-site lens has zero radius") {
        PointCloud cloud = make_point_cloud({point_t{3.0}});
        Params p = make_params(1, 1.0, 0, 0);
        SiteContext ctx = make_context_raw(std::move(cloud), {kInf}, p);
        auto z = vertex_check({0}, kInf, ctx);
        REQUIRE(z.has_value());
        CHECK(*z == kZeroRadiusExponent);
    }
    SECTION("frozen before birth") {
        PointCloud cloud = make_point_cloud({point_t{0.0}, point_t{10.0}});
        Params p = make_params(2, 1.0, 1, 0);
        SiteContext ctx = make_context_raw(std::move(cloud), {kInf, kInf}, p);
        CHECK_FALSE(vertex_check({0, 1}, 1.0, ctx).has_value());  // alpha = 5 > cap
    }
}

TEST_CASE("cones_intersect_at") {
    PointCloud cloud = line_cloud({0, 1, 4, 5});
    Params p = make_params(2, 1.0, 2, 7);
    SiteContext ctx = make_context(cloud, p);
    // ranks: 0 -> site 0, 1 -> site 1, 2 -> site 5, 3 -> site 4
    SECTION("single lens behaves like its enclosing ball") {
        CHECK(cones_intersect_at({{0, 1}}, 0.5, ctx));
        CHECK_FALSE(cones_intersect_at({{0, 1}}, 0.49, ctx));
    }
    SECTION("far-apart lenses at small radius") {
        CHECK_FALSE(cones_intersect_at({{0, 1}, {2, 3}}, 0.6, ctx));
    }
    SECTION("removed lens is a caller bug") {
        // rank 3 has freezing radius 12, removal radius 16
        CHECK_THROWS_AS(cones_intersect_at({{0, 3}}, 17.0, ctx), std::logic_error);
    }
    SECTION("agrees with the dense-grid oracle on random frozen families") {
        SplitMix64 g(0x77aa);
        int checked = 0;
        for (int trial = 0; trial < 150; ++trial) {
            auto pts = testsupport::random_points(8, 2, g.next());
            PointCloud c = make_point_cloud(pts);
            Params pp = make_params(2, 0.5 + 0.5 * g.next_double(), 2, g.next());
            SiteContext cx = make_context(c, pp);
            std::vector<lens_t> sigma = {{0, index_t(2 + g.next_below(3))}, {1, index_t(5 + g.next_below(3))}};
            double rmax = kInf;
            for (auto& A : sigma) {
                double cr = lens_freezing_radius(A, cx.sched);
                if (std::isfinite(cr)) rmax = std::min(rmax, (1.0 + pp.eps_prime) * cr);
            }
            double r = (std::isfinite(rmax) ? rmax : 4.0) * (0.1 + 0.9 * g.next_double());
            std::vector<Ball> balls;
            for (auto& A : sigma) {
                auto fr = frozen_radius_at(A, r, cx);
                REQUIRE(fr.has_value());
                for (index_t s : A) balls.push_back(Ball{cx.sites.point(s), *fr});
            }
            auto mc = testsupport::mc_balls_intersect(balls, 121, 1e-3);
            if (mc.verdict == testsupport::McVerdict::Undecided) continue;
            ++checked;
            REQUIRE(cones_intersect_at(sigma, r, cx) == (mc.verdict == testsupport::McVerdict::True));
        }
        REQUIRE(checked > 40);
    }
}

TEST_CASE("simplex_status cases") {
    SECTION("never-frozen lenses take the plain enclosing radius") {
        PointCloud cloud = line_cloud({0, 1, 2});
        Params p = make_params(2, 1.0, 2, 0);
        SiteContext ctx = make_context(cloud, p);
        auto z = simplex_status({{0, 1}, {0, 2}}, ctx);
        REQUIRE(z.has_value());
        // involved sites span [0, 2]: enclosing radius 1
        CHECK(*z == ceil_exponent(p.one_plus(), 1.0));
    }
    SECTION("enclosing radius past the removal radius is absent") {
        PointCloud cloud = make_point_cloud({point_t{0}, point_t{1}, point_t{100}});
        Params p;
        p.k = 1;
        p.epsilon = 1.0;
        p.eps_prime = 1.0 / 3.0;
        p.m_max = 1;
        // tiny lambda for the last site: its lens freezes almost immediately
        SiteContext ctx = make_context_raw(std::move(cloud), {kInf, 1.0, 0.01}, p);
        CHECK_FALSE(simplex_status({{0}, {2}}, ctx).has_value());
    }
}

TEST_CASE("build_filtration on the worked 1-D instance") {
    PointCloud cloud = line_cloud({0, 1, 4, 5});
    Params p = make_params(2, 1.0, 1, 42);
    SparseFiltration f = build_filtration(cloud, p);
    REQUIRE(f.perm == std::vector<index_t>{0, 1, 3, 2});

    auto vz = vertex_exponents(f);
    // all six lenses are vertices here; exponents on the (4/3) grid.
    // keys are original input indices: sites 4 and 5 are inputs 2 and 3
    REQUIRE(vz.size() == 6);
    CHECK(vz[{0, 1}] == -2);  // sites {0,1}: alpha 0.5 -> (4/3)^-2 = 0.5625
    CHECK(vz[{2, 3}] == -2);  // sites {4,5}: alpha 0.5
    CHECK(vz[{1, 2}] == 2);   // sites {1,4}: alpha 1.5
    CHECK(vz[{0, 2}] == 3);   // sites {0,4}: alpha 2
    CHECK(vz[{1, 3}] == 3);   // sites {1,5}: alpha 2
    CHECK(vz[{0, 3}] == 4);   // sites {0,5}: alpha 2.5
    CHECK(index_t(f.simplices.size()) >= cloud.n - p.k);
    for (const FilteredSimplex& fs : f.simplices)
        if (fs.dim() == 0 && to_original(f.perm, fs.vertices[0]) == lens_t{0, 1})
            CHECK(fs.value == 0.5625);
    check_filtration_consistency(f, cloud);
}

TEST_CASE("build_filtration with n equal to k") {
    PointCloud cloud = line_cloud({0, 3});
    Params p = make_params(2, 1.0, 2, 0);
    SparseFiltration f = build_filtration(cloud, p);
    REQUIRE(f.simplices.size() == 1);
    CHECK(f.simplices[0].dim() == 0);
    CHECK(f.simplices[0].z == ceil_exponent(p.one_plus(), 1.5));
}

TEST_CASE("build_filtration consistency on random instances") {
    SplitMix64 g(0xabc123);
    for (int trial = 0; trial < 12; ++trial) {
        index_t k = 1 + index_t(g.next_below(3));
        index_t n = k + index_t(g.next_below(10));
        int mm = int(g.next_below(3));
        auto pts = testsupport::random_points(n, 2, g.next());
        PointCloud cloud = make_point_cloud(pts);
        Params p = make_params(k, 0.5 + 0.5 * g.next_double(), mm, g.next());
        SparseFiltration f = build_filtration(cloud, p);
        check_filtration_consistency(f, cloud);
        // per-site associated counts against the packing bound, delta = d
        const double gamma = gamma_bound(k, p.epsilon, 2.0);
        for (index_t i = 0; i < n; ++i) {
            const auto& counts = f.stats.per_site_dim_counts[std::size_t(i)];
            for (std::size_t d = 0; d < counts.size(); ++d)
                REQUIRE(double(counts[d]) <= std::pow(gamma, double(k) * double(d + 1)));
        }
    }
}

TEST_CASE("build_filtration is deterministic and thread-count independent") {
    auto pts = testsupport::random_points(16, 2, 0x1234);
    PointCloud cloud = make_point_cloud(pts);
    Params p = make_params(2, 1.0, 2, 99);
    BuildOptions one;
    one.threads = 1;
    BuildOptions four;
    four.threads = 4;
    SparseFiltration a = build_filtration(cloud, p, one);
    SparseFiltration b = build_filtration(cloud, p, four);
    SparseFiltration c = build_filtration(cloud, p, one);
    REQUIRE(a.simplices.size() == b.simplices.size());
    for (std::size_t j = 0; j < a.simplices.size(); ++j) {
        REQUIRE(a.simplices[j].vertices == b.simplices[j].vertices);
        REQUIRE(a.simplices[j].z == b.simplices[j].z);
        REQUIRE(a.simplices[j].value == c.simplices[j].value);
    }
}

TEST_CASE("build_filtration honors resource limits") {
    auto pts = testsupport::random_points(30, 2, 0x777);
    PointCloud cloud = make_point_cloud(pts);
    Params p = make_params(2, 1.0, 1, 0);
    BuildOptions opts;
    opts.max_simplices = 5;
    CHECK_THROWS_AS(build_filtration(cloud, p, opts), resource_error);
    BuildOptions opts2;
    opts2.max_enumerations_per_site = 3;
    CHECK_THROWS_AS(build_filtration(cloud, p, opts2), resource_error);
}

TEST_CASE("k=1 reduces to a sparse union-of-balls filtration") {
    PointCloud cloud = line_cloud({0, 1, 3});
    Params p = make_params(1, 1.0, 1, 5);
    SparseFiltration f = build_filtration(cloud, p);
    check_filtration_consistency(f, cloud);
    // single-site vertices are clamped to the run's minimum exponent
    index_t vertex_count = 0;
    for (const FilteredSimplex& fs : f.simplices)
        if (fs.dim() == 0) {
            ++vertex_count;
            CHECK(fs.z == f.min_exponent);
        }
    CHECK(vertex_count == 3);
    CHECK(f.has_zero_alpha);
}

TEST_CASE("bound functions") {
    CHECK(gamma_bound(1, 1.0, 1.0) == 96.0);
    CHECK_THAT(size_bound(10, 2, 1.0, 1.0, 1), Catch::Matchers::WithinRel(10.0 * 36864.0, 1e-12));
}
