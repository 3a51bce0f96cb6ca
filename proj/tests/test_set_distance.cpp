#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "crocs/rng.hpp"
#include "crocs/set_distance.hpp"

using namespace crocs;

namespace {

RepresentativeLoadSet scalar_rls(const std::string& id, const std::vector<double>& positions,
                                 const std::vector<std::size_t>& counts) {
    std::vector<Prototype> protos;
    std::int64_t day = 0;
    for (std::size_t i = 0; i < positions.size(); ++i) {
        Prototype proto;
        proto.profile = {positions[i]};
        proto.count = counts[i];
        for (std::size_t d = 0; d < counts[i]; ++d) proto.member_day_indices.push_back(day++);
        protos.push_back(std::move(proto));
    }
    RepresentativeLoadSet rls;  // keep caller's prototype order
    rls.consumer_id = id;
    rls.prototypes = std::move(protos);
    for (const auto& p : rls.prototypes) rls.total_days += p.count;
    return rls;
}

RepresentativeLoadSet random_rls(Rng& rng, const std::string& id, std::size_t k, std::size_t phi) {
    std::vector<Prototype> protos;
    std::int64_t day = 0;
    for (std::size_t i = 0; i < k; ++i) {
        Prototype proto;
        proto.profile.resize(phi);
        for (auto& v : proto.profile) v = rng.uniform();
        proto.count = 1 + rng.uniform_index(20);
        for (std::size_t d = 0; d < proto.count; ++d) proto.member_day_indices.push_back(day++);
        protos.push_back(std::move(proto));
    }
    return make_rls(id, std::move(protos));
}

/// Direct nested-loop evaluation of the WSMD formula, independent of the
/// implementation's pairing bookkeeping.
double wsmd_bruteforce(const RepresentativeLoadSet& si, const RepresentativeLoadSet& sj, const DistanceKind& d) {
    double acc_i = 0.0;
    for (const auto& a : si.prototypes) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& b : sj.prototypes) nearest = std::min(nearest, profile_distance(a.profile, b.profile, d));
        acc_i += static_cast<double>(a.count) * nearest;
    }
    double acc_j = 0.0;
    for (const auto& b : sj.prototypes) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& a : si.prototypes) nearest = std::min(nearest, profile_distance(b.profile, a.profile, d));
        acc_j += static_cast<double>(b.count) * nearest;
    }
    return 0.5 * (acc_i / static_cast<double>(si.total_days) + acc_j / static_cast<double>(sj.total_days));
}

}  // namespace

TEST_CASE("wsmd reproduces the worked two-consumer example") {
    // Scalar prototypes placed so the nearest-neighbour distances are exactly
    // (0.739, 0.850, 0.733, 1.161) from i and (0.739, 0.850, 0.733) from j,
    // with day counts (28, 72, 46, 34) and (32, 85, 63) over 180 days each.
    const auto si = scalar_rls("i", {10.0, 20.0, 30.0, 22.011}, {28, 72, 46, 34});
    const auto sj = scalar_rls("j", {10.739, 20.850, 30.733}, {32, 85, 63});

    const auto pairing = wsmd(si, sj, DistanceKind::euclidean());
    CHECK(pairing.delta == Catch::Approx(0.825).margin(0.001));

    REQUIRE(pairing.i_to_j.size() == 4);
    CHECK(pairing.i_to_j[0].distance == Catch::Approx(0.739));
    CHECK(pairing.i_to_j[1].distance == Catch::Approx(0.850));
    CHECK(pairing.i_to_j[2].distance == Catch::Approx(0.733));
    CHECK(pairing.i_to_j[3].distance == Catch::Approx(1.161));
    CHECK(pairing.i_to_j[3].target_prototype == 1);

    REQUIRE(pairing.j_to_i.size() == 3);
    CHECK(pairing.j_to_i[0].distance == Catch::Approx(0.739));
    CHECK(pairing.j_to_i[1].distance == Catch::Approx(0.850));
    CHECK(pairing.j_to_i[2].distance == Catch::Approx(0.733));

    // Same result under DTW: length-1 profiles leave nothing to warp.
    CHECK(wsmd(si, sj, DistanceKind::dtw(2)).delta == Catch::Approx(pairing.delta).margin(1e-12));

    // Pairing record is self-consistent.
    CHECK(wsmd_from_pairing(pairing, si, sj) == Catch::Approx(pairing.delta).margin(1e-12));
}

TEST_CASE("wsmd of an RLS with itself is zero") {
    Rng rng(67);
    const auto s = random_rls(rng, "a", 4, 48);
    CHECK(wsmd(s, s, DistanceKind::dtw(2)).delta == 0.0);
}

TEST_CASE("wsmd equals nested-loop formula on random RLSs") {
    Rng rng(71);
    const DistanceKind kinds[] = {DistanceKind::euclidean(), DistanceKind::dtw(2)};
    for (int trial = 0; trial < 1000; ++trial) {
        const auto si = random_rls(rng, "i", 3, 8);
        const auto sj = random_rls(rng, "j", 4, 8);
        const auto& d = kinds[trial % 2];
        const auto pairing = wsmd(si, sj, d);
        REQUIRE(pairing.delta == Catch::Approx(wsmd_bruteforce(si, sj, d)).margin(1e-12));
        // Symmetry in (i, j).
        REQUIRE(wsmd(sj, si, d).delta == Catch::Approx(pairing.delta).margin(1e-12));
    }
}

TEST_CASE("wsmd is invariant to splitting a prototype into identical halves") {
    Rng rng(73);
    for (int trial = 0; trial < 100; ++trial) {
        auto si = random_rls(rng, "i", 3, 12);
        const auto sj = random_rls(rng, "j", 4, 12);

        RepresentativeLoadSet split;
        split.consumer_id = si.consumer_id;
        split.total_days = si.total_days;
        for (std::size_t p = 0; p < si.prototypes.size(); ++p) {
            if (p == 0 && si.prototypes[p].count >= 2) {
                Prototype first = si.prototypes[p];
                Prototype second = si.prototypes[p];
                const std::size_t half = first.count / 2;
                first.count = half;
                first.member_day_indices.resize(half);
                second.count = si.prototypes[p].count - half;
                second.member_day_indices.erase(second.member_day_indices.begin(),
                                                second.member_day_indices.begin() + static_cast<std::ptrdiff_t>(half));
                split.prototypes.push_back(first);
                split.prototypes.push_back(second);
            } else {
                split.prototypes.push_back(si.prototypes[p]);
            }
        }
        const DistanceKind d = DistanceKind::dtw(2);
        CHECK(wsmd(si, sj, d).delta == Catch::Approx(wsmd(split, sj, d).delta).margin(1e-12));
    }
}

TEST_CASE("wsmd is invariant to scaling all counts by a common factor") {
    Rng rng(79);
    auto si = random_rls(rng, "i", 3, 6);
    auto sj = random_rls(rng, "j", 2, 6);
    auto scale = [](RepresentativeLoadSet s, std::size_t factor) {
        for (auto& p : s.prototypes) {
            const std::size_t base = p.count;
            p.count = base * factor;
            p.member_day_indices.resize(p.count);  // content irrelevant to the value
        }
        s.total_days *= factor;
        return s;
    };
    const DistanceKind d = DistanceKind::euclidean();
    const double base = wsmd(si, sj, d).delta;
    CHECK(wsmd(scale(si, 3), scale(sj, 3), d).delta == Catch::Approx(base).margin(1e-12));
}

TEST_CASE("set_distance table rows on a 2x2 hand example") {
    // Scalar positions chosen so the pairwise distance table is [[1,2],[3,4]]:
    // i = (0, -2), j = (1, 2) -> d(i1,j1)=1, d(i1,j2)=2, d(i2,j1)=3, d(i2,j2)=4.
    const auto si = scalar_rls("i", {0.0, -2.0}, {1, 1});
    const auto sj = scalar_rls("j", {1.0, 2.0}, {1, 1});
    const DistanceKind d = DistanceKind::euclidean();

    CHECK(set_distance(si, sj, SetDistanceKind::SL, d) == Catch::Approx(1.0));
    CHECK(set_distance(si, sj, SetDistanceKind::CL, d) == Catch::Approx(4.0));
    CHECK(set_distance(si, sj, SetDistanceKind::AL, d) == Catch::Approx(2.5));
    // Row minima (1, 3), column minima (1, 2).
    CHECK(set_distance(si, sj, SetDistanceKind::HD, d) == Catch::Approx(3.0));
    CHECK(set_distance(si, sj, SetDistanceKind::MHD, d) == Catch::Approx(2.0));
    CHECK(set_distance(si, sj, SetDistanceKind::SMD, d) == Catch::Approx(0.5 * ((1 + 3) + (1 + 2))));
    CHECK(set_distance(si, sj, SetDistanceKind::WSMD, d) == Catch::Approx(0.5 * (4.0 / 2 + 3.0 / 2)));
    // WAL with unit counts over p=2: (1+2+3+4)/4.
    CHECK(set_distance(si, sj, SetDistanceKind::WAL, d) == Catch::Approx(2.5));
}

TEST_CASE("identical RLSs give zero for the min-based kinds") {
    Rng rng(83);
    const auto s = random_rls(rng, "a", 3, 10);
    const DistanceKind d = DistanceKind::dtw(2);
    for (auto kind : {SetDistanceKind::WSMD, SetDistanceKind::SMD, SetDistanceKind::HD, SetDistanceKind::MHD,
                      SetDistanceKind::SL})
        CHECK(set_distance(s, s, kind, d) == 0.0);
}

TEST_CASE("two singleton RLSs reduce every kind to the profile distance") {
    Rng rng(89);
    const auto si = random_rls(rng, "i", 1, 16);
    const auto sj = random_rls(rng, "j", 1, 16);
    const DistanceKind d = DistanceKind::dtw(2);
    const double expected = profile_distance(si.prototypes[0].profile, sj.prototypes[0].profile, d);
    for (auto kind : {SetDistanceKind::WSMD, SetDistanceKind::SMD, SetDistanceKind::HD, SetDistanceKind::MHD,
                      SetDistanceKind::SL, SetDistanceKind::CL, SetDistanceKind::AL, SetDistanceKind::WAL})
        CHECK(set_distance(si, sj, kind, d) == Catch::Approx(expected).margin(1e-12));
}

TEST_CASE("ordering relations between kinds and symmetry") {
    Rng rng(97);
    const DistanceKind d = DistanceKind::dtw(2);
    for (int trial = 0; trial < 200; ++trial) {
        const auto si = random_rls(rng, "i", 1 + rng.uniform_index(4), 8);
        const auto sj = random_rls(rng, "j", 1 + rng.uniform_index(4), 8);
        const double sl = set_distance(si, sj, SetDistanceKind::SL, d);
        const double al = set_distance(si, sj, SetDistanceKind::AL, d);
        const double cl = set_distance(si, sj, SetDistanceKind::CL, d);
        const double hd = set_distance(si, sj, SetDistanceKind::HD, d);
        const double mhd = set_distance(si, sj, SetDistanceKind::MHD, d);
        CHECK(sl <= al + 1e-12);
        CHECK(al <= cl + 1e-12);
        CHECK(hd >= mhd - 1e-12);
        for (auto kind : {SetDistanceKind::WSMD, SetDistanceKind::SMD, SetDistanceKind::HD, SetDistanceKind::MHD,
                          SetDistanceKind::SL, SetDistanceKind::CL, SetDistanceKind::AL, SetDistanceKind::WAL})
            CHECK(set_distance(si, sj, kind, d) == set_distance(sj, si, kind, d));
    }
}

TEST_CASE("wsmd equals smd/k for constant counts") {
    Rng rng(101);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 2 + rng.uniform_index(3);
        const std::size_t c = 1 + rng.uniform_index(9);
        auto make_const = [&](const std::string& id) {
            std::vector<Prototype> protos;
            std::int64_t day = 0;
            for (std::size_t i = 0; i < k; ++i) {
                Prototype proto;
                proto.profile.resize(8);
                for (auto& v : proto.profile) v = rng.uniform();
                proto.count = c;
                for (std::size_t x = 0; x < c; ++x) proto.member_day_indices.push_back(day++);
                protos.push_back(std::move(proto));
            }
            return make_rls(id, std::move(protos));
        };
        const auto si = make_const("i");
        const auto sj = make_const("j");
        const DistanceKind d = DistanceKind::euclidean();
        const double w = set_distance(si, sj, SetDistanceKind::WSMD, d);
        const double smd = set_distance(si, sj, SetDistanceKind::SMD, d);
        CHECK(w == Catch::Approx(smd / static_cast<double>(k)).margin(1e-12));
    }
}

TEST_CASE("pairwise_set_matrix consistency and thread invariance") {
    Rng rng(103);
    std::vector<RepresentativeLoadSet> all;
    for (int i = 0; i < 12; ++i) all.push_back(random_rls(rng, "c" + std::to_string(i), 1 + rng.uniform_index(4), 8));
    const DistanceKind d = DistanceKind::dtw(2);

    const auto serial = pairwise_set_matrix(all, SetDistanceKind::WSMD, d, 1);
    const auto threaded = pairwise_set_matrix(all, SetDistanceKind::WSMD, d, 8);
    CHECK(serial.matrix.data() == threaded.matrix.data());

    for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = i + 1; j < all.size(); ++j) {
            CHECK(serial.matrix(i, j) == wsmd(all[i], all[j], d).delta);
            CHECK(serial.pairing(i, j).consumer_i == i);
            CHECK(serial.pairing(i, j).consumer_j == j);
            CHECK(serial.pairing(i, j).delta == serial.matrix(i, j));
        }

    SECTION("two identical consumers give a zero entry") {
        std::vector<RepresentativeLoadSet> two = {all[0], all[0]};
        const auto result = pairwise_set_matrix(two, SetDistanceKind::WSMD, d);
        CHECK(result.matrix(0, 1) == 0.0);
    }
    SECTION("non-WSMD kinds skip pairings") {
        const auto result = pairwise_set_matrix(all, SetDistanceKind::AL, d);
        CHECK(result.pairings.empty());
    }
}
