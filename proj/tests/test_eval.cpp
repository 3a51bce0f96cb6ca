#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>

#include "crocs/eval.hpp"
#include "crocs/rng.hpp"
#include "oracles.hpp"

using namespace crocs;
using namespace crocs::eval;

namespace {

Partition random_partition(Rng& rng, std::size_t n, int k) {
    Partition p;
    p.k = k;
    p.labels.resize(n);
    // Guarantee non-empty clusters, then fill uniformly.
    for (int c = 0; c < k; ++c) p.labels[static_cast<std::size_t>(c)] = c;
    for (std::size_t i = static_cast<std::size_t>(k); i < n; ++i)
        p.labels[i] = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(k)));
    std::vector<int> shuffled = p.labels;
    rng.shuffle(shuffled);
    p.labels = shuffled;
    return p;
}

/// Average MI over all distinct permutations of b's labels: the exact
/// permutation-model expected MI for small n.
double expected_mi_permutations(const Partition& a, const std::vector<int>& b_labels, int kb) {
    std::vector<int> perm = b_labels;
    std::sort(perm.begin(), perm.end());
    double total = 0.0;
    std::size_t count = 0;
    const double n = static_cast<double>(a.labels.size());
    do {
        std::vector<std::vector<double>> cells(static_cast<std::size_t>(a.k),
                                               std::vector<double>(static_cast<std::size_t>(kb), 0.0));
        std::vector<double> ra(static_cast<std::size_t>(a.k), 0.0), cb(static_cast<std::size_t>(kb), 0.0);
        for (std::size_t i = 0; i < perm.size(); ++i) {
            cells[static_cast<std::size_t>(a.labels[i])][static_cast<std::size_t>(perm[i])] += 1.0;
            ra[static_cast<std::size_t>(a.labels[i])] += 1.0;
            cb[static_cast<std::size_t>(perm[i])] += 1.0;
        }
        double mi = 0.0;
        for (std::size_t i = 0; i < ra.size(); ++i)
            for (std::size_t j = 0; j < cb.size(); ++j)
                if (cells[i][j] > 0.0) mi += (cells[i][j] / n) * std::log(n * cells[i][j] / (ra[i] * cb[j]));
        total += mi;
        count++;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total / static_cast<double>(count);
}

}  // namespace

TEST_CASE("ari analytic cases") {
    const Partition a{{0, 0, 1, 1}, 2};
    CHECK(ari(a, a) == 1.0);
    CHECK(ari(a, {{0, 1, 0, 1}, 2}) == Catch::Approx(-0.5));
    CHECK(ari(a, {{1, 1, 0, 0}, 2}) == 1.0);  // label permutation invariance
    CHECK_THROWS(ari(a, {{0, 1}, 2}));
}

TEST_CASE("evi symmetry and permutation invariance") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 12 + rng.uniform_index(30);
        const auto a = random_partition(rng, n, 2 + static_cast<int>(rng.uniform_index(3)));
        const auto b = random_partition(rng, n, 2 + static_cast<int>(rng.uniform_index(3)));
        CHECK(ari(a, b) == Catch::Approx(ari(b, a)).margin(1e-12));
        CHECK(ami(a, b) == Catch::Approx(ami(b, a)).margin(1e-9));
        CHECK(psi(a, b) == Catch::Approx(psi(b, a)).margin(1e-9));

        // Relabeling either side changes nothing.
        Partition scrambled = a;
        for (auto& label : scrambled.labels) label = (label + 1) % a.k;
        CHECK(ari(scrambled, b) == Catch::Approx(ari(a, b)).margin(1e-12));
        CHECK(ami(scrambled, b) == Catch::Approx(ami(a, b)).margin(1e-9));
        CHECK(psi(scrambled, b) == Catch::Approx(psi(a, b)).margin(1e-9));
    }
}

TEST_CASE("ami exact cases and oracle") {
    const Partition a{{0, 0, 1, 1, 2, 2}, 3};
    CHECK(ami(a, a) == Catch::Approx(1.0).margin(1e-12));

    SECTION("expected MI matches permutation enumeration for small n") {
        Rng rng(11);
        for (int trial = 0; trial < 10; ++trial) {
            const std::size_t n = 6 + rng.uniform_index(5);  // 6..10 keeps permutations manageable
            const auto pa = random_partition(rng, n, 2 + static_cast<int>(rng.uniform_index(2)));
            const auto pb = random_partition(rng, n, 2 + static_cast<int>(rng.uniform_index(2)));

            // Oracle AMI assembled from permutation-expected MI.
            const double emi = expected_mi_permutations(pa, pb.labels, pb.k);
            const auto t_n = static_cast<double>(n);
            auto entropy = [&](const Partition& p) {
                auto sizes = cluster_sizes(p);
                double h = 0.0;
                for (auto s : sizes)
                    if (s) h -= (static_cast<double>(s) / t_n) * std::log(static_cast<double>(s) / t_n);
                return h;
            };
            double mi = 0.0;
            {
                std::vector<std::vector<double>> cells(static_cast<std::size_t>(pa.k),
                                                       std::vector<double>(static_cast<std::size_t>(pb.k), 0.0));
                auto sa = cluster_sizes(pa);
                auto sb = cluster_sizes(pb);
                for (std::size_t i = 0; i < n; ++i)
                    cells[static_cast<std::size_t>(pa.labels[i])][static_cast<std::size_t>(pb.labels[i])] += 1.0;
                for (std::size_t i = 0; i < sa.size(); ++i)
                    for (std::size_t j = 0; j < sb.size(); ++j)
                        if (cells[i][j] > 0.0)
                            mi += (cells[i][j] / t_n) *
                                  std::log(t_n * cells[i][j] /
                                           (static_cast<double>(sa[i]) * static_cast<double>(sb[j])));
            }
            const double denom = 0.5 * (entropy(pa) + entropy(pb)) - emi;
            if (std::abs(denom) < 1e-12) continue;
            const double want = (mi - emi) / denom;
            CHECK(ami(pa, pb) == Catch::Approx(want).margin(1e-9));
        }
    }

    SECTION("independent partitions average near zero") {
        Rng rng(13);
        double total = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            const auto pa = random_partition(rng, 200, 4);
            const auto pb = random_partition(rng, 200, 4);
            total += ami(pa, pb);
        }
        CHECK(std::abs(total / 50.0) < 0.05);
    }

    SECTION("both single-cluster partitions") {
        const Partition one{{0, 0, 0}, 1};
        CHECK(ami(one, one) == 1.0);
    }
}

TEST_CASE("hungarian assignment matches enumeration") {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(5);  // 2..6
        std::vector<std::vector<double>> cost(n, std::vector<double>(n));
        for (auto& row : cost)
            for (auto& c : row) c = rng.uniform(-3.0, 3.0);
        CHECK(eval::detail::hungarian_min_cost(cost) ==
              Catch::Approx(oracle::assignment_enumerate(cost)).margin(1e-9));
    }
}

TEST_CASE("psi exact cases, oracle, and chance level") {
    const Partition a{{0, 0, 1, 1, 2, 2}, 3};
    CHECK(psi(a, a) == Catch::Approx(1.0).margin(1e-12));

    SECTION("optimal matching equals exhaustive assignment for k <= 5") {
        Rng rng(19);
        for (int trial = 0; trial < 30; ++trial) {
            const std::size_t n = 15 + rng.uniform_index(20);
            const int ka = 2 + static_cast<int>(rng.uniform_index(4));
            const int kb = 2 + static_cast<int>(rng.uniform_index(4));
            const auto pa = random_partition(rng, n, ka);
            const auto pb = random_partition(rng, n, kb);

            const auto t = eval::detail::contingency_table(pa, pb);
            const std::size_t dim = std::max(t.row_sums.size(), t.col_sums.size());
            std::vector<std::vector<double>> cost(dim, std::vector<double>(dim, 0.0));
            for (std::size_t i = 0; i < t.row_sums.size(); ++i)
                for (std::size_t j = 0; j < t.col_sums.size(); ++j)
                    cost[i][j] = -static_cast<double>(t.cells[i][j]) /
                                 static_cast<double>(std::max(t.row_sums[i], t.col_sums[j]));
            const double s_enum = -oracle::assignment_enumerate(cost);
            const double s_fast = -eval::detail::hungarian_min_cost(cost);
            CHECK(s_fast == Catch::Approx(s_enum).margin(1e-9));
        }
    }

    SECTION("independent partitions average near zero") {
        Rng rng(23);
        double total = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            const auto pa = random_partition(rng, 200, 4);
            const auto pb = random_partition(rng, 200, 4);
            total += psi(pa, pb);
        }
        CHECK(total / 50.0 < 0.1);
    }
}

TEST_CASE("evi_report bundles all three indices") {
    const Partition a{{0, 0, 1, 1}, 2};
    const auto report = evi_report(a, a);
    CHECK(report.ari == 1.0);
    CHECK(report.ami == Catch::Approx(1.0).margin(1e-12));
    CHECK(report.psi == Catch::Approx(1.0).margin(1e-12));
    CHECK(report.contingency == std::vector<std::vector<std::size_t>>{{2, 0}, {0, 2}});
}

TEST_CASE("jsd analytic cases") {
    const std::map<int, double> p{{0, 1.0}, {1, 1.0}};
    CHECK(jsd_normalized(p, p) == 0.0);

    const std::map<int, double> q{{2, 3.0}, {3, 1.0}};
    CHECK(jsd_normalized(p, q) == Catch::Approx(1.0).margin(1e-12));  // disjoint supports

    // (1,1) vs (1,3): hand evaluation of the base-2 JS divergence.
    const std::map<int, double> r{{0, 1.0}, {1, 3.0}};
    const double want = 0.5 * (0.5 * std::log2(0.5 / 0.375) + 0.5 * std::log2(0.5 / 0.625)) +
                        0.5 * (0.25 * std::log2(0.25 / 0.375) + 0.75 * std::log2(0.75 / 0.625));
    CHECK(jsd_normalized(p, r) == Catch::Approx(want).margin(1e-12));
    CHECK(jsd_normalized(r, p) == Catch::Approx(want).margin(1e-12));

    CHECK_THROWS(jsd_normalized({{0, 0.0}}, p));
}

TEST_CASE("kappa analytic cases") {
    std::vector<int> a, b;
    // Textbook 2x2 table: cells (0,0)=20, (0,1)=5, (1,0)=10, (1,1)=15.
    for (int i = 0; i < 20; ++i) { a.push_back(0); b.push_back(0); }
    for (int i = 0; i < 5; ++i) { a.push_back(0); b.push_back(1); }
    for (int i = 0; i < 10; ++i) { a.push_back(1); b.push_back(0); }
    for (int i = 0; i < 15; ++i) { a.push_back(1); b.push_back(1); }
    // po = 0.7, pe = 0.5 -> kappa = 0.4 -> normalized 0.7.
    CHECK(kappa_normalized(a, b) == Catch::Approx(0.7).margin(1e-12));
    CHECK(kappa_normalized(b, a) == Catch::Approx(0.7).margin(1e-12));

    CHECK(kappa_normalized({0, 1, 0, 1}, {0, 1, 0, 1}) == 1.0);
    CHECK_THROWS(kappa_normalized({0, 1}, {0}));

    SECTION("independent uniform sequences sit near 0.5") {
        Rng rng(29);
        std::vector<int> x(10000), y(10000);
        for (auto& v : x) v = static_cast<int>(rng.uniform_index(5));
        for (auto& v : y) v = static_cast<int>(rng.uniform_index(5));
        CHECK(kappa_normalized(x, y) == Catch::Approx(0.5).margin(0.02));
    }

    SECTION("degenerate pe = 1") {
        CHECK(kappa_normalized({0, 0}, {0, 0}) == 1.0);
    }
}

TEST_CASE("reconstruction error") {
    ConsumerRecord record;
    record.consumer_id = "c";
    for (int day = 0; day < 4; ++day) {
        DailyLoadProfile dlp;
        dlp.day_index = day;
        dlp.values = {static_cast<double>(day), 1.0};
        record.profiles.push_back(dlp);
    }

    SECTION("representation containing every DLP gives zero") {
        std::vector<Profile> rep;
        for (const auto& d : record.profiles) rep.push_back(d.values);
        CHECK(reconstruction_error(record, rep) == 0.0);
    }
    SECTION("single-profile representation is the mean distance to it") {
        const std::vector<Profile> rep = {{0.0, 1.0}};
        CHECK(reconstruction_error(record, rep) == Catch::Approx((0.0 + 1.0 + 2.0 + 3.0) / 4.0));
    }
    SECTION("errors") {
        CHECK_THROWS(reconstruction_error(record, {}));
    }
}
