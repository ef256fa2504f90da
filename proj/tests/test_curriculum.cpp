#include <doctest.h>

#include <json.hpp>
#include <set>

#include "dgc/curriculum.hpp"
#include "test_util.hpp"

using namespace dgc;

namespace {

std::vector<seed_record> two_category_dataset(int big, int small) {
    std::vector<seed_record> out;
    for (int i = 0; i < big; ++i)
        out.push_back({"big_" + std::to_string(i), "big", ""});
    for (int i = 0; i < small; ++i)
        out.push_back({"small_" + std::to_string(i), "small", ""});
    return out;
}

std::string mock_script() {
    return dgc_test::read_file(dgc_test::corpus_path("sapcl_mock.json"));
}

} // namespace

TEST_SUITE("curriculum/sampling") {
    TEST_CASE("ceiling arithmetic: 100 items at 1% is one seed") {
        std::mt19937_64 rng(1);
        auto seeds = category_aware_sample(two_category_dataset(50, 50), 0.01, rng);
        CHECK(seeds.size() == 1);
    }

    TEST_CASE("alpha=1 is a deterministic weighted shuffle of everything") {
        auto data = two_category_dataset(5, 3);
        std::mt19937_64 a(42), b(42);
        auto s1 = category_aware_sample(data, 1.0, a);
        auto s2 = category_aware_sample(data, 1.0, b);
        REQUIRE(s1.size() == data.size());
        std::set<std::string> ids;
        for (const auto& s : s1) ids.insert(s.id);
        CHECK(ids.size() == data.size());
        for (std::size_t i = 0; i < s1.size(); ++i) CHECK(s1[i].id == s2[i].id);
    }

    TEST_CASE("inverse-frequency weights over-represent the minority") {
        // 90/10 split with weight 1/freq: picking one seed hits the minority
        // with probability 1/2, far above its 10% share
        auto data = two_category_dataset(90, 10);
        std::mt19937_64 rng(7);
        int minority = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            auto seeds = category_aware_sample(data, 0.01, rng);
            REQUIRE(seeds.size() == 1);
            if (seeds[0].category == "small") ++minority;
        }
        CHECK(minority > 350);
        CHECK(minority < 650);
    }

    TEST_CASE("empty dataset throws") {
        std::mt19937_64 rng(1);
        CHECK_THROWS_AS(category_aware_sample({}, 0.5, rng), domain_error);
    }
}

TEST_SUITE("curriculum/boundary") {
    TEST_CASE("pass L1-L2, fail L3 gives level 2") {
        scripted_providers mock(mock_script());
        seed_record seed{"table_01", "tables", ""};
        auto res = capability_level(seed, mock, mock, mock, 5, 0.8);
        CHECK(res.level == 2);
        REQUIRE(res.accuracies[0].has_value());
        CHECK(*res.accuracies[0] == doctest::Approx(1.0));
        CHECK(*res.accuracies[1] == doctest::Approx(1.0));
        CHECK(*res.accuracies[2] == doctest::Approx(0.0));
    }

    TEST_CASE("all levels fail gives level 0") {
        scripted_providers mock(R"({"explore": {"default": {"1": "mismatch"}}})");
        seed_record seed{"s", "c", ""};
        auto res = capability_level(seed, mock, mock, mock, 4, 0.8);
        CHECK(res.level == 0);
        CHECK(res.accuracies[0].has_value());
        CHECK_FALSE(res.accuracies[1].has_value()); // never probed
    }

    TEST_CASE("all levels pass gives level 3") {
        scripted_providers mock(
            R"({"explore": {"default": {"1": "match", "2": "match", "3": "match"}}})");
        seed_record seed{"s", "c", ""};
        auto res = capability_level(seed, mock, mock, mock, 4, 0.8);
        CHECK(res.level == 3);
    }

    TEST_CASE("fractional accuracy respects tau") {
        // 4 of 5 variants match: acc 0.8 passes at tau 0.8, fails at 0.81
        scripted_providers mock(
            R"({"explore": {"default": {"1": ["match", "match", "match", "match", "mismatch"]}}})");
        seed_record seed{"s", "c", ""};
        CHECK(capability_level(seed, mock, mock, mock, 5, 0.8).level == 1);
        CHECK(capability_level(seed, mock, mock, mock, 5, 0.81).level == 0);
    }

    TEST_CASE("exploration probes ascending levels and stops at the first failure") {
        struct logging_mock final : problem_generator, solver, discriminator {
            std::vector<int> probed_levels;
            std::vector<variant_problem> variants(const seed_record& s, int level,
                                                  int k) override {
                probed_levels.push_back(level);
                std::vector<variant_problem> out;
                for (int i = 0; i < k; ++i) out.push_back({s.id, level, i, ""});
                return out;
            }
            std::string solve(const seed_record&, const variant_problem&) override {
                return "";
            }
            verdict judge(const std::string&, int level, int, const std::string&,
                          const std::string&) override {
                return level <= 1 ? verdict::match : verdict::mismatch;
            }
        } mock;
        seed_record seed{"s", "c", ""};
        auto res = capability_level(seed, mock, mock, mock, 3, 0.8);
        CHECK(res.level == 1);
        CHECK(mock.probed_levels == std::vector<int>{1, 2}); // never level 3
    }

    TEST_CASE("provider error verdicts propagate with seed context") {
        scripted_providers mock(R"({"explore": {"default": {"1": "error"}}})");
        seed_record seed{"fragile", "c", ""};
        try {
            capability_level(seed, mock, mock, mock, 2, 0.8);
            FAIL("expected ProviderFailure");
        } catch (const domain_error& e) {
            CHECK(e.code() == diag_code::provider_failure);
            CHECK(std::string(e.what()).find("fragile") != std::string::npos);
        }
    }

    TEST_CASE("boundary targets") {
        CHECK(boundary_targets(0) == std::vector<int>{1});
        CHECK(boundary_targets(1) == std::vector<int>{1, 2});
        CHECK(boundary_targets(2) == std::vector<int>{2, 3});
        CHECK(boundary_targets(3) == std::vector<int>{3});
        for (int level = 0; level <= 3; ++level) {
            auto t = boundary_targets(level);
            CHECK(t.size() >= 1);
            CHECK(t.size() <= 2);
        }
    }
}

TEST_SUITE("curriculum/loop") {
    TEST_CASE("two iterations with alpha=1 grow 4 -> 20 -> 100") {
        scripted_providers mock(mock_script());
        nlohmann::json root = nlohmann::json::parse(mock_script());
        auto dataset = dataset_from_json(root.at("dataset").dump());

        curriculum_config cfg;
        cfg.sample_proportion = 1.0;
        cfg.tau = 0.8;
        cfg.variants_per_level = 5;
        cfg.max_iterations = 2;
        cfg.rng_seed = 11;

        auto report = run_sapcl(dataset, mock.providers(), cfg);
        REQUIRE(report.iterations.size() == 2);

        // L=2 targets {2,3}; valid candidates 2 (level 2) + 2 (level 3) per seed
        const auto& it1 = report.iterations[0];
        CHECK(it1.dataset_size_before == 4);
        CHECK(it1.dataset_size_after == 20);
        CHECK(it1.new_by_level.at(2) == 8);
        CHECK(it1.new_by_level.at(3) == 8);
        for (const auto& s : it1.seeds) {
            CHECK(s.level == 2);
            CHECK(s.targets == std::vector<int>{2, 3});
        }

        const auto& it2 = report.iterations[1];
        CHECK(it2.dataset_size_before == 20);
        CHECK(it2.dataset_size_after == 100);
        CHECK(it2.status == "max_iterations");
        CHECK(report.final_dataset_size == 100);

        // monotone growth
        for (const auto& it : report.iterations)
            CHECK(it.dataset_size_after >= it.dataset_size_before);

        // the trainer ran once per iteration
        CHECK(mock.train_calls() == 2);
    }

    TEST_CASE("same seed reproduces the report byte for byte") {
        nlohmann::json root = nlohmann::json::parse(mock_script());
        curriculum_config cfg;
        cfg.sample_proportion = 0.5;
        cfg.variants_per_level = 5;
        cfg.max_iterations = 3;
        cfg.rng_seed = 99;

        scripted_providers mock_a(mock_script());
        auto rep_a = run_sapcl(dataset_from_json(root.at("dataset").dump()),
                               mock_a.providers(), cfg);
        scripted_providers mock_b(mock_script());
        auto rep_b = run_sapcl(dataset_from_json(root.at("dataset").dump()),
                               mock_b.providers(), cfg);
        CHECK(report_to_json(rep_a) == report_to_json(rep_b));
    }

    TEST_CASE("no valid candidates converges immediately") {
        scripted_providers mock(R"({
            "explore": {"default": {"1": "match", "2": "mismatch"}},
            "cogen": {"default": {"1": ["mismatch"], "2": ["mismatch"]}}
        })");
        std::vector<seed_record> dataset{{"only", "c", ""}};
        curriculum_config cfg;
        cfg.sample_proportion = 1.0;
        cfg.variants_per_level = 2;
        cfg.max_iterations = 5;
        auto report = run_sapcl(dataset, mock.providers(), cfg);
        REQUIRE(report.iterations.size() == 1);
        CHECK(report.iterations[0].status == "converged");
        CHECK(report.final_dataset_size == 1);
    }

    TEST_CASE("empty dataset is rejected") {
        scripted_providers mock(mock_script());
        CHECK_THROWS_AS(run_sapcl({}, mock.providers(), {}), domain_error);
    }
}
