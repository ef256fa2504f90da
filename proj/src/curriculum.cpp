#include "dgc/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

namespace dgc {

namespace {

/// Uniform double in [0,1) from raw engine output; avoids the
/// implementation-defined std distributions so runs replay bit-identically
/// on every platform.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace

std::vector<seed_record> category_aware_sample(const std::vector<seed_record>& dataset,
                                               double alpha, std::mt19937_64& rng) {
    if (dataset.empty())
        throw domain_error(diag_code::empty_dataset, "cannot sample from an empty dataset");
    if (!(alpha > 0.0) || alpha > 1.0)
        throw std::invalid_argument("sample proportion must lie in (0, 1]");

    std::map<std::string, int> category_count;
    for (const auto& s : dataset) ++category_count[s.category];

    std::size_t want = static_cast<std::size_t>(
        std::ceil(alpha * static_cast<double>(dataset.size())));
    want = std::clamp<std::size_t>(want, 1, dataset.size());

    std::vector<std::size_t> remaining(dataset.size());
    for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;
    std::vector<double> weight(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i)
        weight[i] = 1.0 / category_count[dataset[i].category];

    std::vector<seed_record> out;
    out.reserve(want);
    while (out.size() < want) {
        double total = 0;
        for (std::size_t i : remaining) total += weight[i];
        double u = uniform01(rng) * total;
        std::size_t chosen = remaining.back();
        std::size_t chosen_pos = remaining.size() - 1;
        double acc = 0;
        for (std::size_t pos = 0; pos < remaining.size(); ++pos) {
            acc += weight[remaining[pos]];
            if (u < acc) {
                chosen = remaining[pos];
                chosen_pos = pos;
                break;
            }
        }
        out.push_back(dataset[chosen]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(chosen_pos));
    }
    return out;
}

boundary_result capability_level(const seed_record& seed, problem_generator& problems,
                                 solver& solve, discriminator& judge, int k_variants,
                                 double tau) {
    boundary_result out;
    out.seed_id = seed.id;

    for (int level = 1; level <= 3; ++level) {
        auto variants = problems.variants(seed, level, k_variants);
        int correct = 0;
        for (const auto& p : variants) {
            std::string answer = solve.solve(seed, p);
            verdict v = judge.judge(seed.id, level, p.index, answer, p.payload);
            if (v == verdict::error)
                throw domain_error(diag_code::provider_failure,
                                   "discriminator failed on seed '" + seed.id + "' level " +
                                       std::to_string(level));
            if (v == verdict::match) ++correct;
        }
        double acc = k_variants > 0 ? double(correct) / k_variants : 0.0;
        out.accuracies[static_cast<std::size_t>(level - 1)] = acc;
        if (acc >= tau) {
            out.level = level;
        } else {
            break; // exploration stops at the first failed level
        }
    }
    return out;
}

std::vector<int> boundary_targets(int level) {
    std::vector<int> out;
    if (level >= 1) out.push_back(level);
    if (level < 3) out.push_back(level + 1);
    return out;
}

sapcl_report run_sapcl(std::vector<seed_record> dataset, const provider_set& providers,
                       const curriculum_config& config) {
    if (dataset.empty())
        throw domain_error(diag_code::empty_dataset, "the loop needs a nonempty initial dataset");
    if (!(config.sample_proportion > 0.0) || config.sample_proportion > 1.0)
        throw std::invalid_argument("sample proportion must lie in (0, 1]");
    if (config.tau < 0.0 || config.tau > 1.0)
        throw std::invalid_argument("tau must lie in [0, 1]");
    if (config.variants_per_level < 1)
        throw std::invalid_argument("variants_per_level must be at least 1");
    if (!providers.train || !providers.problems || !providers.solve || !providers.judge ||
        !providers.cogen)
        throw std::invalid_argument("all five providers must be wired");

    std::mt19937_64 rng(config.rng_seed);
    sapcl_report report;
    std::set<std::string> known_ids;
    for (const auto& s : dataset) known_ids.insert(s.id);

    for (int t = 1;; ++t) {
        iteration_report iter;
        iter.t = t;
        iter.dataset_size_before = dataset.size();

        providers.train->train(dataset, t);

        auto seeds = category_aware_sample(dataset, config.sample_proportion, rng);

        std::vector<candidate> fresh;
        for (const auto& seed : seeds) {
            auto boundary = capability_level(seed, *providers.problems, *providers.solve,
                                             *providers.judge, config.variants_per_level,
                                             config.tau);
            seed_report sr;
            sr.id = seed.id;
            sr.level = boundary.level;
            sr.targets = boundary_targets(boundary.level);
            sr.accuracies = boundary.accuracies;
            iter.seeds.push_back(sr);

            for (int target : sr.targets) {
                for (auto& cand : providers.cogen->generate(seed, target)) {
                    verdict v = providers.judge->judge(cand.seed_id, cand.level, -1, cand.output,
                                                       cand.prompt);
                    if (v == verdict::error)
                        throw domain_error(diag_code::provider_failure,
                                           "discriminator failed while filtering candidates of '" +
                                               seed.id + "'");
                    if (v == verdict::match) fresh.push_back(std::move(cand));
                }
            }
        }

        std::size_t added = 0;
        for (const auto& c : fresh) {
            if (!known_ids.insert(c.id).second) continue; // set union: ids are identity
            dataset.push_back({c.id, c.category, c.prompt + "\n" + c.output});
            ++iter.new_by_level[c.level];
            ++added;
        }

        iter.dataset_size_after = dataset.size();
        if (iter.dataset_size_after < iter.dataset_size_before)
            throw domain_error(diag_code::non_monotone_dataset, "dataset shrank across iterations");

        if (added == 0) iter.status = "converged";
        else if (t >= config.max_iterations) iter.status = "max_iterations";
        else iter.status = "continue";

        bool stop = iter.status != "continue";
        report.iterations.push_back(std::move(iter));
        if (stop) break;
    }

    report.final_dataset_size = dataset.size();
    return report;
}

std::string report_to_json(const sapcl_report& report) {
    nlohmann::json root;
    root["final_dataset_size"] = report.final_dataset_size;
    auto& iters = root["iterations"] = nlohmann::json::array();
    for (const auto& it : report.iterations) {
        nlohmann::json j;
        j["t"] = it.t;
        j["dataset_size_before"] = it.dataset_size_before;
        j["dataset_size_after"] = it.dataset_size_after;
        j["status"] = it.status;
        nlohmann::json by_level = nlohmann::json::object();
        for (const auto& [lvl, n] : it.new_by_level) by_level[std::to_string(lvl)] = n;
        j["new_by_level"] = by_level;
        auto& seeds = j["seeds"] = nlohmann::json::array();
        for (const auto& s : it.seeds) {
            nlohmann::json js;
            js["id"] = s.id;
            js["level"] = s.level;
            js["targets"] = s.targets;
            nlohmann::json accs = nlohmann::json::array();
            for (const auto& a : s.accuracies) {
                if (a) accs.push_back(*a);
                else accs.push_back(nullptr);
            }
            js["accuracies"] = accs;
            seeds.push_back(std::move(js));
        }
        iters.push_back(std::move(j));
    }
    return root.dump(2);
}

std::vector<seed_record> dataset_from_json(const std::string& text) {
    nlohmann::json root = nlohmann::json::parse(text);
    std::vector<seed_record> out;
    for (const auto& j : root) {
        seed_record s;
        s.id = j.at("id");
        s.category = j.value("category", "uncategorized");
        s.payload = j.value("payload", "");
        out.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scripted mocks
// ---------------------------------------------------------------------------

struct scripted_providers::impl {
    nlohmann::json script;
    int train_calls = 0;
    int cogen_batch = 0; // makes candidate ids unique across iterations

    /// explore verdicts: script["explore"]["seeds"][seed][level] or
    /// script["explore"]["default"][level]; either one verdict for every
    /// variant or an array indexed by variant (last entry repeats).
    verdict explore_verdict(const std::string& seed, int level, int index) const {
        const nlohmann::json* spec = nullptr;
        std::string lvl = std::to_string(level);
        if (script.contains("explore")) {
            const auto& ex = script.at("explore");
            if (ex.contains("seeds") && ex.at("seeds").contains(seed) &&
                ex.at("seeds").at(seed).contains(lvl))
                spec = &ex.at("seeds").at(seed).at(lvl);
            else if (ex.contains("default") && ex.at("default").contains(lvl))
                spec = &ex.at("default").at(lvl);
        }
        if (!spec) return verdict::mismatch;
        return parse_verdict_entry(*spec, index);
    }

    static verdict parse_verdict_entry(const nlohmann::json& spec, int index) {
        if (spec.is_string()) return parse_verdict(spec.get<std::string>());
        if (spec.is_array() && !spec.empty()) {
            std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(std::max(index, 0)),
                                                  spec.size() - 1);
            return parse_verdict(spec.at(i).get<std::string>());
        }
        return verdict::mismatch;
    }

    static verdict parse_verdict(const std::string& s) {
        if (s == "match") return verdict::match;
        if (s == "mismatch") return verdict::mismatch;
        return verdict::error;
    }

    /// cogen verdict array for (seed, level); one candidate per entry.
    std::vector<verdict> cogen_verdicts(const std::string& seed, int level) const {
        std::string lvl = std::to_string(level);
        const nlohmann::json* spec = nullptr;
        if (script.contains("cogen")) {
            const auto& cg = script.at("cogen");
            if (cg.contains("seeds") && cg.at("seeds").contains(seed) &&
                cg.at("seeds").at(seed).contains(lvl))
                spec = &cg.at("seeds").at(seed).at(lvl);
            else if (cg.contains("default") && cg.at("default").contains(lvl))
                spec = &cg.at("default").at(lvl);
        }
        std::vector<verdict> out;
        if (spec && spec->is_array())
            for (const auto& v : *spec) out.push_back(parse_verdict(v.get<std::string>()));
        return out;
    }
};

scripted_providers::scripted_providers(const std::string& json_text)
    : impl_(std::make_unique<impl>()) {
    impl_->script = nlohmann::json::parse(json_text);
}

scripted_providers::~scripted_providers() = default;

void scripted_providers::train(const std::vector<seed_record>& dataset, int iteration) {
    (void)dataset;
    (void)iteration;
    ++impl_->train_calls;
}

std::vector<variant_problem> scripted_providers::variants(const seed_record& seed, int level,
                                                          int k) {
    std::vector<variant_problem> out;
    for (int i = 0; i < k; ++i)
        out.push_back({seed.id, level, i,
                       "variant(" + seed.id + ", L" + std::to_string(level) + ", " +
                           std::to_string(i) + ")"});
    return out;
}

std::string scripted_providers::solve(const seed_record& seed, const variant_problem& problem) {
    (void)seed;
    return "output(" + problem.payload + ")";
}

verdict scripted_providers::judge(const std::string& seed_id, int level, int index,
                                  const std::string& output, const std::string& prompt) {
    (void)prompt;
    if (index < 0) {
        // cogen filtering: the scripted verdict rides in the candidate output
        if (output.rfind("valid:", 0) == 0) return verdict::match;
        if (output.rfind("invalid:", 0) == 0) return verdict::mismatch;
        return verdict::error;
    }
    return impl_->explore_verdict(seed_id, level, index);
}

std::vector<candidate> scripted_providers::generate(const seed_record& seed, int level) {
    ++impl_->cogen_batch;
    std::vector<candidate> out;
    auto verdicts = impl_->cogen_verdicts(seed.id, level);
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        candidate c;
        c.id = seed.id + "::L" + std::to_string(level) + "::b" +
               std::to_string(impl_->cogen_batch) + "::c" + std::to_string(i);
        c.seed_id = seed.id;
        c.level = level;
        c.category = seed.category;
        c.prompt = "derived(" + seed.id + ", L" + std::to_string(level) + ")";
        c.output = (verdicts[i] == verdict::match ? "valid:" : "invalid:") + c.id;
        out.push_back(std::move(c));
    }
    return out;
}

provider_set scripted_providers::providers() {
    return provider_set{this, this, this, this, this};
}

int scripted_providers::train_calls() const { return impl_->train_calls; }

} // namespace dgc
