#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dgc/diagnostics.hpp"

namespace dgc {

enum class verdict { match, mismatch, error };

struct seed_record {
    std::string id;
    std::string category;
    std::string payload; // instruction + graph reference
};

struct variant_problem {
    std::string seed_id;
    int level = 1; // 1 easy, 2 intermediate, 3 advanced
    int index = 0; // variant number within the level
    std::string payload;
};

struct candidate {
    std::string id;
    std::string seed_id;
    int level = 1;
    std::string category;
    std::string prompt;
    std::string output;
};

// ---------------------------------------------------------------------------
// Providers: synchronous call interfaces. Real model-backed implementations
// live behind these; the loop never looks inside the payloads.
// ---------------------------------------------------------------------------

struct trainer {
    virtual ~trainer() = default;
    virtual void train(const std::vector<seed_record>& dataset, int iteration) = 0;
};

struct problem_generator {
    virtual ~problem_generator() = default;
    /// K variants of `seed` at difficulty `level`.
    virtual std::vector<variant_problem> variants(const seed_record& seed, int level, int k) = 0;
};

struct solver {
    virtual ~solver() = default;
    virtual std::string solve(const seed_record& seed, const variant_problem& problem) = 0;
};

struct discriminator {
    virtual ~discriminator() = default;
    /// Judges `output` against the problem keyed by (seed, level, index).
    virtual verdict judge(const std::string& seed_id, int level, int index,
                          const std::string& output, const std::string& prompt) = 0;
};

struct co_generator {
    virtual ~co_generator() = default;
    virtual std::vector<candidate> generate(const seed_record& seed, int level) = 0;
};

struct provider_set {
    trainer* train = nullptr;
    problem_generator* problems = nullptr;
    solver* solve = nullptr;
    discriminator* judge = nullptr;
    co_generator* cogen = nullptr;
};

// ---------------------------------------------------------------------------
// Loop configuration and reports
// ---------------------------------------------------------------------------

struct curriculum_config {
    double sample_proportion = 0.01; // alpha_s in (0, 1]
    double tau = 0.8;                // pass threshold
    int variants_per_level = 20;     // K
    int max_iterations = 4;
    std::uint64_t rng_seed = 0;
};

struct boundary_result {
    std::string seed_id;
    int level = 0; // highest consecutive level passed, 0 when level 1 fails
    std::array<std::optional<double>, 3> accuracies; // probed levels only
};

struct seed_report {
    std::string id;
    int level = 0;
    std::vector<int> targets;
    std::array<std::optional<double>, 3> accuracies;
};

struct iteration_report {
    int t = 0;
    std::size_t dataset_size_before = 0;
    std::size_t dataset_size_after = 0;
    std::vector<seed_report> seeds;
    std::map<int, int> new_by_level; // valid candidates per difficulty level
    std::string status;              // continue | converged | max_iterations
};

struct sapcl_report {
    std::vector<iteration_report> iterations;
    std::size_t final_dataset_size = 0;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// ceil(alpha * |dataset|) seeds, weight inversely proportional to category
/// frequency, without replacement. Deterministic under a fixed rng state
/// (raw mt19937_64 output only; no library distributions).
/// Throws EmptyDataset.
std::vector<seed_record> category_aware_sample(const std::vector<seed_record>& dataset,
                                               double alpha, std::mt19937_64& rng);

/// Probes levels 1..3 in order, stopping at the first failure; a level
/// passes when Match-verdicts / K >= tau.
/// Throws ProviderFailure on a verdict of `error`.
boundary_result capability_level(const seed_record& seed, problem_generator& problems,
                                 solver& solve, discriminator& judge, int k_variants, double tau);

/// {L} when L >= 1, plus {L+1} when L < 3.
std::vector<int> boundary_targets(int level);

/// The full SFT + exploration loop over abstract providers.
/// Throws EmptyDataset / ProviderFailure / NonMonotoneDataset.
sapcl_report run_sapcl(std::vector<seed_record> dataset, const provider_set& providers,
                       const curriculum_config& config);

std::string report_to_json(const sapcl_report& report);

std::vector<seed_record> dataset_from_json(const std::string& text);

// ---------------------------------------------------------------------------
// Scripted mock providers (JSON verdict scripts keyed by seed/level/variant)
// ---------------------------------------------------------------------------

class scripted_providers final : public trainer,
                                 public problem_generator,
                                 public solver,
                                 public discriminator,
                                 public co_generator {
  public:
    explicit scripted_providers(const std::string& json_text);
    ~scripted_providers() override;

    void train(const std::vector<seed_record>& dataset, int iteration) override;
    std::vector<variant_problem> variants(const seed_record& seed, int level, int k) override;
    std::string solve(const seed_record& seed, const variant_problem& problem) override;
    verdict judge(const std::string& seed_id, int level, int index, const std::string& output,
                  const std::string& prompt) override;
    std::vector<candidate> generate(const seed_record& seed, int level) override;

    provider_set providers();
    int train_calls() const;

  private:
    struct impl;
    std::unique_ptr<impl> impl_;
};

} // namespace dgc
