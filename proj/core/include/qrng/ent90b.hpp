#pragma once

// SP 800-90B non-IID min-entropy estimators for binary sources.

#include <array>
#include <optional>
#include <string_view>

#include <nlohmann/json.hpp>

#include "qrng/bits.hpp"

namespace qrng::ent90b {

enum class Estimator {
  mcv,
  collision,
  markov,
  compression,
  t_tuple,
  lrs,
  multi_mcw,
  lag_prediction,
  multi_mmc,
  lz78y,
};

inline constexpr std::array<Estimator, 10> kEstimators = {
    Estimator::mcv,      Estimator::collision,      Estimator::markov,    Estimator::compression,
    Estimator::t_tuple,  Estimator::lrs,            Estimator::multi_mcw, Estimator::lag_prediction,
    Estimator::multi_mmc, Estimator::lz78y,
};

std::string_view estimator_name(Estimator e);    // "MultiMCW"
std::string_view estimator_abbrev(Estimator e);  // report key: "MMCWT"
Estimator parse_estimator(std::string_view text);

/// Upper confidence bound quantile used throughout (99%).
inline constexpr double kZ = 2.576;

/// Streams shorter than this are accepted but flagged.
inline constexpr std::size_t kRecommendedLength = 1'000'000;

/// Min-entropy per bit in [0,1]; nullopt when the stream is too short for the estimator.
std::optional<double> estimate(Estimator e, const BitStream& stream);

struct EntropyReport {
  std::size_t n = 0;
  std::array<std::optional<double>, 10> h{};  // kEstimators order
  double h_original = 0.0;
  double h_assessed = 0.0;
  double min_entropy = 0.0;
  bool below_recommended = false;

  std::optional<double> value(Estimator e) const { return h[static_cast<std::size_t>(e)]; }
};

/// All ten estimators; throws if none applies.
EntropyReport min_entropy(const BitStream& stream);

/// {"MCV": .., "ClT": .., ..., "LZ78Y": .., "hAs": .., "hOr": .., "minE": ..}; "NA" for skipped rows.
nlohmann::json to_json(const EntropyReport& report);

// Building blocks exposed for verification.

/// Solves the binary collision-mean equation for the most likely symbol probability.
double collision_probability(double mean_lower_bound);

/// Largest p in [0,1] for which a run of r correct predictions in N trials is at
/// least 1% likely.
double local_prediction_probability(std::size_t n, std::size_t longest_run);

}  // namespace qrng::ent90b
