#pragma once

#include "svar/core.hpp"
#include "svar/restricted_mle.hpp"
#include "svar/spectral.hpp"
#include "svar/tsglasso.hpp"
#include "svar/varmodel.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>
#include <vector>

namespace svar {

enum class Method { Svar, Msvar };

Method parse_method(const std::string& name);
std::string to_string(Method m);

struct SvarConfig {
  std::vector<Index> p_grid{1, 2, 3};
  std::vector<Index> m_grid;  // pair counts; empty means 0 .. K(K-1)/2
  int half_window = 0;        // 0 picks default_half_window(K)
};

struct MsvarConfig {
  std::vector<Index> p_grid{1, 2, 3};
  double q = 0.1;
  bool by_correction = false;  // Benjamini-Yekutieli instead of plain BH
  bool refine = true;          // false stops after Stage 1
  int half_window = 0;
  GlassoConfig glasso;
};

/// Twenty equally spaced values in (0, 1), used when no grid is configured.
std::vector<double> default_lambda_grid();

/// Fixed lambda of the untuned msVAR variant.
inline constexpr double kFixedLambda = 0.2;

struct BicPoint {
  Index p = 0;
  Index count = 0;  // pairs M in Stage 1, free coefficients m in Stage 2
  double value = 0;
  bool operator==(const BicPoint&) const = default;
};

struct StageTimes {
  double stage1 = 0;
  double stage2 = 0;
};

struct FitReport {
  Method method = Method::Svar;
  std::vector<std::string> series_names;
  VarModel final_model;
  VarModel stage1_model;  // restricted fit on stage1_support at p*
  Index selected_p = 0;
  Index selected_pairs = 0;
  Index final_nonzeros = 0;
  SupportMask stage1_support;
  SupportMask stage2_support;
  std::vector<BicPoint> bic_trace;   // over (p, M) or p
  std::vector<BicPoint> bic_m_path;  // sVAR Stage 2
  std::vector<CriterionPoint> tuning_trace;
  int half_window = 0;
  double lambda = 0;      // absolute
  double lambda_max = 0;
  double fdr_q = 0;
  Index fdr_tests = 0;
  Index fdr_rejections = 0;
  std::vector<std::string> flags;
  StageTimes wall_time;

  /// Compares everything except wall times.
  bool operator==(const FitReport& other) const;
};

void to_json(nlohmann::json& j, const FitReport& r);
void from_json(const nlohmann::json& j, FitReport& r);

FitReport svar_fit(const TimeSeries& data, const SvarConfig& config = {});
FitReport msvar_fit(const TimeSeries& data, const MsvarConfig& config = {});

/// Benjamini-Hochberg step-up at level q. Returns the rejected input indices
/// in increasing order. With `by` the thresholds are divided by sum_{i<=N} 1/i.
std::vector<std::size_t> bh_fdr(const std::vector<double>& p_values, double q, bool by = false);

}  // namespace svar
