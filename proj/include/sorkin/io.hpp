#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sorkin/calibration.hpp"
#include "sorkin/density_matrix.hpp"
#include "sorkin/detector.hpp"
#include "sorkin/interferometer.hpp"
#include "sorkin/pipeline.hpp"
#include "sorkin/tomography.hpp"

namespace sorkin::io {

using Json = nlohmann::ordered_json;

std::string read_text(const std::filesystem::path& p);
/// Writes to a temporary sibling and renames over the target.
void write_text_atomic(const std::filesystem::path& p, std::string_view text);
Json read_json(const std::filesystem::path& p);
void write_json(const std::filesystem::path& p, const Json& j);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);
/// Hash of the compact serialization.
std::string config_hash(const Json& j);

// configuration ---------------------------------------------------------------

/// Seed is mandatory. Unknown keys are rejected so typos do not pass silently.
CampaignConfig config_from_json(const Json& j);
Json config_to_json(const CampaignConfig& c);

DetectorModel detector_from_json(const Json& j);
Json detector_to_json(const DetectorModel& d);

PolynomialTransfer transfer_from_json(const Json& j);
Json transfer_to_json(const PolynomialTransfer& t);

struct DensityFile {
  DensityMatrix rho;
  std::optional<double> flux;
  std::optional<double> background;
};
DensityFile density_from_json(const Json& j);
Json density_to_json(const DensityMatrix& rho, std::optional<double> flux = {},
                     std::optional<double> background = {});

// campaign files --------------------------------------------------------------

inline constexpr std::string_view kCampaignHeader = "cycle,draw_index,subset_mask,reading,timestamp";
inline constexpr std::string_view kSidebandHeader = "cycle,subset_mask,singles_rate,herald_rate";
inline constexpr std::string_view kCalibrationHeader = "k,V0,V1,V2,V3";
inline constexpr std::string_view kHistogramHeader = "bin_lo,bin_hi,count";

struct CampaignData {
  int n_paths = 0;
  std::vector<MeasurementCycle> cycles;
};

void write_campaign_csv(std::ostream& os, const std::vector<MeasurementCycle>& cycles);
/// n_paths is the bit width of the largest mask seen. Missing readings stay NaN.
CampaignData read_campaign_csv(std::istream& is);

void write_sideband_csv(std::ostream& os, const std::vector<MeasurementCycle>& cycles);
void read_sideband_csv(std::istream& is, CampaignData& data);

void write_calibration_csv(std::ostream& os, const BeamCombinationDataset& d);
BeamCombinationDataset read_calibration_csv(std::istream& is);

void write_histogram_csv(std::ostream& os, const std::vector<stats::HistogramBin>& bins);

// reports ---------------------------------------------------------------------

Json analysis_to_json(const AnalysisReport& r);
std::vector<MeasuredOrder> measured_orders_from_json(const Json& j, std::string& regime);

Json prediction_to_json(const KappaPrediction& p, const std::map<std::string, std::string>& provenance);
std::vector<PredictedOrder> predicted_orders_from_json(const Json& j);

Json correction_to_json(const CorrectionReport& r);
/// Checks the row-wise arithmetic invariant.
CorrectionReport correction_from_json(const Json& j);

Json selection_to_json(const OrderSelection& s, const FitDiagnostics& d);

}  // namespace sorkin::io
