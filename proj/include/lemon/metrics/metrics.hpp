#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lemon/data/sample.hpp"
#include "lemon/geom/types.hpp"

namespace lemon::metrics {

struct MetricsConfig {
  double contact_threshold = 0.5;   // binarization of predicted contact
  double gt_heat_threshold = 0.5;   // binarization of continuous affordance GT
  bool symmetric_geo = false;       // also average GT->prediction distances
  bool mse_squared = true;          // squared norm (default) or plain norm
};

struct PrfResult {
  double precision = 0, recall = 0, f1 = 0;
};

// Threshold, count TP/FP/FN. 0/0 cases resolve to 0.
PrfResult contact_prf(const std::vector<float>& pred, const std::vector<std::uint8_t>& gt,
                      double threshold);

struct GeoResult {
  double cm = 0;
  bool empty_pred = false;  // no predicted positives: value 0, flagged
  bool excluded = false;    // no GT positives but predictions exist: skip sample
};

// Mean geodesic distance (cm) from predicted-positive vertices to the nearest
// GT-positive vertex over the mesh edge graph.
GeoResult contact_geo_error(const std::vector<std::int64_t>& pred_pos,
                            const std::vector<std::int64_t>& gt_pos,
                            const geom::TemplateMesh& mesh, bool symmetric = false);

struct AucResult {
  double value = 0;
  bool excluded = false;  // single-class ground truth
};

// Rank AUC: probability a random positive outranks a random negative, ties 1/2.
AucResult affordance_auc(const std::vector<float>& pred, const std::vector<std::uint8_t>& gt);

// IoU averaged over prediction thresholds 0.01..0.99 (step 0.01).
double affordance_aiou(const std::vector<float>& pred, const std::vector<std::uint8_t>& gt);

// Histogram intersection after normalizing both maps to sum 1.
double affordance_sim(const std::vector<float>& pred, const std::vector<float>& gt);

// Mean (squared) Euclidean center error over sample pairs.
double spatial_mse(const std::vector<geom::Vec3>& pred, const std::vector<geom::Vec3>& gt,
                   bool squared = true);

struct Prediction {
  std::string id;
  std::vector<float> contact;     // full vertex count
  std::vector<float> affordance;  // object point count
  geom::Vec3 center;
};

struct MetricValues {
  double precision = 0, recall = 0, f1 = 0;
  double geo_cm = 0;
  double auc = 0, aiou = 0;  // stored in [0,1]; reports display x100
  double sim = 0;
  double mse = 0;
};

struct Flag {
  std::string sample_id;
  std::string reason;
};

struct MetricReport {
  MetricValues overall;
  std::map<std::string, MetricValues> per_category;
  std::vector<Flag> flags;
  std::int64_t count = 0;
};

// Aggregates per-sample metrics (mean over included samples) overall and per
// object category. Predictions align to samples by id in any order.
MetricReport evaluate(const std::vector<Prediction>& predictions,
                      const std::vector<data::InteractionSample>& samples,
                      const geom::TemplateMesh& mesh, const MetricsConfig& config = {});

// metrics.json payload (AUC and aIOU scaled x100 for display).
std::string report_to_json(const MetricReport& report);
void write_report(const std::string& path, const MetricReport& report);

}  // namespace lemon::metrics
