#include "lemon/metrics/metrics.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "lemon/geom/ops.hpp"
#include "lemon/util/errors.hpp"
#include "lemon/util/threads.hpp"

using nlohmann::json;

namespace lemon::metrics {

PrfResult contact_prf(const std::vector<float>& pred, const std::vector<std::uint8_t>& gt,
                      double threshold) {
  require(pred.size() == gt.size(), "contact_prf: length mismatch");
  require(threshold > 0.0 && threshold < 1.0, "contact_prf: threshold must be in (0,1)");
  std::int64_t tp = 0, fp = 0, fn = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] > threshold;
    const bool t = gt[i] != 0;
    if (p && t)
      ++tp;
    else if (p && !t)
      ++fp;
    else if (!p && t)
      ++fn;
  }
  PrfResult r;
  r.precision = (tp + fp) > 0 ? double(tp) / double(tp + fp) : 0.0;
  r.recall = (tp + fn) > 0 ? double(tp) / double(tp + fn) : 0.0;
  r.f1 = (r.precision + r.recall) > 0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                                      : 0.0;
  return r;
}

GeoResult contact_geo_error(const std::vector<std::int64_t>& pred_pos,
                            const std::vector<std::int64_t>& gt_pos,
                            const geom::TemplateMesh& mesh, bool symmetric) {
  GeoResult r;
  if (pred_pos.empty()) {
    r.empty_pred = true;
    return r;
  }
  if (gt_pos.empty()) {
    r.excluded = true;
    return r;
  }
  const auto d = geom::geodesic_nearest(mesh, gt_pos, pred_pos);
  double sum = 0;
  for (double v : d) sum += v;
  double mean = sum / double(d.size());
  if (symmetric) {
    const auto back = geom::geodesic_nearest(mesh, pred_pos, gt_pos);
    double bsum = 0;
    for (double v : back) bsum += v;
    mean = 0.5 * (mean + bsum / double(back.size()));
  }
  r.cm = mean * 100.0;
  return r;
}

AucResult affordance_auc(const std::vector<float>& pred, const std::vector<std::uint8_t>& gt) {
  require(pred.size() == gt.size(), "auc: length mismatch");
  std::int64_t npos = 0, nneg = 0;
  for (auto g : gt) (g != 0 ? npos : nneg)++;
  AucResult r;
  if (npos == 0 || nneg == 0) {
    r.excluded = true;
    return r;
  }
  // rank-sum with midranks for ties
  std::vector<std::int64_t> order(pred.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::int64_t>(i);
  std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    return pred[static_cast<size_t>(a)] < pred[static_cast<size_t>(b)];
  });
  std::vector<double> rank(pred.size());
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j + 1 < order.size() &&
           pred[static_cast<size_t>(order[j + 1])] == pred[static_cast<size_t>(order[i])])
      ++j;
    const double mid = 0.5 * (double(i) + double(j)) + 1.0;  // 1-based midrank
    for (size_t k = i; k <= j; ++k) rank[static_cast<size_t>(order[k])] = mid;
    i = j + 1;
  }
  double pos_ranks = 0;
  for (size_t k = 0; k < gt.size(); ++k)
    if (gt[k] != 0) pos_ranks += rank[k];
  r.value = (pos_ranks - double(npos) * double(npos + 1) / 2.0) / (double(npos) * double(nneg));
  return r;
}

double affordance_aiou(const std::vector<float>& pred, const std::vector<std::uint8_t>& gt) {
  require(pred.size() == gt.size(), "aiou: length mismatch");
  double acc = 0;
  int steps = 0;
  for (int t = 1; t <= 99; ++t, ++steps) {
    const double thr = double(t) / 100.0;
    std::int64_t inter = 0, uni = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
      const bool p = pred[i] > thr;
      const bool g = gt[i] != 0;
      if (p && g) ++inter;
      if (p || g) ++uni;
    }
    acc += uni > 0 ? double(inter) / double(uni) : 0.0;
  }
  return acc / double(steps);
}

double affordance_sim(const std::vector<float>& pred, const std::vector<float>& gt) {
  require(pred.size() == gt.size(), "sim: length mismatch");
  double ps = 0, gs = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    require(pred[i] >= 0 && gt[i] >= 0, "sim: maps must be nonnegative");
    ps += pred[i];
    gs += gt[i];
  }
  require(ps > 0 && gs > 0, "sim: zero-sum map");
  double s = 0;
  for (size_t i = 0; i < pred.size(); ++i) s += std::min(double(pred[i]) / ps, double(gt[i]) / gs);
  return s;
}

double spatial_mse(const std::vector<geom::Vec3>& pred, const std::vector<geom::Vec3>& gt,
                   bool squared) {
  require(pred.size() == gt.size() && !pred.empty(), "mse: length mismatch or empty");
  double acc = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    require(pred[i].finite() && gt[i].finite(), "mse: non-finite center");
    const double d2 = (pred[i] - gt[i]).sqnorm();
    acc += squared ? d2 : std::sqrt(d2);
  }
  return acc / double(pred.size());
}

namespace {

struct SampleMetrics {
  PrfResult prf;
  GeoResult geo;
  AucResult auc;
  double aiou = 0;
  double sim = 0;
  bool sim_excluded = false;
  double center_err = 0;  // squared or plain per config
  std::string category;
  std::string id;
};

}  // namespace

MetricReport evaluate(const std::vector<Prediction>& predictions,
                      const std::vector<data::InteractionSample>& samples,
                      const geom::TemplateMesh& mesh, const MetricsConfig& config) {
  require(predictions.size() == samples.size(),
          "evaluate: prediction count does not match sample count");
  std::map<std::string, const Prediction*> by_id;
  for (const auto& p : predictions) {
    require(by_id.emplace(p.id, &p).second, "evaluate: duplicate prediction id " + p.id);
  }

  const std::int64_t n = static_cast<std::int64_t>(samples.size());
  std::vector<const Prediction*> aligned(static_cast<size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& s = samples[static_cast<size_t>(i)];
    const auto it = by_id.find(s.id);
    require(it != by_id.end(), "evaluate: no prediction for sample " + s.id);
    require(it->second->contact.size() == s.contact_gt.size(),
            "evaluate: contact length for " + s.id);
    require(it->second->affordance.size() == s.affordance_gt.size(),
            "evaluate: affordance length for " + s.id);
    aligned[static_cast<size_t>(i)] = it->second;
  }

  std::vector<SampleMetrics> sm(static_cast<size_t>(n));
  parallel_for(n, [&](std::int64_t i) {
    const auto& s = samples[static_cast<size_t>(i)];
    const Prediction& p = *aligned[static_cast<size_t>(i)];
    SampleMetrics& m = sm[static_cast<size_t>(i)];
    m.id = s.id;
    m.category = s.object_category;

    m.prf = contact_prf(p.contact, s.contact_gt, config.contact_threshold);

    std::vector<std::int64_t> pred_pos, gt_pos;
    for (size_t v = 0; v < p.contact.size(); ++v)
      if (p.contact[v] > config.contact_threshold) pred_pos.push_back(static_cast<std::int64_t>(v));
    for (size_t v = 0; v < s.contact_gt.size(); ++v)
      if (s.contact_gt[v] != 0) gt_pos.push_back(static_cast<std::int64_t>(v));
    m.geo = contact_geo_error(pred_pos, gt_pos, mesh, config.symmetric_geo);

    std::vector<std::uint8_t> gt_bin(s.affordance_gt.size());
    for (size_t v = 0; v < gt_bin.size(); ++v)
      gt_bin[v] = s.affordance_gt[v] > config.gt_heat_threshold ? 1 : 0;
    m.auc = affordance_auc(p.affordance, gt_bin);
    m.aiou = affordance_aiou(p.affordance, gt_bin);
    try {
      m.sim = affordance_sim(p.affordance, s.affordance_gt);
    } catch (const ValidationError&) {
      m.sim_excluded = true;
    }
    const double d2 = (p.center - s.center_gt).sqnorm();
    m.center_err = config.mse_squared ? d2 : std::sqrt(d2);
  });

  MetricReport report;
  report.count = n;

  struct Acc {
    double p = 0, r = 0, f1 = 0, geo = 0, auc = 0, aiou = 0, sim = 0, mse = 0;
    std::int64_t n_prf = 0, n_geo = 0, n_auc = 0, n_aiou = 0, n_sim = 0, n_mse = 0;

    void add(const SampleMetrics& m) {
      p += m.prf.precision;
      r += m.prf.recall;
      f1 += m.prf.f1;
      ++n_prf;
      if (!m.geo.excluded) {
        geo += m.geo.cm;
        ++n_geo;
      }
      if (!m.auc.excluded) {
        auc += m.auc.value;
        ++n_auc;
      }
      aiou += m.aiou;
      ++n_aiou;
      if (!m.sim_excluded) {
        sim += m.sim;
        ++n_sim;
      }
      mse += m.center_err;
      ++n_mse;
    }

    MetricValues values() const {
      MetricValues v;
      v.precision = n_prf ? p / double(n_prf) : 0;
      v.recall = n_prf ? r / double(n_prf) : 0;
      v.f1 = n_prf ? f1 / double(n_prf) : 0;
      v.geo_cm = n_geo ? geo / double(n_geo) : 0;
      v.auc = n_auc ? auc / double(n_auc) : 0;
      v.aiou = n_aiou ? aiou / double(n_aiou) : 0;
      v.sim = n_sim ? sim / double(n_sim) : 0;
      v.mse = n_mse ? mse / double(n_mse) : 0;
      return v;
    }
  };

  Acc overall;
  std::map<std::string, Acc> per_cat;
  for (const auto& m : sm) {
    overall.add(m);
    per_cat[m.category].add(m);
    if (m.geo.empty_pred) report.flags.push_back({m.id, "no predicted contact vertices"});
    if (m.geo.excluded) report.flags.push_back({m.id, "no GT contact vertices; geo skipped"});
    if (m.auc.excluded) report.flags.push_back({m.id, "single-class affordance GT; AUC skipped"});
    if (m.sim_excluded) report.flags.push_back({m.id, "zero-sum affordance map; SIM skipped"});
  }
  report.overall = overall.values();
  for (const auto& [cat, acc] : per_cat) report.per_category[cat] = acc.values();
  return report;
}

namespace {

json values_to_json(const MetricValues& v) {
  return json{{"precision", v.precision}, {"recall", v.recall}, {"f1", v.f1},
              {"geo_cm", v.geo_cm},       {"auc", v.auc * 100.0}, {"aiou", v.aiou * 100.0},
              {"sim", v.sim},             {"mse", v.mse}};
}

}  // namespace

std::string report_to_json(const MetricReport& report) {
  json j;
  j["overall"] = values_to_json(report.overall);
  json cats = json::object();
  for (const auto& [cat, v] : report.per_category) cats[cat] = values_to_json(v);
  j["per_category"] = cats;
  json flags = json::array();
  for (const auto& f : report.flags) flags.push_back({{"sample", f.sample_id}, {"reason", f.reason}});
  j["flags"] = flags;
  j["count"] = report.count;
  return j.dump(2);
}

void write_report(const std::string& path, const MetricReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write metrics report: " + path);
  out << report_to_json(report) << '\n';
}

}  // namespace lemon::metrics
