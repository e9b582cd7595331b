#include "lemon/data/sample_io.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "lemon/data/tensor_blob.hpp"
#include "lemon/util/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace lemon::data {

namespace {

std::vector<float> vecs_to_f32(const std::vector<geom::Vec3>& v) {
  std::vector<float> out;
  out.reserve(v.size() * 3);
  for (const auto& p : v) {
    out.push_back(static_cast<float>(p.x));
    out.push_back(static_cast<float>(p.y));
    out.push_back(static_cast<float>(p.z));
  }
  return out;
}

std::vector<geom::Vec3> f32_to_vecs(const Tensor<float>& t) {
  require(t.rank() == 2 && t.cols() == 3, "expected an (N,3) blob");
  std::vector<geom::Vec3> out(static_cast<size_t>(t.rows()));
  for (std::int64_t i = 0; i < t.rows(); ++i)
    out[static_cast<size_t>(i)] = {double(t.at(i, 0)), double(t.at(i, 1)), double(t.at(i, 2))};
  return out;
}

std::vector<float> doubles_to_f32(const std::vector<double>& v) {
  return std::vector<float>(v.begin(), v.end());
}

json shape_json(const std::vector<std::int64_t>& shape) {
  json j = json::array();
  for (auto d : shape) j.push_back(d);
  return j;
}

void check_blob(const fs::path& dir, const std::string& name, const json& manifest_shapes) {
  const std::string path = (dir / name).string();
  const BlobHeader h = peek_blob(path);
  require(manifest_shapes.contains(name), "manifest missing shape entry for " + name);
  const auto& ms = manifest_shapes.at(name);
  if (ms.size() != h.shape.size())
    throw IoError("manifest/blob rank mismatch for " + path);
  for (size_t i = 0; i < h.shape.size(); ++i)
    if (ms[i].get<std::int64_t>() != h.shape[i])
      throw IoError("manifest shape disagrees with blob header for " + path);
}

}  // namespace

void write_sample(const InteractionSample& sample, const std::string& directory,
                  double proxy_radius) {
  sample.validate();
  fs::create_directories(directory);
  const fs::path dir(directory);

  json shapes;
  auto put_f32 = [&](const std::string& name, const std::vector<std::int64_t>& shape,
                     const float* values) {
    write_blob((dir / name).string(), shape, values);
    shapes[name] = shape_json(shape);
  };
  auto put_u8 = [&](const std::string& name, const std::vector<std::int64_t>& shape,
                    const std::uint8_t* values) {
    write_blob((dir / name).string(), shape, values);
    shapes[name] = shape_json(shape);
  };

  const auto& img = sample.image;
  put_f32("image.lmtn", {img.height, img.width, 3}, img.pixels.data());
  put_u8("human_mask.lmtn", {img.height, img.width}, img.human_mask.data());
  put_u8("object_mask.lmtn", {img.height, img.width}, img.object_mask.data());

  const auto obj = vecs_to_f32(sample.object_points.points);
  put_f32("object_points.lmtn", {sample.object_count(), 3}, obj.data());
  const auto hf = vecs_to_f32(sample.human_vertices_full);
  put_f32("human_full.lmtn", {sample.full_vertex_count(), 3}, hf.data());
  const auto hs = vecs_to_f32(sample.human_vertices_sampled);
  put_f32("human_sampled.lmtn", {sample.sampled_vertex_count(), 3}, hs.data());

  const auto oc = doubles_to_f32(sample.object_curvature.values);
  put_f32("object_curvature.lmtn", {sample.object_count()}, oc.data());
  const auto hc = doubles_to_f32(sample.human_curvature.values);
  put_f32("human_curvature.lmtn", {sample.sampled_vertex_count()}, hc.data());

  put_u8("contact.lmtn", {sample.full_vertex_count()}, sample.contact_gt.data());
  put_f32("affordance.lmtn", {sample.object_count()}, sample.affordance_gt.data());
  const float center[3] = {static_cast<float>(sample.center_gt.x),
                           static_cast<float>(sample.center_gt.y),
                           static_cast<float>(sample.center_gt.z)};
  put_f32("center.lmtn", {3}, center);

  json manifest;
  manifest["id"] = sample.id;
  manifest["object_category"] = sample.object_category;
  manifest["intent_class"] = sample.intent_class;
  manifest["proxy_radius"] = proxy_radius;
  manifest["curvature_k"] = sample.object_curvature.neighborhood_size;
  manifest["shapes"] = shapes;

  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError("cannot write manifest in " + directory);
  out << manifest.dump(2) << '\n';
}

InteractionSample read_sample(const std::string& directory) {
  const fs::path dir(directory);
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError("cannot open manifest in " + directory);
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw IoError("bad manifest json in " + directory + ": " + e.what());
  }

  const json& shapes = manifest.at("shapes");
  for (const auto& [name, shape] : shapes.items()) check_blob(dir, name, shapes);

  InteractionSample s;
  s.id = manifest.at("id").get<std::string>();
  s.object_category = manifest.at("object_category").get<std::string>();
  s.intent_class = manifest.at("intent_class").get<std::int64_t>();
  const int curvature_k = manifest.value("curvature_k", 0);

  const Tensor<float> img = read_blob_f32((dir / "image.lmtn").string());
  require(img.rank() == 3 && img.dim(2) == 3, "image blob must be (H,W,3)");
  s.image.height = img.dim(0);
  s.image.width = img.dim(1);
  s.image.pixels = img.reshaped({img.dim(0) * img.dim(1), 3});
  s.image.human_mask = read_blob_u8((dir / "human_mask.lmtn").string());
  s.image.object_mask = read_blob_u8((dir / "object_mask.lmtn").string());

  s.object_points.points = f32_to_vecs(read_blob_f32((dir / "object_points.lmtn").string()));
  s.human_vertices_full = f32_to_vecs(read_blob_f32((dir / "human_full.lmtn").string()));
  s.human_vertices_sampled = f32_to_vecs(read_blob_f32((dir / "human_sampled.lmtn").string()));

  const Tensor<float> oc = read_blob_f32((dir / "object_curvature.lmtn").string());
  s.object_curvature.values.assign(oc.data(), oc.data() + oc.numel());
  s.object_curvature.neighborhood_size = curvature_k;
  const Tensor<float> hc = read_blob_f32((dir / "human_curvature.lmtn").string());
  s.human_curvature.values.assign(hc.data(), hc.data() + hc.numel());
  s.human_curvature.neighborhood_size = curvature_k;

  s.contact_gt = read_blob_u8((dir / "contact.lmtn").string());
  const Tensor<float> aff = read_blob_f32((dir / "affordance.lmtn").string());
  s.affordance_gt.assign(aff.data(), aff.data() + aff.numel());
  const Tensor<float> center = read_blob_f32((dir / "center.lmtn").string());
  require(center.numel() == 3, "center blob must hold 3 values");
  s.center_gt = {double(center[0]), double(center[1]), double(center[2])};

  s.validate();
  return s;
}

double manifest_radius(const std::string& directory) {
  std::ifstream in(fs::path(directory) / "manifest.json");
  if (!in) throw IoError("cannot open manifest in " + directory);
  json manifest;
  in >> manifest;
  return manifest.at("proxy_radius").get<double>();
}

}  // namespace lemon::data
