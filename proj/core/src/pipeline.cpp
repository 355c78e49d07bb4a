#include "iris3d/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <numeric>
#include <random>
#include <thread>

#include "iris3d/delaunay.hpp"
#include "iris3d/error.hpp"

namespace iris3d::pipeline {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finaliser over the pair.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

curv::CurvatureOptions curvature_options(const PipelineConfig& cfg) {
  curv::CurvatureOptions opt;
  opt.k = cfg.curvature_k;
  opt.up = -Vec3::UnitZ();
  return opt;
}

Surface reconstruct_surface(const SliceBoundarySet& boundaries, const PipelineConfig& cfg, std::uint64_t seed) {
  Surface s;
  const auto cloud = recon::slices_to_cloud(boundaries, cfg.geometry);
  s.coarse = recon::coarse_mesh(cloud, cfg.meridian_samples);
  const auto opt = curvature_options(cfg);
  s.coarse_field = curv::curvature_field(s.coarse.mesh, opt);
  recon::SamplingParams sp = cfg.sampling.scaled(cfg.geometry.s_xy);
  sp.seed = seed;
  const auto drive = s.coarse_field.max_abs();
  s.samples = recon::poisson_disk_resample(s.coarse.mesh, drive, sp);
  s.refined = retriangulate(s.samples.cloud);
  s.field = curv::curvature_field(s.refined, opt);
  return s;
}

SliceBoundarySet boundaries_from_masks(const std::vector<SegMask>& masks, const recon::ScanGeometry& geom) {
  SliceBoundarySet set;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const auto ub = extract_upper_boundary(masks[i], geom.center_column());
    set.slices.push_back({i, ub.left, ub.right});
  }
  return set;
}

VolumeResult process_phantom(const phantom::PhantomParams& params, const std::string& id, const PipelineConfig& cfg,
                             std::uint64_t seed) {
  const auto vol = phantom::phantom_slices(params, cfg.geometry);
  const SliceBoundarySet b = cfg.boundaries_from_masks ? boundaries_from_masks(vol.masks, cfg.geometry) : vol.boundaries;
  const Surface s = reconstruct_surface(b, cfg, seed);
  sectors::SectorOptions so;
  so.n = cfg.sector_points;
  so.seed = derive_seed(seed, 1);
  so.volume_id = id;
  const int label = vol.label;
  VolumeResult out;
  out.id = id;
  out.label = label;
  out.samples = sectors::build_sector_samples(s.refined, s.field, std::span<const int>(&label, 1), so).samples;
  out.refined_vertices = s.refined.vertices.size();
  return out;
}

Cohort make_cohort(const PipelineConfig& cfg) {
  if (cfg.volumes < 2) throw InvariantError("cohort: need at least two volumes");
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
    throw InvariantError("cohort: train fraction must lie in (0, 1)");
  Cohort c;
  for (std::size_t v = 0; v < cfg.volumes; ++v) {
    const int label = v % 2 == 0 ? 1 : 0;
    c.params.push_back(phantom::draw_params(label, derive_seed(cfg.seed, 1000 + v)));
    c.ids.push_back("vol" + std::to_string(v));
  }
  // Stratified split so both classes appear on each side.
  c.in_train.assign(cfg.volumes, 0);
  std::mt19937_64 rng(derive_seed(cfg.seed, 7));
  for (int label : {1, 0}) {
    std::vector<std::size_t> members;
    for (std::size_t v = 0; v < cfg.volumes; ++v)
      if (c.params[v].label() == label) members.push_back(v);
    std::shuffle(members.begin(), members.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::lround(cfg.train_fraction * static_cast<double>(members.size())));
    for (std::size_t k = 0; k < n_train && k < members.size(); ++k) c.in_train[members[k]] = 1;
  }
  return c;
}

std::vector<VolumeResult> process_cohort(const Cohort& cohort, const PipelineConfig& cfg) {
  const std::size_t n = cohort.params.size();
  std::vector<VolumeResult> results(n);
  std::vector<std::exception_ptr> errors(n);
  const auto work = [&](std::size_t v) {
    try {
      results[v] = process_phantom(cohort.params[v], cohort.ids[v], cfg, derive_seed(cfg.seed, 5000 + v));
    } catch (...) {
      errors[v] = std::current_exception();
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(cfg.jobs, n));
  if (jobs == 1) {
    for (std::size_t v = 0; v < n; ++v) work(v);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j)
      pool.emplace_back([&, j] {
        for (std::size_t v = j; v < n; v += jobs) work(v);
      });
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

ExperimentResult run_experiment(const PipelineConfig& cfg) {
  const Cohort cohort = make_cohort(cfg);
  ExperimentResult out;
  out.volumes = process_cohort(cohort, cfg);
  for (std::size_t v = 0; v < out.volumes.size(); ++v) {
    auto& dst = cohort.in_train[v] ? out.train : out.valid;
    dst.insert(dst.end(), out.volumes[v].samples.begin(), out.volumes[v].samples.end());
  }
  psn::PsnConfig pc = cfg.classifier;
  pc.seed = derive_seed(cfg.seed, 9);
  psn::PointSetNet net(pc);
  out.report = psn::psn_train(net, out.train, out.valid);
  return out;
}

std::vector<seg::SegExample> toy_segmentation_set(std::size_t count, std::uint64_t seed, std::size_t size) {
  if (size < 32 || size % 8 != 0) throw InvariantError("toy segmentation set: size must be a multiple of 8, >= 32");
  const double u = static_cast<double>(size) / 64.0;
  recon::ScanGeometry g;
  g.slices = 128;
  g.width = size;
  g.height = size;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<seg::SegExample> out;
  for (std::size_t i = 0; i < count; ++i) {
    phantom::PhantomParams p;
    p.pupil_radius = 4.0 * u;
    p.root_radius = 28.0 * u;
    p.base_depth = 36.0 * u;
    p.thickness = (5.0 + 3.0 * unit(rng)) * u;
    p.bow = 12.0 * u * unit(rng);
    p.frill_center = 12.0 * u;
    p.frill_width = 3.0 * u;
    p.frill_amplitude = 2.0 * u * unit(rng);
    p.azimuthal_noise = 2.0 * u * unit(rng);
    p.seed = rng();
    const double theta = std::numbers::pi * unit(rng);
    const SegMask mask = phantom::render_slice(p, g, theta, i);
    GrayImage img(size, size);
    std::normal_distribution<double> noise(0.0, 20.0);
    for (std::size_t k = 0; k < img.pixels.size(); ++k) {
      const double level = mask.labels[k] ? 170.0 : 70.0;
      img.pixels[k] = static_cast<std::uint8_t>(std::clamp(std::lround(level + noise(rng)), 0L, 255L));
    }
    out.push_back({image_to_tensor(img), mask});
  }
  return out;
}

}  // namespace iris3d::pipeline
