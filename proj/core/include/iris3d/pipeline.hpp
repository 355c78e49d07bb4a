#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iris3d/curvature.hpp"
#include "iris3d/phantom.hpp"
#include "iris3d/pointset_classifier.hpp"
#include "iris3d/reconstruct.hpp"
#include "iris3d/sectors.hpp"
#include "iris3d/wrb_segnet.hpp"

namespace iris3d::pipeline {

struct PipelineConfig {
  recon::ScanGeometry geometry;
  recon::SamplingParams sampling;  // radii in pixels
  std::size_t meridian_samples = 64;
  std::size_t curvature_k = 16;
  std::size_t sector_points = 256;
  psn::PsnConfig classifier;
  std::size_t volumes = 100;
  double train_fraction = 0.8;
  bool boundaries_from_masks = true;  // false uses the exact phantom boundaries
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
};

// Seed of the i-th stochastic stream derived from a global seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Curvature is signed against the anterior direction (-z, since depth grows
// with the image row).
curv::CurvatureOptions curvature_options(const PipelineConfig& cfg);

struct Surface {
  recon::CoarseMesh coarse;
  curv::CurvatureField coarse_field;
  recon::PoissonSamples samples;
  TriMesh refined;
  curv::CurvatureField field;
};

// boundaries -> point cloud -> coarse mesh -> curvature -> adaptive Poisson
// samples -> Delaunay surface -> curvature.
Surface reconstruct_surface(const SliceBoundarySet& boundaries, const PipelineConfig& cfg, std::uint64_t seed);

// Upper boundaries of every slice mask.
SliceBoundarySet boundaries_from_masks(const std::vector<SegMask>& masks, const recon::ScanGeometry& geom);

struct VolumeResult {
  std::string id;
  int label = 0;
  std::vector<sectors::SectorSample> samples;
  std::size_t refined_vertices = 0;
};

VolumeResult process_phantom(const phantom::PhantomParams& params, const std::string& id, const PipelineConfig& cfg,
                             std::uint64_t seed);

struct Cohort {
  std::vector<phantom::PhantomParams> params;  // alternating labels 1, 0, 1, ...
  std::vector<std::string> ids;
  std::vector<std::uint8_t> in_train;         // seeded split by volume
};
Cohort make_cohort(const PipelineConfig& cfg);

struct ExperimentResult {
  std::vector<VolumeResult> volumes;
  std::vector<sectors::SectorSample> train, valid;
  psn::PsnReport report;
};

// Builds every volume (in parallel when cfg.jobs > 1; results do not depend
// on the job count), splits sectors by volume, trains and evaluates.
ExperimentResult run_experiment(const PipelineConfig& cfg);

std::vector<VolumeResult> process_cohort(const Cohort& cohort, const PipelineConfig& cfg);

// Small slices with noisy grey levels for the segmentation network: random
// bow, frill and slice angle per example on a size x size scan.
std::vector<seg::SegExample> toy_segmentation_set(std::size_t count, std::uint64_t seed, std::size_t size = 64);

}  // namespace iris3d::pipeline
