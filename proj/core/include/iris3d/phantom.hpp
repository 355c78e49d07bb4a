#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "iris3d/boundary.hpp"
#include "iris3d/image_io.hpp"
#include "iris3d/reconstruct.hpp"

namespace iris3d::phantom {

// Synthetic iris: a surface of revolution about the optical axis whose
// anterior height above a flat base is
//   f(rho) = b (1 - ((rho - rho_m)/w)^2) + a exp(-(rho - rho_f)^2 / (2 sigma^2))
// with rho_m the mid-annulus radius and w the half width. Lengths are in the
// same units as the scan geometry (s_xy, s_z times pixels).
struct PhantomParams {
  double pupil_radius = 50.0;
  double root_radius = 210.0;
  double bow = 0.0;            // b; 0 is a flat iris
  double frill_amplitude = 0.0;
  double frill_center = 90.0;
  double frill_width = 12.0;   // sigma
  double azimuthal_noise = 0.0;  // amplitude of the low-order azimuthal wobble
  double bow_threshold = 10.0;   // closure label iff bow > threshold
  double base_depth = 100.0;     // depth of the flat base plane
  double thickness = 12.0;       // cross-section thickness below the surface
  std::uint64_t seed = 1;

  double mid_radius() const { return 0.5 * (pupil_radius + root_radius); }
  double half_width() const { return 0.5 * (root_radius - pupil_radius); }
  int label() const { return bow > bow_threshold ? 1 : 0; }
  void validate() const;
};

struct ProfileSample {
  double f, df, d2f;
  double kappa_m;  // meridional curvature f'' / (1 + f'^2)^(3/2)
  double kappa_c;  // circumferential curvature f' / (rho (1 + f'^2)^(1/2))
};

// Exact profile derivatives and principal curvatures at radius rho, with
// curvature positive where the surface bends anteriorly.
ProfileSample profile(const PhantomParams& p, double rho);

// Anterior height including the azimuthal wobble (zero when the noise
// amplitude is zero). The wobble vanishes at the pupil and root radii.
double height(const PhantomParams& p, double rho, double phi);

struct SliceOptions {
  bool images = false;       // also render noisy grey-level images
  double image_noise = 12.0;  // grey-level standard deviation
  double iris_level = 190.0;
  double background_level = 60.0;
};

struct PhantomVolume {
  std::vector<SegMask> masks;
  std::vector<GrayImage> images;   // empty unless requested
  SliceBoundarySet boundaries;     // exact (sub-pixel) upper boundary per column
  int label = 0;                   // 1 = closure-like (bowed)
};

// Rasterises every slice of the scan. A column at signed radius rho is iris
// where pupil_radius <= |rho| <= root_radius; its rows from the upper
// boundary down to boundary + thickness/s_z are set. Throws InvariantError
// naming the slice when the surface leaves the image.
PhantomVolume phantom_slices(const PhantomParams& p, const recon::ScanGeometry& geom, const SliceOptions& opt = {});

// Rendering of one slice at angle theta; slice_index is used in messages only.
SegMask render_slice(const PhantomParams& p, const recon::ScanGeometry& geom, double theta,
                     std::size_t slice_index, SliceBoundary* boundary = nullptr);

// Parameter draws for the classification experiment. Bowed volumes take
// b in [bow_closed_lo, bow_closed_hi], flat ones b in [0, bow_open_hi]; the
// ranges are disjoint and the label threshold sits between them.
struct CohortOptions {
  double bow_open_hi = 4.0;
  double bow_closed_lo = 18.0;
  double bow_closed_hi = 32.0;
  double frill_lo = 1.0, frill_hi = 4.0;
  double noise_hi = 2.0;
};
PhantomParams draw_params(int label, std::uint64_t seed, const PhantomParams& base = {},
                          const CohortOptions& cohort = {});

}  // namespace iris3d::phantom
