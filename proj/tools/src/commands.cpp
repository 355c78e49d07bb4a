#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "iris3d/boundary.hpp"
#include "iris3d/checkpoint.hpp"
#include "iris3d/curvature.hpp"
#include "iris3d/delaunay.hpp"
#include "iris3d/error.hpp"
#include "iris3d/metrics.hpp"
#include "iris3d/phantom.hpp"
#include "iris3d/pipeline.hpp"
#include "iris3d/ply.hpp"
#include "iris3d/pointset_classifier.hpp"
#include "iris3d/reconstruct.hpp"
#include "iris3d/sectors.hpp"
#include "iris3d/wrb_segnet.hpp"
#include "run_support.hpp"

namespace fs = std::filesystem;

namespace iris3d::cli {

namespace {

void add_geometry(CLI::App* cmd, recon::ScanGeometry& g) {
  cmd->add_option("--slices", g.slices, "Radial slices per volume")->capture_default_str();
  cmd->add_option("--width", g.width, "Slice width in pixels")->capture_default_str();
  cmd->add_option("--height", g.height, "Slice height in pixels")->capture_default_str();
  cmd->add_option("--sxy", g.s_xy, "Lateral pixel size")->capture_default_str();
  cmd->add_option("--sz", g.s_z, "Axial pixel size")->capture_default_str();
}

void add_sampling(CLI::App* cmd, recon::SamplingParams& s, std::size_t& meridian_samples, std::size_t& k) {
  cmd->add_option("--r1", s.r1, "Disk radius in high-curvature regions (pixels)")->capture_default_str();
  cmd->add_option("--r2", s.r2, "Disk radius elsewhere (pixels)")->capture_default_str();
  cmd->add_option("--beta", s.beta, "Candidate oversampling factor")->capture_default_str();
  cmd->add_option("--meridian-samples", meridian_samples, "Coarse mesh samples per meridian")->capture_default_str();
  cmd->add_option("--k", k, "Neighbours per curvature fit")->capture_default_str();
}

void add_classifier(CLI::App* cmd, psn::PsnConfig& c) {
  cmd->add_option("--epochs", c.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--lr", c.lr, "SGD learning rate")->capture_default_str();
  cmd->add_option("--momentum", c.momentum, "SGD momentum")->capture_default_str();
  cmd->add_option("--batch", c.batch, "Mini-batch size")->capture_default_str();
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << j.dump(2) << '\n';
  if (!os) throw IoError("write failed: " + path.string());
}

std::string numbered(const std::string& stem, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%03zu.pgm", i);
  return stem + buf;
}

metrics::Report classification_report(const metrics::ClassificationMetrics& m) {
  metrics::Report r{{"acc", m.acc}, {"sen", m.sen}, {"spe", m.spe}};
  if (m.auc) r.emplace_back("auc", *m.auc);
  return r;
}

void print_report(const metrics::Report& r) { metrics::write_report(std::cout, r); }

std::vector<sectors::SectorSample> read_datasets(const std::vector<fs::path>& paths) {
  std::vector<sectors::SectorSample> out;
  for (const auto& p : paths) {
    require_exists(p);
    auto part = sectors::read_dataset(p);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

// ---------------------------------------------------------------------------

void register_phantom(CLI::App& app, GlobalOptions& global) {
  struct Opts {
    phantom::PhantomParams p;
    recon::ScanGeometry g;
    fs::path out;
    bool images = false;
    std::size_t table_points = 64;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("phantom", "Generate a synthetic iris volume");
  cmd->add_option("--out", o->out, "Output directory")->required();
  cmd->add_option("--pupil", o->p.pupil_radius, "Pupil radius")->capture_default_str();
  cmd->add_option("--root", o->p.root_radius, "Iris root radius")->capture_default_str();
  cmd->add_option("--bow", o->p.bow, "Anterior bowing amplitude")->capture_default_str();
  cmd->add_option("--frill", o->p.frill_amplitude, "Frill amplitude")->capture_default_str();
  cmd->add_option("--frill-center", o->p.frill_center, "Frill radius")->capture_default_str();
  cmd->add_option("--frill-width", o->p.frill_width, "Frill width (sigma)")->capture_default_str();
  cmd->add_option("--noise", o->p.azimuthal_noise, "Azimuthal wobble amplitude")->capture_default_str();
  cmd->add_option("--threshold", o->p.bow_threshold, "Bow above which the label is closure")->capture_default_str();
  cmd->add_option("--base-depth", o->p.base_depth, "Depth of the flat base")->capture_default_str();
  cmd->add_option("--thickness", o->p.thickness, "Iris thickness")->capture_default_str();
  cmd->add_flag("--images", o->images, "Also write noisy grey-level slices");
  cmd->add_option("--table-points", o->table_points, "Rows of the analytic curvature table")->capture_default_str();
  add_geometry(cmd, o->g);
  cmd->callback([o, &global] {
    o->p.seed = global.seed;
    phantom::SliceOptions so;
    so.images = o->images;
    const auto vol = phantom::phantom_slices(o->p, o->g, so);
    fs::create_directories(o->out / "masks");
    for (std::size_t i = 0; i < vol.masks.size(); ++i)
      write_pgm(o->out / "masks" / numbered("mask", i), image_from_mask(vol.masks[i]));
    if (o->images) {
      fs::create_directories(o->out / "images");
      for (std::size_t i = 0; i < vol.images.size(); ++i) write_pgm(o->out / "images" / numbered("image", i), vol.images[i]);
    }
    write_boundary_csv(o->out / "boundaries.csv", vol.boundaries);

    nlohmann::json meta;
    const auto& p = o->p;
    meta["params"] = {{"pupil_radius", p.pupil_radius}, {"root_radius", p.root_radius}, {"bow", p.bow},
                      {"frill_amplitude", p.frill_amplitude}, {"frill_center", p.frill_center},
                      {"frill_width", p.frill_width}, {"azimuthal_noise", p.azimuthal_noise},
                      {"bow_threshold", p.bow_threshold}, {"base_depth", p.base_depth},
                      {"thickness", p.thickness}, {"seed", p.seed}};
    meta["geometry"] = {{"slices", o->g.slices}, {"width", o->g.width}, {"height", o->g.height},
                        {"s_xy", o->g.s_xy}, {"s_z", o->g.s_z}};
    meta["label"] = vol.label == 1 ? "closure" : "open";
    auto& table = meta["curvature_table"] = nlohmann::json::array();
    const std::size_t n = std::max<std::size_t>(2, o->table_points);
    for (std::size_t i = 0; i < n; ++i) {
      const double rho = p.pupil_radius + (p.root_radius - p.pupil_radius) * static_cast<double>(i) / static_cast<double>(n - 1);
      const auto s = phantom::profile(p, rho);
      table.push_back({{"rho", rho}, {"f", s.f}, {"kappa_m", s.kappa_m}, {"kappa_c", s.kappa_c}});
    }
    write_json(o->out / "metadata.json", meta);
    write_manifest(o->out / "manifest.json",
                   {"phantom", global.seed, {}, {o->out / "masks", o->out / "boundaries.csv", o->out / "metadata.json"},
                    global.arguments});
    std::cout << "wrote " << vol.masks.size() << " slices to " << o->out.string() << " (label "
              << meta["label"].get<std::string>() << ")\n";
  });
}

// ---------------------------------------------------------------------------

std::vector<seg::SegExample> load_seg_dir(const fs::path& dir) {
  const auto images = list_files(dir / "images", "image_", ".pgm");
  const auto masks = list_files(dir / "masks", "mask_", ".pgm");
  if (images.empty() || images.size() != masks.size())
    throw IoError("segmentation data in " + dir.string() + " needs matching images/image_*.pgm and masks/mask_*.pgm");
  std::vector<seg::SegExample> out;
  for (std::size_t i = 0; i < images.size(); ++i)
    out.push_back({image_to_tensor(read_pgm(images[i])), mask_from_image(read_pgm(masks[i]))});
  return out;
}

seg::WrbNetConfig seg_config(std::size_t w, std::size_t h, bool plain) {
  seg::WrbNetConfig c;
  c.width = w;
  c.height = h;
  c.use_wrb = !plain;
  return c;
}

double mean_dice(seg::WrbNet& net, const std::vector<seg::SegExample>& data) {
  double sum = 0.0;
  for (const auto& ex : data) sum += metrics::region_metrics(net.predict(ex.image), ex.mask).dice;
  return data.empty() ? 0.0 : sum / static_cast<double>(data.size());
}

void register_segment(CLI::App& app, GlobalOptions& global) {
  auto* cmd = app.add_subcommand("segment", "Train or apply the segmentation network");
  cmd->require_subcommand(1);

  struct TrainOpts {
    fs::path data, valid_data, out, report;
    std::size_t count = 60, valid_count = 20, size = 64;
    bool plain = false;
    seg::SegTrainOptions t;
  };
  auto t = std::make_shared<TrainOpts>();
  auto* train = cmd->add_subcommand("train", "Train on image/mask pairs (toy phantom slices by default)");
  train->add_option("--data", t->data, "Directory with images/ and masks/");
  train->add_option("--valid-data", t->valid_data, "Held-out directory with images/ and masks/");
  train->add_option("--count", t->count, "Toy training slices when --data is absent")->capture_default_str();
  train->add_option("--valid-count", t->valid_count, "Toy held-out slices")->capture_default_str();
  train->add_option("--size", t->size, "Toy slice size")->capture_default_str();
  train->add_option("--epochs", t->t.epochs, "Epochs")->capture_default_str();
  train->add_option("--lr", t->t.lr, "Learning rate")->capture_default_str();
  train->add_option("--batch", t->t.batch, "Mini-batch size")->capture_default_str();
  train->add_option("--clip", t->t.clip_norm, "Gradient norm clip (0 disables)")->capture_default_str();
  train->add_flag("--plain", t->plain, "Plain skips instead of wavelet refinement blocks");
  train->add_option("--out", t->out, "Checkpoint path")->required();
  train->add_option("--report", t->report, "Metric report path");
  train->callback([t, &global] {
    t->t.seed = global.seed;
    std::vector<fs::path> inputs;
    std::vector<seg::SegExample> data, valid;
    if (!t->data.empty()) {
      data = load_seg_dir(t->data);
      inputs.push_back(t->data);
    } else {
      data = pipeline::toy_segmentation_set(t->count, pipeline::derive_seed(global.seed, 21), t->size);
    }
    if (!t->valid_data.empty()) {
      valid = load_seg_dir(t->valid_data);
      inputs.push_back(t->valid_data);
    } else if (t->data.empty()) {
      valid = pipeline::toy_segmentation_set(t->valid_count, pipeline::derive_seed(global.seed, 22), t->size);
    }
    const auto& shape = data.front().image.shape();
    seg::WrbNet net(seg_config(shape[2], shape[1], t->plain), pipeline::derive_seed(global.seed, 23));
    const auto rep = seg::segnet_train(net, data, t->t);
    const auto params = net.params();
    nn::save_checkpoint(t->out, std::vector<const nn::Param*>(params.begin(), params.end()));
    metrics::Report r{{"final_loss", rep.epoch_loss.back()}};
    if (!valid.empty()) r.emplace_back("valid_dice", mean_dice(net, valid));
    if (!t->report.empty()) metrics::write_report(t->report, r);
    write_manifest(manifest_path_for(t->out), {"segment train", global.seed, inputs, {t->out}, global.arguments});
    print_report(r);
  });

  struct PredictOpts {
    fs::path checkpoint, input, out;
    bool plain = false;
  };
  auto p = std::make_shared<PredictOpts>();
  auto* predict = cmd->add_subcommand("predict", "Segment a PGM image or a directory of image_*.pgm");
  predict->add_option("--checkpoint", p->checkpoint, "Trained checkpoint")->required();
  predict->add_option("--input", p->input, "Image or directory")->required();
  predict->add_option("--out", p->out, "Mask path or directory")->required();
  predict->add_flag("--plain", p->plain, "Checkpoint was trained with plain skips");
  predict->callback([p, &global] {
    require_exists(p->checkpoint);
    require_exists(p->input);
    const bool dir = fs::is_directory(p->input);
    const auto files = dir ? list_files(p->input, "image_", ".pgm") : std::vector<fs::path>{p->input};
    if (files.empty()) throw IoError("no image_*.pgm files in " + p->input.string());
    if (dir) fs::create_directories(p->out);
    const auto loaded = nn::load_checkpoint(p->checkpoint);
    for (std::size_t i = 0; i < files.size(); ++i) {
      const GrayImage img = read_pgm(files[i]);
      seg::WrbNet net(seg_config(img.width, img.height, p->plain));
      nn::assign_checkpoint(net.params(), loaded);
      const SegMask mask = net.predict(image_to_tensor(img));
      write_pgm(dir ? p->out / numbered("mask", i) : p->out, image_from_mask(mask));
    }
    write_manifest(manifest_path_for(p->out),
                   {"segment predict", global.seed, {p->checkpoint, p->input}, {p->out}, global.arguments});
  });
}

// ---------------------------------------------------------------------------

void register_boundaries(CLI::App& app, GlobalOptions& global) {
  struct Opts {
    fs::path masks, out;
    double center = -1.0;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("boundaries", "Extract upper iris boundaries from mask slices");
  cmd->add_option("--masks", o->masks, "Directory of mask_*.pgm (slice order = file order)")->required();
  cmd->add_option("--center", o->center, "Centre column (default width/2)");
  cmd->add_option("--out", o->out, "Boundary CSV")->required();
  cmd->callback([o, &global] {
    const auto files = list_files(o->masks, "mask_", ".pgm");
    if (files.empty()) throw IoError("no mask_*.pgm files in " + o->masks.string());
    SliceBoundarySet set;
    for (std::size_t i = 0; i < files.size(); ++i) {
      const SegMask m = mask_from_image(read_pgm(files[i]));
      const auto ub = extract_upper_boundary(m, o->center >= 0.0 ? std::optional<double>(o->center) : std::nullopt);
      set.slices.push_back({i, ub.left, ub.right});
    }
    write_boundary_csv(o->out, set);
    write_manifest(manifest_path_for(o->out), {"boundaries", global.seed, {o->masks}, {o->out}, global.arguments});
  });
}

void register_reconstruct(CLI::App& app, GlobalOptions& global) {
  struct Opts {
    pipeline::PipelineConfig cfg;
    fs::path boundaries, out, coarse, samples;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("reconstruct", "Build the refined surface mesh from slice boundaries");
  cmd->add_option("--boundaries", o->boundaries, "Boundary CSV")->required();
  cmd->add_option("--out", o->out, "Refined mesh (PLY)")->required();
  cmd->add_option("--coarse", o->coarse, "Also write the coarse mesh (PLY)");
  add_geometry(cmd, o->cfg.geometry);
  add_sampling(cmd, o->cfg.sampling, o->cfg.meridian_samples, o->cfg.curvature_k);
  cmd->callback([o, &global] {
    require_exists(o->boundaries);
    const auto set = read_boundary_csv(o->boundaries);
    const auto s = pipeline::reconstruct_surface(set, o->cfg, global.seed);
    write_ply(o->out, s.refined);
    std::vector<fs::path> outputs{o->out};
    if (!o->coarse.empty()) {
      write_ply(o->coarse, s.coarse.mesh);
      outputs.push_back(o->coarse);
    }
    for (const auto& w : s.coarse.warnings) std::cerr << "warning: " << w << '\n';
    Manifest m{"reconstruct", global.seed, {o->boundaries}, outputs, global.arguments};
    m.extra = {{"coarse_vertices", s.coarse.mesh.vertices.size()}, {"candidates", s.samples.candidates},
               {"samples", s.samples.cloud.size()}, {"faces", s.refined.faces.size()}};
    write_manifest(manifest_path_for(o->out), m);
    std::cout << s.samples.cloud.size() << " samples, " << s.refined.faces.size() << " faces\n";
  });
}

void register_quantify(CLI::App& app, GlobalOptions& global) {
  struct Opts {
    fs::path mesh, out, ply;
    std::size_t k = 16;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("quantify", "Per-vertex curvature and shape index");
  cmd->add_option("--mesh", o->mesh, "Mesh (PLY)")->required();
  cmd->add_option("--out", o->out, "Curvature CSV")->required();
  cmd->add_option("--ply", o->ply, "Also write the mesh with curvature properties");
  cmd->add_option("--k", o->k, "Neighbours per fit")->capture_default_str();
  cmd->callback([o, &global] {
    require_exists(o->mesh);
    const auto ply = read_ply(o->mesh);
    pipeline::PipelineConfig cfg;
    cfg.curvature_k = o->k;
    const auto field = curv::curvature_field(ply.mesh, pipeline::curvature_options(cfg));
    curv::write_curvature_csv(o->out, ply.mesh, field);
    std::vector<fs::path> outputs{o->out};
    if (!o->ply.empty()) {
      write_ply(o->ply, ply.mesh,
                {{"k1", field.k1}, {"k2", field.k2}, {"K", field.gaussian}, {"H", field.mean}, {"E", field.shape_index}});
      outputs.push_back(o->ply);
    }
    for (const auto& f : field.failures) std::cerr << "warning: " << f.what() << '\n';
    write_manifest(manifest_path_for(o->out), {"quantify", global.seed, {o->mesh}, outputs, global.arguments});
  });
}

void register_sectors(CLI::App& app, GlobalOptions& global) {
  struct Opts {
    fs::path mesh, curvature, out;
    int label = -1;
    sectors::SectorOptions so;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("sectors", "Split the annotated surface into 24 classifier samples");
  cmd->add_option("--mesh", o->mesh, "Mesh (PLY)")->required();
  cmd->add_option("--curvature", o->curvature, "Curvature CSV from quantify")->required();
  cmd->add_option("--out", o->out, "Dataset (JSON lines)")->required();
  cmd->add_option("--label", o->label, "Volume label: 0 open, 1 closure, -1 unknown")->check(CLI::Range(-1, 1));
  cmd->add_option("--n", o->so.n, "Points per sample")->capture_default_str();
  cmd->add_option("--volume-id", o->so.volume_id, "Provenance tag");
  cmd->add_flag("--random", o->so.random_subsample, "Random instead of farthest-point subsampling");
  cmd->add_flag("--permissive", o->so.permissive, "Skip and report empty sectors");
  cmd->callback([o, &global] {
    require_exists(o->mesh);
    require_exists(o->curvature);
    o->so.seed = global.seed;
    const auto ply = read_ply(o->mesh);
    const auto field = curv::read_curvature_csv(o->curvature);
    const auto build = sectors::build_sector_samples(ply.mesh, field, std::span<const int>(&o->label, 1), o->so);
    for (const auto& e : build.errors) std::cerr << "warning: " << e.what() << '\n';
    sectors::write_dataset(o->out, build.samples);
    write_manifest(manifest_path_for(o->out),
                   {"sectors", global.seed, {o->mesh, o->curvature}, {o->out}, global.arguments});
  });
}

void register_train(CLI::App& app, GlobalOptions& global) {
  struct Opts {
    std::vector<fs::path> data;
    fs::path valid, out, report;
    psn::PsnConfig cfg;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("train", "Train the point-set classifier");
  cmd->add_option("--data", o->data, "Training datasets (JSON lines)")->required();
  cmd->add_option("--valid", o->valid, "Validation dataset");
  cmd->add_option("--out", o->out, "Checkpoint path")->required();
  cmd->add_option("--report", o->report, "Metric report path");
  add_classifier(cmd, o->cfg);
  cmd->callback([o, &global] {
    o->cfg.seed = global.seed;
    const auto train = read_datasets(o->data);
    const auto valid = o->valid.empty() ? std::vector<sectors::SectorSample>{} : read_datasets({o->valid});
    psn::PointSetNet net(o->cfg);
    const auto rep = psn::psn_train(net, train, valid);
    const auto params = net.params();
    nn::save_checkpoint(o->out, std::vector<const nn::Param*>(params.begin(), params.end()));
    metrics::Report r{{"final_loss", rep.epoch_loss.back()}};
    if (!valid.empty())
      for (const auto& kv : classification_report(rep.valid)) r.push_back(kv);
    if (!o->report.empty()) metrics::write_report(o->report, r);
    std::vector<fs::path> inputs = o->data;
    if (!o->valid.empty()) inputs.push_back(o->valid);
    write_manifest(manifest_path_for(o->out), {"train", global.seed, inputs, {o->out}, global.arguments});
    print_report(r);
  });
}

void write_scores(const fs::path& path, const std::vector<sectors::SectorSample>& data,
                  const std::vector<double>& scores) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "volume,sector_id,label,score\n";
  char buf[32];
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6f", scores[i]);
    os << data[i].volume_id << ',' << data[i].sector_id << ',' << data[i].label << ',' << buf << '\n';
  }
  if (!os) throw IoError("write failed: " + path.string());
}

void register_classify(CLI::App& app, GlobalOptions& global) {
  struct Opts {
    fs::path checkpoint, data, out, report;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("classify", "Score sector samples with a trained classifier");
  cmd->add_option("--checkpoint", o->checkpoint, "Checkpoint from train")->required();
  cmd->add_option("--data", o->data, "Dataset (JSON lines)")->required();
  cmd->add_option("--out", o->out, "Scores CSV")->required();
  cmd->add_option("--report", o->report, "Metric report (needs labels)");
  cmd->callback([o, &global] {
    require_exists(o->checkpoint);
    const auto data = read_datasets({o->data});
    psn::PointSetNet net;
    nn::assign_checkpoint(net.params(), nn::load_checkpoint(o->checkpoint));
    const auto scores = psn::psn_scores(net, data);
    write_scores(o->out, data, scores);
    std::vector<fs::path> outputs{o->out};
    if (!o->report.empty()) {
      const auto r = classification_report(metrics::classification_metrics(scores, psn::sample_labels(data)));
      metrics::write_report(o->report, r);
      outputs.push_back(o->report);
      print_report(r);
    }
    write_manifest(manifest_path_for(o->out), {"classify", global.seed, {o->checkpoint, o->data}, outputs,
                                               global.arguments});
  });
}

void register_metrics(CLI::App& app, GlobalOptions& global) {
  struct Opts {
    fs::path pred, gt, pred_boundary, gt_boundary, scores, out;
    double height = 0.0, center = -1.0;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("metrics", "Region, edge or classification metrics");
  auto* pred = cmd->add_option("--pred", o->pred, "Predicted mask (PGM)");
  auto* gt = cmd->add_option("--gt", o->gt, "Reference mask (PGM)");
  pred->needs(gt);
  gt->needs(pred);
  auto* pb = cmd->add_option("--pred-boundary", o->pred_boundary, "Predicted boundary CSV");
  auto* gb = cmd->add_option("--gt-boundary", o->gt_boundary, "Reference boundary CSV");
  pb->needs(gb);
  gb->needs(pb);
  cmd->add_option("--image-height", o->height, "Image height for RNMSE (required with boundaries)");
  cmd->add_option("--center", o->center, "Centre column for TIC (required with boundaries)");
  cmd->add_option("--scores", o->scores, "Scores CSV from classify");
  cmd->add_option("--out", o->out, "Also write the report here");
  cmd->callback([o, &global] {
    metrics::Report r;
    std::vector<fs::path> inputs;
    if (!o->pred.empty()) {
      require_exists(o->pred);
      require_exists(o->gt);
      const auto m = metrics::region_metrics(mask_from_image(read_pgm(o->pred)), mask_from_image(read_pgm(o->gt)));
      r.insert(r.end(), {{"sen", m.sen}, {"dice", m.dice}, {"acc", m.acc}});
      inputs.insert(inputs.end(), {o->pred, o->gt});
    }
    if (!o->pred_boundary.empty()) {
      require_exists(o->pred_boundary);
      require_exists(o->gt_boundary);
      if (!(o->height > 0.0) || o->center < 0.0)
        throw CLI::ValidationError("--image-height and --center are required with boundary inputs");
      const auto ps = read_boundary_csv(o->pred_boundary), gs = read_boundary_csv(o->gt_boundary);
      std::map<std::size_t, const SliceBoundary*> by_slice;
      for (const auto& s : gs.slices) by_slice[s.slice_index] = &s;
      double rn = 0.0, hd = 0.0, tic = 0.0;
      std::size_t halves = 0;
      for (const auto& s : ps.slices) {
        const auto it = by_slice.find(s.slice_index);
        if (it == by_slice.end()) continue;
        for (auto [p, g] : {std::pair{&s.left, &it->second->left}, std::pair{&s.right, &it->second->right}}) {
          if (p->empty() || g->empty()) continue;
          rn += metrics::rnmse(*p, *g, o->height);
          hd += metrics::hausdorff(*p, *g);
          tic += metrics::tic_error(*p, metrics::tic_point(*g, o->center), o->center);
          ++halves;
        }
      }
      if (halves == 0) throw InvariantError("metrics: boundary files share no slice halves");
      const double n = static_cast<double>(halves);
      r.insert(r.end(), {{"rnmse", rn / n}, {"hausdorff", hd / n}, {"tic_error", tic / n}});
      inputs.insert(inputs.end(), {o->pred_boundary, o->gt_boundary});
    }
    if (!o->scores.empty()) {
      require_exists(o->scores);
      std::ifstream is(o->scores);
      std::string line;
      std::getline(is, line);
      std::vector<double> scores;
      std::vector<int> labels;
      while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string volume, sector, label, score;
        if (!std::getline(ls, volume, ',') || !std::getline(ls, sector, ',') || !std::getline(ls, label, ',') ||
            !std::getline(ls, score, ','))
          throw IoError("scores csv: malformed row");
        labels.push_back(std::stoi(label));
        scores.push_back(std::stod(score));
      }
      const auto m = metrics::classification_metrics(scores, labels);
      for (const auto& kv : classification_report(m)) r.push_back(kv);
      if (!m.auc) std::cerr << "warning: AUC undefined, only one class present\n";
      inputs.push_back(o->scores);
    }
    if (r.empty()) throw CLI::ValidationError("metrics: give --pred/--gt, --pred-boundary/--gt-boundary or --scores");
    print_report(r);
    if (!o->out.empty()) {
      metrics::write_report(o->out, r);
      write_manifest(manifest_path_for(o->out), {"metrics", global.seed, inputs, {o->out}, global.arguments});
    }
  });
}

void register_pipeline(CLI::App& app, GlobalOptions& global) {
  struct Opts {
    pipeline::PipelineConfig cfg;
    fs::path out;
    bool exact_boundaries = false;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("pipeline", "Phantom cohort to sector classification, end to end");
  cmd->add_option("--out", o->out, "Output directory")->required();
  cmd->add_option("--volumes", o->cfg.volumes, "Phantom volumes (alternating labels)")->capture_default_str();
  cmd->add_option("--train-fraction", o->cfg.train_fraction, "Share of volumes used for training")
      ->capture_default_str();
  cmd->add_option("--sector-points", o->cfg.sector_points, "Points per sector sample")->capture_default_str();
  cmd->add_flag("--exact-boundaries", o->exact_boundaries, "Use analytic boundaries instead of mask extraction");
  add_geometry(cmd, o->cfg.geometry);
  add_sampling(cmd, o->cfg.sampling, o->cfg.meridian_samples, o->cfg.curvature_k);
  add_classifier(cmd, o->cfg.classifier);
  cmd->callback([o, &global] {
    auto& cfg = o->cfg;
    cfg.seed = global.seed;
    cfg.jobs = global.jobs;
    cfg.boundaries_from_masks = !o->exact_boundaries;
    const auto result = pipeline::run_experiment(cfg);
    fs::create_directories(o->out);
    sectors::write_dataset(o->out / "train.jsonl", result.train);
    sectors::write_dataset(o->out / "valid.jsonl", result.valid);
    const auto r = classification_report(result.report.valid);
    metrics::write_report(o->out / "report.json", r);
    std::ofstream loss(o->out / "train_loss.csv");
    loss << "epoch,loss\n";
    for (std::size_t e = 0; e < result.report.epoch_loss.size(); ++e)
      loss << e + 1 << ',' << result.report.epoch_loss[e] << '\n';
    Manifest m{"pipeline", global.seed, {},
               {o->out / "train.jsonl", o->out / "valid.jsonl", o->out / "report.json", o->out / "train_loss.csv"},
               global.arguments};
    m.extra = {{"volumes", cfg.volumes}, {"train_samples", result.train.size()}, {"valid_samples", result.valid.size()}};
    write_manifest(o->out / "manifest.json", m);
    print_report(r);
  });
}

}  // namespace

void register_commands(CLI::App& app, GlobalOptions& global) {
  register_phantom(app, global);
  register_segment(app, global);
  register_boundaries(app, global);
  register_reconstruct(app, global);
  register_quantify(app, global);
  register_sectors(app, global);
  register_train(app, global);
  register_classify(app, global);
  register_metrics(app, global);
  register_pipeline(app, global);
}

}  // namespace iris3d::cli
