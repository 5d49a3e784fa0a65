#include "bundleray/cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>

#include <CLI11.hpp>

#include "bundleray/config.hpp"
#include "bundleray/harness.hpp"
#include "bundleray/parallel.hpp"
#include "bundleray/serialize.hpp"
#include "bundleray/volume_io.hpp"

namespace bundleray {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;

  void attach(CLI::App* sub) {
    sub->add_option("--config", path, "JSON config file; missing keys keep their defaults");
    sub->add_option("--set", overrides, "Override a config field, e.g. --set raycast.k=8 (repeatable)")
        ->expected(1)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  }

  PipelineConfig load() const {
    json user = json::object();
    if (!path.empty()) {
      try {
        user = read_json_file(path);
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    }
    for (const auto& o : overrides) apply_override(user, o);
    return config_from_json(user);
  }
};

void write_or_print(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << text;
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ray-cast boundary estimation of tubular fiber bundles in diffusion tensor volumes"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", build_identifier());
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all cores); results do not depend on it");

  ConfigArgs cfg;
  std::function<void()> action;

  std::string out_path;
  std::string in_tensors, in_dwi, in_fibers, in_polyline, in_centerline, in_grid, in_mesh, in_like;
  std::string mask_a, mask_b;
  bool timings = false;
  std::string keep_dir;

  auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    cfg.attach(sub);
    return sub;
  };

  // phantom
  auto* phantom = add("phantom", "Generate the torus phantom: tensors, ground-truth mask, analytic centerline");
  phantom->add_option("-o,--out", out_path, "Output directory")->required();
  phantom->callback([&] {
    action = [&] {
      const PipelineConfig c = cfg.load();
      const Phantom ph = generate_phantom(c.phantom);
      fs::create_directories(out_path);
      save_volume(ph.tensors, fs::path(out_path) / "phantom_tensors.vol");
      save_volume(ph.truth, fs::path(out_path) / "truth.mask");
      write_json_file(fs::path(out_path) / "analytic_centerline.json", to_json(ph.centerline));
    };
  });

  auto* simulate = add("simulate", "Forward-simulate DWI signals from a tensor volume");
  simulate->add_option("--tensors", in_tensors)->required();
  simulate->add_option("-o,--out", out_path)->required();
  simulate->callback([&] {
    action = [&] {
      const PipelineConfig c = cfg.load();
      save_volume(simulate_dwi(load_tensor_volume(in_tensors), c.phantom.acq), out_path);
    };
  });

  auto* noise = add("noise", "Apply complex Gaussian (Rician magnitude) noise at the configured snr");
  noise->add_option("--dwi", in_dwi)->required();
  noise->add_option("-o,--out", out_path)->required();
  noise->callback([&] {
    action = [&] {
      const PipelineConfig c = cfg.load();
      const DWIVolume dwi = load_dwi_volume(in_dwi);
      if (std::isfinite(c.phantom.snr)) save_volume(add_complex_gaussian_noise(dwi, c.phantom.snr, c.noise_seed()), out_path);
      else save_volume(dwi, out_path);
    };
  });

  auto* fit = add("fit", "Log-linear least-squares tensor fit of a DWI volume");
  fit->add_option("--dwi", in_dwi)->required();
  fit->add_option("-o,--out", out_path)->required();
  fit->callback([&] {
    action = [&] {
      cfg.load();
      const DwiFit r = fit_dwi(load_dwi_volume(in_dwi));
      save_volume(r.tensors, out_path);
      out << json{{"clamped_signals", r.clamped_signals}, {"invalid_voxels", r.invalid_voxels}}.dump() << '\n';
    };
  });

  auto* track = add("track", "Streamline tracking from every voxel of ROI a");
  track->add_option("--tensors", in_tensors)->required();
  track->add_option("-o,--out", out_path)->required();
  track->callback([&] {
    action = [&] {
      const PipelineConfig c = cfg.load();
      const TensorVolume v = load_tensor_volume(in_tensors);
      const auto seeds = seeds_in_roi(v, c.effective_roi_a(), c.tracking.fa_stop);
      write_json_file(out_path, to_json(track_seeds(v, seeds, c.tracking)));
    };
  });

  auto* centerline = add("centerline", "Centerline with n layers from tracked fibers or from a polyline");
  auto* from_fibers = centerline->add_option("--fibers", in_fibers, "Fibers JSON; filtered by ROIs a and b");
  auto* from_polyline = centerline->add_option("--polyline", in_polyline, "Polyline JSON to resample");
  from_fibers->excludes(from_polyline);
  centerline->add_option("-o,--out", out_path)->required();
  centerline->callback([&] {
    action = [&] {
      const PipelineConfig c = cfg.load();
      Centerline cl;
      if (!in_fibers.empty()) {
        const auto kept = filter_by_rois(fibers_from_json(read_json_file(in_fibers)), c.effective_roi_a(), c.effective_roi_b());
        cl = extract_centerline(kept, c.raycast.n);
      } else if (!in_polyline.empty()) {
        cl = resample_centerline(centerline_from_json(read_json_file(in_polyline)), c.raycast.n);
      } else {
        throw CLI::ValidationError("centerline", "one of --fibers or --polyline is required");
      }
      write_json_file(out_path, to_json(cl));
    };
  });

  auto* boundary = add("boundary", "Ray-cast boundary estimation plus outlier correction");
  boundary->add_option("--tensors", in_tensors)->required();
  boundary->add_option("--centerline", in_centerline, "Centerline JSON with exactly n points")->required();
  boundary->add_option("-o,--out", out_path)->required();
  bool no_correct = false;
  boundary->add_flag("--no-correct", no_correct, "Skip outlier correction");
  boundary->callback([&] {
    action = [&] {
      const PipelineConfig c = cfg.load();
      const BoundaryGrid g = estimate_boundary(load_tensor_volume(in_tensors), centerline_from_json(read_json_file(in_centerline)),
                                               c.raycast, c.criteria);
      write_json_file(out_path, to_json(no_correct ? g : correct_outliers(g, c.outlier).grid));
    };
  });

  auto* mesh = add("mesh", "Triangulate a boundary grid into a closed PLY surface");
  mesh->add_option("--grid", in_grid)->required();
  mesh->add_option("-o,--out", out_path)->required();
  mesh->callback([&] {
    action = [&] {
      cfg.load();
      export_ply(triangulate(boundary_grid_from_json(read_json_file(in_grid))), out_path);
    };
  });

  auto* voxelize_cmd = add("voxelize", "Voxelize a closed PLY surface onto the grid of a reference volume");
  voxelize_cmd->add_option("--mesh", in_mesh)->required();
  voxelize_cmd->add_option("--like", in_like, "Reference volume whose grid is used")->required();
  voxelize_cmd->add_option("-o,--out", out_path)->required();
  voxelize_cmd->callback([&] {
    action = [&] {
      cfg.load();
      save_volume(voxelize(import_ply(in_mesh), load_geometry(in_like)), out_path);
    };
  });

  auto* dice_cmd = add("dice", "Dice similarity coefficient of two masks");
  dice_cmd->add_option("a", mask_a)->required();
  dice_cmd->add_option("b", mask_b)->required();
  dice_cmd->callback([&] {
    action = [&] {
      cfg.load();
      out << std::setprecision(17) << dice(load_mask(mask_a), load_mask(mask_b)) << '\n';
    };
  });

  auto* pipeline = add("pipeline", "Run the full phantom pipeline and print a RunReport JSON");
  pipeline->add_flag("--timings", timings, "Include per-stage timings (not reproducible)");
  pipeline->add_option("--keep-intermediates", keep_dir, "Write every intermediate artifact to this directory");
  pipeline->callback([&] {
    action = [&] {
      PipelineConfig c = cfg.load();
      if (!keep_dir.empty()) {
        c.keep_intermediates = true;
        c.output_dir = keep_dir;
      }
      out << run_pipeline(c).to_json(timings).dump(2) << '\n';
    };
  });

  auto* sweep = add("sweep", "Cross-product parameter sweep over n, k, d and seeds; CSV output");
  sweep->add_option("-o,--out", out_path, "CSV path (default stdout)");
  sweep->callback([&] {
    action = [&] { write_or_print(out_path, sweep_csv(run_sweep(cfg.load())), out); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  set_thread_count(threads);
  try {
    if (action) action();
    return 0;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n\nvalid configuration keys (with defaults):\n"
        << to_json(PipelineConfig{}).dump(2) << '\n';
    return 1;
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("bundleray");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace bundleray
