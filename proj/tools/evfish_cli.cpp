// evfish: batch command-line front end over the evfish modules.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "evfish/pipeline.hpp"
#include "evfish/pnm.hpp"

namespace fs = std::filesystem;
using namespace evfish;

namespace {

struct ConfigArgs {
  std::string config_path;
  std::vector<std::string> overrides;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
    cmd->add_option("--set", overrides, "override a config key (key=value), repeatable");
  }

  PipelineConfig load() const {
    PipelineConfig cfg;
    if (!config_path.empty()) apply_config_text(cfg, read_file_text(config_path), config_path);
    for (const auto& kv : overrides) apply_config_assignment(cfg, kv);
    cfg.validate();
    return cfg;
  }
};

EventStream load_stream(const std::string& path, const PipelineConfig& cfg) {
  return load_events(path, cfg.sensor);
}

std::optional<EventStream> load_dark(const std::string& flag, const PipelineConfig& cfg) {
  const std::string& path = flag.empty() ? cfg.dark_events : flag;
  if (path.empty()) return std::nullopt;
  return load_stream(path, cfg);
}

void emit(const std::string& out, const std::string& contents) {
  if (out.empty() || out == "-") {
    std::cout << contents;
  } else {
    write_file(out, contents);
  }
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) { write_file(p.string(), bytes); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-camera fish counting pipeline"};
  app.require_subcommand(1);

  // simulate
  ConfigArgs sim_cfg;
  std::string sim_out, sim_gt, sim_dark;
  auto* sim = app.add_subcommand("simulate", "generate a synthetic scene (events + ground truth)");
  sim_cfg.attach(sim);
  sim->add_option("--out", sim_out, "event stream output (.evs1 or .csv)")->required();
  sim->add_option("--gt", sim_gt, "ground-truth CSV output");
  sim->add_option("--dark", sim_dark, "also write a dark capture (hot pixels only)");

  // preprocess
  ConfigArgs pre_cfg;
  std::string pre_events, pre_out, pre_dark;
  auto* pre = app.add_subcommand("preprocess", "hot-pixel suppression and undistortion");
  pre_cfg.attach(pre);
  pre->add_option("--events", pre_events, "input event stream")->required()->check(CLI::ExistingFile);
  pre->add_option("--dark", pre_dark, "dark capture (overrides preprocess.dark_events)");
  pre->add_option("--out", pre_out, "output event stream")->required();

  // frames
  ConfigArgs frm_cfg;
  std::string frm_events, frm_out;
  auto* frm = app.add_subcommand("frames", "render per-window mode frames and mixed frames");
  frm_cfg.attach(frm);
  frm->add_option("--events", frm_events, "input event stream")->required()->check(CLI::ExistingFile);
  frm->add_option("--out", frm_out, "output directory")->required();

  // detect
  ConfigArgs det_cfg;
  std::string det_events, det_out;
  auto* det = app.add_subcommand("detect", "blob detection on binary frames");
  det_cfg.attach(det);
  det->add_option("--events", det_events, "input event stream")->required()->check(CLI::ExistingFile);
  det->add_option("--out", det_out, "detection CSV output (default stdout)");

  // track
  ConfigArgs trk_cfg;
  std::string trk_dets, trk_out;
  long long trk_frames = 0;
  auto* trk = app.add_subcommand("track", "Kalman + Hungarian tracking over detections");
  trk_cfg.attach(trk);
  trk->add_option("--detections", trk_dets, "detection CSV")->required()->check(CLI::ExistingFile);
  trk->add_option("--frames", trk_frames, "number of frames (default: last detection frame + 1)");
  trk->add_option("--out", trk_out, "track CSV output (default stdout)");

  // count
  ConfigArgs cnt_cfg;
  std::string cnt_tracks, cnt_out;
  long long cnt_frames = 0;
  auto* cnt = app.add_subcommand("count", "windowed counts from confirmed tracks");
  cnt_cfg.attach(cnt);
  cnt->add_option("--tracks", cnt_tracks, "track CSV")->required()->check(CLI::ExistingFile);
  cnt->add_option("--frames", cnt_frames, "number of frames (default: last track frame + 1)");
  cnt->add_option("--out", cnt_out, "count report CSV output (default stdout)");

  // eval
  ConfigArgs ev_cfg;
  std::vector<std::string> ev_gt, ev_hyp;
  std::string ev_out;
  auto* ev = app.add_subcommand("eval", "CLEAR-MOT evaluation of tracks or detections");
  ev_cfg.attach(ev);
  ev->add_option("--gt", ev_gt, "ground-truth CSV, repeatable")->required()->check(CLI::ExistingFile);
  ev->add_option("--hyp", ev_hyp, "hypothesis CSV, one per --gt")->required()->check(CLI::ExistingFile);
  ev->add_option("--out", ev_out, "report output (default stdout)");

  // pipeline
  ConfigArgs pl_cfg;
  std::string pl_events, pl_dark, pl_gt, pl_out;
  auto* pl = app.add_subcommand("pipeline", "simulate-or-ingest through evaluation, one summary report");
  pl_cfg.attach(pl);
  pl->add_option("--events", pl_events, "input event stream (simulated from config when absent)")
      ->check(CLI::ExistingFile);
  pl->add_option("--dark", pl_dark, "dark capture (overrides preprocess.dark_events)");
  pl->add_option("--gt", pl_gt, "ground-truth CSV")->check(CLI::ExistingFile);
  pl->add_option("--out", pl_out, "summary output (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      const auto cfg = sim_cfg.load();
      const auto scene = cfg.scene_spec();
      const auto result = simulate(scene);
      std::optional<SimResult> dark;
      if (!sim_dark.empty()) dark = simulate(dark_capture_spec(scene, cfg.dark_duration_s));
      save_events(sim_out, result.events);
      if (!sim_gt.empty()) write_file(sim_gt, write_detections(result.ground_truth));
      if (dark) save_events(sim_dark, dark->events);
      std::cerr << "simulate: " << result.events.events.size() << " events, " << result.frames << " frames\n";
    } else if (*pre) {
      const auto cfg = pre_cfg.load();
      const auto stream = load_stream(pre_events, cfg);
      const auto dark = load_dark(pre_dark, cfg);
      EventStream out{stream.header, preprocess_events(cfg, stream, dark)};
      save_events(pre_out, out);
      std::cerr << "preprocess: " << stream.events.size() << " -> " << out.events.size() << " events\n";
    } else if (*frm) {
      const auto cfg = frm_cfg.load();
      const auto stream = load_stream(frm_events, cfg);
      const fs::path root(frm_out);
      for (Mode m : kAllModes) fs::create_directories(root / std::string(mode_name(m)));
      fs::create_directories(root / "mixed");
      WindowSequence seq(stream.events, stream.header, cfg.fps);
      std::size_t n = 0;
      while (auto stack = seq.next()) {
        for (Mode m : kAllModes) {
          write_bytes(root / std::string(mode_name(m)) / frame_filename(stack->window_index, "pgm"),
                      encode_pgm(stack->frame(m)));
        }
        write_bytes(root / "mixed" / frame_filename(stack->window_index, "ppm"), encode_ppm(stack->mixed));
        ++n;
      }
      std::cerr << "frames: " << n << " windows\n";
    } else if (*det) {
      const auto cfg = det_cfg.load();
      const auto stream = load_stream(det_events, cfg);
      const auto wd = detect_windows(cfg, stream.events, stream.header);
      emit(det_out, write_detections(wd.detections));
    } else if (*trk) {
      const auto cfg = trk_cfg.load();
      const auto dets = read_detections(read_file_text(trk_dets), trk_dets);
      std::int64_t last = trk_frames > 0 ? trk_frames - 1 : (dets.empty() ? -1 : dets.rbegin()->first);
      const auto snapshots = track_all(dets, 0, last, cfg.tracker);
      emit(trk_out, write_tracks(confirmed_rows(snapshots)));
    } else if (*cnt) {
      const auto cfg = cnt_cfg.load();
      const auto rows = read_tracks(read_file_text(cnt_tracks), cnt_tracks);
      std::size_t n_frames = static_cast<std::size_t>(cnt_frames);
      if (n_frames == 0) {
        for (const auto& r : rows) n_frames = std::max(n_frames, static_cast<std::size_t>(r.frame + 1));
      }
      const auto counts = per_frame_counts(rows, n_frames);
      emit(cnt_out, write_count_report(count_windows(counts, cfg.fps, cfg.count_window_s)));
    } else if (*ev) {
      const auto cfg = ev_cfg.load();
      if (ev_gt.size() != ev_hyp.size()) throw ConfigError("eval needs one --hyp per --gt");
      std::vector<MotaReport> rows;
      std::string report;
      for (std::size_t i = 0; i < ev_gt.size(); ++i) {
        const auto gt = read_objects(read_file_text(ev_gt[i]), ev_gt[i]);
        const auto hyp = read_objects(read_file_text(ev_hyp[i]), ev_hyp[i]);
        rows.push_back(evaluate_mota(gt, hyp, cfg.iou_threshold));
        report += format_mota_report(rows.back(), ev_hyp[i]);
      }
      if (rows.size() > 1) {
        const auto agg = aggregate_mota(rows);
        report += format_mota_report(agg.summed, "summed");
        report += "mean_of_rows MOTA: " + text::format_fixed(agg.mean_of_rows * 100.0, 1) + "%\n";
      }
      emit(ev_out, report);
    } else if (*pl) {
      const auto cfg = pl_cfg.load();
      PipelineInputs in;
      if (!pl_events.empty()) in.events = load_stream(pl_events, cfg);
      in.dark = load_dark(pl_dark, cfg);
      if (!pl_gt.empty()) in.ground_truth = read_objects(read_file_text(pl_gt), pl_gt);
      emit(pl_out, format_summary(run_pipeline(cfg, std::move(in))));
    }
  } catch (const Error& e) {
    std::cerr << "evfish: error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "evfish: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
