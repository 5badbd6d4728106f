#include "nodemetry/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <thread>

#include "nodemetry/connected_components.hpp"
#include "nodemetry/ensemble.hpp"
#include "nodemetry/label_fusion.hpp"
#include "nodemetry/metrics.hpp"
#include "nodemetry/morphometry.hpp"
#include "nodemetry/parallel.hpp"
#include "nodemetry/phantom.hpp"
#include "nodemetry/report.hpp"

namespace nodemetry::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string volume_stem(const std::string& filename) {
  for (const std::string suffix : {".nii.gz", ".nii"}) {
    if (filename.size() > suffix.size() && filename.ends_with(suffix)) {
      return filename.substr(0, filename.size() - suffix.size());
    }
  }
  return filename;
}

namespace {

// Writes the mask for `n` values into `out`, which may alias the input.
template <typename ValueAt>
void write_mask(std::size_t n, ValueAt value_at, MaskMode mode, int ln_class, std::uint8_t* out) {
  if (mode == MaskMode::kAuto) {
    // Branch-free blocks so the scan vectorizes.
    mode = MaskMode::kBinary;
    constexpr std::size_t kBlock = 1 << 16;
    for (std::size_t at = 0; at < n && mode == MaskMode::kBinary; at += kBlock) {
      bool other = false;
      for (std::size_t v = at; v < std::min(n, at + kBlock); ++v) {
        const auto x = value_at(v);
        other |= (x != 0) & (x != 1);
      }
      if (other) mode = MaskMode::kClass;
    }
  }
  if (mode == MaskMode::kBinary) {
    for (std::size_t v = 0; v < n; ++v) out[v] = value_at(v) != 0;
  } else {
    for (std::size_t v = 0; v < n; ++v) out[v] = value_at(v) == ln_class;
  }
}

}  // namespace

MaskVolume mask_from_image(nifti::Image image, MaskMode mode, int ln_class) {
  const auto& h = image.header;
  const bool scaled = h.scl_slope != 0.0f && std::isfinite(h.scl_slope) &&
                      !(h.scl_slope == 1.0f && h.scl_inter == 0.0f);
  if (auto* bytes = std::get_if<std::vector<std::uint8_t>>(&image.voxels); bytes != nullptr && !scaled) {
    std::uint8_t* data = bytes->data();
    write_mask(bytes->size(), [data](std::size_t v) { return data[v]; }, mode, ln_class, data);
    return MaskVolume(h.grid(), std::move(*bytes));
  }
  MaskVolume mask(h.grid());
  std::visit(
      [&](const auto& values) {
        const auto* in = values.data();
        if (scaled) {
          write_mask(values.size(), [&](std::size_t v) { return double(in[v]) * h.scl_slope + h.scl_inter; },
                     mode, ln_class, mask.data().data());
        } else {
          write_mask(values.size(), [in](std::size_t v) { return in[v]; }, mode, ln_class, mask.data().data());
        }
      },
      image.voxels);
  return mask;
}

namespace {

MaskMode parse_mask_mode(const std::string& text) {
  if (text == "auto") return MaskMode::kAuto;
  if (text == "binary") return MaskMode::kBinary;
  if (text == "class") return MaskMode::kClass;
  throw ValidationError("mask mode must be auto, binary or class");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

/// Re-raises a module error with the file it came from.
template <typename Fn>
auto with_path(const fs::path& path, Fn&& fn) {
  try {
    return fn();
  } catch (const IoError&) {
    throw;  // nifti errors already name the file
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::vector<fs::path> volume_files(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && volume_stem(name) != name) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

void write_component_ids(const ComponentSet& set, const fs::path& path) {
  const bool gz = nifti::wants_gzip(path);
  auto convert = [&](auto tag) {
    using T = decltype(tag);
    Volume<T> ids(set.grid(), T{0});
    auto out = ids.data();
    for (const Run& r : set.runs()) std::fill_n(out.begin() + r.start, r.length, static_cast<T>(r.id));
    nifti::write_volume(ids, path, gz);
  };
  if (set.count() <= 255) {
    convert(std::uint8_t{});
  } else if (set.count() <= 32767) {
    convert(std::int16_t{});
  } else {
    convert(std::int32_t{});
  }
}

struct CommonOptions {
  int connectivity = 26;
  int threads = 1;
  int ln_class = kLymphNodeClass;
  std::string mask_mode = "auto";
};

void add_mask_options(CLI::App& sub, CommonOptions& common) {
  sub.add_option("--ln-class", common.ln_class, "Lymph-node class id in multi-class label volumes")
      ->capture_default_str();
  sub.add_option("--mask-mode", common.mask_mode, "How a volume becomes a mask: auto, binary or class")
      ->capture_default_str()
      ->check(CLI::IsMember({"auto", "binary", "class"}));
}

MaskVolume load_mask(const fs::path& path, const CommonOptions& common) {
  auto image = nifti::read_image(path);
  return with_path(path, [&] {
    return mask_from_image(std::move(image), parse_mask_mode(common.mask_mode), common.ln_class);
  });
}

// ---- fuse ----------------------------------------------------------------

struct FuseArgs {
  std::string anatomy_dir, ln, spec, out;
  int threads = 1;
};

int run_fuse(const FuseArgs& a, std::ostream& out) {
  const FusionSpec spec = a.spec.empty() ? default_fusion_spec()
                                         : with_path(a.spec, [&] { return parse_fusion_spec(read_text(a.spec)); });
  const MaskVolume ln = binarize(nifti::read_volume<std::uint8_t>(a.ln));
  std::vector<StructureMask> anatomy;
  for (const auto& file : volume_files(a.anatomy_dir)) {
    const std::string name = volume_stem(file.filename().string());
    with_path(file, [&] {
      spec.target(name);
      return 0;
    });
    MaskVolume mask = with_path(file, [&] { return binarize(nifti::read_volume<std::uint8_t>(file)); });
    with_path(file, [&] {
      assert_same_grid(ln.grid(), mask.grid());
      return 0;
    });
    anatomy.push_back({name, std::move(mask)});
  }
  const LabelVolume fused = fuse(anatomy, ln, spec, resolve_threads(a.threads));
  nifti::write_image(nifti::to_image(fused, "nodemetry fuse"), a.out, nifti::wants_gzip(a.out));
  out << "fused " << anatomy.size() << " structures + lymph nodes into " << spec.class_count
      << " classes: " << a.out << '\n';
  return kOk;
}

// ---- cc --------------------------------------------------------------------

struct CcArgs {
  std::string mask, out, summary;
  std::int64_t min_voxels = 1;
};

int run_cc(const CcArgs& a, const CommonOptions& common, std::ostream& out) {
  const MaskVolume mask = load_mask(a.mask, common);
  ComponentSet set = label_components(mask, connectivity_from_int(common.connectivity));
  if (a.min_voxels != 1) set = filter_components(set, a.min_voxels);
  if (!a.out.empty()) write_component_ids(set, a.out);

  ordered_json summary;
  summary["schema"] = kReportSchema;
  ordered_json config;
  config["subcommand"] = "cc";
  config["mask"] = a.mask;
  config["connectivity"] = common.connectivity;
  config["min_voxels"] = a.min_voxels;
  config["ln_class"] = common.ln_class;
  config["mask_mode"] = common.mask_mode;
  summary["config"] = std::move(config);
  summary["count"] = set.count();
  ordered_json components = ordered_json::array();
  for (std::int64_t id = 1; id <= set.count(); ++id) {
    components.push_back({{"component_index", id}, {"voxel_count", set.size(id)}});
  }
  summary["components"] = std::move(components);
  const std::string text = summary.dump(2) + "\n";
  if (a.summary.empty()) {
    out << text;
  } else {
    write_text(a.summary, text);
  }
  return kOk;
}

// ---- measure ---------------------------------------------------------------

struct MeasureArgs {
  std::string mask, out;
  std::int64_t min_voxels = 1;
};

int run_measure(const MeasureArgs& a, const CommonOptions& common, std::ostream& out) {
  MaskVolume mask = load_mask(a.mask, common);
  if (!canonical_orientation(mask.grid()).is_identity()) mask = canonicalize(mask);
  ComponentSet set = label_components(mask, connectivity_from_int(common.connectivity));
  if (a.min_voxels != 1) set = filter_components(set, a.min_voxels);
  const std::string csv = measurements_csv(measure_components(set));
  if (a.out.empty()) {
    out << csv;
  } else {
    write_text(a.out, csv);
  }
  return kOk;
}

// ---- ensemble --------------------------------------------------------------

struct EnsembleArgs {
  std::string mode = "prob";
  std::vector<std::string> inputs;
  std::string input_dir, out, out_probs;
};

int run_ensemble(const EnsembleArgs& a, std::ostream& out) {
  if (a.mode == "vote") {
    if (a.inputs.empty()) throw ValidationError("ensemble --mode vote needs --inputs label files");
    std::vector<FoldSet<float>::Member> members;
    for (const auto& file : a.inputs) members.emplace_back(nifti::read_volume<std::uint8_t>(file));
    const LabelVolume voted = majority_vote(FoldSet<float>(std::move(members)));
    nifti::write_image(nifti::to_image(voted, "nodemetry ensemble vote"), a.out, nifti::wants_gzip(a.out));
    out << "majority vote over " << a.inputs.size() << " folds: " << a.out << '\n';
    return kOk;
  }

  if (a.input_dir.empty()) throw ValidationError("ensemble --mode prob needs --input-dir");
  // fold{K}_class{C}.nii[.gz]
  const std::regex pattern(R"(fold(\d+)_class(\d+))");
  std::map<int, std::map<int, fs::path>> files;
  for (const auto& file : volume_files(a.input_dir)) {
    std::smatch match;
    const std::string stem = volume_stem(file.filename().string());
    if (std::regex_match(stem, match, pattern)) files[std::stoi(match[1])][std::stoi(match[2])] = file;
  }
  if (files.empty()) throw ValidationError("no fold{K}_class{C} volumes in " + a.input_dir);
  const auto& classes = files.begin()->second;
  std::vector<FoldSet<float>::Member> members;
  for (const auto& [fold, by_class] : files) {
    if (by_class.size() != classes.size() || by_class.begin()->first != 0 ||
        by_class.rbegin()->first != int(by_class.size()) - 1) {
      throw ValidationError("fold " + std::to_string(fold) + " must provide classes 0.." +
                            std::to_string(classes.size() - 1));
    }
    std::vector<ScalarVolume> channels;
    for (const auto& [c, file] : by_class) channels.push_back(nifti::read_volume<float>(file));
    auto probs = ProbabilityVolume<float>::from_channels(channels);
    with_path(by_class.begin()->second, [&] {
      probs.validate();
      return 0;
    });
    members.emplace_back(std::move(probs));
  }
  const auto averaged = average_probabilities(FoldSet<float>(std::move(members)));
  const LabelVolume labels = argmax_labels(averaged);
  nifti::write_image(nifti::to_image(labels, "nodemetry ensemble argmax"), a.out, nifti::wants_gzip(a.out));
  if (!a.out_probs.empty()) {
    for (int c = 0; c < averaged.classes(); ++c) {
      const fs::path path = a.out_probs + "class" + std::to_string(c) + ".nii.gz";
      nifti::write_volume(averaged.channel_volume(c), path, true);
    }
  }
  out << "averaged " << files.size() << " folds x " << averaged.classes() << " classes: " << a.out << '\n';
  return kOk;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string gt, pred, gt_dir, pred_dir, manifest, out_json, out_csv;
  double threshold = kDefaultThresholdMm;
  double match_min_overlap = 0.0;
};

struct CasePaths {
  std::string id;
  fs::path gt, pred;
};

std::vector<CasePaths> pair_cases(const EvalArgs& a) {
  std::vector<CasePaths> cases;
  if (!a.manifest.empty()) {
    std::istringstream in(read_text(a.manifest));
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
      ++line_number;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      std::vector<std::string> fields;
      std::stringstream row(line);
      std::string field;
      while (std::getline(row, field, ',')) fields.push_back(field);
      if (fields.size() != 3) {
        throw ValidationError(a.manifest + " line " + std::to_string(line_number) +
                              ": expected patient_id,gt_path,pred_path");
      }
      if (fields[0] == "patient_id") continue;
      const fs::path base = fs::path(a.manifest).parent_path();
      auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
      cases.push_back({fields[0], resolve(fields[1]), resolve(fields[2])});
    }
    return cases;
  }
  if (!a.gt.empty() || !a.pred.empty()) {
    if (a.gt.empty() || a.pred.empty()) throw ValidationError("eval needs both --gt and --pred");
    return {{volume_stem(fs::path(a.gt).filename().string()), a.gt, a.pred}};
  }
  if (a.gt_dir.empty() || a.pred_dir.empty()) {
    throw ValidationError("eval needs --gt/--pred, --gt-dir/--pred-dir or --manifest");
  }
  std::map<std::string, fs::path> preds;
  for (const auto& file : volume_files(a.pred_dir)) preds[volume_stem(file.filename().string())] = file;
  std::vector<std::string> missing;
  for (const auto& file : volume_files(a.gt_dir)) {
    const std::string stem = volume_stem(file.filename().string());
    const auto it = preds.find(stem);
    if (it == preds.end()) {
      missing.push_back(stem);
      continue;
    }
    cases.push_back({stem, file, it->second});
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw ValidationError("no prediction in " + a.pred_dir + " for: " + list);
  }
  if (cases.empty()) throw ValidationError("no ground-truth volumes in " + a.gt_dir);
  return cases;
}

int run_eval(const EvalArgs& a, const CommonOptions& common, std::ostream& out, std::ostream& err) {
  EvaluationOptions options;
  options.threshold_mm = a.threshold;
  options.connectivity = connectivity_from_int(common.connectivity);
  options.match_min_overlap = a.match_min_overlap;
  if (!(options.threshold_mm > 0.0)) throw ValidationError("--threshold must be positive");
  if (!(a.match_min_overlap >= 0.0 && a.match_min_overlap <= 1.0)) {
    throw ValidationError("--match-min-overlap must lie in [0, 1]");
  }
  const int threads = resolve_threads(common.threads);

  const auto cases = pair_cases(a);
  std::vector<PatientReport> reports(cases.size());
  parallel_for(std::ssize(cases), threads, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t c = begin; c < end; ++c) {
      const auto& paths = cases[static_cast<std::size_t>(c)];
      const MaskVolume gt = load_mask(paths.gt, common);
      const MaskVolume pred = load_mask(paths.pred, common);
      reports[static_cast<std::size_t>(c)] = with_path(paths.pred, [&] {
        return evaluate_patient(gt, pred, options, paths.id);
      });
    }
  });
  const CohortReport cohort = aggregate(std::move(reports));

  ordered_json config;
  config["subcommand"] = "eval";
  ordered_json inputs = ordered_json::array();
  for (const auto& c : cases) {
    inputs.push_back({{"patient_id", c.id}, {"gt", c.gt.string()}, {"pred", c.pred.string()}});
  }
  config["inputs"] = std::move(inputs);
  config["threshold_mm"] = a.threshold;
  config["connectivity"] = common.connectivity;
  config["match_min_overlap"] = a.match_min_overlap;
  config["ln_class"] = common.ln_class;
  config["mask_mode"] = common.mask_mode;
  config["threads"] = threads;
  const std::string json = report_json(cohort, config).dump(2) + "\n";

  if (!a.out_csv.empty()) write_text(a.out_csv, report_csv(cohort));
  if (a.out_json.empty()) {
    out << json;
    err << report_summary(cohort);
  } else {
    write_text(a.out_json, json);
    out << report_summary(cohort);
  }
  return kOk;
}

// ---- phantom ---------------------------------------------------------------

struct PhantomArgs {
  std::string spec, out, expect;
  bool instances = false;
};

int run_phantom(const PhantomArgs& a, std::ostream& out) {
  const PhantomSpec spec = with_path(a.spec, [&] { return parse_phantom_spec(read_text(a.spec)); });
  const Phantom phantom = with_path(a.spec, [&] { return generate(spec); });
  const bool gz = nifti::wants_gzip(a.out);
  if (a.instances) {
    nifti::write_image(nifti::to_image(phantom.instances, "nodemetry phantom instances"), a.out, gz);
  } else {
    nifti::write_image(nifti::to_image(phantom.mask(), "nodemetry phantom"), a.out, gz);
  }
  if (!a.expect.empty()) write_text(a.expect, expectations_csv(spec, phantom));
  out << "phantom with " << spec.nodes.size() << " nodes: " << a.out << '\n';
  return kOk;
}

// ---- loss ------------------------------------------------------------------

struct LossArgs {
  std::string gt;
  std::vector<std::string> probs;
};

int run_loss(const LossArgs& a, std::ostream& out) {
  const LabelVolume gt = nifti::read_volume<std::uint8_t>(a.gt);
  std::vector<ScalarVolume> channels;
  for (const auto& file : a.probs) channels.push_back(nifti::read_volume<float>(file));
  const auto probs = ProbabilityVolume<float>::from_channels(channels);
  const LossTerms terms = with_path(a.gt, [&] { return composite_loss_terms(probs, gt); });
  out << std::fixed << std::setprecision(6) << "loss " << terms.total << "\nbce " << terms.bce
      << "\nsoft_dice " << terms.soft_dice << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"nodemetry: lymph-node segmentation evaluation toolkit", "nodemetry"};
  app.require_subcommand(1);

  CommonOptions common;
  FuseArgs fuse_args;
  CcArgs cc_args;
  MeasureArgs measure_args;
  EnsembleArgs ensemble_args;
  EvalArgs eval_args;
  PhantomArgs phantom_args;
  LossArgs loss_args;

  auto* fuse_cmd = app.add_subcommand("fuse", "Merge anatomy masks and the LN mask into one label volume");
  fuse_cmd->add_option("--anatomy-dir", fuse_args.anatomy_dir, "Directory of <structure>.nii[.gz] masks")->required();
  fuse_cmd->add_option("--ln", fuse_args.ln, "Lymph-node mask")->required();
  fuse_cmd->add_option("--spec", fuse_args.spec, "Fusion map (default: built-in 29-class map)");
  fuse_cmd->add_option("--out", fuse_args.out, "Output label volume")->required();
  fuse_cmd->add_option("--threads", fuse_args.threads, "Worker threads")->capture_default_str();

  auto* cc_cmd = app.add_subcommand("cc", "Label connected components of a mask");
  cc_cmd->add_option("--mask", cc_args.mask, "Input mask")->required();
  cc_cmd->add_option("--out", cc_args.out, "Component index volume");
  cc_cmd->add_option("--summary", cc_args.summary, "Summary JSON (default: stdout)");
  cc_cmd->add_option("--min-voxels", cc_args.min_voxels, "Drop smaller components")->capture_default_str();
  cc_cmd->add_option("--connectivity", common.connectivity, "6, 18 or 26")->capture_default_str();
  add_mask_options(*cc_cmd, common);

  auto* measure_cmd = app.add_subcommand("measure", "Per-node short-axis measurements as CSV");
  measure_cmd->add_option("--mask", measure_args.mask, "Input mask")->required();
  measure_cmd->add_option("--out", measure_args.out, "CSV path (default: stdout)");
  measure_cmd->add_option("--min-voxels", measure_args.min_voxels, "Drop smaller components")->capture_default_str();
  measure_cmd->add_option("--connectivity", common.connectivity, "6, 18 or 26")->capture_default_str();
  add_mask_options(*measure_cmd, common);

  auto* ensemble_cmd = app.add_subcommand("ensemble", "Merge per-fold predictions");
  ensemble_cmd->add_option("--mode", ensemble_args.mode, "prob (average + argmax) or vote")
      ->capture_default_str()
      ->check(CLI::IsMember({"prob", "vote"}));
  ensemble_cmd->add_option("--inputs", ensemble_args.inputs, "Label volumes, one per fold (vote)");
  ensemble_cmd->add_option("--input-dir", ensemble_args.input_dir, "Directory of fold{K}_class{C} volumes (prob)");
  ensemble_cmd->add_option("--out", ensemble_args.out, "Output label volume")->required();
  ensemble_cmd->add_option("--out-probs", ensemble_args.out_probs, "Prefix for averaged class{C}.nii.gz maps");

  auto* eval_cmd = app.add_subcommand("eval", "Size-stratified Dice evaluation");
  eval_cmd->add_option("--gt", eval_args.gt, "Ground-truth volume");
  eval_cmd->add_option("--pred", eval_args.pred, "Predicted volume");
  eval_cmd->add_option("--gt-dir", eval_args.gt_dir, "Ground-truth directory (paired by file stem)");
  eval_cmd->add_option("--pred-dir", eval_args.pred_dir, "Prediction directory");
  eval_cmd->add_option("--manifest", eval_args.manifest, "CSV of patient_id,gt_path,pred_path");
  eval_cmd->add_option("--threshold", eval_args.threshold, "SAD threshold in mm (>= is large)")->capture_default_str();
  eval_cmd->add_option("--match-min-overlap", eval_args.match_min_overlap,
                       "Minimum fraction of a predicted component overlapping a node to match it")
      ->capture_default_str();
  eval_cmd->add_option("--connectivity", common.connectivity, "6, 18 or 26")->capture_default_str();
  eval_cmd->add_option("--threads", common.threads, "Patients evaluated concurrently")->capture_default_str();
  eval_cmd->add_option("--out-json", eval_args.out_json, "JSON report (default: stdout)");
  eval_cmd->add_option("--out-csv", eval_args.out_csv, "Per-patient per-stratum CSV");
  add_mask_options(*eval_cmd, common);

  auto* phantom_cmd = app.add_subcommand("phantom", "Generate a synthetic ellipsoid-node volume");
  phantom_cmd->add_option("--spec", phantom_args.spec, "Phantom spec file")->required();
  phantom_cmd->add_option("--out", phantom_args.out, "Output mask volume")->required();
  phantom_cmd->add_option("--expect", phantom_args.expect, "Expectations CSV");
  phantom_cmd->add_flag("--instances", phantom_args.instances, "Write node indices instead of a binary mask");

  auto* loss_cmd = app.add_subcommand("loss", "Composite BCE + soft Dice loss of class probabilities");
  loss_cmd->add_option("--gt", loss_args.gt, "Ground-truth label volume")->required();
  loss_cmd->add_option("--probs", loss_args.probs, "One probability volume per class, in class order")
      ->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kValidationFailure;
  }

  try {
    if (*fuse_cmd) return run_fuse(fuse_args, out);
    if (*cc_cmd) return run_cc(cc_args, common, out);
    if (*measure_cmd) return run_measure(measure_args, common, out);
    if (*ensemble_cmd) return run_ensemble(ensemble_args, out);
    if (*eval_cmd) return run_eval(eval_args, common, out, err);
    if (*phantom_cmd) return run_phantom(phantom_args, out);
    if (*loss_cmd) return run_loss(loss_args, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIoFailure;
  }
  return kValidationFailure;
}

}  // namespace nodemetry::cli
