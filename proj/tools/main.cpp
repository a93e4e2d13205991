#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cascade/pipeline.hpp"

namespace {

using cascade::CaseError;
using cascade::PipelineConfig;
using cascade::RunOptions;

struct CommonArgs {
  std::string manifest;
  std::string config;
  std::string out;
  int jobs = 1;
  int margin = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_margin) {
  cmd->add_option("--manifest", args.manifest, "case manifest (JSON array)")->required();
  cmd->add_option("--config", args.config, "pipeline config file (key = value lines)");
  cmd->add_option("--out", args.out, "output directory")->required();
  cmd->add_option("--jobs", args.jobs, "worker threads")->envname("CASCADE_ROI_JOBS");
  if (with_margin)
    cmd->add_option("--margin", args.margin, "ROI margin in voxels (overrides config)");
}

PipelineConfig load_cfg(const CommonArgs& args) {
  if (args.config.empty()) return PipelineConfig{};
  return cascade::load_config(args.config);
}

RunOptions options(const CommonArgs& args) {
  RunOptions opts;
  opts.out_dir = args.out;
  opts.jobs = args.jobs;
  opts.margin = args.margin;
  return opts;
}

int report(const std::vector<CaseError>& errors) {
  for (const auto& e : errors)
    std::fprintf(stderr, "error: case %s: %s\n", e.case_id.c_str(), e.message.c_str());
  return errors.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inter-model stages of a coarse-to-fine tumor segmentation cascade"};
  app.require_subcommand(1);

  CommonArgs pp_args, roi_args, pb_args, met_args, unc_args, sweep_args, ph_args;
  std::string sweep_key;
  std::vector<std::string> sweep_values;

  auto* pp = app.add_subcommand("postprocess",
                                "threshold, merge, label and filter a coarse prediction");
  add_common(pp, pp_args, false);

  auto* roi = app.add_subcommand("extract-roi", "crop volumes around the kept components");
  add_common(roi, roi_args, true);

  auto* pb = app.add_subcommand("pasteback",
                                "assemble ROI predictions into a full-volume mask");
  add_common(pb, pb_args, true);

  auto* met = app.add_subcommand("metrics", "score predictions against ground truth");
  add_common(met, met_args, false);

  auto* unc = app.add_subcommand("uncertainty", "write variance and alpha maps from MC samples");
  add_common(unc, unc_args, false);

  auto* sweep = app.add_subcommand("sweep", "rerun postprocess+metrics across config values");
  add_common(sweep, sweep_args, false);
  sweep->add_option("--key", sweep_key, "config key to vary")->required();
  sweep->add_option("--values", sweep_values, "comma-separated values")
      ->required()
      ->delimiter(',');

  auto* ph = app.add_subcommand("phantom", "generate synthetic validation cases");
  ph->add_option("--manifest", ph_args.manifest, "phantom spec (JSON object or array)")
      ->required();
  ph->add_option("--out", ph_args.out, "output directory")->required();
  ph->add_option("--jobs", ph_args.jobs, "worker threads")->envname("CASCADE_ROI_JOBS");

  CLI11_PARSE(app, argc, argv);

  try {
    if (pp->parsed())
      return report(cascade::cmd_postprocess(cascade::load_manifest(pp_args.manifest),
                                             load_cfg(pp_args), options(pp_args)));
    if (roi->parsed())
      return report(cascade::cmd_extract_roi(cascade::load_manifest(roi_args.manifest),
                                             load_cfg(roi_args), options(roi_args)));
    if (pb->parsed())
      return report(cascade::cmd_pasteback(cascade::load_manifest(pb_args.manifest),
                                           load_cfg(pb_args), options(pb_args)));
    if (met->parsed())
      return report(cascade::cmd_metrics(cascade::load_manifest(met_args.manifest),
                                         load_cfg(met_args), options(met_args))
                        .errors);
    if (unc->parsed())
      return report(cascade::cmd_uncertainty(cascade::load_manifest(unc_args.manifest),
                                             load_cfg(unc_args), options(unc_args)));
    if (sweep->parsed())
      return report(cascade::cmd_sweep(cascade::load_manifest(sweep_args.manifest),
                                       load_cfg(sweep_args), options(sweep_args), sweep_key,
                                       sweep_values));
    if (ph->parsed())
      return report(cascade::cmd_phantom(ph_args.manifest, options(ph_args)));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fatal: %s\n", e.what());
    return 2;
  }
  return 0;
}
