use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use fba_core::augment::{
    make_sample, tta_forward, tta_inverse, tta_merge, SampleInputs, SampleSpec, TTATransform,
    TTA_SCALES,
};
use fba_core::fgbg_solver::{solve_fb, system_residual, FBSolveParams};
use fba_core::fusion::{composite_residual, fuse, FusionParams};
use fba_core::io::{self, png};
use fba_core::losses::{total_loss_with, GradientOperator, LossConfig, Reduction};
use fba_core::metrics::{
    connectivity_error, fg_composite_metrics, gradient_error, mse, sad, ConnectivityParams,
    GradientParams, TableConvention,
};
use fba_core::trimap::{
    check_trimap, encode_trimap, generate_trimap_with, trimap_from_file, trimap_to_file,
    BorderPolicy, RNG_ALGORITHM,
};
use fba_core::{composite, EvalMask, PredictionSet, Trimap};
use serde_json::{json, Value};

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::files::{self, display, guard, guard_all};
use crate::report;

pub fn run(command: Command, force: bool) -> CliResult<()> {
    match command {
        Command::Composite(a) => run_composite(a, force),
        Command::ExtendFg(a) => run_extend_fg(a, force),
        Command::MakeTrimap(a) => run_make_trimap(a, force),
        Command::EncodeTrimap(a) => run_encode_trimap(a, force),
        Command::Fuse(a) => run_fuse(a, force),
        Command::Loss(a) => run_loss(a),
        Command::Evaluate(a) => run_evaluate(a),
        Command::EvaluateFg(a) => run_evaluate_fg(a),
        Command::MakeSample(a) => run_make_sample(a, force),
        Command::TtaForward(a) => run_tta_forward(a, force),
        Command::TtaMerge(a) => run_tta_merge(a, force),
    }
}

fn print_json(value: &Value) -> CliResult<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run_composite(a: CompositeArgs, force: bool) -> CliResult<()> {
    guard(&a.output, force)?;
    let alpha = files::read_pixel(&a.alpha)?;
    let fg = files::read_color(&a.fg)?;
    let bg = files::read_color(&a.bg)?;
    let out = composite(&alpha, &fg, &bg)?;
    match (files::extension(&a.output).as_str(), a.depth) {
        ("png", Depth::Sixteen) => png::write_color(&out, &a.output, png::BitDepth::Sixteen)?,
        _ => io::write_color_map(&out, &a.output)?,
    }
    Ok(())
}

fn run_extend_fg(a: ExtendFgArgs, force: bool) -> CliResult<()> {
    guard_all([a.fg_out.as_path(), a.bg_out.as_path()], force)?;
    let image = files::read_color(&a.image)?;
    let alpha = files::read_pixel(&a.alpha)?;
    let params = FBSolveParams {
        smoothness_weight: a.smoothness,
        edge_floor: a.edge_floor,
        cg_tolerance: a.tol,
        cg_max_iters: a.max_iters,
        multires: a.multires,
        parallel: true,
    };
    let sol = solve_fb(&image, &alpha, &params)?;
    io::write_color_map(&sol.fg, &a.fg_out)?;
    io::write_color_map(&sol.bg, &a.bg_out)?;
    if a.json {
        let residual = system_residual(&image, &alpha, &sol.fg, &sol.bg, &params)?;
        let (w, h) = alpha.dims();
        let mut r = report::envelope("extend-fg");
        r.insert("image".into(), json!(display(&a.image)));
        r.insert("alpha".into(), json!(display(&a.alpha)));
        r.insert(
            "params".into(),
            json!({
                "smoothness_weight": params.smoothness_weight,
                "edge_floor": params.edge_floor,
                "cg_tolerance": params.cg_tolerance,
                "cg_max_iters": params.max_iters(w, h),
                "multires": params.multires,
            }),
        );
        r.insert("channels".into(), serde_json::to_value(sol.stats)?);
        r.insert("system_residual_clamped".into(), json!(residual));
        print_json(&Value::Object(r))?;
    }
    Ok(())
}

fn run_make_trimap(a: MakeTrimapArgs, force: bool) -> CliResult<()> {
    guard(&a.output, force)?;
    let alpha = files::read_pixel(&a.alpha)?;
    let border = match a.border {
        BorderArg::Outside => BorderPolicy::Outside,
        BorderArg::Inside => BorderPolicy::Inside,
    };
    let (trimap, (rf, rb)) = generate_trimap_with(&alpha, a.min_px, a.max_px, a.seed, border)?;
    trimap_to_file(&trimap, &a.output)?;
    if a.json {
        let mut r = report::envelope("make-trimap");
        r.insert("alpha".into(), json!(display(&a.alpha)));
        r.insert(
            "params".into(),
            json!({
                "min_px": a.min_px,
                "max_px": a.max_px,
                "seed": a.seed,
                "border": border,
                "rng": RNG_ALGORITHM,
            }),
        );
        r.insert("radii".into(), json!({ "fg": rf, "bg": rb }));
        r.insert("counts".into(), report::label_counts(&trimap));
        print_json(&Value::Object(r))?;
    }
    Ok(())
}

fn run_encode_trimap(a: EncodeTrimapArgs, force: bool) -> CliResult<()> {
    guard(&a.output, force)?;
    let sigmas: [f64; 3] = a
        .sigmas
        .as_slice()
        .try_into()
        .map_err(|_| CliError::usage("--sigmas takes exactly three values"))?;
    let trimap = trimap_from_file(&a.trimap)?;
    let enc = encode_trimap(&trimap, sigmas)?;
    let planes: Vec<_> = enc.channels.iter().collect();
    files::write_planes(&planes, &a.output)
}

fn run_fuse(a: FuseArgs, force: bool) -> CliResult<()> {
    let outputs = [
        a.output.join(format!("alpha.{}", files::extension(&a.alpha))),
        a.output.join(format!("fg.{}", files::extension(&a.fg))),
        a.output.join(format!("bg.{}", files::extension(&a.bg))),
    ];
    guard_all(outputs.iter().map(PathBuf::as_path), force)?;
    let params = FusionParams {
        sigma_alpha_sq: a.sigma_alpha_sq,
        sigma_fb_sq: a.sigma_fb_sq,
        sigma_c_sq: a.sigma_c_sq,
        iterations: a.iters,
        clamp: !a.no_clamp,
    };
    params.validate()?;
    let image = files::read_color(&a.image)?;
    let pred = PredictionSet::new(
        files::read_pixel(&a.alpha)?,
        files::read_color(&a.fg)?,
        files::read_color(&a.bg)?,
    )?;
    let fused = fuse(&pred, &image, &params)?;
    files::ensure_dir(&a.output)?;
    io::write_pixel_map(&fused.alpha, &outputs[0])?;
    io::write_color_map(&fused.fg, &outputs[1])?;
    io::write_color_map(&fused.bg, &outputs[2])?;
    if a.json {
        let mut r = report::envelope("fuse");
        r.insert("image".into(), json!(display(&a.image)));
        r.insert("params".into(), serde_json::to_value(params)?);
        r.insert("residual_before".into(), json!(composite_residual(&pred, &image)?));
        r.insert("residual_after".into(), json!(composite_residual(&fused, &image)?));
        r.insert(
            "outputs".into(),
            json!(outputs.iter().map(|p| display(p)).collect::<Vec<_>>()),
        );
        print_json(&Value::Object(r))?;
    }
    Ok(())
}

fn region_mask(region: MaskArg, trimap: Option<&Trimap>, dims: (usize, usize)) -> CliResult<EvalMask> {
    match region {
        MaskArg::Full => Ok(EvalMask::full(dims.0, dims.1)),
        MaskArg::Unknown => {
            let t = trimap.ok_or_else(|| CliError::usage("an `unknown` mask requires --trimap"))?;
            check_trimap(t, dims)?;
            Ok(EvalMask::unknown(t))
        }
    }
}

fn mask_name(m: MaskArg) -> &'static str {
    match m {
        MaskArg::Full => "full",
        MaskArg::Unknown => "unknown",
    }
}

fn run_loss(a: LossArgs) -> CliResult<()> {
    let pred = files::read_prediction(&a.pred_dir)?;
    let gt = files::read_prediction(&a.gt_dir)?;
    let image = files::read_color(&a.image)?;
    let trimap = a.trimap.as_deref().map(trimap_from_file).transpose()?;
    let dims = gt.dims();
    let mask_fb_arg = a.mask_fb.unwrap_or(a.mask);
    let mask_alpha = region_mask(a.mask, trimap.as_ref(), dims)?;
    let mask_fb = region_mask(mask_fb_arg, trimap.as_ref(), dims)?;
    let config = LossConfig {
        gradient: match a.gradient {
            GradientArg::Forward => GradientOperator::Forward,
            GradientArg::Sobel => GradientOperator::Sobel,
        },
        reduction: match a.reduction {
            ReductionArg::Sum => Reduction::Sum,
            ReductionArg::Mean => Reduction::Mean,
        },
    };
    let losses = total_loss_with(&pred, &gt, &image, &mask_alpha, &mask_fb, config)?;
    if a.json {
        let mut r = report::envelope("loss");
        r.insert("pred_dir".into(), json!(display(&a.pred_dir)));
        r.insert("gt_dir".into(), json!(display(&a.gt_dir)));
        r.insert("image".into(), json!(display(&a.image)));
        r.insert(
            "params".into(),
            json!({
                "mask_alpha": mask_name(a.mask),
                "mask_fb": mask_name(mask_fb_arg),
                "gradient": config.gradient,
                "reduction": config.reduction,
                "fb_weight": fba_core::losses::FB_WEIGHT,
                "laplacian_levels": fba_core::losses::LAPLACIAN_LEVELS,
            }),
        );
        r.insert(
            "mask_pixels".into(),
            json!({ "alpha": mask_alpha.count(), "fb": mask_fb.count() }),
        );
        r.insert("losses".into(), serde_json::to_value(losses)?);
        print_json(&Value::Object(r))
    } else {
        let v = serde_json::to_value(losses)?;
        for (k, x) in v.as_object().into_iter().flatten() {
            println!("{k} {x}");
        }
        Ok(())
    }
}

struct AlphaScores {
    sad: Option<f64>,
    mse: Option<f64>,
    grad: Option<f64>,
    conn: Option<f64>,
}

fn alpha_scores(
    pred: &fba_core::PixelMap,
    gt: &fba_core::PixelMap,
    region: &EvalMask,
    metrics: &[MetricArg],
    p: &MetricParamArgs,
) -> CliResult<AlphaScores> {
    let wanted: BTreeSet<u8> = metrics.iter().map(|m| *m as u8).collect();
    let has = |m: MetricArg| wanted.contains(&(m as u8));
    let gp = GradientParams {
        sigma: p.sigma,
        q: p.q,
    };
    let cp = ConnectivityParams {
        step: p.step,
        theta: p.theta,
    };
    cp.validate()?;
    Ok(AlphaScores {
        sad: has(MetricArg::Sad).then(|| sad(pred, gt, region)).transpose()?,
        mse: has(MetricArg::Mse).then(|| mse(pred, gt, region)).transpose()?,
        grad: has(MetricArg::Grad)
            .then(|| gradient_error(pred, gt, region, gp))
            .transpose()?,
        conn: has(MetricArg::Conn)
            .then(|| connectivity_error(pred, gt, region, cp))
            .transpose()?,
    })
}

fn metric_names(metrics: &[MetricArg]) -> Vec<&'static str> {
    let mut out: Vec<&'static str> = metrics
        .iter()
        .map(|m| match m {
            MetricArg::Sad => "sad",
            MetricArg::Mse => "mse",
            MetricArg::Grad => "grad",
            MetricArg::Conn => "conn",
        })
        .collect();
    out.dedup();
    out
}

#[allow(clippy::too_many_arguments)]
fn metric_report(
    command: &str,
    image: &Path,
    gt: &Path,
    trimap: &Path,
    region: MaskArg,
    region_pixels: usize,
    scores: &AlphaScores,
    fg: Option<(f64, f64)>,
    metrics: &[MetricArg],
    p: &MetricParamArgs,
) -> Value {
    let mut r = report::envelope(command);
    r.insert("image".into(), json!(display(image)));
    r.insert("gt".into(), json!(display(gt)));
    r.insert("trimap".into(), json!(display(trimap)));
    r.insert("region".into(), json!(mask_name(region)));
    r.insert("region_pixels".into(), json!(region_pixels));
    r.insert("sad".into(), report::metric(scores.sad, TableConvention::sad));
    r.insert("mse".into(), report::metric(scores.mse, TableConvention::mse));
    r.insert("grad".into(), report::metric(scores.grad, TableConvention::grad));
    r.insert("conn".into(), report::metric(scores.conn, TableConvention::conn));
    r.insert("sad_fg".into(), report::metric(fg.map(|f| f.0), TableConvention::sad));
    r.insert("mse_fg".into(), report::metric(fg.map(|f| f.1), TableConvention::mse));
    r.insert(
        "params".into(),
        json!({
            "sigma": p.sigma,
            "q": p.q,
            "step": p.step,
            "theta": p.theta,
            "metrics": metric_names(metrics),
        }),
    );
    r.insert("conventions".into(), report::conventions());
    Value::Object(r)
}

fn print_metrics(report: &Value) {
    for key in ["sad", "mse", "grad", "conn", "sad_fg", "mse_fg"] {
        if let Some(m) = report.get(key).filter(|m| !m.is_null()) {
            println!("{key} {} table {}", m["raw"], m["table"]);
        }
    }
}

fn run_evaluate(a: EvaluateArgs) -> CliResult<()> {
    let pred = files::read_pixel(&a.pred)?;
    let gt = files::read_pixel(&a.gt)?;
    let trimap = trimap_from_file(&a.trimap)?;
    check_trimap(&trimap, gt.dims())?;
    let region = region_mask(a.region, Some(&trimap), gt.dims())?;
    let scores = alpha_scores(&pred, &gt, &region, &a.metrics, &a.params)?;
    let r = metric_report(
        "evaluate",
        &a.pred,
        &a.gt,
        &a.trimap,
        a.region,
        region.count(),
        &scores,
        None,
        &a.metrics,
        &a.params,
    );
    if a.json {
        print_json(&r)
    } else {
        print_metrics(&r);
        Ok(())
    }
}

fn run_evaluate_fg(a: EvaluateFgArgs) -> CliResult<()> {
    let pred = files::read_prediction(&a.pred_dir)?;
    let gt = files::read_prediction(&a.gt_dir)?;
    let trimap = trimap_from_file(&a.trimap)?;
    check_trimap(&trimap, gt.dims())?;
    let region = region_mask(a.region, Some(&trimap), gt.dims())?;
    let scores = alpha_scores(&pred.alpha, &gt.alpha, &region, &a.metrics, &a.params)?;
    let fg = fg_composite_metrics(&pred, &gt, &region)?;
    let r = metric_report(
        "evaluate-fg",
        &a.pred_dir,
        &a.gt_dir,
        &a.trimap,
        a.region,
        region.count(),
        &scores,
        Some((fg.sad, fg.mse)),
        &a.metrics,
        &a.params,
    );
    if a.json {
        print_json(&r)
    } else {
        print_metrics(&r);
        Ok(())
    }
}

fn run_make_sample(a: MakeSampleArgs, force: bool) -> CliResult<()> {
    let names = ["image.png", "alpha.pfm", "fg.fbaf", "bg.fbaf", "trimap.png", "meta.json"];
    let outputs: Vec<PathBuf> = names.iter().map(|n| a.output.join(n)).collect();
    guard_all(outputs.iter().map(PathBuf::as_path), force)?;
    let text = std::fs::read_to_string(&a.spec)
        .map_err(|e| CliError::io(format!("{}: {e}", a.spec.display())))?;
    let spec: SampleSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::io(format!("{}: {e}", a.spec.display())))?;
    spec.validate()?;
    let fg = files::read_color(&a.fg)?;
    let alpha = files::read_pixel(&a.alpha)?;
    let bg = files::read_color(&a.bg)?;
    let second = match (&a.fg2, &a.alpha2) {
        (Some(f), Some(al)) => Some((files::read_color(f)?, files::read_pixel(al)?)),
        _ => None,
    };
    let sample = make_sample(
        SampleInputs {
            fg: &fg,
            alpha: &alpha,
            bg: &bg,
            second: second.as_ref().map(|(f, al)| (f, al)),
        },
        &spec,
    )?;
    files::ensure_dir(&a.output)?;
    png::write_color(&sample.image, &outputs[0], png::BitDepth::Eight)?;
    io::write_pixel_map(&sample.gt.alpha, &outputs[1])?;
    io::write_color_map(&sample.gt.fg, &outputs[2])?;
    io::write_color_map(&sample.gt.bg, &outputs[3])?;
    trimap_to_file(&sample.trimap, &outputs[4])?;
    let mut r = report::envelope("make-sample");
    r.insert(
        "inputs".into(),
        json!({
            "fg": display(&a.fg),
            "alpha": display(&a.alpha),
            "bg": display(&a.bg),
            "fg2": a.fg2.as_deref().map(display),
            "alpha2": a.alpha2.as_deref().map(display),
        }),
    );
    r.insert("params".into(), serde_json::to_value(spec)?);
    r.insert("meta".into(), serde_json::to_value(&sample.meta)?);
    r.insert("counts".into(), report::label_counts(&sample.trimap));
    files::write_json(&Value::Object(r), &outputs[5])
}

fn parse_transforms(list: &str) -> CliResult<Vec<TTATransform>> {
    let mut out = Vec::new();
    for token in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match token {
            "dihedral" => out.extend(TTATransform::dihedral_set()),
            "dihedral-multiscale" => out.extend(TTATransform::with_scales(&TTA_SCALES)),
            t => out.push(t.parse::<TTATransform>()?),
        }
    }
    if out.is_empty() {
        return Err(CliError::usage("--transforms is empty"));
    }
    let mut seen = BTreeSet::new();
    for t in &out {
        if !seen.insert(t.to_string()) {
            return Err(CliError::usage(format!("transform `{t}` is listed twice")));
        }
    }
    Ok(out)
}

fn run_tta_forward(a: TtaForwardArgs, force: bool) -> CliResult<()> {
    let transforms = parse_transforms(&a.transforms)?;
    let ext = files::extension(&a.image);
    let image = files::read_color(&a.image)?;
    let trimap = trimap_from_file(&a.trimap)?;
    let jobs: Vec<(TTATransform, PathBuf, PathBuf)> = transforms
        .into_iter()
        .map(|t| {
            let dir = a.output.join(t.to_string());
            (t, dir.join(format!("image.{ext}")), dir.join("trimap.png"))
        })
        .collect();
    guard_all(jobs.iter().flat_map(|(_, i, t)| [i.as_path(), t.as_path()]), force)?;
    for (t, image_out, trimap_out) in &jobs {
        let (img, tri) = tta_forward(&image, &trimap, t)?;
        files::ensure_dir(image_out.parent().unwrap_or(Path::new(".")))?;
        io::write_color_map(&img, image_out)?;
        trimap_to_file(&tri, trimap_out)?;
    }
    Ok(())
}

fn parse_size(s: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::usage(format!("--size `{s}` is not of the form WxH"));
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let w: usize = w.trim().parse().map_err(|_| bad())?;
    let h: usize = h.trim().parse().map_err(|_| bad())?;
    if w == 0 || h == 0 {
        return Err(bad());
    }
    Ok((w, h))
}

fn run_tta_merge(a: TtaMergeArgs, force: bool) -> CliResult<()> {
    let transforms = parse_transforms(&a.transforms)?;
    let preds = transforms
        .iter()
        .map(|t| files::read_prediction(&a.inputs.join(t.to_string())))
        .collect::<CliResult<Vec<_>>>()?;
    let target = match &a.size {
        Some(s) => parse_size(s)?,
        None => transforms
            .iter()
            .zip(&preds)
            .find(|(t, _)| t.scale == 1.0)
            .map(|(t, p)| {
                let (w, h) = p.dims();
                if t.rotation % 180 == 90 {
                    (h, w)
                } else {
                    (w, h)
                }
            })
            .ok_or_else(|| {
                CliError::usage("no unit-scale transform to infer the size from; pass --size")
            })?,
    };
    let restored = transforms
        .iter()
        .zip(&preds)
        .map(|(t, p)| tta_inverse(p, t, target))
        .collect::<Result<Vec<_>, _>>()?;
    let merged = tta_merge(&restored)?;
    files::ensure_dir(&a.output)?;
    files::write_prediction(&merged, &a.output, force)
}
