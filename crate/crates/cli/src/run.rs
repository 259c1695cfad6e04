//! Scenario runners behind each subcommand.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use shadow_core::autocorr::{stability_constant, theoretical_autocorr_coeff};
use shadow_core::diffraction::{calibrate_normalization, PurePointMeasure};
use shadow_core::heisenberg::{bessel_branch_coefficient, lattice_sum_identity_check, nilpotent_branch_coefficient, LatticeSumOptions};
use shadow_core::{
    approx_sequence_diagnostic, consistency_harness, cut_and_project, empirical_autocorr, periodization_norm_bound_check,
    poisson_triple_check, spherical_diffraction, ApproxSequence, Error, Family, HScheme, Region, WeightedNormParams,
};

use crate::config::{ConfigError, ExperimentConfig, SchemeSpec};
use crate::emit_plot_data;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            _ => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Autocorr,
    Peaks,
    VerifyPoisson,
    Consistency,
    Heisenberg,
    DiagnoseSequence,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Autocorr => "autocorr",
            Command::Peaks => "peaks",
            Command::VerifyPoisson => "verify-poisson",
            Command::Consistency => "consistency",
            Command::Heisenberg => "heisenberg",
            Command::DiagnoseSequence => "diagnose-sequence",
        }
    }
}

/// One tolerance comparison.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value ≤ tolerance`.
    fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, passed: value <= tolerance }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub details: serde_json::Value,
    pub files: Vec<PathBuf>,
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    out: &'a Path,
    files: Vec<PathBuf>,
}

impl Ctx<'_> {
    fn create(&mut self, name: &str) -> std::io::Result<BufWriter<File>> {
        let path = self.out.join(name);
        self.files.push(path.clone());
        Ok(BufWriter::new(File::create(path)?))
    }
}

/// Runs `command` and writes its CSV files and `<command>.json` into `out`.
pub fn run(command: Command, cfg: &ExperimentConfig, out: &Path) -> Result<Report, RunError> {
    std::fs::create_dir_all(out)?;
    let mut ctx = Ctx { cfg, out, files: Vec::new() };
    let (checks, details) = match command {
        Command::Autocorr => autocorr(&mut ctx)?,
        Command::Peaks => peaks(&mut ctx)?,
        Command::VerifyPoisson => verify_poisson(&mut ctx)?,
        Command::Consistency => consistency(&mut ctx)?,
        Command::Heisenberg => heisenberg(&mut ctx)?,
        Command::DiagnoseSequence => diagnose_sequence(&mut ctx)?,
    };
    let json_path = out.join(format!("{}.json", command.name()));
    ctx.files.push(json_path.clone());
    let report = Report {
        command: command.name().into(),
        passed: checks.iter().all(|c| c.passed),
        checks,
        details,
        files: ctx.files,
    };
    let mut w = BufWriter::new(File::create(json_path)?);
    serde_json::to_writer_pretty(&mut w, &report).map_err(std::io::Error::other)?;
    writeln!(w)?;
    Ok(report)
}

type Outcome = Result<(Vec<Check>, serde_json::Value), RunError>;

fn euclidean(cfg: &ExperimentConfig) -> Result<shadow_core::Scheme, RunError> {
    if cfg.scheme == SchemeSpec::Heisenberg {
        return Err(ConfigError::Invalid("the Heisenberg scheme is handled by the `heisenberg` command".into()).into());
    }
    Ok(cfg.scheme.build()?)
}

fn grown(region: &Region, margin: f64) -> Region {
    let (lo, hi) = region.bounding_box();
    Region::Box { lo: lo.iter().map(|v| v - margin).collect(), hi: hi.iter().map(|v| v + margin).collect() }
}

fn cutoff(cfg: &ExperimentConfig) -> Result<f64, RunError> {
    match (cfg.cutoff, cfg.test_functions.first()) {
        (Some(c), _) => Ok(c),
        (None, Some(f)) => Ok(f.build()?.autocorrelation().support_radius() * (1.0 + 1e-9)),
        (None, None) => Err(ConfigError::Invalid("set `cutoff` or give a test function".into()).into()),
    }
}

fn autocorr(ctx: &mut Ctx) -> Outcome {
    let cfg = ctx.cfg;
    let scheme = euclidean(cfg)?;
    let n = scheme.physical_dim();
    let k = cfg.point_group.build(n)?;
    let r = cutoff(cfg)?;
    let seq = ApproxSequence::new(cfg.family, cfg.scales.clone())?;
    let ms = cut_and_project(&scheme, &cfg.window, &grown(&cfg.region(n), r + 1.0))?;
    let mut per_scale = Vec::new();
    let mut previous = None;
    let mut stability = Vec::new();
    for &t in &seq.scales {
        let ac = empirical_autocorr(&ms, &seq.region(n, t), r)?;
        if let Some((t0, prev)) = previous.take() {
            stability.push(json!({ "t": t0, "t_next": t, "constant": stability_constant(&prev, &ac, t0) }));
        }
        per_scale.push(json!({ "t": t, "atoms": ac.atoms.len(), "identity_coefficient": ac.identity_coefficient() }));
        previous = Some((t, ac));
    }
    let (_, ac) = previous.expect("at least one scale");
    let ac = if k.order() > 1 { shadow_core::radialize(&ac, &k) } else { ac };
    ac.write_csv((k.order() > 1).then_some(&k), ctx.create("autocorr.csv")?)?;
    ms.write_csv(ctx.create("model_set.csv")?)?;
    let deviation = ac
        .atoms
        .iter()
        .map(|a| (a.coeff - theoretical_autocorr_coeff(&scheme, &cfg.window, &a.key).value).abs())
        .fold(0.0, f64::max);
    let checks = vec![Check::at_most("max |c(z) - overlap(z)/covol|", deviation, cfg.tolerances.autocorr)];
    Ok((checks, json!({ "cutoff": r, "points": ms.len(), "scales": per_scale, "stability": stability })))
}

fn write_peaks(ctx: &mut Ctx, peaks: &PurePointMeasure) -> Result<(), RunError> {
    peaks.write_csv(ctx.create("peaks.csv")?)?;
    let plot = ctx.out.join("peaks_plot.dat");
    emit_plot_data(peaks, &plot)?;
    ctx.files.push(plot);
    Ok(())
}

fn peaks(ctx: &mut Ctx) -> Outcome {
    let cfg = ctx.cfg;
    let scheme = euclidean(cfg)?;
    let k = cfg.point_group.build(scheme.physical_dim())?;
    let peaks = spherical_diffraction(&scheme, &k, &cfg.window, cfg.dual_radius)?;
    write_peaks(ctx, &peaks)?;
    let negative = peaks.atoms.iter().map(|a| -a.intensity).fold(0.0, f64::max);
    let density = cfg.window.volume() / scheme.covolume();
    let trivial = peaks.trivial_intensity();
    let trivial_gap = if density > 0.0 { (trivial - density * density).abs() / (density * density) } else { trivial.abs() };
    let checks = vec![
        Check::at_most("largest negative intensity", negative, 0.0),
        Check::at_most("trivial peak vs (vol W / covol)^2", trivial_gap, cfg.tolerances.trivial_peak),
    ];
    Ok((
        checks,
        json!({
            "atoms": peaks.atoms.len(),
            "dual_radius": peaks.dual_radius,
            "tail_estimate": peaks.tail_estimate,
            "trivial_intensity": trivial,
            "density": density,
        }),
    ))
}

fn verify_poisson(ctx: &mut Ctx) -> Outcome {
    let cfg = ctx.cfg;
    let scheme = euclidean(cfg)?;
    let f = cfg.function(0)?;
    let r = cfg.function(1)?;
    let mut checks = Vec::new();
    let mut details = serde_json::Map::new();
    match poisson_triple_check(&scheme, &f, &r, cfg.dual_radius) {
        Ok(rep) => {
            checks.push(Check::at_most("pairwise relative error", rep.max_rel_err, cfg.tolerances.poisson));
            let mut w = ctx.create("poisson.csv")?;
            writeln!(w, "lhs_lattice,rhs_dual,mid_quadrature,max_rel_err,dual_tail")?;
            writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", rep.lhs_lattice, rep.rhs_dual, rep.mid_quadrature, rep.max_rel_err, rep.dual_tail)?;
            details.insert("triple".into(), serde_json::to_value(&rep).expect("serializable"));
        }
        Err(Error::TailBound { tail, limit }) => checks.push(Check::at_most("dual-sum tail", tail, limit)),
        Err(e) => return Err(e.into()),
    }
    let cal = calibrate_normalization()?;
    checks.push(Check::at_most("calibrated exponent |p - 1|", (cal.exponent - 1.0).abs(), 1e-9));
    checks.push(Check::at_most("calibrated relative error", cal.calibrated_rel_err, 1e-9));
    details.insert("calibration".into(), serde_json::to_value(&cal).expect("serializable"));
    if let Some(nb) = &cfg.norm_bound {
        let params = WeightedNormParams::for_scheme(nb.alpha, nb.metric, &scheme)?;
        let rep = periodization_norm_bound_check(&f, &r, &params, &scheme)?;
        checks.push(Check::at_most("(lhs - rhs) / rhs of the weighted-norm bound", (rep.lhs - rep.rhs) / rep.rhs.max(f64::MIN_POSITIVE), cfg.tolerances.norm_bound));
        details.insert("norm_bound".into(), serde_json::to_value(&rep).expect("serializable"));
    }
    Ok((checks, details.into()))
}

fn consistency(ctx: &mut Ctx) -> Outcome {
    let cfg = ctx.cfg;
    let scheme = euclidean(cfg)?;
    let n = scheme.physical_dim();
    let k = cfg.point_group.build(n)?;
    let f = cfg.function(0)?;
    let f_t = cfg.region(n);
    let margin = f.autocorrelation().support_radius() + 1.0;
    let ms = cut_and_project(&scheme, &cfg.window, &grown(&f_t, margin))?;
    let peaks = spherical_diffraction(&scheme, &k, &cfg.window, cfg.dual_radius)?;
    write_peaks(ctx, &peaks)?;
    let rep = consistency_harness(&ms, &f_t, &k, &f, &peaks)?;
    let checks = vec![
        Check::at_most("empirical vs theoretical relative gap", rep.rel_gap, cfg.tolerances.consistency),
        Check::at_most("trivial peak vs counted density^2", rep.trivial_rel_gap, cfg.tolerances.trivial_peak),
    ];
    Ok((checks, serde_json::to_value(&rep).expect("serializable")))
}

fn heisenberg(ctx: &mut Ctx) -> Outcome {
    let cfg = ctx.cfg;
    if cfg.scheme != SchemeSpec::Heisenberg {
        return Err(ConfigError::Invalid("the `heisenberg` command needs scheme kind \"heisenberg\"".into()).into());
    }
    let hcfg = cfg.heisenberg.clone().ok_or_else(|| ConfigError::Invalid("missing `heisenberg` section".into()))?;
    let h = HScheme::new();
    let mut checks = Vec::new();
    let mut w = ctx.create("heisenberg_peaks.csv")?;
    writeln!(w, "branch,eta1_re,eta1_im,lambda1,m,intensity,lower_bound,ansatz_dim,tail_or_stderr")?;
    let mut bessel = Vec::new();
    for eta in &hcfg.bessel_labels {
        let c = bessel_branch_coefficient(&h, &cfg.window, Complex64::new(eta[0], eta[1]))?;
        let first = c.label.first();
        writeln!(w, "bessel,{:.16e},{:.16e},,,{:.16e},false,,0", first.re, first.im, c.intensity)?;
        bessel.push(c);
    }
    let mut nilpotent = Vec::new();
    for label in &hcfg.nilpotent_labels {
        let c = nilpotent_branch_coefficient(&h, &cfg.window, label.lambda1, label.m, hcfg.ansatz_dim)?;
        let drop = c.by_dimension.windows(2).map(|p| p[0] - p[1]).fold(0.0, f64::max);
        checks.push(Check::at_most(&format!("nilpotent ({}, {}) monotonicity defect", c.lambda1, c.m), drop, 0.0));
        checks.push(Check::at_most(&format!("nilpotent ({}, {}) negative eigenvalue", c.lambda1, c.m), -c.min_eigenvalue, 1e-8));
        let step = match c.by_dimension.len() {
            0 | 1 => f64::NAN,
            l => c.by_dimension[l - 1] - c.by_dimension[l - 2],
        };
        writeln!(w, "nilpotent,,,{:.16e},{},{:.16e},true,{},{:.16e}", c.lambda1, c.m, c.intensity, c.ansatz_dim, step)?;
        nilpotent.push(json!({
            "lambda1": c.lambda1, "lambda2": c.lambda2, "m": c.m, "ansatz_dim": c.ansatz_dim,
            "lower_bound": c.lower_bound, "intensity": c.intensity, "by_dimension": c.by_dimension,
            "min_eigenvalue": c.min_eigenvalue, "hermiticity_residual": c.hermiticity_residual,
        }));
    }
    w.flush()?;
    let mut lattice_sum = serde_json::Value::Null;
    if let Some(ls) = &hcfg.lattice_sum {
        let opts = LatticeSumOptions { samples: ls.samples, seed: cfg.seed, ..Default::default() };
        let rep = lattice_sum_identity_check(&h, &ls.f.build()?, &ls.r.build()?, &opts)?;
        checks.push(Check::at_most("lattice-sum relative gap", rep.rel_gap, cfg.tolerances.lattice_sum));
        lattice_sum = serde_json::to_value(&rep).expect("serializable");
    }
    Ok((checks, json!({ "bessel": bessel, "nilpotent": nilpotent, "lattice_sum": lattice_sum })))
}

fn diagnose_sequence(ctx: &mut Ctx) -> Outcome {
    let cfg = ctx.cfg;
    let xi = cfg.xi.clone().ok_or_else(|| ConfigError::Invalid("`xi` is required for diagnose-sequence".into()))?;
    let seq = ApproxSequence::new(cfg.family, cfg.scales.clone())?;
    let values = approx_sequence_diagnostic(&seq, &xi)?;
    let mut w = ctx.create("sequence.csv")?;
    writeln!(w, "t,abs_transform,bound")?;
    let mut checks = Vec::new();
    for (&t, &v) in seq.scales.iter().zip(&values) {
        // |Π sinc(2πξᵢt)| ≤ 1/(2π|ξᵢ|t) for every nonzero coordinate
        let bound = match cfg.family {
            Family::Boxes => xi.iter().filter(|x| **x != 0.0).map(|x| 1.0 / (2.0 * PI * x.abs() * t)).fold(f64::INFINITY, f64::min),
            Family::Balls if xi.len() == 1 => 1.0 / (2.0 * PI * xi[0].abs() * t),
            Family::Balls => f64::NAN,
        };
        writeln!(w, "{t:.16e},{v:.16e},{bound:.16e}")?;
        if bound.is_finite() {
            checks.push(Check::at_most(&format!("|transform| at t = {t}"), v, bound));
        }
    }
    Ok((checks, json!({ "xi": xi, "scales": seq.scales, "values": values })))
}
