//! Command-line front end. Every command writes a JSON report; see
//! [`exit_code`] for how outcomes map onto process exit codes.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::dhsys::{self, DhSystem, Restriction, StabilityClass};
use crate::error::{Error, Result};
use crate::io::{self, matrix_value, num, opt_num, Input};
use crate::mappings::{
    self, family_member_first, minimal_first_params, second_char_base, second_char_member,
    FamilyParams, FamilyVariant, MappingProblem, MappingSolution,
};
use crate::numkit::{ComplexMatrix, TolerancePolicy};
use crate::radii::{self, EtaResult, MuConfig, RadiusReport, SweepConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_STRUCTURE: i32 = 2;
pub const EXIT_NOT_APPLICABLE: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;
pub const EXIT_NOT_FINITE: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "dissipative", version, about = "Dissipative mappings and structured stability radii")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a DH system (J, R, Q) and classify its stability.
    Check {
        j: PathBuf,
        r: PathBuf,
        q: PathBuf,
        #[arg(long)]
        real: bool,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Minimal-norm dissipative mapping taking X to Y, or a family member.
    Map {
        x: PathBuf,
        y: PathBuf,
        #[arg(long)]
        real: bool,
        #[arg(long, value_enum)]
        family: Option<Family>,
        /// JSON object with optional matrix entries "K", "G", "Z".
        #[arg(long, requires = "family")]
        params: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Stability radius under perturbations of J and R through B and C.
    Radius {
        j: PathBuf,
        r: PathBuf,
        q: PathBuf,
        b: PathBuf,
        c: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "unstructured")]
        kind: Kind,
        #[arg(long)]
        real: bool,
        #[command(flatten)]
        sweep: SweepArgs,
        #[command(flatten)]
        mu: MuArgs,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Structured eigenvalue backward error at iw.
    Eta {
        j: PathBuf,
        r: PathBuf,
        q: PathBuf,
        b: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        w: f64,
        #[arg(long)]
        real: bool,
        #[command(flatten)]
        sweep: SweepArgs,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Real structured singular value of a matrix.
    Mu {
        m: PathBuf,
        #[command(flatten)]
        mu: MuArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Write a seeded random DH system to J.json, R.json and Q.json.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        real: bool,
        /// Output directory.
        #[arg(long, default_value = ".")]
        output: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Family {
    First,
    Second,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Unstructured,
    Structured,
    Singularity,
}

#[derive(Args, Debug)]
struct TolArgs {
    #[arg(long = "tol-psd", default_value_t = 1e-10)]
    psd: f64,
    /// Relative rank threshold; defaults to max(rows, cols) * eps.
    #[arg(long = "tol-rank")]
    rank: Option<f64>,
    #[arg(long = "tol-res", default_value_t = 1e-8)]
    res: f64,
}

impl TolArgs {
    fn policy(&self) -> Result<TolerancePolicy> {
        let t = TolerancePolicy {
            rank_rtol: self.rank,
            psd_tol: self.psd,
            residual_tol: self.res,
        };
        t.validate()?;
        Ok(t)
    }
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Frequency half-range; defaults to 2 ||(J - R) Q||_2 + 1.
    #[arg(long)]
    wmax: Option<f64>,
    #[arg(long, default_value_t = 2001)]
    grid: usize,
    #[arg(long, default_value_t = 60)]
    refine: usize,
    #[arg(long, default_value_t = 20)]
    starts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SweepArgs {
    fn config(&self) -> SweepConfig {
        SweepConfig {
            w_max: self.wmax,
            grid_points: self.grid,
            refine_iters: self.refine,
            multistarts: self.starts,
            rng_seed: self.seed,
        }
    }
}

#[derive(Args, Debug)]
struct MuArgs {
    #[arg(long = "gamma-min", default_value_t = 1e-8)]
    gamma_min: f64,
    #[arg(long = "gamma-grid", default_value_t = 200)]
    gamma_grid: usize,
}

impl MuArgs {
    fn config(&self) -> MuConfig {
        MuConfig {
            gamma_min: self.gamma_min,
            grid_points: self.gamma_grid,
            ..MuConfig::default()
        }
    }
}

#[derive(Args, Debug)]
struct OutArgs {
    /// Write the report here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Exit code for an error category.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Structure(_)
        | Error::Shape(_)
        | Error::NonFinite(_)
        | Error::NotPositiveDefinite(_)
        | Error::InternalConsistency(_) => EXIT_STRUCTURE,
        Error::NotApplicable(_) | Error::OnSpectrum { .. } => EXIT_NOT_APPLICABLE,
        Error::Infeasible(_) | Error::InvalidParams(_) => EXIT_INFEASIBLE,
        Error::NotFinite(_) | Error::NoMinimum | Error::NoCandidate(_) => EXIT_NOT_FINITE,
        Error::Io(_)
        | Error::Parse(_)
        | Error::Config(_)
        | Error::Domain(_)
        | Error::IndexOutOfRange { .. }
        | Error::Decomposition(_) => EXIT_USAGE,
    }
}

/// A finished report plus the exit code it should produce.
struct Outcome {
    report: Value,
    code: i32,
    message: Option<String>,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Self {
            report,
            code: EXIT_OK,
            message: None,
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// exit code. Reports go to `stdout` unless `--output` is given.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let output = match &cli.command {
        Command::Check { out, .. }
        | Command::Map { out, .. }
        | Command::Radius { out, .. }
        | Command::Eta { out, .. }
        | Command::Mu { out, .. } => out.output.clone(),
        Command::Sample { .. } => None,
    };
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| execute(cli.command)))
        .unwrap_or_else(|_| Err(Error::InternalConsistency("unexpected panic".into())));
    match outcome {
        Ok(o) => {
            if let Some(m) = &o.message {
                let _ = writeln!(stderr, "dissipative: {m}");
            }
            let text = io::to_json_string(&o.report);
            let written = match &output {
                Some(p) => std::fs::write(p, text)
                    .map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
                None => stdout.write_all(text.as_bytes()).map_err(|e| Error::Io(e.to_string())),
            };
            match written {
                Ok(()) => o.code,
                Err(e) => {
                    let _ = writeln!(stderr, "dissipative: {e}");
                    exit_code(&e)
                }
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "dissipative: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Check { j, r, q, real, tol, .. } => cmd_check(&j, &r, &q, real, &tol),
        Command::Map {
            x,
            y,
            real,
            family,
            params,
            tol,
            ..
        } => cmd_map(&x, &y, real, family, params.as_deref(), &tol),
        Command::Radius {
            j,
            r,
            q,
            b,
            c,
            kind,
            real,
            sweep,
            mu,
            tol,
            ..
        } => cmd_radius([&j, &r, &q, &b], c.as_deref(), kind, real, &sweep, &mu, &tol),
        Command::Eta {
            j,
            r,
            q,
            b,
            w,
            real,
            sweep,
            tol,
            ..
        } => cmd_eta([&j, &r, &q, &b], w, real, &sweep, &tol),
        Command::Mu { m, mu, .. } => cmd_mu(&m, &mu),
        Command::Sample {
            n,
            seed,
            real,
            output,
        } => cmd_sample(n, seed, real, &output),
    }
}

fn report(
    command: &str,
    inputs: &[Input],
    tol: Option<&TolerancePolicy>,
    sweep: Value,
    result: Value,
    certificate: Value,
    flags: Value,
) -> Value {
    json!({
        "command": command,
        "inputs": inputs.iter().map(Input::json).collect::<Vec<_>>(),
        "tolerances": tol.map_or(Value::Null, tol_json),
        "sweep": sweep,
        "result": result,
        "certificate": certificate,
        "flags": flags,
        "version": env!("CARGO_PKG_VERSION"),
    })
}

fn tol_json(t: &TolerancePolicy) -> Value {
    json!({
        "psd_tol": num(t.psd_tol),
        "rank_rtol": opt_num(t.rank_rtol),
        "residual_tol": num(t.residual_tol),
    })
}

fn sweep_json(c: &SweepConfig) -> Value {
    json!({
        "w_max": opt_num(c.w_max),
        "grid_points": c.grid_points,
        "refine_iters": c.refine_iters,
        "multistarts": c.multistarts,
        "rng_seed": c.rng_seed,
    })
}

fn mu_json(c: &MuConfig) -> Value {
    json!({
        "gamma_min": num(c.gamma_min),
        "grid_points": c.grid_points,
        "refine_iters": c.refine_iters,
    })
}

fn read_all(names: &[&str], paths: &[&Path]) -> Result<Vec<Input>> {
    names
        .iter()
        .zip(paths)
        .map(|(n, p)| io::read_input(n, p))
        .collect()
}

fn load_system(inputs: &[Input], real: bool, tol: TolerancePolicy) -> Result<DhSystem> {
    dhsys::validate_dh(
        inputs[0].matrix()?,
        inputs[1].matrix()?,
        inputs[2].matrix()?,
        real,
        tol,
    )
}

fn cmd_check(j: &Path, r: &Path, q: &Path, real: bool, tol: &TolArgs) -> Result<Outcome> {
    let tol = tol.policy()?;
    let inputs = read_all(&["J", "R", "Q"], &[j, r, q])?;
    let sys = load_system(&inputs, real, tol)?;
    let alpha = dhsys::spectral_abscissa(&sys)?;
    let class = dhsys::stability_class(&sys)?;
    let (label, code) = match class {
        StabilityClass::AsymptoticallyStable => ("asymptotically_stable", EXIT_OK),
        StabilityClass::MarginallyStable => ("marginally_stable", EXIT_NOT_APPLICABLE),
    };
    let result = json!({
        "n": sys.n(),
        "real": real,
        "valid": true,
        "stability": label,
        "spectral_abscissa": num(alpha),
    });
    Ok(Outcome {
        report: report("check", &inputs, Some(&tol), Value::Null, result, Value::Null, json!({})),
        code,
        message: (code != EXIT_OK).then(|| "system is only marginally stable".to_string()),
    })
}

fn load_params(path: Option<&Path>, n: usize, variant: FamilyVariant) -> Result<(FamilyParams, Option<Input>)> {
    let mut params = FamilyParams::zeros(n, variant);
    let Some(path) = path else {
        return Ok((params, None));
    };
    let input = io::read_input("params", path)?;
    let v: Value = serde_json::from_str(&input.text)
        .map_err(|e| Error::Parse(format!("{}: {e}", input.path)))?;
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Parse(format!("{}: expected a JSON object", input.path)))?;
    for (key, m) in obj {
        let slot = match key.as_str() {
            "K" => &mut params.k,
            "G" => &mut params.g,
            "Z" => &mut params.z,
            other => {
                return Err(Error::Parse(format!(
                    "{}: unknown parameter {other:?}",
                    input.path
                )))
            }
        };
        *slot = io::matrix_from_value(m)?;
    }
    Ok((params, Some(input)))
}

fn cmd_map(
    x: &Path,
    y: &Path,
    real: bool,
    family: Option<Family>,
    params: Option<&Path>,
    tol: &TolArgs,
) -> Result<Outcome> {
    let tol = tol.policy()?;
    let mut inputs = read_all(&["X", "Y"], &[x, y])?;
    let (xm, ym) = (inputs[0].matrix()?, inputs[1].matrix()?);
    if real && family.is_some() {
        return Err(Error::Config(
            "--family is only available for complex mappings".into(),
        ));
    }

    let problem;
    let (feas, kind_label) = if real {
        let aug = mappings::augment(&xm, &ym, tol)?;
        let mut rep = mappings::dissipative_exists(&aug.problem)?;
        rep.kind = mappings::MappingKind::RealDissipative;
        problem = aug.problem.clone();
        (rep, "real_minimal")
    } else {
        problem = MappingProblem::new(xm.clone(), ym.clone(), tol)?;
        let label = match family {
            None => "minimal",
            Some(Family::First) => "first_family",
            Some(Family::Second) => "second_family",
        };
        (mappings::dissipative_exists(&problem)?, label)
    };
    let feas_json = serde_json::to_value(&feas).expect("feasibility report serializes");
    if !feas.feasible() {
        let result = json!({
            "kind": kind_label,
            "feasible": false,
            "diagnostic": feas.to_string(),
            "conditions": feas_json,
        });
        return Ok(Outcome {
            report: report("map", &inputs, Some(&tol), Value::Null, result, Value::Null, json!({})),
            code: EXIT_INFEASIBLE,
            message: Some(format!("no dissipative mapping exists: {feas}")),
        });
    }

    let sol: MappingSolution = if real {
        mappings::real_min_norm_dissipative(&xm, &ym, &tol)?
    } else {
        match family {
            None => mappings::min_norm_dissipative(&problem)?,
            Some(f) => {
                let variant = match f {
                    Family::First => FamilyVariant::First,
                    Family::Second => FamilyVariant::Second,
                };
                let (params, input) = load_params(params, problem.n(), variant)?;
                // Without a parameter file the first family defaults to the
                // parameters of the minimal-norm member.
                let params = match (&input, variant) {
                    (None, FamilyVariant::First) => minimal_first_params(&problem),
                    _ => params,
                };
                inputs.extend(input);
                match variant {
                    FamilyVariant::First => family_member_first(&problem, &params)?,
                    FamilyVariant::Second => {
                        let base = second_char_base(&problem)?;
                        second_char_member(&base, &problem, &params)?
                    }
                }
            }
        }
    };
    let formula = (!real && family.is_none()).then(|| mappings::min_norm_sq_formula(&problem));
    let result = json!({
        "kind": kind_label,
        "feasible": sol.feasible,
        "rank": problem.rank(),
        "frob_norm_sq": num(sol.frob_norm_sq),
        "frob_norm_sq_formula": opt_num(formula),
        "conditions": feas_json,
    });
    let certificate = json!({
        "delta": matrix_value(&sol.delta),
        "residual": num(sol.residual),
        "min_eig_sym": num(sol.min_eig_sym),
    });
    let flags = json!({ "imag_before_truncation": opt_num(sol.imag_before_truncation) });
    Ok(Outcome::ok(report(
        "map",
        &inputs,
        Some(&tol),
        Value::Null,
        result,
        certificate,
        flags,
    )))
}

fn radius_json(rep: &RadiusReport) -> (Value, Value, Value) {
    let result = json!({
        "kind": rep.kind,
        "label": rep.label,
        "value": num(rep.value),
        "lower": opt_num(rep.lower),
        "upper": opt_num(rep.upper),
        "w_star": num(rep.w_star),
    });
    let certificate = rep.certificate.as_ref().map_or(Value::Null, |c| {
        json!({
            "delta_j": matrix_value(&c.delta_j),
            "delta_r": matrix_value(&c.delta_r),
            "eig_vector": matrix_value(&ComplexMatrix::from_column_slice(
                c.eig_vector.len(),
                1,
                c.eig_vector.as_slice(),
            )),
            "eig_residual": num(c.eig_residual),
            "norm": num(c.norm),
        })
    });
    let flags = json!({
        "certified": rep.certified,
        "equality_certified": rep.certified,
        "skipped_frequencies": rep.skipped_frequencies.iter().map(|&w| num(w)).collect::<Vec<_>>(),
        "assumptions": rep.assumptions,
    });
    (result, certificate, flags)
}

fn cmd_radius(
    paths: [&Path; 4],
    c: Option<&Path>,
    kind: Kind,
    real: bool,
    sweep: &SweepArgs,
    mu: &MuArgs,
    tol: &TolArgs,
) -> Result<Outcome> {
    let tol = tol.policy()?;
    let mut inputs = read_all(&["J", "R", "Q", "B"], &paths)?;
    if let Some(c) = c {
        inputs.push(io::read_input("C", c)?);
    }
    let sys = load_system(&inputs, real, tol)?;
    let b = inputs[3].matrix()?;
    let cm = inputs.get(4).map(Input::matrix).transpose()?;
    let rst = Restriction::new(b, cm);
    let cfg = sweep.config();
    let mu_cfg = mu.config();
    let rep = match (kind, real) {
        (Kind::Unstructured, false) => radii::unstructured_radius_complex(&sys, &rst, &cfg)?,
        (Kind::Unstructured, true) => radii::unstructured_radius_real(&sys, &rst, &cfg, &mu_cfg)?,
        (Kind::Structured, false) => radii::structured_radius_complex(&sys, &rst, &cfg)?,
        (Kind::Structured, true) => radii::structured_radius_real(&sys, &rst, &cfg)?,
        (Kind::Singularity, false) => radii::distance_to_singularity(&sys, &rst, &cfg)?,
        (Kind::Singularity, true) => {
            return Err(Error::Config(
                "the distance to singularity is computed for complex perturbations only".into(),
            ))
        }
    };
    let (result, certificate, flags) = radius_json(&rep);
    let mut sweep_v = sweep_json(&rep.sweep);
    if kind == Kind::Unstructured && real {
        sweep_v["mu"] = mu_json(&mu_cfg);
    }
    Ok(Outcome::ok(report(
        "radius",
        &inputs,
        Some(&tol),
        sweep_v,
        result,
        certificate,
        flags,
    )))
}

fn eta_json(e: &EtaResult) -> (Value, Value, Value) {
    let result = json!({
        "w": num(e.w),
        "lower_bound": num(e.lower_bound),
        "upper_bound": num(e.upper_bound),
        "optimized_value": num(e.optimized_value),
        "omega_dim": e.omega_dim,
    });
    let certificate = json!({
        "delta_j": matrix_value(&e.delta_j),
        "delta_r": matrix_value(&e.delta_r),
        "x_hat": matrix_value(&ComplexMatrix::from_column_slice(e.x_hat.len(), 1, e.x_hat.as_slice())),
        "eig_residual": num(e.eig_residual),
    });
    let flags = json!({ "equality_certified": e.equality_certified, "no_candidate": false });
    (result, certificate, flags)
}

fn cmd_eta(paths: [&Path; 4], w: f64, real: bool, sweep: &SweepArgs, tol: &TolArgs) -> Result<Outcome> {
    let tol = tol.policy()?;
    if !w.is_finite() {
        return Err(Error::Config("--w must be finite".into()));
    }
    let inputs = read_all(&["J", "R", "Q", "B"], &paths)?;
    let sys = load_system(&inputs, real, tol)?;
    let b = inputs[3].matrix()?;
    let cfg = sweep.config();
    let res = if real {
        radii::eta_real(&sys, &b, w, &cfg)
    } else {
        radii::eta_complex(&sys, &b, w, &cfg)
    };
    let (result, certificate, flags) = match res {
        Ok(e) => eta_json(&e),
        Err(Error::NoCandidate(msg)) => (
            json!({ "w": num(w), "optimized_value": num(f64::INFINITY), "message": msg }),
            Value::Null,
            json!({ "equality_certified": false, "no_candidate": true }),
        ),
        Err(e) => return Err(e),
    };
    let mut sweep_v = sweep_json(&cfg);
    sweep_v["w"] = num(w);
    Ok(Outcome::ok(report(
        "eta",
        &inputs,
        Some(&tol),
        sweep_v,
        result,
        certificate,
        flags,
    )))
}

fn cmd_mu(m: &Path, mu: &MuArgs) -> Result<Outcome> {
    let inputs = vec![io::read_input("M", m)?];
    let mat = inputs[0].matrix()?;
    let cfg = mu.config();
    let eval = radii::mu_real_2(&mat, &cfg)?;
    let (lo, hi) = radii::mu_real_f_bounds(&mat, &cfg)?;
    let result = json!({
        "value": num(eval.value),
        "gamma_star": num(eval.gamma_star),
        "mu_f_lower": num(lo),
        "mu_f_upper": num(hi),
    });
    let flags = json!({ "boundary_limit": eval.boundary_limit });
    Ok(Outcome::ok(report(
        "mu",
        &inputs,
        None,
        mu_json(&cfg),
        result,
        Value::Null,
        flags,
    )))
}

fn cmd_sample(n: usize, seed: u64, real: bool, dir: &Path) -> Result<Outcome> {
    let sys = dhsys::random_dh(seed, n, real)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for (name, m) in [("J.json", &sys.j), ("R.json", &sys.r), ("Q.json", &sys.q)] {
        let p = dir.join(name);
        io::write_matrix(&p, m)?;
        files.push(p.display().to_string());
    }
    let result = json!({ "n": n, "seed": seed, "real": real, "files": files });
    Ok(Outcome::ok(report(
        "sample",
        &[],
        None,
        Value::Null,
        result,
        Value::Null,
        json!({}),
    )))
}
