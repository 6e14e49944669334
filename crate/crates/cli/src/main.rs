//! Command-line front end for the Dirichlet-space toolkit: set generation
//! and sweeps, energy computation by three routes, regularization dumps,
//! the cyclicity certificate pipeline, and the randomized fusion suite.
//!
//! Exit codes partition outcomes: 0 success (verdict met), 1 usage or
//! descriptor error, 2 verdict not met, 3 numerical budget exceeded.

mod expr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;

use dspace_core::circle::CircleSet;
use dspace_core::cyclicity::{cyclicity_check, Conclusion, PipelineConfig};
use dspace_core::descriptor::{parse_cantor, sweep, sweep_to_csv, CantorDescriptor, SetDescriptor};
use dspace_core::diagnostics::{capcond_diagnostic, carleson_set_test, mu_exponent};
use dspace_core::energy::{
    carleson_energy, fusion_bound_check, j_functional, series_energy, two_sided_report,
    FusionOptions, JMode, TwoSidedOptions,
};
use dspace_core::outer::{outer_from_modulus, BoundaryModulus};
use dspace_core::regularize::build_psi;
use dspace_core::util::SplitMix64;
use dspace_core::weights::{build_phi, WeightProfile};

const EXIT_OK: i32 = 0;
const EXIT_USAGE: i32 = 1;
const EXIT_NOT_MET: i32 = 2;
const EXIT_BUDGET: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "dspace", version, about = "Dirichlet-space potential theory on the unit circle")]
struct Cli {
    /// Rayon thread count (results are identical for any value).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed for randomized suites; recorded in every output.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate or describe a boundary set; optionally sweep (t, N_E, |E_t|).
    Set(SetCmd),
    /// Dirichlet energy of an outer function by the available routes.
    Energy(EnergyCmd),
    /// Build φ = min{|E_t|, t^β}, regularize into ψ, dump the transforms.
    Regularize(RegularizeCmd),
    /// Run the full cyclicity certificate pipeline.
    Certify(CertifyCmd),
    /// Randomized fusion-inequality suite.
    FusionTest(FusionCmd),
}

/// Where the boundary set comes from.
#[derive(Args, Debug, Clone)]
struct SetSelect {
    /// Comma-separated point angles in [0, 2π).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    points: Option<Vec<f64>>,

    /// Arcs as `start:length,start:length`.
    #[arg(long)]
    arcs: Option<String>,

    /// Cantor rule, e.g. `geometric:lambda=0.3333,l0=1.5708` or
    /// `double_exp:c=1,p=0` or `explicit:lengths=1.0;0.4;0.15`.
    #[arg(long)]
    cantor: Option<String>,

    /// JSON descriptor file (see schemas/set_descriptor.schema.json).
    #[arg(long)]
    descriptor: Option<PathBuf>,

    /// Cantor generation (capped at the rule's safe depth).
    #[arg(long)]
    generation: Option<u32>,

    /// Replace positive-length arcs by their endpoints (measure-zero
    /// surrogate used by the spectral routes).
    #[arg(long)]
    endpoints: bool,
}

impl SetSelect {
    fn to_descriptor(&self) -> Result<SetDescriptor> {
        let chosen = [
            self.points.is_some(),
            self.arcs.is_some(),
            self.cantor.is_some(),
            self.descriptor.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count();
        if chosen != 1 {
            bail!("choose exactly one of --points, --arcs, --cantor, --descriptor");
        }
        if let Some(pts) = &self.points {
            return Ok(SetDescriptor::points(pts.clone()));
        }
        if let Some(arcs) = &self.arcs {
            let arcs = arcs
                .split(',')
                .map(|pair| {
                    let (s, l) = pair
                        .split_once(':')
                        .ok_or_else(|| anyhow!("arc must be start:length, got `{pair}`"))?;
                    Ok(dspace_core::descriptor::ArcDescriptor {
                        start: s.trim().parse()?,
                        length: l.trim().parse()?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(SetDescriptor {
                kind: "arcs".into(),
                points: None,
                arcs: Some(arcs),
                cantor: None,
            });
        }
        if let Some(cantor) = &self.cantor {
            let (rule, params_text) = cantor
                .split_once(':')
                .ok_or_else(|| anyhow!("cantor spec must be rule:key=value,..."))?;
            let mut params = serde_json::Map::new();
            for kv in params_text.split(',') {
                if kv.trim().is_empty() {
                    continue;
                }
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| anyhow!("expected key=value, got `{kv}`"))?;
                if k.trim() == "lengths" {
                    let list: Vec<serde_json::Value> = v
                        .split(';')
                        .map(|x| Ok(serde_json::Value::from(x.trim().parse::<f64>()?)))
                        .collect::<Result<_>>()?;
                    params.insert("lengths".into(), serde_json::Value::Array(list));
                } else {
                    params
                        .insert(k.trim().into(), serde_json::Value::from(v.trim().parse::<f64>()?));
                }
            }
            return Ok(SetDescriptor {
                kind: "cantor".into(),
                points: None,
                arcs: None,
                cantor: Some(CantorDescriptor {
                    rule: rule.trim().into(),
                    params,
                    generation: self.generation.unwrap_or(12),
                }),
            });
        }
        let path = self.descriptor.as_ref().unwrap();
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        SetDescriptor::from_json(&text).map_err(Into::into)
    }

    fn build(&self) -> Result<CircleSet> {
        let mut d = self.to_descriptor()?;
        if let (Some(c), Some(g)) = (d.cantor.as_mut(), self.generation) {
            // CLI flag overrides the descriptor's generation.
            c.generation = g;
        }
        if let Some(c) = d.cantor.as_mut() {
            let spec = parse_cantor(c)?;
            c.generation = c.generation.min(spec.max_safe_generation());
        }
        let set = d.build()?;
        Ok(if self.endpoints { set.endpoint_surrogate() } else { set })
    }
}

#[derive(Args, Debug)]
struct SetCmd {
    #[command(flatten)]
    select: SetSelect,

    /// Emit a log-spaced CSV sweep of (t, N_E(t), |E_t|).
    #[arg(long)]
    sweep: bool,

    #[arg(long, default_value_t = 256)]
    rows: usize,

    #[arg(long, default_value_t = 1e-8)]
    t_lo: f64,

    #[arg(long)]
    out: Option<PathBuf>,

    /// json (description) or csv (sweep rows).
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Args, Debug)]
struct EnergyCmd {
    /// Inline boundary modulus, e.g. "abs(1-zeta)" or "dist^0.6".
    #[arg(long)]
    modulus: Option<String>,

    #[command(flatten)]
    select: SetSelect,

    /// Power weight w(t) = c·t^p as `t`, `t^0.6`, or `0.5*t^1.2`
    /// (used with a set; runs the full three-route report).
    #[arg(long)]
    weight: Option<String>,

    /// Concavity exponent for the two-sided regime.
    #[arg(long, default_value_t = 3.0)]
    gamma: f64,

    /// Spectral grid (power of two).
    #[arg(long, default_value_t = 8192)]
    grid: usize,

    /// Relative tolerance for the boundary double integral.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,

    /// Grid-doubling budget for the double integral (log2 of max grid).
    #[arg(long, default_value_t = 14)]
    max_grid_log2: u32,

    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RegularizeCmd {
    #[command(flatten)]
    select: SetSelect,

    #[arg(long, default_value_t = 0.75)]
    alpha: f64,

    #[arg(long, default_value_t = 0.875)]
    beta: f64,

    /// log2 of the regularization grid size.
    #[arg(long, default_value_t = 14)]
    grid_log2: u32,

    /// Grid depth: t ranges over [t_min_factor·π, π].
    #[arg(long, default_value_t = 1e-12)]
    t_min_factor: f64,

    /// Output prefix: writes <prefix>-transform.csv and <prefix>-psi.csv.
    #[arg(long, default_value = "regularize")]
    out_prefix: String,
}

#[derive(Args, Debug)]
struct CertifyCmd {
    #[command(flatten)]
    select: SetSelect,

    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,

    /// δ-schedule as `start:cap` exponents of π·2^{-k}.
    #[arg(long, default_value = "3:48")]
    delta_schedule: String,

    /// FFT grid for the spectral cross-checks.
    #[arg(long, default_value_t = 4096)]
    grid: usize,

    #[arg(long)]
    out: Option<PathBuf>,

    /// Also write the per-δ table as CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FusionCmd {
    #[arg(long, default_value_t = 100)]
    instances: usize,

    /// Points in each random boundary set.
    #[arg(long, default_value_t = 6)]
    set_points: usize,

    /// Relative tolerance of the energy quadratures.
    #[arg(long, default_value_t = 5e-3)]
    tol: f64,

    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage problems exit 1 (2 is reserved for verdicts); clap's
            // help/version output still exits 0.
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("rayon pool");
    }
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            let code = classify_error(&e);
            eprintln!("error: {e:#}");
            std::process::exit(code);
        }
    }
}

fn classify_error(e: &anyhow::Error) -> i32 {
    for cause in e.chain() {
        if let Some(core) = cause.downcast_ref::<dspace_core::Error>() {
            return match core {
                dspace_core::Error::BudgetExceeded { .. } => EXIT_BUDGET,
                _ => EXIT_USAGE,
            };
        }
    }
    EXIT_USAGE
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Set(cmd) => run_set(cmd),
        Command::Energy(cmd) => run_energy(cmd, cli.seed),
        Command::Regularize(cmd) => run_regularize(cmd),
        Command::Certify(cmd) => run_certify(cmd, cli.seed),
        Command::FusionTest(cmd) => run_fusion(cmd, cli.seed),
    }
}

fn write_output(path: &Option<PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, content).with_context(|| format!("writing {}", p.display()))?
        }
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

fn to_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct SetReport {
    version: &'static str,
    descriptor: SetDescriptor,
    arcs: usize,
    total_measure: f64,
    gap_count: usize,
    largest_gap: f64,
    mu: dspace_core::diagnostics::MuFit,
    capcond_verdict: dspace_core::diagnostics::Divergence,
    carleson: dspace_core::diagnostics::CarlesonReport,
}

fn run_set(cmd: SetCmd) -> Result<i32> {
    let set = cmd.select.build()?;
    if cmd.sweep || cmd.format == "csv" {
        let rows = sweep(&set, cmd.rows, cmd.t_lo);
        write_output(&cmd.out, &sweep_to_csv(&rows))?;
        return Ok(EXIT_OK);
    }
    let report = SetReport {
        version: dspace_core::VERSION,
        descriptor: cmd.select.to_descriptor()?,
        arcs: set.arcs().len(),
        total_measure: set.total_measure(),
        gap_count: set.gap_lengths().len(),
        largest_gap: set.gap_lengths().iter().cloned().fold(0.0, f64::max),
        mu: mu_exponent(&set, None),
        capcond_verdict: capcond_diagnostic(&set).verdict,
        carleson: carleson_set_test(&set),
    };
    write_output(&cmd.out, &to_pretty(&report)?)?;
    Ok(EXIT_OK)
}

fn parse_weight(text: &str) -> Result<WeightProfile> {
    // `t`, `t^p`, or `c*t^p`.
    let text = text.trim();
    let (coeff, rest) = match text.split_once('*') {
        Some((c, rest)) => (c.trim().parse::<f64>()?, rest.trim()),
        None => (1.0, text),
    };
    let exponent = if rest == "t" {
        1.0
    } else if let Some(p) = rest.strip_prefix("t^") {
        p.parse::<f64>()?
    } else {
        bail!("weight must look like `t`, `t^0.6`, or `0.5*t^1.2`, got `{text}`")
    };
    Ok(WeightProfile::power(coeff, exponent, PI))
}

#[derive(Serialize)]
struct EnergyOut {
    version: &'static str,
    seed: u64,
    modulus: Option<String>,
    weight: Option<String>,
    grid: usize,
    tol: f64,
    series: dspace_core::energy::SeriesEnergy,
    carleson: dspace_core::energy::CarlesonEnergy,
    j_default: Option<dspace_core::energy::JValue>,
    report: Option<dspace_core::energy::EnergyReport>,
}

fn run_energy(cmd: EnergyCmd, seed: u64) -> Result<i32> {
    if !cmd.grid.is_power_of_two() {
        bail!("--grid must be a power of two");
    }
    if let Some(text) = &cmd.modulus {
        let parsed = expr::parse_modulus(text)?;
        let modulus = if parsed.dist_power > 0.0 {
            if !parsed.roots.is_empty() {
                bail!("mixing abs(...) factors with dist is not supported; use --weight on a set");
            }
            let set = cmd.select.build()?;
            BoundaryModulus::Distance {
                set,
                weight: WeightProfile::power(parsed.scale, parsed.dist_power, PI),
            }
        } else if parsed.roots.is_empty() {
            BoundaryModulus::Constant(parsed.scale)
        } else {
            BoundaryModulus::PolyAbs { factors: parsed.roots.clone(), scale: parsed.scale }
        };
        let f = outer_from_modulus(&modulus, cmd.grid)?;
        let series = series_energy(&f);
        let carleson = carleson_energy(&modulus, cmd.tol, cmd.max_grid_log2)?;
        let j_default = match &modulus {
            BoundaryModulus::Distance { set, weight } => {
                Some(j_functional(&set.counting_function(), weight, JMode::Default))
            }
            _ => None,
        };
        let out = EnergyOut {
            version: dspace_core::VERSION,
            seed,
            modulus: cmd.modulus.clone(),
            weight: None,
            grid: cmd.grid,
            tol: cmd.tol,
            series,
            carleson,
            j_default,
            report: None,
        };
        write_output(&cmd.out, &to_pretty(&out)?)?;
        return Ok(EXIT_OK);
    }

    let weight_text = cmd
        .weight
        .clone()
        .ok_or_else(|| anyhow!("provide --modulus, or a set plus --weight"))?;
    let weight = parse_weight(&weight_text)?;
    let set = cmd.select.build()?;
    let set = if set.total_measure() > 0.0 { set.endpoint_surrogate() } else { set };
    let opts = TwoSidedOptions {
        series_grid: cmd.grid,
        carleson_tol: cmd.tol,
        carleson_max_grid_log2: cmd.max_grid_log2,
        ..TwoSidedOptions::default()
    };
    let report = two_sided_report(&set, &weight, cmd.gamma, &opts)?;
    let out = EnergyOut {
        version: dspace_core::VERSION,
        seed,
        modulus: None,
        weight: Some(weight_text),
        grid: cmd.grid,
        tol: cmd.tol,
        series: report.series.clone(),
        carleson: report.carleson.clone(),
        j_default: Some(report.j_default.clone()),
        report: Some(report),
    };
    write_output(&cmd.out, &to_pretty(&out)?)?;
    Ok(EXIT_OK)
}

fn run_regularize(cmd: RegularizeCmd) -> Result<i32> {
    let set = cmd.select.build()?;
    let t_min = PI * cmd.t_min_factor;
    let measure = set.analysis_measure(t_min / 10.0);
    let phi = build_phi(&measure, cmd.beta)?;
    let res = build_psi(
        &phi,
        cmd.alpha,
        cmd.beta,
        1usize << cmd.grid_log2,
        cmd.t_min_factor,
        Some(capcond_diagnostic(&set).verdict),
    )?;

    let mut transform = String::from("x,u,u_tilde,in_sun\n");
    let reg = &res.regularization;
    for i in 0..reg.input.xs.len() {
        transform.push_str(&format!(
            "{},{},{},{}\n",
            reg.input.xs[i],
            reg.input.values[i],
            reg.envelope[i],
            u8::from(reg.contact[i])
        ));
    }
    std::fs::write(format!("{}-transform.csv", cmd.out_prefix), transform)?;

    let mut profile = String::from("t,phi,psi,t_beta\n");
    let n = 512;
    for i in 0..n {
        let t = res.t_min * (res.t_max / res.t_min).powf(i as f64 / (n - 1) as f64);
        profile.push_str(&format!(
            "{},{},{},{}\n",
            t,
            phi.value(t),
            res.psi.value(t),
            t.powf(cmd.beta)
        ));
    }
    std::fs::write(format!("{}-psi.csv", cmd.out_prefix), profile)?;
    eprintln!(
        "wrote {}-transform.csv and {}-psi.csv (divergence evidence: {:?})",
        cmd.out_prefix, cmd.out_prefix, res.divergence.growth
    );
    Ok(EXIT_OK)
}

fn run_certify(cmd: CertifyCmd, seed: u64) -> Result<i32> {
    let set = cmd.select.build()?;
    let (k_start, k_cap) = {
        let (a, b) = cmd
            .delta_schedule
            .split_once(':')
            .ok_or_else(|| anyhow!("--delta-schedule must be start:cap"))?;
        (a.parse::<u32>()?, b.parse::<u32>()?)
    };
    let config = PipelineConfig {
        alpha: cmd.alpha,
        beta: cmd.beta,
        gamma: cmd.gamma,
        delta_k_start: k_start,
        delta_k_cap: k_cap,
        fft_grid: cmd.grid,
        ..PipelineConfig::default()
    };
    let report = cyclicity_check(&set, &config)?;

    #[derive(Serialize)]
    struct CertifyOut<'a> {
        seed: u64,
        #[serde(flatten)]
        report: &'a dspace_core::cyclicity::CyclicityReport,
    }
    write_output(&cmd.out, &to_pretty(&CertifyOut { seed, report: &report })?)?;

    if let (Some(csv_path), Some(cert)) = (&cmd.csv, &report.certificate) {
        let mut csv = String::from(
            "delta,a_delta,eta_delta,f0,j,frac_below_090,piece0,mid,knot_ok,concave\n",
        );
        for r in &cert.records {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.delta,
                r.a_delta,
                r.eta_delta,
                r.f0,
                r.j,
                r.frac_below_090,
                r.piece0_value,
                r.mid_value,
                u8::from(r.knot_ok),
                u8::from(r.concave)
            ));
        }
        std::fs::write(csv_path, csv)?;
    }

    Ok(match report.conclusion {
        Conclusion::SufficientConditionsMet => EXIT_OK,
        Conclusion::NotMet | Conclusion::Inconclusive => EXIT_NOT_MET,
    })
}

#[derive(Serialize)]
struct FusionInstance {
    lhs: f64,
    rhs: f64,
    holds: bool,
}

#[derive(Serialize)]
struct FusionOut {
    version: &'static str,
    seed: u64,
    instances: usize,
    all_hold: bool,
    worst_margin: f64,
    results: Vec<FusionInstance>,
}

fn run_fusion(cmd: FusionCmd, seed: u64) -> Result<i32> {
    let mut rng = SplitMix64::new(seed);
    let mut results = Vec::with_capacity(cmd.instances);
    let mut all_hold = true;
    let mut worst = f64::INFINITY;
    let opts = FusionOptions {
        carleson_tol: cmd.tol,
        carleson_max_grid_log2: 12,
        hypothesis_grid: 1024,
    };
    for _ in 0..cmd.instances {
        let n_pts = 2 + rng.below(cmd.set_points.max(3) - 1);
        let pts: Vec<f64> = (0..n_pts).map(|_| rng.range(0.0, 2.0 * PI)).collect();
        let set = CircleSet::from_points(&pts)?;
        let n_weights = 1 + rng.below(3);
        let weights: Vec<WeightProfile> = (0..n_weights)
            .map(|_| {
                let a = rng.range(1.0, 1.6);
                // w(t) = (t/π)^a satisfies w ≤ t/π for a ≥ 1.
                WeightProfile::power(PI.powf(-a), a, PI)
            })
            .collect();
        let assignment: Vec<usize> =
            (0..set.arcs().len()).map(|_| rng.below(n_weights)).collect();
        let rep = fusion_bound_check(&set, &weights, &assignment, &opts)?;
        all_hold &= rep.holds;
        worst = worst.min(rep.rhs + rep.slack - rep.lhs);
        results.push(FusionInstance { lhs: rep.lhs, rhs: rep.rhs, holds: rep.holds });
    }
    let out = FusionOut {
        version: dspace_core::VERSION,
        seed,
        instances: cmd.instances,
        all_hold,
        worst_margin: worst,
        results,
    };
    write_output(&cmd.out, &to_pretty(&out)?)?;
    Ok(if all_hold { EXIT_OK } else { EXIT_NOT_MET })
}
