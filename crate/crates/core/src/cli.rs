//! The `rnls` command line.
//!
//! Exit codes: 0 success, 1 invariant failure, 2 configuration error,
//! 3 resource guard (enumeration budget or integer overflow).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::check::run_checks;
use crate::config::{EquationChoice, ExperimentConfig, InitialSpec};
use crate::dynamics::{ModelParams, ObservableSpec};
use crate::error::{Error, Result};
use crate::lattice::SpectralGrid;
use crate::resonance::{enumerate_resonance_module_with_budget, enumerate_resonant_tuples_with_budget, ResonanceTable};
use crate::stats::{
    convergence_report, ks_distance, ou_mean_action, run_ensemble, stationary_estimate,
    ConvergenceSetup, EquationKind, StationaryEstimate, StationarySetup, FULL_STREAM_BASE,
};

#[derive(Debug, Parser)]
#[command(name = "rnls", version, about = "Resonant averaging for the damped/driven NLS equation on a torus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML experiment file; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Master seed; overrides `run.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Also write gnuplot scripts.
    #[arg(long, global = true)]
    pub plots: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Enumerate resonant tuples (and optionally the resonance module).
    Resonances,
    /// Run the invariant suite.
    Check,
    /// Integrate one ensemble and write its observables.
    Simulate,
    /// Compare full-equation ensembles along the ν ladder with the effective equation.
    Compare,
    /// Estimate stationary laws from two initial conditions.
    Stationary,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Budget { .. } | Error::Overflow(_) => 3,
        Error::BlowUp { .. } => 1,
        _ => 2,
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    run(&cli)
}

pub fn run(cli: &Cli) -> i32 {
    let result = (|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = cli.threads {
            if n == 0 {
                return Err(Error::Config("--threads must be positive".into()));
            }
            builder = builder.num_threads(n);
        }
        let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
        pool.install(|| dispatch(cli))
    })();
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.run.seed = seed;
    }
    let cfg = cfg.resolve()?;
    let params = cfg.params()?;
    for w in params.warnings() {
        eprintln!("warning: {w}");
    }
    let mut out = Output::new(&cli.out)?;
    out.write("resolved.toml", &cfg.to_toml()?)?;
    let code = match cli.command {
        Command::Resonances => cmd_resonances(&cfg, &params, &mut out)?,
        Command::Check => cmd_check(&cfg, &params, &mut out)?,
        Command::Simulate => cmd_simulate(&cfg, &params, &mut out, cli.plots)?,
        Command::Compare => cmd_compare(&cfg, &params, &mut out, cli.plots)?,
        Command::Stationary => cmd_stationary(&cfg, &params, &mut out, cli.plots)?,
    };
    out.manifest(cli.command, &cfg)?;
    Ok(code)
}

struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: String,
    package: &'static str,
    version: &'static str,
    master_seed: u64,
    stream_rule: String,
    config: &'a ExperimentConfig,
    files: &'a [String],
}

impl Output {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Output {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, content: &str) -> Result<()> {
        fs::write(self.dir.join(name), content)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(name, &s)
    }

    fn manifest(&mut self, cmd: Command, cfg: &ExperimentConfig) -> Result<()> {
        let m = Manifest {
            command: format!("{cmd:?}").to_lowercase(),
            package: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            master_seed: cfg.run.seed,
            stream_rule: format!(
                "ChaCha8 seeded with master_seed; effective path i uses stream i, full path i uses stream {FULL_STREAM_BASE} + i, random initial fields use stream {}; the stationary run from the random field uses master_seed + 1",
                crate::config::INITIAL_FIELD_STREAM
            ),
            config: cfg,
            files: &self.files,
        };
        let mut s = serde_json::to_string_pretty(&m)?;
        s.push('\n');
        fs::write(self.dir.join("manifest.json"), s)?;
        Ok(())
    }
}

fn wave_label(grid: &SpectralGrid, k: usize) -> String {
    let l = grid.mode(k);
    l.0[..grid.dim()].iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn vec_label(s: &[i64]) -> String {
    s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn table_for(cfg: &ExperimentConfig, params: &ModelParams) -> Result<ResonanceTable> {
    enumerate_resonant_tuples_with_budget(&params.grid, params.q, cfg.resonances.tuple_budget as u128)
}

fn cmd_resonances(cfg: &ExperimentConfig, params: &ModelParams, out: &mut Output) -> Result<i32> {
    let grid = &params.grid;
    let table = table_for(cfg, params)?;
    let summary = table.summary(grid);
    let mut modes = String::from("index,wave,eigen_int\n");
    for k in 0..grid.len() {
        let _ = writeln!(modes, "{k},{},{}", wave_label(grid, k), grid.eigen_int()[k]);
    }
    out.write("modes.csv", &modes)?;
    out.write("resonances.csv", &table.to_csv())?;
    out.json("summary.json", &summary)?;
    println!(
        "d = {}, N = {}, q* = {}: {} resonant tuples over {} modes (trivial pairing: {})",
        grid.dim(),
        grid.cutoff(),
        params.q,
        summary.total,
        grid.len(),
        summary.trivial
    );
    let m = cfg.resonances.module_order;
    if m > 0 {
        let module = enumerate_resonance_module_with_budget(grid, m, cfg.resonances.module_budget as u128)?;
        let mut csv = String::from("index,l1,s\n");
        for (i, r) in module.iter().enumerate() {
            let _ = writeln!(csv, "{i},{},{}", r.l1, vec_label(&r.s));
        }
        out.write("resonance_module.csv", &csv)?;
        println!("resonance module up to l1 = {m}: {} vectors", module.len());
    }
    Ok(0)
}

fn cmd_check(cfg: &ExperimentConfig, params: &ModelParams, out: &mut Output) -> Result<i32> {
    let mut table = table_for(cfg, params)?;
    if let Some([k, i]) = cfg.check.drop_tuple {
        if k >= table.n_modes() || i >= table.count(k) {
            return Err(Error::Config(format!("check.drop_tuple [{k}, {i}] does not name a stored tuple")));
        }
        table = table.without_tuple(k, i);
    }
    let report = run_checks(params, &table, &cfg.check.options(), cfg.run.seed)?;
    out.json("check.json", &report)?;
    for c in &report.checks {
        println!(
            "{} {:<28} error {:.3e} (tolerance {:.0e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.error,
            c.tolerance
        );
    }
    Ok(if report.passed { 0 } else { 1 })
}

fn cmd_simulate(cfg: &ExperimentConfig, params: &ModelParams, out: &mut Output, plots: bool) -> Result<i32> {
    let grid = &params.grid;
    let table = table_for(cfg, params)?;
    let run = &cfg.run;
    let kind = match run.equation {
        EquationChoice::Effective => EquationKind::Effective,
        EquationChoice::Full => EquationKind::Full { nu: run.nu.unwrap() },
    };
    let obs = ObservableSpec {
        resonant: cfg.resonant_vectors(grid)?,
        nonresonant: cfg.nonresonant_vectors(grid)?,
        record_every: run.record_every.unwrap(),
        snapshots: false,
    };
    let v0 = cfg.initial_field(run.initial, params.n());
    let ens = run_ensemble(params, &table, kind, &v0, run.paths, run.horizon, run.dt.unwrap(), run.seed, &obs, run.guard)?;

    let modes = cfg.tracked_modes(grid)?;
    let mut csv = String::from("path,tau,norm_h0");
    for &k in &modes {
        let _ = write!(csv, ",I[{}]", wave_label(grid, k));
    }
    csv.push('\n');
    let mut phases = String::from("path,tau,series,resonant,value\n");
    let mut flags = String::from("path,flagged,tau,norm_h0\n");
    for (p, t) in ens.trajectories.iter().enumerate() {
        for (i, tau) in t.times.iter().enumerate() {
            let _ = write!(csv, "{p},{tau:e},{:e}", t.norm_h0[i]);
            for &k in &modes {
                let _ = write!(csv, ",{:e}", t.actions[i][k]);
            }
            csv.push('\n');
            for (j, ps) in t.phases.iter().enumerate() {
                let v = ps.values[i].map(|x| format!("{x:e}")).unwrap_or_default();
                let _ = writeln!(phases, "{p},{tau:e},{j},{},{v}", ps.resonant);
            }
        }
        match t.blow_up {
            Some(b) => {
                let _ = writeln!(flags, "{p},true,{:e},{:e}", b.tau, b.norm);
            }
            None => {
                let _ = writeln!(flags, "{p},false,,");
            }
        }
    }
    out.write("actions.csv", &csv)?;
    if !obs.resonant.is_empty() || !obs.nonresonant.is_empty() {
        out.write("phases.csv", &phases)?;
    }
    out.write("flags.csv", &flags)?;
    if matches!(kind, EquationKind::Full { .. }) {
        let mut res = String::from("path");
        for &k in &modes {
            let _ = write!(res, ",R[{}]", wave_label(grid, k));
        }
        res.push('\n');
        for (p, t) in ens.trajectories.iter().enumerate() {
            let _ = write!(res, "{p}");
            for &k in &modes {
                let _ = write!(res, ",{:e}", t.residual.as_ref().map_or(0.0, |r| r[k]));
            }
            res.push('\n');
        }
        out.write("residual.csv", &res)?;
    }

    #[derive(Serialize)]
    struct Summary {
        equation: EquationKind,
        paths: usize,
        dt: f64,
        horizon: f64,
        flagged: usize,
        missing_fraction: f64,
        final_mean_action: Vec<Option<f64>>,
    }
    let final_mean_action = modes
        .iter()
        .map(|&k| ens.final_law(crate::stats::Observable::Action(k)).ok().filter(|l| !l.is_empty()).map(|l| l.mean()))
        .collect();
    let summary = Summary {
        equation: kind,
        paths: ens.len(),
        dt: ens.dt,
        horizon: ens.horizon,
        flagged: ens.flagged(),
        missing_fraction: ens.missing_fraction(),
        final_mean_action,
    };
    out.json("summary.json", &summary)?;
    if plots {
        out.write(
            "actions.gp",
            "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'tau'\nset ylabel 'I_k'\nplot 'actions.csv' using 2:4 every ::0 with dots\n",
        )?;
    }
    println!("{} paths, {} flagged", ens.len(), ens.flagged());
    Ok(0)
}

fn cmd_compare(cfg: &ExperimentConfig, params: &ModelParams, out: &mut Output, plots: bool) -> Result<i32> {
    let grid = &params.grid;
    let table = table_for(cfg, params)?;
    let setup = ConvergenceSetup {
        ladder: cfg.run.ladder.clone(),
        paths: cfg.run.paths,
        horizon: cfg.run.horizon,
        master_seed: cfg.run.seed,
        modes: cfg.tracked_modes(grid)?,
        resonant: cfg.resonant_vectors(grid)?,
        nonresonant: cfg.nonresonant_vectors(grid)?,
        window_samples: cfg.observables.window_samples,
        bootstrap_reps: cfg.observables.bootstrap_reps,
        effective_dt: None,
    };
    let v0 = cfg.initial_field(cfg.run.initial, params.n());
    let report = convergence_report(params, &table, &v0, &setup)?;
    out.write("convergence.json", &(report.to_json()? + "\n"))?;
    out.write("convergence.csv", &report.to_csv())?;
    if plots {
        out.write(
            "ladder.gp",
            "set datafile separator ','\nset logscale x\nset xlabel 'nu'\nset ylabel 'KS at T'\n\
             plot '< grep ks_at_t convergence.csv' using 1:4:5 with yerrorbars title 'per-mode KS'\n",
        )?;
    }
    for e in &report.entries {
        let worst = e.modes.iter().map(|m| m.ks_at_t).fold(0.0, f64::max);
        let resid = e.modes.iter().map(|m| m.residual_mean).fold(0.0, f64::max);
        println!("nu = {:<8} max KS = {worst:.4}  max residual = {resid:.4e}  flagged = {}", e.nu, e.flagged);
    }
    Ok(0)
}

#[derive(Serialize)]
struct ModeAgreement {
    k: usize,
    wave: String,
    ks_between_initial_conditions: f64,
    linear_reference: f64,
}

#[derive(Serialize)]
struct StationaryOutput<'a> {
    from_zero: &'a StationaryEstimate,
    from_random: &'a StationaryEstimate,
    agreement: Vec<ModeAgreement>,
}

fn cmd_stationary(cfg: &ExperimentConfig, params: &ModelParams, out: &mut Output, plots: bool) -> Result<i32> {
    let grid = &params.grid;
    let table = table_for(cfg, params)?;
    let st = &cfg.stationary;
    let kind = match cfg.run.equation {
        EquationChoice::Effective => EquationKind::Effective,
        EquationChoice::Full => EquationKind::Full { nu: cfg.run.nu.unwrap() },
    };
    let setup = StationarySetup {
        kind,
        burn_in: st.burn_in,
        horizon: st.horizon,
        dt: st.dt,
        record_every: st.record_every,
        paths: st.paths,
        master_seed: cfg.run.seed,
        shells: cfg.observables.shells.clone(),
    };
    let zero = cfg.initial_field(InitialSpec::Zero, params.n());
    let random = cfg.initial_field(InitialSpec::Random { norm: st.initial_norm }, params.n());
    let a = stationary_estimate(params, &table, &zero, &setup)?;
    // independent noise for the second initial condition
    let other = StationarySetup {
        master_seed: cfg.run.seed.wrapping_add(1),
        ..setup.clone()
    };
    let b = stationary_estimate(params, &table, &random, &other)?;
    let mut agreement = Vec::with_capacity(params.n());
    for k in 0..params.n() {
        agreement.push(ModeAgreement {
            k,
            wave: wave_label(grid, k),
            ks_between_initial_conditions: ks_distance(&a.time_laws[k], &b.time_laws[k])?,
            linear_reference: ou_mean_action(params.noise.b[k], params.gamma.gamma[k]),
        });
    }

    let mut spec = String::from("lo,hi,modes,energy_from_zero,energy_from_random\n");
    for (x, y) in a.spectrum.iter().zip(&b.spectrum) {
        let e = |v: Option<f64>| v.map(|v| format!("{v:e}")).unwrap_or_default();
        let _ = writeln!(spec, "{},{},{},{},{}", x.lo, x.hi, x.modes, e(x.energy), e(y.energy));
    }
    out.write("spectrum.csv", &spec)?;

    let qs = [0.1, 0.25, 0.5, 0.75, 0.9];
    let mut laws = String::from("initial,wave,mean,q10,q25,q50,q75,q90\n");
    for (name, est) in [("zero", &a), ("random", &b)] {
        for (k, law) in est.time_laws.iter().enumerate() {
            let mut s = law.samples.clone();
            s.sort_by(f64::total_cmp);
            let _ = write!(laws, "{name},{},{:e}", wave_label(grid, k), law.mean());
            for q in qs {
                let idx = ((s.len() as f64 - 1.0) * q).round() as usize;
                let _ = write!(laws, ",{:e}", s[idx]);
            }
            laws.push('\n');
        }
    }
    out.write("laws.csv", &laws)?;
    let worst = agreement.iter().map(|m| m.ks_between_initial_conditions).fold(0.0, f64::max);
    out.json(
        "stationary.json",
        &StationaryOutput {
            from_zero: &a,
            from_random: &b,
            agreement,
        },
    )?;
    if plots {
        out.write(
            "spectrum.gp",
            "set datafile separator ','\nset key autotitle columnhead\nset xlabel '|k|'\nset ylabel 'E_r'\n\
             plot 'spectrum.csv' using (($1+$2)/2):4 with linespoints, '' using (($1+$2)/2):5 with linespoints\n",
        )?;
    }
    println!("stationary laws: max KS between initial conditions = {worst:.4}, flagged = {} / {}", a.flagged, b.flagged);
    Ok(0)
}
