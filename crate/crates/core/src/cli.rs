//! The `mbl` command line.
//!
//! Every subcommand accepts `--config FILE`, a JSON object whose keys are
//! the subcommand's long flag names with `-` written as `_`; its values
//! override the flags, and unknown keys are rejected. Numbers are printed
//! with 17 significant digits, which round-trips every `f64`.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure or a failed
//! tolerance, 3 budget exceeded. Errors are reported on stderr as
//! `{"error": kind, "message": text, "exit_code": n}`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::asymptotics::{half_line_gap, tw_constants};
use crate::error::{Error, Result};
use crate::exact::{enumerate_pp, log_partition_fn, pp_weight, write_weight_csv};
use crate::fields::{sample_geom_field, Extent, ModelParams, RandomSeed, DEFAULT_TV_TOL};
use crate::fredholm::{fdet_discrete, fdet_gap_from_zero, fdet_interval_adaptive, FredholmResult};
use crate::harness::{experiment, sample_statistics, ExperimentConfig, ExperimentId, Sampler};
use crate::kernels::{
    airy_kernel, bessel_kernel, kc_eval, kd_eval, khe_default_contour, khe_integral, khe_series, khe_tilde, AiryKernel,
    BesselKernel, KcKernel, KdKernel, KheKernel, KheTildeKernel, SharedKernel, KHE_TOL,
};
use crate::tableaux::{burge_column_insert, rsk_row_insert};

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "MBL_THREADS";

#[derive(Parser, Debug)]
#[command(name = "mbl", version, about = "Muttalib-Borodin plane partitions, last-passage percolation and their limit laws")]
struct Cli {
    /// Monte Carlo worker threads (default: $MBL_THREADS, else all cores).
    /// Results do not depend on this value.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample last-passage times. CSV columns: sample,value
    SampleLpp(SampleLpp),
    /// Sample a plane partition as the insertion image of a geometric field.
    /// CSV columns: row,col,value (1-based)
    SamplePp(SamplePp),
    /// Partition function and boxed enumeration of the exact measure.
    /// With --out, CSV columns: plane_partition,left,central,right,weight
    ExactCheck(ExactCheck),
    /// Evaluate one kernel entry K(x, y).
    KernelEval(KernelEval),
    /// Fredholm determinant det(1 - K) on a lattice half-line or an interval.
    Fredholm(Fredholm),
    /// Saddle-point constants (b, z_c, v_c, c1, c2) of the Tracy-Widom regime.
    Constants(Constants),
    /// Run an experiment and write its report. Grid CSV columns:
    /// point,empirical,reference,abs_diff
    Experiment(ExperimentArgs),
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
enum Model {
    Geo,
    Pow,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
enum Insertion {
    Rsk,
    Burge,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
enum KernelName {
    /// discrete kernel on half-integers (a, q, eta, theta, rows, cols)
    Kd,
    /// hard-edge kernel, series route (alpha, eta, theta)
    Khe,
    /// hard-edge kernel, contour route (alpha, eta, theta)
    KheIntegral,
    /// hard-edge kernel in exponential variables (alpha, eta, theta)
    KheTilde,
    /// Bessel kernel (alpha)
    Bessel,
    /// finite-size continuous kernel on (0, 1) (alpha, eta, theta, rows, cols)
    Kc,
    /// Airy kernel
    Airy,
}

/// Parameters shared by the model-driven subcommands.
#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(deny_unknown_fields)]
struct ParamArgs {
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// M, a positive integer or "inf"
    #[arg(long)]
    rows: Option<Extent>,
    /// N, a positive integer or "inf"
    #[arg(long)]
    cols: Option<Extent>,
}

impl ParamArgs {
    fn get(v: Option<f64>, name: &str) -> Result<f64> {
        v.ok_or_else(|| Error::InvalidInput(format!("missing --{name}")))
    }

    fn geometric(&self) -> Result<ModelParams> {
        ModelParams {
            a: Self::get(self.a, "a")?,
            q: Self::get(self.q, "q")?,
            eta: Self::get(self.eta, "eta")?,
            theta: Self::get(self.theta, "theta")?,
            alpha: self.alpha.unwrap_or(0.0),
            m: self.rows.unwrap_or(Extent::Infinite),
            n: self.cols.unwrap_or(Extent::Infinite),
        }
        .validated()
    }

    fn power(&self) -> Result<ModelParams> {
        let (Some(Extent::Finite(m)), Some(Extent::Finite(n))) = (self.rows, self.cols) else {
            return Err(Error::InfiniteExtent("the power model needs finite --rows and --cols".into()));
        };
        ModelParams::power(Self::get(self.alpha, "alpha")?, Self::get(self.eta, "eta")?, Self::get(self.theta, "theta")?, m, n)
    }

    fn he(&self) -> Result<(f64, f64, f64)> {
        Ok((Self::get(self.alpha, "alpha")?, Self::get(self.eta, "eta")?, Self::get(self.theta, "theta")?))
    }

    fn finite_mn(&self) -> Result<(usize, usize)> {
        match (self.rows, self.cols) {
            (Some(Extent::Finite(m)), Some(Extent::Finite(n))) => Ok((m, n)),
            _ => Err(Error::InfiniteExtent("finite --rows and --cols required".into())),
        }
    }
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
struct SampleLpp {
    #[arg(long, value_enum, default_value = "geo")]
    model: Model,
    /// Statistic: L1geo, L2geo, corner-RSK, corner-Burge, L1pow or L2pow
    /// (default: L1 of the model)
    #[arg(long)]
    sampler: Option<Sampler>,
    #[command(flatten)]
    #[serde(flatten)]
    params: ParamArgs,
    /// Number of samples
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
struct SamplePp {
    #[command(flatten)]
    #[serde(flatten)]
    params: ParamArgs,
    #[arg(long, value_enum, default_value = "rsk")]
    insertion: Insertion,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
struct ExactCheck {
    #[command(flatten)]
    #[serde(flatten)]
    params: ParamArgs,
    /// Largest entry of the enumerated plane partitions
    #[arg(long)]
    h: Option<u64>,
    /// Per-plane-partition weight CSV
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
struct KernelEval {
    #[arg(long, value_enum)]
    kernel: Option<KernelName>,
    #[command(flatten)]
    #[serde(flatten)]
    params: ParamArgs,
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    y: Option<f64>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
struct Fredholm {
    #[arg(long, value_enum)]
    kernel: Option<KernelName>,
    #[command(flatten)]
    #[serde(flatten)]
    params: ParamArgs,
    /// Discrete kernels: the lattice {l+1/2, l+3/2, ...}
    #[arg(long, allow_negative_numbers = true)]
    l: Option<i64>,
    /// Continuous kernels: left end of the interval
    #[arg(long, allow_negative_numbers = true)]
    from: Option<f64>,
    /// Continuous kernels: right end (default: infinity)
    #[arg(long, allow_negative_numbers = true)]
    to: Option<f64>,
    /// Target accuracy
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
struct Constants {
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(long)]
    id: ExperimentId,
    /// JSON overrides of the experiment's parameters
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report JSON (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Grid CSV
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn dispatch(args: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                print!("{e}");
                return 0;
            }
            return report_error(&Error::InvalidInput(e.to_string().trim().to_string()));
        }
    };
    let threads = match cli.threads.map(Ok).or_else(|| std::env::var(THREADS_ENV).ok().map(|v| parse_threads(&v))) {
        Some(Ok(t)) => t,
        Some(Err(e)) => return report_error(&e),
        None => 0,
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => return report_error(&Error::InvalidInput(format!("thread pool: {e}"))),
    };
    match pool.install(|| run(cli.command)) {
        Ok(code) => code,
        Err(e) => report_error(&e),
    }
}

fn parse_threads(v: &str) -> Result<usize> {
    v.trim().parse().map_err(|_| Error::InvalidInput(format!("{THREADS_ENV} must be a non-negative integer, got {v:?}")))
}

fn report_error(e: &Error) -> i32 {
    let code = e.exit_code();
    eprintln!("{}", json!({"error": e.kind(), "message": e.to_string(), "exit_code": code}));
    code
}

/// Lays the JSON object in `config` over `flags`.
fn with_config<T: Serialize + DeserializeOwned>(flags: T, config: &Option<PathBuf>) -> Result<T> {
    let Some(path) = config else {
        return Ok(flags);
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let over: Value = serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    let Value::Object(over) = over else {
        return Err(Error::InvalidInput("config must be a JSON object".into()));
    };
    let Value::Object(mut base) = serde_json::to_value(flags).expect("arguments serialize") else {
        unreachable!("argument structs serialize to objects");
    };
    base.retain(|_, v| !v.is_null());
    base.extend(over);
    serde_json::from_value(Value::Object(base)).map_err(|e| Error::InvalidInput(format!("config: {e}")))
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn create(p: &Path) -> Result<File> {
    File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
}

fn run(cmd: Command) -> Result<i32> {
    match cmd {
        Command::SampleLpp(a) => {
            let cfg = a.config.clone();
            sample_lpp(with_config(a, &cfg)?)
        }
        Command::SamplePp(a) => {
            let cfg = a.config.clone();
            sample_pp(with_config(a, &cfg)?)
        }
        Command::ExactCheck(a) => {
            let cfg = a.config.clone();
            exact_check(with_config(a, &cfg)?)
        }
        Command::KernelEval(a) => {
            let cfg = a.config.clone();
            kernel_eval(with_config(a, &cfg)?)
        }
        Command::Fredholm(a) => {
            let cfg = a.config.clone();
            fredholm(with_config(a, &cfg)?)
        }
        Command::Constants(a) => {
            let cfg = a.config.clone();
            constants(with_config(a, &cfg)?)
        }
        Command::Experiment(a) => run_experiment(a),
    }
}

fn sample_lpp(a: SampleLpp) -> Result<i32> {
    let sampler = a.sampler.unwrap_or(match a.model {
        Model::Geo => Sampler::L1Geo,
        Model::Pow => Sampler::L1Pow,
    });
    if sampler.is_geometric() != (a.model == Model::Geo) {
        return Err(Error::InvalidInput(format!("sampler {sampler} does not belong to model {:?}", a.model)));
    }
    let p = match a.model {
        Model::Geo => a.params.geometric()?,
        Model::Pow => a.params.power()?,
    };
    let values = sample_statistics(&[sampler], &p, a.n, a.seed)?.pop().expect("one sampler");
    let mut w = open_out(&a.out)?;
    match a.format {
        Format::Csv => {
            writeln!(w, "sample,value")?;
            for (k, v) in values.iter().enumerate() {
                writeln!(w, "{k},{}", num(*v))?;
            }
        }
        Format::Json => {
            let body = json!({"sampler": sampler, "params": p, "seed": a.seed, "values": values});
            writeln!(w, "{}", serde_json::to_string_pretty(&body).expect("serializes"))?;
        }
    }
    w.flush()?;
    Ok(0)
}

fn sample_pp(a: SamplePp) -> Result<i32> {
    let p = a.params.geometric()?;
    let field = sample_geom_field(&p, RandomSeed::new(a.seed, 0), DEFAULT_TV_TOL)?;
    let pp = match a.insertion {
        Insertion::Rsk => rsk_row_insert(&field.entries),
        Insertion::Burge => burge_column_insert(&field.entries),
    };
    let mut w = open_out(&a.out)?;
    match a.format {
        Format::Csv => {
            writeln!(w, "row,col,value")?;
            for (i, row) in pp.to_rows().iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    writeln!(w, "{},{},{v}", i + 1, j + 1)?;
                }
            }
        }
        Format::Json => {
            let body = json!({"params": p, "seed": a.seed, "bbox": field.bbox, "tv_tol": field.tv_tol, "plane_partition": pp.to_rows()});
            writeln!(w, "{}", serde_json::to_string_pretty(&body).expect("serializes"))?;
        }
    }
    w.flush()?;
    Ok(0)
}

fn exact_check(a: ExactCheck) -> Result<i32> {
    let p = a.params.geometric()?;
    let log_z = log_partition_fn(&p)?;
    let mut body = json!({"params": p, "log_partition_fn": log_z, "partition_fn": log_z.exp()});
    if let Some(h) = a.h {
        let (m, n) = a.params.finite_mn()?;
        let mut mass = 0.0;
        let mut count = 0u64;
        for pp in enumerate_pp(m, n, h)? {
            mass += pp_weight(&pp, &p).value;
            count += 1;
        }
        body["h"] = json!(h);
        body["enumerated"] = json!(count);
        body["boxed_mass"] = json!(mass);
        body["boxed_fraction"] = json!(mass / log_z.exp());
        if let Some(out) = &a.out {
            let mut w = BufWriter::new(create(out)?);
            write_weight_csv(&mut w, m, n, h, &p)?;
            w.flush()?;
        }
        // the three slice identities on the same box
        let cfg = ExperimentConfig {
            a: Some(p.a),
            q: Some(p.q),
            eta: Some(p.eta),
            theta: Some(p.theta),
            m: Some(m),
            n: Some(n),
            h: Some(h),
            ..Default::default()
        };
        let r = experiment(ExperimentId::Prop1, &cfg)?;
        body["checks"] = json!(r.checks);
        body["pass"] = json!(r.pass);
        println!("{}", serde_json::to_string_pretty(&body).expect("serializes"));
        return Ok(if r.pass { 0 } else { 2 });
    }
    println!("{}", serde_json::to_string_pretty(&body).expect("serializes"));
    Ok(0)
}

fn need_kernel(k: Option<KernelName>) -> Result<KernelName> {
    k.ok_or_else(|| Error::InvalidInput("missing --kernel".into()))
}

fn kernel_eval(a: KernelEval) -> Result<i32> {
    let x = a.x.ok_or_else(|| Error::InvalidInput("missing --x".into()))?;
    let y = a.y.ok_or_else(|| Error::InvalidInput("missing --y".into()))?;
    let pa = &a.params;
    let v = match need_kernel(a.kernel)? {
        KernelName::Kd => {
            let p = pa.geometric()?;
            kd_eval(x, y, &p, &KdKernel::default_contour(&p)?)?
        }
        KernelName::Khe => {
            let (al, e, t) = pa.he()?;
            khe_series(x, y, al, e, t, KHE_TOL)?
        }
        KernelName::KheIntegral => {
            let (al, e, t) = pa.he()?;
            khe_integral(x, y, al, e, t, &khe_default_contour(x, y, al, e, t)?)?
        }
        KernelName::KheTilde => {
            let (al, e, t) = pa.he()?;
            khe_tilde(x, y, al, e, t)?
        }
        KernelName::Bessel => bessel_kernel(x, y, ParamArgs::get(pa.alpha, "alpha")?)?,
        KernelName::Kc => {
            let (al, e, t) = pa.he()?;
            let (m, n) = pa.finite_mn()?;
            kc_eval(x, y, al, e, t, m, n)?
        }
        KernelName::Airy => airy_kernel(x, y)?,
    };
    println!("{}", num(v));
    Ok(0)
}

fn shared_kernel(name: KernelName, pa: &ParamArgs) -> Result<SharedKernel> {
    Ok(match name {
        KernelName::Kd => std::sync::Arc::new(KdKernel::new(&pa.geometric()?)?),
        KernelName::Khe | KernelName::KheIntegral => {
            let (al, e, t) = pa.he()?;
            std::sync::Arc::new(KheKernel::new(al, e, t)?)
        }
        KernelName::KheTilde => {
            let (al, e, t) = pa.he()?;
            std::sync::Arc::new(KheTildeKernel::new(al, e, t)?)
        }
        KernelName::Bessel => std::sync::Arc::new(BesselKernel::new(ParamArgs::get(pa.alpha, "alpha")?)?),
        KernelName::Kc => {
            let (al, e, t) = pa.he()?;
            let (m, n) = pa.finite_mn()?;
            std::sync::Arc::new(KcKernel::new(al, e, t, m, n)?)
        }
        KernelName::Airy => std::sync::Arc::new(AiryKernel),
    })
}

/// Largest node count the continuous routes double up to.
const FREDHOLM_MAX_NODES: usize = 1024;

fn fredholm(a: Fredholm) -> Result<i32> {
    let name = need_kernel(a.kernel)?;
    let k = shared_kernel(name, &a.params)?;
    let k = k.as_ref();
    let r: FredholmResult = if name == KernelName::Kd {
        let l = a.l.ok_or_else(|| Error::InvalidInput("discrete kernels need --l".into()))?;
        let mut t = 32;
        loop {
            match fdet_discrete(&k, l, t, a.tol) {
                Err(Error::NonConvergentTail(_)) if t < 1 << 13 => t *= 2,
                other => break other?,
            }
        }
    } else {
        let from = a.from.ok_or_else(|| Error::InvalidInput("continuous kernels need --from".into()))?;
        match a.to {
            None => half_line_gap(&k, from)?,
            Some(to) if from == 0.0 => {
                let mut n = 16;
                loop {
                    let r = fdet_gap_from_zero(k, to, 2.0, n)?;
                    if r.est_error <= a.tol {
                        break r;
                    }
                    n *= 2;
                    if 2 * n > FREDHOLM_MAX_NODES {
                        return Err(Error::NonConvergence(format!("gap on (0, {to}) changed by {:e} at {} nodes", r.est_error, r.nodes)));
                    }
                }
            }
            Some(to) => fdet_interval_adaptive(&k, from, to, 16, a.tol, FREDHOLM_MAX_NODES)?,
        }
    };
    println!("{}", json!({"value": r.value, "est_error": r.est_error, "nodes": r.nodes}));
    Ok(0)
}

fn constants(a: Constants) -> Result<i32> {
    let get = |v: Option<f64>, n: &str| v.ok_or_else(|| Error::InvalidInput(format!("missing --{n}")));
    let c = tw_constants(get(a.a, "a")?, get(a.eta, "eta")?, get(a.theta, "theta")?)?;
    println!("{}", serde_json::to_string_pretty(&c).expect("serializes"));
    Ok(0)
}

fn run_experiment(a: ExperimentArgs) -> Result<i32> {
    let mut cfg = ExperimentConfig { samples: a.samples, seed: a.seed, ..Default::default() };
    if let Some(path) = &a.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let file: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        cfg = file.or(&cfg);
    }
    let r = experiment(a.id, &cfg)?;
    let mut w = open_out(&a.out)?;
    writeln!(w, "{}", r.to_json())?;
    w.flush()?;
    if let Some(csv) = &a.csv {
        let mut f = BufWriter::new(create(csv)?);
        r.write_csv(&mut f)?;
        f.flush()?;
    }
    Ok(if r.pass { 0 } else { 2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        std::iter::once("mbl").chain(s.split_whitespace()).map(String::from).collect()
    }

    #[test]
    fn help_and_bad_flags() {
        assert_eq!(dispatch(&args("--help")), 0);
        assert_eq!(dispatch(&args("kernel-eval --kernel nope --x 1 --y 1")), 1);
        assert_eq!(dispatch(&args("kernel-eval --kernel bessel --x 1")), 1);
        assert_eq!(dispatch(&args("constants --a 1.5 --eta 1 --theta 1")), 1);
    }

    #[test]
    fn config_overrides_flags_and_rejects_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("good.json");
        std::fs::write(&good, r#"{"a": 0.25}"#).unwrap();
        let flags = Constants { a: Some(0.5), eta: Some(1.0), theta: Some(1.0), config: None };
        let merged = with_config(flags.clone(), &Some(good)).unwrap();
        assert_eq!(merged.a, Some(0.25));
        assert_eq!(merged.eta, Some(1.0));
        let bad = dir.path().join("bad.json");
        std::fs::write(&bad, r#"{"a": 0.25, "colour": 3}"#).unwrap();
        assert!(matches!(with_config(flags, &Some(bad)), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn nested_flattened_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(&cfg, r#"{"rows": 3, "cols": "inf", "n": 5}"#).unwrap();
        let a = SampleLpp {
            model: Model::Geo,
            sampler: None,
            params: ParamArgs { a: Some(0.5), q: Some(0.5), eta: Some(1.0), theta: Some(1.0), ..Default::default() },
            n: 10,
            seed: 0,
            out: None,
            format: Format::Csv,
            config: None,
        };
        let m = with_config(a.clone(), &Some(cfg)).unwrap();
        assert_eq!((m.n, m.params.rows, m.params.cols), (5, Some(Extent::Finite(3)), Some(Extent::Infinite)));
        let bad = dir.path().join("bad.json");
        std::fs::write(&bad, r#"{"rows": 3, "colour": 1}"#).unwrap();
        assert!(with_config(a, &Some(bad)).is_err());
    }
}
