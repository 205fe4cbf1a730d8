//! The `stockfft` command line: planning, host execution, validation
//! against the naive DFT, cost estimates, kernel emission and benchmarks.
//!
//! Exit codes: 0 success, 1 failure (including tolerance failures),
//! 2 usage error.

pub mod signal_file;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use stockfft_core::cost::{fft_flops, rank_designs, CostEstimate};
use stockfft_core::emit::{emit_plan, structural_check, KernelRole, PlanDigest};
use stockfft_core::four_step::{FourStepPlan, OuterPlan};
use stockfft_core::oracle::{compare, naive_dft, random_samples, ErrorReport};
use stockfft_core::plan::{check_size, make_plan, shuffle_hybrid_plan, FftPlan, RadixPolicy};
use stockfft_core::planner::{synthesize_with, Decomposition, DecompositionKind, DecompositionPlan, SynthesisOptions};
use stockfft_core::{execute, Complex, HardwareModel, Precision, Real, Signal};

use signal_file::SignalFile;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// A problem with how the command was invoked rather than with its inputs.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

#[derive(Debug, Parser)]
#[command(name = "stockfft", version, about = "Stockham FFT planning, validation, cost modeling and Metal kernel emission")]
pub struct Cli {
    #[command(flatten)]
    pub hardware: HardwareArgs,

    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct HardwareArgs {
    /// Bundled hardware model.
    #[arg(long, global = true, value_enum, default_value_t = Preset::M1)]
    pub preset: Preset,

    /// Hardware model TOML file; overrides --preset.
    #[arg(long, global = true, value_name = "FILE")]
    pub hardware: Option<PathBuf>,
}

impl HardwareArgs {
    pub fn model(&self) -> Result<HardwareModel> {
        match &self.hardware {
            Some(path) => Ok(HardwareModel::load(path)?),
            None => Ok(match self.preset {
                Preset::M1 => HardwareModel::apple_m1(),
                Preset::IntelEu => HardwareModel::intel_eu(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    M1,
    IntelEu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    /// Radix chosen from the register budget.
    Auto,
    Radix8,
    Radix4,
    Radix2,
}

impl PolicyArg {
    fn radix_override(self) -> Option<RadixPolicy> {
        match self {
            PolicyArg::Auto => None,
            PolicyArg::Radix8 => Some(RadixPolicy::Prefer8),
            PolicyArg::Radix4 => Some(RadixPolicy::Prefer4),
            PolicyArg::Radix2 => Some(RadixPolicy::Pure2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrecisionArg {
    Half,
    Single,
    Double,
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::Half => Precision::Half,
            PrecisionArg::Single => Precision::Single,
            PrecisionArg::Double => Precision::Double,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Design {
    Radix8,
    Radix4,
    Shuffle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignalKind {
    Delta,
    Constant,
    Random,
}

fn parse_size(s: &str) -> Result<usize, String> {
    let n: usize = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    check_size(n).map_err(|e| e.to_string())?;
    Ok(n)
}

/// Transform sizes given as `lo..hi` or a comma list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeList(pub Vec<usize>);

fn parse_size_list(s: &str) -> Result<SizeList, String> {
    parse_sizes(s).map(SizeList)
}

/// `a..b` (powers of two from a to b inclusive) or a comma list.
fn parse_sizes(s: &str) -> Result<Vec<usize>, String> {
    if let Some((lo, hi)) = s.split_once("..") {
        let (lo, hi) = (parse_size(lo)?, parse_size(hi)?);
        if lo > hi {
            return Err(format!("empty size range {s}"));
        }
        Ok(std::iter::successors(Some(lo), |&n| Some(n * 2)).take_while(|&n| n <= hi).collect())
    } else {
        s.split(',').map(parse_size).collect()
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Show the plan synthesized for a transform size.
    Plan {
        #[arg(long, value_parser = parse_size)]
        size: usize,
        #[arg(long, value_enum, default_value_t = PolicyArg::Auto)]
        policy: PolicyArg,
        #[arg(long, value_enum, default_value_t = PrecisionArg::Single)]
        precision: PrecisionArg,
    },
    /// Transform every signal of a signal file.
    Run {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_parser = parse_size)]
        size: usize,
        /// Signals in the file; defaults to element count / size.
        #[arg(long)]
        batch: Option<usize>,
        #[arg(long)]
        inverse: bool,
        #[arg(long, value_enum, default_value_t = PolicyArg::Auto)]
        policy: PolicyArg,
    },
    /// Check transforms against the naive DFT.
    Validate {
        /// Sizes as `lo..hi` or a comma list.
        #[arg(long, value_parser = parse_size_list, default_value = "256..16384")]
        sizes: SizeList,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = PrecisionArg::Single)]
        precision: PrecisionArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Rank designs by predicted time on the hardware model.
    Cost {
        #[arg(long, value_parser = parse_size)]
        size: usize,
        #[arg(long, default_value_t = 256)]
        batch: usize,
        /// Comma list; defaults to every design that fits the size.
        #[arg(long, value_enum, value_delimiter = ',')]
        designs: Vec<Design>,
    },
    /// Write Metal kernels and a dispatch sidecar.
    Emit {
        #[arg(long, value_parser = parse_size)]
        size: usize,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value_t = PolicyArg::Auto)]
        policy: PolicyArg,
    },
    /// Time the host executor (CPU figures, not GPU).
    Bench {
        #[arg(long, value_parser = parse_size)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        batch: usize,
        #[arg(long, default_value_t = 1000)]
        iterations: usize,
        #[arg(long, default_value_t = 100)]
        warmup: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Write a test signal file.
    Generate {
        #[arg(long, value_parser = parse_size)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        batch: usize,
        #[arg(long, value_enum, default_value_t = SignalKind::Random)]
        kind: SignalKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = PrecisionArg::Single)]
        precision: PrecisionArg,
        #[arg(long)]
        output: PathBuf,
    },
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                EXIT_USAGE
            } else {
                EXIT_FAILURE
            }
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let hw = cli.hardware.model()?;
    match &cli.command {
        Command::Plan { size, policy, precision } => cmd_plan(out, cli.json, &hw, *size, *policy, (*precision).into()),
        Command::Run { input, output, size, batch, inverse, policy } => {
            cmd_run(out, cli.json, &hw, input, output, *size, *batch, *inverse, *policy)
        }
        Command::Validate { sizes, trials, precision, seed } => {
            cmd_validate(out, cli.json, &hw, &sizes.0, *trials, *precision, *seed)
        }
        Command::Cost { size, batch, designs } => cmd_cost(out, cli.json, &hw, *size, *batch, designs),
        Command::Emit { size, out_dir, policy } => cmd_emit(out, cli.json, &hw, *size, out_dir, *policy),
        Command::Bench { size, batch, iterations, warmup, seed } => {
            cmd_bench(out, cli.json, &hw, *size, *batch, *iterations, *warmup, *seed)
        }
        Command::Generate { size, batch, kind, seed, precision, output } => {
            cmd_generate(out, *size, *batch, *kind, *seed, *precision, output)
        }
    }
}

fn write_json(out: &mut dyn Write, value: &impl Serialize) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn synthesize_for(hw: &HardwareModel, n: usize, policy: PolicyArg, precision: Precision) -> Result<DecompositionPlan> {
    let opts = SynthesisOptions { precision, radix_override: policy.radix_override(), ..Default::default() };
    Ok(synthesize_with(n, hw, &opts)?)
}

fn describe_local(plan: &FftPlan) -> String {
    let radices: Vec<String> = plan.radices().iter().map(|r| r.to_string()).collect();
    format!(
        "n {}, radices {}, {} threads, {} barriers, {} B threadgroup memory",
        plan.n,
        radices.join("-"),
        plan.threads,
        plan.barrier_count,
        plan.threadgroup_bytes
    )
}

fn write_four_step(out: &mut dyn Write, fs: &FourStepPlan, indent: usize) -> Result<()> {
    let pad = " ".repeat(indent);
    writeln!(out, "{pad}split: {} x {}", fs.n1, fs.n2)?;
    writeln!(out, "{pad}row transforms ({} of them): {}", fs.n1, describe_local(&fs.inner_plan))?;
    match &fs.outer_plan {
        OuterPlan::Direct(p) => writeln!(out, "{pad}column transforms ({} of them): {}", fs.n2, describe_local(p))?,
        OuterPlan::FourStep(inner) => {
            writeln!(out, "{pad}column transforms ({} of them), four-step of {}:", fs.n2, inner.n)?;
            write_four_step(out, inner, indent + 2)?;
        }
    }
    Ok(())
}

fn kind_name(kind: DecompositionKind) -> &'static str {
    match kind {
        DecompositionKind::SingleThreadgroup => "single_threadgroup",
        DecompositionKind::FourStep => "four_step",
        DecompositionKind::MultiLevelFourStep => "multi_level_four_step",
    }
}

pub fn cmd_plan(
    out: &mut dyn Write,
    json: bool,
    hw: &HardwareModel,
    n: usize,
    policy: PolicyArg,
    precision: Precision,
) -> Result<i32> {
    let plan = synthesize_for(hw, n, policy, precision)?;
    if json {
        write_json(out, &plan)?;
        return Ok(EXIT_OK);
    }
    writeln!(out, "n: {n}")?;
    writeln!(out, "hardware: {}", hw.name)?;
    writeln!(out, "kind: {}", kind_name(plan.kind))?;
    writeln!(out, "block size: {}", plan.b_max)?;
    match &plan.plan {
        Decomposition::Single(p) => {
            writeln!(out, "stages: {}", p.stages.len())?;
            for (i, s) in p.stages.iter().enumerate() {
                writeln!(out, "  stage {i}: radix {}, span {}, {:?}, {:?}", s.radix, s.span, s.exchange, s.access_class)?;
            }
            writeln!(out, "threads: {}", p.threads)?;
            writeln!(out, "barriers: {}", p.barrier_count)?;
            writeln!(out, "threadgroup bytes: {}", p.threadgroup_bytes)?;
        }
        Decomposition::FourStep(fs) => write_four_step(out, fs, 0)?,
    }
    writeln!(out, "rationale:")?;
    for r in &plan.rationale {
        writeln!(out, "  - {r}")?;
    }
    Ok(EXIT_OK)
}

fn split_batch<T: Real>(samples: &[Complex<T>], n: usize) -> Result<Vec<Signal<T>>> {
    samples.chunks_exact(n).map(|c| Ok(Signal::new(c.to_vec())?)).collect()
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_run(
    out: &mut dyn Write,
    json: bool,
    hw: &HardwareModel,
    input: &Path,
    output: &Path,
    n: usize,
    batch: Option<usize>,
    inverse: bool,
    policy: PolicyArg,
) -> Result<i32> {
    let file = SignalFile::read(input)?;
    let count = file.len();
    let batch = match batch {
        Some(b) if b * n == count => b,
        Some(b) => bail!("{} holds {count} elements, not {b} signals of {n}", input.display()),
        None if count > 0 && count % n == 0 => count / n,
        None => bail!("{} holds {count} elements, not a multiple of size {n}", input.display()),
    };
    let plan = synthesize_for(hw, n, policy, file.precision())?;
    let result = match &file {
        SignalFile::Single(v) => {
            let y = plan.execute_batch(&split_batch(v, n)?, inverse)?;
            SignalFile::Single(y.into_iter().flat_map(Signal::into_inner).collect())
        }
        SignalFile::Double(v) => {
            let y = plan.execute_batch(&split_batch(v, n)?, inverse)?;
            SignalFile::Double(y.into_iter().flat_map(Signal::into_inner).collect())
        }
    };
    result.write(output)?;
    #[derive(Serialize)]
    struct RunSummary<'a> {
        n: usize,
        batch: usize,
        inverse: bool,
        precision: Precision,
        kind: DecompositionKind,
        output: &'a Path,
    }
    let summary = RunSummary { n, batch, inverse, precision: file.precision(), kind: plan.kind, output };
    if json {
        write_json(out, &summary)?;
    } else {
        let direction = if inverse { "inverse" } else { "forward" };
        writeln!(
            out,
            "{direction} transform of {batch} x {n} ({:?}, {}) written to {}",
            summary.precision,
            kind_name(plan.kind),
            output.display()
        )?;
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationRow {
    pub n: usize,
    pub method: String,
    pub trials: usize,
    pub worst: ErrorReport,
    pub tolerance: f64,
    pub passed: bool,
}

type Transform<'a, T> = Box<dyn Fn(&Signal<T>) -> Result<Signal<T>> + Sync + 'a>;

/// Runs every method on the same random inputs so the O(N^2) reference is
/// computed once per trial.
fn validate_size<T: Real>(hw: &HardwareModel, n: usize, trials: usize, seed: u64, tolerance: f64) -> Result<Vec<ValidationRow>> {
    let plan8 = make_plan(n, RadixPolicy::Prefer8)?;
    let plan4 = make_plan(n, RadixPolicy::Prefer4)?;
    let opts = SynthesisOptions { precision: T::PRECISION, ..Default::default() };
    let planned = synthesize_with(n, hw, &opts)?;
    let mut methods: Vec<(&str, Transform<'_, T>)> = vec![
        ("radix8", Box::new(|x| Ok(execute(&plan8, x)?))),
        ("radix4", Box::new(|x| Ok(execute(&plan4, x)?))),
    ];
    if planned.kind != DecompositionKind::SingleThreadgroup {
        methods.push((kind_name(planned.kind), Box::new(|x| Ok(planned.execute(x)?))));
    }
    let methods = &methods;
    let per_trial: Vec<Result<Vec<ErrorReport>>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..trials as u64)
            .map(|t| {
                s.spawn(move || -> Result<Vec<ErrorReport>> {
                    let x = Signal::new(random_samples::<T>(n, seed.wrapping_mul(1_000_003).wrapping_add(t)))?;
                    let reference = naive_dft(x.as_slice());
                    methods
                        .iter()
                        .map(|(_, f)| Ok(compare(f(&x)?.as_slice(), &reference)?))
                        .collect()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("validation thread panicked")).collect()
    });
    let mut worst = vec![ErrorReport { relative_l2: 0.0, max_abs_componentwise: 0.0, n }; methods.len()];
    for reports in per_trial {
        for (w, r) in worst.iter_mut().zip(reports?) {
            *w = w.worst(r);
        }
    }
    Ok(methods
        .iter()
        .zip(worst)
        .map(|((label, _), worst)| ValidationRow {
            n,
            method: (*label).into(),
            trials,
            passed: worst.relative_l2 < tolerance,
            worst,
            tolerance,
        })
        .collect())
}

pub fn cmd_validate(
    out: &mut dyn Write,
    json: bool,
    hw: &HardwareModel,
    sizes: &[usize],
    trials: usize,
    precision: PrecisionArg,
    seed: u64,
) -> Result<i32> {
    if trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let mut rows = Vec::new();
    for &n in sizes {
        rows.extend(match precision {
            PrecisionArg::Single => validate_size::<f32>(hw, n, trials, seed, 1e-5)?,
            PrecisionArg::Double => validate_size::<f64>(hw, n, trials, seed, 1e-12)?,
            PrecisionArg::Half => return Err(usage("half precision has no executor; use single or double")),
        });
    }
    let passed = rows.iter().all(|r| r.passed);
    let worst = rows
        .iter()
        .max_by(|a, b| a.worst.relative_l2.total_cmp(&b.worst.relative_l2))
        .cloned();
    if json {
        #[derive(Serialize)]
        struct Summary {
            passed: bool,
            worst: Option<ValidationRow>,
            rows: Vec<ValidationRow>,
        }
        write_json(out, &Summary { passed, worst, rows })?;
    } else {
        writeln!(out, "{:>6}  {:<22} {:>6}  {:>12}  {:>12}  status", "size", "method", "trials", "rel_l2", "max_abs")?;
        for r in &rows {
            writeln!(
                out,
                "{:>6}  {:<22} {:>6}  {:>12.3e}  {:>12.3e}  {}",
                r.n,
                r.method,
                r.trials,
                r.worst.relative_l2,
                r.worst.max_abs_componentwise,
                if r.passed { "ok" } else { "FAIL" }
            )?;
        }
        if let Some(w) = &worst {
            writeln!(out, "worst: relative_l2 {:.3e} at n={} ({})", w.worst.relative_l2, w.n, w.method)?;
        }
        writeln!(out, "result: {}", if passed { "PASS" } else { "FAIL" })?;
    }
    Ok(if passed { EXIT_OK } else { EXIT_FAILURE })
}

fn design_plan(hw: &HardwareModel, n: usize, design: Design) -> Result<DecompositionPlan> {
    match design {
        Design::Radix8 => synthesize_for(hw, n, PolicyArg::Radix8, Precision::Single),
        Design::Radix4 => synthesize_for(hw, n, PolicyArg::Radix4, Precision::Single),
        Design::Shuffle => {
            let single = synthesize_for(hw, n, PolicyArg::Auto, Precision::Single)?;
            if single.kind != DecompositionKind::SingleThreadgroup {
                return Err(usage(format!("the shuffle design needs a single threadgroup; {n} exceeds {}", single.b_max)));
            }
            Ok(DecompositionPlan::single(shuffle_hybrid_plan(n, hw.simd_width as usize)?, "SIMD-shuffle hybrid"))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CostRow {
    pub rank: usize,
    pub design: Design,
    pub kind: DecompositionKind,
    pub estimate: CostEstimate,
}

pub fn cmd_cost(
    out: &mut dyn Write,
    json: bool,
    hw: &HardwareModel,
    n: usize,
    batch: usize,
    designs: &[Design],
) -> Result<i32> {
    if batch == 0 {
        return Err(usage("--batch must be at least 1"));
    }
    let auto = synthesize_for(hw, n, PolicyArg::Auto, Precision::Single)?;
    let designs: Vec<Design> = if designs.is_empty() {
        if auto.kind == DecompositionKind::SingleThreadgroup {
            vec![Design::Radix8, Design::Radix4, Design::Shuffle]
        } else {
            vec![Design::Radix8, Design::Radix4]
        }
    } else {
        designs.to_vec()
    };
    let plans = designs.iter().map(|&d| design_plan(hw, n, d)).collect::<Result<Vec<_>>>()?;
    let ranked = rank_designs(&plans, hw, batch);
    let rows: Vec<CostRow> = ranked
        .iter()
        .enumerate()
        .map(|(i, (plan, est))| {
            let idx = plans.iter().position(|p| std::ptr::eq(p, *plan)).expect("ranked plan comes from the input");
            CostRow { rank: i + 1, design: designs[idx], kind: plan.kind, estimate: *est }
        })
        .collect();
    if json {
        write_json(out, &rows)?;
        return Ok(EXIT_OK);
    }
    writeln!(out, "n = {n}, batch = {batch}, hardware = {}", hw.name)?;
    writeln!(
        out,
        "{:>4}  {:<8} {:<22} {:>12} {:>9} {:>11} {:>11} {:>11} {:>13} {:>13} {:>9}",
        "rank", "design", "kind", "predicted_us", "gflops", "compute_us", "memory_us", "barrier_us", "device_bytes", "tg_bytes", "barriers"
    )?;
    for r in &rows {
        let e = &r.estimate;
        writeln!(
            out,
            "{:>4}  {:<8} {:<22} {:>12.3} {:>9.1} {:>11.3} {:>11.3} {:>11.3} {:>13} {:>13} {:>9}",
            r.rank,
            format!("{:?}", r.design).to_lowercase(),
            kind_name(r.kind),
            e.predicted_seconds * 1e6,
            e.gflops_predicted,
            e.compute_seconds * 1e6,
            e.memory_seconds * 1e6,
            e.barrier_seconds * 1e6,
            e.device_bytes,
            e.tier2_bytes,
            e.barriers
        )?;
    }
    Ok(EXIT_OK)
}

fn collect_local_plans(plan: &DecompositionPlan) -> Vec<FftPlan> {
    fn walk(fs: &FourStepPlan, acc: &mut Vec<FftPlan>) {
        acc.push(fs.inner_plan.clone());
        match &fs.outer_plan {
            OuterPlan::Direct(p) => acc.push(p.clone()),
            OuterPlan::FourStep(inner) => walk(inner, acc),
        }
    }
    match &plan.plan {
        Decomposition::Single(p) => vec![p.clone()],
        Decomposition::FourStep(fs) => {
            let mut acc = Vec::new();
            walk(fs, &mut acc);
            acc
        }
    }
}

pub fn cmd_emit(
    out: &mut dyn Write,
    json: bool,
    hw: &HardwareModel,
    n: usize,
    dir: &Path,
    policy: PolicyArg,
) -> Result<i32> {
    let plan = synthesize_for(hw, n, policy, Precision::Single)?;
    let bundle = emit_plan(&plan)?;
    let locals = collect_local_plans(&plan);
    for k in bundle.kernels.iter().filter(|k| k.role == KernelRole::Fft) {
        let local = locals
            .iter()
            .find(|p| Some(PlanDigest::of(p)) == k.plan_digest)
            .ok_or_else(|| anyhow!("no plan matches kernel {}", k.entry_point))?;
        let report = structural_check(k, local);
        if !report.passed() {
            bail!("{} failed its structural check: {:?}", k.entry_point, report.failures().collect::<Vec<_>>());
        }
    }
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    #[derive(Serialize)]
    struct Written {
        file: PathBuf,
        entry_point: String,
        role: KernelRole,
        threads_per_threadgroup: usize,
        barriers: usize,
    }
    let mut written = Vec::new();
    for k in &bundle.kernels {
        let path = dir.join(k.file_name());
        std::fs::write(&path, &k.text).with_context(|| format!("writing {}", path.display()))?;
        written.push(Written {
            file: path,
            entry_point: k.entry_point.clone(),
            role: k.role,
            threads_per_threadgroup: k.threads_per_threadgroup,
            barriers: k.plan_digest.as_ref().map_or(0, |d| d.barrier_count),
        });
    }
    let sidecar = dir.join(format!("fft_{n}.dispatch.json"));
    std::fs::write(&sidecar, bundle.dispatch.to_json() + "\n").with_context(|| format!("writing {}", sidecar.display()))?;
    if json {
        #[derive(Serialize)]
        struct EmitSummary {
            kernels: Vec<Written>,
            sidecar: PathBuf,
        }
        write_json(out, &EmitSummary { kernels: written, sidecar })?;
    } else {
        for w in &written {
            writeln!(
                out,
                "{}  {:?}, {} threads, {} barriers",
                w.file.display(),
                w.role,
                w.threads_per_threadgroup,
                w.barriers
            )?;
        }
        writeln!(out, "{}  dispatch sequence, {} launches", sidecar.display(), bundle.dispatch.dispatches.len())?;
    }
    Ok(EXIT_OK)
}

/// Median of the samples; the mean of the middle two for even counts.
pub fn median(samples: &mut [f64]) -> f64 {
    assert!(!samples.is_empty(), "median of nothing");
    samples.sort_by(f64::total_cmp);
    let mid = samples.len() / 2;
    if samples.len() % 2 == 1 {
        samples[mid]
    } else {
        (samples[mid - 1] + samples[mid]) / 2.0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub label: &'static str,
    pub n: usize,
    pub batch: usize,
    pub warmup: usize,
    pub iterations: usize,
    pub median_seconds_per_fft: f64,
    pub host_gflops: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_bench(
    out: &mut dyn Write,
    json: bool,
    hw: &HardwareModel,
    n: usize,
    batch: usize,
    iterations: usize,
    warmup: usize,
    seed: u64,
) -> Result<i32> {
    if iterations == 0 || batch == 0 {
        return Err(usage("--iterations and --batch must be at least 1"));
    }
    let plan = synthesize_for(hw, n, PolicyArg::Auto, Precision::Single)?;
    let inputs = (0..batch as u64)
        .map(|b| Ok(Signal::new(random_samples::<f32>(n, seed.wrapping_add(b)))?))
        .collect::<Result<Vec<_>>>()?;
    let once = || -> Result<()> {
        for x in &inputs {
            std::hint::black_box(plan.execute(std::hint::black_box(x))?);
        }
        Ok(())
    };
    for _ in 0..warmup {
        once()?;
    }
    let mut samples = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let t = Instant::now();
        once()?;
        samples.push(t.elapsed().as_secs_f64() / batch as f64);
    }
    let med = median(&mut samples);
    let report = BenchReport {
        label: "host-cpu",
        n,
        batch,
        warmup,
        iterations,
        median_seconds_per_fft: med,
        host_gflops: fft_flops(n, 1) as f64 / med / 1e9,
    };
    if json {
        write_json(out, &report)?;
    } else {
        writeln!(out, "host CPU executor, not GPU figures")?;
        writeln!(out, "n = {n}, batch = {batch}, {warmup} warmup + {iterations} timed iterations")?;
        writeln!(out, "median: {:.3} us per FFT", med * 1e6)?;
        writeln!(out, "host GFLOPS (5 N log2 N / median): {:.3}", report.host_gflops)?;
    }
    Ok(EXIT_OK)
}

fn make_signal<T: Real>(n: usize, batch: usize, kind: SignalKind, seed: u64) -> Vec<Complex<T>> {
    (0..batch)
        .flat_map(|b| match kind {
            SignalKind::Delta => {
                let mut v = vec![Complex::zero(); n];
                v[0] = Complex::one();
                v
            }
            SignalKind::Constant => vec![Complex::one(); n],
            SignalKind::Random => random_samples::<T>(n, seed.wrapping_add(b as u64)),
        })
        .collect()
}

pub fn cmd_generate(
    out: &mut dyn Write,
    n: usize,
    batch: usize,
    kind: SignalKind,
    seed: u64,
    precision: PrecisionArg,
    output: &Path,
) -> Result<i32> {
    if batch == 0 {
        return Err(usage("--batch must be at least 1"));
    }
    let file = match precision {
        PrecisionArg::Single => SignalFile::Single(make_signal(n, batch, kind, seed)),
        PrecisionArg::Double => SignalFile::Double(make_signal(n, batch, kind, seed)),
        PrecisionArg::Half => return Err(usage("signal files hold single or double precision")),
    };
    file.write(output)?;
    writeln!(out, "wrote {batch} x {n} {kind:?} samples to {}", output.display())?;
    Ok(EXIT_OK)
}
