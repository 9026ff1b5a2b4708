//! Command-line front end. Every subcommand writes JSON/CSV artifacts into the
//! output directory and prints `PASS|FAIL <check-id> <value> <bound>` lines.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 usage or parse error,
//! 3 capacity or coverage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::constructions::{
    atom_identity_check, favorov_pair, guinand_comb, kolountzakis_sigma, ks_big_omega, ks_omega, ks_params, ks_theta,
    pedagogical_example, series_descriptor, theorem341_pair, theorem_ex1_instance, theta_sup, OMEGA_EXACT_CAP,
};
use crate::diagnostics::{
    almost_period_scan, bessel_partial_sums, doubling_ladder, fourier_bohr, growth_profile, growth_profile_fit, norm_ap_csv,
    norm_ap_probe, p_discreteness_probe, PairVerdict,
};
use crate::eigenlab::{nested_family, synthesize, verify_eigen_properties, EigenReport, EigenSpec};
use crate::error::{Error, Result};
use crate::exactnum::{fmt_q, parse_q, q_to_f64, qi, Registry, SymbolicPoint, MAX_DIGITS, Q};
use crate::fourier::{duality_residual, finite_fourier, FiniteSrc, Lambda, PeriodicComb, Term};
use crate::io::{measure_from_json, measure_to_json, read_json, registry_from_json, registry_to_json, write_json, write_text, window_stats_csv, RegistryJson};
use crate::measure::{reflect, total_variation_exact, window_norm, Coverage, PointMeasure};
use crate::testfn::{Bump, Gaussian, TestFunction};
use crate::verify::{run_criterion, CheckLine, VerifyConfig};

/// Run configuration, read from `--config`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Registry file: loaded before the command when present, rewritten after it.
    pub registry: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    /// Stored digits for new irrational generators.
    pub precision_digits: u32,
    pub atom_limit: usize,
    /// Largest DFT size `N = m^2` accepted by `eigen synth`.
    pub dft_n_limit: usize,
    /// Overrides keyed by `duality`, `bohr`, `apscan`.
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            registry: None,
            out_dir: None,
            precision_digits: 60,
            atom_limit: 20_000_000,
            dft_n_limit: 1 << 20,
            tolerances: BTreeMap::new(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.atom_limit == 0 || self.dft_n_limit == 0 {
            return Err(Error::Input("capacity caps must be positive".into()));
        }
        if self.precision_digits == 0 || self.precision_digits > MAX_DIGITS {
            return Err(Error::Input(format!("precision must lie in 1..={MAX_DIGITS}")));
        }
        for (k, v) in &self.tolerances {
            if !(*v > 0.0 && *v < 1.0) {
                return Err(Error::Input(format!("tolerance `{k}` = {v} outside (0, 1)")));
            }
        }
        Ok(())
    }

    pub fn tol(&self, key: &str, default: f64) -> f64 {
        self.tolerances.get(key).copied().unwrap_or(default)
    }
}

/// `--out`, then `COMBLAB_OUT`, then the config file, then `out`.
pub fn resolve_out_dir(flag: Option<&Path>, env: Option<OsString>, cfg: &RunConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| env.filter(|e| !e.is_empty()).map(PathBuf::from))
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

#[derive(Parser, Debug)]
#[command(name = "comblab", version, about = "Pure-point measure laboratory")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides COMBLAB_OUT and the config file).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Periodic Fourier eigenmeasures.
    Eigen {
        #[command(subcommand)]
        cmd: EigenCmd,
    },
    /// Nested families of eigenmeasures.
    Family {
        #[command(subcommand)]
        cmd: FamilyCmd,
    },
    /// Build a named construction.
    Construct {
        #[command(subcommand)]
        cmd: ConstructCmd,
    },
    /// Transforms and duality residuals.
    Fourier {
        #[command(subcommand)]
        cmd: FourierCmd,
    },
    /// Diagnostics on a stored measure or comb.
    Diag {
        #[command(subcommand)]
        cmd: DiagCmd,
    },
    /// Acceptance suite.
    Verify {
        #[command(subcommand)]
        cmd: VerifyCmd,
    },
}

fn parse_lambda(s: &str) -> std::result::Result<Lambda, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_rational(s: &str) -> std::result::Result<Q, String> {
    parse_q(s).map_err(|e| e.to_string())
}

#[derive(Subcommand, Debug)]
pub enum EigenCmd {
    Synth {
        #[arg(long)]
        m: usize,
        #[arg(long, value_parser = parse_lambda, allow_hyphen_values = true)]
        lambda: Lambda,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Verify {
        #[arg(long)]
        comb: PathBuf,
        /// Defaults to the comb's own tag.
        #[arg(long, value_parser = parse_lambda, allow_hyphen_values = true)]
        lambda: Option<Lambda>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct FamilyArgs {
    #[arg(long, value_delimiter = ',', default_value = "4,16,64")]
    pub k: Vec<usize>,
    #[arg(long, value_parser = parse_lambda, allow_hyphen_values = true, default_value = "1")]
    pub lambda: Lambda,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct WindowArgs {
    #[arg(long, value_parser = parse_rational, allow_hyphen_values = true)]
    pub lo: Q,
    #[arg(long, value_parser = parse_rational, allow_hyphen_values = true)]
    pub hi: Q,
}

#[derive(Subcommand, Debug)]
pub enum FamilyCmd {
    Build {
        #[command(flatten)]
        fam: FamilyArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExampleKind {
    Kdelta,
    Lattice,
    Factorial,
}

#[derive(Subcommand, Debug)]
pub enum ConstructCmd {
    Kolountzakis {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, value_parser = parse_rational, allow_hyphen_values = true, default_value = "-30")]
        lo: Q,
        #[arg(long, value_parser = parse_rational, allow_hyphen_values = true, default_value = "30")]
        hi: Q,
        /// Next `k` beyond the family, widening the exact window.
        #[arg(long)]
        next_k: Option<usize>,
    },
    Favorov {
        #[command(flatten)]
        fam: FamilyArgs,
        /// Coefficients `a_n` (rationals), one per term.
        #[arg(long, value_delimiter = ',', value_parser = parse_rational, allow_hyphen_values = true)]
        a: Vec<Q>,
        #[arg(long, value_parser = parse_rational, allow_hyphen_values = true, default_value = "-8")]
        lo: Q,
        #[arg(long, value_parser = parse_rational, allow_hyphen_values = true, default_value = "8")]
        hi: Q,
    },
    Ex1 {
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, value_parser = parse_lambda, allow_hyphen_values = true, default_value = "1")]
        lambda: Lambda,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        bump_center: f64,
        #[arg(long, default_value_t = 1.0)]
        bump_width: f64,
        /// Half-width of the realized window.
        #[arg(long, default_value_t = 8)]
        radius: i64,
    },
    #[command(name = "ks-omega")]
    KsOmega {
        /// Which generator pair `(a_i, b_i)`.
        #[arg(long, default_value_t = 1)]
        index: usize,
    },
    #[command(name = "ks-theta")]
    KsTheta {
        #[arg(long)]
        n: usize,
    },
    #[command(name = "ks-Omega")]
    KsBigOmega {
        #[arg(long)]
        m: usize,
        /// Defaults to `2m + 1`.
        #[arg(long)]
        n: Option<usize>,
    },
    Thm341 {
        #[arg(long, default_value_t = 4)]
        m0: usize,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, value_parser = parse_lambda, allow_hyphen_values = true, default_value = "1")]
        lambda: Lambda,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        radius: i64,
        /// Also pair sigma and Sigma against Gaussians.
        #[arg(long)]
        duality: bool,
    },
    Guinand {
        #[arg(long, default_value_t = 40)]
        radius: u64,
    },
    Example {
        #[arg(long, value_enum)]
        which: ExampleKind,
        #[arg(long, default_value_t = 1000)]
        n: i64,
    },
}

#[derive(Subcommand, Debug)]
pub enum FourierCmd {
    /// Transform of a comb file, or samples of the transform of a finite measure.
    Of {
        #[arg(long, conflicts_with = "measure")]
        comb: Option<PathBuf>,
        #[arg(long)]
        measure: Option<PathBuf>,
        #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long, default_value_t = 1.0 / 64.0)]
        step: f64,
    },
    /// `|<claimed, f> - <mu, f^>|` on Gaussians.
    Duality {
        #[arg(long, default_value = "measure.json")]
        measure: PathBuf,
        /// A scalar `1, -1, i, -i` (claimed = scalar * mu) or a measure file.
        #[arg(long, allow_hyphen_values = true)]
        claimed: String,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
        scales: Vec<f64>,
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct GaussArg {
    /// Gaussian `e^{-π s x^2}` scale.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
}

#[derive(Subcommand, Debug)]
pub enum DiagCmd {
    Growth {
        #[arg(long, default_value = "measure.json")]
        measure: PathBuf,
        #[arg(long, value_delimiter = ',', value_parser = parse_rational)]
        radii: Vec<Q>,
        #[arg(long)]
        fit_lo: Option<f64>,
        #[arg(long)]
        fit_hi: Option<f64>,
    },
    Pdiscrete {
        #[arg(long, default_value = "measure.json")]
        measure: PathBuf,
        /// `c:h` pairs.
        #[arg(long, value_delimiter = ',', default_value = "0.125:1,1:3,1:0")]
        grid: Vec<String>,
    },
    Bohr {
        #[arg(long)]
        comb: PathBuf,
        #[arg(long, value_parser = parse_rational, allow_hyphen_values = true)]
        k: Q,
        #[arg(long, value_delimiter = ',', default_value = "1250,2500,5000,10000")]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 1.0 / 64.0)]
        step: f64,
        #[command(flatten)]
        g: GaussArg,
    },
    Bessel {
        #[arg(long)]
        comb: PathBuf,
        #[arg(long, value_delimiter = ',', value_parser = parse_rational, allow_hyphen_values = true)]
        k: Vec<Q>,
        #[command(flatten)]
        g: GaussArg,
    },
    Apscan {
        #[arg(long, default_value = "measure.json")]
        measure: PathBuf,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long, default_value_t = 0.0625)]
        step: f64,
        #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
        base_lo: f64,
        #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
        base_hi: f64,
        #[command(flatten)]
        g: GaussArg,
    },
    Normap {
        #[arg(long, default_value = "measure.json")]
        measure: PathBuf,
        #[arg(long, value_delimiter = ',', value_parser = parse_rational, allow_hyphen_values = true)]
        p: Vec<Q>,
        #[arg(long, value_parser = parse_rational, default_value = "1")]
        len: Q,
        #[command(flatten)]
        window: WindowArgs,
    },
}

#[derive(Subcommand, Debug)]
pub enum VerifyCmd {
    All {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Restrict to these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

/// Comb artifact: the comb plus how it was made and checked.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombFile {
    #[serde(default)]
    pub spec: Option<EigenSpec>,
    pub comb: PeriodicComb,
    #[serde(default)]
    pub report: Option<EigenReport>,
}

struct Ctx {
    out: PathBuf,
    cfg: RunConfig,
    reg: Registry,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    /// An input path as given, else relative to the output directory.
    fn input(&self, p: &Path) -> PathBuf {
        if p.exists() || p.is_absolute() {
            p.to_path_buf()
        } else {
            self.out.join(p)
        }
    }

    fn json<T: Serialize>(&self, name: &str, v: &T) -> Result<()> {
        write_json(&self.path(name), v)
    }

    fn text(&self, name: &str, s: &str) -> Result<()> {
        write_text(&self.path(name), s)
    }

    fn cap(&self, mu: &PointMeasure) -> Result<()> {
        if mu.len() > self.cfg.atom_limit {
            return Err(Error::Capacity(format!("{} atoms exceed the limit {}", mu.len(), self.cfg.atom_limit)));
        }
        Ok(())
    }

    /// Writes `<name>.json` and the `measure.json` alias used as the default input.
    fn measure(&self, name: &str, mu: &PointMeasure) -> Result<()> {
        self.cap(mu)?;
        let j = measure_to_json(mu)?;
        self.json(&format!("{name}.json"), &j)?;
        self.json("measure.json", &j)
    }

    fn load_measure(&self, p: &Path) -> Result<PointMeasure> {
        let m = measure_from_json(&read_json(&self.input(p))?)?;
        self.cap(&m)?;
        Ok(m)
    }

    fn load_comb(&self, p: &Path) -> Result<CombFile> {
        read_json(&self.input(p))
    }
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Capacity(_) | Error::Coverage(_) | Error::Overflow(_) => 3,
        Error::Input(_) | Error::Parse(_) | Error::Io(_) | Error::Spec(_) | Error::Registry(_) => 2,
        _ => 1,
    }
}

/// Parses `argv`, runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(lines) => {
            for l in &lines {
                println!("{l}");
            }
            if lines.iter().all(|l| l.pass) {
                0
            } else {
                1
            }
        }
        Err(e) => {
            println!("{}", CheckLine::new(false, "comblab.error", &e, "no-error"));
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Vec<CheckLine>> {
    let cfg = match &cli.config {
        Some(p) => read_json::<RunConfig>(p)?,
        None => RunConfig::default(),
    };
    cfg.validate()?;
    let out = resolve_out_dir(cli.out.as_deref(), std::env::var_os("COMBLAB_OUT"), &cfg);
    let reg = match &cfg.registry {
        Some(p) if p.exists() => registry_from_json(&read_json::<RegistryJson>(p)?)?,
        _ => Registry::with_digits(cfg.precision_digits),
    };
    let ctx = Ctx { out, cfg, reg };
    let lines = match &cli.command {
        Command::Eigen { cmd } => eigen(&ctx, cmd),
        Command::Family { cmd } => family(&ctx, cmd),
        Command::Construct { cmd } => construct(&ctx, cmd),
        Command::Fourier { cmd } => fourier(&ctx, cmd),
        Command::Diag { cmd } => diag(&ctx, cmd),
        Command::Verify { cmd } => verify(&ctx, cmd),
    }?;
    if let Some(p) = &ctx.cfg.registry {
        write_json(p, &registry_to_json(&ctx.reg))?;
    }
    Ok(lines)
}

fn eigen_line(id: &str, rep: &EigenReport) -> CheckLine {
    CheckLine::new(
        rep.passes(),
        id,
        format!("res={:e},gap={},max={}", rep.eigen_residual, rep.gap_max_weight, rep.max_abs_weight),
        "res<=1e-9,gap=0,max=1",
    )
}

fn eigen(ctx: &Ctx, cmd: &EigenCmd) -> Result<Vec<CheckLine>> {
    match cmd {
        EigenCmd::Synth { m, lambda, seed } => {
            if m * m > ctx.cfg.dft_n_limit {
                return Err(Error::Capacity(format!("N = {} exceeds the DFT limit {}", m * m, ctx.cfg.dft_n_limit)));
            }
            let spec = EigenSpec::new(*m, *lambda, *seed);
            let (comb, report) = synthesize(&spec)?;
            let file = CombFile {
                spec: Some(spec),
                comb,
                report: Some(report.clone()),
            };
            ctx.json(&format!("comb_m{m}_{}.json", lambda.as_str()), &file)?;
            ctx.json("comb.json", &file)?;
            Ok(vec![eigen_line("eigen.synth", &report)])
        }
        EigenCmd::Verify { comb, lambda } => {
            let f = ctx.load_comb(comb)?;
            let lambda = lambda
                .or(f.comb.eigen_tag)
                .or(f.spec.map(|s| s.lambda))
                .ok_or_else(|| Error::Input("no eigenvalue given or recorded".into()))?;
            let rep = verify_eigen_properties(&f.comb, lambda);
            ctx.json("eigen_verify.json", &rep)?;
            Ok(vec![eigen_line("eigen.verify", &rep)])
        }
    }
}

fn family(ctx: &Ctx, cmd: &FamilyCmd) -> Result<Vec<CheckLine>> {
    let FamilyCmd::Build { fam } = cmd;
    let f = nested_family(&fam.k, fam.lambda, fam.seed)?;
    ctx.json("family.json", &f)?;
    let mut lines: Vec<CheckLine> = f
        .reports
        .iter()
        .zip(&f.k_seq)
        .map(|(r, k)| eigen_line(&format!("family.k{k}"), r))
        .collect();
    for n in 0..f.combs.len() {
        lines.push(CheckLine::flag(format!("family.marker{}_isolated", n + 1), f.marker_isolated(n)));
    }
    Ok(lines)
}

fn gaussians(scales: &[f64]) -> Result<Vec<Gaussian>> {
    if scales.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::Input("Gaussian scales must be positive".into()));
    }
    // off-center members keep odd and even parts both in play
    Ok(scales
        .iter()
        .flat_map(|&s| [Gaussian::new(s), Gaussian::new(s).centered(0.3), Gaussian::new(s).centered(-1.1).modulated(0.2)])
        .collect())
}

fn construct(ctx: &Ctx, cmd: &ConstructCmd) -> Result<Vec<CheckLine>> {
    let reg = &ctx.reg;
    match cmd {
        ConstructCmd::Kolountzakis { fam, depth, lo, hi, next_k } => {
            let f = nested_family(&fam.k, fam.lambda, fam.seed)?;
            let depth = depth.unwrap_or(f.combs.len());
            let s = kolountzakis_sigma(reg, &f, depth, *lo, *hi, *next_k)?;
            ctx.measure("kolountzakis", &s.measure)?;
            ctx.json("kolountzakis_certificate.json", &s.certificate)?;
            let one = qi(1);
            let w = window_norm(&s.measure, one, *lo, *hi - one)?;
            ctx.text("kolountzakis_window_norm.csv", &window_stats_csv(&w))?;
            let bound: f64 = (1..=depth).map(|n| 1.0 / (n * n) as f64).sum();
            Ok(vec![CheckLine::le("construct.kolountzakis.window_norm", w.sup_mass, bound)])
        }
        ConstructCmd::Favorov { fam, a, lo, hi } => {
            let f = nested_family(&fam.k, fam.lambda, fam.seed)?;
            let a = if a.is_empty() { vec![qi(1); fam.k.len()] } else { a.clone() };
            if a.len() != fam.k.len() {
                return Err(Error::Input(format!("{} coefficients for {} terms", a.len(), fam.k.len())));
            }
            let desc = series_descriptor(reg, "t", &fam.k, &a, &[])?;
            let p = favorov_pair(reg, &desc, &f, fam.k.len(), *lo, *hi)?;
            ctx.measure("favorov_Sigma", &p.big_sigma)?;
            ctx.measure("favorov_sigma", &p.sigma)?;
            ctx.json("favorov_descriptor.json", &desc)?;
            ctx.json("favorov_certificate.json", &p.certificate)?;
            let mut lines = vec![
                CheckLine::flag("construct.favorov.sigma_support", p.sigma_support_ok),
                CheckLine::flag("construct.favorov.Sigma_support", p.big_sigma_support_ok),
            ];
            let mut verdicts = Vec::new();
            for n in 1..=desc.depth() {
                let v = atom_identity_check(&p.sigma_term, &f, &desc, n, reg)?;
                lines.push(CheckLine::new(v.equals_a_n, format!("construct.favorov.atom_n{n}"), &v.weight, format!("={}", v.a_n)));
                verdicts.push(v);
            }
            ctx.json("favorov_atoms.json", &verdicts)?;
            let r = duality_residual(&p.sigma_term, &p.big_sigma_term, &gaussians(&[0.5, 1.0, 2.0])?, reg)?;
            ctx.text("favorov_duality.csv", &r.to_csv())?;
            lines.push(CheckLine::le("construct.favorov.duality", r.max_residual(), ctx.cfg.tol("duality", 1e-8)));
            Ok(lines)
        }
        ConstructCmd::Ex1 { depth, lambda, seed, bump_center, bump_width, radius } => {
            let bump = Bump { center: *bump_center, width: *bump_width };
            let inst = theorem_ex1_instance(reg, bump, *depth, *lambda, *seed)?;
            let (lo, hi) = (qi(-radius), qi(*radius));
            ctx.measure("ex1_Sigma", &inst.big_sigma.realize(reg, lo, hi)?)?;
            ctx.measure("ex1_sigma", &inst.sigma.realize(reg, lo, hi)?)?;
            ctx.json("ex1_params.json", &inst.params)?;
            ctx.json("ex1_descriptor.json", &inst.desc)?;
            ctx.json("ex1_certificate.json", &inst.certificate)?;
            let mut csv = String::from("n,exact,measured\n");
            for (n, (e, m)) in inst.bessel_exact.iter().zip(&inst.bessel_measured).enumerate() {
                csv.push_str(&format!("{},{},{}\n", n + 1, crate::measure::fmt_big(e), m));
            }
            ctx.text("ex1_bessel.csv", &csv)?;
            let mut lines = vec![CheckLine::new(
                inst.params.margin_ratio > 1.0,
                "construct.ex1.margin_ratio",
                inst.params.margin_ratio,
                ">1",
            )];
            for n in 1..=*depth {
                let v = atom_identity_check(&inst.sigma, &inst.family, &inst.desc, n, reg)?;
                lines.push(CheckLine::new(v.equals_a_n, format!("construct.ex1.atom_n{n}"), &v.weight, format!("={}", v.a_n)));
            }
            let total = inst.bessel_exact.last().cloned().unwrap_or_default();
            lines.push(CheckLine::new(
                total == BigRational::from_integer((*depth).into()),
                "construct.ex1.bessel",
                crate::measure::fmt_big(&total),
                format!("={depth}"),
            ));
            Ok(lines)
        }
        ConstructCmd::KsOmega { index } => {
            let p = ks_params(reg, "ks", (*index).max(1))?;
            let i = index.checked_sub(1).ok_or_else(|| Error::Input("index starts at 1".into()))?;
            let w = ks_omega(reg, p.a_ids(reg)?[i], p.b_ids(reg)?[i])?;
            ctx.measure("ks_omega", &w)?;
            let tv = total_variation_exact(&w);
            let sup = finite_fourier(&w)?.torus_sup(1e-12, 1_000_000)?;
            ctx.json("ks_omega_sup.json", &sup)?;
            let r2 = 8f64.sqrt();
            Ok(vec![
                CheckLine::new(
                    tv == Some(BigRational::from_integer(4.into())),
                    "construct.ks-omega.norm",
                    tv.map_or("inexact".into(), |x| crate::measure::fmt_big(&x)),
                    "=4",
                ),
                CheckLine::new(
                    sup.lower >= r2 - 1e-6 && sup.upper <= r2 * (1.0 + 1e-12),
                    "construct.ks-omega.hat_sup",
                    format!("[{},{}]", sup.lower, sup.upper),
                    "in[2sqrt2-1e-6,2sqrt2]",
                ),
            ])
        }
        ConstructCmd::KsTheta { n } => {
            let p = ks_params(reg, "ks", *n)?;
            let th = ks_theta(reg, &p, *n)?;
            ctx.measure("ks_theta", &th)?;
            let sup = theta_sup(reg, &p, *n)?;
            ctx.json("ks_theta_sup.json", &sup)?;
            let four_n = BigRational::from_integer(4u32.pow(*n as u32).into());
            Ok(vec![
                CheckLine::new(
                    total_variation_exact(&th) == Some(four_n.clone()),
                    "construct.ks-theta.norm",
                    th.len(),
                    format!("={}", crate::measure::fmt_big(&four_n)),
                ),
                CheckLine::le("construct.ks-theta.hat_sup", sup.upper, 2f64.powf(1.5 * *n as f64) * (1.0 + 1e-9)),
            ])
        }
        ConstructCmd::KsBigOmega { m, n } => {
            let n = n.unwrap_or(2 * m + 1);
            let p = ks_params(reg, "ks", n)?;
            let om = ks_big_omega(reg, &p, *m, n)?;
            let (lo, hi) = om.hat_sup_interval();
            let summary = serde_json::json!({
                "m": m,
                "n": n,
                "mass": om.mass(),
                "hat_sup_interval": [lo, hi],
                "theta_hat_sup": om.sup,
            });
            ctx.json("ks_Omega_summary.json", &summary)?;
            if n <= OMEGA_EXACT_CAP {
                let ex = FiniteSrc::Lazy(Arc::new(om)).materialize(reg)?;
                ctx.measure("ks_Omega", &ex)?;
            }
            let target = 0.5f64.powi(*m as i32);
            let rel = (lo - target).abs().max((hi - target).abs()) / target;
            Ok(vec![CheckLine::le("construct.ks-Omega.hat_sup_rel", rel, 1e-6)])
        }
        ConstructCmd::Thm341 { m0, depth, lambda, seed, radius, duality } => {
            let p = ks_params(reg, "ks", 2 * (m0 + depth) + 1)?;
            let t = theorem341_pair(reg, &p, *m0, *depth, *lambda, *seed, (qi(-radius), qi(*radius)))?;
            ctx.json("thm341_certificate.json", &t.certificate)?;
            ctx.json("thm341_growth.json", &t.growth)?;
            let bs = t.big_sigma.realize(reg, qi(-radius), qi(*radius + 1))?;
            ctx.measure("thm341_Sigma", &bs)?;
            let mut lines = vec![
                CheckLine::flag("construct.thm341.disjoint", t.disjoint),
                CheckLine::le("construct.thm341.Sigma_window_norm", t.sigma_hat_window_norm, 2.0),
            ];
            for g in &t.growth {
                lines.push(CheckLine::new(
                    g.holds,
                    format!("construct.thm341.growth_m{}", g.m),
                    format!("{:e}", g.ball_mass_lower),
                    format!(">={:e}", g.omega_mass),
                ));
            }
            let bound = (depth + 1) as f64 * 0.5f64.powi(*depth as i32 + 1);
            lines.push(CheckLine::le("construct.thm341.approximant_gap", t.approximant_gap, bound));
            if *duality {
                let r = duality_residual(&t.sigma, &t.big_sigma, &gaussians(&[0.5, 1.0, 2.0])?, reg)?;
                ctx.text("thm341_duality.csv", &r.to_csv())?;
                lines.push(CheckLine::le("construct.thm341.duality", r.max_residual(), ctx.cfg.tol("duality", 1e-8)));
            }
            Ok(lines)
        }
        ConstructCmd::Guinand { radius } => {
            let tau = guinand_comb(reg, *radius)?;
            ctx.measure("guinand", &tau)?;
            let r = reflect(&tau);
            let odd = r.atoms().len() == tau.atoms().len()
                && r.atoms().iter().zip(tau.atoms()).all(|(a, b)| a.coord == b.coord && a.weight == b.weight.neg());
            Ok(vec![CheckLine::new(odd, "construct.guinand.odd", tau.len(), "reflect=-tau")])
        }
        ConstructCmd::Example { which, n } => {
            let name = match which {
                ExampleKind::Kdelta => "kdelta",
                ExampleKind::Lattice => "lattice",
                ExampleKind::Factorial => "factorial",
            };
            let m = pedagogical_example(reg, name, *n)?;
            ctx.measure(name, &m)?;
            Ok(vec![CheckLine::new(true, format!("construct.example.{name}"), m.len(), "atoms")])
        }
    }
}

fn fourier(ctx: &Ctx, cmd: &FourierCmd) -> Result<Vec<CheckLine>> {
    match cmd {
        FourierCmd::Of { comb, measure, lo, hi, step } => {
            if let Some(c) = comb {
                let f = ctx.load_comb(c)?;
                let hat = f.comb.comb_fourier();
                let back = hat.comb_fourier_power(3);
                let diff = f
                    .comb
                    .weights
                    .iter()
                    .zip(&back.weights)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                ctx.json("comb_hat.json", &CombFile { spec: None, comb: hat, report: None })?;
                return Ok(vec![CheckLine::le("fourier.of.inversion", diff, 1e-10)]);
            }
            let p = measure.as_ref().ok_or_else(|| Error::Input("give --comb or --measure".into()))?;
            let m = ctx.load_measure(p)?;
            if m.coverage() != Coverage::All {
                return Err(Error::Coverage("transform samples need a finite measure".into()));
            }
            if !(*step > 0.0) || lo > hi {
                return Err(Error::Input("need step > 0 and lo <= hi".into()));
            }
            let tp = finite_fourier(&m)?;
            let count = ((hi - lo) / step).floor() as usize + 1;
            let mut csv = String::from("x,re,im\n");
            for j in 0..count {
                let x = lo + step * j as f64;
                let v = tp.eval(x);
                csv.push_str(&format!("{x},{},{}\n", v.re, v.im));
            }
            ctx.text("fourier_samples.csv", &csv)?;
            let at0 = tp.eval(0.0);
            let mass: Complex64 = m.atoms().iter().map(|a| a.weight.to_c64()).sum();
            Ok(vec![CheckLine::le("fourier.of.total_mass", (at0 - mass).norm(), 1e-12 * (1.0 + mass.norm()))])
        }
        FourierCmd::Duality { measure, claimed, scales, tol } => {
            let m = ctx.load_measure(measure)?;
            let mu = Term::measure(m.clone());
            let claimed_term = match claimed.parse::<Lambda>() {
                Ok(l) => mu.clone().scale(l.to_weight()),
                Err(_) => Term::measure(ctx.load_measure(Path::new(claimed))?),
            };
            let r = duality_residual(&mu, &claimed_term, &gaussians(scales)?, &ctx.reg)?;
            ctx.text("duality.csv", &r.to_csv())?;
            ctx.json("duality.json", &r)?;
            let tol = tol.unwrap_or_else(|| ctx.cfg.tol("duality", 1e-4));
            Ok(vec![CheckLine::le("fourier.duality.max_residual", r.max_residual(), tol)])
        }
    }
}

fn default_radii(m: &PointMeasure) -> Result<Vec<Q>> {
    let r_max = match m.coverage() {
        Coverage::Window { lo, hi } => {
            let r = if -lo < hi { -lo } else { hi };
            crate::exactnum::q_floor_int(&r)
        }
        Coverage::All => m.hull_f64().map_or(1, |(a, b)| a.abs().max(b.abs()).ceil() as i64),
        Coverage::Empty => 0,
    };
    if r_max < 1 {
        return Err(Error::Coverage("coverage too small for a growth profile".into()));
    }
    Ok(doubling_ladder(qi(1), qi(r_max)))
}

fn diag(ctx: &Ctx, cmd: &DiagCmd) -> Result<Vec<CheckLine>> {
    match cmd {
        DiagCmd::Growth { measure, radii, fit_lo, fit_hi } => {
            let m = ctx.load_measure(measure)?;
            let radii = if radii.is_empty() { default_radii(&m)? } else { radii.clone() };
            let g = match (fit_lo, fit_hi) {
                (Some(a), Some(b)) => growth_profile_fit(&m, &radii, (*a, *b))?,
                _ => growth_profile(&m, &radii)?,
            };
            ctx.json("growth.json", &g)?;
            ctx.text("growth.csv", &g.to_csv())?;
            let mono = g.samples.windows(2).all(|w| w[0].1 <= w[1].1);
            Ok(vec![CheckLine::new(
                mono,
                "diag.growth.exponent",
                format!("{:.4}({:?})", g.fitted_exponent, g.verdict),
                "masses-nondecreasing",
            )])
        }
        DiagCmd::Pdiscrete { measure, grid } => {
            let m = ctx.load_measure(measure)?;
            let grid = grid
                .iter()
                .map(|s| {
                    let (c, h) = s.split_once(':').ok_or_else(|| Error::Parse(format!("grid entry `{s}` is not c:h")))?;
                    let c: f64 = c.parse().map_err(|_| Error::Parse(format!("bad c in `{s}`")))?;
                    let h: f64 = h.parse().map_err(|_| Error::Parse(format!("bad h in `{s}`")))?;
                    Ok((c, h))
                })
                .collect::<Result<Vec<_>>>()?;
            let r = p_discreteness_probe(&m.positions_f64(), &grid);
            ctx.json("pdiscrete.json", &r)?;
            ctx.text("pdiscrete.csv", &r.to_csv())?;
            Ok(r.rows
                .iter()
                .map(|row| match row.result {
                    PairVerdict::SatisfiedOnTruncation => {
                        CheckLine::new(true, format!("diag.pdiscrete.c{}_h{}", row.c, row.h), "satisfied", "adjacent-pairs")
                    }
                    PairVerdict::ViolatedAt { x, y, gap, bound } => CheckLine::new(
                        gap < bound,
                        format!("diag.pdiscrete.c{}_h{}", row.c, row.h),
                        format!("violated-at({x},{y})"),
                        "witness-verified",
                    ),
                })
                .collect())
        }
        DiagCmd::Bohr { comb, k, radii, step, g } => {
            let f = ctx.load_comb(comb)?;
            let r = fourier_bohr(&Term::comb(f.comb), &Gaussian::new(g.scale), &SymbolicPoint::rational(*k), radii, *step, &ctx.reg)?;
            ctx.json("bohr.json", &r)?;
            ctx.text("bohr.csv", &r.to_csv())?;
            Ok(vec![CheckLine::le("diag.bohr.discrepancy", r.discrepancy(), ctx.cfg.tol("bohr", 1e-3))])
        }
        DiagCmd::Bessel { comb, k, g } => {
            let f = ctx.load_comb(comb)?;
            let hat = Term::comb(f.comb).fourier()?;
            let gh = Gaussian::new(g.scale).hat();
            let ks: Vec<SymbolicPoint> = k.iter().map(|x| SymbolicPoint::rational(*x)).collect();
            let r = bessel_partial_sums(&hat, &|x| gh.eval(x), &ks, &ctx.reg)?;
            ctx.json("bessel.json", &r)?;
            ctx.text("bessel.csv", &r.to_csv())?;
            let mono = r.partial_sums.windows(2).all(|w| w[0] <= w[1]);
            Ok(vec![CheckLine::new(mono, "diag.bessel.total", format!("{:e}", r.total()), "nondecreasing")])
        }
        DiagCmd::Apscan { measure, eps, lo, hi, step, base_lo, base_hi, g } => {
            let m = ctx.load_measure(measure)?;
            let eps = eps.unwrap_or_else(|| ctx.cfg.tol("apscan", 1e-9));
            let tf = TestFunction::Gaussian(Gaussian::new(g.scale));
            let r = almost_period_scan(&m, &tf, eps, (*lo, *hi), *step, (*base_lo, *base_hi))?;
            ctx.json("apscan.json", &r)?;
            ctx.text("apscan.csv", &r.to_csv())?;
            Ok(vec![CheckLine::new(
                r.sup_diff.iter().all(|s| *s < eps),
                "diag.apscan.periods",
                format!("count={},max_gap={}", r.periods_found.len(), r.max_gap),
                format!("sup_diff<{eps:e}"),
            )])
        }
        DiagCmd::Normap { measure, p, len, window } => {
            let m = ctx.load_measure(measure)?;
            let cands: Vec<SymbolicPoint> = p.iter().map(|x| SymbolicPoint::rational(*x)).collect();
            let rows = norm_ap_probe(&m, &cands, *len, (window.lo, window.hi))?;
            ctx.json("normap.json", &rows)?;
            ctx.text("normap.csv", &norm_ap_csv(&rows))?;
            Ok(rows
                .iter()
                .map(|r| CheckLine::new(r.norm.is_finite(), format!("diag.normap.p{}", r.candidate_f64), format!("{:e}", r.norm), "finite"))
                .collect())
        }
    }
}

fn verify(ctx: &Ctx, cmd: &VerifyCmd) -> Result<Vec<CheckLine>> {
    let VerifyCmd::All { seed, only } = cmd;
    let cfg = VerifyConfig { seed: *seed };
    let which: Vec<u8> = if only.is_empty() { (1..=10).collect() } else { only.clone() };
    let mut lines = Vec::new();
    let mut results = Vec::new();
    for n in which {
        let r = run_criterion(n, &cfg);
        for c in &r.checks {
            eprintln!("  {c}");
        }
        lines.push(CheckLine::new(r.pass(), format!("criterion{n}"), format!("{}/{}", r.checks.iter().filter(|c| c.pass).count(), r.checks.len()), "all-checks"));
        results.push(r);
    }
    // timings vary run to run; keep them out of the artifact
    let stable: Vec<_> = results
        .iter()
        .map(|r| {
            serde_json::json!({
                "number": r.number,
                "title": r.title,
                "pass": r.pass(),
                "checks": r.checks.iter().filter(|c| !c.id.ends_with("runtime_s")).collect::<Vec<_>>(),
            })
        })
        .collect();
    ctx.json("verify.json", &stable)?;
    Ok(lines)
}

/// A rational as `p/q` text.
pub fn fmt_rational(x: &Q) -> String {
    fmt_q(x)
}

/// Approximate value of a rational.
pub fn rational_f64(x: &Q) -> f64 {
    q_to_f64(x)
}
