//! Command-line front end. [`run`] parses arguments, dispatches and returns
//! the process exit status: 0 on success, 1 for invalid input, 2 when the
//! mathematics says no (divergence, not balanced, inconclusive), 64 for
//! usage errors.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::catalog::{self, DomainDescriptor};
use crate::entropy_numeric::{self, EntropyEstimate};
use crate::error::{Error, Result};
use crate::exact::{self, format_rational, Rational};
use crate::geometry::{DomainModel, ModelKind};
use crate::hilbert::{self, BalanceReport, BalanceVerdict, EpsilonSample, Gauge, QuadratureSpec};
use crate::homog::{self, RootConstants};
use crate::point::{format_complex, Point, C64};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "diastatic", version, about = "Diastatic entropy and balanced metrics on bounded domains")]
pub struct Cli {
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads for quadrature (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct FormatArgs {
    #[arg(long, conflicts_with_all = ["csv", "table"])]
    pub json: bool,
    #[arg(long, conflicts_with = "table")]
    pub csv: bool,
    #[arg(long)]
    pub table: bool,
}

impl FormatArgs {
    fn resolve(&self, default: Format) -> Format {
        if self.json {
            Format::Json
        } else if self.csv {
            Format::Csv
        } else if self.table {
            Format::Table
        } else {
            default
        }
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// `disk`, `ball:n`, `polydisk:n`, `typeI:p,q` or `I:p,q`.
    pub model: String,
    /// Metric scale μ (the metric is μ·g_min).
    #[arg(long, default_value_t = 1.0, conflicts_with = "bergman")]
    pub mu: f64,
    /// Use the Bergman metric (μ = genus).
    #[arg(long)]
    pub bergman: bool,
}

impl ModelArgs {
    fn model(&self) -> Result<DomainModel> {
        let kind: ModelKind = self.model.parse()?;
        if self.bergman {
            DomainModel::bergman(kind)
        } else {
            DomainModel::new(kind, self.mu)
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank, root multiplicities, dimension, genus and entropy of a catalog domain.
    Invariants {
        /// e.g. `I:2,3`, `IV:5`, `V`, `disk`, `ball:2`.
        domain: Option<String>,
        /// List every domain of the sweep instead.
        #[arg(long, conflicts_with = "domain")]
        all: bool,
        /// Largest parameter in the sweep.
        #[arg(long, default_value_t = 6)]
        max_param: u64,
        #[command(flatten)]
        format: FormatArgs,
    },
    /// Exact entropy of a symmetric domain or of given root constants.
    Entropy {
        domain: Option<String>,
        /// RootConstants JSON file.
        #[arg(long, conflicts_with = "domain")]
        from_constants: Option<PathBuf>,
        /// Replace γ by the Bergman values before evaluating.
        #[arg(long)]
        bergman: bool,
        /// Report the entropy of λg and whether λg is balanced.
        #[arg(long)]
        lambda: Option<String>,
        #[command(flatten)]
        format: FormatArgs,
    },
    /// Root constants p, q, b, γ of a symmetric domain or from root-space dimensions.
    RootConstants {
        domain: Option<String>,
        /// JSON file `{rank, dims_upper, dims_half, gamma}`.
        #[arg(long, conflicts_with = "domain")]
        from_dims: Option<PathBuf>,
        #[command(flatten)]
        format: FormatArgs,
    },
    /// ε-function samples of the weighted Bergman space of λg.
    Epsilon {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        degree: Option<usize>,
        /// Comma-separated radii, sampled at `--angle`.
        #[arg(long, value_delimiter = ',', conflicts_with = "point")]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        angle: f64,
        /// Explicit sample point (repeatable), e.g. `0.3+0.1i` or `[0.1, 0.2]`.
        #[arg(long)]
        point: Vec<String>,
        /// Gauge coefficients α in φ + 2 Re(α·z).
        #[arg(long)]
        gauge: Option<String>,
        /// Tolerance for the truncation flag.
        #[arg(long, default_value_t = hilbert::DEFAULT_REL_TOL)]
        tol: f64,
        #[command(flatten)]
        format: FormatArgs,
    },
    /// Test whether λg is balanced on the default sample grid.
    CheckBalanced {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long, default_value_t = hilbert::DEFAULT_REL_TOL)]
        tol: f64,
        #[command(flatten)]
        format: FormatArgs,
    },
    /// Bracket the diastatic entropy numerically.
    EstimateEntropy {
        #[command(flatten)]
        model: ModelArgs,
        /// Base point; the origin by default.
        #[arg(long)]
        z0: Option<String>,
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
        #[command(flatten)]
        format: FormatArgs,
    },
}

/// Floats with 9 significant digits, `%g` style.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if !(-5..9).contains(&e) {
        let s = format!("{x:.8e}");
        let (mant, exp) = s.split_once('e').expect("exponent form");
        let mant = trim_zeros(mant);
        let exp: i32 = exp.parse().expect("integer exponent");
        format!("{mant}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        trim_zeros(&format!("{x:.*}", (8 - e).max(0) as usize)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// JSON number carrying the same 9 digits as [`fmt_float`].
fn num(x: f64) -> Value {
    fmt_float(x).parse::<f64>().ok().and_then(serde_json::Number::from_f64).map_or(Value::Null, Value::Number)
}

fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

fn complex_json(z: &Point) -> Value {
    Value::Array(z.0.iter().map(|&c| Value::String(format_complex(c))).collect())
}

/// Runs one command. Output goes to `out` unless `--output` is given;
/// diagnostics go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.threads {
        Some(0) => Err(Error::InvalidParameter("--threads must be at least 1".into())),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::InvalidParameter(e.to_string()))
            .and_then(|pool| pool.install(|| dispatch(&cli.command))),
        None => dispatch(&cli.command),
    };
    match result {
        Ok((text, code)) => {
            let written = match &cli.output {
                Some(path) => fs::write(path, text.as_bytes()).map_err(|e| e.to_string()),
                None => out.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                let _ = writeln!(err, "error: cannot write output: {e}");
                return EXIT_INVALID;
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_INVALID
            }
        }
    }
}

type Outcome = Result<(String, i32)>;

fn dispatch(cmd: &Command) -> Outcome {
    match cmd {
        Command::Invariants { domain, all, max_param, format } => invariants(domain.as_deref(), *all, *max_param, format.resolve(Format::Table)),
        Command::Entropy { domain, from_constants, bergman, lambda, format } => {
            entropy(domain.as_deref(), from_constants.as_ref(), *bergman, lambda.as_deref(), format.resolve(Format::Table))
        }
        Command::RootConstants { domain, from_dims, format } => {
            root_constants(domain.as_deref(), from_dims.as_ref(), format.resolve(Format::Json))
        }
        Command::Epsilon { model, lambda, degree, radii, angle, point, gauge, tol, format } => epsilon(
            &model.model()?,
            *lambda,
            *degree,
            radii,
            *angle,
            point,
            gauge.as_deref(),
            *tol,
            format.resolve(Format::Table),
        ),
        Command::CheckBalanced { model, lambda, degree, tol, format } => {
            check_balanced(&model.model()?, *lambda, *degree, *tol, format.resolve(Format::Table))
        }
        Command::EstimateEntropy { model, z0, tol, format } => estimate(&model.model()?, z0.as_deref(), *tol, format.resolve(Format::Json)),
    }
}

fn require<'a>(domain: Option<&'a str>, what: &str) -> Result<&'a str> {
    domain.ok_or_else(|| Error::InvalidParameter(format!("a domain or {what} is required")))
}

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))
}

fn descriptor_json(d: &DomainDescriptor) -> String {
    let base = serde_json::to_string(d).expect("descriptor serializes");
    let entropy = format_rational(&catalog::entropy_symmetric(d));
    format!("{},\"entropy\":\"{entropy}\"}}", base.trim_end_matches('}'))
}

fn invariants(domain: Option<&str>, all: bool, max_param: u64, format: Format) -> Outcome {
    let list = if all { catalog::sweep(max_param) } else { vec![catalog::parse_domain(require(domain, "--all")?)?] };
    let text = match format {
        Format::Json if all => format!("[{}]\n", list.iter().map(descriptor_json).collect::<Vec<_>>().join(",")),
        Format::Json => format!("{}\n", descriptor_json(&list[0])),
        Format::Csv | Format::Table => {
            let sep = if format == Format::Csv { "," } else { "\t" };
            let mut s = ["domain", "family", "rank", "a", "b", "dim", "genus", "entropy"].join(sep) + "\n";
            for d in &list {
                let row = [
                    d.label(),
                    d.family.to_string(),
                    d.rank.to_string(),
                    d.a.to_string(),
                    d.b.to_string(),
                    d.dim.to_string(),
                    d.genus.to_string(),
                    format_rational(&catalog::entropy_symmetric(d)),
                ];
                s += &(row.join(sep) + "\n");
            }
            s
        }
    };
    Ok((text, EXIT_OK))
}

fn entropy(domain: Option<&str>, constants: Option<&PathBuf>, bergman: bool, lambda: Option<&str>, format: Format) -> Outcome {
    let mut c = match constants {
        Some(path) => RootConstants::from_json(&read(path)?)?,
        None => catalog::symmetric_root_constants(&catalog::parse_domain(require(domain, "--from-constants")?)?),
    };
    if bergman {
        c = homog::bergman_gamma(&c);
    }
    let ent = homog::entropy_homogeneous(&c);
    let scaled: Option<(Rational, Rational, bool)> = match lambda {
        Some(l) => {
            let l = exact::parse_rational(l)?;
            let s = homog::entropy_scaled(&ent, &l)?;
            let balanced = homog::is_balanced_at(&c, &l);
            Some((l, s, balanced))
        }
        None => None,
    };
    let code = match &scaled {
        Some((_, _, false)) => EXIT_NUMERICAL,
        _ => EXIT_OK,
    };
    let text = match format {
        Format::Json => {
            let mut v = json!({ "entropy": format_rational(&ent), "threshold": format_rational(&homog::balanced_threshold(&c)) });
            if let Some((l, s, b)) = &scaled {
                v["lambda"] = json!(format_rational(l));
                v["scaled_entropy"] = json!(format_rational(s));
                v["balanced"] = json!(b);
            }
            format!("{v}\n")
        }
        _ => match &scaled {
            None => format!("{}\n", format_rational(&ent)),
            Some((l, s, b)) => format!(
                "entropy\t{}\nlambda\t{}\nscaled_entropy\t{}\nbalanced\t{}\n",
                format_rational(&ent),
                format_rational(l),
                format_rational(s),
                if *b { "yes" } else { "no" }
            ),
        },
    };
    Ok((text, code))
}

#[derive(serde::Deserialize)]
struct RootDims {
    rank: usize,
    #[serde(default)]
    dims_upper: Vec<Vec<u64>>,
    dims_half: Vec<u64>,
    #[serde(with = "exact::serde_rational_vec")]
    gamma: Vec<Rational>,
}

fn root_constants(domain: Option<&str>, dims: Option<&PathBuf>, format: Format) -> Outcome {
    let c = match dims {
        Some(path) => {
            let d: RootDims = serde_json::from_str(&read(path)?).map_err(|e| Error::Parse(e.to_string()))?;
            homog::constants_from_root_dims(d.rank, &d.dims_upper, &d.dims_half, &d.gamma)?
        }
        None => catalog::symmetric_root_constants(&catalog::parse_domain(require(domain, "--from-dims")?)?),
    };
    let text = match format {
        Format::Json => format!("{}\n", c.to_json()),
        _ => {
            let sep = if format == Format::Csv { "," } else { "\t" };
            let mut s = ["k", "p", "q", "b", "gamma"].join(sep) + "\n";
            for k in 0..c.rank {
                let row = [(k + 1).to_string(), format_rational(&c.p[k]), format_rational(&c.q[k]), format_rational(&c.b[k]), format_rational(&c.gamma[k])];
                s += &(row.join(sep) + "\n");
            }
            s
        }
    };
    Ok((text, EXIT_OK))
}

fn provenance(model: &DomainModel, lambda: f64, degree: usize, spec: &QuadratureSpec, tol: f64) -> String {
    format!(
        "model={} mu={} lambda={} degree={} quadrature={} tol={}",
        model.kind,
        fmt_float(model.scale),
        fmt_float(lambda),
        degree,
        spec.describe(),
        fmt_float(tol)
    )
}

fn parse_gauge(s: &str) -> Result<Gauge> {
    let p: Point = s.parse()?;
    Ok(Gauge::linear(p.0))
}

fn sample_row(s: &EpsilonSample) -> (C64, f64, f64, bool) {
    (s.point.0[0], s.radius, s.epsilon, s.truncation_limited)
}

#[allow(clippy::too_many_arguments)]
fn epsilon(
    model: &DomainModel,
    lambda: f64,
    degree: Option<usize>,
    radii: &[f64],
    angle: f64,
    points: &[String],
    gauge: Option<&str>,
    tol: f64,
    format: Format,
) -> Outcome {
    let degree = degree.unwrap_or_else(|| hilbert::default_degree(model));
    let gauge = match gauge {
        Some(g) => parse_gauge(g)?,
        None => Gauge::none(),
    };
    let pts: Vec<Point> = if !points.is_empty() {
        points.iter().map(|p| p.parse()).collect::<Result<_>>()?
    } else if !radii.is_empty() {
        radii.iter().map(|&r| model.sample_point(r, angle)).collect()
    } else {
        return Err(Error::InvalidParameter("give --radii or --point".into()));
    };
    for p in &pts {
        model.check(p)?;
    }
    let spec = QuadratureSpec::auto(model, degree, &gauge);
    let ka = hilbert::build_gauged_space(model, lambda, degree, gauge, spec)?;
    let samples: Vec<EpsilonSample> = pts.iter().map(|z| ka.epsilon_sample(z, tol)).collect::<Result<_>>()?;
    let prov = provenance(model, lambda, degree, &spec, tol);
    let flag = |t: bool| if t { "truncation-limited" } else { "ok" };
    let text = match format {
        Format::Json => {
            let rows: Vec<Value> = samples
                .iter()
                .map(|s| {
                    let (z, r, e, t) = sample_row(s);
                    json!({ "point": complex_json(&s.point), "re": num(z.re), "im": num(z.im), "radius": num(r), "epsilon": num(e), "N": degree, "tail_flag": flag(t) })
                })
                .collect();
            format!("{}\n", json!({ "provenance": prov, "samples": rows }))
        }
        Format::Csv | Format::Table => {
            let sep = if format == Format::Csv { "," } else { "\t" };
            let mut s = format!("# {prov}\n") + &["re", "im", "radius", "epsilon", "N", "tail_flag"].join(sep) + "\n";
            for smp in &samples {
                let (z, r, e, t) = sample_row(smp);
                let row = [fmt_float(z.re), fmt_float(z.im), fmt_float(r), fmt_float(e), degree.to_string(), flag(t).to_string()];
                s += &(row.join(sep) + "\n");
            }
            s
        }
    };
    Ok((text, EXIT_OK))
}

fn verdict_name(v: BalanceVerdict) -> &'static str {
    match v {
        BalanceVerdict::Balanced => "balanced",
        BalanceVerdict::NotBalanced => "not-balanced",
        BalanceVerdict::Inconclusive => "inconclusive",
        BalanceVerdict::Degenerate => "degenerate",
    }
}

fn check_balanced(model: &DomainModel, lambda: f64, degree: Option<usize>, tol: f64, format: Format) -> Outcome {
    let rep: BalanceReport = hilbert::check_balanced(model, lambda, degree, None, tol)?;
    let spec = QuadratureSpec::auto(model, rep.degree, &Gauge::none());
    let prov = provenance(model, lambda, rep.degree, &spec, tol);
    let code = if rep.verdict == BalanceVerdict::Balanced { EXIT_OK } else { EXIT_NUMERICAL };
    let text = match format {
        Format::Json => {
            let v = json!({
                "provenance": prov,
                "verdict": verdict_name(rep.verdict),
                "balanced": rep.balanced,
                "mean": num(rep.mean),
                "deviation": num(rep.deviation),
                "truncation_limited": rep.truncation_limited,
                "reason": rep.reason,
                "samples": rep.samples.iter().map(|s| json!({ "point": complex_json(&s.point), "radius": num(s.radius), "epsilon": num(s.epsilon) })).collect::<Vec<_>>(),
            });
            format!("{v}\n")
        }
        _ => {
            let mut s = format!("# {prov}\nverdict\t{}\n", verdict_name(rep.verdict));
            if let Some(r) = &rep.reason {
                s += &format!("reason\t{r}\n");
            } else {
                s += &format!("mean\t{}\ndeviation\t{}\ntruncation_limited\t{}\n", fmt_float(rep.mean), fmt_float(rep.deviation), rep.truncation_limited);
            }
            s
        }
    };
    Ok((text, code))
}

fn estimate_json(est: &EntropyEstimate, model: &DomainModel, tol: f64) -> Value {
    json!({
        "lower": num(est.lower),
        "upper": num(est.upper),
        "z0": complex_json(&est.z0),
        "inconclusive": est.inconclusive.map(|(a, b)| nums(&[a, b])),
        "provenance": format!("model={} mu={} tol={} shells=4..14 bracket=open", model.kind, fmt_float(model.scale), fmt_float(tol)),
        "probes": est.probes.iter().map(|p| json!({ "c": num(p.c), "verdict": p.verdict, "ratios": nums(&p.ratios) })).collect::<Vec<_>>(),
    })
}

fn estimate(model: &DomainModel, z0: Option<&str>, tol: f64, format: Format) -> Outcome {
    let z0 = match z0 {
        Some(s) => s.parse()?,
        None => Point::origin(model.dim()),
    };
    let est = entropy_numeric::estimate_entropy(model, &z0, tol)?;
    let text = match format {
        Format::Json => format!("{}\n", estimate_json(&est, model, tol)),
        _ => {
            let mut s = format!("# model={} mu={} tol={}\nlower\t{}\nupper\t{}\n", model.kind, fmt_float(model.scale), fmt_float(tol), fmt_float(est.lower), fmt_float(est.upper));
            s += "c\tverdict\n";
            for p in &est.probes {
                s += &format!("{}\t{}\n", fmt_float(p.c), serde_json::to_value(p.verdict).expect("verdict").as_str().unwrap_or(""));
            }
            s
        }
    };
    Ok((text, EXIT_OK))
}
