//! Command-line surface: argument parsing, subcommand dispatch, structured
//! reports, and exit-code policy (0 success, 1 usage error, 2 numerical
//! failure).

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use holodyn::dynamics::PointClass;
use holodyn::linearize::{boettcher_chart, koenigs_chart_with_cap};
use holodyn::parabolic::{build_petals, fatou_coordinate, PetalType};
use holodyn::rotation::{condition_report, construct_liouville, GapSchedule, RotationNumber};
use holodyn::siegel::{default_radial_schedule, radial_scan, small_cycle_search};
use holodyn::{Cx, DynError, RationalMap};

use crate::expr::parse_map;
use crate::render::{figure_preset, render_julia, Overlay, RenderSpec};
use crate::report::{fmt_complex, render_all, Format, Record};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Text => Format::Text,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "holodyn", version, about = "Local fixed-point theory of holomorphic maps: classification, linearizing coordinates, rotation arithmetic, and Julia-set rendering")]
pub struct Cli {
    /// Decimal digits of working precision for rotation arithmetic
    #[arg(long, global = true, default_value_t = 200)]
    pub precision: u32,
    /// Iteration cap for chart construction and rendering
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// Residual tolerance used by pass/fail fields in reports
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Output file (images)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for rendering (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for any sampling performed by reports
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Text)]
    pub format: FormatArg,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Locate and classify the fixed points of a map
    Classify {
        #[arg(long)]
        map: String,
    },
    /// Build a linearizing chart (Koenigs or Boettcher) and report residuals
    Linearize {
        #[arg(long)]
        map: String,
        /// Complex literal selecting the fixed point nearest to it
        #[arg(long)]
        at: Option<String>,
    },
    /// Petal geometry and Fatou-coordinate residuals at a parabolic point
    Petals {
        #[arg(long)]
        map: String,
        /// Wedge angle parameter in (0, pi/8)
        #[arg(long, default_value_t = std::f64::consts::PI / 16.0)]
        epsilon: f64,
    },
    /// Continued-fraction condition ladder for a rotation number
    Arith {
        #[arg(long)]
        xi: String,
        #[arg(long, default_value_t = 30)]
        depth: usize,
    },
    /// Radial Siegel-size scan of eta along e^(2 pi i xi)
    Siegel {
        #[arg(long)]
        xi: String,
        /// Radial schedule depth: r_k = 1 - 2^-k for k = 1..=kmax
        #[arg(long, default_value_t = 14)]
        kmax: i32,
    },
    /// Small-cycle search for z^2 + lambda z near an indifferent point
    Cycles {
        #[arg(long)]
        xi: String,
        #[arg(long, default_value_t = 8)]
        qmax: usize,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
    },
    /// Render a Julia set to a PGM image
    Render {
        #[arg(long)]
        map: String,
        #[arg(long, default_value = "0")]
        center: String,
        #[arg(long, default_value_t = 3.2)]
        width: f64,
        /// Resolution as WIDTHxHEIGHT
        #[arg(long, default_value = "256x256")]
        res: String,
        #[arg(long, default_value = "none")]
        overlay: String,
        #[arg(long, default_value_t = 10)]
        levels: usize,
    },
    /// Render a named figure preset (fig3 fig4 fig5 fig8 fig9 fig10a fig10b)
    Preset {
        name: String,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<DynError> for CliError {
    fn from(e: DynError) -> Self {
        match e {
            DynError::Invalid(_) | DynError::BadSchedule(_) | DynError::BadMap(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Numerical(other.to_string()),
        }
    }
}

fn parse_complex(text: &str) -> Result<Complex64, CliError> {
    let expr = parse_map(text).map_err(|e| CliError::Usage(e.to_string()))?;
    let a = expr.eval(Complex64::new(0.0, 0.0));
    let b = expr.eval(Complex64::new(1.0, 1.0));
    if (a - b).norm() > 0.0 {
        return Err(CliError::Usage(format!("'{text}' is not a constant")));
    }
    Ok(a)
}

/// Rotation-number specs: golden | cbrt14 | liouville | liouville:G1,G2,...
/// | p/q | decimal like 0.78705954039469.
pub fn parse_xi(text: &str) -> Result<RotationNumber, CliError> {
    match text {
        "golden" => return Ok(RotationNumber::GoldenMean),
        "cbrt14" | "cbrt(1/4)" => return Ok(RotationNumber::CbrtQuarter),
        "liouville" => return Ok(construct_liouville(GapSchedule::Factorial)?),
        _ => {}
    }
    if let Some(rest) = text.strip_prefix("liouville:") {
        let gaps: Result<Vec<u64>, _> = rest.split(',').map(|g| g.trim().parse()).collect();
        let gaps = gaps.map_err(|_| CliError::Usage(format!("bad gap list '{rest}'")))?;
        return Ok(construct_liouville(GapSchedule::Custom(gaps))?);
    }
    if let Some((p, q)) = text.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| CliError::Usage(format!("bad fraction '{text}'")))?;
        let q: i64 = q.trim().parse().map_err(|_| CliError::Usage(format!("bad fraction '{text}'")))?;
        if q == 0 {
            return Err(CliError::Usage("zero denominator".into()));
        }
        return Ok(RotationNumber::rational(p, q));
    }
    if let Some(frac) = text.strip_prefix("0.").or_else(|| text.strip_prefix(".")) {
        if !frac.is_empty() && frac.bytes().all(|b| b.is_ascii_digit()) {
            return Ok(RotationNumber::decimal(frac, frac.len() as u32));
        }
    }
    Err(CliError::Usage(format!(
        "cannot parse rotation number '{text}' (try golden, cbrt14, liouville, liouville:2,52, p/q, or a decimal)"
    )))
}

fn compile_map(text: &str) -> Result<(RationalMap, bool), CliError> {
    let expr = parse_map(text).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(expr.compile()?)
}

fn class_name(class: &PointClass) -> String {
    match class {
        PointClass::Superattracting => "superattracting".into(),
        PointClass::Attracting => "attracting".into(),
        PointClass::Repelling => "repelling".into(),
        PointClass::RationallyIndifferent { p, q } => {
            format!("rationally-indifferent({p}/{q})")
        }
        PointClass::IrrationallyIndifferent { xi } => {
            format!("irrationally-indifferent(xi={xi:.12})")
        }
    }
}

fn location_str(loc: Cx) -> String {
    match loc {
        Cx::Finite(z) => fmt_complex(z),
        Cx::Inf => "inf".into(),
    }
}

pub fn run(cli: &Cli) -> Result<String, CliError> {
    if let Some(t) = cli.threads {
        // best effort: the global pool can only be configured once
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let format: Format = cli.format.into();
    match &cli.command {
        Command::Classify { map } => {
            let (map, simplified) = compile_map(map)?;
            let records = map.find_fixed_points()?;
            let mut out = Vec::new();
            for r in &records {
                out.push(
                    Record::new()
                        .set("class", class_name(&r.class))
                        .set("location", location_str(r.location))
                        .set("multiplicity", r.multiplicity)
                        .set("multiplier", fmt_complex(r.multiplier))
                        .set("period", r.period),
                );
            }
            if simplified {
                out.push(Record::new().set("note", "common numerator/denominator factor simplified"));
            }
            Ok(render_all(&out, format))
        }
        Command::Linearize { map, at } => {
            let (map, _) = compile_map(map)?;
            let records = map.find_fixed_points()?;
            let record = match at {
                Some(text) => {
                    let target = parse_complex(text)?;
                    records
                        .iter()
                        .filter(|r| matches!(r.location, Cx::Finite(_)))
                        .min_by(|a, b| {
                            let da = match a.location {
                                Cx::Finite(z) => (z - target).norm(),
                                Cx::Inf => f64::INFINITY,
                            };
                            let db = match b.location {
                                Cx::Finite(z) => (z - target).norm(),
                                Cx::Inf => f64::INFINITY,
                            };
                            da.partial_cmp(&db).unwrap()
                        })
                }
                None => records.iter().find(|r| {
                    matches!(
                        r.class,
                        PointClass::Attracting | PointClass::Repelling | PointClass::Superattracting
                    )
                }),
            }
            .ok_or_else(|| CliError::Numerical("no suitable fixed point found".into()))?;
            let tol = cli.tol.unwrap_or(1e-8);
            match record.class {
                PointClass::Superattracting => {
                    let chart = boettcher_chart(&map, record)?;
                    let n = chart.degree as i32;
                    // sample the functional equation away from the fixed point
                    let mut residual: f64 = 0.0;
                    for k in 0..24 {
                        let theta = 2.0 * std::f64::consts::PI * k as f64 / 24.0;
                        let z = match record.location {
                            Cx::Inf => Complex64::from_polar(6.0, theta),
                            Cx::Finite(c) => c + Complex64::from_polar(0.05, theta),
                        };
                        let fz = match map.eval(Cx::Finite(z)) {
                            Cx::Finite(v) => v,
                            Cx::Inf => continue,
                        };
                        if let (Ok(a), Ok(b)) = (chart.evaluate(fz), chart.evaluate(z)) {
                            residual = residual.max((a - b.powi(n)).norm());
                        }
                    }
                    let rec = Record::new()
                        .set("chart", "boettcher")
                        .set("degree", n)
                        .set("location", location_str(record.location))
                        .set("pass", residual <= tol)
                        .set("residual_sup", format!("{residual:.3e}"));
                    Ok(render_all(&[rec], format))
                }
                PointClass::Attracting | PointClass::Repelling => {
                    let cap = cli.max_iter.unwrap_or(100_000);
                    let chart = koenigs_chart_with_cap(&map, record, cap)?;
                    let fixed = chart.fixed_point();
                    let lambda = chart.multiplier();
                    let mut residual: f64 = 0.0;
                    for k in 0..24 {
                        let theta = 2.0 * std::f64::consts::PI * k as f64 / 24.0;
                        let z = fixed + Complex64::from_polar(0.3 * chart.local_radius(), theta);
                        let fz = match map.eval(Cx::Finite(z)) {
                            Cx::Finite(v) => v,
                            Cx::Inf => continue,
                        };
                        if let (Ok(a), Ok(b)) = (chart.evaluate(fz), chart.evaluate(z)) {
                            residual = residual.max((a - lambda * b).norm());
                        }
                    }
                    let rec = Record::new()
                        .set("chart", "koenigs")
                        .set("local_radius", format!("{:.6e}", chart.local_radius()))
                        .set("location", location_str(record.location))
                        .set("multiplier", fmt_complex(lambda))
                        .set("pass", residual <= tol)
                        .set("residual_sup", format!("{residual:.3e}"));
                    Ok(render_all(&[rec], format))
                }
                _ => Err(CliError::Numerical(format!(
                    "fixed point at {} is indifferent; use petals/siegel commands",
                    location_str(record.location)
                ))),
            }
        }
        Command::Petals { map, epsilon } => {
            let (map, _) = compile_map(map)?;
            let records = map.find_fixed_points()?;
            let record = records
                .iter()
                .find(|r| matches!(r.class, PointClass::RationallyIndifferent { .. }))
                .ok_or_else(|| CliError::Numerical("no parabolic fixed point found".into()))?;
            let petals = build_petals(&map, record, *epsilon)?;
            let mut out = Vec::new();
            for p in &petals {
                let mut rec = Record::new()
                    .set("c", format!("{:.6e}", p.c))
                    .set("direction", fmt_complex(p.direction))
                    .set("epsilon", p.epsilon)
                    .set("index", p.index)
                    .set("r", format!("{:.6e}", p.r))
                    .set(
                        "type",
                        match p.petal_type {
                            PetalType::Attracting => "attracting",
                            PetalType::Repelling => "repelling",
                        },
                    );
                if p.petal_type == PetalType::Attracting {
                    let chart = fatou_coordinate(p)?;
                    // Abel residual |alpha(f(z)) - alpha(z) - 1| on interior samples
                    let mut residual: f64 = 0.0;
                    for s in 0..6 {
                        let w = Complex64::new(p.c + 4.0 + s as f64, (s as f64 - 2.5) * 0.8);
                        let z = p.from_w(w);
                        let (z1, _) = p.step_w(z)?;
                        if let (Ok(a), Ok(b)) = (chart.evaluate(z1), chart.evaluate(z)) {
                            residual = residual.max((a - b - 1.0).norm());
                        }
                    }
                    rec = rec.set("abel_residual_sup", format!("{residual:.3e}"));
                }
                out.push(rec);
            }
            Ok(render_all(&out, format))
        }
        Command::Arith { xi, depth } => {
            let xi = parse_xi(xi)?;
            let report = condition_report(&xi, *depth)?;
            let mut out = vec![Record::new()
                .set("depth", report.depth)
                .set("terminated", report.terminated)
                .set("xi", format!("{:.15}", xi.to_f64()))];
            let mut entries = report.entries.clone();
            entries.sort_by(|a, b| a.name.cmp(&b.name));
            for e in entries {
                out.push(
                    Record::new()
                        .set("condition", &e.name)
                        .set("statistic", format!("{:.6e}", e.statistic))
                        .set("verdict", &e.verdict)
                        .set("witness", &e.witness),
                );
            }
            Ok(render_all(&out, format))
        }
        Command::Siegel { xi, kmax } => {
            let xi = parse_xi(xi)?;
            let radii: Vec<f64> = if *kmax == 14 {
                default_radial_schedule()
            } else {
                (1..=*kmax).map(|k| 1.0 - 0.5f64.powi(k)).collect()
            };
            let est = radial_scan(&xi, &radii)?;
            let mut out = Vec::new();
            for (r, v) in &est.samples {
                out.push(
                    Record::new()
                        .set("abs_eta", format!("{v:.9e}"))
                        .set("radius", format!("{r:.10}")),
                );
            }
            out.push(
                Record::new()
                    .set("cr_residual", format!("{:.3e}", est.cr_residual))
                    .set("rho", format!("{:.9e}", est.rho))
                    .set("verdict", est.verdict)
                    .set("xi", format!("{:.15}", est.xi)),
            );
            Ok(render_all(&out, format))
        }
        Command::Cycles { xi, qmax, delta } => {
            let xi = parse_xi(xi)?;
            let lambda = xi.multiplier();
            let map = RationalMap::quadratic_lambda(lambda);
            let report = small_cycle_search(&map, lambda, *qmax, *delta)?;
            let mut out = Vec::new();
            for c in &report.cycles {
                let pts = c
                    .points
                    .iter()
                    .map(|z| fmt_complex(*z))
                    .collect::<Vec<_>>()
                    .join(";");
                out.push(
                    Record::new()
                        .set("cycle_multiplier", fmt_complex(c.multiplier))
                        .set("period", c.q)
                        .set("points", pts),
                );
            }
            for (q, err) in &report.product_checks {
                out.push(
                    Record::new()
                        .set("product_identity_rel_error", format!("{err:.3e}"))
                        .set("q", q),
                );
            }
            for (q, min_mod, bound) in &report.bound_witnesses {
                out.push(
                    Record::new()
                        .set("bound", format!("{bound:.6e}"))
                        .set("min_nonzero_fixed_point", format!("{min_mod:.6e}"))
                        .set("q", q),
                );
            }
            let mut summary = Record::new()
                .set("cycles_found", report.cycles.len())
                .set("delta", delta)
                .set("lambda", fmt_complex(lambda))
                .set("qmax", qmax);
            if let Some(cap) = report.capped_at {
                summary = summary.set("capped_at", cap);
            }
            out.push(summary);
            Ok(render_all(&out, format))
        }
        Command::Render { map, center, width, res, overlay, levels } => {
            let center = parse_complex(center)?;
            let (rw, rh) = res
                .split_once('x')
                .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
                .ok_or_else(|| CliError::Usage(format!("bad resolution '{res}'")))?;
            let overlay: Overlay = overlay.parse().map_err(CliError::Usage)?;
            let spec = RenderSpec {
                map: map.clone(),
                center,
                width: *width,
                resolution: (rw, rh),
                overlay,
                max_iter: cli.max_iter.unwrap_or(2000),
                escape_radius: 4.0,
                levels: *levels,
            };
            write_render(&spec, cli, format, "render.pgm")
        }
        Command::Preset { name } => {
            let mut spec = figure_preset(name)?;
            if let Some(m) = cli.max_iter {
                spec.max_iter = m;
            }
            let default_name = format!("{name}.pgm");
            write_render(&spec, cli, format, &default_name)
        }
    }
}

fn write_render(
    spec: &RenderSpec,
    cli: &Cli,
    format: Format,
    default_name: &str,
) -> Result<String, CliError> {
    let out_path = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(default_name));
    let rendered = render_julia(spec)?;
    rendered
        .image
        .write_pgm(&out_path)
        .map_err(|e| CliError::Numerical(format!("cannot write {}: {e}", out_path.display())))?;
    let mut records = Vec::new();
    for w in &rendered.warnings {
        records.push(Record::new().set("warning", w));
    }
    records.push(
        Record::new()
            .set("file", out_path.display())
            .set("height", rendered.image.height)
            .set("map", &spec.map)
            .set("width", rendered.image.width),
    );
    Ok(render_all(&records, format))
}

/// Entry point shared by main and the tests: returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version as "errors" with success status
            if e.use_stderr() {
                eprintln!("{e}");
                return 1;
            }
            print!("{e}");
            return 0;
        }
    };
    match run(&cli) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}
