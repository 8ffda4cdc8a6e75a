use std::io::{Read, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use xtorsion::acceptance::{run_suite, SuiteOptions, TOTAL_BUDGET};
use xtorsion::chain_complex::{homology, is_x_torsion, mapping_cone};
use xtorsion::colimit::{colimit_module, mu_from_diagram, mu_profile, DiagramMu};
use xtorsion::dg_nerve::{verify_functor, WitnessSigns};
use xtorsion::equivariant_morse::{build_bg_model, build_cm_eq, builtin_model, unit_torsion_check, GMorseData, UnitClass};
use xtorsion::io::{self, ComplexJson, ComposeJson, ConeJson, DiagramJson, FunctorDataJson, MatrixJson};
use xtorsion::linear_model::spectrum::UNITARY_TOL;
use xtorsion::linear_model::{c_r_linear, compose_paths, cz_index, mu_right_limit, spectrum, IsotopySpec, LinearIsotopy};
use xtorsion::simplex_paths::{parse_rational, StraightLinePath, Q};
use xtorsion::{Error, Result};

mod render;

#[derive(Parser, Debug)]
#[command(name = "xtorsion", version, about = "Torsion, index and path computations over truncated power series")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,

    /// Truncation precision for inputs that do not carry one (default: $XTORSION_PRECISION or 16).
    #[arg(long, global = true)]
    precision: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Conley-Zehnder index of a linear isotopy.
    Cz {
        /// Isotopy JSON: a file, `-` for stdin, or inline JSON.
        input: String,
    },
    /// μ of a linear isotopy, or the μ profile of a slope diagram.
    Mu {
        input: String,
        /// Diagram index to probe; omit for the full profile.
        #[arg(long)]
        at: Option<usize>,
    },
    /// Spectrum of the unitary time-one map in a window, with c_R.
    Spectrum {
        input: String,
        /// Window `a,b`.
        #[arg(long, default_value = "-2,2")]
        window: String,
    },
    /// Compose 1-simplices of isotopy families and check the endpoint identities.
    Compose { input: String },
    /// Check the structural equations of dg-nerve functor data.
    NerveVerify { input: String },
    /// Mapping cone of a degree-0 chain map, with its homology.
    Cone { input: String },
    /// Equivariant Morse homology and the unit verdict for a model file or built-in name.
    MorseEq {
        /// A GMorseData JSON file, inline JSON, or a name such as `pt:p=3` or `free-orbit:p=2`.
        model: String,
        /// Skeleton level of the classifying-space model.
        #[arg(long, default_value_t = 8)]
        level: usize,
    },
    /// Straight-line path data from cubical coordinates.
    Paths {
        /// Simplex dimension.
        #[arg(long)]
        n: usize,
        /// Comma-separated coordinates `x_1,…,x_{n−1}` as `a/b` or decimals.
        #[arg(long, default_value = "")]
        cube: String,
        /// Extra times at which to evaluate the path.
        #[arg(long, value_delimiter = ',')]
        at: Vec<String>,
    },
    /// μ along a slope diagram together with its colimit.
    DiagramMu {
        input: String,
        #[arg(long)]
        at: Option<usize>,
    },
    /// Run the acceptance suite.
    Selftest {
        /// Flip one Koszul sign before the dg-nerve witness check.
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(WitnessSigns::FIELDS))]
        corrupt_sign: Option<String>,
        /// Run only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

/// A finished command: the JSON report, its text rendering and whether it verified.
struct Report {
    value: Value,
    text: Option<String>,
    verified: bool,
}

impl Report {
    fn ok(value: Value) -> Self {
        Report { value, text: None, verified: true }
    }

    fn with_text(mut self, text: String) -> Self {
        self.text = Some(text);
        self
    }

    fn verified(mut self, v: bool) -> Self {
        self.verified = v;
        self
    }
}

fn read_input(arg: &str) -> Result<String> {
    let trimmed = arg.trim_start();
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Error::Input(format!("reading stdin: {e}")))?;
        Ok(s)
    } else if trimmed.starts_with('{') || trimmed.starts_with('[') {
        Ok(arg.to_string())
    } else {
        std::fs::read_to_string(arg).map_err(|e| Error::Input(format!("cannot read {arg}: {e}")))
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn parse_list(s: &str) -> Result<Vec<Q>> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(parse_rational).collect()
}

fn isotopy(input: &str) -> Result<LinearIsotopy> {
    LinearIsotopy::from_spec(&io::parse::<IsotopySpec>(&read_input(input)?)?)
}

fn cz(input: &str) -> Result<Report> {
    let iso = isotopy(input)?;
    let k = cz_index(&iso)?;
    Ok(Report::ok(json!({ "n": iso.n(), "cz": k })).with_text(k.to_string()))
}

fn mu(input: &str, at: Option<usize>, precision: usize) -> Result<Report> {
    let text = read_input(input)?;
    let raw: Value = io::parse(&text)?;
    if raw.get("slopes").is_some() {
        return diagram_mu(&text, at, precision);
    }
    let iso = LinearIsotopy::from_spec(&io::parse::<IsotopySpec>(&text)?)?;
    let m = mu_right_limit(&iso)?;
    let mut line = m.value.to_string();
    if m.right_limit {
        line.push_str(" (limit from above at a degenerate endpoint)");
    }
    Ok(Report::ok(json!({ "n": iso.n(), "mu": m.value, "right_limit": m.right_limit })).with_text(line))
}

fn spectrum_cmd(input: &str, window: &str) -> Result<Report> {
    let iso = isotopy(input)?;
    let bounds: Vec<f64> = window
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Input(format!("bad window {window:?}; expected a,b"))))
        .collect::<Result<_>>()?;
    let &[a, b] = bounds.as_slice() else {
        return Err(Error::Input(format!("bad window {window:?}; expected a,b")));
    };
    if !(a < b) {
        return Err(Error::Input(format!("empty window {window:?}")));
    }
    if !iso.unitary_endpoint(UNITARY_TOL) {
        return Err(Error::Domain("spectra are defined here for unitary time-one maps only".into()));
    }
    let sw = spectrum(iso.time_one(), (a, b))?;
    let cr = c_r_linear(&iso)?;
    Ok(Report::ok(json!({
        "window": [a, b],
        "angles": sw.angles,
        "points": sw.points,
        "distinct": sw.distinct(),
        "c_r": cr.value,
        "spectrality_gap": cr.spectrality_gap,
    })))
}

fn compose(input: &str) -> Result<Report> {
    let spec: ComposeJson = io::parse(&read_input(input)?)?;
    let families = spec.simplices.iter().map(|f| f.to_family()).collect::<Result<Vec<_>>>()?;
    let composed = compose_paths(&families)?;
    let check = composed.check();
    let mu_at = |s: f64| mu_right_limit(&composed.family.at(s)).map(|m| json!({ "mu": m.value, "right_limit": m.right_limit }));
    let mu = json!({ "start": mu_at(0.0)?, "end": mu_at(1.0)? });
    let value = json!({
        "label": composed.family.label(),
        "n": composed.family.n(),
        "start_error": check.start_error,
        "end_error": check.end_error,
        "holds": check.holds,
        "mu": mu,
    });
    Ok(Report::ok(value).verified(check.holds))
}

fn nerve_verify(input: &str, precision: usize) -> Result<Report> {
    let data = io::parse::<FunctorDataJson>(&read_input(input)?)?.to_data(precision)?;
    let report = verify_functor(&data)?;
    let residuals: Vec<Value> = report
        .residuals
        .iter()
        .map(|r| {
            let mut v = json!({ "simplex": r.simplex, "vanishes": r.vanishes });
            if !r.vanishes {
                v["residual"] = to_value(&MatrixJson::from_matrix(&r.residual));
            }
            v
        })
        .collect();
    let all = report.all_vanish();
    let lines: Vec<String> = report
        .residuals
        .iter()
        .map(|r| format!("{:?} {}", r.simplex, if r.vanishes { "vanishes" } else { "NONZERO" }))
        .collect();
    let text = format!("{}\n{}", lines.join("\n"), if all { "all residuals vanish" } else { "residuals do not vanish" });
    Ok(Report::ok(json!({ "residuals": residuals, "all_vanish": all })).with_text(text).verified(all))
}

fn cone(input: &str, precision: usize) -> Result<Report> {
    let map = io::parse::<ConeJson>(&read_input(input)?)?.to_map(precision)?;
    let c = mapping_cone(&map)?;
    let h = homology(&c);
    let (torsion, exponent) = is_x_torsion(&h);
    Ok(Report::ok(json!({
        "cone": to_value(&ComplexJson::from_complex(&c)),
        "homology": to_value(&h),
        "x_torsion": torsion,
        "annihilating_exponent": exponent,
    })))
}

fn morse_eq(model: &str, level: usize, precision: usize) -> Result<Report> {
    let trimmed = model.trim_start();
    let w: GMorseData = if model == "-" || trimmed.starts_with('{') || Path::new(model).is_file() {
        io::parse(&read_input(model)?)?
    } else {
        builtin_model(model)?
    };
    let bg = build_bg_model(w.p, level)?;
    let c = build_cm_eq(&w, &bg, precision)?;
    let h = c.homology();
    let verdict = unit_torsion_check(&c)?;
    let fixed = w.fixed_points().count();
    let expected = if fixed > 0 { verdict.class == UnitClass::NotTorsion } else { verdict.class != UnitClass::NotTorsion };
    Ok(Report::ok(json!({
        "p": w.p,
        "level": level,
        "precision": precision,
        "fixed_points": fixed,
        "homology": to_value(&h),
        "unit": to_value(&verdict),
        "dichotomy_holds": expected,
    }))
    .verified(expected))
}

fn paths(n: usize, cube: &str, at: &[String]) -> Result<Report> {
    let path = StraightLinePath::from_cube(n, parse_list(cube)?)?;
    let layout = path.interval_layout()?;
    let taus = path.taus();
    let mut times: Vec<Q> = taus.to_vec();
    times.extend(taus.windows(2).map(|w| (&w[0] + &w[1]) / Q::from_integer(2.into())));
    for t in at {
        times.push(parse_rational(t)?);
    }
    times.sort();
    times.dedup();
    let table = times.iter().map(|t| Ok((t.clone(), path.evaluate(t)?))).collect::<Result<Vec<_>>>()?;
    let strs = |v: &[Q]| v.iter().map(ToString::to_string).collect::<Vec<_>>();
    let value = json!({
        "n": n,
        "cube": strs(path.cube()),
        "taus": strs(taus),
        "layout": to_value(&layout)["intervals"],
        "breakpoints": path.breakpoints().iter().map(|p| strs(p)).collect::<Vec<_>>(),
        "evaluations": table.iter().map(|(t, p)| json!({ "tau": t.to_string(), "point": strs(p) })).collect::<Vec<_>>(),
    });
    let text = render::paths_table(&strs(taus), &layout.intervals, &table);
    Ok(Report::ok(value).with_text(text))
}

fn diagram_mu(text: &str, at: Option<usize>, precision: usize) -> Result<Report> {
    let d = io::parse::<DiagramJson>(text)?.to_diagram(precision)?;
    let colimit = colimit_module(&d)?;
    let mu = match at {
        Some(i) => to_value(&mu_from_diagram(&d, i)?),
        None => to_value(&mu_profile(&d)?),
    };
    let render_mu = |m: &DiagramMu| match m {
        DiagramMu::Finite(v) => v.to_string(),
        DiagramMu::NegInfinite => "-inf".into(),
        DiagramMu::Degenerate => "degenerate".into(),
    };
    let line = match at {
        Some(i) => render_mu(&mu_from_diagram(&d, i)?),
        None => mu_profile(&d)?.iter().map(render_mu).collect::<Vec<_>>().join(" "),
    };
    let slopes: Vec<String> = d.slopes().iter().map(|s| s.to_string()).collect();
    let text = format!("slopes {}\nmu     {}", slopes.join(" "), line);
    Ok(Report::ok(json!({ "slopes": d.slopes(), "mu": mu, "colimit": to_value(&colimit) })).with_text(text))
}

fn selftest(corrupt_sign: Option<String>, only: Vec<u8>, format: Format) -> Result<Report> {
    if let Some(bad) = only.iter().find(|&&id| !(1..=10).contains(&id)) {
        return Err(Error::Input(format!("no criterion {bad}; ids run from 1 to 10")));
    }
    let report = run_suite(&SuiteOptions { corrupt_sign, only });
    let ok = report.all_pass && report.within_budget;
    let mut lines: Vec<String> = report.criteria.iter().map(|c| c.line()).collect();
    if format == Format::Text {
        lines.push(format!("total {:.3} s / {} s", report.elapsed.as_secs_f64(), TOTAL_BUDGET.as_secs()));
    }
    Ok(Report::ok(to_value(&report)).with_text(lines.join("\n")).verified(ok))
}

fn run(cli: Cli) -> Result<Report> {
    let precision = match cli.precision {
        Some(0) => return Err(Error::Input("precision must be positive".into())),
        Some(n) => n,
        None => io::default_precision()?,
    };
    match cli.command {
        Command::Cz { input } => cz(&input),
        Command::Mu { input, at } => mu(&input, at, precision),
        Command::Spectrum { input, window } => spectrum_cmd(&input, &window),
        Command::Compose { input } => compose(&input),
        Command::NerveVerify { input } => nerve_verify(&input, precision),
        Command::Cone { input } => cone(&input, precision),
        Command::MorseEq { model, level } => morse_eq(&model, level, precision),
        Command::Paths { n, cube, at } => paths(n, &cube, &at),
        Command::DiagramMu { input, at } => diagram_mu(&read_input(&input)?, at, precision),
        Command::Selftest { corrupt_sign, only } => selftest(corrupt_sign, only, cli.format),
    }
}

/// 1 for failed verifications, 2 for input the command cannot accept.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ContractViolation(_) | Error::Precision(_) => 1,
        _ => 2,
    }
}

/// Writes a report line, tolerating a closed pipe.
fn emit(s: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{s}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    match run(cli) {
        Ok(report) => {
            let out = match format {
                Format::Json => serde_json::to_string_pretty(&report.value).expect("json"),
                Format::Text => report.text.unwrap_or_else(|| render::text(&report.value)),
            };
            emit(&out);
            ExitCode::from(if report.verified { 0 } else { 1 })
        }
        Err(e) => {
            if format == Format::Json {
                emit(&serde_json::to_string_pretty(&json!({ "error": e.to_string() })).expect("json"));
            }
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
