//! Command-line front end. Every subcommand prints one JSON document (keys sorted,
//! floats with 17 significant digits) or a CSV table.
//!
//! Exit codes: 0 on success, 2 on usage, parse or precondition errors, 1 when the
//! numerics could not produce an answer.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::components::{counting_curve, min_component_distance, rasterize, sublevel_components};
use crate::degree::{certify_zero, covered_ball_radius, preimage_degree, ZeroVerdict};
use crate::error::{Error, Result};
use crate::gallery::{builtin, GALLERY_IDS};
use crate::geometry::{linspace, AxisBox};
use crate::hadamard::hadamard_check;
use crate::implicit::{
    solve_implicit, ImplicitOptions, ImplicitReport, SearchRegion, UniquenessMode,
};
use crate::winding::{angle_lift, homeomorphism_verdict, local_index, sample_circle_map};
use crate::VectorField;

/// Environment variable capping the worker count (0 or unset = automatic).
pub const THREADS_ENV: &str = "ISOCRIT_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "isocrit",
    version,
    about = "Topological invariants of vector fields at isolated critical points"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct Common {
    #[command(flatten)]
    field: FieldArgs,
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct FieldArgs {
    /// Gallery id, or an inline expression when it is not a known id.
    #[arg(long, allow_hyphen_values = true)]
    gallery: Option<String>,
    /// Field components separated by `;`.
    #[arg(long, allow_hyphen_values = true)]
    expr: Option<String>,
    /// File holding an expression in the same grammar.
    #[arg(long)]
    field_file: Option<PathBuf>,
    /// `IN,OUT` dimensions for expressions (inferred when absent).
    #[arg(long)]
    dims: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Local index at a point of a planar field.
    Index {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        center: String,
        #[arg(long)]
        radius: f64,
    },
    /// Angle lift and winding of the circle map at a fixed sample count.
    Winding {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        center: String,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 256)]
        samples: usize,
    },
    /// Degree at a target value over a box.
    Degree {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        target: String,
        /// `lo1,lo2:hi1,hi2`
        #[arg(long = "box", allow_hyphen_values = true)]
        bx: String,
        #[arg(long, default_value_t = 16)]
        grid_res: usize,
    },
    /// Zero-existence certificate on a box.
    CertifyZero {
        #[command(flatten)]
        common: Common,
        #[arg(long = "box", allow_hyphen_values = true)]
        bx: String,
        #[arg(long, default_value_t = 16)]
        grid_res: usize,
    },
    /// Sublevel components at one radius.
    Components {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        y0: Option<String>,
        #[arg(long = "box", allow_hyphen_values = true)]
        bx: Option<String>,
        #[arg(long, default_value_t = 256)]
        res: usize,
        #[arg(long)]
        r: f64,
        /// Seed points separated by `:`.
        #[arg(long, allow_hyphen_values = true)]
        seeds: String,
    },
    /// Counting curve `X(r)` over evenly spaced radii.
    Xcurve {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        y0: Option<String>,
        #[arg(long = "box", allow_hyphen_values = true)]
        bx: Option<String>,
        #[arg(long, default_value_t = 512)]
        res: usize,
        #[arg(long, allow_hyphen_values = true)]
        seeds: String,
        #[arg(long)]
        rmin: f64,
        #[arg(long)]
        rmax: f64,
        #[arg(long, default_value_t = 20)]
        steps: usize,
    },
    /// Implicit solve `F(x, y) = F(x0, y0)` at sample points `x`.
    Implicit {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        #[arg(long, allow_hyphen_values = true)]
        y0: String,
        /// Sample points separated by `:`.
        #[arg(long, allow_hyphen_values = true)]
        samples: String,
        #[arg(long, value_enum, default_value_t = Mode::Unique)]
        mode: Mode,
        #[arg(long, default_value_t = 0.5)]
        radius: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 16)]
        res: usize,
        #[arg(long, default_value_t = 16)]
        grid_res: usize,
        /// Fixed search box for existence mode.
        #[arg(long, allow_hyphen_values = true)]
        search_box: Option<String>,
        /// `c,e`: search the cube of half-width `c |x - x0|^e` (existence mode).
        #[arg(long, allow_hyphen_values = true)]
        power_box: Option<String>,
        /// Radii for the continuity profile, comma separated.
        #[arg(long)]
        deltas: Option<String>,
    },
    /// Global diffeomorphism check.
    Hadamard {
        #[command(flatten)]
        common: Common,
        #[arg(long = "box", allow_hyphen_values = true)]
        bx: String,
        #[arg(long, default_value_t = 64)]
        grid_res: usize,
        /// Increasing sphere radii, comma separated.
        #[arg(long)]
        radii: String,
        #[arg(long, default_value_t = 2000)]
        pairs: usize,
    },
    /// Gallery listing.
    Gallery {
        #[arg(long)]
        list: bool,
    },
    /// Parse a field and print its canonical form.
    ParseCheck {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Unique,
    Existence,
}

enum Report {
    Json(Value),
    Csv(String),
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

/// Parses `a,b,...` into a point.
pub fn parse_point(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("bad number `{t}` in `{s}`")))
        })
        .collect()
}

/// Parses `p1:p2:...` into points.
pub fn parse_points(s: &str) -> Result<Vec<Vec<f64>>> {
    s.split(':').map(parse_point).collect()
}

/// Parses `lo:hi` into a box.
pub fn parse_box(s: &str) -> Result<AxisBox> {
    match parse_points(s)?.as_slice() {
        [lo, hi] => AxisBox::new(lo.clone(), hi.clone()),
        _ => Err(usage(format!("box `{s}` must look like lo1,lo2:hi1,hi2"))),
    }
}

/// Output count from `;` separators and input count from the largest `x<k>`.
fn infer_dims(src: &str) -> (usize, usize) {
    let output = src.split(';').count();
    let bytes = src.as_bytes();
    let mut input = 0;
    for (i, &b) in bytes.iter().enumerate() {
        let starts_word = i == 0 || !(bytes[i - 1].is_ascii_alphanumeric() || bytes[i - 1] == b'_');
        if b == b'x' && starts_word {
            let digits: String = src[i + 1..]
                .chars()
                .take_while(char::is_ascii_digit)
                .collect();
            if let Ok(k) = digits.parse::<usize>() {
                input = input.max(k);
            }
        }
    }
    (input.max(output), output)
}

fn expression_field(src: &str, dims: Option<&str>) -> Result<VectorField> {
    let (input, output) = match dims {
        Some(d) => match parse_point(d)?.as_slice() {
            [i, o] if *i >= 1.0 && *o >= 1.0 && i.fract() == 0.0 && o.fract() == 0.0 => {
                (*i as usize, *o as usize)
            }
            _ => return Err(usage(format!("--dims `{d}` must be IN,OUT"))),
        },
        None => infer_dims(src),
    };
    VectorField::parse(src, input, output)
}

fn load_field(args: &FieldArgs) -> Result<VectorField> {
    let dims = args.dims.as_deref();
    match (&args.gallery, &args.expr, &args.field_file) {
        (Some(id), None, None) => match builtin(id) {
            Ok(entry) => Ok(entry.field),
            Err(Error::UnknownGalleryId(_)) if id.contains(['x', ';']) => {
                expression_field(id, dims)
            }
            Err(e) => Err(e),
        },
        (None, Some(src), None) => expression_field(src, dims),
        (None, None, Some(path)) => {
            let src = std::fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            expression_field(src.trim(), dims)
        }
        _ => Err(usage("give exactly one of --gallery, --expr, --field-file")),
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize to JSON")
}

fn default_box(dim: usize, bx: Option<&str>) -> Result<AxisBox> {
    bx.map(parse_box)
        .unwrap_or_else(|| AxisBox::uniform(dim, -1.0, 1.0))
}

fn y0_or_zero(field: &VectorField, y0: Option<&str>) -> Result<Vec<f64>> {
    y0.map(parse_point)
        .unwrap_or_else(|| Ok(vec![0.0; field.output_dim()]))
}

fn implicit_csv(rep: &ImplicitReport) -> String {
    let (n, m) = (rep.x0.len(), rep.y0.len());
    let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    header.extend((1..=m).map(|i| format!("y{i}")));
    header.push("residual".into());
    let mut out = header.join(",") + "\n";
    for s in &rep.samples {
        let row: Vec<String> =
            s.x.iter()
                .chain(&s.y)
                .chain([&s.residual])
                .map(|v| fmt_float(*v))
                .collect();
        out += &(row.join(",") + "\n");
    }
    out
}

fn execute(command: Command) -> Result<(Report, Option<PathBuf>)> {
    let common_of = |c: &Common, csv_ok: bool| -> Result<Format> {
        match c.format {
            Some(Format::Csv) if !csv_ok => Err(usage(
                "csv output is only available for xcurve and implicit",
            )),
            Some(f) => Ok(f),
            None => Ok(Format::Json),
        }
    };
    Ok(match command {
        Command::Index {
            common,
            center,
            radius,
        } => {
            common_of(&common, false)?;
            let field = load_field(&common.field)?;
            let res = local_index(&field, &parse_point(&center)?, radius)?;
            let mut v = to_json(&res);
            v["homeomorphism"] = json!(homeomorphism_verdict(&res)?);
            (Report::Json(v), common.output)
        }
        Command::Winding {
            common,
            center,
            radius,
            samples,
        } => {
            common_of(&common, false)?;
            let field = load_field(&common.field)?;
            let lp = sample_circle_map(&field, &parse_point(&center)?, radius, samples)?;
            let lift = angle_lift(&lp)?;
            let v = json!({
                "base": lift.base,
                "lift_end": lift.lift_values.last().copied(),
                "min_modulus": lp.min_modulus(),
                "samples": samples,
                "winding": lift.winding,
            });
            (Report::Json(v), common.output)
        }
        Command::Degree {
            common,
            target,
            bx,
            grid_res,
        } => {
            common_of(&common, false)?;
            let field = load_field(&common.field)?;
            let cert = preimage_degree(&field, &parse_point(&target)?, &parse_box(&bx)?, grid_res)?;
            (Report::Json(to_json(&cert)), common.output)
        }
        Command::CertifyZero {
            common,
            bx,
            grid_res,
        } => {
            common_of(&common, false)?;
            let field = load_field(&common.field)?;
            let bx = parse_box(&bx)?;
            let verdict = certify_zero(&field, &bx, grid_res)?;
            let mut v = to_json(&verdict);
            if let ZeroVerdict::Certified(_) = verdict {
                v["covered_ball_radius"] = json!(covered_ball_radius(&field, &bx).ok());
            }
            (Report::Json(v), common.output)
        }
        Command::Components {
            common,
            y0,
            bx,
            res,
            r,
            seeds,
        } => {
            common_of(&common, false)?;
            let field = load_field(&common.field)?;
            let grid = rasterize(
                &field,
                &y0_or_zero(&field, y0.as_deref())?,
                &default_box(field.input_dim(), bx.as_deref())?,
                res,
            )?;
            let labeling = sublevel_components(&grid, r, &parse_points(&seeds)?)?;
            let v = json!({
                "count": labeling.count,
                "min_component_distance": min_component_distance(&labeling).ok(),
                "r": r,
                "res": res,
                "seed_map": to_json(&labeling.seed_map),
                "seeded_components": labeling.seeded_components(),
            });
            (Report::Json(v), common.output)
        }
        Command::Xcurve {
            common,
            y0,
            bx,
            res,
            seeds,
            rmin,
            rmax,
            steps,
        } => {
            let format = common.format.unwrap_or(Format::Csv);
            let field = load_field(&common.field)?;
            if !(rmin > 0.0 && rmax > rmin) || steps < 2 {
                return Err(usage("need 0 < rmin < rmax and steps >= 2"));
            }
            let curve = counting_curve(
                &field,
                &y0_or_zero(&field, y0.as_deref())?,
                &parse_points(&seeds)?,
                &default_box(field.input_dim(), bx.as_deref())?,
                res,
                &linspace(rmin, rmax, steps),
            )?;
            let report = match format {
                Format::Json => Report::Json(to_json(&curve)),
                Format::Csv => {
                    let mut out = String::from("r,X\n");
                    for (r, x) in curve.r_values.iter().zip(&curve.x_values) {
                        let _ = writeln!(out, "{},{x}", fmt_float(*r));
                    }
                    Report::Csv(out)
                }
            };
            (report, common.output)
        }
        Command::Implicit {
            common,
            x0,
            y0,
            samples,
            mode,
            radius,
            tol,
            res,
            grid_res,
            search_box,
            power_box,
            deltas,
        } => {
            let format = common_of(&common, true)?;
            let field = load_field(&common.field)?;
            let search = match (search_box, power_box) {
                (None, None) => SearchRegion::Anchored,
                (Some(b), None) => SearchRegion::Box(parse_box(&b)?),
                (None, Some(p)) => match parse_point(&p)?.as_slice() {
                    [c, e] if *c > 0.0 => SearchRegion::PowerBox {
                        coefficient: *c,
                        exponent: *e,
                    },
                    _ => return Err(usage("--power-box must be c,e with c > 0")),
                },
                _ => return Err(usage("--search-box and --power-box are exclusive")),
            };
            let opts = ImplicitOptions {
                mode: match mode {
                    Mode::Unique => UniquenessMode::Unique,
                    Mode::Existence => UniquenessMode::ExistenceOnly,
                },
                tol,
                res,
                grid_res,
                initial_radius: radius,
                search,
                deltas: deltas
                    .as_deref()
                    .map(parse_point)
                    .transpose()?
                    .unwrap_or_default(),
            };
            let rep = solve_implicit(
                &field,
                &parse_point(&x0)?,
                &parse_point(&y0)?,
                &parse_points(&samples)?,
                &opts,
            )?;
            let report = match format {
                Format::Json => Report::Json(to_json(&rep)),
                Format::Csv => Report::Csv(implicit_csv(&rep)),
            };
            (report, common.output)
        }
        Command::Hadamard {
            common,
            bx,
            grid_res,
            radii,
            pairs,
        } => {
            common_of(&common, false)?;
            let field = load_field(&common.field)?;
            let rep = hadamard_check(
                &field,
                &parse_box(&bx)?,
                grid_res,
                &parse_point(&radii)?,
                pairs,
                common.seed,
            )?;
            (Report::Json(to_json(&rep)), common.output)
        }
        Command::Gallery { list } => {
            if !list {
                return Err(usage("gallery needs --list"));
            }
            (Report::Json(json!({ "ids": GALLERY_IDS })), None)
        }
        Command::ParseCheck { common } => {
            common_of(&common, false)?;
            let field = load_field(&common.field)?;
            let canonical = field.ast().map(|a| a.to_string());
            let v = json!({
                "canonical": canonical,
                "input_dim": field.input_dim(),
                "output_dim": field.output_dim(),
            });
            (Report::Json(v), common.output)
        }
    })
}

/// 17 significant digits, so every finite `f64` round-trips.
pub fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".into()
    }
}

/// Compact JSON with sorted keys and fixed float formatting.
pub fn write_json(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_i64(), n.as_u64(), n.as_f64()) {
            (Some(i), _, _) => out.push_str(&i.to_string()),
            (None, Some(u), _) => out.push_str(&u.to_string()),
            (_, _, Some(f)) => out.push_str(&fmt_float(f)),
            _ => out.push_str("null"),
        },
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_json(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            // serde_json's default map is a BTreeMap, so iteration is already sorted
            out.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_json(item, out);
            }
            out.push('}');
        }
    }
}

fn thread_pool() -> std::result::Result<rayon::ThreadPool, String> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .map_err(|_| format!("{THREADS_ENV} must be a non-negative integer"))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| e.to_string())
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return 2;
        }
    };
    match pool.install(|| execute(cli.command)) {
        Ok((report, path)) => {
            let text = match report {
                Report::Json(v) => {
                    let mut s = String::new();
                    write_json(&v, &mut s);
                    s + "\n"
                }
                Report::Csv(s) => s,
            };
            let written = match path {
                Some(p) => std::fs::write(&p, text).map_err(|e| format!("{}: {e}", p.display())),
                None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => 0,
                Err(msg) => {
                    let _ = writeln!(stderr, "error: {msg}");
                    1
                }
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_usage() {
                2
            } else {
                1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("isocrit").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn index_json() {
        let (code, out, _) = run_str(&[
            "index",
            "--gallery",
            "z_pow_n:3",
            "--center",
            "0,0",
            "--radius",
            "0.5",
        ]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["index_magnitude"], 3);
        assert_eq!(v["sign"], 1);
        assert_eq!(v["homeomorphism"], false);
    }

    #[test]
    fn gallery_list_and_parse_check() {
        let (code, out, _) = run_str(&["gallery", "--list"]);
        assert_eq!(code, 0);
        assert!(out.contains("\"hadamard_demo\""));
        let (code, out, _) = run_str(&["parse-check", "--expr", "-x1^2 + x2 ; x1"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["canonical"], "((-(x1^2)) + x2) ; x1");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(
            run_str(&[
                "index",
                "--gallery",
                "nope",
                "--center",
                "0,0",
                "--radius",
                "1"
            ])
            .0,
            2
        );
        assert_eq!(
            run_str(&["index", "--expr", "x1 + ", "--center", "0,0", "--radius", "1"]).0,
            2
        );
        assert_eq!(run_str(&["frobnicate"]).0, 2);
        assert_eq!(
            run_str(&[
                "index",
                "--gallery",
                "z_pow_n:2",
                "--center",
                "0,0",
                "--radius",
                "-1"
            ])
            .0,
            2
        );
        // the map vanishes on the loop: a numeric failure
        let (code, _, err) = run_str(&[
            "index",
            "--expr",
            "x1^2 - x2^2 - 1 ; 2*x1*x2",
            "--center",
            "1,0",
            "--radius",
            "2",
        ]);
        assert_eq!(code, 1, "{err}");
    }

    #[test]
    fn xcurve_csv() {
        let (code, out, _) = run_str(&[
            "xcurve",
            "--gallery",
            "x1^2 - x2^2 - 0.25 ; 2*x1*x2",
            "--seeds",
            "0.5,0:-0.5,0",
            "--rmin",
            "0.05",
            "--rmax",
            "0.5",
            "--steps",
            "20",
            "--res",
            "128",
        ]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "r,X");
        assert_eq!(lines.len(), 21);
        assert!(lines[1].ends_with(",2") && lines[20].ends_with(",1"));
    }

    #[test]
    fn floats_have_seventeen_digits() {
        let mut s = String::new();
        write_json(&json!({"b": 0.1, "a": [1, 2.5]}), &mut s);
        assert_eq!(
            s,
            "{\"a\":[1,2.5000000000000000e0],\"b\":1.0000000000000001e-1}"
        );
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["b"].as_f64(), Some(0.1));
    }

    #[test]
    fn infers_dimensions() {
        assert_eq!(infer_dims("x2 + x1 ; x3 - 2*x1"), (3, 2));
        assert_eq!(infer_dims("x1^2 - x2^2 - 0.25 ; 2*x1*x2"), (2, 2));
        assert_eq!(infer_dims("exp(x1)"), (1, 1));
    }
}
