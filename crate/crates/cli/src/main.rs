//! `biquad`: implicitize Bézier patches and query their implicit form.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use biquad_implicit::apps::scan::{scan_csv, StudyOptions, DEFAULT_SAMPLES};
use biquad_implicit::apps::{precision_study, scan_line, ImplicitPatch, Ray};
use biquad_implicit::numeric::DEFAULT_REL_TOL;
use biquad_implicit::{
    build_cayley_matrix, classify, emit_slp, expand_resultant, normalize_net, ControlNet, DomainPoint,
    NormalizationTransform, PatchKind, Point3,
};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "biquad", version, about = "Implicit forms of biquadratic Bézier triangles and quads")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Control net JSON file
    #[arg(long)]
    net: PathBuf,
    /// Write the main output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Expand the implicit polynomial. The summary goes to stdout when the
    /// polynomial is written with --out, otherwise to stderr.
    Implicitize {
        #[command(flatten)]
        common: Common,
        /// Straight-line program output
        #[arg(long)]
        slp: Option<PathBuf>,
        /// Expand in the canonical pose of the net
        #[arg(long)]
        normalize: bool,
    },
    /// On-surface / side test of a point
    Classify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_point)]
        point: Point3,
        #[arg(long, default_value_t = DEFAULT_REL_TOL)]
        rel_tol: f64,
        #[arg(long)]
        normalize: bool,
    },
    /// Ray–patch intersections
    Raycast {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_point)]
        origin: Point3,
        #[arg(long, value_parser = parse_point)]
        direction: Point3,
        #[arg(long, value_parser = parse_pair, default_value = "0,1")]
        t_range: [f64; 2],
        /// Expand in world coordinates instead of the canonical pose
        #[arg(long)]
        no_normalize: bool,
    },
    /// Sample both evaluators along p + t·v̂ through eval(net, u, v); CSV output
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_pair, default_value = "0.33,0.33")]
        uv: [f64; 2],
        #[arg(long, value_parser = parse_pair, default_value = "-1,1")]
        t_range: [f64; 2],
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long)]
        normalize: bool,
    },
    /// Offset precision study; CSV output
    Study {
        #[command(flatten)]
        common: Common,
        /// Comma-separated offsets added to every coordinate
        #[arg(long, value_delimiter = ',', default_value = "0,1e4,6.5e4,1e6,1e13")]
        offsets: Vec<f64>,
        #[arg(long, value_parser = parse_pair, default_value = "0.33,0.33")]
        uv: [f64; 2],
        #[arg(long, value_parser = parse_pair, default_value = "-1,1")]
        t_range: [f64; 2],
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Evaluate the patch at a domain point
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_pair)]
        uv: [f64; 2],
    },
}

fn parse_floats<const N: usize>(s: &str) -> std::result::Result<[f64; N], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    let arr: [f64; N] = parts.try_into().map_err(|v: Vec<f64>| format!("expected {N} values, got {}", v.len()))?;
    if arr.iter().any(|x| !x.is_finite()) {
        return Err("values must be finite".into());
    }
    Ok(arr)
}

fn parse_point(s: &str) -> std::result::Result<Point3, String> {
    let [x, y, z] = parse_floats::<3>(s)?;
    Ok(Point3 { x, y, z })
}

fn parse_pair(s: &str) -> std::result::Result<[f64; 2], String> {
    parse_floats::<2>(s)
}

fn read_net(path: &Path) -> Result<ControlNet> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ControlNet::from_json(&text)?)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable output");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct ImplicitSummary {
    kind: PatchKind,
    degree: u32,
    max_degree: u32,
    terms: usize,
    multiplications: usize,
    additions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    transform: Option<NormalizationTransform>,
}

#[derive(Serialize)]
struct HitOut {
    t: f64,
    point: Point3,
    domain: [f64; 2],
    residual: f64,
}

#[derive(Serialize)]
struct EvalOut {
    domain: [f64; 2],
    point: Point3,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Implicitize { common, slp, normalize } => {
            let net = read_net(&common.net)?;
            let (frame, transform) = if normalize {
                let (n, t) = normalize_net(&net)?;
                (n, Some(t))
            } else {
                (net, None)
            };
            let poly = expand_resultant(&build_cayley_matrix(&frame)?)?;
            let program = emit_slp(&poly);
            let mut poly_json = poly.to_json();
            poly_json.push('\n');
            emit(common.out.as_deref(), &poly_json)?;
            if let Some(p) = &slp {
                fs::write(p, program.to_text()).with_context(|| format!("writing {}", p.display()))?;
            }
            let summary = ImplicitSummary {
                kind: frame.kind(),
                degree: poly.degree().unwrap_or(0),
                max_degree: poly.max_degree(),
                terms: poly.len(),
                multiplications: program.multiplications(),
                additions: program.additions(),
                transform,
            };
            if common.out.is_some() {
                print!("{}", to_json(&summary));
            } else {
                eprint!("{}", to_json(&summary));
            }
            Ok(())
        }
        Command::Classify { common, point, rel_tol, normalize } => {
            let net = read_net(&common.net)?;
            let result = if normalize {
                let (n, t) = normalize_net(&net)?;
                classify(&build_cayley_matrix(&n)?, t.to_normalized(point), rel_tol)?
            } else {
                classify(&build_cayley_matrix(&net)?, point, rel_tol)?
            };
            emit(common.out.as_deref(), &to_json(&result))
        }
        Command::Raycast { common, origin, direction, t_range, no_normalize } => {
            let net = read_net(&common.net)?;
            let ray = Ray::new(origin, direction)?;
            let patch = ImplicitPatch::new(&net, !no_normalize)?;
            let hits: Vec<HitOut> = patch
                .raycast(&ray, t_range[0], t_range[1], 1e-6)?
                .into_iter()
                .map(|h| HitOut {
                    t: h.t,
                    point: h.point,
                    domain: [h.domain().u(), h.domain().v()],
                    residual: h.inversion.residual,
                })
                .collect();
            emit(common.out.as_deref(), &to_json(&hits))
        }
        Command::Scan { common, uv, t_range, samples, normalize } => {
            let net = read_net(&common.net)?;
            let d0 = DomainPoint::new(net.kind(), uv[0], uv[1])?;
            let records = scan_line(&net, d0, t_range, samples, normalize)?;
            emit(common.out.as_deref(), &scan_csv(&records))
        }
        Command::Study { common, offsets, uv, t_range, samples } => {
            let net = read_net(&common.net)?;
            let opts = StudyOptions { d0: DomainPoint::new(net.kind(), uv[0], uv[1])?, t_range, n_samples: samples };
            let report = precision_study(&net, &offsets, &opts)?;
            emit(common.out.as_deref(), &report.to_csv())
        }
        Command::Eval { common, uv } => {
            let net = read_net(&common.net)?;
            let d = DomainPoint::new(net.kind(), uv[0], uv[1])?;
            let out = EvalOut { domain: uv, point: net.eval(d)? };
            emit(common.out.as_deref(), &to_json(&out))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<biquad_implicit::Error>() {
        Some(e) if e.is_degenerate() => 1,
        Some(biquad_implicit::Error::Internal(_)) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    use anyhow::anyhow;

    #[test]
    fn parses_points_and_pairs() {
        assert_eq!(parse_point("1, -2.5,3e2").unwrap(), Point3 { x: 1.0, y: -2.5, z: 300.0 });
        assert!(parse_point("1,2").is_err());
        assert!(parse_pair("0.1,nan").is_err());
    }

    #[test]
    fn degenerate_errors_exit_one() {
        let e = anyhow!(biquad_implicit::Error::DegenerateSurface("x".into()));
        assert_eq!(exit_code(&e), 1);
        let e = anyhow!(biquad_implicit::Error::InvalidInput("x".into()));
        assert_eq!(exit_code(&e), 2);
        let e: anyhow::Error = anyhow!("io").context("reading");
        assert_eq!(exit_code(&e), 2);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
