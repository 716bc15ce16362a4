use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hilbertlab::benzecri::standardize;
use hilbertlab::body::{ConvexBody, MarkedBody};
use hilbertlab::group::{displacement_table, proximity_gauge, DEFAULT_BALL_CAP};
use hilbertlab::hilbert::{displacement, distance};
use hilbertlab::render::render_svg;
use hilbertlab::scan::{run, Report, Scenario};
use hilbertlab::verify::{verify_suite, Selector};
use hilbertlab::{HilbertError, ProjectiveMap, ProjectivePoint, Result};

/// Hilbert geometry experiments.
#[derive(Parser)]
#[command(name = "hilbertlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hilbert distance between two points of a body.
    Distance {
        #[arg(long)]
        body: PathBuf,
        /// Comma-separated affine or homogeneous coordinates.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
    /// Projective map carrying a marked body to a standard pair.
    Standardize {
        #[arg(long)]
        body: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Where to write the standardized body.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Displacement of a map at a point, or the displacement table of a scenario's word ball.
    Displacement {
        #[arg(long, conflicts_with = "scenario")]
        body: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        /// JSON file holding the map as a list of rows.
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// CSV output for the scenario table.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs a scenario file and writes its JSON and CSV reports.
    Scan {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Output prefix: writes PREFIX.json and PREFIX.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// SVG of a planar body with Hilbert balls about a point.
    Render {
        #[arg(long)]
        body: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Comma-separated radii.
        #[arg(long, default_value = "")]
        radii: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Invariant checks: projective, convex, metric, benzecri, group, orbit or all.
    Verify {
        #[arg(default_value = "all")]
        selector: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| HilbertError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| HilbertError::Io(format!("{}: {e}", path.display())))
}

fn numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| HilbertError::Schema(format!("`{t}`: {e}")))
        })
        .collect()
}

fn point(s: &str, n: usize) -> Result<ProjectivePoint> {
    let v = numbers(s)?;
    match v.len() {
        k if k == n => Ok(ProjectivePoint::from_affine(&v)),
        k if k == n + 1 => ProjectivePoint::from_slice(&v),
        k => Err(HilbertError::DimensionMismatch {
            expected: n + 1,
            got: k,
        }),
    }
}

fn body(path: &Path) -> Result<ConvexBody> {
    ConvexBody::from_json(&read(path)?)
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn execute(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Distance { body: b, x, y } => {
            let b = body(&b)?;
            let d = distance(&b, &point(&x, b.dim())?, &point(&y, b.dim())?)?;
            println!("{}", json(&d));
        }
        Command::Standardize { body: b, x, out } => {
            let b = body(&b)?;
            let x = point(&x, b.dim())?;
            let mb = MarkedBody::new(b, x)?;
            let s = standardize(&mb)?;
            if let Some(p) = out {
                write(&p, &(mb.transformed(&s.map)?.body().to_json() + "\n"))?;
            }
            println!("{}", json(&s));
        }
        Command::Displacement {
            body: b,
            x,
            map,
            scenario,
            out,
        } => {
            if let Some(sc) = scenario {
                let sc = Scenario::from_json(&read(&sc)?)?;
                let (mb, s) = sc.marked_group()?;
                let table = displacement_table(&mb, &s, sc.depth, DEFAULT_BALL_CAP)?;
                let id = ProjectiveMap::identity(mb.body().dim());
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["word", "displacement", "gauge"])
                    .expect("in-memory write");
                for e in &table {
                    let word: Vec<String> = e.word.iter().map(usize::to_string).collect();
                    w.write_record([
                        word.join(" "),
                        e.displacement.to_string(),
                        proximity_gauge(&id, &e.map)?.to_string(),
                    ])
                    .expect("in-memory write");
                }
                let text = String::from_utf8(w.into_inner().expect("flush")).expect("utf-8");
                match out {
                    Some(p) => write(&p, &text)?,
                    None => print!("{text}"),
                }
            } else {
                let (Some(b), Some(x), Some(m)) = (b, x, map) else {
                    return Err(HilbertError::Schema(
                        "give --scenario, or --body, --x and --map".into(),
                    ));
                };
                let b = body(&b)?;
                let g: ProjectiveMap = serde_json::from_str(&read(&m)?)?;
                println!("{}", displacement(&b, &g, &point(&x, b.dim())?)?);
            }
        }
        Command::Scan {
            scenario,
            seed,
            out,
        } => {
            let mut sc = Scenario::from_json(&read(&scenario)?)?;
            if let Some(s) = seed {
                sc.seed = s;
            }
            let report = run(&sc)?;
            let (json_path, csv_path) = match out {
                Some(prefix) => (
                    Some(prefix.with_extension("json")),
                    Some(prefix.with_extension("csv")),
                ),
                None => (
                    sc.outputs.json.map(PathBuf::from),
                    sc.outputs.csv.map(PathBuf::from),
                ),
            };
            let text = report.to_json();
            match json_path {
                Some(p) => write(&p, &(text + "\n"))?,
                None => println!("{text}"),
            }
            if let Some(p) = csv_path {
                write(&p, &report.to_csv())?;
            }
            if let Report::Sweep(r) = &report {
                eprintln!(
                    "epsilon* = {} (all positive: {}, monotone: {})",
                    r.epsilon_star, r.all_positive, r.all_monotone
                );
            }
        }
        Command::Render {
            body: b,
            x,
            radii,
            out,
        } => {
            let b = body(&b)?;
            render_svg(&b, &point(&x, b.dim())?, &numbers(&radii)?, &out)?;
        }
        Command::Verify { selector, seed } => {
            let summary = verify_suite(selector.parse::<Selector>()?, seed);
            println!("{summary}");
            if !summary.passed() {
                eprintln!("failed: {}", summary.failures().join(", "));
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    if let Some(n) = std::env::var("HILBERTLAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match execute(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
