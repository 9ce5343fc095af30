use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use contextlab::experiments::{
    self, bits_report, hemisphere_scaling, random_axis_audit, sweep_theta, write_audit_csv,
    write_scaling_csv, write_sweep_csv, SweepConfig,
};
use contextlab::geometry::AccessibleFragment;
use contextlab::noise::depolarising_map;
use contextlab::par::{self, Execution};
use contextlab::plot::LineChart;
use contextlab::pom;
use contextlab::robustness::{min_over_axes, solve_robustness, RobustnessCertificate};
use contextlab::{Axis, Error, GptFragment};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(
    name = "contextlab",
    version,
    about = "Robustness of contextuality for prepare-and-measure fragments"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Number of θ grid points on [0, π/2].
    #[arg(long, global = true, default_value_t = experiments::DEFAULT_GRID)]
    grid: usize,
    /// Seed for random dephasing axes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Also write an SVG line chart to this path.
    #[arg(long, global = true, value_name = "SVG_PATH")]
    plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NoiseArg {
    Depol,
    Deph,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the robustness program for a fragment file and print its certificate as JSON.
    Robustness(NoiseSpec),
    /// Dump the noncontextual ontological model extracted at the optimum.
    Model(NoiseSpec),
    /// Parity-oblivious multiplexing studies.
    #[command(subcommand)]
    Pom(PomCommand),
}

#[derive(Args, Debug)]
struct NoiseSpec {
    /// Fragment JSON file.
    #[arg(long)]
    fragment: PathBuf,
    #[arg(long, value_enum, default_value_t = NoiseArg::Depol)]
    noise: NoiseArg,
    /// Dephasing axis: X, Y, Z, custom:θ,φ, or min (minimum over X, Y, Z).
    #[arg(long, default_value = "min")]
    axis: String,
}

#[derive(Subcommand, Debug)]
enum PomCommand {
    /// Sweep the 3-to-1 cuboid family over θ.
    Sweep,
    /// Depolarising robustness of the real-hemisphere fragments with 2n elements.
    Scaling {
        #[arg(long, default_value_t = 2)]
        n_min: u32,
        #[arg(long, default_value_t = 32)]
        n_max: u32,
    },
    /// Compare dephasing robustness over X, Y, Z with and without extra random axes.
    AxesAudit {
        #[arg(long, default_value_t = 10)]
        extra_axes: usize,
    },
    /// Most bits a qubit can encode with optimal advantage when robustness stays below r_cap.
    Bits {
        #[arg(long, default_value_t = 0.5)]
        r_cap: f64,
        /// Largest n of the hemisphere scaling premise.
        #[arg(long, default_value_t = 32)]
        n_max: u32,
    },
    /// Write a scenario as a fragment JSON file.
    Export {
        /// θ of the 3-to-1 cuboid family; the 2-to-1 square when omitted.
        #[arg(long)]
        theta: Option<f64>,
        /// Skip closing the effect list under 0, u and complements.
        #[arg(long)]
        no_augment: bool,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_solver_failure() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    par::init_from_env();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Robustness(spec) => {
            let (frag, solved) = solve(spec)?;
            let mut value = serde_json::to_value(solved.certificate.to_file())?;
            value["axis"] = json!(solved.axis.map(|a| a.to_string()));
            value["fragment"] = json!(spec.fragment.display().to_string());
            value["audit"] = serde_json::to_value(solved.certificate.audit(&frag, &solved.noise))?;
            emit(g, |w| {
                Ok(writeln!(w, "{}", serde_json::to_string_pretty(&value)?)?)
            })
        }
        Command::Model(spec) => {
            let (frag, solved) = solve(spec)?;
            emit(g, |w| write_model(w, g.format, &frag, &solved.certificate))
        }
        Command::Pom(cmd) => run_pom(g, cmd),
    }
}

struct Solved {
    certificate: RobustnessCertificate,
    noise: contextlab::NoiseMap,
    axis: Option<Axis>,
}

fn solve(spec: &NoiseSpec) -> CliResult<(GptFragment, Solved)> {
    let frag = GptFragment::load(&spec.fragment)?;
    let acc = AccessibleFragment::new(&frag)?;
    let solved = match spec.noise {
        NoiseArg::Depol => {
            let noise = depolarising_map(&frag.max_mixed, &frag.unit)?;
            Solved {
                certificate: solve_robustness(&acc, &noise)?,
                noise,
                axis: None,
            }
        }
        NoiseArg::Deph if spec.axis.eq_ignore_ascii_case("min") => {
            let min = min_over_axes(&acc, &Axis::PAULI)?;
            let best = min.best();
            Solved {
                certificate: best
                    .certificate
                    .clone()
                    .expect("argmin axis has a certificate"),
                noise: best.axis.dephasing_map()?,
                axis: Some(best.axis),
            }
        }
        NoiseArg::Deph => {
            let axis: Axis = spec.axis.parse()?;
            let noise = axis.dephasing_map()?;
            Solved {
                certificate: solve_robustness(&acc, &noise)?,
                noise,
                axis: Some(axis),
            }
        }
    };
    Ok((frag, solved))
}

fn write_model(
    w: &mut dyn Write,
    format: Format,
    frag: &GptFragment,
    cert: &RobustnessCertificate,
) -> CliResult<()> {
    let model = &cert.model;
    match format {
        Format::Json => {
            let states: Vec<_> = frag
                .labels
                .states
                .iter()
                .zip(&model.epistemic)
                .map(|(label, mu)| json!({ "label": label, "epistemic": mu }))
                .collect();
            let effects: Vec<_> = frag
                .labels
                .effects
                .iter()
                .zip(&model.responses)
                .map(|(label, xi)| json!({ "label": label, "response": xi }))
                .collect();
            let value = json!({
                "r_min": cert.r_min,
                "noise": cert.noise_kind,
                "ontic_states": model.ontic_states,
                "states": states,
                "effects": effects,
            });
            writeln!(w, "{}", serde_json::to_string_pretty(&value)?)?;
        }
        Format::Csv => {
            let header: Vec<String> = model
                .ontic_states
                .iter()
                .map(|(i, j)| format!("lambda_{i}_{j}"))
                .collect();
            writeln!(w, "kind,label,{}", header.join(","))?;
            let rows = frag
                .labels
                .states
                .iter()
                .zip(&model.epistemic)
                .map(|(l, v)| ("state", l, v))
                .chain(
                    frag.labels
                        .effects
                        .iter()
                        .zip(&model.responses)
                        .map(|(l, v)| ("effect", l, v)),
                );
            for (kind, label, values) in rows {
                let cells: Vec<String> = values.iter().map(f64::to_string).collect();
                writeln!(w, "{kind},{label},{}", cells.join(","))?;
            }
        }
    }
    Ok(())
}

fn run_pom(g: &Global, cmd: &PomCommand) -> CliResult<()> {
    let exec = Execution::Parallel;
    match cmd {
        PomCommand::Sweep => {
            let rows = sweep_theta(
                SweepConfig {
                    grid: g.grid,
                    ..SweepConfig::default()
                },
                exec,
            )?;
            for row in rows.iter().filter(|r| r.error.is_some()) {
                eprintln!(
                    "warning: θ = {}: {}",
                    row.theta,
                    row.error.as_deref().unwrap_or_default()
                );
            }
            if let Some(peak) = rows
                .iter()
                .filter(|r| r.r_depol.is_some())
                .max_by(|a, b| a.r_depol.unwrap().total_cmp(&b.r_depol.unwrap()))
            {
                eprintln!(
                    "peak r_depol = {:.9} at θ = {:.6} (cube angle arctan √2 = {:.6}, π/3 = {:.6})",
                    peak.r_depol.unwrap(),
                    peak.theta,
                    pom::cube_angle(),
                    std::f64::consts::FRAC_PI_3
                );
            }
            emit(g, |w| match g.format {
                Format::Csv => Ok(write_sweep_csv(&rows, w)?),
                Format::Json => Ok(writeln!(w, "{}", serde_json::to_string_pretty(&rows)?)?),
            })?;
            plot(g, || {
                LineChart::new(
                    "Depolarising robustness, 3-to-1 POM",
                    "success rate s",
                    "r (depolarising)",
                )
                .with_points(rows.iter().filter_map(|r| Some((r.s, r.r_depol?))))
            })
        }
        PomCommand::Scaling { n_min, n_max } => {
            let ns = range(*n_min, *n_max)?;
            let rows = hemisphere_scaling(&ns, exec)?;
            emit(g, |w| match g.format {
                Format::Csv => Ok(write_scaling_csv(&rows, w)?),
                Format::Json => Ok(writeln!(w, "{}", serde_json::to_string_pretty(&rows)?)?),
            })?;
            plot(g, || {
                LineChart::new(
                    "Depolarising robustness, real hemisphere",
                    "preparations 2n",
                    "r (depolarising)",
                )
                .with_points(rows.iter().map(|r| (r.two_n as f64, r.r_depol)))
            })
        }
        PomCommand::AxesAudit { extra_axes } => {
            let audit = random_axis_audit(*extra_axes, g.seed, g.grid, exec)?;
            emit(g, |w| match g.format {
                Format::Csv => Ok(write_audit_csv(&audit, w)?),
                Format::Json => Ok(writeln!(w, "{}", serde_json::to_string_pretty(&audit)?)?),
            })?;
            plot(g, || {
                LineChart::new(
                    format!("Dephasing robustness over X, Y, Z and {extra_axes} random axes"),
                    "θ",
                    "minimised r (dephasing)",
                )
                .with_points(audit.rows.iter().map(|r| (r.theta, r.r_min_aug)))
            })
        }
        PomCommand::Bits { r_cap, n_max } => {
            let rows = hemisphere_scaling(&range(2, *n_max)?, exec)?;
            let text = bits_report(*r_cap, &rows)?;
            emit(g, |w| match g.format {
                Format::Csv => Ok(write!(w, "{text}")?),
                Format::Json => {
                    let value = json!({
                        "r_cap": r_cap,
                        "max_encodable_bits": pom::max_encodable_bits(*r_cap)?,
                        "premise": {
                            "n": rows.iter().map(|r| r.n).collect::<Vec<_>>(),
                            "r_depol": rows.iter().map(|r| r.r_depol).collect::<Vec<_>>(),
                            "holds": rows.iter().all(|r| r.r_depol < *r_cap),
                        },
                        "report": text,
                    });
                    Ok(writeln!(w, "{}", serde_json::to_string_pretty(&value)?)?)
                }
            })
        }
        PomCommand::Export { theta, no_augment } => {
            let scenario = match theta {
                Some(t) => pom::pom3_scenario(*t)?,
                None => pom::pom2_scenario()?,
            };
            let frag = scenario.to_fragment(!no_augment)?;
            emit(g, |w| Ok(writeln!(w, "{}", frag.to_json()?)?))
        }
    }
}

fn range(lo: u32, hi: u32) -> CliResult<Vec<u32>> {
    if lo < 2 || hi < lo {
        return Err(Error::InvalidParameter(format!(
            "n range {lo}..={hi} must satisfy 2 ≤ n_min ≤ n_max"
        ))
        .into());
    }
    Ok((lo..=hi).collect())
}

fn emit(g: &Global, body: impl FnOnce(&mut dyn Write) -> CliResult<()>) -> CliResult<()> {
    match &g.out {
        Some(path) => {
            let mut w = BufWriter::new(create(path)?);
            body(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            body(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn plot(g: &Global, chart: impl FnOnce() -> LineChart) -> CliResult<()> {
    if let Some(path) = &g.plot {
        create(path)?.write_all(chart().to_svg().as_bytes())?;
    }
    Ok(())
}

fn create(path: &Path) -> CliResult<File> {
    File::create(path).map_err(|e| Failure {
        code: 1,
        message: format!("{}: {e}", path.display()),
    })
}
