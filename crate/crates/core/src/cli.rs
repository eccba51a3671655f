//! Command-line front end: argument and config-file merging, command dispatch,
//! CSV and SVG output.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::channel_model::Scenario;
use crate::error::{Error, Result};
use crate::experiments::{
    default_distance_grid, default_power_grid_dbm, evaluate_point, sweep_eve_distance, sweep_num_eves,
    sweep_total_power, Scheme, SweepResultRow, DEFAULT_TRIALS, EVE_COUNT_REGION,
};
use crate::optimizer::OptimizerConfig;
use crate::wiretap_sim::{run_decay, DecayResult, DecaySpec};

pub const DEFAULT_OUT_DIR: &str = "out";
pub const DEFAULT_SEED: u64 = 1;
pub const OUT_DIR_ENV: &str = "RIS_SECRECY_OUT_DIR";
/// Eavesdropper counts of the count sweep.
pub const EVE_COUNTS: [usize; 6] = [1, 2, 3, 4, 5, 6];

#[derive(Debug, Parser)]
#[command(
    name = "ris-secrecy",
    version,
    about = "Secrecy-rate power allocation for RIS-assisted wiretap channels"
)]
#[command(arg_required_else_help = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandKind,

    /// JSON file with defaults for any of the options below.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Scenario JSON (geometry and radio parameters).
    #[arg(long, global = true, value_name = "FILE")]
    pub scenario: Option<PathBuf>,

    /// Decay-experiment JSON for verify-security.
    #[arg(long, global = true, value_name = "FILE")]
    pub channel: Option<PathBuf>,

    #[arg(long, global = true, env = OUT_DIR_ENV, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[arg(long, global = true)]
    pub max_iterations: Option<usize>,

    #[arg(long, global = true)]
    pub tolerance: Option<f64>,

    /// Random placements per eavesdropper count (sweep-eves).
    #[arg(long, global = true)]
    pub trials: Option<usize>,

    /// Also write an SVG chart.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    pub plot: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    /// Optimize the power split for one scenario.
    Optimize,
    /// Move a single eavesdropper along x = 45 m.
    SweepDistance,
    /// Sweep the total transmit power.
    SweepPower,
    /// Vary the number of randomly placed eavesdroppers.
    SweepEves,
    /// Run the finite-alphabet security decay experiment.
    VerifySecurity,
}

impl CommandKind {
    pub fn file_stem(self) -> &'static str {
        match self {
            CommandKind::Optimize => "optimize",
            CommandKind::SweepDistance => "sweep_distance",
            CommandKind::SweepPower => "sweep_power",
            CommandKind::SweepEves => "sweep_eves",
            CommandKind::VerifySecurity => "security_decay",
        }
    }

    fn x_label(self) -> &'static str {
        match self {
            CommandKind::Optimize | CommandKind::SweepPower => "Total transmit power Pt (dBm)",
            CommandKind::SweepDistance => "Vertical distance of Eve dv (m)",
            CommandKind::SweepEves => "Number of Eves",
            CommandKind::VerifySecurity => "Block length n",
        }
    }

    fn title(self) -> &'static str {
        match self {
            CommandKind::Optimize => "Secrecy rate per scheme",
            CommandKind::SweepDistance => "Secrecy rate versus the vertical distance of Eve",
            CommandKind::SweepPower => "Secrecy rate versus the total transmit power",
            CommandKind::SweepEves => "Secrecy rate versus the number of Eves",
            CommandKind::VerifySecurity => "Security and reliability versus block length",
        }
    }
}

/// Optional settings read from `--config`. Relative paths are taken relative
/// to the config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: Option<PathBuf>,
    pub channel: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub max_iterations: Option<usize>,
    pub tolerance: Option<f64>,
    pub trials: Option<usize>,
    pub plot: Option<bool>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: ConfigFile = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.scenario, &mut cfg.channel, &mut cfg.out_dir]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub scenario_path: Option<PathBuf>,
    pub channel_path: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// `None` keeps the seed stored in a decay spec.
    pub seed: Option<u64>,
    pub optimizer: OptimizerConfig,
    pub trials: usize,
    pub plot: bool,
}

impl RunConfig {
    /// Merges flags over the config file over defaults and checks that the
    /// command's input files exist.
    pub fn resolve(cli: Cli) -> Result<Self> {
        let file = match &cli.config {
            Some(p) => ConfigFile::load(p).map_err(|e| Error::Usage(e.to_string()))?,
            None => ConfigFile::default(),
        };
        let defaults = OptimizerConfig::default();
        let optimizer = OptimizerConfig {
            max_iterations: cli
                .max_iterations
                .or(file.max_iterations)
                .unwrap_or(defaults.max_iterations),
            tolerance: cli.tolerance.or(file.tolerance).unwrap_or(defaults.tolerance),
            ..defaults
        };
        optimizer.validate().map_err(|e| Error::Usage(e.to_string()))?;
        let cfg = RunConfig {
            command: cli.command,
            scenario_path: cli.scenario.or(file.scenario),
            channel_path: cli.channel.or(file.channel),
            out_dir: cli
                .out_dir
                .or(file.out_dir)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
            seed: cli.seed.or(file.seed),
            optimizer,
            trials: cli.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS),
            plot: cli.plot.or(file.plot).unwrap_or(false),
        };
        if cfg.trials == 0 {
            return Err(Error::Usage("--trials must be at least 1".into()));
        }
        let (needed, flag) = match cfg.command {
            CommandKind::VerifySecurity => (&cfg.channel_path, "--channel"),
            _ => (&cfg.scenario_path, "--scenario"),
        };
        match needed {
            None => return Err(Error::Usage(format!("{} requires {flag}", cfg.command.file_stem()))),
            Some(p) if !p.is_file() => {
                return Err(Error::Usage(format!("{flag} {} does not exist", p.display())));
            }
            Some(_) => {}
        }
        Ok(cfg)
    }

    pub fn seed_or_default(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

/// Parses `argv` (including the program name) into a [`RunConfig`].
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::Usage(e.render().to_string()))?;
    RunConfig::resolve(cli)
}

/// Process exit status for an error: 2 for usage problems, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) => 2,
        _ => 1,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    /// Human-readable summary for the terminal.
    pub summary: String,
}

pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    if cfg.command == CommandKind::VerifySecurity {
        return run_security(cfg);
    }
    let path = cfg.scenario_path.as_deref().expect("checked in resolve");
    let scenario = Scenario::load(path)?;
    let opt = &cfg.optimizer;
    let rows = match cfg.command {
        CommandKind::Optimize => evaluate_point(&scenario, scenario.total_power_dbm, opt)?.to_vec(),
        CommandKind::SweepDistance => sweep_eve_distance(&scenario, &default_distance_grid(), opt)?,
        CommandKind::SweepPower => sweep_total_power(&scenario, &default_power_grid_dbm(), opt)?,
        CommandKind::SweepEves => sweep_num_eves(
            &scenario,
            &EVE_COUNT_REGION,
            &EVE_COUNTS,
            cfg.trials,
            cfg.seed_or_default(),
            opt,
        )?,
        CommandKind::VerifySecurity => unreachable!(),
    };
    let files = write_outputs(&rows, cfg)?;
    let mut summary = String::new();
    for r in &rows {
        let _ = write!(summary, "{:>8} {:<8} {:.6} nats", r.sweep_var, r.scheme, r.rate_nats);
        if let (Some(p1), Some(p2)) = (r.p1_w, r.p2_w) {
            let _ = write!(summary, "  P1 = {p1:.6} W  P2 = {p2:.6} W");
        }
        summary.push('\n');
    }
    Ok(RunOutcome { files, summary })
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `<stem>.csv` and, with plotting on, `<stem>.svg` into the output
/// directory. Returns the paths written.
pub fn write_outputs(rows: &[SweepResultRow], cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(Error::domain("no rows to write"));
    }
    ensure_dir(&cfg.out_dir)?;
    let stem = cfg.command.file_stem();
    let csv_path = cfg.out_dir.join(format!("{stem}.csv"));
    write_file(&csv_path, &rows_to_csv(rows)?)?;
    let mut files = vec![csv_path];
    if cfg.plot {
        let series: Vec<Series> = Scheme::ALL
            .iter()
            .map(|&s| Series {
                label: s.label().to_string(),
                points: rows
                    .iter()
                    .filter(|r| r.scheme == s)
                    .map(|r| (r.sweep_var, r.rate_bits))
                    .collect(),
            })
            .collect();
        let svg = line_chart(
            &series,
            cfg.command.x_label(),
            "Secrecy rate (bits/s/Hz)",
            cfg.command.title(),
        );
        let svg_path = cfg.out_dir.join(format!("{stem}.svg"));
        write_file(&svg_path, svg.as_bytes())?;
        files.push(svg_path);
    }
    Ok(files)
}

pub fn rows_to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))
}

fn run_security(cfg: &RunConfig) -> Result<RunOutcome> {
    let path = cfg.channel_path.as_deref().expect("checked in resolve");
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut spec: DecaySpec = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    if let Some(seed) = cfg.seed {
        spec.seed = seed;
    }
    let result = run_decay(&spec)?;
    ensure_dir(&cfg.out_dir)?;
    let stem = cfg.command.file_stem();
    let csv_path = cfg.out_dir.join(format!("{stem}.csv"));
    write_file(&csv_path, &rows_to_csv(&result.rows)?)?;
    let json_path = cfg.out_dir.join(format!("{stem}_summary.json"));
    let json = serde_json::to_vec_pretty(&result).map_err(|source| Error::Json {
        path: json_path.clone(),
        source,
    })?;
    write_file(&json_path, &json)?;
    let mut files = vec![csv_path, json_path];
    if cfg.plot {
        let pick = |f: fn(&crate::wiretap_sim::DecaySummary) -> f64| {
            result.summaries.iter().map(|s| (s.n as f64, f(s))).collect()
        };
        let series = [
            Series {
                label: "Mean max-message TV".into(),
                points: pick(|s| s.mean_tv_max),
            },
            Series {
                label: "Mean joint decoding error".into(),
                points: pick(|s| s.mean_p_err_joint),
            },
            Series {
                label: "Mean message decoding error".into(),
                points: pick(|s| s.mean_p_err_msg),
            },
        ];
        let svg = line_chart(&series, cfg.command.x_label(), "Probability", cfg.command.title());
        let svg_path = cfg.out_dir.join(format!("{stem}.svg"));
        write_file(&svg_path, svg.as_bytes())?;
        files.push(svg_path);
    }
    Ok(RunOutcome {
        files,
        summary: security_summary(&result),
    })
}

fn security_summary(r: &DecayResult) -> String {
    let mut s = String::from("     n    L   L1   mean TV      joint err    msg err\n");
    for m in &r.summaries {
        let _ = writeln!(
            s,
            "{:>6} {:>4} {:>4}   {:.6e}  {:.6e}  {:.6e}",
            m.n, m.messages, m.randomness, m.mean_tv_max, m.mean_p_err_joint, m.mean_p_err_msg
        );
    }
    let fmt = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.6}"));
    let _ = writeln!(s, "slope of ln(mean TV) vs n: {}", fmt(r.tv_slope));
    let _ = writeln!(s, "slope of ln(mean joint error) vs n: {}", fmt(r.joint_error_slope));
    for w in &r.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}

/// One labelled polyline.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// A static SVG line chart with linear axes starting the y axis at zero.
pub fn line_chart(series: &[Series], x_label: &str, y_label: &str, title: &str) -> String {
    let (w, h) = (720.0, 460.0);
    let (left, right, top, bottom) = (80.0, 200.0, 50.0, 60.0);
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    y1 = if y1 > 0.0 { y1 * 1.05 } else { 1.0 };
    let pw = w - left - right;
    let ph = h - top - bottom;
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + ph - y / y1 * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="28" text-anchor="middle" font-size="15">{}</text>"#,
        left + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let f = f64::from(i) / 5.0;
        let (xv, yv) = (x0 + f * (x1 - x0), f * y1);
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            svg,
            r##"<line x1="{px:.2}" y1="{top}" x2="{px:.2}" y2="{}" stroke="#ddd"/><text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"##,
            top + ph,
            top + ph + 18.0,
            tick(xv)
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{left}" y1="{py:.2}" x2="{}" y2="{py:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
            left + pw,
            left - 6.0,
            py + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        h - 18.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0,
        escape(y_label)
    );
    for (i, s) in series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#,
            path.join(" ")
        );
        let ly = top + 20.0 + 22.0 * i as f64;
        let lx = left + pw + 15.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 25.0,
            lx + 32.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn tick(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 0.01 && v.abs() < 1e4) {
        let s = format!("{v:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}
