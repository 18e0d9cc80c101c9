use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use mandelcert_core::certifier::{
    decide, decide_oracle, DecideConfig, Parameter, Verdict, VerdictKind, VerdictRecord,
    DEFAULT_BAND_BUDGET, DEFAULT_BIT_CAP, DEFAULT_BUDGET, DEFAULT_PRECISION,
    DEFAULT_PRECISION_MAX,
};
use mandelcert_core::exact_arith::{BuiltinOracle, ComplexRational, Rational};
use mandelcert_core::rational::{
    circle_decide, even_denominator, exp_epigraph_witness, phi_decode, phi_encode,
};
use mandelcert_core::render::{
    area_estimate, classify_grid, encode_pgm, encode_ppm, escape_bands, palette, GridExport,
    Mode, VerdictCounts, Viewport,
};
use mandelcert_core::zeno::{
    bundled, classify_cell_limit, parse_tm, run_stages, zeno_mandelbrot_run, CellLimit,
    ParseOptions, StageClass, StopReason, BUNDLED,
};

mod table;

const EXIT_USAGE: u8 = 3;
const EXIT_FAILURE: u8 = 4;

#[derive(Parser)]
#[command(name = "mandelcert", version, about = "Certified Mandelbrot set membership")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide one point, or a point given by two oracles.
    ///
    /// Exit status: 0 in, 1 out, 2 unknown.
    Decide(DecideArgs),
    /// Classify a grid and write an escape-band image plus a JSON sidecar.
    Render(RenderArgs),
    /// Certified area bounds for one or more budgets.
    Area(AreaArgs),
    /// Turing machines on the accelerated clock.
    #[command(subcommand)]
    Zeno(ZenoCommand),
    /// Deciders over the rationals.
    #[command(subcommand)]
    Rational(RationalCommand),
    /// Decidability table, with the rational row checked by running it.
    Table(TableArgs),
}

#[derive(Args, Clone)]
struct CertArgs {
    /// Iteration budget.
    #[arg(long)]
    budget: Option<u32>,
    /// Starting interval precision, in bits.
    #[arg(long, default_value_t = DEFAULT_PRECISION, value_parser = clap::value_parser!(u32).range(1..))]
    precision: u32,
    /// Largest interval precision tried.
    #[arg(long, default_value_t = DEFAULT_PRECISION_MAX, value_parser = clap::value_parser!(u32).range(1..))]
    precision_max: u32,
    /// Largest numerator or denominator, in bits, in exact iteration.
    #[arg(long, default_value_t = DEFAULT_BIT_CAP, value_parser = clap::value_parser!(u64).range(64..))]
    bit_cap: u64,
    /// Skip the cardioid and period-2 disk certificates.
    #[arg(long)]
    no_regions: bool,
    /// Skip exact cycle detection.
    #[arg(long)]
    no_cycles: bool,
}

impl CertArgs {
    fn config(&self, default_budget: u32) -> Result<DecideConfig, String> {
        let budget = self.budget.unwrap_or(default_budget);
        if budget == 0 {
            return Err("--budget must be at least 1".into());
        }
        if self.precision_max < self.precision {
            return Err("--precision-max must be at least --precision".into());
        }
        Ok(DecideConfig {
            budget,
            p0: self.precision,
            p_max: self.precision_max,
            bit_cap: self.bit_cap,
            use_regions: !self.no_regions,
            use_cycles: !self.no_cycles,
        })
    }
}

#[derive(Args)]
struct DecideArgs {
    /// Real part: a rational (`-3/4`, `0.5`) or `sqrt:q`, `-sqrt:q`.
    #[arg(long, allow_hyphen_values = true)]
    re: BuiltinOracle,
    /// Imaginary part, same forms as --re.
    #[arg(long, allow_hyphen_values = true)]
    im: BuiltinOracle,
    /// Stages for oracle inputs.
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u32).range(1..))]
    stages: u32,
    #[command(flatten)]
    cert: CertArgs,
}

#[derive(Args, Clone)]
struct ViewArgs {
    /// Lattice points per side.
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long, default_value = "-2", allow_hyphen_values = true)]
    re_min: Rational,
    #[arg(long, default_value = "2", allow_hyphen_values = true)]
    re_max: Rational,
    #[arg(long, default_value = "-2", allow_hyphen_values = true)]
    im_min: Rational,
    #[arg(long, default_value = "2", allow_hyphen_values = true)]
    im_max: Rational,
    #[arg(long, value_enum, default_value_t = ModeArg::Point)]
    mode: ModeArg,
    /// Worker threads; all cores when absent.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    workers: Option<u32>,
}

impl ViewArgs {
    fn viewport(&self) -> Result<Viewport, String> {
        Viewport::new(
            self.re_min.clone(),
            self.re_max.clone(),
            self.im_min.clone(),
            self.im_max.clone(),
            self.n,
        )
        .map_err(|e| e.to_string())
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Point,
    Box,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Point => Mode::Point,
            ModeArg::Box => Mode::Box,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pgm,
    Ppm,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    view: ViewArgs,
    #[command(flatten)]
    cert: CertArgs,
    /// Image path; the sidecar goes next to it with `.json` appended.
    #[arg(long, default_value = "mandelbrot.pgm")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Pgm)]
    format: Format,
    /// Also write every cell's verdict as JSON here.
    #[arg(long)]
    grid_json: Option<PathBuf>,
}

#[derive(Args)]
struct AreaArgs {
    #[command(flatten)]
    view: ViewArgs,
    #[command(flatten)]
    cert: CertArgs,
    /// Comma-separated budgets, one output row each.
    #[arg(long, value_delimiter = ',', default_value = "50")]
    budgets: Vec<u32>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ZenoCommand {
    /// Run a machine file or a bundled machine.
    Run(ZenoRunArgs),
    /// Run the bundled lamp machine and classify cell 0.
    Lamp(ZenoLampArgs),
    /// Staged plotting loop for a point given by two oracles.
    Mandelbrot(ZenoMandelbrotArgs),
    /// List the bundled machines.
    List,
}

#[derive(Args)]
struct ZenoRunArgs {
    /// Machine description file.
    #[arg(required_unless_present = "machine", conflicts_with = "machine")]
    file: Option<PathBuf>,
    /// Name of a bundled machine.
    #[arg(long)]
    machine: Option<String>,
    /// Initial tape contents from cell 0; defaults to the bundled input.
    #[arg(long)]
    input: Option<String>,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    snapshot_every: u64,
    /// Cell whose limit is classified.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    cell: i64,
    /// Snapshots in the classification window.
    #[arg(long, default_value_t = 8)]
    window: usize,
    /// Require every target state to be declared.
    #[arg(long)]
    strict: bool,
    /// Write the snapshot lines here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ZenoLampArgs {
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
    #[arg(long, default_value_t = 8)]
    window: usize,
}

#[derive(Args)]
struct ZenoMandelbrotArgs {
    #[arg(long, allow_hyphen_values = true)]
    re: BuiltinOracle,
    #[arg(long, allow_hyphen_values = true)]
    im: BuiltinOracle,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u32).range(1..))]
    stages: u32,
}

#[derive(Subcommand)]
enum RationalCommand {
    /// Is x^2 + y^2 = 1?
    Circle {
        #[arg(long, allow_hyphen_values = true)]
        x: Rational,
        #[arg(long, allow_hyphen_values = true)]
        y: Rational,
    },
    /// 1 when the reduced denominator of q is even.
    Evenden {
        #[arg(long, allow_hyphen_values = true)]
        q: Rational,
    },
    /// Is y >= e^x?
    Epigraph {
        #[arg(long, allow_hyphen_values = true)]
        x: Rational,
        #[arg(long, allow_hyphen_values = true)]
        y: Rational,
    },
    /// Smallest code of q in the enumeration of the rationals.
    Encode {
        #[arg(long, allow_hyphen_values = true)]
        q: Rational,
    },
    /// The rational with code n.
    Decode {
        #[arg(long)]
        n: String,
    },
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, value_enum, default_value_t = TableFormat::Text)]
    format: TableFormat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableFormat {
    Text,
    Json,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

type CmdResult = Result<ExitCode, Failure>;

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn runtime(e: impl ToString) -> Failure {
    Failure::Runtime(e.to_string())
}

fn print_json(value: &impl Serialize) -> Result<(), Failure> {
    let line = serde_json::to_string(value).map_err(runtime)?;
    let mut out = io::stdout().lock();
    writeln!(out, "{line}").map_err(runtime)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn exit_for(verdict: &Verdict) -> ExitCode {
    ExitCode::from(match verdict.kind() {
        VerdictKind::In => 0,
        VerdictKind::Out => 1,
        VerdictKind::Unknown => 2,
    })
}

/// Verdict for an oracle input: the record of the last stage box, plus the
/// oracle specs and the certifying stage.
#[derive(Serialize, Deserialize)]
struct OracleVerdict {
    re: String,
    im: String,
    stage: Option<u32>,
    #[serde(flatten)]
    record: VerdictRecord,
}

fn cmd_decide(a: DecideArgs) -> CmdResult {
    let cfg = a.cert.config(DEFAULT_BUDGET).map_err(usage)?;
    if let (BuiltinOracle::Rational(re), BuiltinOracle::Rational(im)) = (&a.re, &a.im) {
        let c = Parameter::Point(ComplexRational::new(re.clone(), im.clone()));
        let verdict = decide(&c, &cfg);
        print_json(&VerdictRecord::new(&c, &verdict, &cfg))?;
        return Ok(exit_for(&verdict));
    }
    let staged = decide_oracle(&a.re, &a.im, a.stages, &cfg);
    let param = Parameter::Box(staged.last_box.clone());
    print_json(&OracleVerdict {
        re: a.re.to_string(),
        im: a.im.to_string(),
        stage: staged.stage,
        record: VerdictRecord::new(&param, &staged.verdict, &cfg),
    })?;
    Ok(exit_for(&staged.verdict))
}

/// Sidecar written next to a rendered image.
#[derive(Serialize, Deserialize)]
struct RenderMeta {
    image: String,
    format: String,
    viewport: Viewport,
    mode: Mode,
    config: DecideConfig,
    counts: VerdictCounts,
    upper: Rational,
    lower: Rational,
    upper_approx: String,
    lower_approx: String,
}

fn cmd_render(a: RenderArgs) -> CmdResult {
    let cfg = a.cert.config(DEFAULT_BAND_BUDGET).map_err(usage)?;
    let v = a.view.viewport().map_err(usage)?;
    let format = match a.format {
        Format::Pgm => "pgm",
        Format::Ppm => "ppm",
        _ => return Err(usage("render writes --format pgm or ppm")),
    };
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        if !dir.is_dir() {
            return Err(runtime(format!("{}: no such directory", dir.display())));
        }
    }
    let grid = classify_grid(&v, &cfg, a.view.mode.into(), a.view.workers.map(|w| w as usize))
        .map_err(runtime)?;
    let image = escape_bands(&grid);
    let bytes = match a.format {
        Format::Ppm => encode_ppm(&image, palette),
        _ => encode_pgm(&image),
    };
    write_file(&a.out, &bytes)?;
    let area = area_estimate(&grid, &v);
    let meta = RenderMeta {
        image: a.out.display().to_string(),
        format: format.into(),
        viewport: v.clone(),
        mode: grid.mode,
        config: cfg,
        counts: grid.counts(),
        upper_approx: format!("{:.6}", area.upper.to_f64()),
        lower_approx: format!("{:.6}", area.lower.to_f64()),
        upper: area.upper,
        lower: area.lower,
    };
    let mut sidecar = a.out.clone().into_os_string();
    sidecar.push(".json");
    let json = serde_json::to_string_pretty(&meta).map_err(runtime)? + "\n";
    write_file(Path::new(&sidecar), json.as_bytes())?;
    if let Some(path) = &a.grid_json {
        let export = serde_json::to_string(&GridExport::new(&grid, &v)).map_err(runtime)? + "\n";
        write_file(path, export.as_bytes())?;
    }
    print_json(&meta)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize, Deserialize)]
struct AreaRow {
    budget: u32,
    upper: Rational,
    lower: Rational,
    upper_approx: String,
    lower_approx: String,
    #[serde(flatten)]
    counts: VerdictCounts,
}

#[derive(Serialize, Deserialize)]
struct AreaReport {
    viewport: Viewport,
    mode: Mode,
    rows: Vec<AreaRow>,
}

fn cmd_area(a: AreaArgs) -> CmdResult {
    let v = a.view.viewport().map_err(usage)?;
    if a.budgets.is_empty() || a.budgets.contains(&0) {
        return Err(usage("--budgets must list positive budgets"));
    }
    if !matches!(a.format, Format::Csv | Format::Json) {
        return Err(usage("area writes --format csv or json"));
    }
    let mut rows = Vec::new();
    for &budget in &a.budgets {
        let mut cfg = a.cert.config(budget).map_err(usage)?;
        cfg.budget = budget;
        let grid = classify_grid(&v, &cfg, a.view.mode.into(), a.view.workers.map(|w| w as usize))
            .map_err(runtime)?;
        let area = area_estimate(&grid, &v);
        rows.push(AreaRow {
            budget,
            upper_approx: format!("{:.6}", area.upper.to_f64()),
            lower_approx: format!("{:.6}", area.lower.to_f64()),
            upper: area.upper,
            lower: area.lower,
            counts: grid.counts(),
        });
    }
    let text = if a.format == Format::Json {
        let report = AreaReport {
            viewport: v,
            mode: a.view.mode.into(),
            rows,
        };
        serde_json::to_string(&report).map_err(runtime)? + "\n"
    } else {
        let mut s = String::from("budget,upper,lower,upper_approx,lower_approx,out,in,unknown\n");
        for r in &rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.budget,
                r.upper,
                r.lower,
                r.upper_approx,
                r.lower_approx,
                r.counts.out,
                r.counts.inside,
                r.counts.unknown
            ));
        }
        s
    };
    match &a.out {
        Some(path) => write_file(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize, Deserialize)]
struct ZenoSummary {
    machine: String,
    steps: u64,
    halted_at: Option<u64>,
    stop: StopReason,
    elapsed: Rational,
    cell: i64,
    window: usize,
    limit: CellLimit,
}

fn cmd_zeno_run(a: ZenoRunArgs) -> CmdResult {
    let (name, source, default_input) = match (&a.file, &a.machine) {
        (Some(path), _) => (
            path.display().to_string(),
            fs::read_to_string(path).map_err(|e| runtime(format!("{}: {e}", path.display())))?,
            "",
        ),
        (None, Some(name)) => {
            let m = bundled(name).ok_or_else(|| {
                let names: Vec<_> = BUNDLED.iter().map(|m| m.name).collect();
                usage(format!("no bundled machine `{name}`; have {}", names.join(", ")))
            })?;
            (m.name.to_string(), m.source.to_string(), m.input)
        }
        (None, None) => return Err(usage("give a machine file or --machine")),
    };
    let m = parse_tm(&source, ParseOptions { strict: a.strict })
        .map_err(|e| usage(format!("{name}: {e}")))?;
    let input = a.input.as_deref().unwrap_or(default_input);
    let trace = run_stages(&m, input, a.budget, a.snapshot_every);
    let limit = classify_cell_limit(&trace, a.cell, a.window).map_err(usage)?;
    let lines = trace.to_json_lines();
    match &a.out {
        Some(path) => write_file(path, lines.as_bytes())?,
        None => print!("{lines}"),
    }
    print_json(&ZenoSummary {
        machine: name,
        steps: trace.steps,
        halted_at: trace.halted_at,
        stop: trace.stop,
        elapsed: trace.elapsed,
        cell: a.cell,
        window: a.window,
        limit,
    })?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_zeno_lamp(a: ZenoLampArgs) -> CmdResult {
    let m = bundled("lamp").expect("lamp is bundled").parse();
    let trace = run_stages(&m, "", a.budget, 1);
    let limit = classify_cell_limit(&trace, 0, a.window).map_err(usage)?;
    print_json(&ZenoSummary {
        machine: "lamp".into(),
        steps: trace.steps,
        halted_at: trace.halted_at,
        stop: trace.stop,
        elapsed: trace.elapsed,
        cell: 0,
        window: a.window,
        limit,
    })?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize, Deserialize)]
struct StageSummary {
    re: String,
    im: String,
    stages: u32,
    first_flag: Option<u32>,
    class: StageClass,
}

fn cmd_zeno_mandelbrot(a: ZenoMandelbrotArgs) -> CmdResult {
    let run = zeno_mandelbrot_run(&a.re, &a.im, a.stages);
    print!("{}", run.to_json_lines());
    print_json(&StageSummary {
        re: a.re.to_string(),
        im: a.im.to_string(),
        stages: a.stages,
        first_flag: run.first_flag(),
        class: run.class,
    })?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_rational(c: RationalCommand) -> CmdResult {
    let value = match c {
        RationalCommand::Circle { x, y } => serde_json::json!({
            "x": x, "y": y, "on_circle": circle_decide(&x, &y),
        }),
        RationalCommand::Evenden { q } => serde_json::json!({
            "q": q, "value": even_denominator(&q),
        }),
        RationalCommand::Epigraph { x, y } => {
            let (above, order) = exp_epigraph_witness(&x, &y);
            serde_json::json!({ "x": x, "y": y, "above": above, "order": order })
        }
        RationalCommand::Encode { q } => serde_json::json!({
            "q": q, "n": phi_encode(&q).to_string(),
        }),
        RationalCommand::Decode { n } => {
            let code: num_bigint::BigUint = n
                .trim()
                .parse()
                .map_err(|_| usage(format!("not a natural number: {n}")))?;
            serde_json::json!({ "n": n.trim(), "q": phi_decode(&code) })
        }
    };
    print_json(&value)?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Decide(a) => cmd_decide(a),
        Command::Render(a) => cmd_render(a),
        Command::Area(a) => cmd_area(a),
        Command::Zeno(ZenoCommand::Run(a)) => cmd_zeno_run(a),
        Command::Zeno(ZenoCommand::Lamp(a)) => cmd_zeno_lamp(a),
        Command::Zeno(ZenoCommand::Mandelbrot(a)) => cmd_zeno_mandelbrot(a),
        Command::Zeno(ZenoCommand::List) => {
            for m in BUNDLED {
                println!("{}", m.name);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Rational(c) => cmd_rational(c),
        Command::Table(a) => table::cmd_table(a.format == TableFormat::Json),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
