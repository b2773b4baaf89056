use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mnnts::dataset::{to_radians, AngleUnit};
use mnnts::estimate::{fit, Method};
use mnnts::independence::{independence_score, lr_test, parse_var_list, Split};
use mnnts::io::{ingest_csv, write_table, write_table_to, Ingested, ModelFile, ModelMetadata};
use mnnts::marginal::{density_grid, marginal};
use mnnts::summary::{circular_correlation, circular_summary};
use mnnts::{conditional, ConditionalSpec, DimVector, Error, MnntsParams, Result, SplitMix64};

const UNIT_ENV: &str = "MNNTS_UNIT";

#[derive(Parser)]
#[command(
    name = "mnnts",
    version,
    about = "MNNTS distributions for circular data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model to a CSV of angles.
    Fit(FitArgs),
    /// Density on a uniform grid over one or two variables.
    Density(DensityArgs),
    /// Mixing probabilities of a marginal distribution.
    Marginal(MarginalArgs),
    /// Conditional model given fixed angles.
    Conditional(ConditionalArgs),
    /// Independence score of a model or likelihood-ratio test on data.
    Indep(IndepArgs),
    /// Draw a sample from a model.
    Sample(SampleArgs),
    /// Circular summaries and correlations of a CSV of angles.
    Summary(SummaryArgs),
    /// Generate a synthetic wind-direction style dataset.
    Synth(SynthArgs),
}

#[derive(Args)]
struct InputArgs {
    /// CSV with a header row of variable names.
    #[arg(long)]
    input: PathBuf,
    /// Unit of the angles in the input (defaults to $MNNTS_UNIT, then radians).
    #[arg(long)]
    unit: Option<AngleUnit>,
    /// Cell value marking a missing observation.
    #[arg(long, default_value = "NA")]
    missing: String,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Orders M1,M2,...; a single value applies to every variable.
    #[arg(long)]
    m: String,
    #[arg(long, default_value = "md")]
    method: Method,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long)]
    model: PathBuf,
    /// Points per axis.
    #[arg(long)]
    grid: usize,
    /// One or two variable numbers (1-based).
    #[arg(long)]
    vars: String,
    /// Condition on k=VAL,... instead of integrating the other variables out.
    #[arg(long)]
    fix: Option<String>,
    /// Unit of the --fix values.
    #[arg(long, default_value = "radians")]
    unit: AngleUnit,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MarginalArgs {
    #[arg(long)]
    model: PathBuf,
    /// Variable numbers to keep (1-based).
    #[arg(long)]
    keep: String,
    /// One column per kept variable, each its own univariate marginal.
    #[arg(long)]
    table: bool,
    /// Directory for component model files.
    #[arg(long)]
    components: Option<PathBuf>,
}

#[derive(Args)]
struct ConditionalArgs {
    #[arg(long)]
    model: PathBuf,
    /// k=VAL,... with 1-based variable numbers.
    #[arg(long)]
    given: String,
    #[arg(long, default_value = "radians")]
    unit: AngleUnit,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct IndepArgs {
    #[arg(long, conflicts_with_all = ["input", "m"])]
    model: Option<PathBuf>,
    #[arg(long, requires = "m")]
    input: Option<PathBuf>,
    #[arg(long, requires = "input")]
    m: Option<String>,
    /// Blocks as i,j|k,l (1-based).
    #[arg(long)]
    split: String,
    #[arg(long, default_value = "md")]
    method: Method,
    #[arg(long)]
    unit: Option<AngleUnit>,
    #[arg(long, default_value = "NA")]
    missing: String,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(short = 'n', long = "count")]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SummaryArgs {
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 2017)]
    rows: usize,
    #[arg(long, default_value_t = 7)]
    vars: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fraction of extra rows written with a missing cell.
    #[arg(long, default_value_t = 0.0)]
    missing_rate: f64,
    #[arg(long, default_value = "degrees")]
    unit: AngleUnit,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mnnts: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Fit(a) => cmd_fit(a),
        Command::Density(a) => cmd_density(a),
        Command::Marginal(a) => cmd_marginal(a),
        Command::Conditional(a) => cmd_conditional(a),
        Command::Indep(a) => cmd_indep(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Summary(a) => cmd_summary(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

fn input_unit(unit: Option<AngleUnit>) -> Result<AngleUnit> {
    match unit {
        Some(u) => Ok(u),
        None => match std::env::var(UNIT_ENV) {
            Ok(v) => v.parse(),
            Err(_) => Ok(AngleUnit::Radians),
        },
    }
}

fn read_input(path: &Path, unit: Option<AngleUnit>, missing: &str) -> Result<Ingested> {
    let ingested = ingest_csv(path, input_unit(unit)?, missing)?;
    eprintln!(
        "read {} rows of {} variables ({} dropped)",
        ingested.dataset.n_obs(),
        ingested.dataset.n_vars(),
        ingested.dropped
    );
    Ok(ingested)
}

fn parse_dims(text: &str, n_vars: usize) -> Result<DimVector> {
    let orders = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Argument(format!("bad order {t:?} in --m")))
        })
        .collect::<Result<Vec<_>>>()?;
    let orders = if orders.len() == 1 && n_vars > 1 {
        vec![orders[0]; n_vars]
    } else {
        orders
    };
    if orders.len() != n_vars {
        return Err(Error::Argument(format!(
            "--m gives {} orders for {n_vars} variables",
            orders.len()
        )));
    }
    DimVector::new(orders)
}

/// Parse `k=VAL,...` into 0-based variables and radians.
fn parse_assignments(text: &str, unit: AngleUnit, n_vars: usize) -> Result<ConditionalSpec> {
    let mut pairs = Vec::new();
    for item in text.split(',') {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Argument(format!("expected k=VAL, got {item:?}")))?;
        let k = parse_var_list(k)?[0];
        if k >= n_vars {
            return Err(Error::Argument(format!(
                "variable {} out of range for a {n_vars}-variable model",
                k + 1
            )));
        }
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Argument(format!("bad angle {v:?}")))?;
        if !v.is_finite() {
            return Err(Error::Argument(format!("bad angle {v:?}")));
        }
        pairs.push((k, to_radians(v, unit)));
    }
    ConditionalSpec::from_pairs(&pairs)
}

fn load_model(path: &Path) -> Result<(ModelFile, MnntsParams)> {
    let file = ModelFile::read(path)?;
    let params = file.params()?;
    Ok((file, params))
}

fn emit_table(out: Option<&Path>, header: &[String], rows: Vec<Vec<f64>>) -> Result<()> {
    match out {
        Some(p) => write_table(p, header, rows),
        None => write_table_to(std::io::stdout().lock(), header, rows),
    }
}

fn cmd_fit(a: FitArgs) -> Result<()> {
    let ingested = read_input(&a.input.input, a.input.unit, &a.input.missing)?;
    let data = &ingested.dataset;
    let dims = parse_dims(&a.m, data.n_vars())?;
    let report = fit(data, &dims, a.method)?;
    ModelFile::from_fit(&report, data.var_names(), data.n_obs()).write(&a.output)?;
    writeln!(
        std::io::stdout().lock(),
        "method={} n_obs={} loglik={:.10} converged={} iterations={} parameters={}",
        report.method,
        data.n_obs(),
        report.loglik,
        report.converged,
        report.iterations,
        dims.total_len()
    )?;
    Ok(())
}

fn cmd_density(a: DensityArgs) -> Result<()> {
    let (file, p) = load_model(&a.model)?;
    let names = file.var_names();
    let n = p.n_vars();
    let mut vars = parse_var_list(&a.vars)?;
    vars.sort_unstable();
    vars.dedup();
    if vars.is_empty() || vars.len() > 2 || vars.iter().any(|&v| v >= n) {
        return Err(Error::Argument(format!(
            "--vars must name one or two of the model's {n} variables"
        )));
    }
    if a.grid == 0 {
        return Err(Error::Argument("--grid must be positive".into()));
    }
    // the model whose variables `vars` index after conditioning
    let (model, free): (MnntsParams, Vec<usize>) = match &a.fix {
        Some(text) => {
            let spec = parse_assignments(text, a.unit, n)?;
            let fixed = spec.vars();
            if vars.iter().any(|v| fixed.contains(v)) {
                return Err(Error::Argument(
                    "a variable cannot be both plotted and fixed".into(),
                ));
            }
            if fixed.len() == n {
                return Err(Error::Argument("--fix leaves no free variables".into()));
            }
            let free = (0..n).filter(|v| !fixed.contains(v)).collect();
            (conditional(&p, &spec)?, free)
        }
        None => (p, (0..n).collect()),
    };
    let local: Vec<usize> = vars
        .iter()
        .map(|v| {
            free.iter()
                .position(|f| f == v)
                .expect("plotted variable is free")
        })
        .collect();
    let mix = marginal(&model, &local)?;
    let rows = density_grid(&mix, a.grid)?;
    let mut header: Vec<String> = vars.iter().map(|&v| names[v].clone()).collect();
    header.push("density".into());
    emit_table(a.out.as_deref(), &header, rows)
}

fn cmd_marginal(a: MarginalArgs) -> Result<()> {
    let (file, p) = load_model(&a.model)?;
    let names = file.var_names();
    let keep = parse_var_list(&a.keep)?;
    let mut stdout = std::io::stdout().lock();
    if a.table {
        let mixtures = keep
            .iter()
            .map(|&v| marginal(&p, &[v]))
            .collect::<Result<Vec<_>>>()?;
        let rows = mixtures.iter().map(|m| m.probs().len()).max().unwrap_or(0);
        let header: Vec<String> = keep.iter().map(|&v| names[v].clone()).collect();
        writeln!(stdout, "component,{}", header.join(","))?;
        for k in 0..rows {
            let cells: Vec<String> = mixtures
                .iter()
                .map(|m| {
                    m.probs()
                        .get(k)
                        .map(|x| format!("{x:.4}"))
                        .unwrap_or_default()
                })
                .collect();
            writeln!(stdout, "{},{}", k + 1, cells.join(","))?;
        }
        let sums: Vec<String> = mixtures
            .iter()
            .map(|m| format!("{:.4}", m.probs().iter().sum::<f64>()))
            .collect();
        writeln!(stdout, "total,{}", sums.join(","))?;
        if let Some(dir) = &a.components {
            std::fs::create_dir_all(dir)?;
            for (m, &v) in mixtures.iter().zip(&keep) {
                write_components(dir, &names[v], m.components(), &[names[v].clone()])?;
            }
        }
    } else {
        let m = marginal(&p, &keep)?;
        let kept: Vec<String> = m.keep().iter().map(|&v| names[v].clone()).collect();
        writeln!(stdout, "component,probability")?;
        for (k, x) in m.probs().iter().enumerate() {
            writeln!(stdout, "{},{x:.4}", k + 1)?;
        }
        if let Some(dir) = &a.components {
            std::fs::create_dir_all(dir)?;
            write_components(dir, &kept.join("_"), m.components(), &kept)?;
        }
    }
    Ok(())
}

fn write_components(
    dir: &Path,
    stem: &str,
    comps: &[MnntsParams],
    var_names: &[String],
) -> Result<()> {
    for (k, c) in comps.iter().enumerate() {
        let meta = ModelMetadata {
            var_names: var_names.to_vec(),
            ..ModelMetadata::default()
        };
        ModelFile::from_params(c, meta)
            .write(&dir.join(format!("{stem}_component_{}.json", k + 1)))?;
    }
    Ok(())
}

fn cmd_conditional(a: ConditionalArgs) -> Result<()> {
    let (file, p) = load_model(&a.model)?;
    let names = file.var_names();
    let spec = parse_assignments(&a.given, a.unit, p.n_vars())?;
    let fixed = spec.vars();
    let cond = conditional(&p, &spec)?;
    let meta = ModelMetadata {
        var_names: (0..p.n_vars())
            .filter(|v| !fixed.contains(v))
            .map(|v| names[v].clone())
            .collect(),
        ..ModelMetadata::default()
    };
    let out = ModelFile::from_params(&cond, meta);
    match &a.output {
        Some(path) => out.write(path),
        None => {
            writeln!(std::io::stdout().lock(), "{}", out.to_json()?)?;
            Ok(())
        }
    }
}

fn cmd_indep(a: IndepArgs) -> Result<()> {
    match (&a.model, &a.input, &a.m) {
        (Some(model), None, None) => {
            let (_, p) = load_model(model)?;
            let split = Split::parse(&a.split, p.n_vars())?;
            writeln!(
                std::io::stdout().lock(),
                "score={:.10}",
                independence_score(&p, &split)?
            )?;
            Ok(())
        }
        (None, Some(input), Some(m)) => {
            let ingested = read_input(input, a.unit, &a.missing)?;
            let data = &ingested.dataset;
            let dims = parse_dims(m, data.n_vars())?;
            let split = Split::parse(&a.split, data.n_vars())?;
            writeln!(
                std::io::stdout().lock(),
                "{}",
                lr_test(data, &dims, &split, a.method)?
            )?;
            Ok(())
        }
        _ => Err(Error::Argument(
            "give either --model or both --input and --m".into(),
        )),
    }
}

fn cmd_sample(a: SampleArgs) -> Result<()> {
    let (file, p) = load_model(&a.model)?;
    let mut rng = SplitMix64::new(a.seed);
    let data = mnnts::sample(&p, &mut rng, a.count)?;
    let rows: Vec<Vec<f64>> = data.rows().map(|r| r.to_vec()).collect();
    emit_table(a.out.as_deref(), &file.var_names(), rows)
}

fn cmd_summary(a: SummaryArgs) -> Result<()> {
    let ingested = read_input(&a.input.input, a.input.unit, &a.input.missing)?;
    let data = &ingested.dataset;
    let columns: Vec<Vec<f64>> = (0..data.n_vars()).map(|j| data.column(j)).collect();
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "variable,mean,resultant,median,q1,q3")?;
    for (name, col) in data.var_names().iter().zip(&columns) {
        let s = circular_summary(col)?;
        writeln!(
            stdout,
            "{name},{:.6},{:.6},{:.6},{:.6},{:.6}",
            s.mean_direction, s.resultant_length, s.median, s.q1, s.q3
        )?;
    }
    writeln!(stdout)?;
    writeln!(stdout, "correlation,{}", data.var_names().join(","))?;
    for (i, name) in data.var_names().iter().enumerate() {
        let mut cells = Vec::with_capacity(columns.len());
        for j in 0..columns.len() {
            cells.push(if j > i {
                format!("{:.4}", circular_correlation(&columns[i], &columns[j])?)
            } else {
                String::new()
            });
        }
        writeln!(stdout, "{name},{}", cells.join(","))?;
    }
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    if !(0.0..1.0).contains(&a.missing_rate) {
        return Err(Error::Argument("--missing-rate must be in [0, 1)".into()));
    }
    let mut rng = SplitMix64::new(a.seed);
    let data = mnnts::synth::wind_like(a.rows, a.vars, &mut rng)?;
    let convert = |x: f64| match a.unit {
        AngleUnit::Degrees => x.to_degrees(),
        AngleUnit::Radians => x,
    };
    let mut lines = Vec::with_capacity(a.rows);
    for r in data.rows() {
        if a.missing_rate > 0.0 && rng.uniform() < a.missing_rate {
            let hole = rng.below(r.len() as u64) as usize;
            lines.push(
                r.iter()
                    .enumerate()
                    .map(|(j, &x)| {
                        if j == hole {
                            "NA".to_string()
                        } else {
                            convert(x).to_string()
                        }
                    })
                    .collect::<Vec<_>>(),
            );
        }
        lines.push(r.iter().map(|&x| convert(x).to_string()).collect());
    }
    let mut text = data.var_names().join(",");
    text.push('\n');
    for l in lines {
        text.push_str(&l.join(","));
        text.push('\n');
    }
    match &a.out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
