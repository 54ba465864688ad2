use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use lhsd::asymptotics::{IntegrandRegistry, VarianceDiagnostics};
use lhsd::config::{load_config, ConfigError, ExperimentConfig};
use lhsd::copula::CopulaModel;
use lhsd::report::{write_csv, ReportHeader};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "lhsd", version, about = "Latin hypercube sampling with dependence")]
struct Cli {
    /// Experiment configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed; overrides `simulation.master_seed`.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Output file; overrides `output.path`. Standard output if neither is set.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the MC vs LHSD replication experiment and write the price table.
    Price,
    /// Check the variance-reduction conditions of a copula on a grid.
    CheckCopula(CopulaArgs),
    /// Limit variances of MC and LHSD for a test integrand.
    DiagVariance(DiagArgs),
    /// Quick internal consistency checks.
    Selftest,
}

#[derive(Args, Debug)]
struct CopulaArgs {
    /// Copula family; defaults to `copula_plus` of --config.
    #[arg(long)]
    family: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Grid points per axis.
    #[arg(long, default_value_t = 9)]
    grid: usize,
}

#[derive(Args, Debug)]
struct DiagArgs {
    /// Test integrand (neg-product, product, identity, constant, zero).
    #[arg(long, default_value = "neg-product")]
    integrand: String,
    #[command(flatten)]
    copula: CopulaArgs,
    /// Quadrature nodes per axis of the coarse rule.
    #[arg(long, default_value_t = 16)]
    resolution: usize,
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

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<ConfigError>().is_some() {
        return EXIT_CONFIG;
    }
    match e.downcast_ref::<lhsd::Error>() {
        Some(err) if err.is_numerical() => EXIT_NUMERICAL,
        Some(_) => EXIT_CONFIG,
        None => 1,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let config = cli.config.as_deref().map(load_config).transpose()?;
    match &cli.command {
        Command::Price => {
            let Some(cfg) = config else {
                bail!(ConfigError {
                    source: None,
                    violations: vec![lhsd::config::Violation {
                        field: "--config".into(),
                        message: "price needs a configuration file".into(),
                    }],
                });
            };
            price(&cfg, cli.seed, cli.out.as_ref())
        }
        Command::CheckCopula(args) => {
            let model = copula_from(args, config.as_ref())?;
            let report = model.check_conditions(args.grid)?;
            let mut text = format!("copula            : {model}\n{report}\n");
            text += if report.holds() {
                "conditions        : hold\n"
            } else {
                "conditions        : violated\n"
            };
            emit(&text, cli.out.as_ref())
        }
        Command::DiagVariance(args) => {
            let model = copula_from(&args.copula, config.as_ref())?;
            let f = IntegrandRegistry::builtin().build(&args.integrand, model.dim())?;
            let diag = VarianceDiagnostics::compute(&model, f, args.resolution)?;
            emit(&format!("{diag}\n"), cli.out.as_ref())
        }
        Command::Selftest => selftest(),
    }
}

fn copula_from(args: &CopulaArgs, config: Option<&ExperimentConfig>) -> lhsd::Result<CopulaModel> {
    let (family, alpha, dim) = match (args.family.as_deref(), config) {
        (Some(f), _) => (f.to_string(), args.alpha.unwrap_or(0.0), args.dim),
        (None, Some(cfg)) => (
            cfg.copula_plus.family.clone(),
            args.alpha.unwrap_or(cfg.copula_plus.alpha),
            cfg.dim(),
        ),
        (None, None) => ("independence".to_string(), 0.0, args.dim),
    };
    CopulaModel::new(&family, alpha, dim)
}

fn emit(text: &str, out: Option<&PathBuf>) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn price(cfg: &ExperimentConfig, seed: Option<u64>, out: Option<&PathBuf>) -> anyhow::Result<()> {
    let mut exp = cfg.experiment()?;
    if let Some(s) = seed {
        exp.master_seed = s;
    }
    let specs = cfg.specs()?;
    let start = Instant::now();
    let rows = exp.run_grid(&specs)?;
    for r in &rows {
        eprintln!("{r}");
    }
    eprintln!("{} strikes in {:.1} s", rows.len(), start.elapsed().as_secs_f64());

    let header = ReportHeader::for_config(cfg, exp.master_seed);
    let alpha = cfg.copula_plus.alpha;
    match out.or(cfg.output.path.as_ref()) {
        Some(p) => {
            let file = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            let mut w = BufWriter::new(file);
            write_csv(&mut w, &header, alpha, &rows)?;
            w.flush()?;
        }
        None => write_csv(io::stdout().lock(), &header, alpha, &rows)?,
    }
    Ok(())
}

fn selftest() -> anyhow::Result<()> {
    use lhsd::asymptotics::NegProduct;
    use lhsd::lhsd::{lhsd_transform, EtaPolicy, RawSample};
    use lhsd::rng::master_stream;
    use lhsd::vg::GammaLaw;
    use std::sync::Arc;

    let mut failures = 0;
    let mut check = |name: &str, ok: bool, detail: String| {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };

    let ind = CopulaModel::independence(2)?;
    let diag = VarianceDiagnostics::compute(&ind, Arc::new(NegProduct { dim: 2 }), 16)?;
    check(
        "limit variances under independence",
        (diag.sigma2_mc - 7.0 / 144.0).abs() < 1e-6
            && (diag.sigma2_lhsd - 1.0 / 144.0).abs() < 1e-6
            && diag.consistency_error() < 1e-4,
        format!("mc {:.8} lhsd {:.8} gap {:.8}", diag.sigma2_mc, diag.sigma2_lhsd, diag.gap),
    );

    let fgm = CopulaModel::fgm(0.5, 3)?;
    let report = fgm.check_conditions(9)?;
    check(
        "conditions for fgm 0.5",
        report.holds(),
        format!("worst violation {:.3e}", report.worst_violation),
    );

    let q = GammaLaw::new(3.7, 1.0)?.quantile(0.9)?;
    check(
        "gamma quantile",
        ((q - 6.278_922_321_022_634) / 6.278_922_321_022_634).abs() < 1e-10,
        format!("{q}"),
    );

    let mut rng = master_stream(1);
    let raw = RawSample::new(fgm.sample(200, &mut rng)?)?;
    let v = lhsd_transform(&raw, EtaPolicy::Half, &mut rng);
    let stratified = v.v.columns().into_iter().all(|col| {
        let mut cells: Vec<usize> = col.iter().map(|x| (x * 200.0) as usize).collect();
        cells.sort_unstable();
        cells.iter().enumerate().all(|(i, &c)| i == c)
    });
    check("lhsd stratification", stratified, "200 points, 3 columns".into());

    if failures > 0 {
        bail!("{failures} self-test checks failed");
    }
    Ok(())
}
