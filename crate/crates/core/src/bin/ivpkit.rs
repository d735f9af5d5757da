use std::io;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use ivpkit::harness::{
    run, write_report, Config, IntegratorKind, JvKind, LinsolKind, Method, NlsKind, Problem,
    StatsFormat,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OnOff {
    On,
    Off,
}

/// Integrates the heat or Brusselator test problem and prints run statistics.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    #[arg(long, value_enum, default_value = "heat2d")]
    problem: Problem,
    #[arg(long, value_enum)]
    integrator: Option<IntegratorKind>,
    /// Defaults to bdf for lmm; for ark, dirk on heat2d and imex on bruss1d.
    #[arg(long, value_enum)]
    method: Option<Method>,
    #[arg(long, value_enum)]
    nls: Option<NlsKind>,
    #[arg(long, value_enum)]
    linsol: Option<LinsolKind>,
    #[arg(long, value_enum)]
    jv: Option<JvKind>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    /// Subvectors of the Brusselator state.
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    #[arg(long)]
    tf: Option<f64>,
    /// Krylov subspace size (GMRES) or iteration limit (CG).
    #[arg(long)]
    maxl: Option<usize>,
    #[arg(long, value_enum, default_value = "on")]
    fused: OnOff,
    #[arg(long, value_enum, default_value = "table")]
    stats: StatsFormat,
    /// Recorded in the configuration; runs are deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Prints the resolved configuration without integrating.
    #[arg(long)]
    dry_run: bool,
}

impl Cli {
    fn config(&self) -> Config {
        let d = Config::defaults(self.problem);
        let integrator = self.integrator.unwrap_or(d.integrator);
        let method = self.method.unwrap_or(match (integrator, self.problem) {
            (IntegratorKind::Lmm, _) => Method::Bdf,
            (IntegratorKind::Ark, Problem::Heat2d) => Method::Dirk,
            (IntegratorKind::Ark, Problem::Bruss1d) => Method::Imex,
        });
        Config {
            integrator,
            method,
            nls: self.nls.unwrap_or(d.nls),
            linsol: self.linsol.unwrap_or(d.linsol),
            jv: self.jv.unwrap_or(d.jv),
            nx: self.nx.unwrap_or(d.nx),
            ny: self.ny.unwrap_or(d.ny),
            blocks: self.blocks.unwrap_or(d.blocks),
            rtol: self.rtol.unwrap_or(d.rtol),
            atol: self.atol.unwrap_or(d.atol),
            tf: self.tf.unwrap_or(d.tf),
            maxl: self.maxl.unwrap_or(d.maxl),
            fused: self.fused == OnOff::On,
            seed: self.seed,
            ..d
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = cli.config();
    if let Err(e) = cfg.validate() {
        eprintln!("{e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    if cli.dry_run {
        println!("{cfg}");
        println!("steps       0 (dry run)");
        return ExitCode::SUCCESS;
    }
    let result =
        run(&cfg).and_then(|out| write_report(&mut io::stdout(), &cfg, &out.report, cli.stats));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
