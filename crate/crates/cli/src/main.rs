//! `gsee` — drive spectral-CDF ground-state energy experiments from a
//! config file and emit reproducible CSV/JSON artifacts.
//!
//! Exit codes: 0 success, 2 config error, 3 numeric/domain error,
//! 4 detection-not-found.

use clap::{Args, Parser, Subcommand};
use gsee_core::experiment::{
    run_experiment, write_artifacts, DetectionOutcome, ExperimentConfig,
};
use gsee_core::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gsee", version, about = "Ground-state energy estimation via the spectral CDF")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Experiment config (key=value sections or JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the sampling root seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default `out`).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the backend (`exact` or `trotter`).
    #[arg(long)]
    backend: Option<String>,
    /// Suppress the summary lines.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: build, sample, detect, refine, estimate.
    Run(CommonArgs),
    /// Build the Hamiltonian and write its text serialization.
    Ham(CommonArgs),
    /// Prepare the initial state and write the binary state file.
    State(CommonArgs),
    /// Exact spectral CDF on the grid (requires the exact backend).
    ExactCdf(CommonArgs),
    /// Fourier moments CSV.
    Moments(CommonArgs),
    /// Repetition curves and the aggregated ACDF.
    Acdf(CommonArgs),
    /// Detection only (runs the pipeline, writes detection.json).
    Detect(CommonArgs),
    /// Closed-form resource estimate and the resolvable-eta sweep.
    Resources(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, action): (&CommonArgs, fn(&ExperimentConfig, &CommonArgs) -> Result<(), Error>) =
        match &cli.command {
            Command::Run(c) => (c, cmd_run),
            Command::Ham(c) => (c, cmd_ham),
            Command::State(c) => (c, cmd_state),
            Command::ExactCdf(c) => (c, cmd_exact_cdf),
            Command::Moments(c) => (c, cmd_moments),
            Command::Acdf(c) => (c, cmd_acdf),
            Command::Detect(c) => (c, cmd_detect),
            Command::Resources(c) => (c, cmd_resources),
        };

    let config = match load_config(common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };

    match action(&config, common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Detection(msg)) => {
            eprintln!("not detected: {msg}");
            ExitCode::from(4)
        }
        Err(Error::Parse(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

fn load_config(common: &CommonArgs) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| Error::Parse(format!("{}: {e}", common.config.display())))?;
    let mut config = ExperimentConfig::from_text(&text)?;
    if let Some(seed) = common.seed {
        config.sampling.seed = seed;
    }
    if let Some(backend) = &common.backend {
        config.backend.kind = backend.clone();
        config.validate()?;
    }
    Ok(config)
}

fn cmd_run(config: &ExperimentConfig, common: &CommonArgs) -> Result<(), Error> {
    let art = run_experiment(config)?;
    write_artifacts(&art, &common.out)?;
    if !common.quiet {
        println!("config {}", art.config_hash);
        println!("tau {}  delta {}", art.hamiltonian.tau, art.delta);
        match &art.detection {
            DetectionOutcome::Found(r) => {
                println!(
                    "refined energy {} (breakpoint x {})",
                    r.refined_energy, r.inflection_x
                );
            }
            DetectionOutcome::NotDetected => println!("no jump detected"),
        }
    }
    if matches!(art.detection, DetectionOutcome::NotDetected) {
        return Err(Error::Detection("variance scan found no qualifying window".into()));
    }
    Ok(())
}

fn cmd_ham(config: &ExperimentConfig, common: &CommonArgs) -> Result<(), Error> {
    let art = run_build_only(config)?;
    std::fs::create_dir_all(&common.out)?;
    let path = common.out.join("hamiltonian.txt");
    std::fs::write(&path, art.to_text())?;
    if !common.quiet {
        println!(
            "n_sites {}  terms {}  tau {}  norm_bound {}",
            art.n_sites,
            art.terms.len(),
            art.tau,
            art.norm_bound
        );
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run_build_only(config: &ExperimentConfig) -> Result<gsee_core::Hamiltonian, Error> {
    use gsee_core::hamiltonian::{build_heisenberg_full, build_xxz_chain, normalize_with, NormBound};
    let hs = &config.hamiltonian;
    let base = match hs.model.as_str() {
        "heisenberg" => build_heisenberg_full(hs.n, hs.seed)?,
        "xxz" => build_xxz_chain(hs.n, hs.jx, hs.jz, hs.periodic)?,
        other => return Err(Error::Parse(format!("unknown model '{other}'"))),
    };
    let kind = match hs.norm.as_deref() {
        None | Some("one-norm") => NormBound::OneNorm,
        Some("spectral") => NormBound::Spectral,
        Some(other) => return Err(Error::Parse(format!("unknown norm '{other}'"))),
    };
    normalize_with(&base, hs.margin, kind)
}

fn cmd_state(config: &ExperimentConfig, common: &CommonArgs) -> Result<(), Error> {
    use gsee_core::evolution::diagonalize;
    use gsee_core::states::{random_state, sparsify, state_with_overlaps};
    let h = run_build_only(config)?;
    let ss = &config.state;
    let mut psi = match ss.kind.as_str() {
        "random" => random_state(h.n_sites, ss.seed)?,
        "overlaps" => {
            let ed = diagonalize(&h)?;
            state_with_overlaps(&ed, &ss.overlaps, ss.seed)?
        }
        "file" => {
            let path = ss
                .path
                .as_ref()
                .ok_or_else(|| Error::Parse("state.kind=file requires state.path".into()))?;
            gsee_core::StateVector::read_binary_file(Path::new(path))?
        }
        other => return Err(Error::Parse(format!("unknown state kind '{other}'"))),
    };
    if let Some(s) = ss.sparsify {
        psi = sparsify(&psi, s)?;
    }
    std::fs::create_dir_all(&common.out)?;
    let path = common.out.join("state.bin");
    psi.write_binary_file(&path)?;
    if !common.quiet {
        println!("n_sites {}  norm {}", psi.n_sites(), psi.norm());
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_exact_cdf(config: &ExperimentConfig, common: &CommonArgs) -> Result<(), Error> {
    use gsee_core::evolution::{diagonalize, exact_cdf, spectral_measure};
    use gsee_core::states::{random_state, sparsify, state_with_overlaps};
    let h = run_build_only(config)?;
    let ed = diagonalize(&h)?;
    let ss = &config.state;
    let mut psi = match ss.kind.as_str() {
        "random" => random_state(h.n_sites, ss.seed)?,
        "overlaps" => state_with_overlaps(&ed, &ss.overlaps, ss.seed)?,
        "file" => {
            let path = ss
                .path
                .as_ref()
                .ok_or_else(|| Error::Parse("state.kind=file requires state.path".into()))?;
            gsee_core::StateVector::read_binary_file(Path::new(path))?
        }
        other => return Err(Error::Parse(format!("unknown state kind '{other}'"))),
    };
    if let Some(s) = ss.sparsify {
        psi = sparsify(&psi, s)?;
    }
    let measure = spectral_measure(&ed, &psi)?;
    let delta = h.tau * config.filter.epsilon;
    let grid = gsee_core::acdf::default_grid(delta);
    std::fs::create_dir_all(&common.out)?;
    let path = common.out.join("exact_cdf.csv");
    let mut buf = String::from("x,c\n");
    for &x in &grid {
        buf.push_str(&format!("{},{}\n", x, exact_cdf(&measure, x)));
    }
    std::fs::write(&path, buf)?;
    if !common.quiet {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_moments(config: &ExperimentConfig, common: &CommonArgs) -> Result<(), Error> {
    let art = run_experiment(config)?;
    std::fs::create_dir_all(&common.out)?;
    let path = common.out.join("moments.csv");
    let mut buf = Vec::new();
    let r = match config.backend.kind.as_str() {
        "trotter" => config.backend.r_per_unit as u64,
        _ => 0,
    };
    gsee_core::evolution::write_moments_csv(&mut buf, &art.moments, &config.backend.kind, r)?;
    std::fs::write(&path, buf)?;
    if !common.quiet {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_acdf(config: &ExperimentConfig, common: &CommonArgs) -> Result<(), Error> {
    let art = run_experiment(config)?;
    write_artifacts(&art, &common.out)?;
    if !common.quiet {
        println!(
            "wrote {} repetition curves and the aggregate to {}",
            art.rep_curves.len(),
            common.out.display()
        );
    }
    Ok(())
}

fn cmd_detect(config: &ExperimentConfig, common: &CommonArgs) -> Result<(), Error> {
    let art = run_experiment(config)?;
    std::fs::create_dir_all(&common.out)?;
    let payload = serde_json::json!({
        "config_hash": art.config_hash,
        "root_seed": art.root_seed,
        "result": art.detection,
    });
    let path = common.out.join("detection.json");
    std::fs::write(&path, serde_json::to_string_pretty(&payload).unwrap() + "\n")?;
    if !common.quiet {
        match &art.detection {
            DetectionOutcome::Found(r) => println!("refined energy {}", r.refined_energy),
            DetectionOutcome::NotDetected => println!("no jump detected"),
        }
    }
    if matches!(art.detection, DetectionOutcome::NotDetected) {
        return Err(Error::Detection("variance scan found no qualifying window".into()));
    }
    Ok(())
}

fn cmd_resources(config: &ExperimentConfig, common: &CommonArgs) -> Result<(), Error> {
    let h = run_build_only(config)?;
    let epsilon = config.filter.epsilon;
    let eta = config
        .resources
        .eta
        .or(config.detection.eta)
        .unwrap_or(4.0 * epsilon);
    let est = gsee_core::resources::estimate(
        epsilon,
        eta,
        config.resources.vartheta,
        h.tau,
        config.resources.prefactor,
        config.resources.order,
        h.n_sites as u64,
    )?;
    std::fs::create_dir_all(&common.out)?;
    let payload = serde_json::json!({
        "config_hash": config.hash(),
        "root_seed": config.sampling.seed,
        "estimate": est,
    });
    std::fs::write(
        common.out.join("resources.json"),
        serde_json::to_string_pretty(&payload).unwrap() + "\n",
    )?;
    // Fig-3-style sweep: resolvable eta over a sample-count grid
    let ms: Vec<u64> = (2..=12).map(|e| 10u64.pow(e)).collect();
    let mut buf = Vec::new();
    gsee_core::resources::write_eta_sweep_csv(&mut buf, &ms, est.d, epsilon, h.tau, config.resources.vartheta)?;
    std::fs::write(common.out.join("eta_sweep.csv"), buf)?;
    if !common.quiet {
        println!(
            "D {}  M {}  r {}  depth {}  t_max {}",
            est.d, est.m, est.r, est.depth, est.t_max
        );
    }
    Ok(())
}
