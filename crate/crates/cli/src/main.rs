//! Unified command-line entry point: matrix generation and certification,
//! defect analysis, entanglement diagnostics and Bell-inequality reports.
//! All reports are JSON with a provenance header; trajectories and samples
//! go to CSV side files.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use umat_core::numerics::ToleranceConfig;
use umat_core::{ame, bell, chm, data, defect, io as mio, CMatrix, Error};

#[derive(Parser)]
#[command(name = "umat", version, about = "structured-unitary matrix toolkit")]
struct Cli {
    /// Unitarity tolerance override (Frobenius).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for every stochastic command.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker cap for seed sweeps (informational; commands are single-run).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Directory with extra vector-set datasets.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Complex Hadamard matrices.
    #[command(subcommand)]
    Chm(ChmCmd),
    /// Restricted-defect analysis of measurement Gram matrices.
    #[command(subcommand)]
    Defect(DefectCmd),
    /// Bipartite entanglement diagnostics.
    #[command(subcommand)]
    Ame(AmeCmd),
    /// Bell-inequality excess analysis.
    #[command(subcommand)]
    Bell(BellCmd),
    /// Bundled and external dataset inventory.
    #[command(subcommand)]
    Dataset(DatasetCmd),
}

#[derive(Subcommand)]
enum ChmCmd {
    /// Search for a complex Hadamard matrix.
    Gen(ChmGen),
    /// Certify a matrix file: unimodularity, deviation, defect, invariants.
    Cert { file: PathBuf },
    /// Emit a published catalogue matrix.
    Catalogue(ChmCatalogue),
}

#[derive(Args)]
struct ChmGen {
    #[arg(long, value_parser = ["sinkhorn", "walk"])]
    method: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    /// Convergence target on the deviation Z.
    #[arg(long, default_value_t = 1e-9)]
    target: f64,
}

#[derive(Args)]
struct ChmCatalogue {
    name: String,
    #[arg(long)]
    gamma: Option<f64>,
    /// Order parameter for the Fourier entry.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Subcommand)]
enum DefectCmd {
    /// Gram-matrix report of a vector-set file.
    Gram { file: PathBuf },
    /// Restricted defect of a vector-set file.
    Delta { file: PathBuf },
    /// Restricted defect of m unbiased bases in prime dimension p.
    Mub {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        m: usize,
    },
    /// Restricted defect of the Hermitian Fourier matrix of order k².
    Etf {
        #[arg(long)]
        k: usize,
    },
    /// Restricted defect of the qutrit symmetric POVM family.
    Sic3 {
        #[arg(long)]
        gamma: f64,
    },
}

#[derive(Subcommand)]
enum AmeCmd {
    /// Entangling power and gate typicality of a matrix file.
    Epgt {
        file: PathBuf,
        #[arg(long)]
        d: usize,
    },
    /// 2-unitarity report of a matrix file.
    Verify {
        file: PathBuf,
        #[arg(long)]
        d: usize,
    },
    /// Emit the golden AME(4,6) matrix.
    Golden,
    /// Run the dynamical map from a permutation seed file (or a Haar seed).
    Run(AmeRun),
    /// Sample (e_p, g_t) over Haar-random unitaries.
    Sample {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        /// CSV output path for the samples.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args)]
struct AmeRun {
    /// Matrix file with a permutation of order d² to disturb and iterate.
    #[arg(long)]
    seed_perm: Option<PathBuf>,
    /// Local dimension for a Haar-random seed (when no file is given).
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    /// Convergence target on |1 − e_p|.
    #[arg(long, default_value_t = 1e-10)]
    target: f64,
    /// CSV output path for the (iter, e_p, g_t) trajectory.
    #[arg(long)]
    trajectory: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BellCmd {
    /// Classical (LHV) value of a real core file.
    Lhv {
        file: PathBuf,
        /// Treat the file as a full correlation matrix for this q.
        #[arg(long)]
        q: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
    },
    /// Numerical-radius, singular-value and taxicab bounds.
    Bounds { file: PathBuf },
    /// The circulant family member of order n with its values.
    Circulant {
        #[arg(long)]
        n: usize,
    },
    /// Tightness of the correlation inequality of a ±1 matrix file.
    Tight { file: PathBuf },
    /// Vectors unbiased to all rows of a ±1 matrix file.
    Unbiased { file: PathBuf },
}

#[derive(Subcommand)]
enum DatasetCmd {
    /// Names, dimensions, vector counts and checksums.
    List,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Capacity(_) => 3,
        Error::NonConvergence(_) => 5,
        Error::Io(_) | Error::Format(_) => 2,
        _ => 4,
    }
}

fn main() {
    let cli = Cli::parse();
    let t0 = Instant::now();
    let mut tol = ToleranceConfig::default();
    if let Some(t) = cli.tol {
        tol.unitarity_tol = t;
    }
    if let Err(e) = tol.validate() {
        eprintln!("error: {e}");
        std::process::exit(2);
    }
    let outcome = dispatch(&cli, &tol);
    match outcome {
        Ok((command, results)) => {
            let report = json!({
                "command": command,
                "tool_version": env!("CARGO_PKG_VERSION"),
                "seed": cli.seed,
                "tolerances": tol,
                "timing_ms": t0.elapsed().as_millis() as u64,
                "results": results,
            });
            let text = serde_json::to_string_pretty(&report).expect("report serialization");
            match &cli.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text) {
                        eprintln!("error: {e}");
                        std::process::exit(2);
                    }
                }
                None => println!("{text}"),
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}

fn matrix_json(m: &CMatrix) -> Value {
    serde_json::from_str(&mio::matrix_to_json(m)).expect("matrix json")
}

fn dispatch(cli: &Cli, tol: &ToleranceConfig) -> umat_core::Result<(String, Value)> {
    match &cli.cmd {
        Cmd::Chm(c) => chm_cmd(c, cli, tol),
        Cmd::Defect(c) => defect_cmd(c, tol),
        Cmd::Ame(c) => ame_cmd(c, cli, tol),
        Cmd::Bell(c) => bell_cmd(c),
        Cmd::Dataset(DatasetCmd::List) => {
            let rows = data::dataset_list(cli.data_dir.as_deref())?;
            Ok(("dataset list".into(), json!(rows)))
        }
    }
}

fn chm_cmd(c: &ChmCmd, cli: &Cli, tol: &ToleranceConfig) -> umat_core::Result<(String, Value)> {
    match c {
        ChmCmd::Gen(g) => {
            let run_tol = ToleranceConfig {
                convergence_tol: g.target / g.n as f64,
                ..*tol
            };
            let run = match g.method.as_str() {
                "sinkhorn" => chm::sinkhorn_chm(g.n, cli.seed, g.max_iters, &run_tol)?,
                _ => {
                    let mask = nalgebra::DMatrix::from_element(g.n - 1, g.n - 1, false);
                    let phases = nalgebra::DMatrix::from_element(g.n - 1, g.n - 1, 0.0);
                    chm::random_walk_chm(
                        g.n,
                        &mask,
                        &phases,
                        cli.seed,
                        chm::StepSchedule {
                            floor: 1e-10,
                            cooling_iters: (g.max_iters * 4) / 5,
                            ..Default::default()
                        },
                        g.max_iters,
                        &run_tol,
                    )?
                }
            };
            if !run.converged {
                return Err(Error::NonConvergence(format!(
                    "deviation {:.3e} after {} iterations",
                    run.candidate.deviation, run.iterations
                )));
            }
            Ok((
                format!("chm gen --method {} --n {}", g.method, g.n),
                json!({
                    "deviation": run.candidate.deviation,
                    "iterations": run.iterations,
                    "restarts": run.restarts,
                    "matrix": matrix_json(&run.candidate.matrix),
                }),
            ))
        }
        ChmCmd::Cert { file } => {
            let m = mio::read_matrix(file)?;
            let is_chm = chm::is_chm(&m, tol)?;
            let deviation = chm::deviation(&m);
            let (defect, haagerup, butson) = if is_chm {
                let d = chm::unitary_defect(&m, tol)?;
                let h = chm::haagerup_card(&m, tol)?;
                let b = chm::butson_fit(&m, 1 << 16, tol);
                (
                    json!({"defect": d.defect, "rank": d.rank}),
                    json!(h.cardinality),
                    json!({"is_butson": b.is_butson, "q": b.q}),
                )
            } else {
                (Value::Null, Value::Null, Value::Null)
            };
            Ok((
                format!("chm cert {}", file.display()),
                json!({
                    "order": m.nrows(),
                    "is_chm": is_chm,
                    "deviation": deviation,
                    "defect": defect,
                    "haagerup": haagerup,
                    "butson": butson,
                }),
            ))
        }
        ChmCmd::Catalogue(spec) => {
            let param = spec.gamma.or(spec.n.map(|n| n as f64));
            let entry = chm::CatalogueEntry::parse(&spec.name, param)?;
            let m = chm::catalogue(entry)?;
            Ok((
                format!("chm catalogue {}", spec.name),
                json!({
                    "order": m.nrows(),
                    "deviation": chm::deviation(&m),
                    "matrix": matrix_json(&m),
                }),
            ))
        }
    }
}

fn defect_report_json(rep: &defect::RestrictedDefectReport) -> Value {
    json!({
        "tau": rep.tau,
        "f": rep.f,
        "z": rep.z,
        "r": rep.r,
        "delta": rep.delta,
        "smallest_kept_sv": rep.smallest_kept_sv,
        "largest_dropped_sv": rep.largest_dropped_sv,
    })
}

fn defect_cmd(c: &DefectCmd, tol: &ToleranceConfig) -> umat_core::Result<(String, Value)> {
    match c {
        DefectCmd::Gram { file } => {
            let set = defect::dataset_load(file)?;
            let g = defect::gram_from_vectors(&set);
            let valid = defect::is_valid_povm_gram(&g, set.len(), set.d);
            Ok((
                format!("defect gram {}", file.display()),
                json!({
                    "n": set.len(),
                    "d": set.d,
                    "valid_povm_gram": valid,
                    "gram": matrix_json(&g.g),
                }),
            ))
        }
        DefectCmd::Delta { file } => {
            let set = defect::dataset_load(file)?;
            let rep = defect::restricted_defect_of_set(&set, tol)?;
            Ok((
                format!("defect delta {}", file.display()),
                defect_report_json(&rep),
            ))
        }
        DefectCmd::Mub { p, m } => {
            let set = defect::mub_prime_subset(*p, *m)?;
            let rep = defect::restricted_defect_of_set(&set, tol)?;
            Ok((format!("defect mub --p {p} --m {m}"), defect_report_json(&rep)))
        }
        DefectCmd::Etf { k } => {
            let f = defect::etf_hermitian_fourier(*k)?;
            let rep = defect::restricted_defect(&f, tol)?;
            Ok((format!("defect etf --k {k}"), defect_report_json(&rep)))
        }
        DefectCmd::Sic3 { gamma } => {
            let set = defect::sic_d3(*gamma);
            let rep = defect::restricted_defect_of_set(&set, tol)?;
            Ok((
                format!("defect sic3 --gamma {gamma}"),
                defect_report_json(&rep),
            ))
        }
    }
}

fn write_trajectory(path: &std::path::Path, traj: &[ame::EpGtPoint]) -> umat_core::Result<()> {
    let mut text = String::from("iter,e_p,g_t\n");
    for (i, p) in traj.iter().enumerate() {
        text.push_str(&format!("{i},{:.15e},{:.15e}\n", p.e_p, p.g_t));
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn ame_cmd(c: &AmeCmd, cli: &Cli, tol: &ToleranceConfig) -> umat_core::Result<(String, Value)> {
    match c {
        AmeCmd::Epgt { file, d } => {
            let m = mio::read_matrix(file)?;
            let b = ame::BipartiteMatrix::new(*d, m)?;
            let pt = ame::ep_gt(&b)?;
            Ok((
                format!("ame epgt {} --d {d}", file.display()),
                json!({"e_p": pt.e_p, "g_t": pt.g_t}),
            ))
        }
        AmeCmd::Verify { file, d } => {
            let m = mio::read_matrix(file)?;
            let b = ame::BipartiteMatrix::new(*d, m)?;
            let two = ame::is_two_unitary(&b, tol);
            let pt = ame::ep_gt(&b)?;
            Ok((
                format!("ame verify {} --d {d}", file.display()),
                json!({"two_unitary": two, "e_p": pt.e_p, "g_t": pt.g_t}),
            ))
        }
        AmeCmd::Golden => {
            let a = ame::golden_ame();
            Ok((
                "ame golden".into(),
                json!({
                    "d": a.d,
                    "nonzero_entries": a.m.iter().filter(|z| z.norm() > 1e-14).count(),
                    "matrix": matrix_json(&a.m),
                }),
            ))
        }
        AmeCmd::Run(r) => {
            let run_tol = ToleranceConfig {
                convergence_tol: r.target,
                ..*tol
            };
            let seed_matrix = match (&r.seed_perm, r.d) {
                (Some(file), _) => {
                    let p = ame::BipartiteMatrix::from_square(mio::read_matrix(file)?)?;
                    ame::seed_m0(&p, r.eps, cli.seed)?
                }
                (None, Some(d)) => {
                    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(
                        cli.seed,
                    );
                    ame::BipartiteMatrix::new(d, ame::haar_unitary(d * d, &mut rng))?
                }
                (None, None) => {
                    return Err(Error::Contract(
                        "ame run needs --seed-perm FILE or --d D".into(),
                    ))
                }
            };
            let rec = ame::dynamical_map_run(&seed_matrix, r.max_iters, &run_tol)?;
            if let Some(path) = &r.trajectory {
                write_trajectory(path, &rec.trajectory)?;
            }
            let last = rec.trajectory.last().copied();
            Ok((
                "ame run".into(),
                json!({
                    "outcome": rec.outcome,
                    "iterations": rec.iterations,
                    "final_e_p": last.map(|p| p.e_p),
                    "final_g_t": last.map(|p| p.g_t),
                }),
            ))
        }
        AmeCmd::Sample { d, n, csv } => {
            let pts = ame::ep_gt_sample(*d, *n, cli.seed)?;
            if let Some(path) = csv {
                write_trajectory(path, &pts)?;
            }
            let mean_ep = pts.iter().map(|p| p.e_p).sum::<f64>() / pts.len() as f64;
            let mean_gt = pts.iter().map(|p| p.g_t).sum::<f64>() / pts.len() as f64;
            Ok((
                format!("ame sample --d {d} --n {n}"),
                json!({"mean_e_p": mean_ep, "mean_g_t": mean_gt, "count": pts.len()}),
            ))
        }
    }
}

fn read_real(path: &std::path::Path) -> umat_core::Result<nalgebra::DMatrix<f64>> {
    let m = mio::read_matrix(path)?;
    let imax = m.iter().map(|z| z.im.abs()).fold(0.0f64, f64::max);
    if imax > 1e-12 {
        return Err(Error::Contract("expected a real matrix".into()));
    }
    Ok(m.map(|z| z.re))
}

fn bell_cmd(c: &BellCmd) -> umat_core::Result<(String, Value)> {
    match c {
        BellCmd::Lhv { file, q, m } => match (q, m) {
            (Some(q), Some(mm)) => {
                let mat = mio::read_matrix(file)?;
                let scen = bell::BellScenario::new(*q, *mm)?;
                let corr = bell::CorrelationMatrix::from_matrix(scen, mat)?;
                let (value, a, b) = bell::lhv_value_general(&corr)?;
                Ok((
                    format!("bell lhv {} --q {q} --m {mm}", file.display()),
                    json!({"classical": value, "witnesses": {"a": a, "b": b}}),
                ))
            }
            _ => {
                let core = read_real(file)?;
                let out = bell::lhv_value_core(&core)?;
                Ok((
                    format!("bell lhv {}", file.display()),
                    json!({"classical": out.value, "witnesses": {"x": out.assignment}}),
                ))
            }
        },
        BellCmd::Bounds { file } => {
            let m = mio::read_matrix(file)?;
            let b = bell::bounds(&m)?;
            Ok((format!("bell bounds {}", file.display()), json!(b)))
        }
        BellCmd::Circulant { n } => {
            let core = bell::circulant_bell(*n)?;
            let real = core.real()?;
            let classical = bell::lhv_value_core(&real)?.value;
            let quantum = bell::circulant_quantum_value(*n)?;
            Ok((
                format!("bell circulant --n {n}"),
                json!({
                    "classical": classical,
                    "quantum": quantum,
                    "advantage": quantum / classical,
                    "first_row": (0..*n).map(|j| real[(0, j)]).collect::<Vec<f64>>(),
                }),
            ))
        }
        BellCmd::Tight { file } => {
            let h = read_real(file)?;
            let rep = bell::tightness(&h)?;
            Ok((format!("bell tight {}", file.display()), json!(rep)))
        }
        BellCmd::Unbiased { file } => {
            let h = read_real(file)?;
            let out = bell::unbiased_vectors(&h)?;
            Ok((
                format!("bell unbiased {}", file.display()),
                json!({"count": out.len(), "witnesses": out}),
            ))
        }
    }
}
