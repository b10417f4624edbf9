//! Command-line front end: scenario runs, divergence queries, cover
//! construction, and the cross-module invariant checker.
//!
//! Subcommands:
//! - `run --scenario <file> --seed <u64> --out <dir> --workers <k>`
//! - `divergence --f <spec> --g <spec> --metric aff|hell2|kl|l1`
//! - `cover --grid <spec> --delta <d> --prior <weights> [--beta <b> --n <n>]`
//! - `check [--budget small|full]`
//!
//! The seed for `run` resolves as: `--seed` flag, then the
//! `CONSISTENCY_LAB_SEED` environment variable, then the scenario file's
//! `seed` field; there is no silent clock seeding.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::densities::{
    affinity, hellinger_sq, kl_divergence, l1_distance, DensitySpec, NoiseKind,
};
use crate::entropy::{
    bracketing_entropy, build_cover, metric_entropy, w_to_ggr_sieve, walker_condition_check,
};
use crate::error::{Error, Result};
use crate::experiments::{run_scenario, write_csv, write_stat_csv, Scenario};
use crate::grammar::{parse_density, parse_grid, parse_weights};
use crate::posterior::PosteriorState;
use crate::priors::{gaussian_location_grid, DiscretizedPrior, SubsetSelector};
use crate::quad;
use crate::regression::{kakutani_product_affinity, per_index_affinity, DesignPoints};
use crate::rng::{role, stream};
use crate::separation::{
    certify_strong_separation, product_affinity, walker_decay_bound, MixingWeights,
    SimplexOptions,
};

#[derive(Debug, Parser)]
#[command(
    name = "consistency-lab",
    about = "Numerical laboratory for posterior consistency machinery",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario file: emit CSV traces and a summary report.
    Run {
        /// Path to a JSON scenario file.
        #[arg(long)]
        scenario: PathBuf,
        /// Master seed (highest precedence; falls back to the environment,
        /// then to the scenario file).
        #[arg(long, env = "CONSISTENCY_LAB_SEED")]
        seed: Option<u64>,
        /// Output directory for CSV and summary files.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker threads (0 = one per core). Results are bit-identical
        /// for any worker count.
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Evaluate a divergence between two density specifications.
    Divergence {
        /// First density, e.g. "normal(mu=0,sigma=1)".
        #[arg(long)]
        f: String,
        /// Second density.
        #[arg(long)]
        g: String,
        #[arg(long, value_enum)]
        metric: Metric,
    },
    /// Build a diameter cover of a location-grid prior and report the
    /// square-root mass sum, optionally with sieve bounds at (beta, n).
    Cover {
        /// Grid specification, e.g. "grid(lo=-3,hi=3,step=0.1,sigma=1)".
        #[arg(long)]
        grid: String,
        /// Cover diameter level.
        #[arg(long)]
        delta: f64,
        /// Prior weight recipe over the grid: "uniform" or "powerlaw(p=4)".
        #[arg(long, default_value = "uniform")]
        prior: String,
        /// Sieve growth rate (requires --n).
        #[arg(long, requires = "n")]
        beta: Option<f64>,
        /// Sieve sample size (requires --beta).
        #[arg(long, requires = "beta")]
        n: Option<usize>,
    },
    /// Run the cross-module invariant suite at a reduced budget.
    Check {
        #[arg(long, value_enum, default_value_t = Budget::Small)]
        budget: Budget,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Metric {
    /// Affinity (Bhattacharyya coefficient).
    Aff,
    /// Squared Hellinger distance, 2(1 - affinity).
    Hell2,
    /// Kullback-Leibler divergence of the second argument from the first.
    Kl,
    /// L1 distance.
    L1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Budget {
    Small,
    Full,
}

/// Execute a parsed command line; returns the process exit code
/// (0 = all assertions/invariants passed, 1 = a check failed,
/// 2 = hard error such as a parse failure).
pub fn execute(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Run {
            scenario,
            seed,
            out,
            workers,
        } => cmd_run(&scenario, seed, &out, workers),
        Command::Divergence { f, g, metric } => cmd_divergence(&f, &g, metric),
        Command::Cover {
            grid,
            delta,
            prior,
            beta,
            n,
        } => cmd_cover(&grid, delta, &prior, beta.zip(n)),
        Command::Check { budget } => cmd_check(budget),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn cmd_run(path: &PathBuf, seed: Option<u64>, out: &PathBuf, workers: usize) -> Result<i32> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidScenario(format!("cannot read {}: {e}", path.display())))?;
    let scenario = Scenario::from_json(&text)?;
    let master_seed = scenario.resolved_seed(seed)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidScenario(format!("worker pool: {e}")))?;
    let report = pool.install(|| run_scenario(&scenario, master_seed))?;

    fs::create_dir_all(out)?;
    let csv_path = out.join(format!("{}.csv", report.name));
    let mut csv = Vec::new();
    write_csv(&report.rows, &mut csv)?;
    fs::write(&csv_path, csv)?;
    println!("wrote {}", csv_path.display());
    if !report.stat_rows.is_empty() {
        let stat_path = out.join(format!("{}_stats.csv", report.name));
        let mut buf = Vec::new();
        write_stat_csv(&report.stat_rows, &mut buf)?;
        fs::write(&stat_path, buf)?;
        println!("wrote {}", stat_path.display());
    }
    let summary = report.render_summary();
    let summary_path = out.join(format!("{}_summary.txt", report.name));
    fs::write(&summary_path, format!("seed: {master_seed}\n{summary}"))?;
    println!("wrote {}", summary_path.display());
    print!("{summary}");
    Ok(if report.passed() { 0 } else { 1 })
}

fn cmd_divergence(f_text: &str, g_text: &str, metric: Metric) -> Result<i32> {
    let f = parse_density(f_text)?;
    let g = parse_density(g_text)?;
    let gaussian_pair = f.as_gaussian().is_some() && g.as_gaussian().is_some();
    let piecewise_pair = f.as_piecewise().is_some() && g.as_piecewise().is_some();
    let quad_method = format!("adaptive quadrature, abs tol {:.0e}", quad::DEFAULT_ABS_TOL);
    let (name, value, method, err_bound) = match metric {
        Metric::Aff => {
            let v = affinity(&f, &g)?;
            if gaussian_pair {
                ("aff", v, "closed form".to_string(), 0.0)
            } else {
                ("aff", v, quad_method, quad::DEFAULT_ABS_TOL)
            }
        }
        Metric::Hell2 => {
            let v = hellinger_sq(&f, &g)?;
            if gaussian_pair {
                ("hell2", v, "closed form".to_string(), 0.0)
            } else {
                ("hell2", v, quad_method, 2.0 * quad::DEFAULT_ABS_TOL)
            }
        }
        Metric::Kl => {
            let v = kl_divergence(&f, &g)?;
            if v.is_infinite() {
                ("kl", v, "support leak detected; exact".to_string(), 0.0)
            } else {
                ("kl", v, quad_method, quad::DEFAULT_ABS_TOL)
            }
        }
        Metric::L1 => {
            let v = l1_distance(&f, &g)?;
            if piecewise_pair {
                ("l1", v, "exact piecewise cell sum".to_string(), 0.0)
            } else {
                ("l1", v, quad_method, quad::DEFAULT_ABS_TOL)
            }
        }
    };
    if value.is_infinite() {
        println!("{name}({f}, {g}) = inf");
    } else {
        println!("{name}({f}, {g}) = {value:.10}");
    }
    println!("method: {method}");
    println!("error: <= {err_bound:.1e}");
    Ok(0)
}

fn cmd_cover(
    grid_text: &str,
    delta: f64,
    prior_text: &str,
    sieve_at: Option<(f64, usize)>,
) -> Result<i32> {
    let grid = parse_grid(grid_text)?;
    let weights_spec = parse_weights(prior_text)?;
    let points = gaussian_location_grid(grid.lo, grid.hi, grid.step, grid.sigma)?;
    let weights = weights_spec.weights(points.len());
    let prior = DiscretizedPrior::proper(points, weights)?;
    let cover = build_cover(&prior, delta)?.sorted_by_mass();
    let walker = walker_condition_check(&cover);
    let max_diam = cover.diameters.iter().cloned().fold(0.0, f64::max);
    println!(
        "cover of {} grid points at diameter level {delta} (weights {weights_spec})",
        prior.points().len()
    );
    println!("blocks: {}", cover.blocks.len());
    println!("max block diameter: {max_diam:.6}");
    println!(
        "sqrt-mass sum: {:.6} ({})",
        walker.sqrt_mass_sum,
        if walker.satisfied { "finite" } else { "not summable" }
    );
    if let Some((beta, n)) = sieve_at {
        let stage = w_to_ggr_sieve(&cover, beta, n)?;
        println!("sieve at beta = {beta}, n = {n}:");
        println!("  k_n = ceil(exp(n beta)) = {:.0}", stage.k_n);
        println!("  blocks kept: {}", stage.blocks_kept);
        println!("  complement mass: {:.6e}", stage.complement_mass);
        println!("  complement mass bound 2c^2/k_n: {:.6e}", stage.mass_bound);
        println!("  entropy of kept union (log block count): {:.6}", stage.entropy_bound);
    }
    Ok(0)
}

struct Invariant {
    /// `module/operation/invariant` naming, as failure diagnostics require.
    name: &'static str,
    run: Box<dyn Fn() -> Result<String>>,
}

fn invariants(budget: Budget) -> Vec<Invariant> {
    let full = budget == Budget::Full;
    let mut list = Vec::new();

    list.push(Invariant {
        name: "densities/affinity/gaussian-closed-form-vs-quadrature",
        run: Box::new(|| {
            let f0 = DensitySpec::normal(0.0, 1.0)?;
            let mut worst = 0.0_f64;
            for d in [0.0, 0.5, 1.0, 2.0, 4.0] {
                let g = DensitySpec::normal(d, 1.0)?;
                let closed = affinity(&f0, &g)?;
                let r = quad::adaptive(
                    |x| (f0.pdf_unchecked(x) * g.pdf_unchecked(x)).sqrt(),
                    -40.0,
                    40.0 + d,
                    1e-12,
                    &[0.0, d],
                );
                worst = worst.max((closed - r.value).abs());
            }
            if worst > 1e-8 {
                return Err(Error::Precondition(format!(
                    "closed form and quadrature disagree by {worst:.3e}"
                )));
            }
            Ok(format!("max |closed - quadrature| = {worst:.3e}"))
        }),
    });

    list.push(Invariant {
        name: "densities/divergences/pinsker-and-affinity-l1-chain",
        run: Box::new(|| {
            let pairs = vec![
                (DensitySpec::normal(0.0, 1.0)?, DensitySpec::normal(1.0, 1.0)?),
                (DensitySpec::normal(0.0, 1.0)?, DensitySpec::normal(0.3, 2.0)?),
                (DensitySpec::std_normal(), DensitySpec::laplace(1.0)?),
                (
                    DensitySpec::histogram(vec![0.0, 0.5, 1.0], vec![1.5, 0.5])?,
                    DensitySpec::spiked_uniform(0.2, 4.0)?,
                ),
                (
                    DensitySpec::spiked_uniform(0.2, 2.0)?,
                    DensitySpec::spiked_uniform(0.3, 8.0)?,
                ),
            ];
            for (f, g) in &pairs {
                let l1 = l1_distance(f, g)?;
                let aff = affinity(f, g)?;
                let kl = kl_divergence(f, g)?;
                let tol = 1e-8;
                if kl + tol < 0.5 * l1 * l1 {
                    return Err(Error::Precondition(format!(
                        "Pinsker violated for ({f}, {g}): kl = {kl}, l1 = {l1}"
                    )));
                }
                if 1.0 - aff > 0.5 * l1 + tol || 0.5 * l1 > (1.0 - aff * aff).sqrt() + tol {
                    return Err(Error::Precondition(format!(
                        "affinity/L1 chain violated for ({f}, {g}): aff = {aff}, l1 = {l1}"
                    )));
                }
            }
            Ok(format!("{} family pairs checked", pairs.len()))
        }),
    });

    list.push(Invariant {
        name: "posterior/update/sequential-equals-batch",
        run: Box::new(move || {
            let points = gaussian_location_grid(-2.0, 2.0, 0.5, 1.0)?;
            let k = points.len();
            let prior = DiscretizedPrior::proper(points, vec![1.0; k])?;
            let f0 = DensitySpec::normal(0.0, 1.0)?;
            let mut rng = stream(17, role::DATASET, 0);
            let xs = f0.sample_many(200, &mut rng);
            let subset = SubsetSelector::from_predicate(&prior, |p| {
                p.coord.map_or(false, |c| c.abs() >= 1.0)
            });
            let mut seq = PosteriorState::new(prior.clone());
            for &x in &xs {
                seq.update(x)?;
            }
            let mut batch = PosteriorState::new(prior);
            batch.update_batch(&crate::densities::EmpiricalSample::new(xs))?;
            let a = seq.log_posterior_mass(&subset)?;
            let b = batch.log_posterior_mass(&subset)?;
            if (a - b).abs() > 1e-10 {
                return Err(Error::Precondition(format!(
                    "sequential {a} vs batch {b}"
                )));
            }
            Ok(format!("log-mass agreement |{a:.6} - {b:.6}| <= 1e-10"))
        }),
    });

    list.push(Invariant {
        name: "posterior/posterior_mass/ratio-form-vs-plain",
        run: Box::new(|| {
            let points = gaussian_location_grid(-2.0, 2.0, 0.5, 1.0)?;
            let k = points.len();
            let prior = DiscretizedPrior::proper(points, vec![1.0; k])?;
            let f0 = DensitySpec::normal(0.0, 1.0)?;
            let mut rng = stream(18, role::DATASET, 0);
            let xs = f0.sample_many(150, &mut rng);
            let subset = SubsetSelector::from_predicate(&prior, |p| {
                p.coord.map_or(false, |c| c >= 0.5)
            });
            let all = SubsetSelector::from_predicate(&prior, |_| true);
            let mut plain = PosteriorState::new(prior.clone());
            let mut ratio = PosteriorState::new(prior).with_reference(f0);
            for &x in &xs {
                plain.update(x)?;
                ratio.update(x)?;
            }
            let a = plain.log_posterior_mass(&subset)?;
            let b = ratio.log_posterior_mass(&subset)?;
            let c = ratio.log_ratio_numerator(&subset)? - ratio.log_ratio_numerator(&all)?;
            let worst = (a - b).abs().max((a - c).abs());
            if worst > 1e-10 {
                return Err(Error::Precondition(format!(
                    "plain {a}, ratio {b}, numerator difference {c}"
                )));
            }
            Ok(format!("three formulations agree to {worst:.3e}"))
        }),
    });

    list.push(Invariant {
        name: "separation/product_affinity/certified-delta-power-bound",
        run: Box::new(move || {
            let f0 = DensitySpec::normal(0.0, 1.0)?;
            let comps = vec![
                DensitySpec::normal(2.5, 1.0)?,
                DensitySpec::normal(-2.5, 1.0)?,
            ];
            let cert = certify_strong_separation(&f0, &comps, &SimplexOptions::default())?;
            let budget = if full { 200_000 } else { 20_000 };
            let nu = MixingWeights::uniform(2);
            for n in 1..=3usize {
                let est = product_affinity(&f0, &comps, &nu, n, budget, 99, None)?;
                let bound = cert.delta.powi(n as i32) + 3.0 * est.std_error;
                if est.value > bound {
                    return Err(Error::Precondition(format!(
                        "n = {n}: estimate {} above delta^n + 3SE = {bound}",
                        est.value
                    )));
                }
            }
            Ok(format!("delta = {:.6}, power bound holds for n = 1..3", cert.delta))
        }),
    });

    list.push(Invariant {
        name: "separation/walker_decay_bound/arithmetic-oracle",
        run: Box::new(|| {
            let beta0 = 2.0_f64.ln();
            let bound = walker_decay_bound(&[0.25_f64.ln()], beta0, 100, None)?;
            let expect = 0.5_f64.ln() + 100.0 * (beta0 / 4.0 - beta0);
            if (bound.log_bound - expect).abs() > 1e-12 {
                return Err(Error::Precondition(format!(
                    "log bound {} vs direct arithmetic {expect}",
                    bound.log_bound
                )));
            }
            Ok(format!("log bound {:.6} matches direct arithmetic", bound.log_bound))
        }),
    });

    list.push(Invariant {
        name: "entropy/build_cover/partition-and-diameter-soundness",
        run: Box::new(|| {
            let points = gaussian_location_grid(-2.0, 2.0, 0.2, 1.0)?;
            let k = points.len();
            let prior = DiscretizedPrior::proper(points, vec![1.0; k])?;
            let cover = build_cover(&prior, 0.3)?;
            // Rebuilding from the returned blocks re-runs the partition and
            // diameter validation.
            let rebuilt =
                crate::entropy::CoverSieve::new(&prior, cover.blocks.clone(), cover.delta)?;
            let total: f64 = rebuilt.masses.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::Precondition(format!(
                    "block masses sum to {total}, not 1"
                )));
            }
            Ok(format!("{} blocks partition the grid, diameters < 0.3", cover.blocks.len()))
        }),
    });

    list.push(Invariant {
        name: "entropy/w_to_ggr_sieve/complement-mass-bound",
        run: Box::new(|| {
            let points = gaussian_location_grid(-3.0, 3.0, 0.2, 1.0)?;
            let k = points.len();
            let weights: Vec<f64> = (1..=k).map(|i| (i as f64).powf(-4.0)).collect();
            let prior = DiscretizedPrior::proper(points, weights)?;
            let cover = build_cover(&prior, 0.3)?.sorted_by_mass();
            for n in [20usize, 60, 120] {
                let stage = w_to_ggr_sieve(&cover, 0.05, n)?;
                if stage.complement_mass > stage.mass_bound + 1e-12 {
                    return Err(Error::Precondition(format!(
                        "n = {n}: complement mass {} above bound {}",
                        stage.complement_mass, stage.mass_bound
                    )));
                }
            }
            Ok("complement mass within 2c^2/k_n at n = 20, 60, 120".to_string())
        }),
    });

    list.push(Invariant {
        name: "entropy/bracketing/coarse-net-vs-bracket-count",
        run: Box::new(move || {
            let families = if full { 10 } else { 3 };
            let delta = 0.3;
            for fam_idx in 0..families {
                let mut rng = stream(7000, role::DATASET, fam_idx as u64);
                let family = random_histogram_family(&mut rng, 8, 6)?;
                let (h_delta, _) = bracketing_entropy(&family, delta)?;
                let (j_2delta, _) = metric_entropy(&family, 2.0 * delta)?;
                if j_2delta > h_delta + 1e-12 {
                    return Err(Error::Precondition(format!(
                        "family {fam_idx}: J(2 delta) = {j_2delta} above H(delta) = {h_delta}"
                    )));
                }
            }
            Ok(format!("J(2d) <= H(d) on {families} random histogram families"))
        }),
    });

    list.push(Invariant {
        name: "regression/per_index_affinity/laplace-closed-form",
        run: Box::new(|| {
            let mut worst = 0.0_f64;
            for (d, s) in [(0.5, 1.0), (2.0, 1.0), (1.0, 0.7)] {
                let a = per_index_affinity(d, NoiseKind::Laplace { scale: s })?;
                let z: f64 = d / (2.0 * s);
                let oracle = (-z).exp() * (1.0 + z);
                worst = worst.max((a - oracle).abs());
            }
            if worst > 1e-9 {
                return Err(Error::Precondition(format!(
                    "quadrature and closed form disagree by {worst:.3e}"
                )));
            }
            Ok(format!("max |quadrature - closed form| = {worst:.3e}"))
        }),
    });

    list.push(Invariant {
        name: "regression/kakutani_product_affinity/tail-bracket",
        run: Box::new(move || {
            let horizon = if full { 1_000_000 } else { 10_000 };
            let design = DesignPoints::PowerDecay { p: 1.0 };
            let report = kakutani_product_affinity(&design, 1.0, 0.0, &[horizon])?;
            let last = report.partials.last().unwrap().1;
            let limit = (-std::f64::consts::PI.powi(2) / 48.0).exp();
            let ok = match report.verdict {
                crate::regression::KakutaniVerdict::Equivalent { limit_lo, limit_hi } => {
                    limit_lo <= limit && limit <= limit_hi && last >= limit
                }
                _ => false,
            };
            if !ok {
                return Err(Error::Precondition(format!(
                    "verdict {:?} fails to bracket exp(-pi^2/48) = {limit:.8}",
                    report.verdict
                )));
            }
            Ok(format!(
                "partial at {horizon} = {last:.8} brackets the limit {limit:.8}"
            ))
        }),
    });

    list.push(Invariant {
        name: "rng/stream/derivation-determinism",
        run: Box::new(|| {
            let draw = |mut r: ChaCha8Rng| -> Vec<u64> {
                (0..8).map(|_| r.random::<u64>()).collect()
            };
            let a = draw(stream(5, role::REPLICATE, 0));
            let b = draw(stream(5, role::REPLICATE, 0));
            let c = draw(stream(5, role::REPLICATE, 1));
            let d = draw(stream(5, role::MC_CHUNK, 0));
            if a != b {
                return Err(Error::Precondition("same arguments, different stream".into()));
            }
            if a == c || a == d {
                return Err(Error::Precondition(
                    "distinct roles/indices produced identical streams".into(),
                ));
            }
            Ok("streams reproducible and separated across roles/indices".to_string())
        }),
    });

    list
}

fn random_histogram_family(rng: &mut ChaCha8Rng, k: usize, cells: usize) -> Result<Vec<DensitySpec>> {
    let breaks: Vec<f64> = (0..=cells).map(|i| i as f64 / cells as f64).collect();
    (0..k)
        .map(|_| {
            let raw: Vec<f64> = (0..cells).map(|_| 0.2 + 1.6 * rng.random::<f64>()).collect();
            let mean = raw.iter().sum::<f64>() / cells as f64;
            let heights: Vec<f64> = raw.iter().map(|h| h / mean).collect();
            DensitySpec::histogram(breaks.clone(), heights)
        })
        .collect()
}

fn cmd_check(budget: Budget) -> Result<i32> {
    let list = invariants(budget);
    let mut failures = 0usize;
    for inv in &list {
        let started = Instant::now();
        let outcome = (inv.run)();
        let ms = started.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("PASS {} ({ms} ms): {detail}", inv.name),
            Err(e) => {
                failures += 1;
                println!("FAIL {} ({ms} ms): {e}", inv.name);
            }
        }
    }
    println!(
        "{} of {} invariants passed",
        list.len() - failures,
        list.len()
    );
    Ok(if failures == 0 { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_budget_invariants_all_pass() {
        for inv in invariants(Budget::Small) {
            let out = (inv.run)();
            assert!(out.is_ok(), "{} failed: {:?}", inv.name, out.err());
        }
    }

    #[test]
    fn cover_command_handles_single_block() {
        // Diameter level above the family diameter: one block.
        let code = cmd_cover(
            "grid(lo=-0.2,hi=0.2,step=0.1,sigma=1)",
            1.9,
            "uniform",
            None,
        )
        .unwrap();
        assert_eq!(code, 0);
    }

    #[test]
    fn divergence_command_runs() {
        assert_eq!(
            cmd_divergence("normal(mu=0,sigma=1)", "normal(mu=2,sigma=1)", Metric::Aff).unwrap(),
            0
        );
        assert_eq!(
            cmd_divergence(
                "hist(breaks=[0,0.5,1],heights=[2,0])",
                "hist(breaks=[0,0.5,1],heights=[0,2])",
                Metric::Kl
            )
            .unwrap(),
            0
        );
        assert!(cmd_divergence("normal(mu=0)", "stdnormal", Metric::L1).is_err());
    }
}
