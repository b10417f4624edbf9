//! Formal posteriors from an improper (non-normalizable) flat prior on a
//! location grid.
//!
//! With no data the formal evidence diverges — mass keeps arriving as the
//! grid extends — and the laboratory refuses to normalize. Once data
//! arrive, the evidence stabilizes under grid doubling and the posterior
//! concentrates a small window around the truth, even though the prior
//! itself has no total mass.

use consistency_lab::densities::{DensitySpec, EmpiricalSample};
use consistency_lab::posterior::{formal_posterior, FormalPosterior};
use consistency_lab::priors::{LocationGridPrior, SubsetSelector};
use consistency_lab::rng::{role, stream};

fn main() {
    let grid = LocationGridPrior::new(-30.0, 30.0, 0.02, 1.0).unwrap();
    let f0 = DensitySpec::normal(0.0, 1.0).unwrap();
    let mut rng = stream(2026, role::REPLICATE, 0);
    let xs = f0.sample_many(500, &mut rng);

    println!("flat improper prior on a location grid [-30, 30], truth theta = 0\n");
    println!(
        "{:>5} {:>12} {:>22} {:>16}",
        "n", "verdict", "evidence drift (log)", "mass(|t|<=0.2)"
    );
    for n in [0usize, 10, 100, 500] {
        let sample = EmpiricalSample::new(xs[..n].to_vec());
        match formal_posterior(&grid, &sample).unwrap() {
            FormalPosterior::Divergent {
                log_evidence_base,
                log_evidence_extended,
            } => {
                println!(
                    "{n:>5} {:>12} {:>22.6} {:>16}",
                    "divergent",
                    log_evidence_extended - log_evidence_base,
                    "-"
                );
            }
            FormalPosterior::Proper {
                state,
                log_evidence_base,
                log_evidence_extended,
            } => {
                let window = SubsetSelector::from_predicate(state.prior(), |p| {
                    p.coord.map_or(false, |c| c.abs() <= 0.2)
                });
                let mass = state.posterior_mass(&window).unwrap();
                println!(
                    "{n:>5} {:>12} {:>22.6} {mass:>16.6}",
                    "proper",
                    log_evidence_extended - log_evidence_base
                );
            }
        }
    }
    println!("\nthe empty sample diverges (evidence drift ~ ln 2 from doubling the span);");
    println!("every nonempty sample normalizes and concentrates near the truth");
}
