//! Diameter covers, summability, sieve growth, and the two entropies.
//!
//! A location-grid prior is partitioned into blocks of Hellinger diameter
//! below delta by farthest-point traversal. The square-root mass sum over
//! blocks (the summability condition behind exponential decay) is checked,
//! then the cover is thinned into a sieve k_n = ceil(exp(n beta)) whose
//! complement mass obeys the 2c^2/k_n tail bound. Finally, coarse-net
//! metric entropy is compared against bracketing entropy on a small
//! histogram family: J(2 delta) <= H(delta).

use consistency_lab::densities::DensitySpec;
use consistency_lab::entropy::{
    bracketing_entropy, build_cover, metric_entropy, w_to_ggr_sieve, walker_condition_check,
};
use consistency_lab::priors::{gaussian_location_grid, DiscretizedPrior};

fn main() {
    // Power-law prior over a location grid.
    let points = gaussian_location_grid(-3.0, 3.0, 0.05, 1.0).unwrap();
    let weights: Vec<f64> = (0..points.len()).map(|i| ((i + 1) as f64).powi(-2)).collect();
    let prior = DiscretizedPrior::proper(points, weights).unwrap();

    let delta = 0.4;
    let cover = build_cover(&prior, delta).unwrap().sorted_by_mass();
    let walker = walker_condition_check(&cover);
    println!(
        "cover at delta = {delta}: {} blocks, max diameter {:.4}, sqrt-mass sum {:.4} (finite: {})",
        cover.blocks.len(),
        cover.diameters.iter().cloned().fold(0.0, f64::max),
        walker.sqrt_mass_sum,
        walker.satisfied
    );

    println!("\nsieve stages at beta = 0.05:");
    println!(
        "{:>5} {:>8} {:>7} {:>13} {:>13} {:>10}",
        "n", "k_n", "kept", "compl. mass", "2c^2/k_n", "entropy"
    );
    for n in [20usize, 60, 120, 200] {
        let stage = w_to_ggr_sieve(&cover, 0.05, n).unwrap();
        println!(
            "{n:>5} {:>8.0} {:>7} {:>13.4e} {:>13.4e} {:>10.3}",
            stage.k_n, stage.blocks_kept, stage.complement_mass, stage.mass_bound,
            stage.entropy_bound
        );
        assert!(stage.complement_mass <= stage.mass_bound + 1e-12);
    }

    // Bracketing entropy dominates coarse-net entropy at matched radii.
    let breaks: Vec<f64> = (0..=5).map(|i| i as f64 / 5.0).collect();
    let family: Vec<DensitySpec> = (0..8)
        .map(|j| {
            let heights: Vec<f64> = (0..5)
                .map(|c| 0.4 + 1.2 * (((j * 5 + c) as f64 * 2.399).sin().abs()))
                .collect();
            let mean = heights.iter().sum::<f64>() / 5.0;
            DensitySpec::histogram(breaks.clone(), heights.iter().map(|h| h / mean).collect())
                .unwrap()
        })
        .collect();
    let d = 0.3;
    let (h, brackets) = bracketing_entropy(&family, d).unwrap();
    let (j, net) = metric_entropy(&family, 2.0 * d).unwrap();
    println!(
        "\nhistogram family of {}: H_[](0.3) = ln {} = {h:.4}, J(0.6) = ln {} = {j:.4}",
        family.len(),
        brackets.envelopes.len(),
        net.len()
    );
    println!("J(2 delta) <= H(delta): {}", j <= h + 1e-12);
}
