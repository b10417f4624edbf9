//! The Kakutani dichotomy for Gaussian regression designs.
//!
//! Two slope candidates beta1, beta2 induce joint laws on Y_1, Y_2, ...
//! whose product affinity is prod_i exp(-(dbeta x_i)^2 / 8). Whether the
//! laws merge or separate is decided entirely by sum x_i^2:
//!
//!   - summable designs (x_i = 1/i): the affinity has a positive limit,
//!     the laws are equivalent, and no amount of data identifies the slope;
//!   - non-summable designs (x_i = i^{-1/4}, or any periodic nonzero
//!     design): the affinity vanishes and the laws are mutually singular.

use consistency_lab::regression::{kakutani_product_affinity, DesignPoints, KakutaniVerdict};

fn main() {
    let checkpoints = [1usize, 10, 100, 1_000, 10_000, 100_000, 1_000_000];
    let designs: Vec<(&str, DesignPoints)> = vec![
        ("x_i = 1/i       ", DesignPoints::PowerDecay { p: 1.0 }),
        ("x_i = i^(-1/4)  ", DesignPoints::PowerDecay { p: 0.25 }),
        ("x_i = 1 (const) ", DesignPoints::Periodic(vec![1.0])),
    ];

    println!("partial product affinities for beta1 = 1, beta2 = 0:\n");
    print!("{:<18}", "design");
    for cp in checkpoints {
        print!(" {cp:>9}");
    }
    println!("  verdict");
    for (label, design) in &designs {
        let report = kakutani_product_affinity(design, 1.0, 0.0, &checkpoints).unwrap();
        print!("{label:<18}");
        for (_, a) in &report.partials {
            print!(" {a:>9.3e}");
        }
        match report.verdict {
            KakutaniVerdict::Equivalent { limit_lo, limit_hi } => {
                println!("  equivalent, limit in [{limit_lo:.8}, {limit_hi:.8}]")
            }
            KakutaniVerdict::Orthogonal => println!("  orthogonal"),
            KakutaniVerdict::Undetermined => println!("  undetermined"),
        }
    }

    let limit = (-std::f64::consts::PI.powi(2) / 48.0).exp();
    println!("\nanalytic limit for x_i = 1/i: exp(-pi^2/48) = {limit:.8}");
    println!("(sum 1/i^2 = pi^2/6, so the product affinity converges to exp(-pi^2/48))");
}
