//! Pick the dependence family from data: fit each candidate on a 70% train
//! split and rank by precision-recall area on the held-out 30%.

use biprobit::copula::{Copula, Family, Rotation};
use biprobit::datasim::{generate, DgpSpec};
use biprobit::design::{ModelSpec, Term};
use biprobit::estimate::FitOptions;
use biprobit::eval::{make_split, select_copula};
use biprobit::model::PredictionMode;

fn main() {
    let dgp = DgpSpec {
        n_rows: 4000,
        beta1_true: vec![-0.2, 0.5, -0.4],
        beta2_true: vec![-0.9, 0.4, 0.3],
        gamma_true: 0.4,
        copula_true: Copula::from_natural(Family::Clayton, Rotation::R180, 2.0).unwrap(),
        instrument_strength: 0.8,
        confounder_strength: 1.0,
        nonlinear_amplitude: 0.0,
        seed: 12,
    };
    let (table, truth) = generate(&dgp).expect("simulation");
    println!("data generated under copula {} (theta = {})", truth.copula_code, truth.theta_true);

    let spec = ModelSpec::from_terms(
        "treat",
        "event",
        &[
            Term::Linear("c1".into()),
            Term::Linear("c2".into()),
            Term::Linear("z1".into()),
            Term::Linear("z2".into()),
        ],
        &[Term::Linear("c1".into()), Term::Linear("c2".into())],
        &["z1".into(), "z2".into()],
        Copula::new(Family::Gaussian, Rotation::R0, 0.0).unwrap(),
    )
    .unwrap();

    let candidates: Vec<String> =
        ["N", "C0", "C180", "G0", "G180", "J180", "F", "PL", "FGM"]
            .iter()
            .map(|s| s.to_string())
            .collect();
    let split = make_split(table.n_rows(), 17, 0.70).expect("split");
    println!(
        "candidates: {}; split: {} train / {} test rows",
        candidates.join(" "),
        split.train.len(),
        split.test.len()
    );

    let report = select_copula(
        &table,
        &spec,
        &candidates,
        &split,
        &FitOptions::default(),
        PredictionMode::Conditional,
    )
    .expect("selection");

    println!();
    println!("{:<6} {:>6} {:>10} {:>9} {:>11}", "rank", "code", "pr-auc", "theta", "converged");
    println!("{}", "-".repeat(46));
    for (i, row) in report.rows.iter().enumerate() {
        println!(
            "{:<6} {:>6} {:>10} {:>9} {:>11}",
            i + 1,
            row.code,
            row.pr_auc.map(|a| format!("{a:.4}")).unwrap_or_else(|| "-".into()),
            row.theta.map(|t| format!("{t:.3}")).unwrap_or_else(|| "-".into()),
            row.converged,
        );
    }
    println!();
    println!("selected: {} (truth was {})", report.winner, truth.copula_code);
    println!(
        "Out-of-sample discrimination differences across copulas are small by\n\
         nature -- every spec shares the same regression structure -- so the\n\
         ranking, not the absolute spread, carries the signal."
    );
}
