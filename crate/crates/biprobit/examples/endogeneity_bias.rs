//! Why joint estimation matters: when unobservables drive both treatment and
//! outcome, a single-equation model invents a treatment effect that is not
//! there. The joint model absorbs the confounding through the error copula.

use biprobit::copula::{Copula, Family, Rotation};
use biprobit::datasim::{generate, DgpSpec};
use biprobit::design::{ModelSpec, Term};
use biprobit::estimate::{fit, fit_baseline, FitOptions};

fn main() {
    // True treatment effect is exactly zero, but the latent errors of the
    // two equations share strong lower-tail dependence (Gumbel rotated 180).
    let dgp = DgpSpec {
        n_rows: 6000,
        beta1_true: vec![-0.2, 0.5, -0.4],
        beta2_true: vec![-0.9, 0.4, 0.3],
        gamma_true: 0.0,
        copula_true: Copula::from_natural(Family::Gumbel, Rotation::R180, 2.0).unwrap(),
        instrument_strength: 0.8,
        confounder_strength: 1.0,
        nonlinear_amplitude: 0.0,
        seed: 3,
    };
    let (table, truth) = generate(&dgp).expect("simulation");
    println!("true gamma = {}, true ATE = {}", truth.gamma_true, truth.true_ate);

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
        Copula::new(Family::Gumbel, Rotation::R180, 0.0).unwrap(),
    )
    .unwrap();

    let naive = fit_baseline(&table, &spec, &FitOptions::default()).expect("baseline fit");
    let joint = fit(&table, &spec, &FitOptions::default()).expect("joint fit");

    println!();
    println!(
        "single-equation baseline:  gamma = {:+.3}  z = {:+.2}   <- spurious effect",
        naive.gamma().unwrap(),
        naive.gamma_z().unwrap()
    );
    println!(
        "joint model with copula:   gamma = {:+.3}  z = {:+.2}   <- no effect, correctly",
        joint.gamma().unwrap(),
        joint.gamma_z().unwrap()
    );
    println!(
        "dependence recovered:      theta = {:.3} (truth 2.0), fit converged: {}",
        joint.theta().unwrap(),
        joint.converged
    );
    println!();
    println!(
        "The baseline misreads shared unobservables as causation; the joint model\n\
         routes that association through the copula and frees the treatment\n\
         coefficient to be what it actually is."
    );
}
