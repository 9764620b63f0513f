//! Acceptance criteria, one test per criterion. Each prints an
//! `ACCEPTANCE n: PASS/FAIL` line (visible with `--nocapture`) and asserts.
//!
//! Run in order with:
//!   cargo test --test acceptance -- --test-threads=1 --nocapture

use finsler::geom;
use finsler::metric::builtin;
use finsler::verify::{run_scenario, VerificationReport};
use finsler::volume::VolumeSpec;

fn criterion(n: u32, pass: bool, detail: &str) {
    println!("ACCEPTANCE {n}: {}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "acceptance criterion {n} failed: {detail}");
}

fn detail(rep: &VerificationReport) -> String {
    format!("{}: {:?}", rep.scenario, rep.checks)
}

#[test]
fn acceptance_01_funk_s_curvature() {
    let rep = run_scenario("funk-s-curvature", 42, Some(100), None).unwrap();
    let pass = rep.pass() && rep.elapsed_ms <= 10_000;
    criterion(1, pass, &detail(&rep));
}

#[test]
fn acceptance_02_funk_weighted_inequality() {
    let rep = run_scenario("funk-inequality", 42, Some(100), None).unwrap();
    let pass = rep.pass() && rep.elapsed_ms <= 10_000;
    criterion(2, pass, &detail(&rep));
}

#[test]
fn acceptance_03_randers_oracle() {
    let rep = run_scenario("randers-oracle", 7, Some(50), None).unwrap();
    let pass = rep.pass() && rep.elapsed_ms <= 60_000;
    criterion(3, pass, &detail(&rep));
}

#[test]
fn acceptance_04_kropina_oracle() {
    let rep = run_scenario("kropina-oracle", 7, Some(50), None).unwrap();
    let pass = rep.pass() && rep.elapsed_ms <= 60_000;
    criterion(4, pass, &detail(&rep));
}

#[test]
fn acceptance_05_volume_closed_forms() {
    let rep = run_scenario("volume-closed-vs-quadrature", 1, Some(3), None).unwrap();
    criterion(5, rep.pass(), &detail(&rep));
}

#[test]
fn acceptance_06_randers_flatness_checker() {
    let pos = run_scenario("thm12-positive", 1, Some(20), None).unwrap();
    let neg = run_scenario("thm12-negative", 1, Some(20), None).unwrap();
    let pass = pos.pass() && neg.pass();
    criterion(6, pass, &format!("{}; {}", detail(&pos), detail(&neg)));
}

#[test]
fn acceptance_07_kropina_flatness_checker() {
    let pos = run_scenario("thm13-positive", 1, Some(12), None).unwrap();
    let neg = run_scenario("thm13-negative", 1, Some(20), None).unwrap();
    let pass = pos.pass() && neg.pass();
    criterion(7, pass, &format!("{}; {}", detail(&pos), detail(&neg)));
}

#[test]
fn acceptance_08_example_regressions() {
    let quartic = run_scenario("example1-quartic", 1, Some(50), None).unwrap();
    let baoshen = run_scenario("example3-baoshen", 1, Some(50), None).unwrap();
    let cs = run_scenario("example4-cs", 1, Some(50), None).unwrap();
    let pass = quartic.pass() && baoshen.pass() && cs.pass();
    criterion(
        8,
        pass,
        &format!("{}; {}; {}", detail(&quartic), detail(&baoshen), detail(&cs)),
    );
}

#[test]
fn acceptance_09_projective_identity_and_reconstruction() {
    let r1 = run_scenario("projflat-ricci", 1, Some(50), None).unwrap();
    let t1 = run_scenario("reconstruct-T1", 1, Some(200), None).unwrap();
    let pass = r1.pass() && t1.pass();
    criterion(9, pass, &format!("{}; {}", detail(&r1), detail(&t1)));
}

#[test]
fn acceptance_10_jet_audit() {
    let rep = run_scenario("jet-vs-fd", 1, Some(1), None).unwrap();
    criterion(10, rep.pass(), &detail(&rep));
}

/// Companion shadow check: when the weighted factor 𝕊 vanishes identically
/// (the metric's own density is the reference and S ≡ 0), the weighted
/// curvature collapses to the plain Ricci curvature.
#[test]
fn trivial_direction_shadow() {
    let mut max_gap = 0.0f64;
    for name in ["klein2", "round3", "baoshen3", "quartic2"] {
        let m = builtin(name).unwrap();
        let vol = VolumeSpec::preferred(&m);
        let pts: &[(f64, f64, f64)] = &[(0.15, -0.2, 0.3), (0.05, 0.25, -0.1)];
        for &(a, b, c) in pts {
            let (x, y): (Vec<f64>, Vec<f64>) = if m.dim() == 2 {
                (vec![a, b], vec![1.0, c])
            } else {
                (vec![a, b, c], vec![1.0, c, a])
            };
            let bundle = geom::curvature_bundle(&m, &vol, &vol, &x, &y).unwrap();
            assert!(
                bundle.s_frak.abs() <= 1e-10,
                "{name}: weighted factor should vanish, got {}",
                bundle.s_frak
            );
            max_gap = max_gap.max((bundle.wpric0 - bundle.ric).abs());
        }
    }
    let pass = max_gap <= 1e-10;
    println!(
        "ACCEPTANCE trivial-direction shadow: {}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "max |WPRic0 - Ric| = {max_gap}");
}
