//! Walks one probability sequence through the three layers of the crate:
//! the chain itself, the spectrum of its transition operator, and the
//! fibered-dynamics geometry behind it.
//!
//! Run with `cargo run --example tour`.

use amfc::adding_machine::{simulate, step_distribution};
use amfc::julia::{classify_connectedness, conjugacy, quasicircle_check, GreenFunction};
use amfc::probability::{ProbabilitySequence, TailRule};
use amfc::spectrum::iterate_f;
use amfc::transition::{build_truncated, classify_recurrence};
use num_complex::Complex64;

fn main() {
    let probs = ProbabilitySequence::new(
        3,
        vec![0.75, 2.0 / 3.0],
        TailRule::Constant { value: 0.75 },
    )
    .unwrap();
    println!("model: {}", probs.to_json());

    // one exact step from 98: the carry cascade can stall at three depths
    let dist = step_distribution(98, &probs);
    println!("\none step from 98:");
    for (target, p) in &dist.outcomes {
        println!("  -> {target:2}  with probability {p:.6}");
    }

    // a sampled trajectory, and the long-run class it illustrates
    let summary = simulate(0, 2_000, &probs, 7);
    let recurrence = classify_recurrence(&probs);
    println!(
        "\n2000 sampled steps from 0: final state {}, {} returns to 0 ({:?})",
        summary.final_state, summary.returns_to_start, recurrence.class
    );

    // the operator truncates self-similarly; its spectrum is probed by orbits
    let op = build_truncated(&probs, 81).unwrap();
    println!(
        "\ntruncation to 81 states: {} nonzero entries, row 0 sums to {}",
        op.entry_count(),
        op.row_sum(0)
    );
    for z in [Complex64::new(0.9, 0.1), Complex64::new(1.2, 0.4)] {
        let side = if iterate_f(z, &probs, 256).is_inside() { "inside" } else { "outside" };
        println!("  {z} lies {side} the spectrum");
    }

    // geometry of the same set, seen through the fibered dynamics
    let report = classify_connectedness(&probs, 256);
    println!("\nconnectedness: {:?} ({})", report.verdict, report.rule);

    let conj = conjugacy(&probs, 4, 1e-12).unwrap();
    println!(
        "monic conjugation: scale {:.9}, first offsets {:?}",
        conj.lambda,
        &conj.c_values[..3]
    );

    let quasi = quasicircle_check(&probs).unwrap();
    println!(
        "quasicircle criterion: {:?} (sup offset {:.4} vs threshold {:.4})",
        quasi.verdict, quasi.sup_offset_checked, quasi.threshold
    );

    let green = GreenFunction::new(&probs, 128, 1e-12).unwrap();
    for z in [Complex64::new(0.2, 0.0), Complex64::new(3.0, 0.0)] {
        println!("escape rate at {z}: {:.6}", green.eval(z));
    }
}
