//! Self-checks behind the `verify` subcommand.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use irmwpm::graph::{build_pair, DecodingGraph, MatchingClass, Weighting};
use irmwpm::noise::{enumerate_single_faults, sample_faults, simulate};
use irmwpm::{CodeLayout, Lattice, NoiseParams, Rational, Result, SeCircuit};

/// Expected first-order probability (in units of p) where known, and the
/// conditional probabilities of every correlated dual edge, per class of a
/// bulk edge.
fn reference() -> Vec<(MatchingClass, Option<Rational>, Vec<Rational>)> {
    use MatchingClass::*;
    let r = Rational::new;
    vec![
        (A, Some(r(31, 15)), vec![r(1, 31), r(1, 31), r(3, 31), r(3, 31), r(2, 31)]),
        (B, None, vec![r(1, 2)]),
        (C, None, vec![r(3, 16), r(3, 16), r(1, 8), r(1, 16), r(1, 16)]),
        (
            D,
            Some(r(42, 15)),
            vec![r(1, 21), r(1, 21), r(1, 42), r(1, 42), r(1, 42), r(1, 42), r(1, 14), r(1, 14), r(1, 14), r(1, 14), r(3, 14)],
        ),
        (E, None, vec![r(1, 8), r(1, 8), r(1, 8), r(1, 8), r(1, 4)]),
        (F, None, vec![r(1, 4), r(1, 8), r(1, 8), r(1, 8), r(1, 8)]),
    ]
}

/// Number of reference entries reproduced on every bulk edge of both lattices.
pub fn conditionals(distance: usize) -> Result<(usize, usize)> {
    let layout = CodeLayout::new(distance)?;
    let circuit = SeCircuit::new(&layout);
    let en = enumerate_single_faults(&layout, &circuit, distance, true, true)?;
    let (gx, gz) = build_pair::<f64>(&layout, &en, Weighting::Unit)?;
    let (mut matched, mut total) = (0, 0);
    for (class, coefficient, mut expected) in reference() {
        expected.sort();
        total += expected.len();
        let ok = [&gx, &gz].iter().all(|g| class_matches(g, distance, class, coefficient, &expected));
        if ok {
            matched += expected.len();
        } else {
            eprintln!("class {}: mismatch", class.letter());
        }
    }
    Ok((matched, total))
}

fn class_matches(
    g: &DecodingGraph<f64>,
    distance: usize,
    class: MatchingClass,
    coefficient: Option<Rational>,
    expected: &[Rational],
) -> bool {
    let bulk: Vec<usize> = (0..g.edges.len())
        .filter(|&e| g.edges[e].label.class() == Some(class) && g.is_bulk_edge(e, distance))
        .collect();
    !bulk.is_empty()
        && bulk.iter().all(|&e| {
            let mut got: Vec<Rational> = g.correlations[e].iter().map(|c| c.conditional).collect();
            got.sort();
            got == expected && coefficient.is_none_or(|c| g.edges[e].coefficient == c)
        })
}

/// Fault-free extraction after random faults reproduces the ideal syndrome.
fn perfect_round(trials: usize) -> Result<usize> {
    let layout = CodeLayout::new(4)?;
    let circuit = SeCircuit::new(&layout);
    let params = NoiseParams::new(0.02, true)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut ok = 0;
    for _ in 0..trials {
        let faults = sample_faults(&circuit, &params, 3, &mut rng);
        let h = simulate(&layout, &circuit, &faults, 3, true)?;
        ok += usize::from(h.measurements.last() == Some(&layout.ideal_syndrome(&h.residual)?));
    }
    Ok(ok)
}

/// Enumerated single-fault effects compose linearly into simulated runs.
fn linearity(trials: usize) -> Result<usize> {
    let layout = CodeLayout::new(3)?;
    let circuit = SeCircuit::new(&layout);
    let en = enumerate_single_faults(&layout, &circuit, 3, true, true)?;
    let params = NoiseParams::new(0.02, true)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut ok = 0;
    for _ in 0..trials {
        let faults = sample_faults(&circuit, &params, 3, &mut rng);
        let h = simulate(&layout, &circuit, &faults, 3, true)?;
        let c = en.combine(&faults)?;
        ok += usize::from(c.residual == h.residual && Lattice::BOTH.iter().all(|&l| c.events(l) == h.events(l)));
    }
    Ok(ok)
}

pub fn run() -> Result<bool> {
    let (matched, total) = conditionals(7)?;
    println!("{matched}/{total} conditionals matched");
    let trials = 1000;
    let perfect = perfect_round(trials)?;
    println!("{perfect}/{trials} perfect rounds matched the ideal syndrome");
    let linear = linearity(trials)?;
    println!("{linear}/{trials} fault sets matched their enumerated sum");
    Ok(matched == total && perfect == trials && linear == trials)
}
