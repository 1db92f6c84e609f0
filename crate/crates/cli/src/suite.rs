//! The randomized property battery behind `cofil suite`.
//!
//! Instance counts scale with `--samples`: the state battery holds
//! `samples/500` states, instrument-based properties run `samples/100`
//! trials, and the per-state oracle search uses a fixed 10 000 draws.
//! Everything derives from the master seed through fixed lanes, so a rerun
//! with the same flags reproduces the report byte for byte.

use cofil::battery::{battery, battery_state};
use cofil::exec::{map_indexed, stream_rng, Execution};
use cofil::filtration::{filtrate, max_fidelity, qubit_closed_form};
use cofil::measures::{c_m, delta_robustness, delta_robustness_bisection};
use cofil::oracle::random_search_fidelity;
use cofil::sio::{apply_instrument, random_instrument, random_tp_instrument, SioInstrument};
use cofil::states::{fidelity_with_pure, mcs, random_density, DensityMatrix};
use cofil::{Error, Tolerances};
use rand::Rng;
use serde_json::{json, Value};

use crate::report::status;
use crate::CliError;

const ORACLE_SAMPLES_PER_STATE: usize = 10_000;

struct Property {
    name: &'static str,
    trials: usize,
    violations: usize,
    worst_excess: f64,
    tolerance: f64,
}

impl Property {
    fn pass(&self) -> bool {
        self.violations == 0
    }

    fn from_excesses(name: &'static str, tolerance: f64, excesses: &[f64]) -> Self {
        let worst = excesses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Property {
            name,
            trials: excesses.len(),
            violations: excesses.iter().filter(|&&e| e > tolerance).count(),
            worst_excess: worst,
            tolerance,
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "trials": self.trials,
            "violations": self.violations,
            "worst_excess": self.worst_excess,
            "tolerance": self.tolerance,
            "pass": self.pass(),
        })
    }
}

fn max_offdiag(rho: &DensityMatrix) -> f64 {
    let d = rho.dim();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                worst = worst.max(rho.entry(i, j).norm());
            }
        }
    }
    worst
}

/// Run the battery. Returns the results object and whether every property
/// passed.
pub fn run(
    d: usize,
    seed: u64,
    samples: usize,
    tols: &Tolerances,
) -> Result<(Value, bool), CliError> {
    let n_states = (samples / 500).max(1);
    let n_instrument_trials = (samples / 100).max(1);
    let internal = |e: Error| CliError::Internal(e.to_string());

    let states = battery(d, n_states, seed);
    let closed: Vec<f64> = states
        .iter()
        .map(max_fidelity)
        .collect::<Result<_, _>>()
        .map_err(internal)?;

    let mut properties: Vec<Property> = Vec::new();

    // Fidelity bounds over the battery.
    let excesses = map_indexed(n_states, Execution::default(), |i| {
        let f = closed[i];
        (1.0 / d as f64 - f).max(f - 1.0)
    });
    properties.push(Property::from_excesses("fidelity_bounds", 1e-12, &excesses));

    // Faithfulness: measure nonnegative everywhere...
    let measures: Vec<f64> = states
        .iter()
        .map(|rho| c_m(rho))
        .collect::<Result<_, _>>()
        .map_err(internal)?;
    let excesses: Vec<f64> = measures.iter().map(|&m| -m).collect();
    properties.push(Property::from_excesses("faithfulness_nonnegative", 1e-12, &excesses));

    // ...vanishing measure only on structurally incoherent states...
    let excesses: Vec<f64> = states
        .iter()
        .zip(&measures)
        .map(|(rho, &m)| if m <= tols.measure { max_offdiag(rho) } else { 0.0 })
        .collect();
    properties.push(Property::from_excesses("faithfulness_zero_implies_incoherent", 1e-5, &excesses));

    // ...and exactly zero on explicitly diagonal states.
    let excesses = map_indexed(n_states, Execution::default(), |i| {
        let rho = cofil::battery::random_diag_state(d, seed ^ 0xD1A6 ^ (i as u64) << 8);
        c_m(&rho).expect("diagonal states are valid")
    });
    properties.push(Property::from_excesses("faithfulness_diagonal_zero", 1e-12, &excesses));

    // Monotonicity under trace-preserving channels (C2a).
    let excesses = map_indexed(n_instrument_trials, Execution::default(), |i| {
        let rho = random_density(d, d, seed ^ 0xC2A0 ^ (i as u64) << 8).expect("valid dims");
        let ins = random_tp_instrument(d, 1 + i % 4, seed ^ 0xC2A1 ^ i as u64).expect("valid");
        let (out, _) = apply_instrument(&rho, &ins).expect("channels always fire");
        c_m(&out).expect("valid") - c_m(&rho).expect("valid")
    });
    properties.push(Property::from_excesses("monotonicity_tp_channel", 1e-9, &excesses));

    // Strong monotonicity over selective outcomes (C2b), singleton split
    // plus one random coarse split.
    let excesses = map_indexed(n_instrument_trials, Execution::default(), |i| {
        let rho = random_density(d, d, seed ^ 0xC2B0 ^ (i as u64) << 8).expect("valid dims");
        let base = c_m(&rho).expect("valid");
        let ins = random_tp_instrument(d, 2 + i % 3, seed ^ 0xC2B1 ^ i as u64).expect("valid");

        let selective_sum = |groups: &[&[cofil::sio::SioKraus]]| -> f64 {
            groups
                .iter()
                .filter(|g| !g.is_empty())
                .filter_map(|g| {
                    let sub = SioInstrument::new(g.to_vec()).ok()?;
                    match apply_instrument(&rho, &sub) {
                        Ok((out, p)) if p > 1e-12 => Some(p * c_m(&out).expect("valid")),
                        _ => None,
                    }
                })
                .sum()
        };

        let singles: Vec<&[cofil::sio::SioKraus]> = ins
            .kraus()
            .chunks(1)
            .collect();
        let fine = selective_sum(&singles) - base;

        let mut rng = stream_rng(seed ^ 0xC2B2 ^ i as u64, 98);
        let cut = rng.random_range(1..ins.len());
        let (left, right) = ins.kraus().split_at(cut);
        let coarse = selective_sum(&[left, right]) - base;
        fine.max(coarse)
    });
    properties.push(Property::from_excesses("strong_monotonicity_selective", 1e-9, &excesses));

    // Convexity across arbitrary mixtures, as specified. Expected to fail:
    // the post-selected optimum is only quasiconvex (mixtures evaluate as
    // mediants), so genuine violations appear.
    let mut convexity = Vec::with_capacity(n_states);
    let mut quasi = Vec::with_capacity(n_states);
    for pair in map_indexed(n_states, Execution::default(), |i| {
        let rho_a = random_density(d, d, seed ^ 0xC300 ^ (i as u64) << 8).expect("valid dims");
        let rho_b = battery_state(d, i, seed ^ 0xC301);
        let ca = c_m(&rho_a).expect("valid");
        let cb = c_m(&rho_b).expect("valid");
        let mut worst_convex: f64 = f64::NEG_INFINITY;
        let mut worst_quasi: f64 = f64::NEG_INFINITY;
        for step in 1..=9usize {
            let p = step as f64 / 10.0;
            let mixed = rho_a
                .mat()
                .scale(p)
                .add(&rho_b.mat().scale(1.0 - p))
                .expect("same dims");
            let cm = c_m(&DensityMatrix::new(mixed).expect("mixture is valid")).expect("valid");
            worst_convex = worst_convex.max(cm - (p * ca + (1.0 - p) * cb));
            worst_quasi = worst_quasi.max(cm - ca.max(cb));
        }
        (worst_convex, worst_quasi)
    }) {
        convexity.push(pair.0);
        quasi.push(pair.1);
    }
    properties.push(Property::from_excesses("convexity", 1e-9, &convexity));
    properties.push(Property::from_excesses("quasiconvexity", 1e-9, &quasi));

    // Measure never increases along sub-normalized instruments.
    let excesses = map_indexed(n_instrument_trials, Execution::default(), |i| {
        let rho = random_density(d, d, seed ^ 0xC400 ^ (i as u64) << 8).expect("valid dims");
        let ins = random_instrument(d, 1 + i % 4, seed ^ 0xC401 ^ i as u64).expect("valid");
        let (out, _) = apply_instrument(&rho, &ins).expect("full-support states fire");
        c_m(&out).expect("valid") - c_m(&rho).expect("valid")
    });
    properties.push(Property::from_excesses("monotonicity_stochastic", 1e-9, &excesses));

    // Robustness routes agree.
    let bisect_tol = tols.bisect;
    let excesses = map_indexed(n_states, Execution::default(), |i| {
        let eig = delta_robustness(&states[i]).expect("valid");
        let bis = delta_robustness_bisection(&states[i], bisect_tol).expect("valid");
        (eig - bis).abs()
    });
    properties.push(Property::from_excesses("two_route_agreement", 1e-7, &excesses));

    // Random diagonal-Kraus search never beats the closed form.
    let excesses = map_indexed(n_states, Execution::default(), |i| {
        let found = random_search_fidelity(
            &states[i],
            ORACLE_SAMPLES_PER_STATE,
            seed ^ 0xC500 ^ (i as u64) << 8,
        )
        .expect("search succeeds on valid states");
        found.best_fidelity - closed[i]
    });
    properties.push(Property::from_excesses("oracle_dominance", 1e-9, &excesses));

    // Multi-Kraus instruments never beat the closed form either.
    let psi = mcs(d).map_err(internal)?;
    let excesses = map_indexed(n_instrument_trials, Execution::default(), |i| {
        let rho = random_density(d, d, seed ^ 0xC600 ^ (i as u64) << 8).expect("valid dims");
        let ins = random_instrument(d, 1 + i % 4, seed ^ 0xC601 ^ i as u64).expect("valid");
        let (out, _) = apply_instrument(&rho, &ins).expect("full-support states fire");
        fidelity_with_pure(&out, &psi).expect("matching dims")
            - max_fidelity(&rho).expect("valid")
    });
    properties.push(Property::from_excesses("multi_kraus_reduction", 1e-9, &excesses));

    // The constructed optimal Kraus attains the closed form.
    let excesses = map_indexed(n_states, Execution::default(), |i| {
        let res = filtrate(&states[i]).expect("valid states filter");
        let achieved = fidelity_with_pure(&res.output_state, &psi).expect("matching dims");
        (achieved - res.lambda_max / d as f64).abs()
    });
    properties.push(Property::from_excesses("achievability", 1e-9, &excesses));

    // Qubit-only analytic cross-check.
    if d == 2 {
        let excesses: Vec<f64> = states
            .iter()
            .zip(&closed)
            .filter_map(|(rho, &f)| match qubit_closed_form(rho) {
                Ok(cf) => Some((cf - f).abs()),
                Err(Error::DegenerateDiagonal { .. }) => None,
                Err(e) => panic!("unexpected error {e}"),
            })
            .collect();
        properties.push(Property::from_excesses("qubit_closed_form_agreement", 1e-10, &excesses));
    }

    let all_pass = properties.iter().all(Property::pass);
    for p in &properties {
        status(format!(
            "{} {}: trials={} violations={} worst_excess={:.3e} tolerance={:.1e}",
            if p.pass() { "ok" } else { "FAIL" },
            p.name,
            p.trials,
            p.violations,
            p.worst_excess,
            p.tolerance
        ));
    }

    let results = json!({
        "dim": d,
        "n_states": n_states,
        "n_instrument_trials": n_instrument_trials,
        "oracle_samples_per_state": ORACLE_SAMPLES_PER_STATE,
        "properties": properties.iter().map(Property::to_json).collect::<Vec<_>>(),
        "all_pass": all_pass,
    });
    Ok((results, all_pass))
}
